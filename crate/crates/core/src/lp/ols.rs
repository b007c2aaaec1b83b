//! Least squares through a Householder QR factorization.

use thiserror::Error;

/// Relative threshold on |R_jj| below which a design is rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OlsError {
    #[error("design is rank deficient at column {column:?}")]
    CollinearDesign { column: String },
    #[error("{rows} rows cannot identify {cols} coefficients")]
    Underdetermined { rows: usize, cols: usize },
    #[error("design has {design} rows but outcome has {outcome}")]
    DimensionMismatch { design: usize, outcome: usize },
}

/// Dense row-major design matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    names: Vec<String>,
}

impl Design {
    pub fn new(rows: usize, names: Vec<String>, data: Vec<f64>) -> Self {
        let cols = names.len();
        assert_eq!(data.len(), rows * cols, "design data does not match its shape");
        Self {
            rows,
            cols,
            data,
            names,
        }
    }

    /// Prepend an intercept column to the given regressor rows.
    pub fn with_intercept(regressor_names: &[&str], rows: &[Vec<f64>]) -> Self {
        let mut names = vec!["intercept".to_string()];
        names.extend(regressor_names.iter().map(|s| s.to_string()));
        let mut data = Vec::with_capacity(rows.len() * names.len());
        for r in rows {
            assert_eq!(r.len(), regressor_names.len());
            data.push(1.0);
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), names, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Design made of the listed rows (with repetition).
    pub fn select_rows(&self, idx: &[usize]) -> Design {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Design::new(idx.len(), self.names.clone(), data)
    }

    pub fn multiply(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(beta).map(|(x, b)| x * b).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
}

/// Solve only for the coefficients.
pub fn solve(x: &Design, y: &[f64]) -> Result<Vec<f64>, OlsError> {
    let (n, k) = (x.rows, x.cols);
    if y.len() != n {
        return Err(OlsError::DimensionMismatch {
            design: n,
            outcome: y.len(),
        });
    }
    if n < k {
        return Err(OlsError::Underdetermined { rows: n, cols: k });
    }

    // column-major working copy, overwritten by R above the diagonal
    let mut a = vec![0.0; n * k];
    for i in 0..n {
        for j in 0..k {
            a[j * n + i] = x.get(i, j);
        }
    }
    let mut qty = y.to_vec();
    let mut diag = vec![0.0; k];
    let mut v = vec![0.0; n];

    for j in 0..k {
        let col = &a[j * n..(j + 1) * n];
        let norm = col[j..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        let len = n - j;
        v[..len].copy_from_slice(&col[j..]);
        v[0] -= alpha;
        let vnorm2: f64 = v[..len].iter().map(|x| x * x).sum();
        diag[j] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j..k {
            let target = &mut a[c * n + j..(c + 1) * n];
            let s: f64 = v[..len].iter().zip(target.iter()).map(|(p, q)| p * q).sum();
            let f = 2.0 * s / vnorm2;
            for (t, p) in target.iter_mut().zip(&v[..len]) {
                *t -= f * p;
            }
        }
        let s: f64 = v[..len].iter().zip(&qty[j..]).map(|(p, q)| p * q).sum();
        let f = 2.0 * s / vnorm2;
        for (t, p) in qty[j..].iter_mut().zip(&v[..len]) {
            *t -= f * p;
        }
    }

    let largest = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if let Some(j) = diag
        .iter()
        .position(|d| largest == 0.0 || d.abs() < RANK_TOLERANCE * largest)
    {
        return Err(OlsError::CollinearDesign {
            column: x.names[j].clone(),
        });
    }

    let mut beta = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = qty[j];
        for c in j + 1..k {
            s -= a[c * n + j] * beta[c];
        }
        beta[j] = s / diag[j];
    }
    Ok(beta)
}

/// Ordinary least squares. The design must already contain any intercept.
pub fn least_squares(x: &Design, y: &[f64]) -> Result<OlsFit, OlsError> {
    let coefficients = solve(x, y)?;
    let fitted = x.multiply(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let r_squared = if sst == 0.0 { 1.0 } else { (1.0 - ssr / sst).clamp(0.0, 1.0) };
    Ok(OlsFit {
        coefficients,
        fitted,
        residuals,
        r_squared,
    })
}
