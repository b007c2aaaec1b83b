mod common;

use proptest::prelude::*;
use stancelp::lp::ols::{least_squares, solve, Design, OlsError};

#[test]
fn qr_matches_normal_equations_on_20_by_5() {
    let mut rng = common::rng(7);
    for _ in 0..50 {
        let (x, y) = common::random_ols_dataset(&mut rng, 20);
        let qr = solve(&x, &y).unwrap();
        let oracle = common::normal_equations(&x, &y);
        for (a, b) in qr.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn duplicated_column_is_named() {
    let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * i) as f64 % 7.0, i as f64]).collect();
    let x = Design::with_intercept(&["a", "b", "a_copy"], &rows);
    let y: Vec<f64> = (0..12).map(|i| i as f64).collect();
    match solve(&x, &y) {
        Err(OlsError::CollinearDesign { column }) => assert_eq!(column, "a_copy"),
        other => panic!("expected CollinearDesign, got {other:?}"),
    }
}

fn dataset_strategy() -> impl Strategy<Value = (Design, Vec<f64>)> {
    (10usize..80, any::<u64>()).prop_map(|(n, seed)| common::random_ols_dataset(&mut common::rng(seed), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residuals_are_orthogonal_to_every_column((x, y) in dataset_strategy()) {
        let fit = least_squares(&x, &y).unwrap();
        let (worst, bound) = common::orthogonality(&x, &y, &fit.residuals);
        prop_assert!(worst < bound, "{worst} >= {bound}");
    }

    #[test]
    fn outcome_shift_moves_only_the_intercept((x, y) in dataset_strategy(), c in -5.0f64..5.0) {
        let base = solve(&x, &y).unwrap();
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        let moved = solve(&x, &shifted).unwrap();
        prop_assert!((moved[0] - base[0] - c).abs() < 1e-10);
        for j in 1..base.len() {
            prop_assert!((moved[j] - base[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn scaling_a_regressor_rescales_its_coefficient(
        (x, y) in dataset_strategy(),
        s in prop_oneof![-4.0f64..-0.25, 0.25f64..4.0],
    ) {
        let base = least_squares(&x, &y).unwrap();
        let data: Vec<f64> = (0..x.rows())
            .flat_map(|i| {
                let mut r = x.row(i).to_vec();
                r[1] *= s;
                r
            })
            .collect();
        let scaled_x = Design::new(x.rows(), x.names().to_vec(), data);
        let scaled = least_squares(&scaled_x, &y).unwrap();
        prop_assert!((scaled.coefficients[1] - base.coefficients[1] / s).abs() < 1e-10);
        for (a, b) in scaled.fitted.iter().zip(&base.fitted) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
