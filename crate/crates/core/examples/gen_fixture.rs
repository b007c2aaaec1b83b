//! Regenerate the bundled synthetic fixture:
//!
//! ```text
//! cargo run -p stancelp --example gen_fixture -- crates/core/fixtures/synthetic
//! ```
//!
//! 47 press conferences with a 0.05 response to sentiment at horizon 10 and
//! zero elsewhere.

use stancelp::synthetic::{generate, write_fixture, FixtureSpec};
use std::path::PathBuf;

const FIXTURE_SEED: u64 = 2011;
const RUN_SEED: u64 = 20220126;

fn main() -> std::io::Result<()> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/fixtures/synthetic".to_string())
        .into();
    let spec = FixtureSpec::spike(10, 15, 0.05, FIXTURE_SEED);
    let fixture = generate(&spec);
    write_fixture(&dir, &fixture, RUN_SEED, 2000)?;
    println!("wrote {} documents to {}", fixture.documents.len(), dir.display());
    Ok(())
}
