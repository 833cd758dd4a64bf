//! Writes the seeded random SDPs used by the solver fixtures:
//! `cargo run -p pepkit --example export_fixtures -- <dir>`.

use pepkit::sdp::random::{random_feasible, RandomSpec};
use pepkit::sdp::sdpa;

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "crates/core/tests/fixtures/sdp".into());
    std::fs::create_dir_all(&dir)?;
    for seed in 0..20u64 {
        let p = random_feasible(seed, &RandomSpec::default());
        std::fs::write(format!("{dir}/random_{seed:02}.dat-s"), sdpa::write(&p))?;
    }
    Ok(())
}
