//! Square constraint `|Du|_∞ ≤ 1` reached through smooth approximations.
//!
//! `K°` is the `L¹` unit ball; each level solves with a smooth strictly convex
//! `K°_k ⊃ K°` and the table shows the uniform operator and second-difference
//! bounds along with the shrinking steps between levels.

use std::time::Instant;

use gradient_obstacle::equivalence::{run_approximation_pipeline, PipelineConfig};

fn main() -> gradient_obstacle::Result<()> {
    let mut config = PipelineConfig::l1_torsion()?;
    if let Some(levels) = std::env::args().nth(1) {
        config.levels = levels.split(',').filter_map(|s| s.parse().ok()).collect();
    }
    let start = Instant::now();
    let outcome = run_approximation_pipeline(&config)?;
    print!("{}", outcome.report.render());
    println!("elapsed: {:.2?}", start.elapsed());
    Ok(())
}
