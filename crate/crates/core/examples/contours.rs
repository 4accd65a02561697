//! Free boundary of the torsion problem as a contour of `ρ − u`.
//!
//! The coincidence set `{u = ρ}` is the annulus `r ≥ 2`, so a small level of
//! `ρ − u` traces a circle near radius 2.

use std::sync::Arc;

use gradient_obstacle::cli_io::marching_squares;
use gradient_obstacle::obstacle::{build_obstacle, Which};
use gradient_obstacle::penalty_solver::required_margin;
use gradient_obstacle::{
    solve_double_obstacle, BoundaryDatum, ConvexBody, Domain2D, DomainGrid, DomainKind, DoubleObstacleProblem,
    EllipticOperator, Grid, GridField, PenaltyConfig,
};

fn main() -> gradient_obstacle::Result<()> {
    let h = 1.0 / 16.0;
    let config = PenaltyConfig::standard(h);
    let domain = Arc::new(Domain2D::new(DomainKind::Disc { radius: 3.0 }, h)?);
    let grid = Grid::covering(domain.half_extents(), h, required_margin(&config, h))?;
    let dgrid = DomainGrid::new(&domain, grid)?;
    let ball = ConvexBody::ball(2, 1.0)?;
    let upper = build_obstacle(&domain, &ball, &BoundaryDatum::Zero, &dgrid, Which::Upper)?;
    let lower = build_obstacle(&domain, &ball, &BoundaryDatum::Zero, &dgrid, Which::Lower)?;
    let problem = DoubleObstacleProblem::from_obstacles(EllipticOperator::poisson(1.0), &upper, &lower, &dgrid)?;
    let u = solve_double_obstacle(&problem, &config)?.u;

    let mut gap = GridField::filled(grid, f64::NAN);
    for &k in dgrid.interior() {
        gap.values[k] = problem.psi_plus.values[k] - u.values[k];
    }
    // ρ − u = (r − 2)²/4 inside, so the level ℓ sits at r = 2 − 2√ℓ
    for level in [0.01, 0.04, 0.25] {
        let lines = marching_squares(&gap, level);
        let radii: Vec<f64> = lines.iter().flat_map(|l| l.points.iter().map(|p| p[0].hypot(p[1]))).collect();
        let mean = radii.iter().sum::<f64>() / radii.len() as f64;
        let spread = radii.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
        println!(
            "level {level:<5} {} polyline(s), closed {:?}, mean radius {mean:.4} (exact {:.4}), spread {spread:.2e}",
            lines.len(),
            lines.iter().map(|l| l.closed).collect::<Vec<_>>(),
            2.0 - 2.0 * level.sqrt()
        );
    }
    Ok(())
}
