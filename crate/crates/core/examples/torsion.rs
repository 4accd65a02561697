//! Elastic-plastic torsion of a round bar of radius 3.
//!
//! Solves `max{min{−Δu − 1, u + ρ̄}, u − ρ} = 0` with `ρ = ρ̄ = 3 − |x|` and
//! compares with the radial solution `2 − r²/4` for `r < 2`, `3 − r` beyond.

use std::sync::Arc;
use std::time::Instant;

use gradient_obstacle::obstacle::{build_obstacle, Which};
use gradient_obstacle::penalty_solver::{required_margin, solve_double_obstacle, DoubleObstacleProblem, PenaltyConfig, Phase};
use gradient_obstacle::{BoundaryDatum, ConvexBody, Domain2D, DomainGrid, DomainKind, EllipticOperator, Grid};

fn main() -> gradient_obstacle::Result<()> {
    let h: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).map(|n: f64| 1.0 / n).unwrap_or(1.0 / 32.0);
    let start = Instant::now();
    let domain = Arc::new(Domain2D::new(DomainKind::Disc { radius: 3.0 }, h)?);
    let config = PenaltyConfig::standard(h);
    let grid = Grid::covering(domain.half_extents(), h, required_margin(&config, h))?;
    let dgrid = DomainGrid::new(&domain, grid)?;
    let ball = ConvexBody::ball(2, 1.0)?;
    let upper = build_obstacle(&domain, &ball, &BoundaryDatum::Zero, &dgrid, Which::Upper)?;
    let lower = build_obstacle(&domain, &ball, &BoundaryDatum::Zero, &dgrid, Which::Lower)?;
    println!("obstacles on {} nodes: {:.2?}", grid.len(), start.elapsed());

    let problem = DoubleObstacleProblem::from_obstacles(EllipticOperator::poisson(1.0), &upper, &lower, &dgrid)?;
    let solved = Instant::now();
    let solution = solve_double_obstacle(&problem, &config)?;
    println!("solve: {:.2?}", solved.elapsed());
    print!("{}", solution.report.render());

    let exact = |x: [f64; 2]| {
        let r = x[0].hypot(x[1]);
        if r < 2.0 { 2.0 - r * r / 4.0 } else { 3.0 - r }
    };
    let mut err: f64 = 0.0;
    let mut inner_plastic = f64::INFINITY;
    for &k in dgrid.interior() {
        let x = grid.point_of(k);
        err = err.max((solution.u.values[k] - exact(x)).abs());
        if solution.report.phases[k] == Some(Phase::Upper) {
            inner_plastic = inner_plastic.min(x[0].hypot(x[1]));
        }
    }
    println!("h = {h}, sup error = {err:.4e} ({:.2} h)", err / h);
    println!("innermost plastic node radius = {inner_plastic:.4} (exact free boundary 2)");
    Ok(())
}
