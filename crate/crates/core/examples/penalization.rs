//! Penalized equations `F[u] + β_δ(u − ψ⁺) − β_δ(ψ⁻ − u) = 0` for shrinking
//! `δ`: the obstacle violation scales like `δ` once the source is strong
//! enough that the penalty, not the unconstrained solution, sets the excess.
//!
//! Usage: `penalization [f]` (default 20).

use std::sync::Arc;

use gradient_obstacle::penalty_solver::{required_margin, solve_penalized, NewtonOptions};
use gradient_obstacle::{
    BoundaryDatum, Domain2D, DomainGrid, DomainKind, DoubleObstacleProblem, EllipticOperator, Grid, GridField,
    PenaltyConfig,
};

fn main() -> gradient_obstacle::Result<()> {
    let source: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20.0);
    let (h, radius) = (1.0 / 16.0, 3.0);
    let config = PenaltyConfig::standard(h);
    let domain = Arc::new(Domain2D::new(DomainKind::Disc { radius }, h)?);
    let grid = Grid::covering(domain.half_extents(), h, required_margin(&config, h))?;
    let dgrid = DomainGrid::new(&domain, grid)?;
    let plus = GridField::from_fn(grid, |x| radius - x[0].hypot(x[1]));
    let minus = GridField::from_fn(grid, |x| x[0].hypot(x[1]) - radius);
    let problem = DoubleObstacleProblem::new(
        domain,
        dgrid,
        EllipticOperator::poisson(source),
        plus,
        minus,
        BoundaryDatum::Zero,
        1.0,
    )?;
    let mollified = problem.mollify(2.0 * h)?;

    println!("{:>10} {:>12} {:>10} {:>8} {:>10}", "delta", "violation", "C", "newton", "slope");
    let mut guess: Option<GridField> = None;
    let mut previous: Option<(f64, f64)> = None;
    let mut points = Vec::new();
    for k in 0..=8 {
        let delta = 0.5f64.powi(k);
        let sol = solve_penalized(
            &problem.op,
            &mollified,
            problem.distance(),
            delta,
            &NewtonOptions::default(),
            guess.as_ref(),
        )?;
        let slope = previous.map(|(d, v)| (v / sol.violation_plus).ln() / (d / delta).ln());
        println!(
            "{delta:>10.5} {:>12.4e} {:>10.4} {:>8} {:>10}",
            sol.violation_plus,
            sol.penalty_sup,
            sol.iterations,
            slope.map_or("-".into(), |s| format!("{s:.3}"))
        );
        assert!(sol.sandwich);
        previous = Some((delta, sol.violation_plus));
        points.push((delta.ln(), sol.violation_plus.ln()));
        guess = Some(sol.u);
    }
    let n = points.len() as f64;
    let (mx, my) = (points.iter().map(|p| p.0).sum::<f64>() / n, points.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    println!("least-squares log-log slope over all delta: {slope:.3}");
    Ok(())
}
