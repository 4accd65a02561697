use super::*;
use crate::domain::DomainKind;
use crate::grid::Grid;
use crate::linalg::{Mat2, Vec2};
use crate::operators::LinearOperator;
use proptest::prelude::*;

fn radius(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

/// Disc of radius `r` with `ψ± = ±(r − |x|)` and `F = −tr M − f`.
fn disc_problem(r: f64, h: f64, f: f64, config: &PenaltyConfig) -> DoubleObstacleProblem {
    let domain = Arc::new(Domain2D::new(DomainKind::Disc { radius: r }, h).unwrap());
    let grid = Grid::covering(domain.half_extents(), h, required_margin(config, h)).unwrap();
    let dgrid = DomainGrid::new(&domain, grid).unwrap();
    let plus = GridField::from_fn(grid, |x| r - radius(x));
    let minus = GridField::from_fn(grid, |x| radius(x) - r);
    DoubleObstacleProblem::new(domain, dgrid, EllipticOperator::poisson(f), plus, minus, BoundaryDatum::Zero, 1.0)
        .unwrap()
}

fn torsion_oracle(x: [f64; 2]) -> f64 {
    let r = radius(x);
    if r < 2.0 {
        2.0 - r * r / 4.0
    } else {
        3.0 - r
    }
}

fn sup_error(u: &GridField, dgrid: &DomainGrid, exact: impl Fn([f64; 2]) -> f64) -> f64 {
    dgrid.interior().iter().map(|&k| (u.values[k] - exact(dgrid.grid.point_of(k))).abs()).fold(0.0, f64::max)
}

#[test]
fn beta_examples() {
    let d = 0.25;
    assert_eq!(beta(d, -1.0), (0.0, 0.0));
    assert!((beta(d, 2.0 * d).0 - 2.0).abs() < 1e-15);
    let (v, dv) = beta(d, d);
    assert!((v - 1.0).abs() < 1e-15 && (dv - 1.0 / d).abs() < 1e-12);
    let below = beta(d, d * (1.0 - 1e-9));
    assert!((below.0 - 1.0).abs() < 1e-8 && (below.1 - 1.0 / d).abs() < 1e-6);
}

proptest! {
    #[test]
    fn beta_is_monotone_c1(delta in 1e-3f64..2.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (va, da) = beta(delta, lo);
        let (vb, _) = beta(delta, hi);
        prop_assert!(va <= vb + 1e-15);
        prop_assert!(da >= 0.0);
        // derivative matches a centered difference away from 0 and δ
        let t = lo;
        let e = 1e-6 * delta;
        if (t.abs() > 10.0 * e) && ((t - delta).abs() > 10.0 * e) {
            let fd = (beta(delta, t + e).0 - beta(delta, t - e).0) / (2.0 * e);
            prop_assert!((fd - da).abs() <= 1e-4 * (1.0 + da));
        }
    }
}

#[test]
fn schedule_validation() {
    let mut c = PenaltyConfig::standard(0.1);
    assert!(c.validate().is_ok());
    c.schedule.swap(2, 3);
    assert!(c.validate().is_err());
}

#[test]
fn fully_elastic_disc() {
    let h = 1.0 / 16.0;
    let config = PenaltyConfig::standard(h);
    let problem = disc_problem(1.0, h, 1.0, &config);
    let sol = solve_double_obstacle(&problem, &config).unwrap();
    assert_eq!(sol.report.count(Phase::Upper) + sol.report.count(Phase::Lower), 0, "{}", sol.report.render());
    let err = sup_error(&sol.u, &problem.dgrid, |x| (1.0 - radius(x).powi(2)) / 4.0);
    assert!(err <= 10.0 * h * h, "error {err}");
    assert!(sol.report.certified);
}

#[test]
fn torsion_disc_coarse() {
    let h = 1.0 / 8.0;
    let config = PenaltyConfig::standard(h);
    let problem = disc_problem(3.0, h, 1.0, &config);
    let sol = solve_double_obstacle(&problem, &config).unwrap();
    let err = sup_error(&sol.u, &problem.dgrid, torsion_oracle);
    assert!(err <= 5.0 * h, "error {err}");
    assert!(sol.report.certified, "{}", sol.report.render());
    assert!(sol.report.count(Phase::Upper) > 0);
    assert_eq!(sol.report.count(Phase::Lower), 0);
}

#[test]
fn mirrored_source_touches_lower_obstacle() {
    let h = 1.0 / 8.0;
    let config = PenaltyConfig::standard(h);
    let problem = disc_problem(3.0, h, -1.0, &config);
    let sol = solve_double_obstacle(&problem, &config).unwrap();
    let err = sup_error(&sol.u, &problem.dgrid, |x| -torsion_oracle(x));
    assert!(err <= 5.0 * h, "error {err}");
    assert!(sol.report.count(Phase::Lower) > 0);
    assert_eq!(sol.report.count(Phase::Upper), 0);
}

#[test]
fn zero_data_gives_zero() {
    let h = 1.0 / 8.0;
    let config = PenaltyConfig::standard(h);
    let problem = disc_problem(1.0, h, 0.0, &config);
    let sol = solve_double_obstacle(&problem, &config).unwrap();
    let err = sup_error(&sol.u, &problem.dgrid, |_| 0.0);
    assert!(err < 1e-10, "{err}");
    assert_eq!(sol.report.count(Phase::Elastic), problem.dgrid.interior().len());
}

#[test]
fn discrete_maximum_principle() {
    // nonnegative source and zero data on a plain scheme
    let h = 1.0 / 16.0;
    let domain = Domain2D::new(DomainKind::Ellipse { semi_major: 1.0, semi_minor: 0.6 }, h).unwrap();
    let grid = Grid::covering(domain.half_extents(), h, 2).unwrap();
    let dgrid = DomainGrid::new(&domain, grid).unwrap();
    let op = EllipticOperator::Linear(LinearOperator::new(
        Mat2::new(1.0, 0.3, 0.3, 2.0),
        Vec2::new(0.5, -1.0),
        0.2,
        1.0,
    ));
    let scheme = Scheme::cut_cell(&op, &dgrid, &BoundaryDatum::Zero).unwrap();
    let mut jac = Jacobian::new(&scheme).unwrap();
    let system = |u: &[f64]| {
        let rows: Vec<Row> = (0..u.len()).map(|i| scheme.active_row(i, u).1).collect();
        (scheme.apply(u), rows)
    };
    let out = newton(&scheme, &mut jac, vec![0.0; scheme.len()], system, &NewtonOptions::default(), true, |_, _, _| {})
        .unwrap();
    assert!(out.u.iter().all(|v| *v >= -1e-12));
}

#[test]
fn penalty_violation_halves_with_delta() {
    let h = 1.0 / 8.0;
    let config = PenaltyConfig::standard(h);
    let problem = disc_problem(3.0, h, 1.0, &config);
    let moll = problem.mollify(2.0 * h).unwrap();
    let mut last: Option<f64> = None;
    let mut guess: Option<GridField> = None;
    for k in 4..8 {
        let delta = (0.5f64).powi(k);
        let sol = solve_penalized(&problem.op, &moll, problem.distance(), delta, &NewtonOptions::default(), guess.as_ref())
            .unwrap();
        assert!(sol.sandwich);
        if let Some(prev) = last {
            let ratio = prev / sol.violation_plus;
            assert!((ratio / 2.0 - 1.0).abs() < 0.25, "ratio {ratio}");
        }
        last = Some(sol.violation_plus);
        guess = Some(sol.u);
    }
}

#[test]
fn infeasible_obstacles_rejected() {
    let h = 0.25;
    let domain = Arc::new(Domain2D::new(DomainKind::Disc { radius: 1.0 }, h).unwrap());
    let grid = Grid::covering(domain.half_extents(), h, 4).unwrap();
    let dgrid = DomainGrid::new(&domain, grid).unwrap();
    let plus = GridField::filled(grid, -1.0);
    let minus = GridField::filled(grid, 1.0);
    let err = DoubleObstacleProblem::new(domain, dgrid, EllipticOperator::poisson(1.0), plus, minus, BoundaryDatum::Zero, 1.0);
    assert!(err.is_err());
}

#[test]
fn nonconvergence_carries_history() {
    let h = 1.0 / 8.0;
    let mut config = PenaltyConfig::standard(h);
    config.newton.max_iterations = 1;
    config.newton.residual_tol = 1e-300;
    let problem = disc_problem(3.0, h, 1.0, &config);
    match solve_double_obstacle(&problem, &config) {
        Err(Error::NonConvergence { history, last_iterate, .. }) => {
            assert_eq!(history.len(), 2);
            assert!(!last_iterate.is_empty());
        }
        other => panic!("expected nonconvergence, got {:?}", other.map(|s| s.report.certified)),
    }
}

#[test]
fn comparison_candidates() {
    let h = 1.0 / 8.0;
    let config = PenaltyConfig::standard(h);
    let problem = disc_problem(3.0, h, 1.0, &config);
    let sol = solve_double_obstacle(&problem, &config).unwrap();
    let scheme = problem.scheme().unwrap();
    let same = comparison_check(&problem, &scheme, &sol.u, &sol.u, 1e-8).unwrap();
    assert!(same.pass, "{}", same.render());
    let shifted = GridField { grid: sol.u.grid, values: sol.u.values.iter().map(|v| v - 0.1).collect() };
    let r = comparison_check(&problem, &scheme, &sol.u, &shifted, 1e-8).unwrap();
    assert!(r.pass, "{}", r.render());
    let r = comparison_check(&problem, &scheme, &sol.u, &problem.psi_minus, 1e-8).unwrap();
    assert!(r.pass, "{}", r.render());
    // above the solution: not a subsolution
    let raised = GridField { grid: sol.u.grid, values: sol.u.values.iter().map(|v| v + 0.1).collect() };
    let r = comparison_check(&problem, &scheme, &sol.u, &raised, 1e-8).unwrap();
    assert!(!r.pass);
}
