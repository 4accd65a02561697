use std::sync::Arc;

use super::*;
use crate::domain::{BoundaryDatum, Domain2D, DomainKind};
use crate::obstacle::{build_obstacle, Which};
use crate::operators::EllipticOperator;
use crate::penalty_solver::{required_margin, solve_double_obstacle, DoubleObstacleProblem, PenaltyConfig};
use proptest::prelude::*;

struct Solved {
    dgrid: DomainGrid,
    upper: ObstacleField,
    lower: ObstacleField,
    problem: DoubleObstacleProblem,
    u: GridField,
    tol_c: f64,
}

fn torsion(radius: f64, h: f64, f: f64) -> Solved {
    let domain = Arc::new(Domain2D::new(DomainKind::Disc { radius }, h).unwrap());
    let config = PenaltyConfig::standard(h);
    let grid = Grid::covering(domain.half_extents(), h, required_margin(&config, h)).unwrap();
    let dgrid = DomainGrid::new(&domain, grid).unwrap();
    let ball = ConvexBody::ball(2, 1.0).unwrap();
    let upper = build_obstacle(&domain, &ball, &BoundaryDatum::Zero, &dgrid, Which::Upper).unwrap();
    let lower = build_obstacle(&domain, &ball, &BoundaryDatum::Zero, &dgrid, Which::Lower).unwrap();
    let problem = DoubleObstacleProblem::from_obstacles(EllipticOperator::poisson(f), &upper, &lower, &dgrid).unwrap();
    let sol = solve_double_obstacle(&problem, &config).unwrap();
    Solved { dgrid, upper, lower, problem, u: sol.u, tol_c: sol.report.tol_c }
}

fn decomposition(s: &Solved) -> CoincidenceDecomposition {
    let tol_p = coincidence_tolerance(s.dgrid.grid.h, s.upper.boundary_hessian_bound());
    decompose(&s.u, &s.problem.psi_plus, &s.problem.psi_minus, &s.dgrid, tol_p).unwrap()
}

#[test]
fn torsion_structure() {
    let h = 1.0 / 8.0;
    let s = torsion(3.0, h, 1.0);
    let d = decomposition(&s);
    let (e, p, m) = d.counts();
    assert!(e > 0 && p > 0 && m == 0, "{}", d.render());
    for k in 0..d.grid.len() {
        let r = d.grid.point_of(k)[0].hypot(d.grid.point_of(k)[1]);
        if d.upper[k] {
            assert!(r >= 2.0 - 2.0 * h, "plastic node at r = {r}");
        }
    }
    let (mean, std) = d.free_boundary_radius().unwrap();
    assert!((mean - 2.0).abs() <= 2.0 * h && std <= h, "{mean} {std}");

    let scheme = s.problem.scheme().unwrap();
    let ball = ConvexBody::ball(2, 1.0).unwrap();
    let t2 = check_theorem2(&s.u, &d, &scheme, &ball, &s.dgrid, s.tol_c, 2).unwrap();
    assert!(t2.pass, "{}", t2.render(&s.dgrid.grid));

    let tol_h = active_set_tolerance(&s.u, &s.dgrid);
    let p35 = check_prop_3_5(&s.u, &d, &ball, &s.dgrid, tol_h, 2).unwrap();
    assert!(p35.pass, "{}", p35.render());

    let p33 = check_prop_3_3(&d, s.upper.ridge(), s.lower.ridge());
    assert!(p33.pass, "{}", p33.render());
    assert!(p33.components.iter().all(|c| c.distance_cells > 1.5 / h));

    let l32 = check_lemma_3_2(&s.u, &d, &s.upper, &s.lower, &s.dgrid, 50, 7).unwrap();
    assert!(l32.pass && l32.samples == 50, "{}", l32.render());
}

#[test]
fn fully_elastic_has_no_coincidence() {
    let s = torsion(1.0, 1.0 / 16.0, 1.0);
    let d = decomposition(&s);
    assert_eq!(d.counts().1 + d.counts().2, 0);
    assert!(d.free_boundary.is_empty());
    let ball = ConvexBody::ball(2, 1.0).unwrap();
    let p35 = check_prop_3_5(&s.u, &d, &ball, &s.dgrid, active_set_tolerance(&s.u, &s.dgrid), 2).unwrap();
    assert!(p35.pass && p35.mismatched == 0);
    let l32 = check_lemma_3_2(&s.u, &d, &s.upper, &s.lower, &s.dgrid, 10, 1).unwrap();
    assert_eq!(l32.samples, 0);
}

#[test]
fn mirrored_source_lower_coincidence() {
    let s = torsion(3.0, 1.0 / 8.0, -1.0);
    let d = decomposition(&s);
    assert!(d.counts().1 == 0 && d.counts().2 > 0);
    let ball = ConvexBody::ball(2, 1.0).unwrap();
    let p35 = check_prop_3_5(&s.u, &d, &ball, &s.dgrid, active_set_tolerance(&s.u, &s.dgrid), 2).unwrap();
    assert!(p35.pass, "{}", p35.render());
    let l32 = check_lemma_3_2(&s.u, &d, &s.upper, &s.lower, &s.dgrid, 20, 3).unwrap();
    assert!(l32.pass && l32.samples > 0, "{}", l32.render());
}

#[test]
fn zero_field_is_elastic() {
    let h = 1.0 / 8.0;
    let domain = Domain2D::new(DomainKind::Disc { radius: 1.0 }, h).unwrap();
    let grid = Grid::covering(domain.half_extents(), h, 2).unwrap();
    let dgrid = DomainGrid::new(&domain, grid).unwrap();
    let u = GridField::filled(grid, 0.0);
    let plus = GridField::from_fn(grid, |x| 1.0 - x[0].hypot(x[1]));
    let minus = GridField::from_fn(grid, |x| x[0].hypot(x[1]) - 1.0);
    let d = decompose(&u, &plus, &minus, &dgrid, 1e-8).unwrap();
    assert_eq!(d.counts(), (dgrid.interior().len(), 0, 0));
    let other = Grid::covering(domain.half_extents(), h, 3).unwrap();
    assert!(decompose(&GridField::filled(other, 0.0), &plus, &minus, &dgrid, 1e-8).is_err());
}

#[test]
fn decomposition_stable_under_tolerance_halving() {
    let s = torsion(3.0, 1.0 / 8.0, 1.0);
    let d = decomposition(&s);
    let half = decompose(&s.u, &s.problem.psi_plus, &s.problem.psi_minus, &s.dgrid, 0.5 * d.tol_p).unwrap();
    let band = d.band(2);
    for k in 0..d.grid.len() {
        if d.upper[k] != half.upper[k] || d.elastic[k] != half.elastic[k] {
            assert!(band[k]);
        }
    }
}

proptest! {
    #[test]
    fn gradient_exact_on_quadratics(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -1.0f64..1.0) {
        let h = 1.0 / 8.0;
        let domain = Domain2D::new(DomainKind::Ellipse { semi_major: 1.0, semi_minor: 0.6 }, h).unwrap();
        let grid = Grid::covering(domain.half_extents(), h, 2).unwrap();
        let dgrid = DomainGrid::new(&domain, grid).unwrap();
        let u = GridField::from_fn(grid, |x| a * x[0] + b * x[1] + c * x[0] * x[0]);
        let grad = discrete_gradient(&u, &dgrid);
        for &k in dgrid.interior() {
            let x = grid.point_of(k);
            if let Some(g) = grad[k] {
                // one-sided first-order fallbacks carry an O(h) error
                prop_assert!((g.x - (a + 2.0 * c * x[0])).abs() <= 1.01 * c.abs() * h + 1e-12);
                prop_assert!((g.y - b).abs() <= 1e-12);
            }
        }
    }
}
