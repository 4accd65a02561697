//! Second derivatives of the obstacle do not increase along characteristics.
//!
//! Along `x(t) = y + t Dγ°(μ)` the Hessian is `V(t) = S (I + t G S)⁻¹` with
//! `S = D²ρ(y)` and `G = D²γ°(μ) ⪰ 0`. It solves the Riccati equation
//! `V̇ = −V G V`, so `t ↦ ξᵀ V(t) ξ` is nonincreasing.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{vec2, Mat2};

use super::ObstacleField;

/// Probes with `|D²γ°(μ)|` above this are skipped (near-singular polar Hessian).
const POLAR_HESSIAN_CAP: f64 = 1e6;
const RICCATI_STEPS: usize = 200;

#[derive(Debug, Clone)]
pub struct MonotonicityViolation {
    pub param: f64,
    pub direction: [f64; 2],
    pub depths: (f64, f64),
    pub excess: f64,
}

#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub probes: usize,
    pub skipped: usize,
    /// Largest `ξᵀV(t₂)ξ − ξᵀV(t₁)ξ` over probes with `t₁ ≤ t₂`.
    pub max_increase: f64,
    /// Largest `d/dt ξᵀVξ = −ξᵀVGVξ` at the deeper point.
    pub max_rate: f64,
    /// Largest relative gap between the closed form and an RK4 Riccati solve.
    pub max_riccati_deviation: f64,
    pub violations: Vec<MonotonicityViolation>,
    pub pass: bool,
}

fn hessian_along(s: &Mat2, g: &Mat2, t: f64) -> Option<Mat2> {
    (Mat2::identity() + t * g * s).try_inverse().map(|inv| s * inv)
}

fn riccati_rk4(s: &Mat2, g: &Mat2, t: f64) -> Mat2 {
    let rhs = |v: &Mat2| -(v * g * v);
    let dt = t / RICCATI_STEPS as f64;
    let mut v = *s;
    for _ in 0..RICCATI_STEPS {
        let k1 = rhs(&v);
        let k2 = rhs(&(v + 0.5 * dt * k1));
        let k3 = rhs(&(v + 0.5 * dt * k2));
        let k4 = rhs(&(v + dt * k3));
        v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    v
}

/// Random (characteristic, direction, depth pair) probes on a built field.
pub fn monotonicity_check(field: &ObstacleField, probes: usize, seed: u64, tol: f64) -> MonotonicityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let env = field.envelope();
    let domain = env.domain();
    let candidates: Vec<usize> =
        (0..field.analytics().len()).filter(|i| field.analytics()[*i].is_some()).collect();
    let extent = domain.half_extents();
    let depth_cap = 2.0 * extent[0].max(extent[1]);
    let mut report = MonotonicityReport {
        probes: 0,
        skipped: 0,
        max_increase: f64::NEG_INFINITY,
        max_rate: f64::NEG_INFINITY,
        max_riccati_deviation: 0.0,
        violations: Vec::new(),
        pass: true,
    };
    if candidates.is_empty() {
        report.skipped = probes;
        report.pass = false;
        return report;
    }
    let mut attempts = 0;
    while report.probes < probes && attempts < 20 * probes {
        attempts += 1;
        let a = field.analytics()[candidates[rng.random_range(0..candidates.len())]]
            .expect("filtered to analytic samples");
        let g = a.polar_hessian;
        if g.abs().max() > POLAR_HESSIAN_CAP {
            report.skipped += 1;
            continue;
        }
        let s = a.boundary_hessian;
        let trace = a.w.trace();
        let limit = if trace > 0.0 { (0.95 / trace).min(depth_cap) } else { depth_cap };
        let y = a.geometry.point;
        let start = env.datum().value([y.x, y.y]);
        let mut t2 = rng.random::<f64>() * limit;
        let mut reached = false;
        for _ in 0..30 {
            let x = y + t2 * a.characteristic;
            let xp = [x.x, x.y];
            if domain.contains(xp) {
                let cp = env.closest_point(xp);
                if !cp.is_multiple && (cp.value - (start + t2)).abs() <= env.tie_tolerance() {
                    reached = true;
                    break;
                }
            }
            t2 *= 0.5;
        }
        if !reached {
            report.skipped += 1;
            continue;
        }
        let t1 = rng.random::<f64>() * t2;
        let angle = rng.random::<f64>() * std::f64::consts::TAU;
        let xi = vec2(angle.cos(), angle.sin());
        let (Some(v1), Some(v2)) = (hessian_along(&s, &g, t1), hessian_along(&s, &g, t2)) else {
            report.skipped += 1;
            continue;
        };
        let q1 = xi.dot(&(v1 * xi));
        let q2 = xi.dot(&(v2 * xi));
        let increase = q2 - q1;
        report.max_increase = report.max_increase.max(increase);
        let rate = -xi.dot(&(v2 * g * v2 * xi));
        report.max_rate = report.max_rate.max(rate);
        let rk = riccati_rk4(&s, &g, t2);
        let deviation = (rk - v2).abs().max() / (1.0 + v2.abs().max());
        report.max_riccati_deviation = report.max_riccati_deviation.max(deviation);
        if increase > tol {
            report.violations.push(MonotonicityViolation {
                param: a.geometry.param,
                direction: [xi.x, xi.y],
                depths: (t1, t2),
                excess: increase,
            });
        }
        report.probes += 1;
    }
    report.pass = report.violations.is_empty() && report.probes == probes && report.max_rate <= tol;
    report
}
