//! Fully nonlinear elliptic operators `F(x, z, p, M)` in the plane.
//!
//! Sign convention: `F` is nonincreasing in `M`, so `−tr M − 1` is the
//! torsion operator and `F[u] = 0` reads `Δu = −1`. Pucci operators are
//! `P⁻(−M) − f` ("pucci_minus", concave in `M`) and `P⁺(−M) − f`
//! ("pucci_plus", convex in `M`), with `P⁻(M) = inf tr(AM)` and
//! `P⁺(M) = sup tr(AM)` over `λI ≤ A ≤ ΛI`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::linalg::{is_symmetric, sym_eigenvalues, vec2, Mat2, Vec2};

/// `−tr(A M) + ⟨b, p⟩ + c z − f`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    pub a: Mat2,
    pub b: Vec2,
    pub c: f64,
    pub f: f64,
}

impl LinearOperator {
    pub fn new(a: Mat2, b: Vec2, c: f64, f: f64) -> Self {
        Self { a, b, c, f }
    }

    /// `−tr M − f`.
    pub fn poisson(f: f64) -> Self {
        Self::new(Mat2::identity(), Vec2::zeros(), 0.0, f)
    }

    pub fn evaluate(&self, z: f64, p: Vec2, m: &Mat2) -> f64 {
        -(self.a * m).trace() + self.b.dot(&p) + self.c * z - self.f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EllipticOperator {
    Linear(LinearOperator),
    PucciMinus { lambda: f64, big_lambda: f64, f: f64 },
    PucciPlus { lambda: f64, big_lambda: f64, f: f64 },
    Bellman(Vec<LinearOperator>),
    /// Linear with smooth `x`-dependent coefficients, scaled by `amplitude ∈ [0, 2]`.
    VariableLinear { amplitude: f64 },
}

/// `P⁻(M) = λ Σ eᵢ⁺ − Λ Σ eᵢ⁻` over the eigenvalues of `M`.
pub fn pucci_inf(lambda: f64, big_lambda: f64, m: &Mat2) -> f64 {
    let (e1, e2) = sym_eigenvalues(m);
    [e1, e2].iter().map(|e| if *e > 0.0 { lambda * e } else { big_lambda * e }).sum()
}

/// `P⁺(M) = Λ Σ eᵢ⁺ − λ Σ eᵢ⁻`.
pub fn pucci_sup(lambda: f64, big_lambda: f64, m: &Mat2) -> f64 {
    let (e1, e2) = sym_eigenvalues(m);
    [e1, e2].iter().map(|e| if *e > 0.0 { big_lambda * e } else { lambda * e }).sum()
}

/// How the branches of a discrete operator combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Max,
    Min,
}

/// One monotone linear branch `−Σ w_k D_k + ⟨drift, p⟩ + c z − f` in terms of
/// second differences `D_k` along x, y and the two diagonals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub weights: [f64; 4],
    pub drift: Vec2,
    pub c: f64,
    pub f: f64,
}

impl EllipticOperator {
    pub fn poisson(f: f64) -> Self {
        EllipticOperator::Linear(LinearOperator::poisson(f))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EllipticOperator::PucciMinus { lambda, big_lambda, .. }
            | EllipticOperator::PucciPlus { lambda, big_lambda, .. } => {
                if !(*lambda > 0.0 && lambda <= big_lambda && big_lambda.is_finite()) {
                    return Err(invalid("Pucci constants need 0 < lambda <= Lambda"));
                }
            }
            EllipticOperator::Bellman(list) => {
                if list.is_empty() {
                    return Err(invalid("Bellman operator needs at least one member"));
                }
            }
            EllipticOperator::VariableLinear { amplitude } => {
                if !(0.0..=2.0).contains(amplitude) {
                    return Err(invalid("variable-coefficient amplitude must lie in [0, 2]"));
                }
            }
            EllipticOperator::Linear(_) => {}
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            EllipticOperator::Linear(_) => "linear",
            EllipticOperator::PucciMinus { .. } => "pucci_minus",
            EllipticOperator::PucciPlus { .. } => "pucci_plus",
            EllipticOperator::Bellman(_) => "bellman",
            EllipticOperator::VariableLinear { .. } => "variable_linear",
        }
    }

    pub fn is_x_dependent(&self) -> bool {
        matches!(self, EllipticOperator::VariableLinear { .. })
    }

    /// Coefficients of the variable linear operator at `x`.
    pub fn variable_coefficients(amplitude: f64, x: [f64; 2]) -> LinearOperator {
        let a = amplitude;
        let (x1, x2) = (x[0], x[1]);
        let off = 0.25 * a * (x1 + x2).sin();
        LinearOperator {
            a: Mat2::new(1.0 + 0.5 * a * (1.0 + x1.sin()), off, off, 1.0 + 0.5 * a * (1.0 + x2.cos())),
            b: vec2(0.3 * a * x2.sin(), -0.2 * a * x1.cos()),
            c: 0.5 * a * (1.0 + x1.sin().powi(2)),
            f: 1.0 + 0.5 * x1.sin() * x2.cos(),
        }
    }

    /// `F(x, z, p, M)`; `x` is ignored by the constant-coefficient kinds.
    pub fn evaluate(&self, x: [f64; 2], z: f64, p: Vec2, m: &Mat2) -> Result<f64> {
        if !is_symmetric(m, 1e-12) {
            return Err(invalid("matrix argument must be symmetric"));
        }
        Ok(self.evaluate_unchecked(x, z, p, m))
    }

    fn evaluate_unchecked(&self, x: [f64; 2], z: f64, p: Vec2, m: &Mat2) -> f64 {
        match self {
            EllipticOperator::Linear(op) => op.evaluate(z, p, m),
            EllipticOperator::PucciMinus { lambda, big_lambda, f } => {
                pucci_inf(*lambda, *big_lambda, &(-m)) - f
            }
            EllipticOperator::PucciPlus { lambda, big_lambda, f } => {
                pucci_sup(*lambda, *big_lambda, &(-m)) - f
            }
            EllipticOperator::Bellman(list) => {
                list.iter().map(|op| op.evaluate(z, p, m)).fold(f64::NEG_INFINITY, f64::max)
            }
            EllipticOperator::VariableLinear { amplitude } => {
                Self::variable_coefficients(*amplitude, x).evaluate(z, p, m)
            }
        }
    }

    /// Declared ellipticity constants `(λ_e, Λ_e)`.
    pub fn ellipticity(&self) -> (f64, f64) {
        let of_linear = |a: &Mat2| {
            let (hi, lo) = sym_eigenvalues(a);
            (lo, hi)
        };
        match self {
            EllipticOperator::Linear(op) => of_linear(&op.a),
            EllipticOperator::PucciMinus { lambda, big_lambda, .. }
            | EllipticOperator::PucciPlus { lambda, big_lambda, .. } => (*lambda, *big_lambda),
            EllipticOperator::Bellman(list) => list.iter().map(|op| of_linear(&op.a)).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |acc, (lo, hi)| (acc.0.min(lo), acc.1.max(hi)),
            ),
            EllipticOperator::VariableLinear { amplitude } => {
                (1.0 - 0.25 * amplitude, 1.0 + 1.25 * amplitude)
            }
        }
    }

    /// Lipschitz constants `(c₄, c₅)` in `p` and `z`.
    pub fn lipschitz_constants(&self) -> (f64, f64) {
        match self {
            EllipticOperator::Linear(op) => (op.b.norm(), op.c.abs()),
            EllipticOperator::PucciMinus { .. } | EllipticOperator::PucciPlus { .. } => (0.0, 0.0),
            EllipticOperator::Bellman(list) => list
                .iter()
                .fold((0.0, 0.0), |acc, op| (f64::max(acc.0, op.b.norm()), f64::max(acc.1, op.c.abs()))),
            EllipticOperator::VariableLinear { amplitude } => (0.4 * amplitude, *amplitude),
        }
    }

    /// Whether `F(x, 0, 0, 0) = 0` is expected.
    pub fn is_source_free(&self) -> bool {
        match self {
            EllipticOperator::Linear(op) => op.f == 0.0,
            EllipticOperator::PucciMinus { f, .. } | EllipticOperator::PucciPlus { f, .. } => *f == 0.0,
            EllipticOperator::Bellman(list) => list.iter().all(|op| op.f == 0.0),
            EllipticOperator::VariableLinear { .. } => false,
        }
    }

    /// Monotone branches of the discrete operator at `x`.
    ///
    /// Linear coefficients must be diagonally dominant so that the mixed
    /// derivative fits on a diagonal with nonnegative weights.
    pub fn branches(&self, x: [f64; 2]) -> Result<(Combine, Vec<Branch>)> {
        let linear = |op: &LinearOperator| -> Result<Branch> {
            let a12 = 0.5 * (op.a[(0, 1)] + op.a[(1, 0)]);
            let wx = op.a[(0, 0)] - a12.abs();
            let wy = op.a[(1, 1)] - a12.abs();
            if wx < 0.0 || wy < 0.0 {
                return Err(invalid(
                    "coefficient matrix is not diagonally dominant; no monotone stencil",
                ));
            }
            Ok(Branch {
                weights: [wx, wy, 2.0 * a12.max(0.0), 2.0 * (-a12).max(0.0)],
                drift: op.b,
                c: op.c,
                f: op.f,
            })
        };
        match self {
            EllipticOperator::Linear(op) => Ok((Combine::Max, vec![linear(op)?])),
            EllipticOperator::VariableLinear { amplitude } => {
                Ok((Combine::Max, vec![linear(&Self::variable_coefficients(*amplitude, x))?]))
            }
            EllipticOperator::Bellman(list) => {
                Ok((Combine::Max, list.iter().map(linear).collect::<Result<Vec<_>>>()?))
            }
            EllipticOperator::PucciMinus { lambda, big_lambda, f }
            | EllipticOperator::PucciPlus { lambda, big_lambda, f } => {
                let combine = if matches!(self, EllipticOperator::PucciPlus { .. }) {
                    Combine::Max
                } else {
                    Combine::Min
                };
                let gap = big_lambda - lambda;
                let mk = |weights: [f64; 4]| Branch { weights, drift: Vec2::zeros(), c: 0.0, f: *f };
                let mut list = vec![mk([*lambda, *lambda, 0.0, 0.0])];
                for k in 0..4 {
                    let mut w = [*lambda, *lambda, 0.0, 0.0];
                    w[k] += gap;
                    list.push(mk(w));
                }
                list.push(mk([*big_lambda, *big_lambda, 0.0, 0.0]));
                Ok((combine, list))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub probes: usize,
    pub violations: usize,
    pub max_violation: f64,
    pub witness: Option<String>,
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub lambda_e: f64,
    pub big_lambda_e: f64,
    pub c4: f64,
    pub c5: f64,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "lambda_e: {}\nLambda_e: {}\nc4: {}\nc5: {}\n",
            self.lambda_e, self.big_lambda_e, self.c4, self.c5
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{}: {} ({} probes, {} violations, max {:.3e})\n",
                c.name,
                if c.violations == 0 { "PASS" } else { "FAIL" },
                c.probes,
                c.violations,
                c.max_violation
            ));
            if let Some(w) = &c.witness {
                out.push_str(&format!("  witness: {w}\n"));
            }
        }
        out.push_str(&format!("assumptions: {}\n", if self.pass() { "PASS" } else { "FAIL" }));
        out
    }
}

fn random_symmetric(rng: &mut ChaCha8Rng, scale: f64) -> Mat2 {
    let (a, b, c) = (
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    );
    Mat2::new(a, b, b, c)
}

fn random_psd(rng: &mut ChaCha8Rng, scale: f64) -> Mat2 {
    let r = Mat2::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    );
    r * r.transpose()
}

struct Tally {
    check: AssumptionCheck,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { check: AssumptionCheck { name, probes: 0, violations: 0, max_violation: 0.0, witness: None } }
    }

    fn record(&mut self, excess: f64, tol: f64, witness: impl FnOnce() -> String) {
        self.check.probes += 1;
        if excess > tol {
            self.check.violations += 1;
            if excess > self.check.max_violation {
                self.check.max_violation = excess;
                self.check.witness = Some(witness());
            }
        }
    }
}

/// Randomized certificate for ellipticity, monotonicity in `z`, convexity in
/// `M`, the Lipschitz sandwich
/// `P⁻(N−M) − c₄|p−q| − c₅|z−w| ≤ F(z,p,M) − F(w,q,N) ≤ P⁺(N−M) + c₄|p−q| + c₅|z−w|`,
/// and normalization.
pub fn verify_assumptions(op: &EllipticOperator, probes: usize, seed: u64) -> AssumptionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lambda_e, big_lambda_e) = op.ellipticity();
    let (c4, c5) = op.lipschitz_constants();
    // nonpositive constants cannot certify anything
    let (lam, big) = (lambda_e.max(0.0), big_lambda_e.max(0.0));
    let tol = 1e-10;
    let mut constants = Tally::new("positive_constants");
    constants.record(if lambda_e > 0.0 && lambda_e <= big_lambda_e { 0.0 } else { 1.0 }, tol, || {
        format!("lambda_e = {lambda_e}, Lambda_e = {big_lambda_e}")
    });
    let mut ellipticity = Tally::new("ellipticity");
    let mut monotone_z = Tally::new("z_monotonicity");
    let mut convexity = Tally::new("convexity");
    let mut lipschitz = Tally::new("lipschitz_sandwich");
    let mut normalization = Tally::new("normalization");
    for _ in 0..probes {
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let z = rng.random_range(-2.0..2.0);
        let p = vec2(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let m = random_symmetric(&mut rng, 2.0);
        let n = random_psd(&mut rng, 1.5);
        let f = |z: f64, p: Vec2, m: &Mat2| op.evaluate_unchecked(x, z, p, m);
        let base = f(z, p, &m);
        let scale = 1.0 + base.abs();

        let diff = f(z, p, &(m + n)) - base;
        let tr = n.trace();
        let excess = (diff + lam * tr).max(-big * tr - diff);
        ellipticity.record(excess, tol * scale, || format!("M = {m:?}, N = {n:?}, increment {diff}"));

        let dz = rng.random_range(0.0..1.0);
        let excess = base - f(z + dz, p, &m);
        monotone_z.record(excess, tol * scale, || format!("z = {z}, dz = {dz}"));

        let m2 = random_symmetric(&mut rng, 2.0);
        let mid = f(z, p, &(0.5 * (m + m2)));
        let excess = mid - 0.5 * (base + f(z, p, &m2));
        convexity.record(excess, tol * scale, || format!("M1 = {m:?}, M2 = {m2:?}, midpoint excess {excess}"));

        let w = z + rng.random_range(-1.0..1.0);
        let q = p + vec2(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let nn = random_symmetric(&mut rng, 2.0);
        let diff = base - f(w, q, &nn);
        let slack = c4 * (p - q).norm() + c5 * (z - w).abs();
        let lower = pucci_inf(lam, big, &(nn - m)) - slack;
        let upper = pucci_sup(lam, big, &(nn - m)) + slack;
        let excess = (lower - diff).max(diff - upper);
        lipschitz.record(excess, tol * scale, || format!("M = {m:?}, N = {nn:?}, difference {diff}"));

        if op.is_source_free() {
            let v = f(0.0, Vec2::zeros(), &Mat2::zeros());
            normalization.record(v.abs(), tol, || format!("F(x,0,0,0) = {v} at {x:?}"));
        }
    }
    AssumptionReport {
        lambda_e,
        big_lambda_e,
        c4,
        c5,
        checks: vec![
            constants.check,
            ellipticity.check,
            monotone_z.check,
            convexity.check,
            lipschitz.check,
            normalization.check,
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_at_minus_identity() {
        let op = EllipticOperator::poisson(1.0);
        assert_eq!(op.evaluate([0.0, 0.0], 0.0, Vec2::zeros(), &(-Mat2::identity())).unwrap(), 1.0);
    }

    #[test]
    fn pucci_minus_example_and_brute_force_inf() {
        let op = EllipticOperator::PucciMinus { lambda: 1.0, big_lambda: 2.0, f: 0.0 };
        let m = Mat2::new(1.0, 0.0, 0.0, -1.0);
        let v = op.evaluate([0.0, 0.0], 0.0, Vec2::zeros(), &m).unwrap();
        assert!((v + 1.0).abs() < 1e-14);
        assert!((pucci_inf(1.0, 2.0, &m) + 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut best = f64::INFINITY;
        for _ in 0..10_000 {
            let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
            // extreme eigenvalues half the time
            let pick = |rng: &mut ChaCha8Rng| if rng.random::<bool>() { rng.random_range(1.0..2.0) } else { 1.0 + rng.random_range(0..2) as f64 };
            let (l1, l2) = (pick(&mut rng), pick(&mut rng));
            let r = nalgebra::Rotation2::new(angle).into_inner();
            let a = r * Mat2::new(l1, 0.0, 0.0, l2) * r.transpose();
            best = best.min((a * m).trace());
        }
        assert!(best >= -1.0 - 1e-12 && best < -1.0 + 0.05);
    }

    #[test]
    fn bellman_takes_max() {
        let op = EllipticOperator::Bellman(vec![
            LinearOperator::poisson(1.0),
            LinearOperator::new(2.0 * Mat2::identity(), Vec2::zeros(), 0.0, 0.5),
        ]);
        assert_eq!(op.evaluate([0.0, 0.0], 0.0, Vec2::zeros(), &Mat2::zeros()).unwrap(), -0.5);
    }

    #[test]
    fn nonsymmetric_matrix_rejected() {
        let op = EllipticOperator::poisson(0.0);
        assert!(op.evaluate([0.0, 0.0], 0.0, Vec2::zeros(), &Mat2::new(0.0, 1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn assumption_reports() {
        let identity = EllipticOperator::poisson(0.0);
        let r = verify_assumptions(&identity, 2000, 1);
        assert!(r.pass(), "{}", r.render());
        assert_eq!((r.lambda_e, r.big_lambda_e), (1.0, 1.0));

        let broken = EllipticOperator::Linear(LinearOperator::new(-Mat2::identity(), Vec2::zeros(), 0.0, 0.0));
        let r = verify_assumptions(&broken, 200, 1);
        let e = r.check("ellipticity").unwrap();
        assert!(e.violations > 0 && e.witness.is_some());

        let concave = EllipticOperator::PucciMinus { lambda: 1.0, big_lambda: 2.0, f: 1.0 };
        let r = verify_assumptions(&concave, 2000, 1);
        assert!(r.check("convexity").unwrap().violations > 0);
        assert_eq!(r.check("ellipticity").unwrap().violations, 0);
        assert_eq!(r.check("lipschitz_sandwich").unwrap().violations, 0);

        for op in [
            EllipticOperator::PucciPlus { lambda: 1.0, big_lambda: 2.0, f: 3.0 },
            EllipticOperator::VariableLinear { amplitude: 1.0 },
            EllipticOperator::Bellman(vec![
                LinearOperator::poisson(1.0),
                LinearOperator::new(Mat2::new(2.0, 0.5, 0.5, 1.0), vec2(0.3, -0.1), 0.2, 0.5),
            ]),
        ] {
            let r = verify_assumptions(&op, 2000, 3);
            assert!(r.pass(), "{}\n{}", op.kind_name(), r.render());
        }
    }

    #[test]
    fn branches_reproduce_linear_trace() {
        let op = LinearOperator::new(Mat2::new(2.0, -0.5, -0.5, 1.0), Vec2::zeros(), 0.0, 0.0);
        let (_, b) = EllipticOperator::Linear(op.clone()).branches([0.0, 0.0]).unwrap();
        let m = Mat2::new(0.3, 0.7, 0.7, -1.1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let dirs = [vec2(1.0, 0.0), vec2(0.0, 1.0), vec2(s, s), vec2(s, -s)];
        let value: f64 = (0..4).map(|k| -b[0].weights[k] * dirs[k].dot(&(m * dirs[k]))).sum();
        assert!((value - op.evaluate(0.0, Vec2::zeros(), &m)).abs() < 1e-14);
    }
}
