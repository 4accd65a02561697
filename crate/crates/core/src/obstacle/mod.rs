//! Gauge obstacles `ρ(x) = min_{y∈∂U} γ_K(x−y) + φ(y)` and `ρ̄ = ρ_{−K,−φ}`,
//! their closest-point maps, the analytic derivative formulas along
//! characteristics, and the ridge.

mod monotonicity;
mod ridge;

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::convex_gauge::ConvexBody;
use crate::domain::{golden_section, BoundaryDatum, BoundaryPoint, Domain2D};
use crate::error::{invalid, Error, Result};
use crate::grid::{DomainGrid, Grid, GridField};
use crate::linalg::{vec2, Mat2, Vec2};

pub use monotonicity::{monotonicity_check, MonotonicityReport, MonotonicityViolation};
pub use ridge::RidgeMask;

const COARSE_STRIDE: usize = 8;
const LAMBDA_TOL: f64 = 1e-12;
const DET_Q_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// `ψ⁺ = ρ`.
    Upper,
    /// `ψ⁻ = −ρ̄`.
    Lower,
}

/// The min-over-boundary envelope `x ↦ min_y γ_body(x−y) + datum(y)`.
#[derive(Debug, Clone)]
pub struct Envelope {
    domain: Arc<Domain2D>,
    body: ConvexBody,
    polar: ConvexBody,
    datum: BoundaryDatum,
    /// Lipschitz bound of `y ↦ γ(x−y) + φ(y)` in boundary arclength.
    arc_lipschitz: f64,
    tie_tol: f64,
}

#[derive(Debug, Clone)]
pub struct ClosestPointResult {
    /// One representative boundary sample per minimizing cluster.
    pub minimizers: Vec<usize>,
    /// Refined continuous boundary parameter per minimizing cluster.
    pub params: Vec<f64>,
    pub value: f64,
    pub is_multiple: bool,
}

/// Boundary quantities along the characteristic leaving `y`.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryAnalytics {
    pub geometry: BoundaryPoint,
    pub lambda: f64,
    /// `μ = Dφ + λν`, the gradient of the envelope at `y`.
    pub mu: Vec2,
    /// Characteristic direction `Dγ°(μ)`.
    pub characteristic: Vec2,
    /// `⟨Dγ°(μ), ν⟩`.
    pub transversality: f64,
    /// `D²γ°(μ)`.
    pub polar_hessian: Mat2,
    /// `D²ρ(y)`.
    pub boundary_hessian: Mat2,
    /// `W = −D²γ°(μ) D²ρ(y)`.
    pub w: Mat2,
}

#[derive(Debug, Clone, Copy)]
pub struct InteriorHessian {
    pub hessian: Mat2,
    pub det_q: f64,
    pub depth: f64,
    pub param: f64,
    /// `|x − (y + depth · Dγ°(μ))|`.
    pub parametrization_error: f64,
}

impl Envelope {
    pub fn new(domain: Arc<Domain2D>, body: ConvexBody, datum: BoundaryDatum) -> Result<Self> {
        if body.dim() != 2 {
            return Err(invalid("obstacles are built for planar bodies"));
        }
        if domain.samples().is_empty() {
            return Err(Error::InvalidState("empty boundary sampling".into()));
        }
        let (inradius, _) = body.radial_bounds();
        let datum_slope = domain
            .samples()
            .iter()
            .map(|s| datum.gradient([s.geometry.point.x, s.geometry.point.y]).norm())
            .fold(0.0, f64::max);
        let spacing = domain.spacing();
        let polar = body.polar();
        Ok(Self {
            domain,
            body,
            polar,
            datum,
            arc_lipschitz: 1.0 / inradius + datum_slope,
            tie_tol: 1e-9 + spacing * spacing,
        })
    }

    pub fn domain(&self) -> &Arc<Domain2D> {
        &self.domain
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn datum(&self) -> &BoundaryDatum {
        &self.datum
    }

    pub fn tie_tolerance(&self) -> f64 {
        self.tie_tol
    }

    /// `γ(x − y(s)) + φ(y(s))` at a continuous boundary parameter.
    pub fn objective(&self, x: [f64; 2], param: f64) -> f64 {
        let y = self.domain.boundary_point(param).point;
        self.body.gauge2([x[0] - y.x, x[1] - y.y]) + self.datum.value([y.x, y.y])
    }

    /// Objective at a boundary sample.
    pub fn sample_objective(&self, x: [f64; 2], index: usize) -> f64 {
        let y = self.domain.samples()[index].geometry.point;
        self.body.gauge2([x[0] - y.x, x[1] - y.y]) + self.datum.value([y.x, y.y])
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.closest_point(x).value
    }

    /// Minimizers of the envelope objective, with ties flagged.
    pub fn closest_point(&self, x: [f64; 2]) -> ClosestPointResult {
        let samples = self.domain.samples();
        let n = samples.len();
        let f = |i: usize| self.sample_objective(x, i);
        let stride = if n >= 8 * COARSE_STRIDE { COARSE_STRIDE } else { 1 };
        let coarse_count = n.div_ceil(stride);
        let coarse: Vec<f64> = (0..coarse_count).map(|c| f(c * stride)).collect();
        let coarse_min = coarse.iter().cloned().fold(f64::INFINITY, f64::min);

        // prune coarse intervals whose Lipschitz lower bound exceeds the coarse min
        let mut fine: Vec<(usize, f64)> = Vec::new();
        let perimeter = self.domain.perimeter();
        for c in 0..coarse_count {
            let start = c * stride;
            let end = ((c + 1) * stride).min(n);
            let f_end = if end == n { coarse[0] } else { coarse[(c + 1) % coarse_count] };
            let arc_end = if end == n { perimeter } else { samples[end].arclength };
            let len = 1.25 * (arc_end - samples[start].arclength);
            let bound = 0.5 * (coarse[c] + f_end - self.arc_lipschitz * len);
            if bound <= coarse_min + self.tie_tol {
                fine.push((start, coarse[c]));
                for i in start + 1..end {
                    fine.push((i, f(i)));
                }
            }
        }
        let fine_min = fine.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);

        // refine discrete local minima that could carry the global minimum
        let slack = self.arc_lipschitz * self.domain.spacing() + self.tie_tol;
        let value_of = |i: usize| match fine.binary_search_by_key(&i, |p| p.0) {
            Ok(pos) => fine[pos].1,
            Err(_) => f(i),
        };
        let mut local: Vec<(usize, f64)> = Vec::new();
        for &(i, v) in &fine {
            if v > fine_min + slack {
                continue;
            }
            let prev = value_of((i + n - 1) % n);
            let next = value_of((i + 1) % n);
            if v <= prev && v <= next {
                local.push((i, v));
            }
        }
        // keep the best member of each run of adjacent local minima
        let runs = cyclic_runs(&local.iter().map(|p| p.0).collect::<Vec<_>>(), n, 1);
        let ds = 1.0 / n as f64;
        let mut refined: Vec<(usize, f64, f64)> = Vec::new();
        for run in &runs {
            let best = run
                .iter()
                .map(|i| (*i, value_of(*i)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty run");
            let center = samples[best.0].geometry.param;
            let param = golden_section(|s| self.objective(x, s), center - ds, center + ds, 60);
            let v = self.objective(x, param);
            if v <= best.1 {
                refined.push((best.0, param.rem_euclid(1.0), v));
            } else {
                refined.push((best.0, center, best.1));
            }
        }
        let value = refined.iter().map(|r| r.2).fold(fine_min, f64::min);

        let threshold = value + self.tie_tol;
        let mut tied: Vec<usize> = fine.iter().filter(|p| p.1 <= threshold).map(|p| p.0).collect();
        for r in &refined {
            if r.2 <= threshold {
                tied.push(r.0);
            }
        }
        tied.sort_unstable();
        tied.dedup();
        let clusters = cyclic_runs(&tied, n, 2);
        let full_circle = clusters.len() == 1 && clusters[0].len() == n;
        let mut minimizers = Vec::with_capacity(clusters.len());
        let mut params = Vec::with_capacity(clusters.len());
        for cluster in &clusters {
            let best_refined = refined
                .iter()
                .filter(|r| cluster.contains(&r.0))
                .min_by(|a, b| a.2.total_cmp(&b.2));
            match best_refined {
                Some(r) => {
                    minimizers.push(r.0);
                    params.push(r.1);
                }
                None => {
                    let i = *cluster
                        .iter()
                        .min_by(|a, b| value_of(**a).total_cmp(&value_of(**b)))
                        .expect("nonempty cluster");
                    minimizers.push(i);
                    params.push(samples[i].geometry.param);
                }
            }
        }
        // the best cluster first
        if minimizers.len() > 1 {
            let mut order: Vec<usize> = (0..minimizers.len()).collect();
            order.sort_by(|a, b| self.objective(x, params[*a]).total_cmp(&self.objective(x, params[*b])));
            minimizers = order.iter().map(|k| minimizers[*k]).collect();
            params = order.iter().map(|k| params[*k]).collect();
        }
        ClosestPointResult { minimizers, params, value, is_multiple: clusters.len() >= 2 || full_circle }
    }

    /// `λ(y)` with `γ°(Dφ(y) + λν(y)) = 1`, and the derivative data at `y`.
    pub fn boundary_analytics(&self, param: f64) -> Result<BoundaryAnalytics> {
        let geometry = self.domain.boundary_point(param);
        let y = [geometry.point.x, geometry.point.y];
        let (lambda, mu) = self.lambda_mu_at(&geometry)?;
        let eval = self.polar.gauge_derivatives(&[mu.x, mu.y])?;
        let (grad, hess) = match (eval.gradient, eval.hessian) {
            (Some(g), Some(h)) => (g, h),
            _ => return Err(Error::Nondifferentiable { point: y }),
        };
        let a = vec2(grad[0], grad[1]);
        let polar_hessian = Mat2::new(hess[(0, 0)], hess[(0, 1)], hess[(1, 0)], hess[(1, 1)]);
        let nu = geometry.normal;
        let transversality = a.dot(&nu);
        if transversality.abs() <= 1e-12 * a.norm() {
            return Err(Error::DegenerateTransversality { point: y, inner: transversality });
        }
        let x_mat = a * nu.transpose() / transversality;
        let projector = Mat2::identity() - x_mat;
        let inner = self.datum.hessian(y) + lambda * geometry.distance_hessian();
        let boundary_hessian = projector.transpose() * inner * projector;
        let w = -polar_hessian * boundary_hessian;
        Ok(BoundaryAnalytics {
            geometry,
            lambda,
            mu,
            characteristic: a,
            transversality,
            polar_hessian,
            boundary_hessian,
            w,
        })
    }

    /// Root of `λ ↦ γ°(Dφ + λν) − 1` on `[0, 2 C_K (1 + |Dφ|)]`.
    fn lambda_mu_at(&self, geometry: &BoundaryPoint) -> Result<(f64, Vec2)> {
        let y = [geometry.point.x, geometry.point.y];
        let grad = self.datum.gradient(y);
        let nu = geometry.normal;
        let g = |lambda: f64| {
            let v = grad + lambda * nu;
            self.body.support2([v.x, v.y]) - 1.0
        };
        let at_zero = g(0.0);
        if at_zero > 1e-12 {
            return Err(Error::InfeasibleDatum { point: y, value: at_zero + 1.0 });
        }
        let (inradius, _) = self.body.radial_bounds();
        let c_k = (1.0 / inradius).max(1.0);
        let (mut lo, mut hi) = (0.0, 2.0 * c_k * (1.0 + grad.norm()));
        if g(hi) <= 0.0 {
            return Err(Error::InfeasibleDatum { point: y, value: at_zero + 1.0 });
        }
        let mut lambda = 0.5 * (lo + hi);
        for _ in 0..200 {
            let value = g(lambda);
            if value.abs() <= LAMBDA_TOL {
                break;
            }
            if value > 0.0 {
                hi = lambda;
            } else {
                lo = lambda;
            }
            let v = grad + lambda * nu;
            let slope = self
                .polar
                .gauge_derivatives(&[v.x, v.y])
                .ok()
                .and_then(|e| e.gradient)
                .map(|d| d[0] * nu.x + d[1] * nu.y)
                .unwrap_or(0.0);
            let newton = lambda - value / slope;
            lambda = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok((lambda, grad + lambda * nu))
    }

    /// `λ` and `μ` at a boundary parameter.
    pub fn lambda_mu(&self, param: f64) -> Result<(f64, Vec2)> {
        self.lambda_mu_at(&self.domain.boundary_point(param))
    }

    /// `D²ρ(x) = D²ρ(y) Q(x)⁻¹` with `Q = I − (ρ(x) − φ(y)) W`.
    pub fn interior_hessian(&self, x: [f64; 2]) -> Result<InteriorHessian> {
        let cp = self.closest_point(x);
        if cp.is_multiple {
            return Err(Error::Nondifferentiable { point: x });
        }
        let param = cp.params[0];
        let analytics = self.boundary_analytics(param)?;
        let y = analytics.geometry.point;
        let depth = cp.value - self.datum.value([y.x, y.y]);
        let q = Mat2::identity() - depth * analytics.w;
        let det_q = q.determinant();
        if det_q <= DET_Q_TOL {
            return Err(Error::RidgeProximity { point: x, det_q });
        }
        let hessian = analytics.boundary_hessian * q.try_inverse().expect("det Q is positive");
        let reconstructed = y + depth * analytics.characteristic;
        let parametrization_error = (reconstructed - vec2(x[0], x[1])).norm();
        Ok(InteriorHessian { hessian, det_q, depth, param, parametrization_error })
    }
}

/// Groups sorted indices on a cycle of length `n` into runs whose gaps are at most `gap`.
fn cyclic_runs(indices: &[usize], n: usize, gap: usize) -> Vec<Vec<usize>> {
    let mut runs: Vec<Vec<usize>> = Vec::new();
    for &i in indices {
        match runs.last_mut() {
            Some(last) if i - *last.last().unwrap() <= gap => last.push(i),
            _ => runs.push(vec![i]),
        }
    }
    if runs.len() > 1 {
        let first = runs[0][0];
        let last = *runs.last().unwrap().last().unwrap();
        if first + n - last <= gap {
            let head = runs.remove(0);
            runs.last_mut().unwrap().extend(head);
        }
    }
    runs
}

/// Closest-point data stored per grid node.
#[derive(Debug, Clone, Copy)]
pub struct NodeClosest {
    pub param: f64,
    pub sample: usize,
    pub is_multiple: bool,
}

/// `ρ` or `−ρ̄` on a grid, with closest points, boundary analytics and ridge.
#[derive(Debug, Clone)]
pub struct ObstacleField {
    pub which: Which,
    pub grid: Grid,
    envelope: Envelope,
    /// Envelope values, `ρ` or `ρ̄`.
    envelope_values: Vec<f64>,
    closest: Vec<Option<NodeClosest>>,
    analytics: Vec<Option<BoundaryAnalytics>>,
    analytics_errors: Vec<(usize, String)>,
    ridge: RidgeMask,
}

/// Builds `ρ_{K,φ}` (upper) or `−ρ̄ = −ρ_{−K,−φ}` (lower) on every grid node.
pub fn build_obstacle(
    domain: &Arc<Domain2D>,
    body: &ConvexBody,
    phi: &BoundaryDatum,
    dgrid: &DomainGrid,
    which: Which,
) -> Result<ObstacleField> {
    let (body, datum) = match which {
        Which::Upper => (body.clone(), phi.clone()),
        Which::Lower => (body.reflect(), phi.negated()),
    };
    let envelope = Envelope::new(domain.clone(), body, datum)?;
    let grid = dgrid.grid;
    let mut envelope_values = vec![f64::NAN; grid.len()];
    let mut closest = vec![None; grid.len()];
    // every node: mollification reaches past the boundary
    for k in 0..grid.len() {
        let cp = envelope.closest_point(grid.point_of(k));
        envelope_values[k] = cp.value;
        closest[k] =
            Some(NodeClosest { param: cp.params[0], sample: cp.minimizers[0], is_multiple: cp.is_multiple });
    }
    let mut analytics = vec![None; domain.samples().len()];
    let mut analytics_errors = Vec::new();
    if envelope.body.is_smooth() {
        for (i, s) in domain.samples().iter().enumerate() {
            match envelope.boundary_analytics(s.geometry.param) {
                Ok(a) => analytics[i] = Some(a),
                Err(e) => analytics_errors.push((i, e.to_string())),
            }
        }
    }
    let mut field = ObstacleField {
        which,
        grid,
        envelope,
        envelope_values,
        closest,
        analytics,
        analytics_errors,
        ridge: RidgeMask::empty(grid.len()),
    };
    field.ridge = ridge::detect(&field, dgrid);
    Ok(field)
}

impl ObstacleField {
    fn sign(&self) -> f64 {
        match self.which {
            Which::Upper => 1.0,
            Which::Lower => -1.0,
        }
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    /// Obstacle values: `ρ` for the upper field and `−ρ̄` for the lower one.
    pub fn values(&self) -> GridField {
        let s = self.sign();
        GridField { grid: self.grid, values: self.envelope_values.iter().map(|v| s * v).collect() }
    }

    pub fn value_at_node(&self, k: usize) -> f64 {
        self.sign() * self.envelope_values[k]
    }

    /// Obstacle value at an arbitrary point of the closed domain.
    pub fn evaluate_at(&self, x: [f64; 2]) -> f64 {
        self.sign() * self.envelope.value(x)
    }

    pub fn closest(&self, k: usize) -> Option<NodeClosest> {
        self.closest[k]
    }

    /// Per-sample boundary analytics (smooth bodies only).
    pub fn analytics(&self) -> &[Option<BoundaryAnalytics>] {
        &self.analytics
    }

    pub fn analytics_errors(&self) -> &[(usize, String)] {
        &self.analytics_errors
    }

    pub fn ridge(&self) -> &RidgeMask {
        &self.ridge
    }

    /// Hessian of the obstacle (with its sign) at `x` from the closed form.
    pub fn hessian_at(&self, x: [f64; 2]) -> Result<InteriorHessian> {
        let mut h = self.envelope.interior_hessian(x)?;
        h.hessian *= self.sign();
        Ok(h)
    }

    /// `sup_y |D²ρ(y)|` over boundary samples, spectral norm.
    pub fn boundary_hessian_bound(&self) -> f64 {
        self.analytics
            .iter()
            .flatten()
            .map(|a| {
                let m = DMatrix::from_column_slice(2, 2, a.boundary_hessian.as_slice());
                m.norm()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainKind;
    use crate::grid::Grid;

    fn disc_setup(r: f64, h: f64) -> (Arc<Domain2D>, DomainGrid) {
        let domain = Arc::new(Domain2D::new(DomainKind::Disc { radius: r }, h).unwrap());
        let grid = Grid::covering(domain.half_extents(), h, 3).unwrap();
        let dgrid = DomainGrid::new(&domain, grid).unwrap();
        (domain, dgrid)
    }

    #[test]
    fn ball_obstacle_on_disc_is_distance() {
        let (domain, dgrid) = disc_setup(1.0, 1.0 / 16.0);
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let upper = build_obstacle(&domain, &ball, &BoundaryDatum::Zero, &dgrid, Which::Upper).unwrap();
        let lower = build_obstacle(&domain, &ball, &BoundaryDatum::Zero, &dgrid, Which::Lower).unwrap();
        for &k in dgrid.interior() {
            let p = dgrid.grid.point_of(k);
            let exact = 1.0 - p[0].hypot(p[1]);
            assert!((upper.value_at_node(k) - exact).abs() < 1e-10);
            assert!((lower.value_at_node(k) + exact).abs() < 1e-10);
        }
        let center = dgrid.grid.index(dgrid.grid.nx / 2, dgrid.grid.ny / 2);
        assert!(upper.closest(center).unwrap().is_multiple);
    }

    #[test]
    fn lambda_for_affine_datum_matches_quadratic_formula() {
        let domain = Arc::new(Domain2D::with_samples(DomainKind::Disc { radius: 1.0 }, 512).unwrap());
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let phi = BoundaryDatum::Affine { slope: [0.5, 0.0], offset: 0.0 };
        let env = Envelope::new(domain.clone(), ball, phi).unwrap();
        for s in [0.0, 0.1, 0.37, 0.5, 0.81] {
            let (lambda, mu) = env.lambda_mu(s).unwrap();
            let nu = domain.boundary_point(s).normal;
            let e = nu.x;
            let exact = -0.5 * e + (0.25 * e * e + 0.75).sqrt();
            assert!((lambda - exact).abs() < 1e-12, "{lambda} vs {exact}");
            assert!((mu.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn infeasible_datum_is_reported() {
        let domain = Arc::new(Domain2D::with_samples(DomainKind::Disc { radius: 1.0 }, 64).unwrap());
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let phi = BoundaryDatum::Affine { slope: [1.5, 0.0], offset: 0.0 };
        let env = Envelope::new(domain, ball, phi).unwrap();
        assert!(matches!(env.lambda_mu(0.0), Err(Error::InfeasibleDatum { .. })));
    }

    #[test]
    fn general_body_lambda_is_reciprocal_polar_gauge() {
        let domain =
            Arc::new(Domain2D::with_samples(DomainKind::Ellipse { semi_major: 2.0, semi_minor: 1.0 }, 256).unwrap());
        let body = ConvexBody::p_ball(2, 4.0, 1.0).unwrap();
        let env = Envelope::new(domain.clone(), body.clone(), BoundaryDatum::Zero).unwrap();
        for s in [0.05, 0.3, 0.7] {
            let nu = domain.boundary_point(s).normal;
            let (lambda, _) = env.lambda_mu(s).unwrap();
            assert!((lambda - 1.0 / body.support2([nu.x, nu.y])).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_interior_hessian_closed_form() {
        let domain = Arc::new(Domain2D::with_samples(DomainKind::Disc { radius: 2.0 }, 1024).unwrap());
        let env = Envelope::new(domain, ConvexBody::ball(2, 1.0).unwrap(), BoundaryDatum::Zero).unwrap();
        let x = [0.6, 0.8];
        let h = env.interior_hessian(x).unwrap();
        assert!((h.det_q - 0.5).abs() < 1e-9);
        let tau = vec2(-0.8, 0.6);
        let expected = -(tau * tau.transpose());
        assert!((h.hessian - expected).norm() < 1e-6, "{}", h.hessian);
        assert!(h.parametrization_error < 1e-6);
        let b = env.boundary_analytics(0.1).unwrap();
        let a = b.characteristic;
        assert!((b.boundary_hessian * a).norm() < 1e-12);
    }

    #[test]
    fn ellipse_caustic_depth_matches_radius_of_curvature() {
        let domain = Arc::new(
            Domain2D::with_samples(DomainKind::Ellipse { semi_major: 2.0, semi_minor: 1.0 }, 1024).unwrap(),
        );
        let env = Envelope::new(domain.clone(), ConvexBody::ball(2, 1.0).unwrap(), BoundaryDatum::Zero).unwrap();
        for s in [0.0, 0.07, 0.2, 0.33] {
            let a = env.boundary_analytics(s).unwrap();
            let kappa = a.geometry.curvature;
            let depth = 1.0 / kappa;
            let q = Mat2::identity() - depth * a.w;
            assert!(q.determinant().abs() < 1e-10);
        }
    }

    #[test]
    fn cyclic_runs_merge_across_the_seam() {
        assert_eq!(cyclic_runs(&[0, 1, 5, 9], 10, 1), vec![vec![5], vec![9, 0, 1]]);
        assert_eq!(cyclic_runs(&[2, 4, 7], 10, 2), vec![vec![2, 4], vec![7]]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn envelope_is_gauge_lipschitz(
            x0 in -1.4f64..1.4, x1 in -0.9f64..0.9, z0 in -1.4f64..1.4, z1 in -0.9f64..0.9,
        ) {
            let domain = Arc::new(Domain2D::with_samples(DomainKind::Ellipse { semi_major: 1.5, semi_minor: 1.0 }, 256).unwrap());
            let body = ConvexBody::ellipse(&[1.0, 0.6]).unwrap();
            let datum = BoundaryDatum::Affine { slope: [0.2, -0.1], offset: 0.0 };
            let env = Envelope::new(domain.clone(), body.clone(), datum.clone()).unwrap();
            let (x, z) = ([x0, x1], [z0, z1]);
            proptest::prop_assume!(domain.contains(x) && domain.contains(z));
            // ρ(x) ≤ γ(x − z) + ρ(z), and ρ ≤ φ + γ(x − y) at every boundary sample
            proptest::prop_assert!(env.value(x) <= body.gauge2([x0 - z0, x1 - z1]) + env.value(z) + 1e-9);
            for s in domain.samples().iter().step_by(16) {
                let y = s.geometry.point;
                proptest::prop_assert!(env.value(x) <= body.gauge2([x0 - y.x, x1 - y.y]) + datum.value([y.x, y.y]) + 1e-9);
            }
        }
    }
}
