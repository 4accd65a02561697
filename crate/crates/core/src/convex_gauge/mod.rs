//! Convex bodies containing the origin, described through their gauge.
//!
//! Every body exposes its gauge `γ_K`, its support function (the gauge of the
//! polar body), derivatives, normal cones and the polar/reflected bodies.
//! Ball, ellipse and p-ball work in any dimension; polygons and smoothed
//! bodies are planar.

mod smooth;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
pub use smooth::{smooth_approximation, SupportTable, SMOOTHING_WIDTH};

const ACTIVE_FACET_TOL: f64 = 1e-12;
const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ConvexBody {
    shape: Shape,
    dim: usize,
    reflected: bool,
}

#[derive(Debug, Clone)]
enum Shape {
    Ball { radius: f64 },
    Ellipse { semi_axes: Vec<f64> },
    Polygon(Polygon),
    PBall { p: f64, scale: f64 },
    Smoothed { table: Arc<SupportTable>, level: usize, as_gauge: bool },
}

#[derive(Debug, Clone)]
struct Polygon {
    vertices: Vec<[f64; 2]>,
    normals: Vec<[f64; 2]>,
    offsets: Vec<f64>,
}

/// Kind tag of a body, without its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    Ball,
    Ellipse,
    Polygon,
    PBall,
    Smoothed,
}

/// Value and derivatives of a gauge at a point.
#[derive(Debug, Clone)]
pub struct GaugeEval {
    pub value: f64,
    pub gradient: Option<DVector<f64>>,
    pub hessian: Option<DMatrix<f64>>,
    /// Extreme points of the subdifferential where the gauge has a kink.
    pub subdifferential_extremes: Vec<DVector<f64>>,
}

#[derive(Debug, Clone)]
pub struct NormalCone {
    pub base_point: DVector<f64>,
    /// Unit vectors spanning the cone.
    pub generators: Vec<DVector<f64>>,
}

#[derive(Debug, Clone)]
pub struct CauchySchwarz {
    pub lhs: f64,
    pub rhs: f64,
    /// A point of the boundary of the body where `max ⟨w, y⟩ / γ(w)` is attained.
    pub witness_direction: DVector<f64>,
}

impl ConvexBody {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { shape: Shape::Ball { radius }, dim, reflected: false })
    }

    pub fn ellipse(semi_axes: &[f64]) -> Result<Self> {
        check_dim(semi_axes.len())?;
        if semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(invalid("ellipse semi-axes must be positive"));
        }
        Ok(Self {
            shape: Shape::Ellipse { semi_axes: semi_axes.to_vec() },
            dim: semi_axes.len(),
            reflected: false,
        })
    }

    /// Unit ball of the p-norm scaled by `scale`, for `1 < p < ∞`.
    pub fn p_ball(dim: usize, p: f64, scale: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(invalid(format!("p_ball exponent must lie in (1, inf), got {p}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("p_ball scale must be positive"));
        }
        Ok(Self { shape: Shape::PBall { p, scale }, dim, reflected: false })
    }

    /// Convex polygon from counterclockwise vertices; the origin must be interior.
    pub fn polygon(vertices: &[[f64; 2]]) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(invalid("polygon needs at least 3 vertices"));
        }
        let mut normals = Vec::with_capacity(m);
        let mut offsets = Vec::with_capacity(m);
        for i in 0..m {
            let a = vertices[i];
            let b = vertices[(i + 1) % m];
            let c = vertices[(i + 2) % m];
            let e1 = [b[0] - a[0], b[1] - a[1]];
            let e2 = [c[0] - b[0], c[1] - b[1]];
            let len = e1[0].hypot(e1[1]);
            if len == 0.0 {
                return Err(invalid("polygon has repeated vertices"));
            }
            let turn = e1[0] * e2[1] - e1[1] * e2[0];
            if turn <= 0.0 {
                return Err(invalid(
                    "polygon vertices are not in strictly convex counterclockwise position",
                ));
            }
            let n = [e1[1] / len, -e1[0] / len];
            let off = n[0] * a[0] + n[1] * a[1];
            if off <= 0.0 {
                return Err(invalid("origin not interior"));
            }
            normals.push(n);
            offsets.push(off);
        }
        // a convex turn at every vertex still allows a winding number above one
        let total: f64 = (0..m)
            .map(|i| {
                let n0 = normals[i];
                let n1 = normals[(i + 1) % m];
                (n0[0] * n1[1] - n0[1] * n1[0]).atan2(n0[0] * n1[0] + n0[1] * n1[1])
            })
            .sum();
        if (total - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(invalid("polygon is not simple"));
        }
        Ok(Self {
            shape: Shape::Polygon(Polygon { vertices: vertices.to_vec(), normals, offsets }),
            dim: 2,
            reflected: false,
        })
    }

    pub(crate) fn smoothed(table: Arc<SupportTable>, level: usize) -> Self {
        Self { shape: Shape::Smoothed { table, level, as_gauge: false }, dim: 2, reflected: false }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> BodyKind {
        match self.shape {
            Shape::Ball { .. } => BodyKind::Ball,
            Shape::Ellipse { .. } => BodyKind::Ellipse,
            Shape::Polygon(_) => BodyKind::Polygon,
            Shape::PBall { .. } => BodyKind::PBall,
            Shape::Smoothed { .. } => BodyKind::Smoothed,
        }
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    /// Smoothing level for smoothed bodies.
    pub fn level(&self) -> Option<usize> {
        match self.shape {
            Shape::Smoothed { level, .. } => Some(level),
            _ => None,
        }
    }

    /// Whether the gauge is differentiable away from the origin.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.shape, Shape::Polygon(_))
    }

    /// Vertices of a polygon body, as stored (before reflection).
    pub fn polygon_vertices(&self) -> Option<Vec<[f64; 2]>> {
        match &self.shape {
            Shape::Polygon(poly) => Some(
                poly.vertices
                    .iter()
                    .map(|v| if self.reflected { [-v[0], -v[1]] } else { *v })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// The body `−K`.
    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        out.reflected = !out.reflected;
        out
    }

    /// The polar body `K°`.
    pub fn polar(&self) -> Self {
        let shape = match &self.shape {
            Shape::Ball { radius } => Shape::Ball { radius: 1.0 / radius },
            Shape::Ellipse { semi_axes } => {
                Shape::Ellipse { semi_axes: semi_axes.iter().map(|a| 1.0 / a).collect() }
            }
            Shape::PBall { p, scale } => Shape::PBall { p: *p / (*p - 1.0), scale: 1.0 / scale },
            Shape::Polygon(poly) => {
                let vertices: Vec<[f64; 2]> = poly
                    .normals
                    .iter()
                    .zip(&poly.offsets)
                    .map(|(n, h)| [n[0] / h, n[1] / h])
                    .collect();
                let body = ConvexBody::polygon(&vertices)
                    .expect("polar of a valid polygon is a valid polygon");
                match body.shape {
                    Shape::Polygon(p) => Shape::Polygon(p),
                    _ => unreachable!(),
                }
            }
            Shape::Smoothed { table, level, as_gauge } => {
                Shape::Smoothed { table: table.clone(), level: *level, as_gauge: !as_gauge }
            }
        };
        Self { shape, dim: self.dim, reflected: self.reflected }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(invalid(format!(
                "dimension mismatch: body has dimension {}, vector has {}",
                self.dim,
                x.len()
            )));
        }
        Ok(())
    }

    /// `γ_K(x) = inf{λ > 0 : x ∈ λK}`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.gauge_unchecked(x))
    }

    /// Support function of `K`, which is the gauge of `K°`.
    pub fn support(&self, y: &[f64]) -> Result<f64> {
        self.check(y)?;
        Ok(self.support_unchecked(y))
    }

    /// Gauge of a planar vector without dimension checks.
    #[inline]
    pub fn gauge2(&self, x: [f64; 2]) -> f64 {
        debug_assert_eq!(self.dim, 2);
        self.gauge_unchecked(&x)
    }

    #[inline]
    pub fn support2(&self, y: [f64; 2]) -> f64 {
        debug_assert_eq!(self.dim, 2);
        self.support_unchecked(&y)
    }

    fn gauge_unchecked(&self, x: &[f64]) -> f64 {
        if self.reflected {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            self.raw_gauge(&neg)
        } else {
            self.raw_gauge(x)
        }
    }

    fn support_unchecked(&self, y: &[f64]) -> f64 {
        if self.reflected {
            let neg: Vec<f64> = y.iter().map(|v| -v).collect();
            self.raw_support(&neg)
        } else {
            self.raw_support(y)
        }
    }

    fn raw_gauge(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => norm(x) / radius,
            Shape::Ellipse { semi_axes } => x
                .iter()
                .zip(semi_axes)
                .map(|(v, a)| (v / a) * (v / a))
                .sum::<f64>()
                .sqrt(),
            Shape::PBall { p, scale } => p_norm(x, *p) / scale,
            Shape::Polygon(poly) => poly
                .normals
                .iter()
                .zip(&poly.offsets)
                .map(|(n, h)| (n[0] * x[0] + n[1] * x[1]) / h)
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0),
            Shape::Smoothed { table, as_gauge, .. } => {
                if *as_gauge {
                    table.support_value([x[0], x[1]])
                } else {
                    table.gauge_value([x[0], x[1]])
                }
            }
        }
    }

    fn raw_support(&self, y: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => norm(y) * radius,
            Shape::Ellipse { semi_axes } => {
                y.iter().zip(semi_axes).map(|(v, a)| (v * a) * (v * a)).sum::<f64>().sqrt()
            }
            Shape::PBall { p, scale } => p_norm(y, *p / (*p - 1.0)) * scale,
            Shape::Polygon(poly) => poly
                .vertices
                .iter()
                .map(|v| v[0] * y[0] + v[1] * y[1])
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Smoothed { table, as_gauge, .. } => {
                if *as_gauge {
                    table.gauge_value([y[0], y[1]])
                } else {
                    table.support_value([y[0], y[1]])
                }
            }
        }
    }

    /// Gradient, Hessian, or subdifferential extremes of the gauge at `x ≠ 0`.
    pub fn gauge_derivatives(&self, x: &[f64]) -> Result<GaugeEval> {
        self.check(x)?;
        if x.iter().all(|v| *v == 0.0) {
            return Err(Error::Domain("gauge derivatives are undefined at the origin".into()));
        }
        if self.reflected {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let mut eval = self.raw_derivatives(&neg);
            if let Some(g) = eval.gradient.as_mut() {
                g.neg_mut();
            }
            for g in eval.subdifferential_extremes.iter_mut() {
                g.neg_mut();
            }
            Ok(eval)
        } else {
            Ok(self.raw_derivatives(x))
        }
    }

    fn raw_derivatives(&self, x: &[f64]) -> GaugeEval {
        let n = x.len();
        let xv = DVector::from_column_slice(x);
        match &self.shape {
            Shape::Ball { radius } => {
                let r = xv.norm();
                let g = &xv / (r * radius);
                let unit = &xv / r;
                let hess = (DMatrix::identity(n, n) - &unit * unit.transpose()) / (r * radius);
                smooth_eval(r / radius, g, Some(hess))
            }
            Shape::Ellipse { semi_axes } => {
                let value = self.raw_gauge(x);
                let g = DVector::from_iterator(
                    n,
                    x.iter().zip(semi_axes).map(|(v, a)| v / (a * a * value)),
                );
                let diag = DMatrix::from_diagonal(&DVector::from_iterator(
                    n,
                    semi_axes.iter().map(|a| 1.0 / (a * a)),
                ));
                let hess = (diag - &g * g.transpose()) / value;
                smooth_eval(value, g, Some(hess))
            }
            Shape::PBall { p, scale } => {
                let nrm = p_norm(x, *p);
                let u: Vec<f64> = x.iter().map(|v| v / nrm).collect();
                let g = DVector::from_iterator(
                    n,
                    u.iter().map(|v| v.signum() * v.abs().powf(p - 1.0) / scale),
                );
                let singular = *p < 2.0 && u.iter().any(|v| *v == 0.0);
                let hess = if singular {
                    None
                } else {
                    let mut h = DMatrix::zeros(n, n);
                    for i in 0..n {
                        let gi = u[i].signum() * u[i].abs().powf(p - 1.0);
                        for j in 0..n {
                            let gj = u[j].signum() * u[j].abs().powf(p - 1.0);
                            let mut v = -gi * gj;
                            if i == j {
                                v += u[i].abs().powf(p - 2.0);
                            }
                            h[(i, j)] = (p - 1.0) * v / (nrm * scale);
                        }
                    }
                    Some(h)
                };
                smooth_eval(nrm / scale, g, hess)
            }
            Shape::Polygon(poly) => {
                let vals: Vec<f64> = poly
                    .normals
                    .iter()
                    .zip(&poly.offsets)
                    .map(|(nf, h)| (nf[0] * x[0] + nf[1] * x[1]) / h)
                    .collect();
                let value = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let tol = ACTIVE_FACET_TOL * value.abs().max(norm(x));
                let active: Vec<DVector<f64>> = vals
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v >= value - tol)
                    .map(|(i, _)| {
                        let nf = poly.normals[i];
                        let h = poly.offsets[i];
                        DVector::from_column_slice(&[nf[0] / h, nf[1] / h])
                    })
                    .collect();
                if active.len() == 1 {
                    smooth_eval(value, active[0].clone(), Some(DMatrix::zeros(2, 2)))
                } else {
                    GaugeEval {
                        value,
                        gradient: None,
                        hessian: None,
                        subdifferential_extremes: active,
                    }
                }
            }
            Shape::Smoothed { table, as_gauge, .. } => {
                let x2 = [x[0], x[1]];
                let (value, g, h) = if *as_gauge {
                    table.support_derivatives(x2)
                } else {
                    table.gauge_derivatives(x2)
                };
                let hess = DMatrix::from_row_slice(2, 2, &[h[0][0], h[0][1], h[1][0], h[1][1]]);
                smooth_eval(value, DVector::from_column_slice(&g), Some(hess))
            }
        }
    }

    /// A point `w ∈ ∂K` maximizing `⟨w, y⟩`, so that `⟨w, y⟩ = γ°(y)`.
    pub fn support_point(&self, y: &[f64]) -> Result<DVector<f64>> {
        self.check(y)?;
        if y.iter().all(|v| *v == 0.0) {
            return Err(Error::Domain("support point of the zero direction".into()));
        }
        if self.reflected {
            let neg: Vec<f64> = y.iter().map(|v| -v).collect();
            Ok(-self.raw_support_point(&neg))
        } else {
            Ok(self.raw_support_point(y))
        }
    }

    fn raw_support_point(&self, y: &[f64]) -> DVector<f64> {
        let n = y.len();
        match &self.shape {
            Shape::Ball { radius } => DVector::from_column_slice(y) * (radius / norm(y)),
            Shape::Ellipse { semi_axes } => {
                let s = self.raw_support(y);
                DVector::from_iterator(n, y.iter().zip(semi_axes).map(|(v, a)| a * a * v / s))
            }
            Shape::PBall { p, scale } => {
                let q = p / (p - 1.0);
                let nrm = p_norm(y, q);
                DVector::from_iterator(
                    n,
                    y.iter().map(|v| scale * v.signum() * (v.abs() / nrm).powf(q - 1.0)),
                )
            }
            Shape::Polygon(poly) => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (i, v) in poly.vertices.iter().enumerate() {
                    let val = v[0] * y[0] + v[1] * y[1];
                    if val > best_val {
                        best_val = val;
                        best = i;
                    }
                }
                DVector::from_column_slice(&poly.vertices[best])
            }
            Shape::Smoothed { table, as_gauge, .. } => {
                let y2 = [y[0], y[1]];
                let p = if *as_gauge {
                    table.gauge_derivatives(y2).1
                } else {
                    table.support_derivatives(y2).1
                };
                DVector::from_column_slice(&p)
            }
        }
    }

    /// Outer normal cone of `K` at a boundary point.
    pub fn normal_cone(&self, x: &[f64]) -> Result<NormalCone> {
        let value = self.gauge(x)?;
        if (value - 1.0).abs() > BOUNDARY_TOL {
            return Err(Error::Domain(format!("point is not on the boundary (gauge {value})")));
        }
        let base_point = DVector::from_column_slice(x);
        if let Shape::Polygon(poly) = &self.shape {
            let sign = if self.reflected { -1.0 } else { 1.0 };
            let generators = poly
                .normals
                .iter()
                .zip(&poly.offsets)
                .filter(|(nf, h)| {
                    ((sign * (nf[0] * x[0] + nf[1] * x[1])) / *h - 1.0).abs() <= BOUNDARY_TOL
                })
                .map(|(nf, _)| DVector::from_column_slice(&[sign * nf[0], sign * nf[1]]))
                .collect();
            return Ok(NormalCone { base_point, generators });
        }
        let eval = self.gauge_derivatives(x)?;
        let g = eval.gradient.expect("smooth bodies have gradients");
        let unit = &g / g.norm();
        Ok(NormalCone { base_point, generators: vec![unit] })
    }

    /// Both sides of the generalized Cauchy–Schwarz inequality.
    pub fn cauchy_schwarz_check(&self, x: &[f64], y: &[f64]) -> Result<CauchySchwarz> {
        self.check(x)?;
        self.check(y)?;
        if x.iter().all(|v| *v == 0.0) {
            return Err(Error::Domain("x must be nonzero".into()));
        }
        let lhs: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let rhs = self.gauge_unchecked(x) * self.support_unchecked(y);
        let witness_direction = if y.iter().all(|v| *v == 0.0) {
            DVector::from_column_slice(x) / self.gauge_unchecked(x)
        } else {
            self.support_point(y)?
        };
        Ok(CauchySchwarz { lhs, rhs, witness_direction })
    }

    /// `(inradius, circumradius)`: `|x|/C ≤ γ(x) ≤ |x|/c` with `c, C` these radii.
    pub fn radial_bounds(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Ball { radius } => (*radius, *radius),
            Shape::Ellipse { semi_axes } => (
                semi_axes.iter().cloned().fold(f64::INFINITY, f64::min),
                semi_axes.iter().cloned().fold(0.0, f64::max),
            ),
            Shape::PBall { p, scale } => {
                let corner = (self.dim as f64).powf(0.5 - 1.0 / p);
                if *p >= 2.0 {
                    (*scale, scale * corner)
                } else {
                    (scale * corner, *scale)
                }
            }
            Shape::Polygon(poly) => (
                poly.offsets.iter().cloned().fold(f64::INFINITY, f64::min),
                poly.vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max),
            ),
            Shape::Smoothed { table, as_gauge, .. } => {
                let (inner, outer) = table.radial_bounds();
                if *as_gauge {
                    (1.0 / outer, 1.0 / inner)
                } else {
                    (inner, outer)
                }
            }
        }
    }
}

fn smooth_eval(value: f64, g: DVector<f64>, hess: Option<DMatrix<f64>>) -> GaugeEval {
    GaugeEval { value, gradient: Some(g), hessian: hess, subdifferential_extremes: Vec::new() }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {dim}")));
    }
    Ok(())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn p_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexBody {
        ConvexBody::polygon(&[[1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0]]).unwrap()
    }

    #[test]
    fn square_gauge_is_max_norm() {
        assert_eq!(square().gauge(&[3.0, 1.0]).unwrap(), 3.0);
        assert_eq!(square().gauge(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn ellipse_boundary_point() {
        let e = ConvexBody::ellipse(&[2.0, 1.0]).unwrap();
        assert!((e.gauge(&[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let b = ConvexBody::ball(3, 1.0).unwrap();
        assert!(matches!(b.gauge(&[1.0, 2.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn square_polar_is_l1_ball() {
        let polar = square().polar();
        for x in [[0.3f64, -0.4], [1.0, 2.0], [-2.0, 0.5]] {
            let l1 = x[0].abs() + x[1].abs();
            assert!((polar.gauge(&x).unwrap() - l1).abs() < 1e-14);
        }
        let back = polar.polar();
        assert!((back.gauge(&[3.0, 1.0]).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ball_polar_scales() {
        let b = ConvexBody::ball(2, 4.0).unwrap().polar();
        assert!((b.gauge(&[1.0, 0.0]).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn ellipse_polar_against_dense_boundary_max() {
        let e = ConvexBody::ellipse(&[2.0, 0.5]).unwrap();
        let polar = e.polar();
        for y in [[0.3, 0.9], [-1.2, 0.1], [0.0, -2.0]] {
            let brute = (0..20000)
                .map(|i| {
                    let t = i as f64 * std::f64::consts::TAU / 20000.0;
                    2.0 * t.cos() * y[0] + 0.5 * t.sin() * y[1]
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let g = polar.gauge(&y).unwrap();
            assert!((g - brute).abs() < 1e-7 * (1.0 + g), "{g} vs {brute}");
        }
    }

    #[test]
    fn ball_derivatives_match_closed_form() {
        let b = ConvexBody::ball(2, 1.0).unwrap();
        let e = b.gauge_derivatives(&[0.0, 2.0]).unwrap();
        let g = e.gradient.unwrap();
        assert!((g[0]).abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15);
        let h = e.hessian.unwrap();
        assert!((h[(0, 0)] - 0.5).abs() < 1e-15 && h[(1, 1)].abs() < 1e-15);
    }

    #[test]
    fn p_ball_gradient_matches_central_differences() {
        let b = ConvexBody::p_ball(2, 4.0, 1.0).unwrap();
        let g = b.gauge_derivatives(&[1.0, 1.0]).unwrap().gradient.unwrap();
        let step = 1e-5;
        for i in 0..2 {
            let mut xp = [1.0, 1.0];
            let mut xm = [1.0, 1.0];
            xp[i] += step;
            xm[i] -= step;
            let fd = (b.gauge(&xp).unwrap() - b.gauge(&xm).unwrap()) / (2.0 * step);
            assert!((fd - g[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn origin_has_no_derivative() {
        let b = ConvexBody::ball(2, 1.0).unwrap();
        assert!(matches!(b.gauge_derivatives(&[0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn polygon_vertex_direction_reports_subdifferential() {
        let e = square().gauge_derivatives(&[2.0, 2.0]).unwrap();
        assert!(e.gradient.is_none());
        assert_eq!(e.subdifferential_extremes.len(), 2);
        let e = square().gauge_derivatives(&[2.0, 1.0]).unwrap();
        assert_eq!(e.gradient.unwrap().as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn normal_cones() {
        let b = ConvexBody::ball(2, 1.0).unwrap();
        let c = b.normal_cone(&[1.0, 0.0]).unwrap();
        assert_eq!(c.generators.len(), 1);
        assert!((c.generators[0][0] - 1.0).abs() < 1e-15);
        let c = square().normal_cone(&[1.0, 1.0]).unwrap();
        let mut gens: Vec<[f64; 2]> = c.generators.iter().map(|g| [g[0], g[1]]).collect();
        gens.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(gens, vec![[0.0, 1.0], [1.0, 0.0]]);
        assert!(matches!(b.normal_cone(&[0.5, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn reflected_polygon_normal_cone_points_outward() {
        let tri = ConvexBody::polygon(&[[1.0, 0.0], [-0.5, 1.0], [-0.5, -1.0]]).unwrap();
        let neg = tri.reflect();
        let c = neg.normal_cone(&[-1.0, 0.0]).unwrap();
        for g in &c.generators {
            for y in [[-1.0, 0.0], [0.5, 1.0], [0.5, -1.0]] {
                assert!((y[0] + 1.0) * g[0] + y[1] * g[1] <= 1e-12);
            }
        }
    }

    #[test]
    fn cauchy_schwarz_examples() {
        let b = ConvexBody::ball(2, 1.0).unwrap();
        let c = b.cauchy_schwarz_check(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!((c.lhs, c.rhs), (1.0, 1.0));
        let c = square().cauchy_schwarz_check(&[1.0, 1.0], &[1.0, -1.0]).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!((c.rhs - 2.0).abs() < 1e-15);
        let w = c.witness_direction;
        assert!((w[0] - w[1] * -1.0 - 2.0).abs() < 1e-15 || (w[0] * 1.0 - w[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_polygons() {
        let cw = [[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0]];
        assert!(ConvexBody::polygon(&cw).is_err());
        let shifted = [[2.0, -1.0], [4.0, -1.0], [4.0, 1.0], [2.0, 1.0]];
        let err = ConvexBody::polygon(&shifted).unwrap_err();
        assert!(err.to_string().contains("origin not interior"));
    }

    fn body_from(kind: u8, a: f64, b: f64) -> ConvexBody {
        match kind % 4 {
            0 => ConvexBody::ball(2, a).unwrap(),
            1 => ConvexBody::ellipse(&[a, b]).unwrap(),
            2 => ConvexBody::p_ball(2, 1.0 + 2.0 * b, a).unwrap(),
            _ => ConvexBody::polygon(&[[a, 0.0], [0.0, b], [-a, 0.2 * b], [-0.5 * a, -b]]).unwrap(),
        }
    }

    proptest::proptest! {
        #[test]
        fn gauge_is_sublinear_and_dual_to_support(
            kind in 0u8..4, a in 0.3f64..3.0, b in 0.3f64..3.0, reflected: bool,
            x0 in -3.0f64..3.0, x1 in -3.0f64..3.0, y0 in -3.0f64..3.0, y1 in -3.0f64..3.0, t in 0.0f64..10.0,
        ) {
            let body = body_from(kind, a, b);
            let body = if reflected { body.reflect() } else { body };
            let (x, y) = ([x0, x1], [y0, y1]);
            let gx = body.gauge2(x);
            proptest::prop_assert!((body.gauge2([t * x0, t * x1]) - t * gx).abs() <= 1e-10 * (1.0 + t * gx));
            proptest::prop_assert!(body.gauge2([x0 + y0, x1 + y1]) <= gx + body.gauge2(y) + 1e-10);
            proptest::prop_assert!(x0 * y0 + x1 * y1 <= gx * body.support2(y) + 1e-10);
            // the polar body's gauge is the support function
            proptest::prop_assert!((body.polar().gauge2(y) - body.support2(y)).abs() <= 1e-9 * (1.0 + body.support2(y)));
        }
    }
}
