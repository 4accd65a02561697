//! Smooth, strictly convex planar approximations of a convex body.
//!
//! The support function `h₀` of the input body is smoothed in angle with the
//! heat kernel on the circle and then inflated by a small disc:
//! `h_k = G_{t_k} * h₀ + m_k` with `t_k = σ_k²/2`, `σ_k = σ₀/k` and
//! `m_k = R σ₀² / k`, where `R = max h₀`.
//!
//! Heat smoothing keeps `h'' + h ≥ 0` (it smooths the curvature measure), so
//! the radius of curvature of the result is at least `m_k > 0`. Because
//! `∂_t(G_t*h₀) = (G_t*h₀)'' ≥ −R`, the inflation term outruns the smoothing
//! and the bodies are strictly nested, `h_{k+1} < h_k`, with margin at least
//! `R σ₀² / (4 k (k+1))`. The Hausdorff distance to the input is `O(1/k)`.
//!
//! The smoothed support function is tabulated on a uniform angular grid with
//! `h, h', h''` at each node and evaluated with quintic Hermite interpolation.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use super::{BodyKind, ConvexBody};
use crate::error::{invalid, Result};

/// Angular width `σ₀` of the smoothing kernel at level 1.
pub const SMOOTHING_WIDTH: f64 = 0.25;

const MIN_TABLE_NODES: usize = 2048;
const MIN_SAMPLES: usize = 8192;
/// Modes are dropped once the heat factor falls below this.
const MODE_CUTOFF: f64 = 1e-17;

/// Tabulated support function `h` of a smooth planar body with `h + h'' > 0`.
#[derive(Debug)]
pub struct SupportTable {
    step: f64,
    value: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    /// Polar angle of the boundary point `h u + h' u⊥` at each node, unwrapped,
    /// with one extra wrap-around entry.
    boundary_angle: Vec<f64>,
    inner: f64,
    outer: f64,
    level: usize,
}

/// `K°_k`: smooth strictly convex body with `K°_{k+1} ⊂ int K°_k` and `∩ K°_k = K°`.
///
/// The input is the polar constraint set and must be planar.
pub fn smooth_approximation(body: &ConvexBody, level: usize) -> Result<ConvexBody> {
    if level == 0 {
        return Err(invalid("smoothing level must be at least 1"));
    }
    if body.dim() != 2 {
        return Err(invalid("smooth approximation is implemented for planar bodies"));
    }
    let sigma = SMOOTHING_WIDTH / level as f64;
    let heat_time = 0.5 * sigma * sigma;
    let max_mode = ((-MODE_CUTOFF.ln()) / heat_time).sqrt().ceil() as usize;
    let (cos_coef, sin_coef, radius) = support_coefficients(body, max_mode);
    let inflation = radius * SMOOTHING_WIDTH * SMOOTHING_WIDTH / level as f64;
    let nodes = (16 * max_mode).max(MIN_TABLE_NODES).next_power_of_two();
    let damped: Vec<f64> =
        (0..=max_mode).map(|n| (-((n * n) as f64) * heat_time).exp()).collect();
    let table = SupportTable::from_series(
        &cos_coef,
        &sin_coef,
        &damped,
        inflation,
        nodes,
        level,
    );
    Ok(ConvexBody::smoothed(Arc::new(table), level))
}

/// Fourier coefficients of the support function up to `max_mode`, and `max h`.
fn support_coefficients(body: &ConvexBody, max_mode: usize) -> (Vec<f64>, Vec<f64>, f64) {
    if body.kind() == BodyKind::Polygon {
        let vertices = body.polygon_vertices().expect("polygon body");
        return polygon_coefficients(&vertices, max_mode);
    }
    let samples = (4 * max_mode).max(MIN_SAMPLES).next_power_of_two();
    let values: Vec<f64> = (0..samples)
        .map(|m| {
            let theta = TAU * m as f64 / samples as f64;
            body.support2([theta.cos(), theta.sin()])
        })
        .collect();
    let radius = values.iter().cloned().fold(0.0, f64::max);
    let mut cos_coef = vec![0.0; max_mode + 1];
    let mut sin_coef = vec![0.0; max_mode + 1];
    let scale = 2.0 / samples as f64;
    for (m, h) in values.iter().enumerate() {
        let theta = TAU * m as f64 / samples as f64;
        let rot = (theta.cos(), theta.sin());
        let mut cur = (1.0, 0.0);
        for n in 0..=max_mode {
            cos_coef[n] += scale * h * cur.0;
            sin_coef[n] += scale * h * cur.1;
            cur = (cur.0 * rot.0 - cur.1 * rot.1, cur.0 * rot.1 + cur.1 * rot.0);
        }
    }
    (cos_coef, sin_coef, radius)
}

/// Exact coefficients for a polygon: `h'' + h` is the sum of edge lengths
/// placed at the outer normal angles.
fn polygon_coefficients(vertices: &[[f64; 2]], max_mode: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let m = vertices.len();
    let mut lengths = Vec::with_capacity(m);
    let mut angles = Vec::with_capacity(m);
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        let e = [b[0] - a[0], b[1] - a[1]];
        lengths.push(e[0].hypot(e[1]));
        // outer normal of a counterclockwise edge is (e_y, -e_x)
        angles.push((-e[0]).atan2(e[1]));
    }
    let mut cos_coef = vec![0.0; max_mode + 1];
    let mut sin_coef = vec![0.0; max_mode + 1];
    for n in 0..=max_mode {
        if n == 1 {
            continue;
        }
        let factor = 1.0 / (PI * (1.0 - (n * n) as f64));
        for (len, alpha) in lengths.iter().zip(&angles) {
            cos_coef[n] += factor * len * (n as f64 * alpha).cos();
            sin_coef[n] += factor * len * (n as f64 * alpha).sin();
        }
    }
    // the first mode is not determined by the curvature measure; integrate
    // the piecewise sinusoid `⟨v_i, u_θ⟩` over each vertex arc instead
    let cos_sq = |t: f64| 0.5 * t + 0.25 * (2.0 * t).sin();
    let sin_sq = |t: f64| 0.5 * t - 0.25 * (2.0 * t).sin();
    let sin_cos = |t: f64| 0.5 * t.sin() * t.sin();
    for i in 0..m {
        let v = vertices[i];
        let start = angles[(i + m - 1) % m];
        let mut sweep = angles[i] - start;
        while sweep <= 0.0 {
            sweep += TAU;
        }
        let end = start + sweep;
        let ic = cos_sq(end) - cos_sq(start);
        let is = sin_sq(end) - sin_sq(start);
        let isc = sin_cos(end) - sin_cos(start);
        cos_coef[1] += (v[0] * ic + v[1] * isc) / PI;
        sin_coef[1] += (v[0] * isc + v[1] * is) / PI;
    }
    let radius = vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
    (cos_coef, sin_coef, radius)
}

impl SupportTable {
    fn from_series(
        cos_coef: &[f64],
        sin_coef: &[f64],
        damping: &[f64],
        shift: f64,
        nodes: usize,
        level: usize,
    ) -> Self {
        let step = TAU / nodes as f64;
        let mut value = vec![0.0; nodes];
        let mut d1 = vec![0.0; nodes];
        let mut d2 = vec![0.0; nodes];
        for j in 0..nodes {
            let theta = step * j as f64;
            let rot = (theta.cos(), theta.sin());
            let mut cur = rot;
            let (mut h, mut hp, mut hpp) = (0.5 * cos_coef[0] * damping[0] + shift, 0.0, 0.0);
            for n in 1..cos_coef.len() {
                let a = cos_coef[n] * damping[n];
                let b = sin_coef[n] * damping[n];
                let nf = n as f64;
                let base = a * cur.0 + b * cur.1;
                h += base;
                hp += nf * (b * cur.0 - a * cur.1);
                hpp -= nf * nf * base;
                cur = (cur.0 * rot.0 - cur.1 * rot.1, cur.0 * rot.1 + cur.1 * rot.0);
            }
            value[j] = h;
            d1[j] = hp;
            d2[j] = hpp;
        }
        let mut boundary_angle: Vec<f64> = (0..nodes)
            .map(|j| step * j as f64 + d1[j].atan2(value[j]))
            .collect();
        boundary_angle.push(boundary_angle[0] + TAU);
        let inner = value.iter().cloned().fold(f64::INFINITY, f64::min);
        let outer = value.iter().cloned().fold(0.0, f64::max);
        Self { step, value, d1, d2, boundary_angle, inner, outer, level }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn nodes(&self) -> usize {
        self.value.len()
    }

    /// `(min h, max h)`: inradius and circumradius about the origin.
    pub fn radial_bounds(&self) -> (f64, f64) {
        (self.inner, self.outer)
    }

    /// `(h, h', h'')` at angle `theta`.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let n = self.value.len();
        let pos = theta.rem_euclid(TAU) / self.step;
        let cell = pos.floor();
        let t = pos - cell;
        let j = (cell as usize) % n;
        let k = (j + 1) % n;
        let dt = self.step;
        let (f0, g0, s0) = (self.value[j], self.d1[j] * dt, self.d2[j] * dt * dt);
        let (f1, g1, s1) = (self.value[k], self.d1[k] * dt, self.d2[k] * dt * dt);
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let basis = [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            0.5 * t3 - t4 + 0.5 * t5,
        ];
        let first = [
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            1.5 * t2 - 4.0 * t3 + 2.5 * t4,
        ];
        let second = [
            -60.0 * t + 180.0 * t2 - 120.0 * t3,
            -36.0 * t + 96.0 * t2 - 60.0 * t3,
            1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3,
            60.0 * t - 180.0 * t2 + 120.0 * t3,
            -24.0 * t + 84.0 * t2 - 60.0 * t3,
            3.0 * t - 12.0 * t2 + 10.0 * t3,
        ];
        let coef = [f0, g0, s0, f1, g1, s1];
        let combine = |w: &[f64; 6]| w.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>();
        (combine(&basis), combine(&first) / dt, combine(&second) / (dt * dt))
    }

    /// Support function `|x| h(θ_x)`.
    pub fn support_value(&self, x: [f64; 2]) -> f64 {
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            return 0.0;
        }
        r * self.eval(x[1].atan2(x[0])).0
    }

    /// Support value, gradient `h u + h' u⊥` and Hessian `(h+h'')/|x| u⊥u⊥ᵀ`.
    pub fn support_derivatives(&self, x: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let r = x[0].hypot(x[1]);
        let theta = x[1].atan2(x[0]);
        let (h, hp, hpp) = self.eval(theta);
        let u = [theta.cos(), theta.sin()];
        let up = [-u[1], u[0]];
        let grad = [h * u[0] + hp * up[0], h * u[1] + hp * up[1]];
        let c = (h + hpp) / r;
        let hess = [
            [c * up[0] * up[0], c * up[0] * up[1]],
            [c * up[1] * up[0], c * up[1] * up[1]],
        ];
        (r * h, grad, hess)
    }

    /// Angle `θ*` of the outer normal at the boundary point in direction `y`.
    fn normal_angle(&self, y: [f64; 2]) -> f64 {
        let first = self.boundary_angle[0];
        let mut target = y[1].atan2(y[0]);
        while target < first {
            target += TAU;
        }
        while target >= first + TAU {
            target -= TAU;
        }
        let idx = self.boundary_angle.partition_point(|a| *a <= target).clamp(1, self.value.len());
        let mut lo = self.step * (idx - 1) as f64;
        let mut hi = lo + self.step;
        let residual = |theta: f64| {
            let (h, hp, hpp) = self.eval(theta);
            let g = theta + hp.atan2(h) - target;
            let slope = h * (h + hpp) / (h * h + hp * hp);
            (g, slope)
        };
        let mut theta = 0.5 * (lo + hi);
        for _ in 0..60 {
            let (g, slope) = residual(theta);
            if g.abs() < 1e-15 {
                break;
            }
            if g > 0.0 {
                hi = theta;
            } else {
                lo = theta;
            }
            let newton = theta - g / slope;
            theta = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-16 {
                break;
            }
        }
        theta
    }

    /// Gauge of the body with support function `h`: `⟨y, u*⟩ / h(θ*)`.
    pub fn gauge_value(&self, y: [f64; 2]) -> f64 {
        if y[0] == 0.0 && y[1] == 0.0 {
            return 0.0;
        }
        let theta = self.normal_angle(y);
        let (h, _, _) = self.eval(theta);
        (y[0] * theta.cos() + y[1] * theta.sin()) / h
    }

    /// Gauge value, gradient `u*/h` and Hessian of the body with support `h`.
    pub fn gauge_derivatives(&self, y: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let theta = self.normal_angle(y);
        let (h, hp, hpp) = self.eval(theta);
        let u = [theta.cos(), theta.sin()];
        let up = [-u[1], u[0]];
        let c = y[0] * u[0] + y[1] * u[1];
        let w = [h * up[0] - hp * u[0], h * up[1] - hp * u[1]];
        let scale = 1.0 / (h * h * c * (h + hpp));
        let hess = [
            [scale * w[0] * w[0], scale * w[0] * w[1]],
            [scale * w[1] * w[0], scale * w[1] * w[1]],
        ];
        (c / h, [u[0] / h, u[1] / h], hess)
    }
}
