//! The bounded planar domain `U`, its boundary geometry, the Euclidean
//! distance to `∂U`, and the boundary datum `φ`.

use std::f64::consts::TAU;

use crate::convex_gauge::ConvexBody;
use crate::error::{invalid, Error, Result};
use crate::linalg::{cross, outer, perp, vec2, Mat2, Vec2};

pub const MIN_BOUNDARY_SAMPLES: usize = 512;
const GOLDEN: f64 = 0.618_033_988_749_894_8;
const ON_BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Disc { radius: f64 },
    Ellipse { semi_major: f64, semi_minor: f64 },
    /// Full side lengths `width × height` with corner radius `corner`.
    RoundedRectangle { width: f64, height: f64, corner: f64 },
    /// Radial function `radius (1 + amplitude cos(lobes θ))`.
    Star { radius: f64, amplitude: f64, lobes: u32 },
}

/// Geometry of the boundary curve at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub param: f64,
    pub point: Vec2,
    pub tangent: Vec2,
    /// Unit normal pointing into `U`.
    pub normal: Vec2,
    pub curvature: f64,
    /// `|dγ/ds|` for the parameter `s ∈ [0, 1)`.
    pub speed: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    pub geometry: BoundaryPoint,
    pub arclength: f64,
}

#[derive(Debug, Clone)]
pub struct Domain2D {
    kind: DomainKind,
    samples: Vec<BoundarySample>,
    perimeter: f64,
    spacing: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DistanceResult {
    pub distance: f64,
    pub foot: Vec2,
    pub param: f64,
}

impl DomainKind {
    fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            DomainKind::Disc { radius } => positive(radius, "disc radius"),
            DomainKind::Ellipse { semi_major, semi_minor } => {
                positive(semi_major, "ellipse semi-axis")?;
                positive(semi_minor, "ellipse semi-axis")
            }
            DomainKind::RoundedRectangle { width, height, corner } => {
                positive(width, "width")?;
                positive(height, "height")?;
                positive(corner, "corner radius")?;
                if 2.0 * corner > width.min(height) {
                    return Err(invalid("corner radius exceeds half the shorter side"));
                }
                Ok(())
            }
            DomainKind::Star { radius, amplitude, lobes } => {
                positive(radius, "star radius")?;
                if !(0.0..1.0).contains(&amplitude) {
                    return Err(invalid("star amplitude must lie in [0, 1)"));
                }
                if lobes == 0 {
                    return Err(invalid("star needs at least one lobe"));
                }
                Ok(())
            }
        }
    }

    /// Half-extents of the axis-aligned bounding box centered at the origin.
    pub fn half_extents(&self) -> [f64; 2] {
        match *self {
            DomainKind::Disc { radius } => [radius, radius],
            DomainKind::Ellipse { semi_major, semi_minor } => [semi_major, semi_minor],
            DomainKind::RoundedRectangle { width, height, .. } => [0.5 * width, 0.5 * height],
            DomainKind::Star { radius, amplitude, .. } => {
                let r = radius * (1.0 + amplitude);
                [r, r]
            }
        }
    }

    /// Negative inside `U`, positive outside, zero on `∂U`.
    pub fn level(&self, x: [f64; 2]) -> f64 {
        match *self {
            DomainKind::Disc { radius } => x[0].hypot(x[1]) - radius,
            DomainKind::Ellipse { semi_major, semi_minor } => {
                let (u, v) = (x[0] / semi_major, x[1] / semi_minor);
                (u * u + v * v).sqrt() - 1.0
            }
            DomainKind::RoundedRectangle { width, height, corner } => {
                let qx = x[0].abs() - (0.5 * width - corner);
                let qy = x[1].abs() - (0.5 * height - corner);
                qx.max(0.0).hypot(qy.max(0.0)) + qx.max(qy).min(0.0) - corner
            }
            DomainKind::Star { radius, amplitude, lobes } => {
                let theta = x[1].atan2(x[0]);
                x[0].hypot(x[1]) - radius * (1.0 + amplitude * (lobes as f64 * theta).cos())
            }
        }
    }

    /// Position, first and second derivative in the parameter `s ∈ [0,1)`.
    fn curve(&self, s: f64) -> (Vec2, Vec2, Vec2) {
        let t = TAU * s.rem_euclid(1.0);
        match *self {
            DomainKind::Disc { radius } => ellipse_curve(radius, radius, t),
            DomainKind::Ellipse { semi_major, semi_minor } => {
                ellipse_curve(semi_major, semi_minor, t)
            }
            DomainKind::Star { radius, amplitude, lobes } => {
                let m = lobes as f64;
                let r = radius * (1.0 + amplitude * (m * t).cos());
                let dr = -radius * amplitude * m * (m * t).sin();
                let ddr = -radius * amplitude * m * m * (m * t).cos();
                let u = vec2(t.cos(), t.sin());
                let up = perp(&u);
                (r * u, TAU * (dr * u + r * up), TAU * TAU * ((ddr - r) * u + 2.0 * dr * up))
            }
            DomainKind::RoundedRectangle { width, height, corner } => {
                rounded_rectangle_curve(width, height, corner, s.rem_euclid(1.0))
            }
        }
    }

    fn perimeter_estimate(&self) -> f64 {
        match *self {
            DomainKind::RoundedRectangle { width, height, corner } => {
                2.0 * (width - 2.0 * corner) + 2.0 * (height - 2.0 * corner) + TAU * corner
            }
            _ => {
                let n = 1 << 14;
                (0..n)
                    .map(|i| {
                        let a = self.curve(i as f64 / n as f64).0;
                        let b = self.curve((i + 1) as f64 / n as f64).0;
                        (b - a).norm()
                    })
                    .sum()
            }
        }
    }
}

fn ellipse_curve(a: f64, b: f64, t: f64) -> (Vec2, Vec2, Vec2) {
    let (s, c) = t.sin_cos();
    (vec2(a * c, b * s), TAU * vec2(-a * s, b * c), -TAU * TAU * vec2(a * c, b * s))
}

fn rounded_rectangle_curve(width: f64, height: f64, corner: f64, s: f64) -> (Vec2, Vec2, Vec2) {
    let hx = 0.5 * width - corner;
    let hy = 0.5 * height - corner;
    let straight = [2.0 * hy, 2.0 * hx];
    let arc = 0.25 * TAU * corner;
    let total = 2.0 * (straight[0] + straight[1]) + 4.0 * arc;
    let mut rest = s * total;
    // four (edge, corner arc) pairs, counterclockwise from the right edge
    let centers = [vec2(hx, hy), vec2(-hx, hy), vec2(-hx, -hy), vec2(hx, -hy)];
    for side in 0..4 {
        let len = straight[side % 2];
        let start_angle = side as f64 * 0.25 * TAU;
        let dir = vec2(start_angle.cos(), start_angle.sin());
        let tangent = perp(&dir);
        if rest <= len {
            let prev_center = centers[(side + 3) % 4];
            let start = prev_center + corner * dir;
            return (start + rest * tangent, total * tangent, Vec2::zeros());
        }
        rest -= len;
        if rest <= arc || side == 3 {
            let rest = rest.min(arc);
            let angle = start_angle + rest / corner;
            let radial = vec2(angle.cos(), angle.sin());
            let tan = perp(&radial);
            return (
                centers[side] + corner * radial,
                total * tan,
                -(total * total / corner) * radial,
            );
        }
        rest -= arc;
    }
    unreachable!()
}

impl Domain2D {
    /// Domain with boundary sampled for grid spacing `h`: `max(512, ⌈2L/h⌉)` samples.
    pub fn new(kind: DomainKind, grid_spacing: f64) -> Result<Self> {
        kind.validate()?;
        if !(grid_spacing > 0.0) {
            return Err(invalid("grid spacing must be positive"));
        }
        let count = ((2.0 * kind.perimeter_estimate() / grid_spacing).ceil() as usize)
            .max(MIN_BOUNDARY_SAMPLES);
        Self::with_samples(kind, count)
    }

    /// Domain with exactly `count` boundary samples, uniform in the parameter.
    pub fn with_samples(kind: DomainKind, count: usize) -> Result<Self> {
        kind.validate()?;
        if count < 8 {
            return Err(invalid("at least 8 boundary samples are required"));
        }
        let mut samples = Vec::with_capacity(count);
        let mut arclength = 0.0;
        let mut spacing: f64 = 0.0;
        let mut prev: Option<Vec2> = None;
        for i in 0..count {
            let geometry = boundary_point(&kind, i as f64 / count as f64);
            if let Some(p) = prev {
                let chord = (geometry.point - p).norm();
                arclength += chord;
                spacing = spacing.max(chord);
            }
            prev = Some(geometry.point);
            samples.push(BoundarySample { geometry, arclength });
        }
        let closing = (samples[0].geometry.point - prev.unwrap()).norm();
        spacing = spacing.max(closing);
        Ok(Self { kind, samples, perimeter: arclength + closing, spacing })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn samples(&self) -> &[BoundarySample] {
        &self.samples
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Largest chord between consecutive samples.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_extents(&self) -> [f64; 2] {
        self.kind.half_extents()
    }

    pub fn level(&self, x: [f64; 2]) -> f64 {
        self.kind.level(x)
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.kind.level(x) < 0.0
    }

    /// Exact boundary geometry at parameter `s` (periodic with period 1).
    pub fn boundary_point(&self, s: f64) -> BoundaryPoint {
        boundary_point(&self.kind, s)
    }

    /// Parameter where the segment from inside point `a` to `b` leaves `U`,
    /// as a fraction of the segment. `b` must lie outside or on `∂U`.
    pub fn crossing_fraction(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let p = [a[0] + mid * (b[0] - a[0]), a[1] + mid * (b[1] - a[1])];
            if self.kind.level(p) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `d(x) = min_{y ∈ ∂U} |x − y|` with a minimizing foot point.
    pub fn euclidean_distance(&self, x: [f64; 2]) -> Result<DistanceResult> {
        let scale = self.half_extents()[0].max(1.0);
        if self.kind.level(x) > 1e-12 * scale {
            return Err(Error::Domain(format!("point {x:?} lies outside the closed domain")));
        }
        Ok(self.nearest_boundary_point(x))
    }

    fn nearest_boundary_point(&self, x: [f64; 2]) -> DistanceResult {
        let xv = vec2(x[0], x[1]);
        match self.kind {
            DomainKind::Disc { radius } => {
                let r = xv.norm();
                let dir = if r > 0.0 { xv / r } else { vec2(1.0, 0.0) };
                let param = (dir.y.atan2(dir.x) / TAU).rem_euclid(1.0);
                return DistanceResult { distance: (radius - r).abs(), foot: radius * dir, param };
            }
            DomainKind::RoundedRectangle { width, height, corner } => {
                return rounded_rectangle_foot(width, height, corner, xv);
            }
            _ => {}
        }
        let n = self.samples.len();
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, s) in self.samples.iter().enumerate() {
            let d = (s.geometry.point - xv).norm_squared();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        let ds = 1.0 / n as f64;
        let center = best as f64 * ds;
        let dist2 = |s: f64| (self.kind.curve(s).0 - xv).norm_squared();
        let param = golden_section(dist2, center - ds, center + ds, 80);
        let foot = self.kind.curve(param).0;
        DistanceResult { distance: (foot - xv).norm(), foot, param: param.rem_euclid(1.0) }
    }

    /// `D²d(y) = −κ(y) τ τᵀ` at a boundary point.
    pub fn boundary_hessian_of_distance(&self, y: [f64; 2]) -> Result<Mat2> {
        let near = self.nearest_boundary_point(y);
        let scale = self.half_extents()[0].max(1.0);
        if near.distance > ON_BOUNDARY_TOL * scale {
            return Err(Error::Domain(format!("point {y:?} is not on the boundary")));
        }
        Ok(self.boundary_point(near.param).distance_hessian())
    }
}

impl BoundaryPoint {
    pub fn distance_hessian(&self) -> Mat2 {
        -self.curvature * outer(&self.tangent, &self.tangent)
    }
}

fn boundary_point(kind: &DomainKind, s: f64) -> BoundaryPoint {
    let (point, d1, d2) = kind.curve(s);
    let speed = d1.norm();
    let tangent = d1 / speed;
    let curvature = cross(&d1, &d2) / (speed * speed * speed);
    BoundaryPoint {
        param: s.rem_euclid(1.0),
        point,
        tangent,
        normal: perp(&tangent),
        curvature,
        speed,
    }
}

fn rounded_rectangle_foot(
    width: f64,
    height: f64,
    corner: f64,
    x: Vec2,
) -> DistanceResult {
    let hx = 0.5 * width - corner;
    let hy = 0.5 * height - corner;
    let sx = if x.x < 0.0 { -1.0 } else { 1.0 };
    let sy = if x.y < 0.0 { -1.0 } else { 1.0 };
    let qx = x.x.abs() - hx;
    let qy = x.y.abs() - hy;
    let foot = if qx > 0.0 && qy > 0.0 {
        let c = vec2(sx * hx, sy * hy);
        let dir = (x - c) / (x - c).norm();
        c + corner * dir
    } else if qx >= qy {
        vec2(sx * 0.5 * width, x.y)
    } else {
        vec2(x.x, sy * 0.5 * height)
    };
    let param = rounded_rectangle_param(width, height, corner, foot);
    DistanceResult { distance: (foot - x).norm(), foot, param }
}

/// Inverse of the arclength parametrization for a point on the boundary.
fn rounded_rectangle_param(width: f64, height: f64, corner: f64, p: Vec2) -> f64 {
    let hx = 0.5 * width - corner;
    let hy = 0.5 * height - corner;
    let edge = [2.0 * hy, 2.0 * hx];
    let arc = 0.25 * TAU * corner;
    let total = 2.0 * (edge[0] + edge[1]) + 4.0 * arc;
    let offsets = [0.0, edge[0] + arc, edge[0] + edge[1] + 2.0 * arc, 2.0 * edge[0] + edge[1] + 3.0 * arc];
    let s = if p.x.abs() <= hx + 1e-15 && p.y.abs() > hy {
        if p.y > 0.0 {
            offsets[1] + (hx - p.x)
        } else {
            offsets[3] + (p.x + hx)
        }
    } else if p.y.abs() <= hy + 1e-15 && p.x.abs() > hx {
        if p.x > 0.0 {
            p.y + hy
        } else {
            offsets[2] + (hy - p.y)
        }
    } else {
        let c = vec2(p.x.signum() * hx, p.y.signum() * hy);
        let angle = (p.y - c.y).atan2(p.x - c.x).rem_euclid(TAU);
        let side = (angle / (0.25 * TAU)).floor().min(3.0) as usize;
        offsets[side] + edge[side % 2] + corner * (angle - side as f64 * 0.25 * TAU)
    };
    (s / total).rem_euclid(1.0)
}

/// Minimizer of a unimodal function on `[a, b]`.
pub(crate) fn golden_section(f: impl Fn(f64) -> f64, a: f64, b: f64, iterations: usize) -> f64 {
    let (mut a, mut b) = (a, b);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iterations {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Boundary datum `φ`, given analytically with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryDatum {
    Zero,
    /// `φ(x) = ⟨slope, x⟩ + offset`.
    Affine { slope: [f64; 2], offset: f64 },
    /// `φ(x) = amplitude · sin(⟨wavevector, x⟩)`.
    Wave { amplitude: f64, wavevector: [f64; 2] },
}

impl BoundaryDatum {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            BoundaryDatum::Zero => 0.0,
            BoundaryDatum::Affine { slope, offset } => slope[0] * x[0] + slope[1] * x[1] + offset,
            BoundaryDatum::Wave { amplitude, wavevector } => {
                amplitude * (wavevector[0] * x[0] + wavevector[1] * x[1]).sin()
            }
        }
    }

    pub fn gradient(&self, x: [f64; 2]) -> Vec2 {
        match self {
            BoundaryDatum::Zero => Vec2::zeros(),
            BoundaryDatum::Affine { slope, .. } => vec2(slope[0], slope[1]),
            BoundaryDatum::Wave { amplitude, wavevector } => {
                let c = amplitude * (wavevector[0] * x[0] + wavevector[1] * x[1]).cos();
                vec2(c * wavevector[0], c * wavevector[1])
            }
        }
    }

    pub fn hessian(&self, x: [f64; 2]) -> Mat2 {
        match self {
            BoundaryDatum::Zero | BoundaryDatum::Affine { .. } => Mat2::zeros(),
            BoundaryDatum::Wave { amplitude, wavevector } => {
                let s = amplitude * (wavevector[0] * x[0] + wavevector[1] * x[1]).sin();
                let k = vec2(wavevector[0], wavevector[1]);
                -s * outer(&k, &k)
            }
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            BoundaryDatum::Zero => BoundaryDatum::Zero,
            BoundaryDatum::Affine { slope, offset } => {
                BoundaryDatum::Affine { slope: [-slope[0], -slope[1]], offset: -offset }
            }
            BoundaryDatum::Wave { amplitude, wavevector } => {
                BoundaryDatum::Wave { amplitude: -amplitude, wavevector: *wavevector }
            }
        }
    }

    /// Largest violation of `−γ(y−x) ≤ φ(x)−φ(y) ≤ γ(x−y)` over the pairs.
    pub fn lipschitz_violation(&self, body: &ConvexBody, pairs: &[([f64; 2], [f64; 2])]) -> f64 {
        pairs
            .iter()
            .map(|(x, y)| {
                let diff = self.value(*x) - self.value(*y);
                let upper = body.gauge2([x[0] - y[0], x[1] - y[1]]);
                let lower = -body.gauge2([y[0] - x[0], y[1] - x[1]]);
                (diff - upper).max(lower - diff).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct StarSample {
    pub index: usize,
    pub point: [f64; 2],
    pub polar_gauge: f64,
    /// Smallest `|⟨v, ν⟩|` over normal-cone generators `v` of `K°` at `Dφ`.
    pub min_transversality: f64,
    pub transversal: bool,
}

#[derive(Debug, Clone)]
pub struct ConditionStarReport {
    pub max_polar_gauge: f64,
    /// Samples where the constraint is attained, `γ°(Dφ) = 1`.
    pub attained: Vec<StarSample>,
    /// Contiguous runs of non-transversal samples.
    pub failing_clusters: Vec<Vec<usize>>,
    pub infeasible: bool,
    pub pass: bool,
}

const ATTAINED_TOL: f64 = 1e-9;

/// Condition (∗): wherever `γ°(Dφ(y)) = 1`, every outer normal `v` of `K°`
/// at `Dφ(y)` is transversal to `∂U`, `⟨v, ν(y)⟩ ≠ 0`.
///
/// Transversality is judged against the largest normal turn between
/// consecutive samples, the resolution at which tangency can be located.
pub fn check_condition_star(
    domain: &Domain2D,
    phi: &BoundaryDatum,
    body: &ConvexBody,
) -> Result<ConditionStarReport> {
    if body.dim() != 2 {
        return Err(invalid("condition check needs a planar body"));
    }
    let polar = body.polar();
    let samples = domain.samples();
    let n = samples.len();
    let turn = (0..n)
        .map(|i| (samples[(i + 1) % n].geometry.normal - samples[i].geometry.normal).norm())
        .fold(0.0, f64::max);
    let mut max_polar_gauge: f64 = 0.0;
    let mut attained = Vec::new();
    for (index, s) in samples.iter().enumerate() {
        let p = s.geometry.point;
        let grad = phi.gradient([p.x, p.y]);
        let value = body.support2([grad.x, grad.y]);
        max_polar_gauge = max_polar_gauge.max(value);
        if (value - 1.0).abs() <= ATTAINED_TOL {
            let cone = polar.normal_cone(&[grad.x, grad.y])?;
            let nu = s.geometry.normal;
            let min_transversality = cone
                .generators
                .iter()
                .map(|v| (v[0] * nu.x + v[1] * nu.y).abs())
                .fold(f64::INFINITY, f64::min);
            attained.push(StarSample {
                index,
                point: [p.x, p.y],
                polar_gauge: value,
                min_transversality,
                transversal: min_transversality > turn,
            });
        }
    }
    let infeasible = max_polar_gauge > 1.0 + ATTAINED_TOL;
    let failing: Vec<usize> = attained.iter().filter(|s| !s.transversal).map(|s| s.index).collect();
    let failing_clusters = cluster_cyclic(&failing, n);
    let pass = !infeasible && failing.is_empty();
    Ok(ConditionStarReport { max_polar_gauge, attained, failing_clusters, infeasible, pass })
}

/// Groups sorted indices into runs of consecutive values on a cycle of length `n`.
fn cluster_cyclic(indices: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in indices {
        match clusters.last_mut() {
            Some(last) if *last.last().unwrap() + 1 == i => last.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    if clusters.len() > 1 {
        let first_start = clusters[0][0];
        let last_end = *clusters.last().unwrap().last().unwrap();
        if first_start == 0 && last_end == n - 1 {
            let first = clusters.remove(0);
            clusters.last_mut().unwrap().extend(first);
        }
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(r: f64) -> Domain2D {
        Domain2D::with_samples(DomainKind::Disc { radius: r }, 1024).unwrap()
    }

    #[test]
    fn disc_distances() {
        let d = disc(1.0);
        assert_eq!(d.euclidean_distance([0.0, 0.0]).unwrap().distance, 1.0);
        let r = d.euclidean_distance([0.5, 0.0]).unwrap();
        assert!((r.distance - 0.5).abs() < 1e-15);
        assert!((r.foot - vec2(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(d.euclidean_distance([2.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn ellipse_distance_matches_dense_search() {
        let kind = DomainKind::Ellipse { semi_major: 2.0, semi_minor: 1.0 };
        let d = Domain2D::with_samples(kind.clone(), 600).unwrap();
        let r = d.euclidean_distance([0.0, 0.0]).unwrap();
        assert!((r.distance - 1.0).abs() < 1e-12);
        assert!(r.foot.x.abs() < 1e-6 && (r.foot.y.abs() - 1.0).abs() < 1e-12);
        let dense = Domain2D::with_samples(kind, 100_000).unwrap();
        for x in [[0.7, 0.3], [-1.5, 0.1], [0.2, -0.8]] {
            let brute = dense
                .samples()
                .iter()
                .map(|s| (s.geometry.point - vec2(x[0], x[1])).norm())
                .fold(f64::INFINITY, f64::min);
            let got = d.euclidean_distance(x).unwrap().distance;
            assert!(got <= brute + 1e-12 && brute - got < 1e-8, "{got} vs {brute}");
        }
    }

    #[test]
    fn curvature_matches_finite_differences() {
        let kinds = [
            DomainKind::Ellipse { semi_major: 2.0, semi_minor: 1.0 },
            DomainKind::Star { radius: 1.0, amplitude: 0.1, lobes: 5 },
            DomainKind::RoundedRectangle { width: 3.0, height: 2.0, corner: 0.4 },
        ];
        for kind in kinds {
            let d = Domain2D::with_samples(kind, 512).unwrap();
            for s in [0.013, 0.2, 0.41, 0.77] {
                let b = d.boundary_point(s);
                let step = 1e-4;
                let tm = d.boundary_point(s - step).tangent;
                let tp = d.boundary_point(s + step).tangent;
                let dtheta = cross(&tm, &tp).atan2(tm.dot(&tp));
                let fd = dtheta / (2.0 * step * b.speed);
                assert!((fd - b.curvature).abs() < 1e-4, "{fd} vs {}", b.curvature);
                let inside = b.point + 1e-6 * b.normal;
                assert!(d.contains([inside.x, inside.y]));
            }
        }
    }

    #[test]
    fn rounded_rectangle_parametrization_is_consistent() {
        let kind = DomainKind::RoundedRectangle { width: 3.0, height: 2.0, corner: 0.5 };
        let d = Domain2D::with_samples(kind, 777).unwrap();
        let expected = 2.0 * 2.0 + 2.0 * 1.0 + TAU * 0.5;
        assert!((d.perimeter() - expected).abs() < 1e-4);
        for s in d.samples().iter().step_by(13) {
            let p = s.geometry.point;
            assert!(d.level([p.x, p.y]).abs() < 1e-12);
            let back = d.nearest_boundary_point([p.x, p.y]);
            assert!((back.param - s.geometry.param).abs() < 1e-9
                || (back.param - s.geometry.param).abs() > 1.0 - 1e-9);
        }
        let flat = d.boundary_hessian_of_distance([1.5, 0.0]).unwrap();
        assert_eq!(flat, Mat2::zeros());
    }

    #[test]
    fn distance_hessian_on_disc() {
        let d = disc(2.0);
        let hess = d.boundary_hessian_of_distance([0.0, 2.0]).unwrap();
        assert!((hess[(0, 0)] + 0.5).abs() < 1e-12 && hess[(1, 1)].abs() < 1e-12);
        assert!(d.boundary_hessian_of_distance([0.0, 1.0]).is_err());
    }

    #[test]
    fn ellipse_vertex_distance_hessian_matches_finite_differences() {
        let d = Domain2D::with_samples(DomainKind::Ellipse { semi_major: 2.0, semi_minor: 1.0 }, 2048)
            .unwrap();
        let hess = d.boundary_hessian_of_distance([2.0, 0.0]).unwrap();
        assert!((hess[(1, 1)] + 2.0).abs() < 1e-10);
        let step = 1e-3;
        let dist = |x: [f64; 2]| d.euclidean_distance(x).unwrap().distance;
        let base = [2.0 - 0.01, 0.0];
        let fd = (dist([base[0], step]) - 2.0 * dist(base) + dist([base[0], -step])) / (step * step);
        // curvature of the parallel curve at depth t is κ/(1−tκ)
        let expected = -2.0 / (1.0 - 0.01 * 2.0);
        assert!((fd - expected).abs() < 1e-3 * expected.abs(), "{fd} vs {expected}");
    }

    #[test]
    fn condition_star_tangency_points() {
        let d = disc(1.0);
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let zero = check_condition_star(&d, &BoundaryDatum::Zero, &ball).unwrap();
        assert!(zero.pass && zero.attained.is_empty());
        let tight = BoundaryDatum::Affine { slope: [1.0, 0.0], offset: 0.0 };
        let r = check_condition_star(&d, &tight, &ball).unwrap();
        assert!(!r.pass);
        assert_eq!(r.failing_clusters.len(), 2);
        for c in &r.failing_clusters {
            let p = d.samples()[c[0]].geometry.point;
            assert!(p.x.abs() < 0.01);
        }
        let loose = BoundaryDatum::Affine { slope: [0.9, 0.0], offset: 0.0 };
        assert!(check_condition_star(&d, &loose, &ball).unwrap().pass);
    }

    #[test]
    fn datum_derivatives() {
        let w = BoundaryDatum::Wave { amplitude: 0.3, wavevector: [1.0, 2.0] };
        let x = [0.4, -0.2];
        let g = w.gradient(x);
        let step = 1e-6;
        let fd = (w.value([x[0] + step, x[1]]) - w.value([x[0] - step, x[1]])) / (2.0 * step);
        assert!((fd - g.x).abs() < 1e-8);
        let h = w.hessian(x);
        let fd = (w.gradient([x[0], x[1] + step]) - w.gradient([x[0], x[1] - step])) / (2.0 * step);
        assert!((fd.x - h[(0, 1)]).abs() < 1e-7);
    }
}
