//! Checks on solved fields: the coincidence decomposition, the gradient
//! constrained equation `max{F[u], γ°(Du) − 1} = 0`, the identification of
//! the coincidence set with `{γ°(Du) = 1}`, the separation of ridges from the
//! coincidence set, and plastic segments.

mod pipeline;

pub use pipeline::{run_approximation_pipeline, PipelineConfig, PipelineLevel, PipelineOutcome, PipelineReport};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex_gauge::ConvexBody;
use crate::error::{Error, Result};
use crate::grid::{DomainGrid, Grid, GridField, STENCIL};
use crate::linalg::{vec2, Vec2};
use crate::obstacle::{ObstacleField, RidgeMask};
use crate::penalty_solver::Scheme;

/// `tol_p = max(1e−8, h² S / 20)` with `S` a bound on `|D²ρ|`.
pub fn coincidence_tolerance(h: f64, hessian_bound: f64) -> f64 {
    (h * h * hessian_bound / 20.0).max(1e-8)
}

#[derive(Debug, Clone)]
pub struct CoincidenceDecomposition {
    pub grid: Grid,
    pub elastic: Vec<bool>,
    pub upper: Vec<bool>,
    pub lower: Vec<bool>,
    /// Lower-left nodes of cells with both elastic and coincidence corners.
    pub free_boundary: Vec<usize>,
    pub tol_p: f64,
}

impl CoincidenceDecomposition {
    pub fn coincidence(&self) -> Vec<bool> {
        self.upper.iter().zip(&self.lower).map(|(a, b)| *a || *b).collect()
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let count = |m: &[bool]| m.iter().filter(|b| **b).count();
        (count(&self.elastic), count(&self.upper), count(&self.lower))
    }

    /// Nodes within `width` cells (Chebyshev) of a free-boundary cell.
    pub fn band(&self, width: usize) -> Vec<bool> {
        let grid = self.grid;
        let mut mask = vec![false; grid.len()];
        let w = width as isize;
        for &k in &self.free_boundary {
            for dj in -w..=w + 1 {
                for di in -w..=w + 1 {
                    if let Some(nb) = grid.neighbor(k, (di, dj)) {
                        mask[nb] = true;
                    }
                }
            }
        }
        mask
    }

    /// Mean and standard deviation of the distance from the origin to the
    /// free-boundary cell centers.
    pub fn free_boundary_radius(&self) -> Option<(f64, f64)> {
        if self.free_boundary.is_empty() {
            return None;
        }
        let h = self.grid.h;
        let radii: Vec<f64> = self
            .free_boundary
            .iter()
            .map(|k| {
                let p = self.grid.point_of(*k);
                (p[0] + 0.5 * h).hypot(p[1] + 0.5 * h)
            })
            .collect();
        let mean = radii.iter().sum::<f64>() / radii.len() as f64;
        let var = radii.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / radii.len() as f64;
        Some((mean, var.sqrt()))
    }

    pub fn render(&self) -> String {
        let (e, p, m) = self.counts();
        format!(
            "tol_p: {:.3e}\nelastic: {e}\nupper_coincidence: {p}\nlower_coincidence: {m}\nfree_boundary_cells: {}\n",
            self.tol_p,
            self.free_boundary.len()
        )
    }
}

/// Splits interior nodes into `E`, `P⁺ = {u = ψ⁺}` and `P⁻ = {u = ψ⁻}` up to `tol_p`.
pub fn decompose(
    u: &GridField,
    psi_plus: &GridField,
    psi_minus: &GridField,
    dgrid: &DomainGrid,
    tol_p: f64,
) -> Result<CoincidenceDecomposition> {
    u.check_same_grid(psi_plus)?;
    u.check_same_grid(psi_minus)?;
    if u.grid != dgrid.grid {
        return Err(Error::InvalidArgument("field and domain grid differ".into()));
    }
    let grid = dgrid.grid;
    let mut elastic = vec![false; grid.len()];
    let mut upper = vec![false; grid.len()];
    let mut lower = vec![false; grid.len()];
    for &k in dgrid.interior() {
        let v = u.values[k];
        if (psi_plus.values[k] - v).abs() <= tol_p {
            upper[k] = true;
        } else if (v - psi_minus.values[k]).abs() <= tol_p {
            lower[k] = true;
        } else {
            elastic[k] = true;
        }
    }
    let mut free_boundary = Vec::new();
    for &k in dgrid.interior() {
        let corners = [Some(k), grid.neighbor(k, (1, 0)), grid.neighbor(k, (0, 1)), grid.neighbor(k, (1, 1))];
        if corners.iter().any(|c| c.is_none_or(|c| !dgrid.is_interior(c))) {
            continue;
        }
        let corners: Vec<usize> = corners.iter().flatten().copied().collect();
        let has_e = corners.iter().any(|c| elastic[*c]);
        let has_p = corners.iter().any(|c| upper[*c] || lower[*c]);
        if has_e && has_p {
            free_boundary.push(k);
        }
    }
    Ok(CoincidenceDecomposition { grid, elastic, upper, lower, free_boundary, tol_p })
}

/// Centered differences where both axis neighbors are interior, second-order
/// one-sided differences toward the interior otherwise.
pub fn discrete_gradient(u: &GridField, dgrid: &DomainGrid) -> Vec<Option<Vec2>> {
    let grid = dgrid.grid;
    let h = grid.h;
    let inside = |k: Option<usize>| k.filter(|k| dgrid.is_interior(*k));
    let mut out = vec![None; grid.len()];
    for &k in dgrid.interior() {
        let mut comps = [0.0; 2];
        let mut ok = true;
        for (axis, (fwd, bwd)) in [(STENCIL[0], STENCIL[1]), (STENCIL[2], STENCIL[3])].into_iter().enumerate() {
            let f = inside(grid.neighbor(k, fwd));
            let b = inside(grid.neighbor(k, bwd));
            let two = |off: (isize, isize)| inside(grid.neighbor(k, (2 * off.0, 2 * off.1)));
            comps[axis] = match (f, b) {
                (Some(f), Some(b)) => (u.values[f] - u.values[b]) / (2.0 * h),
                (Some(f), None) => match two(fwd) {
                    Some(ff) => (-3.0 * u.values[k] + 4.0 * u.values[f] - u.values[ff]) / (2.0 * h),
                    None => (u.values[f] - u.values[k]) / h,
                },
                (None, Some(b)) => match two(bwd) {
                    Some(bb) => (3.0 * u.values[k] - 4.0 * u.values[b] + u.values[bb]) / (2.0 * h),
                    None => (u.values[k] - u.values[b]) / h,
                },
                (None, None) => {
                    ok = false;
                    0.0
                }
            };
        }
        if ok {
            out[k] = Some(vec2(comps[0], comps[1]));
        }
    }
    out
}

/// `max |D²_ξξ u|` over nodes whose full stencil is interior, along the four lines.
pub fn max_second_difference(u: &GridField, dgrid: &DomainGrid) -> f64 {
    let grid = dgrid.grid;
    let mut best: f64 = 0.0;
    for &k in dgrid.interior() {
        if !dgrid.is_deep(k) {
            continue;
        }
        for line in 0..4 {
            let f = grid.neighbor(k, STENCIL[2 * line]).expect("deep node");
            let b = grid.neighbor(k, STENCIL[2 * line + 1]).expect("deep node");
            let len2 = if line < 2 { grid.h * grid.h } else { 2.0 * grid.h * grid.h };
            best = best.max(((u.values[f] + u.values[b] - 2.0 * u.values[k]) / len2).abs());
        }
    }
    best
}

/// `γ°(D_h u) − 1` at interior nodes, NaN elsewhere; `γ°` is the support function of `K`.
pub fn constraint_field(u: &GridField, dgrid: &DomainGrid, body: &ConvexBody) -> GridField {
    let grad = discrete_gradient(u, dgrid);
    let mut out = GridField::filled(dgrid.grid, f64::NAN);
    for &k in dgrid.interior() {
        if let Some(p) = grad[k] {
            out.values[k] = body.support2([p.x, p.y]) - 1.0;
        }
    }
    out
}

const FAN_SIZE: usize = 64;

#[derive(Debug, Clone)]
pub struct GradientConstraintReport {
    /// `H = γ°(D_h u) − 1`.
    pub h_field: GridField,
    /// `max{F_h[u], H}`.
    pub residual_field: GridField,
    pub tol_c: f64,
    pub band_width: usize,
    /// `max H` over interior nodes.
    pub max_violation: f64,
    /// `max_ξ D_ξ u` over a fan of `ξ` with `γ(ξ) = 1`.
    pub fan_max: f64,
    pub max_residual_outside_band: f64,
    pub max_residual: f64,
    /// Nodes outside the band with `|max{F_h, H}| > tol_c`.
    pub exceptions: Vec<usize>,
    pub active_set: Vec<bool>,
    pub pass: bool,
}

impl GradientConstraintReport {
    pub fn render(&self, grid: &Grid) -> String {
        let mut out = format!(
            "tol_c: {:.6}\nband_width: {}\nmax_constraint: {:.3e}\nfan_max_directional_derivative: {:.6}\nmax_residual: {:.3e}\nmax_residual_outside_band: {:.3e}\nexceptions: {}\n",
            self.tol_c,
            self.band_width,
            self.max_violation,
            self.fan_max,
            self.max_residual,
            self.max_residual_outside_band,
            self.exceptions.len()
        );
        for k in self.exceptions.iter().take(5) {
            out.push_str(&format!(
                "  worst: {:?} residual {:.3e}\n",
                grid.point_of(*k),
                self.residual_field.values[*k]
            ));
        }
        out.push_str(&format!("theorem2: {}\n", if self.pass { "PASS" } else { "FAIL" }));
        out
    }
}

/// Node-wise check of `max{F_h[u], γ°(D_h u) − 1} = 0` within `tol_c`, with
/// exceptions tolerated inside a band around the free boundary.
pub fn check_theorem2(
    u: &GridField,
    decomposition: &CoincidenceDecomposition,
    scheme: &Scheme,
    body: &ConvexBody,
    dgrid: &DomainGrid,
    tol_c: f64,
    band_width: usize,
) -> Result<GradientConstraintReport> {
    if u.grid != dgrid.grid || decomposition.grid != dgrid.grid {
        return Err(Error::InvalidArgument("field, decomposition and domain grid differ".into()));
    }
    let f = scheme.apply_field(u);
    let h_field = constraint_field(u, dgrid, body);
    let grad = discrete_gradient(u, dgrid);
    let fan: Vec<Vec2> = (0..FAN_SIZE)
        .map(|j| {
            let angle = std::f64::consts::TAU * j as f64 / FAN_SIZE as f64;
            let w = vec2(angle.cos(), angle.sin());
            w / body.gauge2([w.x, w.y])
        })
        .collect();
    let band = decomposition.band(band_width);
    let mut residual_field = GridField::filled(dgrid.grid, f64::NAN);
    let mut max_violation = f64::NEG_INFINITY;
    let mut fan_max = f64::NEG_INFINITY;
    let mut max_residual: f64 = 0.0;
    let mut max_outside: f64 = 0.0;
    let mut exceptions = Vec::new();
    let mut active_set = vec![false; dgrid.grid.len()];
    for &k in dgrid.interior() {
        let hv = h_field.values[k];
        if !hv.is_finite() {
            continue;
        }
        let r = f.values[k].max(hv);
        residual_field.values[k] = r;
        max_violation = max_violation.max(hv);
        active_set[k] = hv.abs() <= tol_c;
        if let Some(p) = grad[k] {
            fan_max = fan.iter().map(|xi| xi.dot(&p)).fold(fan_max, f64::max);
        }
        max_residual = max_residual.max(r.abs());
        if !band[k] {
            max_outside = max_outside.max(r.abs());
            if r.abs() > tol_c {
                exceptions.push(k);
            }
        }
    }
    exceptions.sort_by(|a, b| residual_field.values[*b].abs().total_cmp(&residual_field.values[*a].abs()));
    let pass = exceptions.is_empty() && max_violation <= tol_c && fan_max <= 1.0 + tol_c;
    Ok(GradientConstraintReport {
        h_field,
        residual_field,
        tol_c,
        band_width,
        max_violation,
        fan_max,
        max_residual_outside_band: max_outside,
        max_residual,
        exceptions,
        active_set,
        pass,
    })
}

/// `tol_H = h · max |D²_ξξ u|`: the size of `|H(D_h u)|` one cell away from
/// the free boundary on the elastic side.
pub fn active_set_tolerance(u: &GridField, dgrid: &DomainGrid) -> f64 {
    (dgrid.grid.h * max_second_difference(u, dgrid)).max(1e-8)
}

#[derive(Debug, Clone)]
pub struct ActiveSetReport {
    pub tol_h: f64,
    pub band_width: usize,
    /// `{|H(D_h u)| ≤ tol_H}`.
    pub active: Vec<bool>,
    /// Nodes where `P` and the active set disagree.
    pub mismatched: usize,
    pub mismatched_outside_band: Vec<usize>,
    /// Nodes where `E` and `{H < −tol_H}` disagree, outside the band.
    pub elastic_mismatched_outside_band: Vec<usize>,
    pub pass: bool,
}

impl ActiveSetReport {
    pub fn render(&self) -> String {
        format!(
            "tol_H: {:.3e}\nband_width: {}\nmismatched: {}\nmismatched_outside_band: {}\nelastic_mismatched_outside_band: {}\nprop_3_5: {}\n",
            self.tol_h,
            self.band_width,
            self.mismatched,
            self.mismatched_outside_band.len(),
            self.elastic_mismatched_outside_band.len(),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Compares `P` with `{H(D_h u) = 0}` and `E` with `{H(D_h u) < 0}`.
pub fn check_prop_3_5(
    u: &GridField,
    decomposition: &CoincidenceDecomposition,
    body: &ConvexBody,
    dgrid: &DomainGrid,
    tol_h: f64,
    band_width: usize,
) -> Result<ActiveSetReport> {
    if u.grid != dgrid.grid || decomposition.grid != dgrid.grid {
        return Err(Error::InvalidArgument("field, decomposition and domain grid differ".into()));
    }
    let h_field = constraint_field(u, dgrid, body);
    let band = decomposition.band(band_width);
    let coincidence = decomposition.coincidence();
    let mut active = vec![false; dgrid.grid.len()];
    let mut mismatched = 0;
    let mut outside = Vec::new();
    let mut elastic_outside = Vec::new();
    for &k in dgrid.interior() {
        let hv = h_field.values[k];
        if !hv.is_finite() {
            continue;
        }
        active[k] = hv.abs() <= tol_h;
        if active[k] != coincidence[k] {
            mismatched += 1;
            if !band[k] {
                outside.push(k);
            }
        }
        if (hv < -tol_h) != decomposition.elastic[k] && !band[k] {
            elastic_outside.push(k);
        }
    }
    let pass = outside.is_empty() && elastic_outside.is_empty();
    Ok(ActiveSetReport {
        tol_h,
        band_width,
        active,
        mismatched,
        mismatched_outside_band: outside,
        elastic_mismatched_outside_band: elastic_outside,
        pass,
    })
}

#[derive(Debug, Clone)]
pub struct ComponentDistance {
    pub upper: bool,
    pub size: usize,
    /// Smallest distance (in cells) from the component to the matching ridge.
    pub distance_cells: f64,
}

#[derive(Debug, Clone)]
pub struct RidgeSeparationReport {
    pub upper_intersections: Vec<usize>,
    pub lower_intersections: Vec<usize>,
    pub components: Vec<ComponentDistance>,
    pub pass: bool,
}

impl RidgeSeparationReport {
    pub fn render(&self) -> String {
        let mut out = format!(
            "ridge_upper_coincidence_intersections: {}\nridge_lower_coincidence_intersections: {}\n",
            self.upper_intersections.len(),
            self.lower_intersections.len()
        );
        for c in &self.components {
            out.push_str(&format!(
                "component: {} size={} ridge_distance_cells={:.2}\n",
                if c.upper { "upper" } else { "lower" },
                c.size,
                c.distance_cells
            ));
        }
        out.push_str(&format!("prop_3_3: {}\n", if self.pass { "PASS" } else { "FAIL" }));
        out
    }
}

/// 4-connected components of a node mask.
fn components(mask: &[bool], grid: &Grid) -> Vec<Vec<usize>> {
    let mut seen = vec![false; mask.len()];
    let mut out = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut comp = Vec::new();
        while let Some(k) = stack.pop() {
            comp.push(k);
            for off in &STENCIL[..4] {
                if let Some(nb) = grid.neighbor(k, *off) {
                    if mask[nb] && !seen[nb] {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Ridge of `ρ` against `P⁺` and ridge of `ρ̄` against `P⁻`.
pub fn check_prop_3_3(
    decomposition: &CoincidenceDecomposition,
    ridge_upper: &RidgeMask,
    ridge_lower: &RidgeMask,
) -> RidgeSeparationReport {
    let grid = decomposition.grid;
    let upper_ridge = ridge_upper.mask();
    let lower_ridge = ridge_lower.mask();
    let hits = |ridge: &[bool], set: &[bool]| -> Vec<usize> {
        (0..grid.len()).filter(|k| ridge[*k] && set[*k]).collect()
    };
    let upper_intersections = hits(&upper_ridge, &decomposition.upper);
    let lower_intersections = hits(&lower_ridge, &decomposition.lower);
    let mut comps = Vec::new();
    for (upper, set, ridge) in
        [(true, &decomposition.upper, &upper_ridge), (false, &decomposition.lower, &lower_ridge)]
    {
        let ridge_pts: Vec<[f64; 2]> = (0..grid.len()).filter(|k| ridge[*k]).map(|k| grid.point_of(k)).collect();
        for comp in components(set, &grid) {
            let distance = comp
                .iter()
                .flat_map(|k| {
                    let x = grid.point_of(*k);
                    ridge_pts.iter().map(move |r| (x[0] - r[0]).hypot(x[1] - r[1]))
                })
                .fold(f64::INFINITY, f64::min);
            comps.push(ComponentDistance { upper, size: comp.len(), distance_cells: distance / grid.h });
        }
    }
    let pass = upper_intersections.is_empty() && lower_intersections.is_empty();
    RidgeSeparationReport { upper_intersections, lower_intersections, components: comps, pass }
}

#[derive(Debug, Clone)]
pub struct SegmentViolation {
    pub start: [f64; 2],
    pub at: [f64; 2],
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct PlasticSegmentReport {
    pub samples: usize,
    pub steps: usize,
    pub max_gap: f64,
    pub violations: Vec<SegmentViolation>,
    pub pass: bool,
}

impl PlasticSegmentReport {
    pub fn render(&self) -> String {
        format!(
            "segments: {}\nsteps: {}\nmax_gap: {:.3e}\nviolations: {}\nlemma_3_2: {}\n",
            self.samples,
            self.steps,
            self.max_gap,
            self.violations.len(),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// For sampled coincidence nodes `x`, walks `[x, y[` toward the closest
/// boundary point `y` in steps of `h` and checks that the nearest interior
/// node of each step is still in contact within `2 tol_p`.
pub fn check_lemma_3_2(
    u: &GridField,
    decomposition: &CoincidenceDecomposition,
    upper: &ObstacleField,
    lower: &ObstacleField,
    dgrid: &DomainGrid,
    samples: usize,
    seed: u64,
) -> Result<PlasticSegmentReport> {
    if u.grid != dgrid.grid || decomposition.grid != dgrid.grid {
        return Err(Error::InvalidArgument("field, decomposition and domain grid differ".into()));
    }
    let grid = dgrid.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 2.0 * decomposition.tol_p;
    let mut report = PlasticSegmentReport { samples: 0, steps: 0, max_gap: 0.0, violations: Vec::new(), pass: true };
    for (set, field) in [(&decomposition.upper, upper), (&decomposition.lower, lower)] {
        let nodes: Vec<usize> = (0..grid.len()).filter(|k| set[*k]).collect();
        if nodes.is_empty() {
            continue;
        }
        let psi = field.values();
        let domain = field.envelope().domain();
        for _ in 0..samples {
            let k = nodes[rng.random_range(0..nodes.len())];
            let Some(c) = field.closest(k) else { continue };
            let x = grid.point_of(k);
            let y = domain.boundary_point(c.param).point;
            let dir = vec2(y.x - x[0], y.y - x[1]);
            let len = dir.norm();
            let unit = if len > 0.0 { dir / len } else { dir };
            report.samples += 1;
            let steps = (len / grid.h).floor() as usize;
            for m in 0..=steps {
                let z = [x[0] + m as f64 * grid.h * unit.x, x[1] + m as f64 * grid.h * unit.y];
                if m as f64 * grid.h >= len {
                    break;
                }
                let (fi, fj) = grid.locate(z);
                let node = grid.index(fi.round() as usize, fj.round() as usize);
                if !dgrid.is_interior(node) {
                    break;
                }
                report.steps += 1;
                let gap = (u.values[node] - psi.values[node]).abs();
                report.max_gap = report.max_gap.max(gap);
                if gap > tol {
                    report.violations.push(SegmentViolation { start: x, at: z, gap });
                    break;
                }
            }
        }
    }
    report.pass = report.violations.is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests;
