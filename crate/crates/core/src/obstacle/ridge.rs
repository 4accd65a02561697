//! Ridge detection: first caustics along characteristics (`det Q = 0`) and
//! nodes or cells whose closest points fall in different basins.

use crate::grid::{DomainGrid, NodeKind};

use super::ObstacleField;

#[derive(Debug, Clone)]
pub struct RidgeMask {
    /// Nodes nearest to a caustic point `y + Dγ°(μ)/tr W` that the characteristic reaches.
    pub caustic: Vec<bool>,
    /// Nodes with several tied closest points.
    pub multiple: Vec<bool>,
    /// Endpoints of grid edges whose closest points are separated by a barrier.
    pub basin: Vec<bool>,
    /// Smallest Euclidean distance from a marked node to the boundary.
    pub min_boundary_distance: f64,
}

impl RidgeMask {
    pub(super) fn empty(len: usize) -> Self {
        Self {
            caustic: vec![false; len],
            multiple: vec![false; len],
            basin: vec![false; len],
            min_boundary_distance: f64::INFINITY,
        }
    }

    pub fn contains(&self, k: usize) -> bool {
        self.caustic[k] || self.multiple[k] || self.basin[k]
    }

    pub fn mask(&self) -> Vec<bool> {
        (0..self.caustic.len()).map(|k| self.contains(k)).collect()
    }

    pub fn nodes(&self) -> Vec<usize> {
        (0..self.caustic.len()).filter(|k| self.contains(*k)).collect()
    }

    /// Nodes marked by the tie or barrier criterion.
    pub fn multiplicity_nodes(&self) -> Vec<usize> {
        (0..self.caustic.len()).filter(|k| self.multiple[*k] || self.basin[*k]).collect()
    }

    pub fn caustic_nodes(&self) -> Vec<usize> {
        (0..self.caustic.len()).filter(|k| self.caustic[*k]).collect()
    }

    /// Whether the ridge keeps the expected positive distance from `∂U`.
    pub fn clear_of_boundary(&self, h: f64) -> bool {
        self.min_boundary_distance >= 2.0 * h
    }
}

pub(super) fn detect(field: &ObstacleField, dgrid: &DomainGrid) -> RidgeMask {
    let grid = field.grid;
    let env = &field.envelope;
    let domain = env.domain();
    let n = domain.samples().len();
    let mut mask = RidgeMask::empty(grid.len());

    for &k in dgrid.interior() {
        if let Some(c) = field.closest[k] {
            mask.multiple[k] = c.is_multiple;
        }
    }

    for a in field.analytics.iter().flatten() {
        let trace = a.w.trace();
        if trace <= 1e-12 {
            continue;
        }
        let depth = 1.0 / trace;
        let c = a.geometry.point + depth * a.characteristic;
        let cp = [c.x, c.y];
        if !domain.contains(cp) {
            continue;
        }
        let (fi, fj) = grid.locate(cp);
        let (i, j) = (fi.round(), fj.round());
        if i < 0.0 || j < 0.0 || (i as usize) >= grid.nx || (j as usize) >= grid.ny {
            continue;
        }
        let k = grid.index(i as usize, j as usize);
        // many characteristics can focus on one node (the center of a disc)
        if dgrid.kind(k) != NodeKind::Interior || mask.caustic[k] {
            continue;
        }
        let y = a.geometry.point;
        let start = env.datum().value([y.x, y.y]);
        if env.value(cp) >= start + depth - env.tie_tolerance() {
            mask.caustic[k] = true;
        }
    }

    for &k in dgrid.interior() {
        for off in [(1isize, 0isize), (0, 1)] {
            let Some(nb) = grid.neighbor(k, off) else { continue };
            if !dgrid.is_interior(nb) {
                continue;
            }
            let (Some(ca), Some(cb)) = (field.closest[k], field.closest[nb]) else { continue };
            if separated(field, grid.point_of(k), ca.sample, grid.point_of(nb), cb.sample, n) {
                mask.basin[k] = true;
                mask.basin[nb] = true;
            }
        }
    }

    mask.min_boundary_distance = mask
        .nodes()
        .iter()
        .filter_map(|k| domain.euclidean_distance(grid.point_of(*k)).ok())
        .map(|d| d.distance)
        .fold(f64::INFINITY, f64::min);
    mask
}

/// Whether the objectives of `xa` and `xb` rise above both endpoint values on
/// the shorter boundary arc between the two closest samples.
fn separated(field: &ObstacleField, xa: [f64; 2], sa: usize, xb: [f64; 2], sb: usize, n: usize) -> bool {
    let forward = (sb + n - sa) % n;
    if forward.min(n - forward) < 3 {
        return false;
    }
    let (from, len) = if forward <= n - forward { (sa, forward) } else { (sb, n - forward) };
    let env = &field.envelope;
    let tol = env.tie_tolerance();
    for x in [xa, xb] {
        let ends = env.sample_objective(x, sa).max(env.sample_objective(x, sb));
        let peak = (1..len)
            .map(|step| env.sample_objective(x, (from + step) % n))
            .fold(f64::NEG_INFINITY, f64::max);
        if peak > ends + tol {
            return true;
        }
    }
    false
}
