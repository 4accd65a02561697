//! Uniform node grids centered at the origin, their classification against
//! the domain, and scalar fields on them.

use crate::domain::Domain2D;
use crate::error::{invalid, Result};

/// Stencil offsets: the two axes and the two diagonals, each as a ± pair.
pub const STENCIL: [(isize, isize); 8] =
    [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)];

/// Unit directions of the four second-difference lines.
pub const LINE_DIRECTIONS: [[f64; 2]; 4] = [
    [1.0, 0.0],
    [0.0, 1.0],
    [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

impl Grid {
    /// Grid with odd node counts so that the origin is a node.
    pub fn new(nx: usize, ny: usize, h: f64) -> Result<Self> {
        if nx < 3 || ny < 3 || nx % 2 == 0 || ny % 2 == 0 {
            return Err(invalid("grid node counts must be odd and at least 3"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid("grid spacing must be positive"));
        }
        Ok(Self { nx, ny, h })
    }

    /// Smallest such grid covering the box `[−a, a] × [−b, b]` plus `margin` cells.
    pub fn covering(half_extents: [f64; 2], h: f64, margin: usize) -> Result<Self> {
        let half = |e: f64| (e / h - 1e-9).ceil() as usize + margin;
        Self::new(2 * half(half_extents[0]) + 1, 2 * half(half_extents[1]) + 1, h)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let cx = (self.nx / 2) as isize;
        let cy = (self.ny / 2) as isize;
        [(i as isize - cx) as f64 * self.h, (j as isize - cy) as f64 * self.h]
    }

    #[inline]
    pub fn point_of(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.coords(idx);
        self.point(i, j)
    }

    #[inline]
    pub fn neighbor(&self, idx: usize, offset: (isize, isize)) -> Option<usize> {
        let (i, j) = self.coords(idx);
        let ni = i as isize + offset.0;
        let nj = j as isize + offset.1;
        if ni < 0 || nj < 0 || ni >= self.nx as isize || nj >= self.ny as isize {
            None
        } else {
            Some(self.index(ni as usize, nj as usize))
        }
    }

    /// Fractional node coordinates of a point.
    pub fn locate(&self, x: [f64; 2]) -> (f64, f64) {
        (x[0] / self.h + (self.nx / 2) as f64, x[1] / self.h + (self.ny / 2) as f64)
    }

    pub fn describe(&self) -> String {
        format!("nx={} ny={} h={}", self.nx, self.ny, self.h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    /// Outside `U` but adjacent (8-neighborhood) to an interior node.
    Band,
    Exterior,
}

/// A grid classified against a domain, with boundary crossings along each
/// stencil direction for interior nodes.
#[derive(Debug, Clone)]
pub struct DomainGrid {
    pub grid: Grid,
    kinds: Vec<NodeKind>,
    /// Fraction of the stencil step at which `∂U` is crossed; 1 for interior neighbors.
    crossings: Vec<[f64; 8]>,
    interior: Vec<usize>,
}

impl DomainGrid {
    pub fn new(domain: &Domain2D, grid: Grid) -> Result<Self> {
        let inside: Vec<bool> = (0..grid.len()).map(|k| domain.contains(grid.point_of(k))).collect();
        let mut kinds = vec![NodeKind::Exterior; grid.len()];
        let mut crossings = vec![[0.0; 8]; grid.len()];
        let mut interior = Vec::new();
        for k in 0..grid.len() {
            if !inside[k] {
                continue;
            }
            kinds[k] = NodeKind::Interior;
            interior.push(k);
            for (d, off) in STENCIL.iter().enumerate() {
                let nb = grid.neighbor(k, *off).ok_or_else(|| {
                    invalid("grid does not cover the domain with a margin")
                })?;
                crossings[k][d] = if inside[nb] {
                    1.0
                } else {
                    domain.crossing_fraction(grid.point_of(k), grid.point_of(nb)).max(1e-12)
                };
            }
        }
        for &k in &interior {
            for off in STENCIL {
                let nb = grid.neighbor(k, off).expect("checked above");
                if kinds[nb] == NodeKind::Exterior {
                    kinds[nb] = NodeKind::Band;
                }
            }
        }
        Ok(Self { grid, kinds, crossings, interior })
    }

    pub fn kind(&self, idx: usize) -> NodeKind {
        self.kinds[idx]
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.kinds[idx] == NodeKind::Interior
    }

    /// Interior node indices in increasing order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn crossings(&self, idx: usize) -> &[f64; 8] {
        &self.crossings[idx]
    }

    /// Whether every stencil neighbor of an interior node is interior.
    pub fn is_deep(&self, idx: usize) -> bool {
        self.is_interior(idx) && self.crossings[idx].iter().all(|c| *c == 1.0)
    }

    /// Number of grid cells across the widest extent of the domain.
    pub fn cells_across(&self) -> usize {
        let (mut imin, mut imax, mut jmin, mut jmax) = (usize::MAX, 0, usize::MAX, 0);
        for &k in &self.interior {
            let (i, j) = self.grid.coords(k);
            imin = imin.min(i);
            imax = imax.max(i);
            jmin = jmin.min(j);
            jmax = jmax.max(j);
        }
        if self.interior.is_empty() {
            0
        } else {
            (imax - imin).max(jmax - jmin) + 2
        }
    }
}

/// A scalar field on all grid nodes; exterior entries may be NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.point_of(k))).collect();
        Self { grid, values }
    }

    pub fn filled(grid: Grid, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Bilinear interpolation; `None` outside the grid or if a corner is NaN.
    pub fn interpolate(&self, x: [f64; 2]) -> Option<f64> {
        let (fx, fy) = self.grid.locate(x);
        if fx < 0.0 || fy < 0.0 || fx > (self.grid.nx - 1) as f64 || fy > (self.grid.ny - 1) as f64 {
            return None;
        }
        let i = (fx.floor() as usize).min(self.grid.nx - 2);
        let j = (fy.floor() as usize).min(self.grid.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v = (1.0 - tx) * (1.0 - ty) * self.at(i, j)
            + tx * (1.0 - ty) * self.at(i + 1, j)
            + (1.0 - tx) * ty * self.at(i, j + 1)
            + tx * ty * self.at(i + 1, j + 1);
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    /// Largest `|a − b|` over the listed nodes.
    pub fn max_difference(&self, other: &GridField, nodes: &[usize]) -> f64 {
        nodes.iter().map(|&k| (self.values[k] - other.values[k]).abs()).fold(0.0, f64::max)
    }

    pub fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid(format!(
                "grid mismatch: {} vs {}",
                self.grid.describe(),
                other.grid.describe()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainKind;

    #[test]
    fn origin_is_a_node() {
        let g = Grid::covering([1.0, 0.5], 0.1, 3).unwrap();
        let (i, j) = (g.nx / 2, g.ny / 2);
        assert_eq!(g.point(i, j), [0.0, 0.0]);
        assert_eq!(g.nx, 2 * 13 + 1);
        assert_eq!(g.ny, 2 * 8 + 1);
    }

    #[test]
    fn disc_classification() {
        let d = Domain2D::with_samples(DomainKind::Disc { radius: 1.0 }, 512).unwrap();
        let g = Grid::covering([1.0, 1.0], 0.125, 2).unwrap();
        let dg = DomainGrid::new(&d, g).unwrap();
        for &k in dg.interior() {
            let p = g.point_of(k);
            assert!(p[0].hypot(p[1]) < 1.0);
            for (dir, off) in STENCIL.iter().enumerate() {
                let nb = g.neighbor(k, *off).unwrap();
                assert_ne!(dg.kind(nb), NodeKind::Exterior);
                let theta = dg.crossings(k)[dir];
                if theta < 1.0 {
                    let q = g.point_of(nb);
                    let c = [p[0] + theta * (q[0] - p[0]), p[1] + theta * (q[1] - p[1])];
                    assert!((c[0].hypot(c[1]) - 1.0).abs() < 1e-12);
                }
            }
        }
        assert_eq!(dg.cells_across(), 16);
    }

    #[test]
    fn bilinear_interpolation_is_exact_for_affine() {
        let g = Grid::new(11, 11, 0.2).unwrap();
        let f = GridField::from_fn(g, |x| 2.0 * x[0] - x[1] + 0.5);
        let v = f.interpolate([0.33, -0.41]).unwrap();
        assert!((v - (0.66 + 0.41 + 0.5)).abs() < 1e-12);
        assert!(f.interpolate([5.0, 0.0]).is_none());
    }
}
