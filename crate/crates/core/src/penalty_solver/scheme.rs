//! Monotone finite differences for `F(x, u, Du, D²u)` on a set of unknown nodes.
//!
//! Each unknown sees eight stencil neighbors: the two axes and the two
//! diagonals. A neighbor is either another unknown or a known value at some
//! fraction of the full step (Shortley-Weller cut cells at the boundary).

use crate::domain::{BoundaryDatum, Domain2D};
use crate::error::Result;
use crate::grid::{DomainGrid, Grid, GridField, STENCIL};
use crate::operators::{Branch, Combine, EllipticOperator};

/// Cut fractions below this are moved out to it; the boundary value is still
/// taken at the true crossing.
pub const MIN_CUT_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighbor {
    Unknown(usize),
    Known(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct NodeStencil {
    /// Grid index of the node.
    pub node: usize,
    pub point: [f64; 2],
    pub neighbors: [Neighbor; 8],
    /// Distance to each neighbor.
    pub steps: [f64; 8],
}

/// Linearization of one node equation: `center·u + Σ coeffs[d]·u_d − source`.
#[derive(Debug, Clone, Copy)]
pub struct Row {
    pub center: f64,
    pub coeffs: [f64; 8],
    pub source: f64,
}

impl Row {
    pub fn identity() -> Self {
        Row { center: 1.0, coeffs: [0.0; 8], source: 0.0 }
    }

    fn from_branch(branch: &Branch, steps: &[f64; 8]) -> Self {
        let mut row = Row { center: branch.c, coeffs: [0.0; 8], source: branch.f };
        for line in 0..4 {
            let (fwd, bwd) = (2 * line, 2 * line + 1);
            let (hf, hb) = (steps[fwd], steps[bwd]);
            let af = 2.0 / (hf * (hf + hb));
            let ab = 2.0 / (hb * (hf + hb));
            let w = branch.weights[line];
            row.coeffs[fwd] -= w * af;
            row.coeffs[bwd] -= w * ab;
            row.center += w * (af + ab);
        }
        // upwind drift along x (directions 0, 1) and y (directions 2, 3)
        for (component, fwd, bwd) in [(branch.drift.x, 0, 1), (branch.drift.y, 2, 3)] {
            if component > 0.0 {
                row.center += component / steps[bwd];
                row.coeffs[bwd] -= component / steps[bwd];
            } else if component < 0.0 {
                row.center -= component / steps[fwd];
                row.coeffs[fwd] += component / steps[fwd];
            }
        }
        row
    }
}

#[derive(Debug, Clone)]
pub struct Scheme {
    pub grid: Grid,
    op: EllipticOperator,
    stencils: Vec<NodeStencil>,
    position: Vec<Option<usize>>,
    branch_sets: Vec<(Combine, Vec<Branch>)>,
    branch_of: Vec<usize>,
}

impl Scheme {
    fn build(
        op: &EllipticOperator,
        grid: Grid,
        nodes: Vec<usize>,
        known: impl Fn(usize, usize) -> (f64, f64),
    ) -> Result<Self> {
        op.validate()?;
        let mut position = vec![None; grid.len()];
        for (i, &k) in nodes.iter().enumerate() {
            position[k] = Some(i);
        }
        let mut stencils = Vec::with_capacity(nodes.len());
        for &k in &nodes {
            let mut neighbors = [Neighbor::Known(0.0); 8];
            let mut steps = [0.0; 8];
            for (d, off) in STENCIL.iter().enumerate() {
                let full = if d < 4 { grid.h } else { grid.h * std::f64::consts::SQRT_2 };
                match grid.neighbor(k, *off).and_then(|nb| position[nb]) {
                    Some(j) => {
                        neighbors[d] = Neighbor::Unknown(j);
                        steps[d] = full;
                    }
                    None => {
                        let (value, fraction) = known(k, d);
                        neighbors[d] = Neighbor::Known(value);
                        steps[d] = fraction.max(MIN_CUT_FRACTION) * full;
                    }
                }
            }
            stencils.push(NodeStencil { node: k, point: grid.point_of(k), neighbors, steps });
        }
        let (branch_sets, branch_of) = if op.is_x_dependent() {
            let sets = stencils.iter().map(|s| op.branches(s.point)).collect::<Result<Vec<_>>>()?;
            (sets, (0..stencils.len()).collect())
        } else {
            (vec![op.branches([0.0, 0.0])?], vec![0; stencils.len()])
        };
        Ok(Self { grid, op: op.clone(), stencils, position, branch_sets, branch_of })
    }

    /// Unknowns on `region`; other neighbors take `dirichlet` at their node.
    pub fn on_region(op: &EllipticOperator, grid: Grid, region: &[bool], dirichlet: &GridField) -> Result<Self> {
        let nodes: Vec<usize> = (0..grid.len()).filter(|k| region[*k]).collect();
        Self::build(op, grid, nodes, |k, d| {
            let nb = grid.neighbor(k, STENCIL[d]).expect("region keeps off the grid edge");
            (dirichlet.values[nb], 1.0)
        })
    }

    /// Unknowns on all interior nodes; the boundary value is `datum` at the
    /// crossing of `∂U` along each cut stencil arm.
    pub fn cut_cell(op: &EllipticOperator, dgrid: &DomainGrid, datum: &BoundaryDatum) -> Result<Self> {
        let grid = dgrid.grid;
        Self::build(op, grid, dgrid.interior().to_vec(), |k, d| {
            let fraction = dgrid.crossings(k)[d];
            let x = grid.point_of(k);
            let (di, dj) = STENCIL[d];
            let crossing = [x[0] + fraction * di as f64 * grid.h, x[1] + fraction * dj as f64 * grid.h];
            (datum.value(crossing), fraction)
        })
    }

    pub fn operator(&self) -> &EllipticOperator {
        &self.op
    }

    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }

    pub fn stencils(&self) -> &[NodeStencil] {
        &self.stencils
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.stencils.iter().map(|s| s.node)
    }

    /// Unknown index of a grid node.
    pub fn position(&self, node: usize) -> Option<usize> {
        self.position[node]
    }

    pub fn gather(&self, field: &GridField) -> Vec<f64> {
        self.stencils.iter().map(|s| field.values[s.node]).collect()
    }

    /// Writes `u` into a copy of `base` at the unknown nodes.
    pub fn scatter(&self, u: &[f64], base: &GridField) -> GridField {
        let mut out = base.clone();
        for (s, v) in self.stencils.iter().zip(u) {
            out.values[s.node] = *v;
        }
        out
    }

    fn neighbor_value(nb: Neighbor, u: &[f64]) -> f64 {
        match nb {
            Neighbor::Unknown(j) => u[j],
            Neighbor::Known(v) => v,
        }
    }

    /// Active linearization of `F_h` at unknown `i`, and its value.
    pub fn active_row(&self, i: usize, u: &[f64]) -> (f64, Row) {
        let s = &self.stencils[i];
        let (combine, branches) = &self.branch_sets[self.branch_of[i]];
        let mut best: Option<(f64, Row)> = None;
        for b in branches {
            let row = Row::from_branch(b, &s.steps);
            let mut value = row.center * u[i] - row.source;
            for d in 0..8 {
                value += row.coeffs[d] * Self::neighbor_value(s.neighbors[d], u);
            }
            let better = match (&best, combine) {
                (None, _) => true,
                (Some((v, _)), Combine::Max) => value > *v,
                (Some((v, _)), Combine::Min) => value < *v,
            };
            if better {
                best = Some((value, row));
            }
        }
        best.expect("operators have at least one branch")
    }

    /// `F_h[u]` at every unknown.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.active_row(i, u).0).collect()
    }

    /// `F_h` of a grid field, NaN away from the unknowns.
    pub fn apply_field(&self, field: &GridField) -> GridField {
        let u = self.gather(field);
        let values = self.apply(&u);
        self.scatter(&values, &GridField::filled(self.grid, f64::NAN))
    }
}

/// Euclidean distance to `∂U` at interior nodes, NaN elsewhere.
pub fn distance_field(domain: &Domain2D, dgrid: &DomainGrid) -> Result<GridField> {
    let mut field = GridField::filled(dgrid.grid, f64::NAN);
    for &k in dgrid.interior() {
        field.values[k] = domain.euclidean_distance(dgrid.grid.point_of(k))?.distance;
    }
    Ok(field)
}
