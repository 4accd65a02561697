//! Mollified obstacles `ψ_ε⁺ = η_ε ∗ ψ⁺`, `ψ_ε⁻ = η_ε ∗ ψ⁻ + δ_ε` and the
//! region `U_ε = {ψ_ε⁻ < ψ_ε⁺}` on which the penalized problem is posed.

use crate::error::{invalid, Error, Result};
use crate::grid::{DomainGrid, GridField, STENCIL};

/// `δ_ε = SHIFT_FACTOR · C₁ · ε`.
pub const SHIFT_FACTOR: f64 = 3.5;
/// Lattice kernels must keep their mean radius below this fraction of `ε`.
pub const MAX_MEAN_RADIUS: f64 = 0.75;

const CHECK_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct Kernel {
    /// Grid offsets and normalized weights.
    pub taps: Vec<((isize, isize), f64)>,
    /// `Σ w |z|`, the Lipschitz error factor of the convolution.
    pub mean_radius: f64,
    /// Largest offset in cells.
    pub reach: usize,
}

/// Normalized samples of `exp(−1/(1 − |z/ε|²))` on lattice offsets with `|z| < ε`.
pub fn bump_kernel(epsilon: f64, h: f64) -> Kernel {
    let reach = (epsilon / h).ceil() as isize;
    let mut taps = Vec::new();
    for j in -reach..=reach {
        for i in -reach..=reach {
            let r = h * ((i * i + j * j) as f64).sqrt() / epsilon;
            if r < 1.0 {
                taps.push(((i, j), (-1.0 / (1.0 - r * r)).exp()));
            }
        }
    }
    let total: f64 = taps.iter().map(|t| t.1).sum();
    let mut mean_radius = 0.0;
    for ((i, j), w) in taps.iter_mut() {
        *w /= total;
        mean_radius += *w * h * ((*i * *i + *j * *j) as f64).sqrt();
    }
    Kernel { taps, mean_radius, reach: reach.max(0) as usize }
}

fn convolve(field: &GridField, kernel: &Kernel) -> GridField {
    let grid = field.grid;
    let mut out = GridField::filled(grid, f64::NAN);
    let reach = kernel.reach;
    for j in reach..grid.ny.saturating_sub(reach) {
        for i in reach..grid.nx.saturating_sub(reach) {
            let mut acc = 0.0;
            for ((di, dj), w) in &kernel.taps {
                let k = grid.index((i as isize + di) as usize, (j as isize + dj) as usize);
                acc += w * field.values[k];
            }
            out.values[grid.index(i, j)] = acc;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct MollifiedObstacles {
    pub epsilon: f64,
    pub delta_eps: f64,
    /// Lipschitz constant `C₁` of the obstacles.
    pub lipschitz: f64,
    pub psi_plus: GridField,
    pub psi_minus: GridField,
    /// `U_ε` as a node mask.
    pub region: Vec<bool>,
    /// Interior nodes of `U`.
    pub interior: Vec<bool>,
    pub kernel_mean_radius: f64,
    /// `sup |ψ_ε⁺ − ψ⁺|` on `U_ε`.
    pub max_plus_deviation: f64,
    /// Range of `ψ_ε⁻ − ψ⁻` on `U_ε`.
    pub minus_shift_range: (f64, f64),
    /// Measured `sup (d − ε) · max(D²_ξξ ψ_ε⁺, −D²_ξξ ψ_ε⁻)` over `U_ε` and the four lines.
    pub second_difference_constant: f64,
}

impl MollifiedObstacles {
    pub fn region_size(&self) -> usize {
        self.region.iter().filter(|b| **b).count()
    }
}

/// Checks the obstacle hypotheses on interior nodes: ordering, the gap bound
/// `ψ⁺ − ψ⁻ ≤ 2C₁d`, and the Lipschitz bound along grid edges.
pub fn check_obstacle_hypotheses(
    dgrid: &DomainGrid,
    distance: &GridField,
    psi_plus: &GridField,
    psi_minus: &GridField,
    lipschitz: f64,
) -> Result<()> {
    let grid = dgrid.grid;
    for &k in dgrid.interior() {
        let gap = psi_plus.values[k] - psi_minus.values[k];
        let x = grid.point_of(k);
        if !gap.is_finite() {
            return Err(Error::InvalidObstacles(format!("obstacles undefined at {x:?}")));
        }
        if gap < -CHECK_TOL {
            return Err(Error::InvalidObstacles(format!("lower obstacle above upper at {x:?} (gap {gap:.3e})")));
        }
        let bound = 2.0 * lipschitz * distance.values[k];
        if gap > bound * (1.0 + 1e-6) + CHECK_TOL {
            return Err(Error::InvalidObstacles(format!(
                "gap {gap:.6} exceeds 2*C1*d = {bound:.6} at {x:?}"
            )));
        }
        for off in [STENCIL[0], STENCIL[2]] {
            let nb = grid.neighbor(k, off).expect("interior nodes have neighbors");
            if !dgrid.is_interior(nb) {
                continue;
            }
            for field in [psi_plus, psi_minus] {
                let jump = (field.values[nb] - field.values[k]).abs();
                if jump > lipschitz * grid.h * (1.0 + 1e-6) + CHECK_TOL {
                    return Err(Error::InvalidObstacles(format!(
                        "obstacle slope {:.6} exceeds C1 = {lipschitz} at {x:?}",
                        jump / grid.h
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Mollifies both obstacles with a bump of radius `epsilon`, shifts the lower
/// one by `δ_ε = 3.5 C₁ ε` and asserts the resulting invariants. With `c2`
/// the measured second-difference constant must not exceed it.
pub fn mollify_obstacles(
    dgrid: &DomainGrid,
    distance: &GridField,
    psi_plus: &GridField,
    psi_minus: &GridField,
    epsilon: f64,
    lipschitz: f64,
    c2: Option<f64>,
) -> Result<MollifiedObstacles> {
    if !(epsilon > 0.0 && lipschitz > 0.0) {
        return Err(invalid("mollification needs epsilon > 0 and C1 > 0"));
    }
    psi_plus.check_same_grid(psi_minus)?;
    psi_plus.check_same_grid(distance)?;
    check_obstacle_hypotheses(dgrid, distance, psi_plus, psi_minus, lipschitz)?;
    let grid = dgrid.grid;
    let kernel = bump_kernel(epsilon, grid.h);
    if kernel.mean_radius >= MAX_MEAN_RADIUS * epsilon {
        return Err(Error::InvalidState(format!(
            "kernel mean radius {:.4} is not below {MAX_MEAN_RADIUS} epsilon",
            kernel.mean_radius
        )));
    }
    let delta_eps = SHIFT_FACTOR * lipschitz * epsilon;
    let plus = convolve(psi_plus, &kernel);
    let mut minus = convolve(psi_minus, &kernel);
    for v in minus.values.iter_mut() {
        *v += delta_eps;
    }
    let mut region = vec![false; grid.len()];
    for &k in dgrid.interior() {
        if !(plus.values[k].is_finite() && minus.values[k].is_finite()) {
            return Err(invalid("grid margin too small for the mollifier"));
        }
        region[k] = minus.values[k] < plus.values[k];
    }

    let c1e = lipschitz * epsilon;
    let mut max_plus_deviation: f64 = 0.0;
    let mut shift = (f64::INFINITY, f64::NEG_INFINITY);
    let mut c2_measured: f64 = 0.0;
    for &k in dgrid.interior() {
        let x = grid.point_of(k);
        let d = distance.values[k];
        let gap = psi_plus.values[k] - psi_minus.values[k];
        if gap > 5.0 * c1e && !region[k] {
            return Err(Error::InvalidState(format!("node {x:?} with gap {gap:.4} > 5 C1 eps lies outside U_eps")));
        }
        if !region[k] {
            continue;
        }
        if d <= epsilon {
            return Err(Error::InvalidState(format!("U_eps reaches {x:?} at distance {d:.4} <= eps")));
        }
        let dev = (plus.values[k] - psi_plus.values[k]).abs();
        max_plus_deviation = max_plus_deviation.max(dev);
        let s = minus.values[k] - psi_minus.values[k];
        shift = (shift.0.min(s), shift.1.max(s));
        for line in 0..4 {
            let (Some(f), Some(b)) = (grid.neighbor(k, STENCIL[2 * line]), grid.neighbor(k, STENCIL[2 * line + 1]))
            else {
                continue;
            };
            let len2 = if line < 2 { grid.h * grid.h } else { 2.0 * grid.h * grid.h };
            let second = |field: &GridField| (field.values[f] + field.values[b] - 2.0 * field.values[k]) / len2;
            let worst = second(&plus).max(-second(&minus));
            if worst.is_finite() {
                c2_measured = c2_measured.max((d - epsilon) * worst);
            }
        }
    }
    if max_plus_deviation > c1e + CHECK_TOL {
        return Err(Error::InvalidState(format!(
            "|psi_eps+ - psi+| = {max_plus_deviation:.3e} exceeds C1 eps"
        )));
    }
    if shift.0.is_finite() && (shift.0 <= 2.0 * c1e || shift.1 >= 5.0 * c1e) {
        return Err(Error::InvalidState(format!(
            "psi_eps- - psi- ranges over [{:.4}, {:.4}], outside (2 C1 eps, 5 C1 eps)",
            shift.0, shift.1
        )));
    }
    if let Some(c2) = c2 {
        if c2_measured > c2 * (1.0 + 1e-6) {
            return Err(Error::InvalidState(format!(
                "second differences need C2 = {c2_measured:.4}, above the supplied {c2}"
            )));
        }
    }
    Ok(MollifiedObstacles {
        epsilon,
        delta_eps,
        lipschitz,
        psi_plus: plus,
        psi_minus: minus,
        region,
        interior: (0..grid.len()).map(|k| dgrid.is_interior(k)).collect(),
        kernel_mean_radius: kernel.mean_radius,
        max_plus_deviation,
        minus_shift_range: shift,
        second_difference_constant: c2_measured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Domain2D, DomainKind};
    use crate::grid::Grid;
    use crate::penalty_solver::scheme::distance_field;

    fn disc_obstacles(h: f64, margin: usize) -> (DomainGrid, GridField, GridField, GridField) {
        let domain = Domain2D::new(DomainKind::Disc { radius: 1.0 }, h).unwrap();
        let grid = Grid::covering(domain.half_extents(), h, margin).unwrap();
        let dgrid = DomainGrid::new(&domain, grid).unwrap();
        let dist = distance_field(&domain, &dgrid).unwrap();
        let plus = GridField::from_fn(grid, |x| 1.0 - (x[0] * x[0] + x[1] * x[1]).sqrt());
        let minus = GridField::from_fn(grid, |x| (x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0);
        (dgrid, dist, plus, minus)
    }

    #[test]
    fn kernel_is_normalized_and_compact() {
        for ratio in [1.5, 2.0, 4.0, 8.0] {
            let k = bump_kernel(ratio * 0.1, 0.1);
            let total: f64 = k.taps.iter().map(|t| t.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(k.mean_radius < MAX_MEAN_RADIUS * ratio * 0.1);
        }
    }

    #[test]
    fn disc_inclusion_chain() {
        let h = 0.0125;
        let eps = 0.05;
        let (dgrid, dist, plus, minus) = disc_obstacles(h, 6);
        let m = mollify_obstacles(&dgrid, &dist, &plus, &minus, eps, 1.0, None).unwrap();
        for &k in dgrid.interior() {
            let d = dist.values[k];
            if 2.0 * d > 5.0 * eps {
                assert!(m.region[k]);
            }
            if m.region[k] {
                assert!(d > eps);
            }
        }
        assert!(m.max_plus_deviation <= eps);
        assert!(m.minus_shift_range.0 > 2.0 * eps && m.minus_shift_range.1 < 5.0 * eps);
    }

    #[test]
    fn deviation_shrinks_linearly() {
        let h = 0.01;
        let (dgrid, dist, plus, minus) = disc_obstacles(h, 10);
        let devs: Vec<f64> = [0.08, 0.04]
            .iter()
            .map(|e| mollify_obstacles(&dgrid, &dist, &plus, &minus, *e, 1.0, None).unwrap().max_plus_deviation)
            .collect();
        let ratio = devs[0] / devs[1];
        assert!(ratio > 1.6 && ratio < 2.5, "{devs:?}");
    }

    #[test]
    fn violated_gap_is_rejected() {
        let (dgrid, dist, plus, minus) = disc_obstacles(0.05, 4);
        let steep = GridField { grid: plus.grid, values: plus.values.iter().map(|v| 3.0 * v).collect() };
        let err = mollify_obstacles(&dgrid, &dist, &steep, &minus, 0.1, 1.0, None).unwrap_err();
        assert!(matches!(err, Error::InvalidObstacles(_)));
    }
}
