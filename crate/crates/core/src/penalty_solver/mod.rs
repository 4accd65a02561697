//! Penalized solver for the double obstacle problem
//! `max{min{F[u], u − ψ⁻}, u − ψ⁺} = 0` in `U`, `u = φ` on `∂U`.
//!
//! Continuation runs through stages `(ε, δ)`. Stages with `ε > 0` solve
//! `F[u] − β_δ(ψ_ε⁻ − u) + β_δ(u − ψ_ε⁺) = 0` on `U_ε` with `u = ψ_ε⁺`
//! outside. Stages with `ε = 0` solve the same equation with the raw
//! obstacles on all of `U` with cut-cell boundary data. A final semismooth
//! Newton pass solves the discrete complementarity system exactly.

pub mod mollify;
pub mod newton;
pub mod scheme;

use std::sync::Arc;

pub use mollify::{bump_kernel, check_obstacle_hypotheses, mollify_obstacles, MollifiedObstacles};
pub use newton::NewtonOptions;
pub use scheme::{distance_field, Neighbor, Row, Scheme};

use crate::domain::{BoundaryDatum, Domain2D};
use crate::error::{invalid, Error, Result};
use crate::grid::{DomainGrid, GridField};
use crate::obstacle::ObstacleField;
use crate::operators::EllipticOperator;

use newton::{newton, Jacobian};

/// `β_δ(t)` and its derivative: zero for `t ≤ 0`, `t/δ` for `t ≥ δ`, and
/// `2s² − s³` with `s = t/δ` in between.
pub fn beta(delta: f64, t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= delta {
        (t / delta, 1.0 / delta)
    } else {
        let s = t / delta;
        (s * s * (2.0 - s), s * (4.0 - 3.0 * s) / delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub epsilon: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyConfig {
    pub schedule: Vec<Stage>,
    pub newton: NewtonOptions,
    /// Finish with an exact solve of the discrete complementarity system.
    pub polish: bool,
    /// Newton residual tolerance of the continuation stages when polishing;
    /// without polish every stage uses `newton.residual_tol`.
    pub stage_tol: f64,
    /// Multiplies the certification tolerance.
    pub tol_scale: f64,
}

impl PenaltyConfig {
    /// `δ = 1, ½, …, 2⁻¹⁰` with `ε = 8h, 4h, 2h, h` on the first four stages
    /// and `ε = 0` afterwards.
    pub fn standard(h: f64) -> Self {
        let schedule = (0..=10)
            .map(|k| Stage {
                epsilon: if k < 4 { h * f64::from(8 >> k) } else { 0.0 },
                delta: (0.5f64).powi(k),
            })
            .collect();
        Self { schedule, newton: NewtonOptions::default(), polish: true, stage_tol: 1e-6, tol_scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(invalid("empty continuation schedule"));
        }
        for (i, s) in self.schedule.iter().enumerate() {
            if !(s.delta > 0.0 && s.delta.is_finite() && s.epsilon >= 0.0 && s.epsilon.is_finite()) {
                return Err(invalid(format!("stage {i}: need delta > 0 and epsilon >= 0")));
            }
            if i > 0 {
                let p = self.schedule[i - 1];
                if s.delta >= p.delta || s.epsilon > p.epsilon {
                    return Err(invalid(format!(
                        "stage {i}: delta must decrease strictly and epsilon must not increase"
                    )));
                }
            }
        }
        if !(self.stage_tol > 0.0) {
            return Err(invalid("stage_tol must be positive"));
        }
        if !(self.tol_scale > 0.0) {
            return Err(invalid("tol_scale must be positive"));
        }
        Ok(())
    }

    pub fn max_epsilon(&self) -> f64 {
        self.schedule.iter().map(|s| s.epsilon).fold(0.0, f64::max)
    }
}

/// Grid margin (in cells) needed by a schedule.
pub fn required_margin(config: &PenaltyConfig, h: f64) -> usize {
    (config.max_epsilon() / h).ceil() as usize + 2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub stage: usize,
    pub iteration: usize,
    pub residual: f64,
    pub violation_plus: f64,
    pub violation_minus: f64,
}

fn violations(u: &[f64], upper: &[f64], lower: &[f64]) -> (f64, f64) {
    let mut out = (0.0f64, 0.0f64);
    for i in 0..u.len() {
        out.0 = out.0.max(u[i] - upper[i]);
        out.1 = out.1.max(lower[i] - u[i]);
    }
    out
}

struct PenalizedRun {
    u: Vec<f64>,
    iterations: usize,
    residual: f64,
}

#[allow(clippy::too_many_arguments)]
fn penalized_core(
    scheme: &Scheme,
    upper: &[f64],
    lower: &[f64],
    delta: f64,
    u0: Vec<f64>,
    options: &NewtonOptions,
    stage: usize,
    log: &mut Vec<LogRow>,
) -> Result<PenalizedRun> {
    let mut jacobian = Jacobian::new(scheme)?;
    let system = |u: &[f64]| {
        let mut res = Vec::with_capacity(u.len());
        let mut rows = Vec::with_capacity(u.len());
        for i in 0..u.len() {
            let (f, mut row) = scheme.active_row(i, u);
            let (bu, dbu) = beta(delta, u[i] - upper[i]);
            let (bl, dbl) = beta(delta, lower[i] - u[i]);
            row.center += dbu + dbl;
            res.push(f - bl + bu);
            rows.push(row);
        }
        (res, rows)
    };
    let outcome = newton(scheme, &mut jacobian, u0, system, options, true, |iteration, u, residual| {
        let (vp, vm) = violations(u, upper, lower);
        log.push(LogRow { stage, iteration, residual, violation_plus: vp, violation_minus: vm });
    })?;
    Ok(PenalizedRun { u: outcome.u, iterations: outcome.iterations, residual: outcome.residual })
}

fn penalty_sup(u: &[f64], upper: &[f64], lower: &[f64], delta: f64) -> f64 {
    (0..u.len()).map(|i| beta(delta, u[i] - upper[i]).0.max(beta(delta, lower[i] - u[i]).0)).fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct PenalizedSolution {
    /// Solution on `U_ε`; other interior nodes hold `(ψ_ε⁺ + ψ_ε⁻)/2`, exterior nodes NaN.
    pub u: GridField,
    pub unknowns: usize,
    pub iterations: usize,
    pub residual: f64,
    /// Measured `C = sup β_δ(±(u − ψ_ε^±))`.
    pub penalty_sup: f64,
    pub violation_plus: f64,
    pub violation_minus: f64,
    /// Whether `u − ψ_ε⁺ ≤ δ(C+1)` and `ψ_ε⁻ − u ≤ δ(C+1)` hold.
    pub sandwich: bool,
    /// Fitted `C` in `|F_h[u]| ≤ C + C/(d − ε)`.
    pub operator_bound: f64,
    pub log: Vec<LogRow>,
}

/// Solves the penalized equation on `U_ε` with `u = ψ_ε⁺` outside.
pub fn solve_penalized(
    op: &EllipticOperator,
    obstacles: &MollifiedObstacles,
    distance: &GridField,
    delta: f64,
    options: &NewtonOptions,
    initial: Option<&GridField>,
) -> Result<PenalizedSolution> {
    penalized_stage(op, obstacles, distance, delta, options, initial, 0)
}

fn penalized_stage(
    op: &EllipticOperator,
    obstacles: &MollifiedObstacles,
    distance: &GridField,
    delta: f64,
    options: &NewtonOptions,
    initial: Option<&GridField>,
    stage: usize,
) -> Result<PenalizedSolution> {
    if !(delta > 0.0) {
        return Err(invalid("penalty scale delta must be positive"));
    }
    let grid = obstacles.psi_plus.grid;
    let scheme = Scheme::on_region(op, grid, &obstacles.region, &obstacles.psi_plus)?;
    let upper = scheme.gather(&obstacles.psi_plus);
    let lower = scheme.gather(&obstacles.psi_minus);
    let u0: Vec<f64> = scheme
        .nodes()
        .enumerate()
        .map(|(i, k)| {
            initial.map(|f| f.values[k]).filter(|v| v.is_finite()).unwrap_or(0.5 * (upper[i] + lower[i]))
        })
        .collect();
    let mut log = Vec::new();
    let run = penalized_core(&scheme, &upper, &lower, delta, u0, options, stage, &mut log)?;
    let (vp, vm) = violations(&run.u, &upper, &lower);
    let c = penalty_sup(&run.u, &upper, &lower, delta);
    let sandwich = vp <= delta * (c + 1.0) + 1e-12 && vm <= delta * (c + 1.0) + 1e-12;
    let f = scheme.apply(&run.u);
    let operator_bound = scheme
        .nodes()
        .enumerate()
        .map(|(i, k)| f[i].abs() / (1.0 + 1.0 / (distance.values[k] - obstacles.epsilon)))
        .fold(0.0, f64::max);
    let mut base = GridField::filled(grid, f64::NAN);
    for k in 0..grid.len() {
        if obstacles.interior[k] {
            base.values[k] = 0.5 * (obstacles.psi_plus.values[k] + obstacles.psi_minus.values[k]);
        }
    }
    Ok(PenalizedSolution {
        u: scheme.scatter(&run.u, &base),
        unknowns: scheme.len(),
        iterations: run.iterations,
        residual: run.residual,
        penalty_sup: c,
        violation_plus: vp,
        violation_minus: vm,
        sandwich,
        operator_bound,
        log,
    })
}

/// Data of a double obstacle problem on a classified grid.
#[derive(Debug, Clone)]
pub struct DoubleObstacleProblem {
    pub domain: Arc<Domain2D>,
    pub dgrid: DomainGrid,
    pub op: EllipticOperator,
    /// Defined on every grid node so that mollification can reach past `∂U`.
    pub psi_plus: GridField,
    pub psi_minus: GridField,
    /// Boundary values, equal to both obstacles on `∂U`.
    pub boundary: BoundaryDatum,
    /// Lipschitz constant `C₁` of both obstacles.
    pub lipschitz: f64,
    distance: GridField,
}

impl DoubleObstacleProblem {
    pub fn new(
        domain: Arc<Domain2D>,
        dgrid: DomainGrid,
        op: EllipticOperator,
        psi_plus: GridField,
        psi_minus: GridField,
        boundary: BoundaryDatum,
        lipschitz: f64,
    ) -> Result<Self> {
        op.validate()?;
        if psi_plus.grid != dgrid.grid || psi_minus.grid != dgrid.grid {
            return Err(invalid("obstacles and domain grid differ"));
        }
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(invalid("obstacle Lipschitz constant must be positive"));
        }
        for &k in dgrid.interior() {
            let (up, lo) = (psi_plus.values[k], psi_minus.values[k]);
            if !(up.is_finite() && lo.is_finite()) {
                return Err(invalid(format!("obstacles undefined at {:?}", dgrid.grid.point_of(k))));
            }
            if lo > up + 1e-12 {
                return Err(invalid(format!(
                    "infeasible obstacles: lower above upper at {:?}",
                    dgrid.grid.point_of(k)
                )));
            }
        }
        let distance = distance_field(&domain, &dgrid)?;
        Ok(Self { domain, dgrid, op, psi_plus, psi_minus, boundary, lipschitz, distance })
    }

    /// Problem with `ψ⁺ = ρ`, `ψ⁻ = −ρ̄` from built obstacle fields.
    pub fn from_obstacles(
        op: EllipticOperator,
        upper: &ObstacleField,
        lower: &ObstacleField,
        dgrid: &DomainGrid,
    ) -> Result<Self> {
        let env = upper.envelope();
        let (inradius, _) = env.body().radial_bounds();
        Self::new(
            env.domain().clone(),
            dgrid.clone(),
            op,
            upper.values(),
            lower.values(),
            env.datum().clone(),
            1.0 / inradius,
        )
    }

    pub fn distance(&self) -> &GridField {
        &self.distance
    }

    pub fn h(&self) -> f64 {
        self.dgrid.grid.h
    }

    /// The cut-cell discretization of `F` on all interior nodes.
    pub fn scheme(&self) -> Result<Scheme> {
        Scheme::cut_cell(&self.op, &self.dgrid, &self.boundary)
    }

    pub fn mollify(&self, epsilon: f64) -> Result<MollifiedObstacles> {
        mollify_obstacles(&self.dgrid, &self.distance, &self.psi_plus, &self.psi_minus, epsilon, self.lipschitz, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Elastic,
    Upper,
    Lower,
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub epsilon: f64,
    pub delta: f64,
    pub unknowns: usize,
    pub iterations: usize,
    pub residual: f64,
    pub violation_plus: f64,
    pub violation_minus: f64,
    pub penalty_sup: f64,
    pub sandwich: bool,
    pub operator_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub stages: Vec<StageReport>,
    pub log: Vec<LogRow>,
    pub polish_iterations: usize,
    /// `sup |max{min{F_h[u], u − ψ⁻}, u − ψ⁺}|` over interior nodes.
    pub complementarity_residual: f64,
    pub sup_operator: f64,
    pub tol_c: f64,
    /// Largest of `u − ψ⁺` and `ψ⁻ − u`.
    pub obstacle_violation: f64,
    /// Active branch of the complementarity system per grid node.
    pub phases: Vec<Option<Phase>>,
    pub certified: bool,
}

impl SolveReport {
    pub fn count(&self, phase: Phase) -> usize {
        self.phases.iter().filter(|p| **p == Some(phase)).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.stages.iter().enumerate() {
            out.push_str(&format!(
                "stage {i}: epsilon={} delta={} unknowns={} iterations={} residual={:.3e} violation_plus={:.3e} violation_minus={:.3e} penalty_sup={:.4} sandwich={}\n",
                s.epsilon, s.delta, s.unknowns, s.iterations, s.residual, s.violation_plus, s.violation_minus, s.penalty_sup, s.sandwich
            ));
        }
        out.push_str(&format!("polish_iterations: {}\n", self.polish_iterations));
        out.push_str(&format!("complementarity_residual: {:.3e}\n", self.complementarity_residual));
        out.push_str(&format!("sup_operator: {:.6}\n", self.sup_operator));
        out.push_str(&format!("tol_c: {:.6}\n", self.tol_c));
        out.push_str(&format!("obstacle_violation: {:.3e}\n", self.obstacle_violation));
        out.push_str(&format!(
            "nodes: elastic={} upper={} lower={}\n",
            self.count(Phase::Elastic),
            self.count(Phase::Upper),
            self.count(Phase::Lower)
        ));
        out.push_str(&format!("certified: {}\n", if self.certified { "PASS" } else { "FAIL" }));
        out
    }
}

#[derive(Debug, Clone)]
pub struct DoubleObstacleSolution {
    pub u: GridField,
    pub report: SolveReport,
}

fn phase_of(scaled_f: f64, above: f64, below: f64) -> Phase {
    // max{min{s F, u − ψ⁻}, u − ψ⁺}
    let inner = scaled_f.min(below);
    if above >= inner {
        Phase::Upper
    } else if below <= scaled_f {
        Phase::Lower
    } else {
        Phase::Elastic
    }
}

fn polish(
    scheme: &Scheme,
    upper: &[f64],
    lower: &[f64],
    u0: Vec<f64>,
    options: &NewtonOptions,
) -> Result<(Vec<f64>, usize)> {
    let h = scheme.grid.h;
    let scale = h * h;
    let system = |u: &[f64]| {
        let mut res = Vec::with_capacity(u.len());
        let mut rows = Vec::with_capacity(u.len());
        for i in 0..u.len() {
            let (f, row) = scheme.active_row(i, u);
            let (above, below) = (u[i] - upper[i], u[i] - lower[i]);
            match phase_of(scale * f, above, below) {
                Phase::Upper => {
                    res.push(above);
                    rows.push(Row::identity());
                }
                Phase::Lower => {
                    res.push(below);
                    rows.push(Row::identity());
                }
                Phase::Elastic => {
                    res.push(scale * f);
                    let mut r = row;
                    r.center *= scale;
                    r.coeffs.iter_mut().for_each(|c| *c *= scale);
                    rows.push(r);
                }
            }
        }
        (res, rows)
    };
    let opts = NewtonOptions { residual_tol: 1e-12 * (1.0 + sup(upper).max(sup(lower))), max_iterations: 200, ..*options };
    let mut jacobian = Jacobian::new(scheme)?;
    match newton(scheme, &mut jacobian, u0.clone(), system, &opts, false, |_, _, _| {}) {
        Ok(o) => Ok((o.u, o.iterations)),
        Err(Error::NonConvergence { .. }) => {
            let o = newton(scheme, &mut jacobian, u0, system, &opts, true, |_, _, _| {})?;
            Ok((o.u, o.iterations))
        }
        Err(e) => Err(e),
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

/// Runs the continuation schedule, polishes and certifies.
pub fn solve_double_obstacle(problem: &DoubleObstacleProblem, config: &PenaltyConfig) -> Result<DoubleObstacleSolution> {
    config.validate()?;
    let grid = problem.dgrid.grid;
    let margin_needed = required_margin(config, grid.h);
    if problem.dgrid.interior().iter().any(|&k| {
        let (i, j) = grid.coords(k);
        i < margin_needed || j < margin_needed || i + margin_needed >= grid.nx || j + margin_needed >= grid.ny
    }) {
        return Err(invalid(format!("grid margin must be at least {margin_needed} cells for this schedule")));
    }
    let final_scheme = problem.scheme()?;
    let upper = final_scheme.gather(&problem.psi_plus);
    let lower = final_scheme.gather(&problem.psi_minus);

    let mut current = GridField::filled(grid, f64::NAN);
    for &k in problem.dgrid.interior() {
        current.values[k] = 0.5 * (problem.psi_plus.values[k] + problem.psi_minus.values[k]);
    }
    let stage_options = if config.polish {
        NewtonOptions { residual_tol: config.stage_tol.max(config.newton.residual_tol), ..config.newton }
    } else {
        config.newton
    };
    let mut stages = Vec::new();
    let mut log = Vec::new();
    for (index, stage) in config.schedule.iter().enumerate() {
        if stage.epsilon > 0.0 {
            let moll = problem.mollify(stage.epsilon)?;
            let sol = penalized_stage(
                &problem.op,
                &moll,
                &problem.distance,
                stage.delta,
                &stage_options,
                Some(&current),
                index,
            )?;
            stages.push(StageReport {
                epsilon: stage.epsilon,
                delta: stage.delta,
                unknowns: sol.unknowns,
                iterations: sol.iterations,
                residual: sol.residual,
                violation_plus: sol.violation_plus,
                violation_minus: sol.violation_minus,
                penalty_sup: sol.penalty_sup,
                sandwich: sol.sandwich,
                operator_bound: Some(sol.operator_bound),
            });
            log.extend(sol.log);
            current = sol.u;
        } else {
            let u0: Vec<f64> = final_scheme
                .nodes()
                .enumerate()
                .map(|(i, k)| {
                    let v = current.values[k];
                    if v.is_finite() {
                        v
                    } else {
                        0.5 * (upper[i] + lower[i])
                    }
                })
                .collect();
            let run = penalized_core(&final_scheme, &upper, &lower, stage.delta, u0, &stage_options, index, &mut log)?;
            let (vp, vm) = violations(&run.u, &upper, &lower);
            let c = penalty_sup(&run.u, &upper, &lower, stage.delta);
            stages.push(StageReport {
                epsilon: 0.0,
                delta: stage.delta,
                unknowns: final_scheme.len(),
                iterations: run.iterations,
                residual: run.residual,
                violation_plus: vp,
                violation_minus: vm,
                penalty_sup: c,
                sandwich: vp <= stage.delta * (c + 1.0) + 1e-12 && vm <= stage.delta * (c + 1.0) + 1e-12,
                operator_bound: None,
            });
            current = final_scheme.scatter(&run.u, &GridField::filled(grid, f64::NAN));
        }
    }

    let mut u = final_scheme.gather(&current);
    for (i, v) in u.iter_mut().enumerate() {
        if !v.is_finite() {
            *v = 0.5 * (upper[i] + lower[i]);
        }
    }
    let mut polish_iterations = 0;
    if config.polish {
        let (polished, iterations) = polish(&final_scheme, &upper, &lower, u, &config.newton)?;
        u = polished;
        polish_iterations = iterations;
    }

    let f = final_scheme.apply(&u);
    let sup_operator = sup(&f);
    let tol_c = config.tol_scale * 10.0 * grid.h * (1.0 + sup_operator);
    let scale = grid.h * grid.h;
    let mut phases = vec![None; grid.len()];
    let mut complementarity_residual: f64 = 0.0;
    let mut obstacle_violation: f64 = 0.0;
    for (i, k) in final_scheme.nodes().enumerate() {
        let (above, below) = (u[i] - upper[i], u[i] - lower[i]);
        let r = f[i].min(below).max(above);
        complementarity_residual = complementarity_residual.max(r.abs());
        obstacle_violation = obstacle_violation.max(above).max(-below);
        phases[k] = Some(phase_of(scale * f[i], above, below));
    }
    let certified = complementarity_residual <= tol_c && obstacle_violation <= 1e-9;
    let field = final_scheme.scatter(&u, &GridField::filled(grid, f64::NAN));
    Ok(DoubleObstacleSolution {
        u: field,
        report: SolveReport {
            stages,
            log,
            polish_iterations,
            complementarity_residual,
            sup_operator,
            tol_c,
            obstacle_violation,
            phases,
            certified,
        },
    })
}

/// Node-wise comparison of a candidate subsolution `v` against a solution `u`.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub nodes: usize,
    /// Grid nodes where `max{min{F_h[v], v − ψ⁻}, v − ψ⁺} > 0` beyond roundoff.
    pub subsolution_failures: Vec<usize>,
    pub max_subsolution_residual: f64,
    /// `max (v − u)` over interior nodes.
    pub max_excess: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ComparisonReport {
    pub fn render(&self) -> String {
        format!(
            "nodes: {}\nsubsolution_failures: {}\nmax_subsolution_residual: {:.3e}\nmax_excess: {:.3e}\ntol: {:.1e}\ncomparison: {}\n",
            self.nodes,
            self.subsolution_failures.len(),
            self.max_subsolution_residual,
            self.max_excess,
            self.tol,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Verifies that `v` is a discrete subsolution and then that `v ≤ u + tol`.
pub fn comparison_check(
    problem: &DoubleObstacleProblem,
    scheme: &Scheme,
    u: &GridField,
    v: &GridField,
    tol: f64,
) -> Result<ComparisonReport> {
    u.check_same_grid(v)?;
    let vv = scheme.gather(v);
    let uu = scheme.gather(u);
    let upper = scheme.gather(&problem.psi_plus);
    let lower = scheme.gather(&problem.psi_minus);
    let f = scheme.apply(&vv);
    let roundoff = 1e-9 * (1.0 + sup(&f));
    let mut failures = Vec::new();
    let mut max_sub: f64 = f64::NEG_INFINITY;
    let mut max_excess: f64 = f64::NEG_INFINITY;
    for (i, k) in scheme.nodes().enumerate() {
        let r = f[i].min(vv[i] - lower[i]).max(vv[i] - upper[i]);
        max_sub = max_sub.max(r);
        if r > roundoff {
            failures.push(k);
        }
        max_excess = max_excess.max(vv[i] - uu[i]);
    }
    let pass = failures.is_empty() && max_excess <= tol;
    Ok(ComparisonReport {
        nodes: scheme.len(),
        subsolution_failures: failures,
        max_subsolution_residual: max_sub,
        max_excess,
        tol,
        pass,
    })
}

#[cfg(test)]
mod tests;
