//! Smooth approximation of a nonsmooth constraint: solve with `K_k` whose
//! polar `K°_k` shrinks to `K°`, and watch `u_k` settle.

use std::sync::Arc;

use crate::convex_gauge::{smooth_approximation, ConvexBody};
use crate::domain::{check_condition_star, BoundaryDatum, Domain2D, DomainKind};
use crate::error::{Error, Result};
use crate::grid::{DomainGrid, Grid, GridField};
use crate::obstacle::{build_obstacle, Which};
use crate::operators::EllipticOperator;
use crate::penalty_solver::{required_margin, solve_double_obstacle, DoubleObstacleProblem, PenaltyConfig};

use super::max_second_difference;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub domain: DomainKind,
    pub h: f64,
    pub phi: BoundaryDatum,
    pub op: EllipticOperator,
    /// The nonsmooth polar body `K°`.
    pub polar_body: ConvexBody,
    pub levels: Vec<usize>,
    /// Rerun the last level at `h/2`.
    pub refine: bool,
    /// Also solve with `K°` itself.
    pub solve_limit: bool,
    pub tol_scale: f64,
}

impl PipelineConfig {
    /// Disc of radius 2, torsion operator, `K°` the unit `L¹` ball, `h = 1/16`.
    pub fn l1_torsion() -> Result<Self> {
        Ok(Self {
            domain: DomainKind::Disc { radius: 2.0 },
            h: 1.0 / 16.0,
            phi: BoundaryDatum::Zero,
            op: EllipticOperator::poisson(1.0),
            polar_body: ConvexBody::polygon(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])?,
            levels: vec![4, 8, 16, 32],
            refine: true,
            solve_limit: true,
            tol_scale: 1.0,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PipelineLevel {
    pub level: usize,
    pub h: f64,
    pub sup_operator: f64,
    pub max_second_difference: f64,
    pub certified: bool,
    pub coincidence_nodes: usize,
    /// `sup |u_k − u_{k−1}|` against the previous level.
    pub step_from_previous: Option<f64>,
    /// `max (ρ_k − ρ_{k−1})` against the previous level; `≤ 0` when decreasing.
    pub rho_increase: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub levels: Vec<PipelineLevel>,
    pub refined: Option<PipelineLevel>,
    /// `sup |u_limit − u_last|`.
    pub limit_gap: Option<f64>,
    pub condition_star: bool,
    /// `max / min` of `sup |F_h[u_k]|` over levels.
    pub operator_spread: f64,
    pub steps_decreasing: bool,
    /// `max / min` of the second-difference bounds over levels.
    pub second_difference_ratio: f64,
    /// Last level against its `h/2` rerun, `max / min`.
    pub refinement_ratio: Option<f64>,
    pub rho_monotone: bool,
    pub tolerance: f64,
    pub pass: bool,
}

impl PipelineReport {
    pub fn render(&self) -> String {
        let mut out = format!("condition_star: {}\n", self.condition_star);
        out.push_str("level,h,sup_operator,max_second_difference,step,rho_increase,coincidence_nodes,certified\n");
        let fmt = |o: Option<f64>| o.map_or("-".to_string(), |v| format!("{v:.4e}"));
        for l in self.levels.iter().chain(self.refined.iter()) {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{},{},{},{}\n",
                l.level,
                l.h,
                l.sup_operator,
                l.max_second_difference,
                fmt(l.step_from_previous),
                fmt(l.rho_increase),
                l.coincidence_nodes,
                l.certified
            ));
        }
        out.push_str(&format!("operator_spread: {:.4}\n", self.operator_spread));
        out.push_str(&format!("steps_decreasing: {}\n", self.steps_decreasing));
        out.push_str(&format!("second_difference_ratio: {:.4}\n", self.second_difference_ratio));
        out.push_str(&format!("refinement_ratio: {}\n", fmt(self.refinement_ratio)));
        out.push_str(&format!("limit_gap: {}\n", fmt(self.limit_gap)));
        out.push_str(&format!("rho_monotone: {}\n", self.rho_monotone));
        out.push_str(&format!("pipeline: {}\n", if self.pass { "PASS" } else { "FAIL" }));
        out
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub solutions: Vec<GridField>,
    pub limit: Option<GridField>,
    pub report: PipelineReport,
}

struct Solved {
    u: GridField,
    rho: GridField,
    dgrid: DomainGrid,
    level: PipelineLevel,
}

fn solve_with(config: &PipelineConfig, body: &ConvexBody, h: f64, level: usize) -> Result<Solved> {
    let domain = Arc::new(Domain2D::new(config.domain.clone(), h)?);
    let mut penalty = PenaltyConfig::standard(h);
    penalty.tol_scale = config.tol_scale;
    let grid = Grid::covering(domain.half_extents(), h, required_margin(&penalty, h))?;
    let dgrid = DomainGrid::new(&domain, grid)?;
    let upper = build_obstacle(&domain, body, &config.phi, &dgrid, Which::Upper)?;
    let lower = build_obstacle(&domain, body, &config.phi, &dgrid, Which::Lower)?;
    let problem = DoubleObstacleProblem::from_obstacles(config.op.clone(), &upper, &lower, &dgrid)?;
    let solution = solve_double_obstacle(&problem, &penalty)?;
    let report = &solution.report;
    let coincidence = report.phases.iter().filter(|p| matches!(p, Some(ph) if *ph != crate::penalty_solver::Phase::Elastic)).count();
    Ok(Solved {
        level: PipelineLevel {
            level,
            h,
            sup_operator: report.sup_operator,
            max_second_difference: max_second_difference(&solution.u, &dgrid),
            certified: report.certified,
            coincidence_nodes: coincidence,
            step_from_previous: None,
            rho_increase: None,
        },
        rho: upper.values(),
        u: solution.u,
        dgrid,
    })
}

fn ratio(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > 0.0 {
        hi / lo
    } else if hi == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Solves with `K_k = (K°_k)°` for each level and records the uniform bounds.
///
/// Checks: `sup |F_h[u_k]|` within 20%, `sup |u_{k+1} − u_k|` decreasing,
/// second differences within 10% across levels and under refinement, and
/// `ρ_{k+1} ≤ ρ_k` up to tolerance.
pub fn run_approximation_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    if config.levels.is_empty() {
        return Err(Error::InvalidArgument("pipeline needs at least one level".into()));
    }
    let probe = Domain2D::new(config.domain.clone(), config.h)?;
    let limit_body = config.polar_body.polar();
    let star = check_condition_star(&probe, &config.phi, &limit_body)?;
    if !star.pass {
        return Err(Error::InvalidArgument(format!(
            "boundary datum violates the constraint condition (max polar gauge {:.6})",
            star.max_polar_gauge
        )));
    }
    let tolerance = 1e-8;
    let mut solved: Vec<Solved> = Vec::new();
    for &level in &config.levels {
        let body = if config.polar_body.is_smooth() {
            config.polar_body.polar()
        } else {
            smooth_approximation(&config.polar_body, level)?.polar()
        };
        let mut s = solve_with(config, &body, config.h, level)?;
        if let Some(prev) = solved.last() {
            let nodes = s.dgrid.interior();
            s.level.step_from_previous = Some(s.u.max_difference(&prev.u, nodes));
            s.level.rho_increase =
                Some(nodes.iter().map(|&k| s.rho.values[k] - prev.rho.values[k]).fold(f64::NEG_INFINITY, f64::max));
        }
        solved.push(s);
        if config.polar_body.is_smooth() {
            break;
        }
    }
    let last = solved.last().expect("at least one level");
    let refined = if config.refine {
        let body = if config.polar_body.is_smooth() {
            config.polar_body.polar()
        } else {
            smooth_approximation(&config.polar_body, last.level.level)?.polar()
        };
        Some(solve_with(config, &body, 0.5 * config.h, last.level.level)?.level)
    } else {
        None
    };
    let (limit, limit_gap) = if config.solve_limit {
        let s = solve_with(config, &limit_body, config.h, 0)?;
        let gap = s.u.max_difference(&last.u, last.dgrid.interior());
        (Some(s.u), Some(gap))
    } else {
        (None, None)
    };

    let levels: Vec<PipelineLevel> = solved.iter().map(|s| s.level.clone()).collect();
    let operator_spread = ratio(levels.iter().map(|l| l.sup_operator));
    let steps: Vec<f64> = levels.iter().filter_map(|l| l.step_from_previous).collect();
    let steps_decreasing = steps.windows(2).all(|w| w[1] <= w[0] + tolerance);
    let second_difference_ratio = ratio(levels.iter().map(|l| l.max_second_difference));
    let refinement_ratio = refined
        .as_ref()
        .map(|r| ratio([r.max_second_difference, last.level.max_second_difference].into_iter()));
    let rho_monotone = levels.iter().filter_map(|l| l.rho_increase).all(|d| d <= tolerance);
    let pass = operator_spread <= 1.2 + tolerance
        && steps_decreasing
        && second_difference_ratio <= 1.1 + tolerance
        && refinement_ratio.is_none_or(|r| r <= 1.1 + tolerance)
        && rho_monotone;
    Ok(PipelineOutcome {
        solutions: solved.into_iter().map(|s| s.u).collect(),
        limit,
        report: PipelineReport {
            levels,
            refined,
            limit_gap,
            condition_star: star.pass,
            operator_spread,
            steps_decreasing,
            second_difference_ratio,
            refinement_ratio,
            rho_monotone,
            tolerance,
            pass,
        },
    })
}
