//! Build, solve, check and archive one scenario.
//!
//! Check reports depend only on the scenario and the solved field, so an
//! archive can be rechecked offline from `scenario.echo` and `fields/u.csv`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::convex_gauge::ConvexBody;
use crate::domain::Domain2D;
use crate::equivalence::{
    active_set_tolerance, check_lemma_3_2, check_prop_3_3, check_prop_3_5, check_theorem2, coincidence_tolerance,
    decompose, run_approximation_pipeline, CoincidenceDecomposition, PipelineConfig,
};
use crate::error::{Error, Result};
use crate::grid::{DomainGrid, Grid, GridField};
use crate::obstacle::{build_obstacle, monotonicity_check, ObstacleField, Which};
use crate::operators::verify_assumptions;
use crate::penalty_solver::{comparison_check, required_margin, solve_double_obstacle, DoubleObstacleProblem, Scheme};

use super::csv::{field_csv, mask_csv, read_field_csv};
use super::scenario::{parse_scenario, validate_resolved, Check, GridSpec, ObstacleSpec, Scenario, ScheduleSpec};

const ASSUMPTION_PROBES: usize = 2000;
const SEGMENT_SAMPLES: usize = 64;
const MONOTONICITY_PROBES: usize = 1000;
const COMPARISON_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    CheckFail = 1,
    SolverFail = 2,
    InputError = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid_cells: Option<usize>,
    pub schedule: Option<ScheduleSpec>,
    pub tol_scale: Option<f64>,
}

pub fn apply_overrides(mut scenario: Scenario, overrides: &Overrides) -> Result<Scenario> {
    if let Some(n) = overrides.grid_cells {
        scenario.grid = GridSpec::Cells(n);
    }
    if let Some(s) = &overrides.schedule {
        scenario.schedule = s.clone();
    }
    if let Some(t) = overrides.tol_scale {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument("--tol-scale must be positive".into()));
        }
        scenario.tol_scale = t;
    }
    validate_resolved(&scenario).map_err(Error::InvalidArgument)?;
    scenario.penalty_config().validate()?;
    Ok(scenario)
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub check: Check,
    pub pass: bool,
    pub report: String,
}

/// Grids, obstacles and the discrete problem of a scenario.
pub struct Setup {
    pub domain: Arc<Domain2D>,
    pub dgrid: DomainGrid,
    /// `K`, when the obstacles are gauge obstacles.
    pub body: Option<ConvexBody>,
    pub upper: Option<ObstacleField>,
    pub lower: Option<ObstacleField>,
    pub problem: DoubleObstacleProblem,
    pub scheme: Scheme,
}

pub fn setup(scenario: &Scenario) -> Result<Setup> {
    let h = scenario.h();
    let domain = Arc::new(Domain2D::new(scenario.domain.clone(), h)?);
    let config = scenario.penalty_config();
    let grid = Grid::covering(domain.half_extents(), h, required_margin(&config, h))?;
    let dgrid = DomainGrid::new(&domain, grid)?;
    let (body, upper, lower, problem) = match &scenario.obstacles {
        ObstacleSpec::Gauge => {
            let body = scenario.body.constraint_body()?;
            let upper = build_obstacle(&domain, &body, &scenario.phi, &dgrid, Which::Upper)?;
            let lower = build_obstacle(&domain, &body, &scenario.phi, &dgrid, Which::Lower)?;
            let problem = DoubleObstacleProblem::from_obstacles(scenario.operator.clone(), &upper, &lower, &dgrid)?;
            (Some(body), Some(upper), Some(lower), problem)
        }
        ObstacleSpec::RadialQuadratic { upper, lower, lipschitz } => {
            let r2 = domain.half_extents()[0].powi(2);
            let plus = GridField::from_fn(grid, |x| upper * (r2 - x[0] * x[0] - x[1] * x[1]));
            let minus = GridField::from_fn(grid, |x| -lower * (r2 - x[0] * x[0] - x[1] * x[1]));
            let problem = DoubleObstacleProblem::new(
                domain.clone(),
                dgrid.clone(),
                scenario.operator.clone(),
                plus,
                minus,
                scenario.phi.clone(),
                *lipschitz,
            )?;
            (None, None, None, problem)
        }
    };
    let scheme = problem.scheme()?;
    Ok(Setup { domain, dgrid, body, upper, lower, problem, scheme })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn assumptions_outcome(scenario: &Scenario) -> CheckOutcome {
    let report = verify_assumptions(&scenario.operator, ASSUMPTION_PROBES, scenario.seed);
    let pass = report.pass();
    CheckOutcome {
        check: Check::Assumptions,
        pass,
        report: format!("operator: {}\n{}assumptions: {}\n", scenario.operator.kind_name(), report.render(), verdict(pass)),
    }
}

/// Everything derived from a solved field.
pub struct Evaluation {
    pub outcomes: Vec<CheckOutcome>,
    pub decomposition: CoincidenceDecomposition,
    pub operator_field: GridField,
    pub constraint_field: Option<GridField>,
    pub active_set: Option<Vec<bool>>,
}

/// `tol_c = tol_scale · 10 h (1 + sup |F_h[u]|)`.
pub fn certification_tolerance(scenario: &Scenario, sup_operator: f64) -> f64 {
    scenario.tol_scale * 10.0 * scenario.h() * (1.0 + sup_operator)
}

fn coincidence_tol(scenario: &Scenario, setup: &Setup) -> f64 {
    let h = scenario.h();
    match (&scenario.obstacles, &setup.upper, &setup.lower) {
        (ObstacleSpec::RadialQuadratic { upper, lower, .. }, _, _) => {
            coincidence_tolerance(h, 2.0 * upper.max(*lower))
        }
        (_, Some(up), Some(lo)) => coincidence_tolerance(h, up.boundary_hessian_bound().max(lo.boundary_hessian_bound())),
        _ => coincidence_tolerance(h, 0.0),
    }
}

/// Runs every requested check except `assumptions` on `u`.
pub fn evaluate(scenario: &Scenario, setup: &Setup, u: &GridField) -> Result<Evaluation> {
    let dgrid = &setup.dgrid;
    let problem = &setup.problem;
    let operator_field = setup.scheme.apply_field(u);
    let sup_operator = dgrid.interior().iter().map(|&k| operator_field.values[k].abs()).fold(0.0, f64::max);
    let tol_c = certification_tolerance(scenario, sup_operator);
    let tol_p = coincidence_tol(scenario, setup);
    let decomposition = decompose(u, &problem.psi_plus, &problem.psi_minus, dgrid, tol_p)?;
    let mut outcomes = Vec::new();
    let mut constraint_field = None;
    let mut active_set = None;
    let not_applicable = |check: Check, why: &str| CheckOutcome {
        check,
        pass: true,
        report: format!("not_applicable: {why}\n{}: PASS\n", check.name()),
    };

    for &check in &scenario.checks {
        let outcome = match check {
            Check::Assumptions => continue,
            Check::Certify => {
                let mut residual: f64 = 0.0;
                let mut violation: f64 = 0.0;
                for &k in dgrid.interior() {
                    let (above, below) = (u.values[k] - problem.psi_plus.values[k], u.values[k] - problem.psi_minus.values[k]);
                    residual = residual.max(operator_field.values[k].min(below).max(above).abs());
                    violation = violation.max(above).max(-below);
                }
                let pass = residual <= tol_c && violation <= 1e-9;
                CheckOutcome {
                    check,
                    pass,
                    report: format!(
                        "sup_operator: {sup_operator:.6}\ntol_c: {tol_c:.6}\ncomplementarity_residual: {residual:.3e}\nobstacle_violation: {violation:.3e}\n{}{}: {}\n",
                        decomposition.render(),
                        check.name(),
                        verdict(pass)
                    ),
                }
            }
            Check::Theorem2 => {
                let body = setup.body.as_ref().expect("gauge checks are validated");
                let r = check_theorem2(u, &decomposition, &setup.scheme, body, dgrid, tol_c, 2)?;
                constraint_field = Some(r.h_field.clone());
                CheckOutcome { check, pass: r.pass, report: r.render(&dgrid.grid) }
            }
            Check::Prop35 => {
                let body = setup.body.as_ref().expect("gauge checks are validated");
                if !body.is_smooth() {
                    not_applicable(check, "gauge is not strictly convex")
                } else {
                    let r = check_prop_3_5(u, &decomposition, body, dgrid, active_set_tolerance(u, dgrid), 2)?;
                    active_set = Some(r.active.clone());
                    CheckOutcome { check, pass: r.pass, report: r.render() }
                }
            }
            Check::Prop33 => {
                let (up, lo) = (setup.upper.as_ref().expect("gauge"), setup.lower.as_ref().expect("gauge"));
                let r = check_prop_3_3(&decomposition, up.ridge(), lo.ridge());
                CheckOutcome { check, pass: r.pass, report: r.render() }
            }
            Check::Lemma32 => {
                let (up, lo) = (setup.upper.as_ref().expect("gauge"), setup.lower.as_ref().expect("gauge"));
                let r = check_lemma_3_2(u, &decomposition, up, lo, dgrid, SEGMENT_SAMPLES, scenario.seed)?;
                CheckOutcome { check, pass: r.pass, report: r.render() }
            }
            Check::Comparison => comparison_outcome(setup, u)?,
            Check::Monotonicity => {
                let up = setup.upper.as_ref().expect("gauge");
                if !up.envelope().body().is_smooth() {
                    not_applicable(check, "obstacle Hessians need a smooth gauge")
                } else {
                    let r = monotonicity_check(up, MONOTONICITY_PROBES, scenario.seed, 1e-6);
                    CheckOutcome {
                        check,
                        pass: r.pass,
                        report: format!(
                            "probes: {}\nskipped: {}\nmax_increase: {:.3e}\nmax_riccati_deviation: {:.3e}\nviolations: {}\n{}: {}\n",
                            r.probes,
                            r.skipped,
                            r.max_increase,
                            r.max_riccati_deviation,
                            r.violations.len(),
                            check.name(),
                            verdict(r.pass)
                        ),
                    }
                }
            }
            Check::Pipeline => {
                let config = PipelineConfig {
                    domain: scenario.domain.clone(),
                    h: scenario.h(),
                    phi: scenario.phi.clone(),
                    op: scenario.operator.clone(),
                    polar_body: scenario.body.polar_body()?,
                    levels: scenario.pipeline_levels.clone(),
                    refine: true,
                    solve_limit: false,
                    tol_scale: scenario.tol_scale,
                };
                let outcome = run_approximation_pipeline(&config)?;
                let gap =
                    outcome.solutions.last().filter(|l| l.grid == u.grid).map(|l| u.max_difference(l, dgrid.interior()));
                let mut report = outcome.report.render();
                if let Some(g) = gap {
                    report = format!("limit_gap_to_solution: {g:.4e}\n{report}");
                }
                CheckOutcome { check, pass: outcome.report.pass, report }
            }
        };
        outcomes.push(outcome);
    }
    Ok(Evaluation { outcomes, decomposition, operator_field, constraint_field, active_set })
}

/// Candidate subsolutions `ψ⁻`, `u − 1/20` and `u`; each one that passes the
/// subsolution test must lie below `u`.
fn comparison_outcome(setup: &Setup, u: &GridField) -> Result<CheckOutcome> {
    let problem = &setup.problem;
    let shifted = GridField { grid: u.grid, values: u.values.iter().map(|v| v - 0.05).collect() };
    let candidates = [("psi_minus", &problem.psi_minus), ("u_minus_0.05", &shifted), ("u", u)];
    let mut report = String::new();
    let mut verified = 0;
    let mut pass = true;
    for (name, v) in candidates {
        let r = comparison_check(problem, &setup.scheme, u, v, COMPARISON_TOL)?;
        let is_sub = r.subsolution_failures.is_empty();
        if is_sub {
            verified += 1;
            pass &= r.max_excess <= COMPARISON_TOL;
        }
        report.push_str(&format!(
            "candidate: {name} subsolution={is_sub} max_subsolution_residual={:.3e} max_excess={:.3e}\n",
            r.max_subsolution_residual, r.max_excess
        ));
    }
    pass &= verified > 0;
    report.push_str(&format!("verified_subsolutions: {verified}\ncomparison: {}\n", verdict(pass)));
    Ok(CheckOutcome { check: Check::Comparison, pass, report })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub checks: Vec<CheckOutcome>,
    pub solve_report: Option<String>,
    pub out_dir: PathBuf,
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn summary(scenario: &Scenario, checks: &[CheckOutcome], status: ExitStatus, solver: &str) -> String {
    let mut out = format!("scenario: {}\nsolver: {solver}\n", scenario.name);
    for c in checks {
        out.push_str(&format!("{}: {}\n", c.check.name(), verdict(c.pass)));
    }
    out.push_str(&format!("exit_status: {}\n", status.code()));
    out
}

/// Assumption check, build, solve, checks; writes the archive under `out_dir`.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(out_dir)?;
    write(&out_dir.join("scenario.echo"), &scenario.render())?;
    let mut checks = Vec::new();
    let assumptions = assumptions_outcome(scenario);
    write(&out_dir.join("reports/assumptions.txt"), &assumptions.report)?;
    let assumptions_ok = assumptions.pass;
    if scenario.wants(Check::Assumptions) || !assumptions_ok {
        checks.push(assumptions);
    }
    if !assumptions_ok {
        // a non-monotone scheme has no meaningful solution
        let status = ExitStatus::CheckFail;
        write(&out_dir.join("reports/summary.txt"), &summary(scenario, &checks, status, "skipped"))?;
        return Ok(RunOutcome { status, checks, solve_report: None, out_dir: out_dir.to_path_buf() });
    }

    let setup = setup(scenario)?;
    let solution = match solve_double_obstacle(&setup.problem, &scenario.penalty_config()) {
        Ok(s) => s,
        Err(e @ (Error::NonConvergence { .. } | Error::LinearSolve(_))) => {
            let mut text = format!("error: {e}\n");
            if let Error::NonConvergence { history, .. } = &e {
                let mut log = String::from("iteration,residual\n");
                for (i, r) in history.iter().enumerate() {
                    log.push_str(&format!("{i},{r:?}\n"));
                }
                write(&out_dir.join("log.csv"), &log)?;
                text.push_str(&format!("history_length: {}\n", history.len()));
            }
            write(&out_dir.join("reports/solve.txt"), &text)?;
            let status = ExitStatus::SolverFail;
            write(&out_dir.join("reports/summary.txt"), &summary(scenario, &checks, status, "FAIL"))?;
            return Ok(RunOutcome { status, checks, solve_report: Some(text), out_dir: out_dir.to_path_buf() });
        }
        Err(e) => return Err(e),
    };
    let solve_report = solution.report.render();
    write(&out_dir.join("reports/solve.txt"), &solve_report)?;
    let mut log = String::from("stage,iteration,residual,violation_plus,violation_minus\n");
    for r in &solution.report.log {
        log.push_str(&format!("{},{},{:?},{:?},{:?}\n", r.stage, r.iteration, r.residual, r.violation_plus, r.violation_minus));
    }
    write(&out_dir.join("log.csv"), &log)?;

    let evaluation = evaluate(scenario, &setup, &solution.u)?;
    write_fields(out_dir, scenario, &setup, &solution.u, &evaluation)?;
    for c in &evaluation.outcomes {
        write(&out_dir.join(format!("reports/{}.txt", c.check.name())), &c.report)?;
    }
    checks.extend(evaluation.outcomes);
    let status = if checks.iter().all(|c| c.pass) { ExitStatus::Pass } else { ExitStatus::CheckFail };
    write(&out_dir.join("reports/summary.txt"), &summary(scenario, &checks, status, verdict(solution.report.certified)))?;
    Ok(RunOutcome { status, checks, solve_report: Some(solve_report), out_dir: out_dir.to_path_buf() })
}

fn write_fields(out: &Path, scenario: &Scenario, setup: &Setup, u: &GridField, ev: &Evaluation) -> Result<()> {
    let dgrid = &setup.dgrid;
    let grid = dgrid.grid;
    let inside: Vec<bool> = (0..grid.len()).map(|k| dgrid.is_interior(k)).collect();
    let problem = &setup.problem;
    write(&out.join("fields/u.csv"), &field_csv(u, "u", &inside))?;
    match scenario.obstacles {
        ObstacleSpec::Gauge => {
            write(&out.join("fields/rho.csv"), &field_csv(&problem.psi_plus, "rho", &inside))?;
            let rho_bar = GridField { grid, values: problem.psi_minus.values.iter().map(|v| -v).collect() };
            write(&out.join("fields/rho_bar.csv"), &field_csv(&rho_bar, "rho_bar", &inside))?;
        }
        ObstacleSpec::RadialQuadratic { .. } => {
            write(&out.join("fields/psi_plus.csv"), &field_csv(&problem.psi_plus, "psi_plus", &inside))?;
            write(&out.join("fields/psi_minus.csv"), &field_csv(&problem.psi_minus, "psi_minus", &inside))?;
        }
    }
    write(&out.join("fields/operator.csv"), &field_csv(&ev.operator_field, "operator", &inside))?;
    if let Some(h) = &ev.constraint_field {
        write(&out.join("fields/constraint.csv"), &field_csv(h, "constraint", &inside))?;
    }
    let d = &ev.decomposition;
    write(&out.join("masks/E.csv"), &mask_csv(&grid, &d.elastic, "E", &inside))?;
    write(&out.join("masks/P_plus.csv"), &mask_csv(&grid, &d.upper, "P_plus", &inside))?;
    write(&out.join("masks/P_minus.csv"), &mask_csv(&grid, &d.lower, "P_minus", &inside))?;
    let mut fb = vec![false; grid.len()];
    d.free_boundary.iter().for_each(|k| fb[*k] = true);
    write(&out.join("masks/free_boundary.csv"), &mask_csv(&grid, &fb, "free_boundary", &inside))?;
    if let Some(a) = &ev.active_set {
        write(&out.join("masks/active_set.csv"), &mask_csv(&grid, a, "active_set", &inside))?;
    }
    if let (Some(up), Some(lo)) = (&setup.upper, &setup.lower) {
        write(&out.join("masks/ridge_rho.csv"), &mask_csv(&grid, &up.ridge().mask(), "ridge_rho", &inside))?;
        write(&out.join("masks/ridge_rho_bar.csv"), &mask_csv(&grid, &lo.ridge().mask(), "ridge_rho_bar", &inside))?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ArchiveCheck {
    pub checks: Vec<CheckOutcome>,
    /// Checks whose recomputed report differs from the archived one.
    pub mismatches: Vec<String>,
    pub status: ExitStatus,
}

/// Reruns the archived scenario's checks on the archived `u`.
pub fn check_archive(dir: &Path) -> Result<ArchiveCheck> {
    let parsed = parse_scenario(&dir.join("scenario.echo"))?;
    let scenario = parsed.scenario;
    let (u, _) = read_field_csv(&dir.join("fields/u.csv"))?;
    let setup = setup(&scenario)?;
    if u.grid != setup.dgrid.grid {
        return Err(Error::InvalidArgument("archived field does not match the scenario grid".into()));
    }
    let mut checks = Vec::new();
    if scenario.wants(Check::Assumptions) {
        checks.push(assumptions_outcome(&scenario));
    }
    checks.extend(evaluate(&scenario, &setup, &u)?.outcomes);
    let mut mismatches = Vec::new();
    for c in &checks {
        let path = dir.join(format!("reports/{}.txt", c.check.name()));
        match fs::read_to_string(&path) {
            Ok(text) if text == c.report => {}
            Ok(_) => mismatches.push(c.check.name().to_string()),
            Err(_) => mismatches.push(format!("{} (missing)", c.check.name())),
        }
    }
    let status =
        if mismatches.is_empty() && checks.iter().all(|c| c.pass) { ExitStatus::Pass } else { ExitStatus::CheckFail };
    Ok(ArchiveCheck { checks, mismatches, status })
}
