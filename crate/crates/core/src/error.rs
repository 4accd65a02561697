use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible boundary datum at {point:?}: gauge_polar(Dphi) = {value}")]
    InfeasibleDatum { point: [f64; 2], value: f64 },

    #[error("degenerate transversality at {point:?}: <Dgauge_polar(mu), nu> = {inner}")]
    DegenerateTransversality { point: [f64; 2], inner: f64 },

    #[error("point {point:?} is too close to the ridge (det Q = {det_q})")]
    RidgeProximity { point: [f64; 2], det_q: f64 },

    #[error("obstacle is not differentiable at {point:?}: multiple closest points")]
    Nondifferentiable { point: [f64; 2] },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid obstacles: {0}")]
    InvalidObstacles(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
        last_iterate: Vec<f64>,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("{}", format_scenario_errors(.0))]
    Scenario(Vec<ScenarioError>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A parse or validation problem located in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

fn format_scenario_errors(errors: &[ScenarioError]) -> String {
    let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
    format!("scenario errors:\n  {}", lines.join("\n  "))
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
