//! Scenario files: TOML with one table per ingredient.

use std::path::Path;

use serde::Deserialize;

use crate::convex_gauge::ConvexBody;
use crate::domain::{BoundaryDatum, DomainKind};
use crate::error::{Error, Result, ScenarioError};
use crate::linalg::{Mat2, Vec2};
use crate::operators::{EllipticOperator, LinearOperator};
use crate::penalty_solver::{PenaltyConfig, Stage};

/// Smallest number of grid cells across the domain's bounding box.
pub const MIN_CELLS_ACROSS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum BodyShape {
    Ball { radius: f64 },
    Ellipse { semi_axes: [f64; 2] },
    PBall { p: f64, scale: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl BodyShape {
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodyShape::Ball { radius } => ConvexBody::ball(2, *radius),
            BodyShape::Ellipse { semi_axes } => ConvexBody::ellipse(semi_axes),
            BodyShape::PBall { p, scale } => ConvexBody::p_ball(2, *p, *scale),
            BodyShape::Polygon { vertices } => ConvexBody::polygon(vertices),
        }
    }
}

/// The constraint set, given either as `K` (gauge `γ`) or as `K°` (gauge `γ°`).
#[derive(Debug, Clone, PartialEq)]
pub struct BodySpec {
    pub shape: BodyShape,
    pub polar_given: bool,
}

impl BodySpec {
    /// The body `K` whose gauge enters the obstacles.
    pub fn constraint_body(&self) -> Result<ConvexBody> {
        let b = self.shape.build()?;
        Ok(if self.polar_given { b.polar() } else { b })
    }

    /// `K°`, the body whose gauge bounds `Du`.
    pub fn polar_body(&self) -> Result<ConvexBody> {
        let b = self.shape.build()?;
        Ok(if self.polar_given { b } else { b.polar() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObstacleSpec {
    /// `ψ⁺ = ρ_{K,φ}` and `ψ⁻ = −ρ̄`.
    Gauge,
    /// `ψ⁺ = a (R² − |x|²)`, `ψ⁻ = −b (R² − |x|²)` on a disc of radius `R`.
    RadialQuadratic { upper: f64, lower: f64, lipschitz: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Spacing(f64),
    /// Cells across the longer side of the domain's bounding box.
    Cells(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Standard,
    /// `(ε in cells, δ)` per stage.
    Custom(Vec<(f64, f64)>),
}

impl ScheduleSpec {
    /// `standard` or a comma list of `eps_cells:delta` pairs.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        if text == "standard" {
            return Ok(ScheduleSpec::Standard);
        }
        let stages = text
            .split(',')
            .map(|pair| {
                let (e, d) = pair.split_once(':').ok_or_else(|| format!("stage {pair:?} is not eps_cells:delta"))?;
                let e: f64 = e.trim().parse().map_err(|_| format!("bad epsilon in {pair:?}"))?;
                let d: f64 = d.trim().parse().map_err(|_| format!("bad delta in {pair:?}"))?;
                Ok((e, d))
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        Ok(ScheduleSpec::Custom(stages))
    }

    pub fn render(&self) -> String {
        match self {
            ScheduleSpec::Standard => "\"standard\"".into(),
            ScheduleSpec::Custom(stages) => {
                let parts: Vec<String> = stages.iter().map(|(e, d)| format!("[{e:?}, {d:?}]")).collect();
                format!("[{}]", parts.join(", "))
            }
        }
    }

    pub fn config(&self, h: f64, tol_scale: f64) -> PenaltyConfig {
        let mut config = PenaltyConfig::standard(h);
        if let ScheduleSpec::Custom(stages) = self {
            config.schedule = stages.iter().map(|(e, d)| Stage { epsilon: e * h, delta: *d }).collect();
        }
        config.tol_scale = tol_scale;
        config
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Assumptions,
    Certify,
    Theorem2,
    Prop35,
    Prop33,
    Lemma32,
    Comparison,
    Monotonicity,
    Pipeline,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Assumptions,
        Check::Certify,
        Check::Theorem2,
        Check::Prop35,
        Check::Prop33,
        Check::Lemma32,
        Check::Comparison,
        Check::Monotonicity,
        Check::Pipeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Assumptions => "assumptions",
            Check::Certify => "certify",
            Check::Theorem2 => "theorem2",
            Check::Prop35 => "prop_3_5",
            Check::Prop33 => "prop_3_3",
            Check::Lemma32 => "lemma_3_2",
            Check::Comparison => "comparison",
            Check::Monotonicity => "monotonicity",
            Check::Pipeline => "pipeline",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Checks that need the gauge obstacles `ρ`, `ρ̄`.
    pub fn needs_gauge(self) -> bool {
        matches!(self, Check::Theorem2 | Check::Prop35 | Check::Prop33 | Check::Lemma32 | Check::Monotonicity | Check::Pipeline)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub domain: DomainKind,
    pub body: BodySpec,
    pub phi: BoundaryDatum,
    pub operator: EllipticOperator,
    pub obstacles: ObstacleSpec,
    pub grid: GridSpec,
    pub schedule: ScheduleSpec,
    pub tol_scale: f64,
    pub checks: Vec<Check>,
    pub seed: u64,
    pub pipeline_levels: Vec<usize>,
}

impl Scenario {
    pub fn h(&self) -> f64 {
        match self.grid {
            GridSpec::Spacing(h) => h,
            GridSpec::Cells(n) => {
                let e = self.domain.half_extents();
                2.0 * e[0].max(e[1]) / n as f64
            }
        }
    }

    pub fn cells_across(&self) -> f64 {
        let e = self.domain.half_extents();
        2.0 * e[0].max(e[1]) / self.h()
    }

    pub fn penalty_config(&self) -> PenaltyConfig {
        self.schedule.config(self.h(), self.tol_scale)
    }

    pub fn wants(&self, check: Check) -> bool {
        self.checks.contains(&check)
    }

    /// Resolved scenario as a scenario file; parsing it gives back `self`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let f = |v: f64| format!("{v:?}");
        out.push_str(&format!("name = {:?}\nseed = {}\n", self.name, self.seed));
        let checks: Vec<String> = self.checks.iter().map(|c| format!("{:?}", c.name())).collect();
        out.push_str(&format!("checks = [{}]\n", checks.join(", ")));

        out.push_str("\n[domain]\n");
        match &self.domain {
            DomainKind::Disc { radius } => out.push_str(&format!("kind = \"disc\"\nradius = {}\n", f(*radius))),
            DomainKind::Ellipse { semi_major, semi_minor } => out.push_str(&format!(
                "kind = \"ellipse\"\nsemi_major = {}\nsemi_minor = {}\n",
                f(*semi_major),
                f(*semi_minor)
            )),
            DomainKind::RoundedRectangle { width, height, corner } => out.push_str(&format!(
                "kind = \"rounded_rectangle\"\nwidth = {}\nheight = {}\ncorner = {}\n",
                f(*width),
                f(*height),
                f(*corner)
            )),
            DomainKind::Star { radius, amplitude, lobes } => out.push_str(&format!(
                "kind = \"star\"\nradius = {}\namplitude = {}\nlobes = {lobes}\n",
                f(*radius),
                f(*amplitude)
            )),
        }

        out.push_str("\n[body]\n");
        out.push_str(&format!("given = {:?}\n", if self.body.polar_given { "polar" } else { "K" }));
        match &self.body.shape {
            BodyShape::Ball { radius } => out.push_str(&format!("kind = \"ball\"\nradius = {}\n", f(*radius))),
            BodyShape::Ellipse { semi_axes } => out.push_str(&format!(
                "kind = \"ellipse\"\nsemi_axes = [{}, {}]\n",
                f(semi_axes[0]),
                f(semi_axes[1])
            )),
            BodyShape::PBall { p, scale } => {
                out.push_str(&format!("kind = \"p_ball\"\np = {}\nscale = {}\n", f(*p), f(*scale)))
            }
            BodyShape::Polygon { vertices } => {
                let v: Vec<String> = vertices.iter().map(|v| format!("[{}, {}]", f(v[0]), f(v[1]))).collect();
                out.push_str(&format!("kind = \"polygon\"\nvertices = [{}]\n", v.join(", ")));
            }
        }

        out.push_str("\n[phi]\n");
        match &self.phi {
            BoundaryDatum::Zero => out.push_str("kind = \"zero\"\n"),
            BoundaryDatum::Affine { slope, offset } => out.push_str(&format!(
                "kind = \"affine\"\nslope = [{}, {}]\noffset = {}\n",
                f(slope[0]),
                f(slope[1]),
                f(*offset)
            )),
            BoundaryDatum::Wave { amplitude, wavevector } => out.push_str(&format!(
                "kind = \"wave\"\namplitude = {}\nwavevector = [{}, {}]\n",
                f(*amplitude),
                f(wavevector[0]),
                f(wavevector[1])
            )),
        }

        out.push_str("\n[operator]\n");
        let linear = |l: &LinearOperator| {
            format!(
                "a = [[{}, {}], [{}, {}]], b = [{}, {}], c = {}, f = {}",
                f(l.a[(0, 0)]),
                f(l.a[(0, 1)]),
                f(l.a[(1, 0)]),
                f(l.a[(1, 1)]),
                f(l.b.x),
                f(l.b.y),
                f(l.c),
                f(l.f)
            )
        };
        match &self.operator {
            EllipticOperator::Linear(l) => out.push_str(&format!(
                "kind = \"linear\"\na = [[{}, {}], [{}, {}]]\nb = [{}, {}]\nc = {}\nf = {}\n",
                f(l.a[(0, 0)]),
                f(l.a[(0, 1)]),
                f(l.a[(1, 0)]),
                f(l.a[(1, 1)]),
                f(l.b.x),
                f(l.b.y),
                f(l.c),
                f(l.f)
            )),
            EllipticOperator::PucciMinus { lambda, big_lambda, f: src } => out.push_str(&format!(
                "kind = \"pucci_minus\"\nlambda = {}\nbig_lambda = {}\nf = {}\n",
                f(*lambda),
                f(*big_lambda),
                f(*src)
            )),
            EllipticOperator::PucciPlus { lambda, big_lambda, f: src } => out.push_str(&format!(
                "kind = \"pucci_plus\"\nlambda = {}\nbig_lambda = {}\nf = {}\n",
                f(*lambda),
                f(*big_lambda),
                f(*src)
            )),
            EllipticOperator::Bellman(list) => {
                out.push_str("kind = \"bellman\"\nbranches = [\n");
                for l in list {
                    out.push_str(&format!("  {{ {} }},\n", linear(l)));
                }
                out.push_str("]\n");
            }
            EllipticOperator::VariableLinear { amplitude } => {
                out.push_str(&format!("kind = \"variable_linear\"\namplitude = {}\n", f(*amplitude)))
            }
        }

        if let ObstacleSpec::RadialQuadratic { upper, lower, lipschitz } = &self.obstacles {
            out.push_str(&format!(
                "\n[obstacles]\nkind = \"radial_quadratic\"\nupper = {}\nlower = {}\nlipschitz = {}\n",
                f(*upper),
                f(*lower),
                f(*lipschitz)
            ));
        }

        out.push_str("\n[grid]\n");
        match self.grid {
            GridSpec::Spacing(h) => out.push_str(&format!("h = {}\n", f(h))),
            GridSpec::Cells(n) => out.push_str(&format!("cells = {n}\n")),
        }

        out.push_str("\n[solver]\n");
        out.push_str(&format!("schedule = {}\ntol_scale = {}\n", self.schedule.render(), f(self.tol_scale)));

        if !self.pipeline_levels.is_empty() {
            let levels: Vec<String> = self.pipeline_levels.iter().map(|l| l.to_string()).collect();
            out.push_str(&format!("\n[pipeline]\nlevels = [{}]\n", levels.join(", ")));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ParsedScenario {
    pub scenario: Scenario,
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    seed: Option<u64>,
    checks: Option<Vec<String>>,
    domain: Option<RawDomain>,
    body: Option<RawBody>,
    phi: Option<RawPhi>,
    operator: Option<RawOperator>,
    obstacles: Option<RawObstacles>,
    grid: Option<RawGrid>,
    solver: Option<RawSolver>,
    pipeline: Option<RawPipeline>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    kind: String,
    radius: Option<f64>,
    semi_major: Option<f64>,
    semi_minor: Option<f64>,
    width: Option<f64>,
    height: Option<f64>,
    corner: Option<f64>,
    amplitude: Option<f64>,
    lobes: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBody {
    kind: String,
    given: Option<String>,
    radius: Option<f64>,
    semi_axes: Option<[f64; 2]>,
    p: Option<f64>,
    scale: Option<f64>,
    vertices: Option<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhi {
    kind: String,
    slope: Option<[f64; 2]>,
    offset: Option<f64>,
    amplitude: Option<f64>,
    wavevector: Option<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinear {
    a: [[f64; 2]; 2],
    b: Option<[f64; 2]>,
    c: Option<f64>,
    f: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    kind: String,
    f: Option<f64>,
    a: Option<[[f64; 2]; 2]>,
    b: Option<[f64; 2]>,
    c: Option<f64>,
    lambda: Option<f64>,
    big_lambda: Option<f64>,
    branches: Option<Vec<RawLinear>>,
    amplitude: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObstacles {
    kind: String,
    upper: Option<f64>,
    lower: Option<f64>,
    lipschitz: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    h: Option<f64>,
    cells: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSchedule {
    Named(String),
    Stages(Vec<[f64; 2]>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    schedule: Option<RawSchedule>,
    tol_scale: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPipeline {
    levels: Vec<usize>,
}

/// 1-based line of `key` inside `[table]` (or of the table header when `key` is empty).
fn locate(text: &str, table: &str, key: &str) -> Option<usize> {
    let lines: Vec<&str> = text.lines().collect();
    let starts_key = |line: &str, k: &str| {
        let t = line.trim_start();
        t.strip_prefix(k).is_some_and(|rest| rest.trim_start().starts_with('='))
    };
    let (start, end) = if table.is_empty() {
        (0, lines.iter().position(|l| l.trim_start().starts_with('[')).unwrap_or(lines.len()))
    } else {
        let header = format!("[{table}]");
        match lines.iter().position(|l| l.trim() == header) {
            Some(h) => {
                if key.is_empty() {
                    return Some(h + 1);
                }
                let end = lines[h + 1..]
                    .iter()
                    .position(|l| l.trim_start().starts_with('['))
                    .map_or(lines.len(), |p| h + 1 + p);
                (h + 1, end)
            }
            None => {
                // inline table `table = { ... }`
                return lines.iter().position(|l| starts_key(l, table)).map(|p| p + 1);
            }
        }
    };
    if key.is_empty() {
        return None;
    }
    lines[start..end].iter().position(|l| starts_key(l, key)).map(|p| start + p + 1)
}

struct Collector<'a> {
    text: &'a str,
    errors: Vec<ScenarioError>,
}

impl Collector<'_> {
    fn push(&mut self, table: &str, key: &str, message: impl Into<String>) {
        let line = locate(self.text, table, key).or_else(|| locate(self.text, table, ""));
        self.errors.push(ScenarioError { line, message: message.into() });
    }

    fn need<T: Copy>(&mut self, value: Option<T>, table: &str, key: &str, kind: &str) -> T
    where
        T: Default,
    {
        match value {
            Some(v) => v,
            None => {
                self.push(table, key, format!("missing key `{table}.{key}` for kind \"{kind}\""));
                T::default()
            }
        }
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

fn linear_from(raw: &RawLinear) -> LinearOperator {
    let b = raw.b.unwrap_or([0.0, 0.0]);
    LinearOperator::new(
        Mat2::new(raw.a[0][0], raw.a[0][1], raw.a[1][0], raw.a[1][1]),
        Vec2::new(b[0], b[1]),
        raw.c.unwrap_or(0.0),
        raw.f.unwrap_or(0.0),
    )
}

fn signed_area(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// Parses and validates scenario text; errors carry line numbers where known.
pub fn parse_scenario_str(text: &str) -> Result<ParsedScenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        Error::Scenario(vec![ScenarioError {
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().trim().to_string(),
        }])
    })?;
    let mut c = Collector { text, errors: Vec::new() };
    let mut warnings = Vec::new();

    let name = raw.name.clone().unwrap_or_else(|| {
        c.errors.push(ScenarioError { line: None, message: "missing key `name`".into() });
        String::new()
    });

    let domain = match &raw.domain {
        None => {
            c.errors.push(ScenarioError { line: None, message: "missing table [domain]".into() });
            None
        }
        Some(d) => {
            let before = c.errors.len();
            let k = d.kind.as_str();
            let kind = match k {
                "disc" => Some(DomainKind::Disc { radius: c.need(d.radius, "domain", "radius", k) }),
                "ellipse" => Some(DomainKind::Ellipse {
                    semi_major: c.need(d.semi_major, "domain", "semi_major", k),
                    semi_minor: c.need(d.semi_minor, "domain", "semi_minor", k),
                }),
                "rounded_rectangle" => Some(DomainKind::RoundedRectangle {
                    width: c.need(d.width, "domain", "width", k),
                    height: c.need(d.height, "domain", "height", k),
                    corner: c.need(d.corner, "domain", "corner", k),
                }),
                "star" => Some(DomainKind::Star {
                    radius: c.need(d.radius, "domain", "radius", k),
                    amplitude: c.need(d.amplitude, "domain", "amplitude", k),
                    lobes: c.need(d.lobes, "domain", "lobes", k),
                }),
                other => {
                    c.push("domain", "kind", format!("unknown domain kind \"{other}\""));
                    None
                }
            };
            if let Some(kind) = kind.as_ref().filter(|_| c.errors.len() == before) {
                if let Err(e) = crate::domain::Domain2D::with_samples(kind.clone(), 64) {
                    c.push("domain", "kind", e.to_string());
                }
            }
            kind
        }
    };

    let body = match &raw.body {
        None => {
            c.errors.push(ScenarioError { line: None, message: "missing table [body]".into() });
            None
        }
        Some(b) => {
            let polar_given = match b.given.as_deref() {
                None | Some("K") => false,
                Some("polar") => true,
                Some(other) => {
                    c.push("body", "given", format!("`body.given` must be \"K\" or \"polar\", got \"{other}\""));
                    false
                }
            };
            let before = c.errors.len();
            let k = b.kind.as_str();
            let shape = match k {
                "ball" => Some(BodyShape::Ball { radius: c.need(b.radius, "body", "radius", k) }),
                "ellipse" => Some(BodyShape::Ellipse { semi_axes: c.need(b.semi_axes, "body", "semi_axes", k) }),
                "p_ball" => Some(BodyShape::PBall {
                    p: c.need(b.p, "body", "p", k),
                    scale: b.scale.unwrap_or(1.0),
                }),
                "polygon" => match &b.vertices {
                    None => {
                        c.push("body", "vertices", "missing key `body.vertices` for kind \"polygon\"");
                        None
                    }
                    Some(v) => {
                        let mut v = v.clone();
                        if v.len() >= 3 && signed_area(&v) < 0.0 {
                            v.reverse();
                            warnings.push(format!(
                                "line {}: polygon vertices were clockwise; reversed to counterclockwise",
                                locate(text, "body", "vertices").unwrap_or(0)
                            ));
                        }
                        Some(BodyShape::Polygon { vertices: v })
                    }
                },
                other => {
                    c.push("body", "kind", format!("unknown body kind \"{other}\""));
                    None
                }
            };
            if let Some(shape) = shape.as_ref().filter(|_| c.errors.len() == before) {
                if let Err(e) = shape.build() {
                    let key = if matches!(shape, BodyShape::Polygon { .. }) { "vertices" } else { "kind" };
                    let msg = match e {
                        Error::InvalidArgument(m) => m,
                        other => other.to_string(),
                    };
                    c.push("body", key, msg);
                }
            }
            shape.map(|shape| BodySpec { shape, polar_given })
        }
    };

    let phi = match &raw.phi {
        None => BoundaryDatum::Zero,
        Some(p) => match p.kind.as_str() {
            "zero" => BoundaryDatum::Zero,
            "affine" => BoundaryDatum::Affine {
                slope: c.need(p.slope, "phi", "slope", "affine"),
                offset: p.offset.unwrap_or(0.0),
            },
            "wave" => BoundaryDatum::Wave {
                amplitude: c.need(p.amplitude, "phi", "amplitude", "wave"),
                wavevector: c.need(p.wavevector, "phi", "wavevector", "wave"),
            },
            other => {
                c.push("phi", "kind", format!("unknown phi kind \"{other}\""));
                BoundaryDatum::Zero
            }
        },
    };

    let operator = match &raw.operator {
        None => {
            c.errors.push(ScenarioError { line: None, message: "missing table [operator]".into() });
            None
        }
        Some(o) => {
            let before = c.errors.len();
            let k = o.kind.as_str();
            let op = match k {
                "poisson" => Some(EllipticOperator::poisson(c.need(o.f, "operator", "f", k))),
                "linear" => {
                    let a = c.need(o.a, "operator", "a", k);
                    Some(EllipticOperator::Linear(linear_from(&RawLinear { a, b: o.b, c: o.c, f: o.f })))
                }
                "pucci_minus" | "pucci_plus" => {
                    let lambda = c.need(o.lambda, "operator", "lambda", k);
                    let big_lambda = c.need(o.big_lambda, "operator", "big_lambda", k);
                    let f = c.need(o.f, "operator", "f", k);
                    Some(if k == "pucci_minus" {
                        EllipticOperator::PucciMinus { lambda, big_lambda, f }
                    } else {
                        EllipticOperator::PucciPlus { lambda, big_lambda, f }
                    })
                }
                "bellman" => match &o.branches {
                    Some(list) => Some(EllipticOperator::Bellman(list.iter().map(linear_from).collect())),
                    None => {
                        c.push("operator", "branches", "missing key `operator.branches` for kind \"bellman\"");
                        None
                    }
                },
                "variable_linear" => {
                    Some(EllipticOperator::VariableLinear { amplitude: c.need(o.amplitude, "operator", "amplitude", k) })
                }
                other => {
                    c.push("operator", "kind", format!("unknown operator kind \"{other}\""));
                    None
                }
            };
            if let Some(op) = op.as_ref().filter(|_| c.errors.len() == before) {
                if let Err(e) = op.validate() {
                    c.push("operator", "kind", e.to_string());
                }
            }
            op
        }
    };

    let obstacles = match &raw.obstacles {
        None => ObstacleSpec::Gauge,
        Some(o) => match o.kind.as_str() {
            "gauge" => ObstacleSpec::Gauge,
            "radial_quadratic" => {
                let spec = ObstacleSpec::RadialQuadratic {
                    upper: c.need(o.upper, "obstacles", "upper", "radial_quadratic"),
                    lower: c.need(o.lower, "obstacles", "lower", "radial_quadratic"),
                    lipschitz: c.need(o.lipschitz, "obstacles", "lipschitz", "radial_quadratic"),
                };
                if !matches!(domain, Some(DomainKind::Disc { .. }) | None) {
                    c.push("obstacles", "kind", "radial_quadratic obstacles need a disc domain");
                }
                spec
            }
            other => {
                c.push("obstacles", "kind", format!("unknown obstacles kind \"{other}\""));
                ObstacleSpec::Gauge
            }
        },
    };

    let grid = match &raw.grid {
        None => {
            c.errors.push(ScenarioError { line: None, message: "missing table [grid]".into() });
            None
        }
        Some(g) => match (g.h, g.cells) {
            (Some(h), None) if h > 0.0 && h.is_finite() => Some(GridSpec::Spacing(h)),
            (None, Some(n)) if n > 0 => Some(GridSpec::Cells(n)),
            (Some(_), Some(_)) => {
                c.push("grid", "cells", "give either `grid.h` or `grid.cells`, not both");
                None
            }
            (None, None) => {
                c.push("grid", "", "missing key `grid.h` or `grid.cells`");
                None
            }
            _ => {
                c.push("grid", if g.h.is_some() { "h" } else { "cells" }, "grid size must be positive");
                None
            }
        },
    };

    let solver = raw.solver.as_ref();
    let schedule = match solver.and_then(|s| s.schedule.as_ref()) {
        None => ScheduleSpec::Standard,
        Some(RawSchedule::Named(n)) => match ScheduleSpec::parse(n) {
            Ok(s) => s,
            Err(msg) => {
                c.push("solver", "schedule", msg);
                ScheduleSpec::Standard
            }
        },
        Some(RawSchedule::Stages(list)) => ScheduleSpec::Custom(list.iter().map(|p| (p[0], p[1])).collect()),
    };
    let tol_scale = solver.and_then(|s| s.tol_scale).unwrap_or(1.0);
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        c.push("solver", "tol_scale", "`solver.tol_scale` must be positive");
    }

    let mut checks = Vec::new();
    for name in raw.checks.clone().unwrap_or_else(|| vec!["assumptions".into(), "certify".into()]) {
        match Check::from_name(&name) {
            Some(ch) if !checks.contains(&ch) => checks.push(ch),
            Some(_) => {}
            None => c.push("", "checks", format!("unknown check \"{name}\"")),
        }
    }
    if obstacles != ObstacleSpec::Gauge {
        for ch in &checks {
            if ch.needs_gauge() {
                c.push("", "checks", format!("check \"{}\" needs gauge obstacles", ch.name()));
            }
        }
    }
    let pipeline_levels = raw.pipeline.as_ref().map(|p| p.levels.clone()).unwrap_or_default();
    if checks.contains(&Check::Pipeline) && pipeline_levels.is_empty() {
        c.push("pipeline", "levels", "check \"pipeline\" needs `pipeline.levels`");
    }
    if pipeline_levels.contains(&0) {
        c.push("pipeline", "levels", "pipeline levels start at 1");
    }

    if !c.errors.is_empty() {
        return Err(Error::Scenario(c.errors));
    }
    let scenario = Scenario {
        name,
        domain: domain.expect("checked"),
        body: body.expect("checked"),
        phi,
        operator: operator.expect("checked"),
        obstacles,
        grid: grid.expect("checked"),
        schedule,
        tol_scale,
        checks,
        seed: raw.seed.unwrap_or(1),
        pipeline_levels,
    };
    validate_resolved(&scenario).map_err(|msg| {
        Error::Scenario(vec![ScenarioError { line: locate(text, "grid", "h").or(locate(text, "grid", "cells")), message: msg }])
    })?;
    if let Err(e) = scenario.penalty_config().validate() {
        return Err(Error::Scenario(vec![ScenarioError { line: locate(text, "solver", "schedule"), message: e.to_string() }]));
    }
    Ok(ParsedScenario { scenario, warnings })
}

/// Checks that depend on several tables at once.
pub fn validate_resolved(scenario: &Scenario) -> std::result::Result<(), String> {
    let cells = scenario.cells_across();
    if cells + 1e-9 < MIN_CELLS_ACROSS as f64 {
        return Err(format!(
            "grid too coarse: {cells:.1} cells across the domain, need at least {MIN_CELLS_ACROSS}"
        ));
    }
    Ok(())
}

pub fn parse_scenario(path: &Path) -> Result<ParsedScenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario_str(&text)
}
