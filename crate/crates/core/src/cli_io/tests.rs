use super::*;
use crate::domain::DomainKind;
use crate::error::Error;
use crate::grid::{Grid, GridField};
use proptest::prelude::*;

const MINIMAL: &str = r#"
name = "minimal"

[domain]
kind = "disc"
radius = 1.0

[body]
kind = "ball"
radius = 1.0

[operator]
kind = "poisson"
f = 1.0

[grid]
h = 0.0625
"#;

fn errors(text: &str) -> Vec<crate::error::ScenarioError> {
    match parse_scenario_str(text) {
        Err(Error::Scenario(list)) => list,
        other => panic!("expected scenario errors, got {other:?}"),
    }
}

#[test]
fn presets_parse_and_round_trip() {
    for name in preset_names() {
        let parsed = load_preset(name).unwrap();
        assert_eq!(parsed.scenario.name, name);
        assert!(parsed.warnings.is_empty());
        let again = parse_scenario_str(&parsed.scenario.render()).unwrap().scenario;
        assert_eq!(again, parsed.scenario, "{name}");
    }
    assert!(load_preset("nope").is_err());
}

#[test]
fn defaults_fill_optional_tables() {
    let s = parse_scenario_str(MINIMAL).unwrap().scenario;
    assert_eq!(s.domain, DomainKind::Disc { radius: 1.0 });
    assert_eq!(s.schedule, ScheduleSpec::Standard);
    assert_eq!(s.checks, vec![Check::Assumptions, Check::Certify]);
    assert_eq!(s.obstacles, ObstacleSpec::Gauge);
}

#[test]
fn missing_key_reports_line() {
    let text = MINIMAL.replace("radius = 1.0\n\n[body]", "\n\n[body]");
    let errs = errors(&text);
    assert_eq!(errs.len(), 1);
    assert!(errs[0].message.contains("domain.radius"), "{:?}", errs);
    // falls back to the table header line
    assert_eq!(errs[0].line, Some(4));
}

#[test]
fn unknown_kind_and_field() {
    let errs = errors(&MINIMAL.replace("kind = \"poisson\"", "kind = \"heat\""));
    assert!(errs[0].message.contains("unknown operator kind"));
    assert_eq!(errs[0].line, Some(13));
    let errs = errors(&MINIMAL.replace("f = 1.0", "f = 1.0\ng = 2.0"));
    assert!(errs[0].message.contains("unknown field"), "{:?}", errs);
    assert_eq!(errs[0].line, Some(15));
}

#[test]
fn clockwise_polygon_is_reversed() {
    let text = MINIMAL.replace(
        "kind = \"ball\"\nradius = 1.0",
        "kind = \"polygon\"\nvertices = [[1.0, 0.0], [0.0, -1.0], [-1.0, 0.0], [0.0, 1.0]]",
    );
    let parsed = parse_scenario_str(&text).unwrap();
    assert_eq!(parsed.warnings.len(), 1);
    assert!(parsed.warnings[0].contains("reversed"));
    match &parsed.scenario.body.shape {
        BodyShape::Polygon { vertices } => assert_eq!(vertices[0], [0.0, 1.0]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn polygon_validation_errors() {
    let shifted = MINIMAL.replace(
        "kind = \"ball\"\nradius = 1.0",
        "kind = \"polygon\"\nvertices = [[1.0, 1.0], [2.0, 1.0], [2.0, 2.0], [1.0, 2.0]]",
    );
    let errs = errors(&shifted);
    assert!(errs[0].message.contains("origin not interior"), "{errs:?}");
    assert_eq!(errs[0].line, Some(10));
    let nonconvex = MINIMAL.replace(
        "kind = \"ball\"\nradius = 1.0",
        "kind = \"polygon\"\nvertices = [[1.0, 0.0], [0.1, 0.1], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]",
    );
    assert!(errors(&nonconvex)[0].message.contains("convex"));
}

#[test]
fn coarse_grid_rejected() {
    let errs = errors(&MINIMAL.replace("h = 0.0625", "h = 0.1"));
    assert!(errs[0].message.contains("grid too coarse"));
    assert_eq!(errs[0].line, Some(17));
    let s = parse_scenario_str(MINIMAL).unwrap().scenario;
    let o = Overrides { grid_cells: Some(16), ..Default::default() };
    assert!(apply_overrides(s.clone(), &o).is_err());
    let o = Overrides { grid_cells: Some(40), tol_scale: Some(2.0), ..Default::default() };
    let s = apply_overrides(s, &o).unwrap();
    assert!((s.h() - 0.05).abs() < 1e-15 && s.tol_scale == 2.0);
}

#[test]
fn syntax_error_has_line() {
    let errs = errors(&MINIMAL.replace("radius = 1.0\n\n[body]", "radius = = 1.0\n\n[body]"));
    assert_eq!(errs[0].line, Some(6));
}

#[test]
fn schedule_strings() {
    assert_eq!(ScheduleSpec::parse("standard").unwrap(), ScheduleSpec::Standard);
    let s = ScheduleSpec::parse("4:1, 2:0.5,0:0.01").unwrap();
    assert_eq!(s, ScheduleSpec::Custom(vec![(4.0, 1.0), (2.0, 0.5), (0.0, 0.01)]));
    assert!(ScheduleSpec::parse("4-1").is_err());
    let c = s.config(0.1, 1.0);
    assert_eq!(c.schedule.len(), 3);
    assert!((c.schedule[0].epsilon - 0.4).abs() < 1e-15);
}

#[test]
fn csv_round_trip_is_exact() {
    let grid = Grid::new(7, 5, 0.1).unwrap();
    let field = GridField::from_fn(grid, |x| (x[0] * 3.7).sin() / 3.0 + x[1]);
    let inside: Vec<bool> = (0..grid.len()).map(|k| k % 3 != 0).collect();
    let text = field_csv(&field, "u", &inside);
    assert!(text.starts_with("# grid nx=7 ny=5 h=0.1 version gradobs-"));
    assert!(text.lines().nth(1) == Some("i,j,x,y,u"));
    let (back, name) = parse_field_csv(&text, "mem").unwrap();
    assert_eq!(name, "u");
    for k in 0..grid.len() {
        if inside[k] {
            assert_eq!(back.values[k].to_bits(), field.values[k].to_bits());
        } else {
            assert!(back.values[k].is_nan());
        }
    }
    assert!(parse_field_csv("i,j\n", "mem").is_err());
}

#[test]
fn contour_of_cone_is_circle() {
    let h = 1.0 / 32.0;
    let grid = Grid::covering([2.0, 2.0], h, 2).unwrap();
    let rho = GridField::from_fn(grid, |x| {
        let r = x[0].hypot(x[1]);
        if r <= 2.0 { 2.0 - r } else { f64::NAN }
    });
    let (sets, warnings) = emit_contours(&rho, &[0.5, 5.0]);
    assert_eq!(warnings.len(), 1);
    assert!(sets[1].polylines.is_empty());
    let lines = &sets[0].polylines;
    assert_eq!(lines.len(), 1);
    assert!(lines[0].closed);
    let dev = lines[0].points.iter().map(|p| (p[0].hypot(p[1]) - 1.5).abs()).fold(0.0, f64::max);
    assert!(dev <= h, "{dev}");
    // deterministic
    let (again, _) = emit_contours(&rho, &[0.5]);
    assert_eq!(again[0].polylines, sets[0].polylines);
    let csv = contours_csv(&grid, &sets);
    assert_eq!(csv.lines().nth(1), Some("level,polyline,vertex,x,y,closed"));
}

#[test]
fn open_contour_on_a_ramp() {
    let grid = Grid::new(9, 9, 0.25).unwrap();
    let ramp = GridField::from_fn(grid, |x| x[0]);
    let lines = marching_squares(&ramp, 0.1);
    assert_eq!(lines.len(), 1);
    assert!(!lines[0].closed);
    assert_eq!(lines[0].points.len(), 9);
    assert!(lines[0].points.iter().all(|p| (p[0] - 0.1).abs() < 1e-12));
}

proptest! {
    #[test]
    fn contour_vertices_interpolate_level(a in -1.0f64..1.0, b in -1.0f64..1.0, level in -0.5f64..0.5) {
        let grid = Grid::new(11, 11, 0.2).unwrap();
        let f = GridField::from_fn(grid, |x| a * x[0] + b * x[1] + x[0] * x[1]);
        for line in marching_squares(&f, level) {
            for p in &line.points {
                // bilinear exact on edges for this field
                prop_assert!((a * p[0] + b * p[1] + p[0] * p[1] - level).abs() < 1e-9);
            }
        }
    }
}
