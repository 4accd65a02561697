//! Parses a scenario from text, runs it into an archive and rechecks the
//! archive from disk.

use gradient_obstacle::cli_io::{check_archive, parse_scenario_str, run};

const SCENARIO: &str = r#"
name = "ellipse-pucci"
seed = 7
checks = ["assumptions", "certify", "theorem2", "prop_3_5", "comparison"]

[domain]
kind = "ellipse"
semi_major = 2.0
semi_minor = 1.2

[body]
given = "K"
kind = "ellipse"
semi_axes = [1.0, 0.8]

[phi]
kind = "zero"

[operator]
kind = "pucci_plus"
lambda = 1.0
big_lambda = 1.5
f = 3.0

[grid]
h = 0.0625
"#;

fn main() -> gradient_obstacle::Result<()> {
    let parsed = parse_scenario_str(SCENARIO)?;
    for w in &parsed.warnings {
        println!("warning: {w}");
    }
    let out = std::env::temp_dir().join("gradobs-scenario-run");
    let outcome = run(&parsed.scenario, &out)?;
    for c in &outcome.checks {
        println!("{}: {}", c.check.name(), if c.pass { "PASS" } else { "FAIL" });
    }
    println!("archive written to {}", outcome.out_dir.display());
    let recheck = check_archive(&out)?;
    println!("recheck: {:?}, {} mismatch(es)", recheck.status, recheck.mismatches.len());
    Ok(())
}
