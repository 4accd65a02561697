//! `gradobs`: run scenarios, recheck archives, extract contours, list presets.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gradient_obstacle::cli_io::{
    apply_overrides, check_archive, contours_csv, emit_contours, load_preset, parse_scenario, preset_names,
    preset_text, read_field_csv, run, ExitStatus, Overrides, ParsedScenario, ScheduleSpec,
};
use gradient_obstacle::Error;

#[derive(Parser)]
#[command(name = "gradobs", version, about = "Double obstacle problems with gauge obstacles and gradient-constraint checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario (file path or preset name) and write an archive.
    Run {
        scenario: String,
        /// Archive directory [default: runs/<scenario name>]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cells across the domain's bounding box.
        #[arg(long)]
        grid: Option<usize>,
        /// `standard` or `eps_cells:delta,...`
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long)]
        tol_scale: Option<f64>,
        /// Print the resolved scenario and stop.
        #[arg(long)]
        dry_run: bool,
    },
    /// Rerun the checks of an archive on its stored field.
    Check { archive: PathBuf },
    /// Marching-squares polylines of a field CSV.
    Contours {
        field: PathBuf,
        /// Comma-separated levels.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        levels: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List bundled presets, or print one.
    Presets { name: Option<String> },
}

fn status_of(error: &Error) -> ExitStatus {
    match error {
        Error::NonConvergence { .. } | Error::LinearSolve(_) => ExitStatus::SolverFail,
        _ => ExitStatus::InputError,
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn load(spec: &str) -> Result<ParsedScenario, Error> {
    let path = Path::new(spec);
    if path.exists() {
        parse_scenario(path)
    } else if preset_text(spec).is_some() {
        load_preset(spec)
    } else {
        Err(Error::InvalidArgument(format!("no scenario file or preset named {spec:?}")))
    }
}

fn execute(command: Command) -> Result<ExitStatus, Error> {
    match command {
        Command::Run { scenario, out, grid, schedule, tol_scale, dry_run } => {
            let parsed = load(&scenario)?;
            for w in &parsed.warnings {
                eprintln!("warning: {w}");
            }
            let schedule = schedule.map(|s| ScheduleSpec::parse(&s)).transpose().map_err(Error::InvalidArgument)?;
            let scenario = apply_overrides(parsed.scenario, &Overrides { grid_cells: grid, schedule, tol_scale })?;
            if dry_run {
                emit(&scenario.render());
                return Ok(ExitStatus::Pass);
            }
            let out = out.unwrap_or_else(|| PathBuf::from("runs").join(&scenario.name));
            let outcome = run(&scenario, &out)?;
            for c in &outcome.checks {
                emit(&format!("{}: {}\n", c.check.name(), if c.pass { "PASS" } else { "FAIL" }));
            }
            emit(&format!("archive: {}\n", outcome.out_dir.display()));
            Ok(outcome.status)
        }
        Command::Check { archive } => {
            let result = check_archive(&archive)?;
            for c in &result.checks {
                emit(&format!("{}: {}\n", c.check.name(), if c.pass { "PASS" } else { "FAIL" }));
            }
            for m in &result.mismatches {
                emit(&format!("mismatch: {m}\n"));
            }
            Ok(result.status)
        }
        Command::Contours { field, levels, out } => {
            let (values, _) = read_field_csv(&field)?;
            let (sets, warnings) = emit_contours(&values, &levels);
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let text = contours_csv(&values.grid, &sets);
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => emit(&text),
            }
            Ok(ExitStatus::Pass)
        }
        Command::Presets { name } => {
            match name {
                Some(n) => match preset_text(&n) {
                    Some(t) => emit(t),
                    None => return Err(Error::InvalidArgument(format!("unknown preset {n:?}"))),
                },
                None => emit(&preset_names().map(|n| format!("{n}\n")).collect::<String>()),
            }
            Ok(ExitStatus::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ExitStatus::InputError.code() as u8 } else { 0 });
        }
    };
    let status = execute(cli.command).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        status_of(&e)
    });
    ExitCode::from(status.code() as u8)
}
