//! Scenario files, runs, archives and plot data for the `gradobs` binary.

pub mod contours;
pub mod csv;
pub mod presets;
pub mod run;
pub mod scenario;

pub use contours::{contours_csv, emit_contours, marching_squares, ContourSet, Polyline};
pub use csv::{field_csv, mask_csv, parse_field_csv, read_field_csv};
pub use presets::{load_preset, preset_names, preset_text, PRESETS};
pub use run::{
    apply_overrides, check_archive, evaluate, run, setup, ArchiveCheck, CheckOutcome, ExitStatus, Overrides, RunOutcome,
    Setup,
};
pub use scenario::{
    parse_scenario, parse_scenario_str, BodyShape, BodySpec, Check, GridSpec, ObstacleSpec, ParsedScenario, Scenario,
    ScheduleSpec, MIN_CELLS_ACROSS,
};

/// Version tag written into every CSV.
pub const VERSION: &str = concat!("gradobs-", env!("CARGO_PKG_VERSION"));

#[cfg(test)]
mod tests;
