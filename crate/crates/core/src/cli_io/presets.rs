//! Bundled scenarios.

use crate::error::{Error, Result};

use super::scenario::{parse_scenario_str, ParsedScenario};

pub const PRESETS: [(&str, &str); 8] = [
    ("torsion-disc-R1", include_str!("../../presets/torsion-disc-R1.toml")),
    ("torsion-disc-R3", include_str!("../../presets/torsion-disc-R3.toml")),
    ("torsion-square-constraint", include_str!("../../presets/torsion-square-constraint.toml")),
    ("ellipse-ridge", include_str!("../../presets/ellipse-ridge.toml")),
    ("pucci-disc", include_str!("../../presets/pucci-disc.toml")),
    ("bellman-disc", include_str!("../../presets/bellman-disc.toml")),
    ("affine-phi-disc", include_str!("../../presets/affine-phi-disc.toml")),
    ("appendix-xdep-linear", include_str!("../../presets/appendix-xdep-linear.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load_preset(name: &str) -> Result<ParsedScenario> {
    let text = preset_text(name).ok_or_else(|| {
        Error::InvalidArgument(format!("unknown preset \"{name}\"; known: {}", preset_names().collect::<Vec<_>>().join(", ")))
    })?;
    parse_scenario_str(text)
}
