//! Grid fields and masks as long-format CSV, one node per row.
//!
//! ```text
//! # grid nx=97 ny=97 h=0.0625 version gradobs-0.1.0
//! i,j,x,y,u
//! 0,0,-3,-3,nan
//! ```
//! Nodes outside the domain hold the literal `nan`. Values are written in
//! shortest round-trip form, so a reloaded field is bit-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};

use super::VERSION;

pub fn metadata_line(grid: &Grid) -> String {
    format!("# grid nx={} ny={} h={:?} version {VERSION}", grid.nx, grid.ny, grid.h)
}

fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        "nan".into()
    }
}

/// CSV text of `field` restricted to `inside` (other nodes become `nan`).
pub fn field_csv(field: &GridField, name: &str, inside: &[bool]) -> String {
    let grid = field.grid;
    let mut out = String::with_capacity(32 * grid.len());
    out.push_str(&metadata_line(&grid));
    out.push('\n');
    let _ = writeln!(out, "i,j,x,y,{name}");
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        let p = grid.point_of(k);
        let v = if inside[k] { field.values[k] } else { f64::NAN };
        let _ = writeln!(out, "{i},{j},{:?},{:?},{}", p[0], p[1], format_value(v));
    }
    out
}

/// CSV text of a boolean mask: `1`/`0` inside, `nan` outside.
pub fn mask_csv(grid: &Grid, mask: &[bool], name: &str, inside: &[bool]) -> String {
    let field = GridField {
        grid: *grid,
        values: mask.iter().map(|m| if *m { 1.0 } else { 0.0 }).collect(),
    };
    field_csv(&field, name, inside)
}

fn bad(path: &str, line: usize, message: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("{path}:{line}: {message}"))
}

/// Parses a field CSV; returns the field and its column name.
pub fn parse_field_csv(text: &str, origin: &str) -> Result<(GridField, String)> {
    let mut lines = text.lines().enumerate();
    let (_, meta) = lines.next().ok_or_else(|| bad(origin, 1, "empty file"))?;
    let mut nx = None;
    let mut ny = None;
    let mut h = None;
    for token in meta.trim_start_matches('#').split_whitespace() {
        if let Some(v) = token.strip_prefix("nx=") {
            nx = v.parse::<usize>().ok();
        } else if let Some(v) = token.strip_prefix("ny=") {
            ny = v.parse::<usize>().ok();
        } else if let Some(v) = token.strip_prefix("h=") {
            h = v.parse::<f64>().ok();
        }
    }
    let (Some(nx), Some(ny), Some(h)) = (nx, ny, h) else {
        return Err(bad(origin, 1, "metadata line needs nx=, ny= and h="));
    };
    let grid = Grid::new(nx, ny, h)?;
    let (_, header) = lines.next().ok_or_else(|| bad(origin, 2, "missing header row"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() != 5 || cols[..4] != ["i", "j", "x", "y"] {
        return Err(bad(origin, 2, "header must be i,j,x,y,<name>"));
    }
    let name = cols[4].to_string();
    let mut values = vec![f64::NAN; grid.len()];
    let mut seen = vec![false; grid.len()];
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad(origin, n + 1, "expected 5 columns"));
        }
        let i: usize = f[0].parse().map_err(|_| bad(origin, n + 1, "bad i"))?;
        let j: usize = f[1].parse().map_err(|_| bad(origin, n + 1, "bad j"))?;
        if i >= nx || j >= ny {
            return Err(bad(origin, n + 1, "node outside the grid"));
        }
        let v: f64 = if f[4] == "nan" { f64::NAN } else { f[4].parse().map_err(|_| bad(origin, n + 1, "bad value"))? };
        let k = grid.index(i, j);
        values[k] = v;
        seen[k] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(bad(origin, 0, "some grid nodes are missing"));
    }
    Ok((GridField { grid, values }, name))
}

pub fn read_field_csv(path: &Path) -> Result<(GridField, String)> {
    let text = std::fs::read_to_string(path)?;
    parse_field_csv(&text, &path.display().to_string())
}
