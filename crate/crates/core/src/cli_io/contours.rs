//! Marching squares on node fields, with segments chained into polylines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::grid::{Grid, GridField};

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    /// Closed polylines repeat their first point at the end.
    pub closed: bool,
}

#[derive(Debug, Clone)]
pub struct ContourSet {
    pub level: f64,
    pub polylines: Vec<Polyline>,
}

/// Edge ids: `2k` is the edge from node `k` to its right neighbor, `2k + 1`
/// the edge to its upper neighbor.
fn edge_point(field: &GridField, edge: usize, level: f64) -> [f64; 2] {
    let grid = field.grid;
    let k = edge / 2;
    let other = if edge % 2 == 0 { k + 1 } else { k + grid.nx };
    let (a, b) = (field.values[k], field.values[other]);
    let t = if b == a { 0.5 } else { ((level - a) / (b - a)).clamp(0.0, 1.0) };
    let (p, q) = (grid.point_of(k), grid.point_of(other));
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

fn cell_segments(grid: &Grid, field: &GridField, k: usize, level: f64, out: &mut Vec<(usize, usize)>) {
    let nx = grid.nx;
    let corners = [k, k + 1, k + nx + 1, k + nx];
    let v: Vec<f64> = corners.iter().map(|c| field.values[*c]).collect();
    if v.iter().any(|x| !x.is_finite()) {
        return;
    }
    // bottom, right, top, left
    let edges = [2 * k, 2 * (k + 1) + 1, 2 * (k + nx), 2 * k + 1];
    let above: Vec<bool> = v.iter().map(|x| *x >= level).collect();
    let case = above.iter().enumerate().fold(0usize, |acc, (i, a)| acc | (usize::from(*a) << i));
    let pairs: &[(usize, usize)] = match case {
        0 | 15 => &[],
        1 | 14 => &[(3, 0)],
        2 | 13 => &[(0, 1)],
        3 | 12 => &[(3, 1)],
        4 | 11 => &[(1, 2)],
        6 | 9 => &[(0, 2)],
        7 | 8 => &[(3, 2)],
        5 | 10 => {
            let center_above = (v.iter().sum::<f64>() / 4.0 >= level) == (case == 5);
            if center_above {
                &[(3, 2), (0, 1)]
            } else {
                &[(3, 0), (1, 2)]
            }
        }
        _ => unreachable!(),
    };
    for (a, b) in pairs {
        out.push((edges[*a], edges[*b]));
    }
}

/// Polylines of `{field = level}`; cells with a `nan` corner are skipped.
/// The vertex order is a function of the field alone.
pub fn marching_squares(field: &GridField, level: f64) -> Vec<Polyline> {
    let grid = field.grid;
    let mut segments = Vec::new();
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            cell_segments(&grid, field, grid.index(i, j), level, &mut segments);
        }
    }
    let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(s);
        adjacency.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    let walk = |start: usize, used: &mut Vec<bool>| -> Option<Polyline> {
        let mut edges = vec![start];
        let mut current = start;
        loop {
            let next = adjacency[&current].iter().copied().find(|s| !used[*s]);
            let Some(s) = next else { break };
            used[s] = true;
            let (a, b) = segments[s];
            current = if a == current { b } else { a };
            edges.push(current);
            if current == start {
                break;
            }
        }
        if edges.len() < 2 {
            return None;
        }
        let closed = edges.len() > 2 && edges.first() == edges.last();
        let mut points: Vec<[f64; 2]> = Vec::with_capacity(edges.len());
        for e in &edges {
            // a node exactly at the level puts two edge points on top of each other
            let p = edge_point(field, *e, level);
            if points.last() != Some(&p) {
                points.push(p);
            }
        }
        if closed && points.first() != points.last() {
            points.push(points[0]);
        }
        (points.len() >= 2).then_some(Polyline { points, closed })
    };
    // open chains start at their endpoints, then whatever remains is closed
    let ends: Vec<usize> = adjacency.iter().filter(|(_, s)| s.len() == 1).map(|(e, _)| *e).collect();
    for e in ends {
        if adjacency[&e].iter().all(|s| used[*s]) {
            continue;
        }
        polylines.extend(walk(e, &mut used));
    }
    let starts: Vec<usize> = adjacency.keys().copied().collect();
    for e in starts {
        while adjacency[&e].iter().any(|s| !used[*s]) {
            polylines.extend(walk(e, &mut used));
        }
    }
    polylines
}

/// Contours at each level; levels outside the field's finite range give an
/// empty set and a warning.
pub fn emit_contours(field: &GridField, levels: &[f64]) -> (Vec<ContourSet>, Vec<String>) {
    let finite = field.values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let mut warnings = Vec::new();
    let sets = levels
        .iter()
        .map(|&level| {
            if !(lo..=hi).contains(&level) {
                warnings.push(format!("level {level} outside field range [{lo}, {hi}]; empty contour"));
                return ContourSet { level, polylines: Vec::new() };
            }
            ContourSet { level, polylines: marching_squares(field, level) }
        })
        .collect();
    (sets, warnings)
}

pub fn contours_csv(grid: &Grid, sets: &[ContourSet]) -> String {
    let mut out = super::csv::metadata_line(grid);
    out.push('\n');
    out.push_str("level,polyline,vertex,x,y,closed\n");
    for set in sets {
        for (p, line) in set.polylines.iter().enumerate() {
            for (v, pt) in line.points.iter().enumerate() {
                let _ = writeln!(out, "{:?},{p},{v},{:?},{:?},{}", set.level, pt[0], pt[1], u8::from(line.closed));
            }
        }
    }
    out
}
