use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use stargen::{PhaseGrid, C64};

use crate::CliError;

/// Floats in CSV carry 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes to `path`, or to standard output when there is none.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

/// Coordinate names in output order: `q1..qN, p1..pN` (no suffix for N=1).
pub fn coordinate_names(n: usize) -> Vec<String> {
    let name = |c: char, i: usize| if n == 1 { c.to_string() } else { format!("{c}{}", i + 1) };
    (0..n).map(|i| name('q', i)).chain((0..n).map(|i| name('p', i))).collect()
}

/// Reorders an internal `(p, q)` point to `(q, p)`.
pub fn q_first(z: &[f64]) -> Vec<f64> {
    let n = z.len() / 2;
    z[n..].iter().chain(&z[..n]).copied().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisMeta {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub step: f64,
    pub len: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridMeta {
    pub axes: Vec<AxisMeta>,
    pub points: usize,
}

impl GridMeta {
    pub fn of(grid: &PhaseGrid) -> Self {
        let n = grid.config.dim_n;
        let names = coordinate_names(n);
        let user_axes = grid.axes[n..].iter().chain(&grid.axes[..n]);
        let axes = names
            .into_iter()
            .zip(user_axes)
            .map(|(name, a)| AxisMeta { name, min: a.min, max: a.max, step: a.step, len: a.len() })
            .collect();
        Self { axes, points: grid.len() }
    }
}

pub fn grid_csv(grid: &PhaseGrid, values: &[C64]) -> String {
    let n = grid.config.dim_n;
    let mut out = coordinate_names(n).join(",");
    out.push_str(",re,im\n");
    for (z, v) in grid.points().iter().zip(values) {
        for x in q_first(z) {
            out.push_str(&num(x));
            out.push(',');
        }
        let _ = writeln!(out, "{},{}", num(v.re), num(v.im));
    }
    out
}

pub fn grid_rows(grid: &PhaseGrid, values: &[C64]) -> Vec<Vec<f64>> {
    grid.points()
        .iter()
        .zip(values)
        .map(|(z, v)| {
            let mut row = q_first(z);
            row.push(v.re);
            row.push(v.im);
            row
        })
        .collect()
}
