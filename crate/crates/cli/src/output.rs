//! Artifact formats: scan CSV, generic tables, 16-bit PGM heatmaps.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ramsey_wigner::ramsey::{GridMetadata, WignerGrid, CONTRAST_UNITS};

use crate::error::CliError;

pub const SCAN_HEADER: &str = "x_over_dx0,p_over_dp0,contrast";

/// One row per point, x outer and p inner. Values use the shortest decimal
/// form that reads back to the same f64.
pub fn grid_to_csv(grid: &WignerGrid) -> String {
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for (ix, x) in grid.x.iter().enumerate() {
        for (ip, p) in grid.p.iter().enumerate() {
            writeln!(out, "{x},{p},{}", grid.get(ix, ip)).unwrap();
        }
    }
    out
}

fn push_unique(axis: &mut Vec<f64>, v: f64) -> usize {
    match axis.iter().position(|a| a.to_bits() == v.to_bits()) {
        Some(i) => i,
        None => {
            axis.push(v);
            axis.len() - 1
        }
    }
}

/// Reads a scan CSV written by [`grid_to_csv`].
pub fn grid_from_csv(text: &str, source: &str) -> Result<WignerGrid, CliError> {
    let bad = |line: usize, msg: &str| CliError::Config(format!("{source}:{line}: {msg}"));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SCAN_HEADER => {}
        _ => return Err(bad(1, &format!("expected header {SCAN_HEADER}"))),
    }
    let (mut xs, mut ps, mut points) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let [x, p, c] = cols[..] else {
            return Err(bad(i + 1, "expected three columns"));
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(i + 1, &format!("bad number {s:?}")))
        };
        let (x, p, c) = (num(x)?, num(p)?, num(c)?);
        points.push((push_unique(&mut xs, x), push_unique(&mut ps, p), c));
    }
    let mut values = vec![f64::NAN; xs.len() * ps.len()];
    let mut seen = vec![false; values.len()];
    for (ix, ip, c) in points {
        let k = ix * ps.len() + ip;
        if seen[k] {
            return Err(bad(0, "duplicate grid point"));
        }
        seen[k] = true;
        values[k] = c;
    }
    if seen.iter().any(|s| !s) {
        return Err(bad(0, "points do not form a full rectangular grid"));
    }
    WignerGrid::new(
        xs,
        ps,
        values,
        GridMetadata {
            units: CONTRAST_UNITS.into(),
            schedule_hash: String::new(),
            source: source.into(),
        },
    )
    .map_err(|e| CliError::Config(format!("{source}: {e}")))
}

/// Plain CSV table with a header row.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// Colormap range and layout of a heatmap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgmSidecar {
    pub min: f64,
    pub max: f64,
    pub width: usize,
    pub height: usize,
    /// [first, last] values along each image axis.
    pub x_range: [f64; 2],
    pub p_range: [f64; 2],
    pub orientation: String,
    pub units: String,
    /// Gray level used for missing points.
    pub nan_level: u16,
}

/// 16-bit binary PGM: x runs left to right, p bottom to top. Values map
/// linearly from [min, max] onto 1..=65535; NaN points are 0.
pub fn grid_to_pgm(grid: &WignerGrid) -> (Vec<u8>, PgmSidecar) {
    let finite = grid.values.iter().copied().filter(|v| v.is_finite());
    let min = finite.clone().fold(f64::INFINITY, f64::min);
    let max = finite.fold(f64::NEG_INFINITY, f64::max);
    let (min, max) = if min.is_finite() {
        (min, max)
    } else {
        (0.0, 0.0)
    };
    let (w, h) = (grid.x.len(), grid.p.len());
    let mut bytes = format!("P5\n{w} {h}\n65535\n").into_bytes();
    for row in (0..h).rev() {
        for ix in 0..w {
            let v = grid.get(ix, row);
            let level = if !v.is_finite() {
                0
            } else if max > min {
                1 + ((v - min) / (max - min) * 65534.0).round() as u16
            } else {
                32768
            };
            bytes.extend_from_slice(&level.to_be_bytes());
        }
    }
    let ends = |a: &[f64]| {
        [
            a.first().copied().unwrap_or(0.0),
            a.last().copied().unwrap_or(0.0),
        ]
    };
    let sidecar = PgmSidecar {
        min,
        max,
        width: w,
        height: h,
        x_range: ends(&grid.x),
        p_range: ends(&grid.p),
        orientation: "columns: x ascending left to right; rows: p descending top to bottom".into(),
        units: grid.metadata.units.clone(),
        nan_level: 0,
    };
    (bytes, sidecar)
}

/// Decodes a PGM written by [`grid_to_pgm`] into (width, height, levels).
pub fn read_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u16>), CliError> {
    let bad = |m: &str| CliError::Config(format!("pgm: {m}"));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header"))?);
    }
    if fields[0] != "P5" || fields[3] != "65535" {
        return Err(bad("not a 16-bit P5 image"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad size"));
    let (w, h) = (num(fields[1])?, num(fields[2])?);
    let data = &bytes[pos + 1..];
    if data.len() != 2 * w * h {
        return Err(bad("pixel data has the wrong length"));
    }
    let levels = data
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok((w, h, levels))
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
