//! Plain-text persistence.
//!
//! Density snapshot:
//!
//! ```text
//! # density v1
//! nx ny
//! x_min x_max y_min y_max
//! time
//! <ny lines of nx values, row j = 0 first>
//! ```
//!
//! CSV files start with `# schema=1`, then a header row. Floats are written
//! in the shortest form that parses back to the same bits.

use std::fmt::Display;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::ensemble::ParticleEnsemble;
use crate::error::{MotError, Result};
use crate::grid::{DensityField, Grid2D};

pub const SCHEMA_LINE: &str = "# schema=1";
pub const DENSITY_MAGIC: &str = "# density v1";

pub const DIAGNOSTICS_HEADER: [&str; 13] = [
    "time",
    "mass",
    "l1",
    "l2",
    "linf",
    "m2",
    "m4",
    "entropy",
    "exp_moment",
    "covariance_stat",
    "symmetry_defect",
    "w1_sliced",
    "w1_exact_coarse",
];

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| MotError::io(dir, e))?;
    }
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| MotError::io(path, e))
}

fn format_err(path: &Path, reason: impl Into<String>) -> MotError {
    MotError::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn write_density(path: impl AsRef<Path>, rho: &DensityField) -> Result<()> {
    let path = path.as_ref();
    let g = rho.grid();
    let mut w = create(path)?;
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "{DENSITY_MAGIC}")?;
        writeln!(w, "{} {}", g.nx(), g.ny())?;
        writeln!(w, "{} {} {} {}", g.x_min(), g.x_max(), g.y_min(), g.y_max())?;
        writeln!(w, "{}", rho.time)?;
        for row in rho.values().chunks(g.nx()) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        w.flush()
    };
    body().map_err(|e| MotError::io(path, e))
}

pub fn read_density(path: impl AsRef<Path>) -> Result<DensityField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| MotError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(DENSITY_MAGIC) {
        return Err(format_err(path, format!("first line must be `{DENSITY_MAGIC}`")));
    }
    let mut header = |what: &str| {
        lines
            .next()
            .ok_or_else(|| format_err(path, format!("missing {what} line")))
            .map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
    };
    let dims = header("size")?;
    let bounds = header("bounds")?;
    let time = header("time")?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| format_err(path, format!("bad number `{s}`")));
    let cnt = |s: &str| s.parse::<usize>().map_err(|_| format_err(path, format!("bad count `{s}`")));
    if dims.len() != 2 || bounds.len() != 4 || time.len() != 1 {
        return Err(format_err(path, "malformed header"));
    }
    let grid = Grid2D::new(
        cnt(&dims[0])?,
        cnt(&dims[1])?,
        num(&bounds[0])?,
        num(&bounds[1])?,
        num(&bounds[2])?,
        num(&bounds[3])?,
    )?;
    let values = lines
        .flat_map(str::split_whitespace)
        .map(num)
        .collect::<Result<Vec<_>>>()?;
    DensityField::new(grid, values, num(&time[0])?).map_err(|e| format_err(path, e.to_string()))
}

/// Write `# schema=1`, the header and the rows.
pub fn write_csv<R, C>(path: impl AsRef<Path>, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = C>,
    C: IntoIterator,
    C::Item: Display,
{
    let path = path.as_ref();
    let mut w = create(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(w, "{SCHEMA_LINE}")?;
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()
    };
    body().map_err(|e| MotError::io(path, e))
}

/// Parsed CSV: header names and rows of raw fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| MotError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(SCHEMA_LINE) {
        return Err(format_err(path, format!("first line must be `{SCHEMA_LINE}`")));
    }
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| format_err(path, "missing header row"))?
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows: Vec<Vec<String>> = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    if let Some(k) = rows.iter().position(|r| r.len() != header.len()) {
        return Err(format_err(path, format!("row {} has {} fields", k + 1, rows[k].len())));
    }
    Ok(CsvTable { header, rows })
}

pub fn write_ensemble(path: impl AsRef<Path>, e: &ParticleEnsemble) -> Result<()> {
    write_csv(path, &["x", "y"], e.positions().iter().map(|p| [p[0], p[1]]))
}

pub fn read_ensemble_positions(path: impl AsRef<Path>) -> Result<Vec<[f64; 2]>> {
    let path = path.as_ref();
    let t = read_csv(path)?;
    if t.header != ["x", "y"] {
        return Err(format_err(path, "expected header `x,y`"));
    }
    t.rows
        .iter()
        .map(|r| {
            let x = r[0].parse::<f64>();
            let y = r[1].parse::<f64>();
            match (x, y) {
                (Ok(x), Ok(y)) => Ok([x, y]),
                _ => Err(format_err(path, format!("bad row `{}`", r.join(",")))),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Diagnostics fields in [`DIAGNOSTICS_HEADER`] order; absent values are
/// empty fields.
pub fn diagnostics_row(r: &DiagnosticsRecord) -> Vec<String> {
    vec![
        r.time.to_string(),
        r.mass.to_string(),
        r.l1.to_string(),
        r.l2.to_string(),
        r.linf.to_string(),
        r.m2.to_string(),
        r.m4.to_string(),
        r.entropy.to_string(),
        r.exp_moment.to_string(),
        r.covariance_stat.to_string(),
        opt(r.symmetry_defect),
        opt(r.w1_sliced),
        opt(r.w1_exact_coarse),
    ]
}

pub fn write_diagnostics(path: impl AsRef<Path>, records: &[DiagnosticsRecord]) -> Result<()> {
    write_csv(path, &DIAGNOSTICS_HEADER, records.iter().map(diagnostics_row))
}
