//! CSV writers and readers for snapshots, mesh dumps and time series.
//!
//! All files use LF line endings and numbers with 9 significant digits.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{NodeKind, PhaseGrid};
use crate::io::diagnostics::DiagnosticsRecord;
use crate::mesh::ActiveSet;
use crate::mra2d::{Grid2, SparseRep};

pub const SNAPSHOT_HEADER: &str = "x,v,f";
pub const MESH_HEADER: &str = "level,k1,k2,kind,value,detail";
pub const TIMESERIES_HEADER: &str = "t,mass,l1,l2,fmax,e_energy,active,ratio";

/// Formats like C's `%.9g`.
pub fn fmt_g9(value: f64) -> String {
    const DIGITS: i32 = 9;
    if value == 0.0 {
        return if value.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !value.is_finite() {
        return format!("{value}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{value:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes finest-grid samples, x-major.
pub fn write_snapshot(grid: &PhaseGrid, f: &Grid2, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let mut body = String::with_capacity(f.data.len() * 40);
    body.push_str(SNAPSHOT_HEADER);
    body.push('\n');
    for i in 0..f.nx {
        for j in 0..f.nv {
            let (x, v) = grid.fine_coords((i, j));
            body.push_str(&format!("{},{},{}\n", fmt_g9(x), fmt_g9(v), fmt_g9(f.get(i, j))));
        }
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

/// One record per active node. Coarse nodes report their nodal value as
/// `value` and 0 as `detail`; detail nodes report both.
pub fn write_mesh(rep: &SparseRep, path: &Path) -> Result<()> {
    write_mesh_rows(rep.active_nodes().into_iter().map(|(n, value, detail)| MeshRow {
        level: n.level,
        k1: n.k1,
        k2: n.k2,
        kind: n.kind,
        value,
        detail,
    }), path)
}

/// Mesh dump of an active set without values (dense runs, predicted sets).
pub fn write_active_set(set: &ActiveSet, path: &Path) -> Result<()> {
    write_mesh_rows(set.nodes().map(|n| MeshRow {
        level: n.level,
        k1: n.k1,
        k2: n.k2,
        kind: n.kind,
        value: 0.0,
        detail: 0.0,
    }), path)
}

fn write_mesh_rows(rows: impl Iterator<Item = MeshRow>, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let mut body = String::new();
    body.push_str(MESH_HEADER);
    body.push('\n');
    for r in rows {
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.level,
            r.k1,
            r.k2,
            r.kind,
            fmt_g9(r.value),
            fmt_g9(r.detail)
        ));
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

fn timeseries_row(r: &DiagnosticsRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}\n",
        fmt_g9(r.t),
        fmt_g9(r.mass),
        fmt_g9(r.l1),
        fmt_g9(r.l2),
        fmt_g9(r.fmax),
        fmt_g9(r.e_energy),
        r.active,
        fmt_g9(r.ratio)
    )
}

/// Truncates `path` and writes the time-series header.
pub fn start_timeseries(path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{TIMESERIES_HEADER}").map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

/// Appends one row; the header is written first if the file is new or empty.
pub fn append_timeseries(record: &DiagnosticsRecord, path: &Path) -> Result<()> {
    let empty = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    if empty {
        text.push_str(TIMESERIES_HEADER);
        text.push('\n');
    }
    text.push_str(&timeseries_row(record));
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotRow {
    pub x: f64,
    pub v: f64,
    pub f: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshRow {
    pub level: u32,
    pub k1: i64,
    pub k2: i64,
    pub kind: NodeKind,
    pub value: f64,
    pub detail: f64,
}

struct CsvReader {
    path: PathBuf,
    lines: std::iter::Enumerate<std::io::Lines<BufReader<File>>>,
}

impl CsvReader {
    fn open(path: &Path, header: &str) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = CsvReader {
            path: path.to_path_buf(),
            lines: BufReader::new(file).lines().enumerate(),
        };
        match reader.next_fields()? {
            Some((_, fields)) if fields.join(",") == header => Ok(reader),
            _ => Err(reader.error(1, format!("expected header `{header}`"))),
        }
    }

    fn error(&self, line: usize, message: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message,
        }
    }

    fn next_fields(&mut self) -> Result<Option<(usize, Vec<String>)>> {
        loop {
            match self.lines.next() {
                None => return Ok(None),
                Some((i, line)) => {
                    let line = line.map_err(|e| Error::io(&self.path, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let fields = line.split(',').map(|s| s.trim().to_string()).collect();
                    return Ok(Some((i + 1, fields)));
                }
            }
        }
    }

    fn rows<T>(
        mut self,
        width: usize,
        mut parse: impl FnMut(&[String]) -> std::result::Result<T, String>,
    ) -> Result<Vec<T>> {
        let mut out = Vec::new();
        while let Some((line, fields)) = self.next_fields()? {
            if fields.len() != width {
                return Err(self.error(line, format!("expected {width} fields, found {}", fields.len())));
            }
            out.push(parse(&fields).map_err(|m| self.error(line, m))?);
        }
        Ok(out)
    }
}

fn num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse `{s}`"))
}

pub fn read_snapshot(path: &Path) -> Result<Vec<SnapshotRow>> {
    CsvReader::open(path, SNAPSHOT_HEADER)?.rows(3, |f| {
        Ok(SnapshotRow {
            x: num(&f[0])?,
            v: num(&f[1])?,
            f: num(&f[2])?,
        })
    })
}

pub fn read_mesh(path: &Path) -> Result<Vec<MeshRow>> {
    CsvReader::open(path, MESH_HEADER)?.rows(6, |f| {
        Ok(MeshRow {
            level: num(&f[0])?,
            k1: num(&f[1])?,
            k2: num(&f[2])?,
            kind: NodeKind::parse(&f[3]).ok_or_else(|| format!("unknown node kind `{}`", f[3]))?,
            value: num(&f[4])?,
            detail: num(&f[5])?,
        })
    })
}

pub fn read_timeseries(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    CsvReader::open(path, TIMESERIES_HEADER)?.rows(8, |f| {
        Ok(DiagnosticsRecord {
            t: num(&f[0])?,
            mass: num(&f[1])?,
            l1: num(&f[2])?,
            l2: num(&f[3])?,
            fmax: num(&f[4])?,
            e_energy: num(&f[5])?,
            active: num(&f[6])?,
            ratio: num(&f[7])?,
        })
    })
}

/// Rebuilds a dense grid from snapshot rows in file order, given its dimensions.
pub fn snapshot_to_grid(rows: &[SnapshotRow], nx: usize, nv: usize) -> Result<Grid2> {
    if rows.len() != nx * nv {
        return Err(Error::MalformedGrid(format!(
            "snapshot has {} rows, expected {nx} x {nv}",
            rows.len()
        )));
    }
    Ok(Grid2 {
        nx,
        nv,
        data: rows.iter().map(|r| r.f).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_formatting() {
        assert_eq!(fmt_g9(0.0), "0");
        assert_eq!(fmt_g9(1.0), "1");
        assert_eq!(fmt_g9(0.125), "0.125");
        assert_eq!(fmt_g9(-2.5), "-2.5");
        assert_eq!(fmt_g9(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt_g9(1.0e-7), "1e-07");
        assert_eq!(fmt_g9(1.2345678912e10), "1.23456789e+10");
        assert_eq!(fmt_g9(123456789.0), "123456789");
        assert_eq!(fmt_g9(0.0001), "0.0001");
    }

    #[test]
    fn g9_round_trip_precision() {
        for &x in &[1.0 / 3.0, -7.123456789123, 6.02e23, 1e-300, 0.999999999999] {
            let y: f64 = fmt_g9(x).parse().unwrap();
            assert!(((x - y) / x).abs() <= 5e-9, "{x} -> {y}");
        }
    }
}
