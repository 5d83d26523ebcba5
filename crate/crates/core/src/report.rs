//! CSV tables and atomic file output.
//!
//! Floats are written with 17 significant digits so every value re-reads to the
//! same `f64`.

use crate::error::{Error, Result};
use crate::finite_section::ConvergenceRow;
use crate::periodic::{PeriodicComparison, PeriodicSeq};
use crate::seq::FiniteSeq;
use num_complex::Complex64;
use std::io::Write;
use std::path::Path;

pub const DUAL_HEADER: [&str; 4] = ["channel", "k", "re", "im"];
pub const CONVERGENCE_HEADER: [&str; 6] =
    ["N", "channel", "measured_err", "bound", "cond_N", "lambda"];
pub const PERIODIC_HEADER: [&str; 7] = [
    "N",
    "L",
    "channel",
    "measured_err",
    "bound",
    "reference_bound",
    "lambda",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(&r).map_err(io_err)?;
    }
    w.into_inner().map_err(io_err)
}

/// One row per sample: `channel, k, re, im`.
pub fn dual_csv(duals: &[FiniteSeq]) -> Result<Vec<u8>> {
    let rows = duals.iter().enumerate().flat_map(|(m, d)| {
        d.iter()
            .map(move |(k, v)| vec![m.to_string(), k.to_string(), fmt_f64(v.re), fmt_f64(v.im)])
    });
    table(&DUAL_HEADER, rows)
}

/// Residues `0..L` in the `k` column.
pub fn periodic_dual_csv(duals: &[PeriodicSeq]) -> Result<Vec<u8>> {
    let rows = duals.iter().enumerate().flat_map(|(m, d)| {
        d.values()
            .iter()
            .enumerate()
            .map(move |(r, v)| vec![m.to_string(), r.to_string(), fmt_f64(v.re), fmt_f64(v.im)])
    });
    table(&DUAL_HEADER, rows)
}

pub fn parse_dual_csv(bytes: &[u8]) -> Result<Vec<FiniteSeq>> {
    let mut rd = csv::Reader::from_reader(bytes);
    let header = rd.headers().map_err(io_err)?.clone();
    if header.iter().ne(DUAL_HEADER) {
        return Err(Error::InvalidInput(format!(
            "unexpected dual header {header:?}"
        )));
    }
    let mut channels: Vec<Vec<(i64, Complex64)>> = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(io_err)?;
        let field = |i: usize| rec.get(i).ok_or_else(|| io_err("short row"));
        let m: usize = field(0)?.parse().map_err(io_err)?;
        let k: i64 = field(1)?.parse().map_err(io_err)?;
        let re: f64 = field(2)?.parse().map_err(io_err)?;
        let im: f64 = field(3)?.parse().map_err(io_err)?;
        if channels.len() <= m {
            channels.resize(m + 1, Vec::new());
        }
        channels[m].push((k, Complex64::new(re, im)));
    }
    channels
        .into_iter()
        .map(|samples| {
            let Some(lo) = samples.iter().map(|s| s.0).min() else {
                return Ok(FiniteSeq::zero());
            };
            let hi = samples.iter().map(|s| s.0).max().unwrap();
            let mut values = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
            for (k, v) in samples {
                values[(k - lo) as usize] = v;
            }
            Ok(FiniteSeq::new(lo, values))
        })
        .collect()
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> Result<Vec<u8>> {
    let out = rows.iter().flat_map(|r| {
        r.measured_err.iter().enumerate().map(move |(m, e)| {
            vec![
                r.n.to_string(),
                m.to_string(),
                fmt_f64(*e),
                fmt_f64(r.bound),
                fmt_f64(r.cond_n),
                fmt_f64(r.lambda),
            ]
        })
    });
    table(&CONVERGENCE_HEADER, out)
}

pub fn periodic_convergence_csv(rows: &[PeriodicComparison], lambda: f64) -> Result<Vec<u8>> {
    let out = rows.iter().flat_map(|r| {
        r.measured.iter().enumerate().map(move |(m, e)| {
            vec![
                r.n.to_string(),
                r.period.to_string(),
                m.to_string(),
                fmt_f64(*e),
                fmt_f64(r.bound),
                fmt_f64(r.reference_bound),
                fmt_f64(lambda),
            ]
        })
    });
    table(&PERIODIC_HEADER, out)
}

/// Writes to a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
