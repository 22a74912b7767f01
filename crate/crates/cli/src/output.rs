//! File emission: CSV matrices and rows at full precision, JSON reports,
//! and the provenance sidecar.
//!
//! Data files (CSV, report.json) are byte-identical across reruns of the
//! same config and seed. meta.json carries the one intentional exception,
//! the measured wall time.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::FileConfig;

/// Provenance fields resolved while the scenario runs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ResolvedMeta {
    pub omega_sep: f64,
    pub omega_cut: Option<f64>,
    /// Probe-energy fraction the placed knife actually absorbs.
    pub filter_fraction_achieved: Option<f64>,
    pub tuned_offset: Option<f64>,
    pub fiber_length_meters: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub scenario: String,
    pub code_version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub seed_overridden: bool,
    pub threads: usize,
    pub resolved: ResolvedMeta,
    /// Wall time of the completed run; null while the run is in flight.
    pub runtime_seconds: Option<f64>,
    pub config: FileConfig,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)
}

/// Matrix CSV: first column is the row axis, remaining headers are the
/// column axis values.
pub fn write_matrix_csv(
    path: &Path,
    row_axis: &str,
    columns: &[f64],
    rows_axis: &[f64],
    rows: &[Vec<f64>],
) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "{row_axis}")?;
    for c in columns {
        write!(w, ",{c:.16e}")?;
    }
    writeln!(w)?;
    for (x, row) in rows_axis.iter().zip(rows) {
        write!(w, "{x:.16e}")?;
        for v in row {
            write!(w, ",{v:.16e}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

/// Plain rows under a comma-separated header line.
pub fn write_rows_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        let mut sep = "";
        for v in row {
            write!(w, "{sep}{v:.16e}")?;
            sep = ",";
        }
        writeln!(w)?;
    }
    w.flush()
}
