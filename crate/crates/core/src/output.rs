//! Bit-exact output files and single-run orchestration.
//!
//! * `timeseries.csv`: one row per record, columns [`CSV_HEADER`], every
//!   number printed with 17 significant digits.
//! * `entropy_flux.csv`: `t,entropy_flux,cumulative_entropy_flux`, when enabled.
//! * `snapshot_<n>.bin`: ASCII header `FCH1 dim=<d> grid=<G> t=<time>\n`
//!   followed by the grid values as little-endian `f64`, x fastest.
//! * `run.json`: the resolved configuration.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::config::SimConfig;
use crate::diagnostics::{DiagnosticsRecord, DiagnosticsSeries, CSV_HEADER};
use crate::error::{FchError, Result};
use crate::spectral::Field;
use crate::timestepper::{integrate, Observer, TrajectoryState};

/// Lossless text form of an `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| format_f64(v)).collect::<Vec<_>>().join(",")
}

/// Streams records to disk as they are produced, so a failed run keeps
/// everything written up to the failure.
pub struct RunWriter {
    dir: PathBuf,
    timeseries: BufWriter<File>,
    entropy_flux: Option<BufWriter<File>>,
    snapshots: bool,
    count: usize,
}

impl RunWriter {
    pub fn create(dir: &Path, snapshots: bool, entropy_flux: bool) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let mut timeseries = BufWriter::new(File::create(dir.join("timeseries.csv"))?);
        writeln!(timeseries, "{}", CSV_HEADER.join(","))?;
        let entropy_flux = if entropy_flux {
            let mut w = BufWriter::new(File::create(dir.join("entropy_flux.csv"))?);
            writeln!(w, "t,entropy_flux,cumulative_entropy_flux")?;
            Some(w)
        } else {
            None
        };
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            timeseries,
            entropy_flux,
            snapshots,
            count: 0,
        })
    }
}

impl Observer for RunWriter {
    fn observe(&mut self, record: &DiagnosticsRecord, state: &TrajectoryState) -> Result<()> {
        writeln!(self.timeseries, "{}", csv_row(&record.csv_values()))?;
        self.timeseries.flush()?;
        if let Some(w) = self.entropy_flux.as_mut() {
            writeln!(
                w,
                "{}",
                csv_row(&[record.t, record.entropy_flux, record.cumulative_entropy_flux])
            )?;
            w.flush()?;
        }
        if self.snapshots {
            let path = self.dir.join(format!("snapshot_{:05}.bin", self.count));
            write_snapshot(&path, &state.u, record.t)?;
        }
        self.count += 1;
        Ok(())
    }
}

pub fn write_snapshot(path: &Path, u: &Field, t: f64) -> Result<()> {
    let b = u.basis();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "FCH1 dim={} grid={} t={}", b.dim(), b.grid(), format_f64(t))?;
    for v in u.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Header fields and grid values of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dim: usize,
    pub grid: usize,
    pub t: f64,
    pub values: Vec<f64>,
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let bad = |m: &str| FchError::Contract(format!("malformed snapshot {}: {m}", path.display()));
    let nl = bytes.iter().position(|&c| c == b'\n').ok_or_else(|| bad("no header"))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not ASCII"))?;
    let mut parts = header.split(' ');
    if parts.next() != Some("FCH1") {
        return Err(bad("missing FCH1 tag"));
    }
    let mut field = |key: &str| -> Result<String> {
        let p = parts.next().ok_or_else(|| bad("short header"))?;
        p.strip_prefix(key)
            .map(str::to_owned)
            .ok_or_else(|| bad("unexpected header key"))
    };
    let dim: usize = field("dim=")?.parse().map_err(|_| bad("dim"))?;
    let grid: usize = field("grid=")?.parse().map_err(|_| bad("grid"))?;
    let t: f64 = field("t=")?.parse().map_err(|_| bad("t"))?;
    let body = &bytes[nl + 1..];
    if body.len() != 8 * grid.pow(dim as u32) {
        return Err(bad("payload length"));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Snapshot { dim, grid, t, values })
}

pub fn write_run_json(dir: &Path, config: &SimConfig) -> Result<()> {
    fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(&config.resolved())?;
    fs::write(dir.join("run.json"), text + "\n")?;
    Ok(())
}

/// Run one simulation; with `out` set, stream its files into that directory.
pub fn run_simulation(
    config: &SimConfig,
    out: Option<&Path>,
    extra: &mut [&mut dyn Observer],
) -> Result<(TrajectoryState, DiagnosticsSeries)> {
    let (_, params, u0) = config.setup()?;
    let mut writer = match out {
        Some(dir) => {
            write_run_json(dir, config)?;
            Some(RunWriter::create(
                dir,
                config.output.snapshots,
                config.output.entropy_flux,
            )?)
        }
        None => None,
    };
    let mut observers: Vec<&mut dyn Observer> = Vec::new();
    if let Some(w) = writer.as_mut() {
        observers.push(w);
    }
    for o in extra.iter_mut() {
        observers.push(&mut **o);
    }
    integrate(u0, &params, &config.step, &config.schedule(), &mut observers)
}
