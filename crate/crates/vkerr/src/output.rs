//! CSV tables, run manifests and raw trajectory dumps.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use vkerr_core::sdesim::{Ensemble, SimConfig};

use crate::config::Config;
use crate::CliError;

/// Version tag written into every manifest; bump when a CSV schema changes.
pub const SCHEMA_VERSION: u32 = 1;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_f64(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: Config,
    pub library_version: &'static str,
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimSnapshot>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimSnapshot {
    pub dt: f64,
    pub duration: f64,
    pub n_traj: usize,
    pub burn_in: f64,
    pub sample_every: usize,
    pub welch_segments: usize,
}

impl From<&SimConfig> for SimSnapshot {
    fn from(c: &SimConfig) -> Self {
        SimSnapshot {
            dt: c.dt,
            duration: c.duration,
            n_traj: c.n_traj,
            burn_in: c.burn_in,
            sample_every: c.sample_every,
            welch_segments: c.welch_segments,
        }
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to `dir/name` and returns the path.
pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    write_file(dir, "manifest.json", text.as_bytes())
}

#[derive(Debug, Clone, Serialize)]
struct DumpSidecar<'a> {
    format: &'static str,
    layout: &'static str,
    channels: [&'static str; 4],
    n_traj: usize,
    samples_per_trajectory: usize,
    sample_dt: f64,
    seed: u64,
    simulation: SimSnapshot,
    config: &'a Config,
}

/// Raw trajectories as little-endian `f64`, trajectory-major, each sample
/// holding `re, im` for the four channels, plus a JSON sidecar describing
/// the layout. Returns `(stem.bin, stem.json)` contents.
pub fn dump_files(stem: &str, ens: &Ensemble, sim: &SimConfig, config: &Config) -> [(String, Vec<u8>); 2] {
    let mut bin = Vec::new();
    for tr in &ens.trajectories {
        for x in tr {
            for z in x {
                bin.extend_from_slice(&z.re.to_le_bytes());
                bin.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    let side = DumpSidecar {
        format: "f64-le",
        layout: "trajectory, sample, channel, (re, im)",
        channels: ["dalpha1", "dalpha1+", "dalpha2", "dalpha2+"],
        n_traj: ens.trajectories.len(),
        samples_per_trajectory: ens.trajectories.first().map_or(0, Vec::len),
        sample_dt: ens.sample_dt,
        seed: sim.seed,
        simulation: sim.into(),
        config,
    };
    let json = format!("{}\n", serde_json::to_string_pretty(&side).expect("sidecar serializes"));
    [(format!("{stem}.bin"), bin), (format!("{stem}.json"), json.into_bytes())]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_f64(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new("t", &["a", "b", "c"]);
        t.push(vec![1.0.into(), Cell::Empty, "x".into()]);
        assert_eq!(String::from_utf8(t.to_bytes()).unwrap(), "a,b,c\n1.0000000000000000e0,,x\n");
    }
}
