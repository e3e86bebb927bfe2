//! Argument parsing and the subcommands.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use vkerr_core::linfluct::FrequencyGrid;
use vkerr_core::sdesim::{estimate_spectral_matrix, integrate_linearized, simulate_spectra, SimConfig};
use vkerr_core::squeeze::{beta_of, optimal_quadrature, psi_of, quad_spectrum, Mode};
use vkerr_core::steady::{all_states, approach, bifurcations, Bifurcation, Bistability};
use vkerr_core::stokes::{pump_scan, search_grid, stokes_means, summarize, VarianceSummary};
use vkerr_core::{ModelParams, SteadyState};

use crate::config::{Config, Overrides};
use crate::figures;
use crate::output::{dump_files, unix_now, write_file, write_manifest, Cell, RunManifest, SimSnapshot, Table, SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "vkerr", version, about = "Quadrature and polarization squeezing in a two-mode Kerr cavity")]
pub struct Cli {
    /// TOML parameter file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Normalized cavity detuning.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Sign of the nonlinearity (1 or -1).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta: Option<i64>,
    /// Normalized pump intensity E².
    #[arg(long = "pump-e2", global = true)]
    pub pump_e2: Option<f64>,
    /// Output directory. Without it, single-table results go to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady states at one pump or over a pump range.
    Steady {
        /// Pump range `lo:hi:n`.
        #[arg(long, value_parser = parse_range)]
        e2_range: Option<Range>,
    },
    /// Bistability window and polarization threshold.
    Bifurcations {
        /// Tabulate the bifurcation curves over a detuning range `lo:hi:n`.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        scan_delta: Option<Range>,
    },
    /// Quadrature squeezing spectrum of one mode.
    Spectrum {
        /// 1 (parallel to the pump) or 2 (orthogonal).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        mode: u8,
        #[command(flatten)]
        angle: AngleArgs,
        /// Frequency grid `lo:hi:n`.
        #[arg(long, value_parser = parse_range, default_value = "0:5:501")]
        omega_range: Range,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Stokes means, variance minima and polarization-squeezing verdicts.
    Stokes {
        #[arg(long, value_parser = parse_range)]
        e2_range: Option<Range>,
        /// Points of the log-spaced frequency search grid.
        #[arg(long, default_value_t = 200)]
        n_omega: usize,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Monte Carlo spectra of the linearized fluctuations against the
    /// analytic values.
    Simulate {
        #[arg(long, default_value_t = 400)]
        n_traj: usize,
        #[arg(long, default_value_t = 200.0)]
        duration: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 20.0)]
        burn_in: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Comma-separated analysis frequencies.
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2")]
        omegas: Vec<f64>,
        /// Also write the raw trajectories (needs --out).
        #[arg(long)]
        dump: bool,
        /// Index into the list printed by `steady`; defaults to the first
        /// stable state.
        #[arg(long)]
        state: Option<usize>,
    },
    /// Datasets behind the numbered figures (needs --out).
    Figure {
        #[arg(long)]
        id: u32,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        match self.n {
            1 => vec![self.lo],
            n => (0..n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (n - 1) as f64).collect(),
        }
    }
}

pub fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:n, got {s:?}"));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    let n: usize = parts[2].trim().parse().map_err(|e| format!("{e}"))?;
    if n == 0 || !(lo.is_finite() && hi.is_finite()) || (n > 1 && hi <= lo) {
        return Err(format!("invalid range {s:?}"));
    }
    Ok(Range { lo, hi, n })
}

/// Parses plain numbers and multiples of π such as `pi`, `-pi/2`, `0.5pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.trim().parse::<f64>().map_err(|e| format!("{e}"))?),
        None => (t, 1.0),
    };
    let coef = num
        .trim()
        .strip_suffix("pi")
        .ok_or_else(|| format!("cannot parse angle {s:?}"))?
        .trim_end_matches('*');
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|e| format!("{e}"))?,
    };
    Ok(c * PI / den)
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct AngleArgs {
    /// Quadrature angle β.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Angle relative to the steady state, ψ = 2(β − φ1).
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub psi: Option<f64>,
    /// Use the angle of deepest squeezing over the grid.
    #[arg(long)]
    pub optimal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BifArg {
    Pol,
    Up,
    Down,
}

impl From<BifArg> for Bifurcation {
    fn from(b: BifArg) -> Self {
        match b {
            BifArg::Pol => Bifurcation::Polarization,
            BifArg::Up => Bifurcation::UpperFold,
            BifArg::Down => Bifurcation::LowerFold,
        }
    }
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Evaluate next to a bifurcation instead of at the configured pump.
    #[arg(long, value_enum)]
    pub at_bifurcation: Option<BifArg>,
    /// Relative pump offset from the bifurcation.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Index into the list printed by `steady`; defaults to the first
    /// stable state.
    #[arg(long)]
    pub state: Option<usize>,
}

/// Files produced by one command.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(String, Vec<u8>)>,
    pub seed: Option<u64>,
    pub simulation: Option<SimSnapshot>,
}

impl Output {
    fn table(t: Table) -> Self {
        Output {
            files: vec![(format!("{}.csv", t.name), t.to_bytes())],
            ..Output::default()
        }
    }
}

pub fn run(argv: &[String]) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(e.to_string().trim_end().to_string())),
    };
    if matches!(cli.command, Command::Figure { .. }) && cli.out.is_none() {
        return Err(CliError::Config("figure needs --out DIR".into()));
    }
    let started = unix_now();
    let config = load_config(&cli)?;
    let out = execute(&cli.command, &config)?;
    match &cli.out {
        Some(dir) => {
            let mut names = Vec::new();
            for (name, bytes) in &out.files {
                write_file(dir, name, bytes)?;
                names.push(name.clone());
            }
            let manifest = RunManifest {
                command_line: argv.to_vec(),
                config,
                library_version: env!("CARGO_PKG_VERSION"),
                schema_version: SCHEMA_VERSION,
                seed: out.seed,
                simulation: out.simulation,
                started_unix: started,
                finished_unix: unix_now(),
                outputs: names,
            };
            write_manifest(dir, &manifest)?;
        }
        None => {
            if out.files.len() != 1 {
                return Err(CliError::Config("this command writes several files; pass --out DIR".into()));
            }
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&out.files[0].1)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

pub fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let base = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let c = base.with_overrides(&Overrides {
        delta: cli.delta,
        eta: cli.eta,
        pump_e2: cli.pump_e2,
    });
    c.model()?;
    Ok(c)
}

pub fn execute(cmd: &Command, config: &Config) -> Result<Output, CliError> {
    let m = config.model()?;
    match cmd {
        Command::Steady { e2_range } => Ok(Output::table(steady_table(&m, e2_range)?)),
        Command::Bifurcations { scan_delta } => match scan_delta {
            Some(r) => Ok(Output::table(figures::bifurcation_curves(&m, &r.values()))),
            None => {
                let text = format!("{}\n", serde_json::to_string_pretty(&bifurcation_json(&m)).expect("json"));
                Ok(Output {
                    files: vec![("bifurcations.json".into(), text.into_bytes())],
                    ..Output::default()
                })
            }
        },
        Command::Spectrum {
            mode,
            angle,
            omega_range,
            point,
        } => {
            let (s, mm) = operating_point(&m, point)?;
            let mode = Mode::from_index(*mode as usize).expect("validated by clap");
            Ok(Output::table(spectrum_table(&s, &mm, mode, angle, &omega_range.values())?))
        }
        Command::Stokes {
            e2_range,
            n_omega,
            point,
        } => Ok(Output::table(stokes_table(&m, e2_range, *n_omega, point)?)),
        Command::Simulate {
            n_traj,
            duration,
            dt,
            burn_in,
            seed,
            omegas,
            dump,
            state,
        } => {
            let sim = SimConfig {
                dt: *dt,
                duration: *duration,
                n_traj: *n_traj,
                seed: *seed,
                burn_in: *burn_in,
                ..SimConfig::default()
            };
            sim.validate()?;
            let point = PointArgs {
                at_bifurcation: None,
                epsilon: 0.0,
                state: *state,
            };
            let (s, mm) = operating_point(&m, &point)?;
            simulate(&s, &mm, &sim, omegas, *dump, config)
        }
        Command::Figure { id } => {
            let files = figures::figure(*id)?;
            Ok(Output {
                files: files.into_iter().map(|t| (format!("{}.csv", t.name), t.to_bytes())).collect(),
                ..Output::default()
            })
        }
    }
}

fn pumps(m: &ModelParams, r: &Option<Range>) -> Vec<f64> {
    r.map_or_else(|| vec![m.pump_e2()], |r| r.values())
}

pub fn steady_table(m: &ModelParams, r: &Option<Range>) -> Result<Table, CliError> {
    let mut t = Table::new("steady", &["E2", "branch", "I1", "I2", "phi1", "phi2", "stable"]);
    for e2 in pumps(m, r) {
        for s in all_states(&m.with_pump_e2(e2))? {
            t.push(vec![
                e2.into(),
                s.branch.name().into(),
                s.i1.into(),
                s.i2.into(),
                s.phi1.into(),
                s.phi2.into(),
                s.is_stable().into(),
            ]);
        }
    }
    Ok(t)
}

fn fold_json(b: &Bistability) -> Value {
    json!({
        "E2_up": b.upper.e2,
        "E2_down": b.lower.e2,
        "upper_fold": {"I": b.upper.i, "E2": b.upper.e2},
        "lower_fold": {"I": b.lower.i, "E2": b.lower.e2},
    })
}

pub fn bifurcation_json(m: &ModelParams) -> Value {
    let set = bifurcations(m);
    json!({
        "delta": m.delta,
        "eta": m.eta(),
        "bistable": set.bistable.as_ref().map(fold_json),
        "polarization": set.polarization.map(|p| json!({"I_pol": p.i_pol, "E2_pol": p.e2_pol})),
    })
}

/// State and (possibly shifted) parameters for a single-point command.
pub fn operating_point(m: &ModelParams, p: &PointArgs) -> Result<(SteadyState, ModelParams), CliError> {
    if let Some(kind) = p.at_bifurcation {
        if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
            return Err(CliError::Config(format!("epsilon must lie in (0, 1), got {}", p.epsilon)));
        }
        let s = approach(m, kind.into(), p.epsilon)?;
        return Ok((s, m.with_pump_e2(s.pump_e2)));
    }
    let states = all_states(m)?;
    let s = match p.state {
        Some(k) => *states
            .get(k)
            .ok_or_else(|| CliError::Config(format!("state index {k} out of range ({} states)", states.len())))?,
        None => *states
            .iter()
            .find(|s| s.is_stable())
            .ok_or_else(|| CliError::Unstable("no stable state at this pump".into()))?,
    };
    if !s.is_stable() && s.stability == vkerr_core::Stability::Unstable {
        return Err(CliError::Unstable(format!(
            "{} state with I1 = {} is linearly unstable",
            s.branch.name(),
            s.i1
        )));
    }
    Ok((s, *m))
}

pub fn spectrum_table(
    s: &SteadyState,
    m: &ModelParams,
    mode: Mode,
    angle: &AngleArgs,
    omegas: &[f64],
) -> Result<Table, CliError> {
    let beta = if let Some(b) = angle.beta {
        b
    } else if let Some(psi) = angle.psi {
        beta_of(s, psi)
    } else {
        let mut best: Option<(f64, f64)> = None;
        for &w in omegas {
            let o = optimal_quadrature(s, m, mode, w)?;
            if best.map_or(true, |b| o.q_min < b.1) {
                best = Some((o.beta, o.q_min));
            }
        }
        best.map(|b| b.0).unwrap_or(0.0)
    };
    let mut t = Table::new("spectrum", &["omega", "q_normal", "q_symmetric", "beta", "psi"]);
    for &w in omegas {
        let r = quad_spectrum(s, m, mode, beta, w)?;
        t.push(vec![w.into(), r.normal_ordered.into(), r.symmetric.into(), beta.into(), psi_of(s, beta).into()]);
    }
    Ok(t)
}

const STOKES_HEADER: [&str; 15] = [
    "E2",
    "branch",
    "twin",
    "S0",
    "S1",
    "S2",
    "S3",
    "minV0",
    "minV1",
    "minV2",
    "minV3",
    "squeezed_param",
    "witness",
    "witness_omega",
    "stable",
];

fn stokes_row(e2: f64, s: &SteadyState, sum: &VarianceSummary) -> Vec<Cell> {
    let means = stokes_means(s);
    let mut row: Vec<Cell> = vec![e2.into(), s.branch.name().into(), s.phase_partner.into()];
    row.extend(means.as_array().iter().map(|x| Cell::from(*x)));
    row.extend(sum.min_v.iter().map(|x| Cell::from(*x)));
    match sum.first_witness {
        Some((w, wit)) => {
            row.push(Cell::Int(wit.l as i64));
            row.push(format!("V{}<S{}/S0<V{}", wit.l, wit.m, wit.k).into());
            row.push(w.into());
        }
        None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
    }
    row.push(s.is_stable().into());
    row
}

pub fn stokes_table(m: &ModelParams, r: &Option<Range>, n_omega: usize, p: &PointArgs) -> Result<Table, CliError> {
    let mut t = Table::new("stokes", &STOKES_HEADER);
    if p.at_bifurcation.is_some() || p.state.is_some() {
        let (s, mm) = operating_point(m, p)?;
        let sum = summarize(&s, &mm, &search_grid(&mm, n_omega))?;
        t.push(stokes_row(mm.pump_e2(), &s, &sum));
        return Ok(t);
    }
    for row in pump_scan(m, &pumps(m, r), &search_grid(m, n_omega))? {
        match (row.state, row.summary) {
            (Some(s), Some(sum)) => t.push(stokes_row(row.e2, &s, &sum)),
            _ => {
                let mut cells = vec![Cell::from(row.e2)];
                cells.resize(STOKES_HEADER.len(), Cell::Empty);
                t.push(cells);
            }
        }
    }
    Ok(t)
}

fn simulate(
    s: &SteadyState,
    m: &ModelParams,
    sim: &SimConfig,
    omegas: &[f64],
    dump: bool,
    config: &Config,
) -> Result<Output, CliError> {
    let grid = FrequencyGrid::new(omegas.to_vec())?;
    let mut files = Vec::new();
    let est = if dump {
        let ens = integrate_linearized(s, m, sim)?;
        files.extend(dump_files("trajectories", &ens, sim, config));
        estimate_spectral_matrix(&ens, &grid, sim.welch_segments)?
    } else {
        simulate_spectra(s, m, sim, &grid)?
    };
    let mut t = Table::new(
        "simulate",
        &["omega", "mode", "beta", "psi", "q_analytic", "q_mc", "q_mc_stderr"],
    );
    for (k, &w) in grid.omegas().iter().enumerate() {
        for mode in [Mode::Parallel, Mode::Orthogonal] {
            for beta in [s.phi1, s.phi1 + PI / 4.0] {
                let exact = quad_spectrum(s, m, mode, beta, w)?.normal_ordered;
                let (q, err) = est.quadrature(k, mode, beta);
                t.push(vec![
                    w.into(),
                    mode.index().into(),
                    beta.into(),
                    psi_of(s, beta).into(),
                    exact.into(),
                    q.into(),
                    err.into(),
                ]);
            }
        }
    }
    let mut out = Output::table(t);
    out.files.extend(files);
    out.seed = Some(sim.seed);
    out.simulation = Some(sim.into());
    Ok(out)
}
