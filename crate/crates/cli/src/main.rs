//! Command-line front end: integrate trajectories, generate Poincare
//! sections, sweep stability maps, solve resonance equilibria, dump
//! coefficient tables and run conservation checks.

mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{fmt_f64, write_atomic, Csv, RunManifest};
use serde_json::json;
use spinspin::config::SystemConfig;
use spinspin::dynamics::{full_system, hamiltonian, total_angular_momentum, FullState};
use spinspin::poincare::{section_full, section_keplerian, PortraitSpec, SeedRun};
use spinspin::series::{SeriesTerm, V2_SERIES, V4_SERIES};
use spinspin::stability::{
    coefficients, equilibria, linearize, stability_map, CellStatus, MapSpec, ResonanceContext,
    ResonanceSpec,
};
use spinspin::{
    BodyPairParams, Coupling, DissipationSpec, IntegratorConfig, Method, SpinState, TWO_PI,
};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Conservation pass threshold for `check --conservation`.
const CONSERVATION_THRESHOLD: f64 = 1e-10;

#[derive(Debug)]
enum CliError {
    /// Bad flags, config or parameters -> exit 1.
    Validation(String),
    /// Propagation or solver failure -> exit 2.
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

fn io_err(context: &str, e: std::io::Error) -> CliError {
    CliError::Validation(format!("{context}: {e}"))
}

#[derive(Parser)]
#[command(
    name = "spinspin",
    version,
    about = "Rotational-orbital dynamics of two triaxial ellipsoids: integration, Poincare sections, resonance stability"
)]
struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one trajectory and write it as CSV.
    Integrate(IntegrateCmd),
    /// Poincare sections for a set of spin seeds (CSV per seed + manifest).
    Poincare(PoincareCmd),
    /// Max real eigenvalue part of a resonance equilibrium over an (a, e) grid.
    #[command(name = "stability-map")]
    StabilityMap(StabilityMapCmd),
    /// Equilibria of the averaged resonant system with their eigenvalues.
    Equilibria(EquilibriaCmd),
    /// Resonance coefficients K1..K5, L1..L5 and averaged dissipation rates.
    Coeffs(CoeffsCmd),
    /// Machine-readable term table of the expanded coupling potential.
    #[command(name = "dump-potential")]
    DumpPotential(DumpPotentialCmd),
    /// Self checks (conservation of H and P_f on the full problem).
    Check(CheckCmd),
}

#[derive(Args)]
struct SystemArgs {
    /// System parameters file (.toml or .json).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset used when --config is absent.
    #[arg(long, value_enum, default_value_t = Preset::PatroclusMenoetius)]
    preset: Preset,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    PatroclusMenoetius,
}

impl SystemArgs {
    /// Returns validated parameters plus `(delta1, delta2)` from the config.
    fn load(&self) -> Result<(BodyPairParams, (f64, f64)), CliError> {
        match &self.config {
            Some(path) => {
                let cfg =
                    SystemConfig::load(path).map_err(|e| CliError::Validation(e.to_string()))?;
                let params = cfg
                    .params()
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                Ok((params, cfg.deltas()))
            }
            None => match self.preset {
                Preset::PatroclusMenoetius => {
                    Ok((BodyPairParams::patroclus_menoetius(), (0.0, 0.0)))
                }
            },
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Coupling switch: 0 = spin-orbit (V2), 1 = spin-spin (V2 + V4).
    #[arg(long, default_value_t = 1)]
    chi: u8,
    /// Dissipation mode. Defaults to `averaged` when any dissipative
    /// constant is set, `none` otherwise.
    #[arg(long, value_enum)]
    dissipation: Option<DissipationMode>,
    /// Dissipative constant of body 1 (overrides the config).
    #[arg(long)]
    delta1: Option<f64>,
    /// Dissipative constant of body 2 (overrides the config).
    #[arg(long)]
    delta2: Option<f64>,
    /// Effective averaged rate for body 1 (overrides delta1).
    #[arg(long)]
    gammabar1: Option<f64>,
    /// Effective averaged rate for body 2 (overrides delta2).
    #[arg(long)]
    gammabar2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DissipationMode {
    None,
    Direct,
    Averaged,
}

impl ModelArgs {
    fn coupling(&self) -> Result<Coupling, CliError> {
        Coupling::from_chi(self.chi)
            .ok_or_else(|| CliError::Validation(format!("--chi must be 0 or 1, got {}", self.chi)))
    }

    fn dissipation(
        &self,
        params: &BodyPairParams,
        config_deltas: (f64, f64),
    ) -> Result<DissipationSpec, CliError> {
        let bad = |e: spinspin::DynamicsError| CliError::Validation(e.to_string());
        let delta1 = self.delta1.unwrap_or(config_deltas.0);
        let delta2 = self.delta2.unwrap_or(config_deltas.1);
        let has_rates = self.gammabar1.is_some() || self.gammabar2.is_some();
        let mode = self.dissipation.unwrap_or({
            if delta1 != 0.0 || delta2 != 0.0 || has_rates {
                DissipationMode::Averaged
            } else {
                DissipationMode::None
            }
        });
        match mode {
            DissipationMode::None => Ok(DissipationSpec::None),
            DissipationMode::Direct => {
                if has_rates {
                    DissipationSpec::direct_from_rates(
                        params,
                        self.gammabar1.unwrap_or(0.0),
                        self.gammabar2.unwrap_or(0.0),
                    )
                    .map_err(bad)
                } else {
                    DissipationSpec::direct(delta1, delta2).map_err(bad)
                }
            }
            DissipationMode::Averaged => {
                if has_rates {
                    DissipationSpec::averaged_from_rates(
                        params,
                        self.gammabar1.unwrap_or(0.0),
                        self.gammabar2.unwrap_or(0.0),
                    )
                    .map_err(bad)
                } else {
                    DissipationSpec::averaged(params, delta1, delta2).map_err(bad)
                }
            }
        }
    }
}

#[derive(Args)]
struct IntegratorArgs {
    /// Integration method.
    #[arg(long, value_enum, default_value_t = MethodArg::Adaptive)]
    method: MethodArg,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Initial step (fixed step for rk4).
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Adaptive,
    Rk4,
}

impl IntegratorArgs {
    fn config(&self) -> IntegratorConfig {
        let mut cfg = IntegratorConfig {
            method: match self.method {
                MethodArg::Adaptive => Method::Adaptive,
                MethodArg::Rk4 => Method::Rk4,
            },
            ..Default::default()
        };
        if let Some(rtol) = self.rtol {
            cfg.rtol = rtol;
        }
        if let Some(atol) = self.atol {
            cfg.atol = atol;
        }
        if let Some(h0) = self.h0 {
            cfg.h0 = h0;
        }
        if let Some(ms) = self.max_step {
            cfg.max_step = ms;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ModelKind {
    Keplerian,
    Full,
}

#[derive(Args)]
struct IntegrateCmd {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[arg(long, value_enum, default_value_t = ModelKind::Full)]
    model_kind: ModelKind,
    /// Integration horizon in orbital periods.
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    /// Output cadence in orbital periods.
    #[arg(long, default_value_t = 0.01)]
    cadence: f64,
    #[arg(long, default_value_t = 0.0)]
    theta1: f64,
    #[arg(long, default_value_t = 0.0)]
    theta2: f64,
    /// Initial spin momentum of body 1 (default: synchronous, p1 = C1).
    #[arg(long)]
    p1: Option<f64>,
    /// Initial spin momentum of body 2 (default: synchronous, p2 = C2).
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long, default_value = "integrate.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct PoincareCmd {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[arg(long, value_enum, default_value_t = ModelKind::Keplerian)]
    model_kind: ModelKind,
    /// Sections (orbital periods) per seed.
    #[arg(long, default_value_t = 200)]
    n_sections: usize,
    /// Spin seed "theta1,p1,theta2,p2"; repeatable. Without any, a default
    /// grid theta_j = 0, p1 in [0.1, 1.1] (11 values), p2 = C2 is used.
    #[arg(long = "seed")]
    seeds: Vec<String>,
    #[arg(long, default_value = "poincare")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct StabilityMapCmd {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Resonance "m1:n1,m2:n2" (1:1,1:1  3:2,3:2  1:1,3:2).
    #[arg(long, default_value = "1:1,1:1")]
    resonance: String,
    /// Equilibrium label "phi1,phi2"; accepts numbers or "pi"/"-pi".
    #[arg(long, default_value = "0,0")]
    equilibrium: String,
    #[arg(long)]
    a_min: f64,
    #[arg(long)]
    a_max: f64,
    #[arg(long)]
    e_min: f64,
    #[arg(long)]
    e_max: f64,
    #[arg(long)]
    na: usize,
    #[arg(long)]
    ne: usize,
    #[arg(long, default_value = "stability_map.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct EquilibriaCmd {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "1:1,1:1")]
    resonance: String,
    /// Extra Newton seed "phi1,phi2"; repeatable.
    #[arg(long = "seed")]
    seeds: Vec<String>,
    /// Output CSV path; prints to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CoeffsCmd {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value = "1:1,1:1")]
    resonance: String,
    /// Output CSV path; prints to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    action: Option<CoeffsAction>,
}

#[derive(Subcommand)]
enum CoeffsAction {
    /// Emit the expanded-potential term table instead of the resonance
    /// coefficients.
    DumpPotential {
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DumpPotentialCmd {
    /// Output CSV path; prints to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckCmd {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// Run the conservation check (max |dH|, max |dP_f| on the full
    /// problem).
    #[arg(long)]
    conservation: bool,
    #[arg(long, value_enum, default_value_t = ModelKind::Full)]
    model: ModelKind,
    #[arg(long, default_value_t = 1)]
    chi: u8,
    /// Integration horizon in orbital periods.
    #[arg(long, default_value_t = 1000.0)]
    tmax: f64,
    #[arg(long, default_value_t = 0.0)]
    theta1: f64,
    #[arg(long, default_value_t = 0.0)]
    theta2: f64,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
}

fn parse_angle(token: &str) -> Result<f64, CliError> {
    let t = token.trim();
    match t {
        "pi" => Ok(std::f64::consts::PI),
        "-pi" => Ok(-std::f64::consts::PI),
        _ => t
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("cannot parse angle '{token}'"))),
    }
}

fn parse_angle_pair(s: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Validation(format!(
            "expected 'phi1,phi2', got '{s}'"
        )));
    }
    Ok((parse_angle(parts[0])?, parse_angle(parts[1])?))
}

fn parse_seed(s: &str) -> Result<SpinState, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Validation(format!(
            "expected seed 'theta1,p1,theta2,p2', got '{s}'"
        )));
    }
    let num = |p: &str| -> Result<f64, CliError> {
        p.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("cannot parse number '{p}' in seed '{s}'")))
    };
    Ok(SpinState {
        theta1: parse_angle(parts[0])?,
        p1: num(parts[1])?,
        theta2: parse_angle(parts[2])?,
        p2: num(parts[3])?,
    })
}

fn parse_resonance(s: &str) -> Result<ResonanceSpec, CliError> {
    s.parse::<ResonanceSpec>()
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successes; everything else is a
            // validation failure (exit 1).
            let _ = e.print();
            let code = if e.use_stderr() { 1 } else { 0 };
            std::process::exit(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            std::process::exit(1);
        }
    }
    let started = Instant::now();
    let result = match cli.command {
        Command::Integrate(cmd) => run_integrate(cmd, started),
        Command::Poincare(cmd) => run_poincare(cmd, started),
        Command::StabilityMap(cmd) => run_stability_map(cmd, started),
        Command::Equilibria(cmd) => run_equilibria(cmd, started),
        Command::Coeffs(cmd) => run_coeffs(cmd, started),
        Command::DumpPotential(cmd) => dump_potential(cmd.output.as_deref(), started),
        Command::Check(cmd) => run_check(cmd),
    };
    if let Err(e) = result {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}

fn spin_defaults(params: &BodyPairParams, p1: Option<f64>, p2: Option<f64>) -> SpinState {
    SpinState {
        theta1: 0.0,
        theta2: 0.0,
        p1: p1.unwrap_or(params.c1),
        p2: p2.unwrap_or(params.c2),
    }
}

fn run_integrate(cmd: IntegrateCmd, started: Instant) -> Result<(), CliError> {
    let (params, config_deltas) = cmd.system.load()?;
    let coupling = cmd.model.coupling()?;
    let diss = cmd.model.dissipation(&params, config_deltas)?;
    let cfg = cmd.integrator.config();
    if cmd.tmax <= 0.0 || cmd.cadence <= 0.0 {
        return Err(CliError::Validation(format!(
            "tmax and cadence must be positive, got {} and {}",
            cmd.tmax, cmd.cadence
        )));
    }
    let mut seed = spin_defaults(&params, cmd.p1, cmd.p2);
    seed.theta1 = cmd.theta1;
    seed.theta2 = cmd.theta2;
    let t_max = cmd.tmax * TWO_PI;
    let dt = cmd.cadence * TWO_PI;

    let csv = match cmd.model_kind {
        ModelKind::Full => {
            let rhs = full_system(params, coupling, diss);
            let initial = FullState::at_pericenter(&params, &seed);
            let traj = spinspin::integrate::propagate_sampled(
                &rhs,
                initial.to_array(),
                0.0,
                t_max,
                &cfg,
                dt,
            )
            .map_err(|e| CliError::Numerical(e.to_string()))?;
            let mut csv = Csv::new(&[
                "t", "r", "f", "pr", "pf", "theta1", "theta2", "p1", "p2", "a", "e",
            ]);
            for (t, y) in traj.t.iter().zip(&traj.y) {
                let state = FullState::from_array(y);
                let (a, e) =
                    spinspin::orbital_elements(&params, &state).unwrap_or((f64::NAN, f64::NAN));
                csv.row(&[
                    fmt_f64(*t),
                    fmt_f64(state.r),
                    fmt_f64(state.f),
                    fmt_f64(state.pr),
                    fmt_f64(state.pf),
                    fmt_f64(state.theta1),
                    fmt_f64(state.theta2),
                    fmt_f64(state.p1),
                    fmt_f64(state.p2),
                    fmt_f64(a),
                    fmt_f64(e),
                ]);
            }
            csv
        }
        ModelKind::Keplerian => {
            let rhs = spinspin::dynamics::keplerian_system(params, coupling, diss);
            let traj =
                spinspin::integrate::propagate_sampled(&rhs, seed.to_array(), 0.0, t_max, &cfg, dt)
                    .map_err(|e| CliError::Numerical(e.to_string()))?;
            let mut csv = Csv::new(&["t", "theta1", "theta2", "p1", "p2"]);
            for (t, y) in traj.t.iter().zip(&traj.y) {
                csv.row(&[
                    fmt_f64(*t),
                    fmt_f64(y[0]),
                    fmt_f64(y[1]),
                    fmt_f64(y[2]),
                    fmt_f64(y[3]),
                ]);
            }
            csv
        }
    };

    write_atomic(&cmd.output, &csv.into_bytes()).map_err(|e| io_err("writing trajectory", e))?;
    let mut manifest = RunManifest::new(
        json!({
            "system": SystemConfig::from_params(&params, config_deltas.0, config_deltas.1),
            "model": format!("{:?}", cmd.model_kind),
            "chi": coupling.chi(),
            "dissipation": diss,
            "seed": seed,
            "tmax_periods": cmd.tmax,
            "cadence_periods": cmd.cadence,
        }),
        Some(cfg),
    );
    manifest.outputs = vec![cmd.output.display().to_string()];
    manifest
        .write(&cmd.output, started.elapsed().as_secs_f64())
        .map_err(|e| io_err("writing manifest", e))?;
    Ok(())
}

fn seed_runs_to_files(
    runs: &[SeedRun],
    with_elements: bool,
    out_dir: &Path,
) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    for run in runs {
        let mut header = vec!["k", "t", "theta1", "theta2", "p1", "p2"];
        if with_elements {
            header.extend_from_slice(&["a", "e"]);
        }
        header.extend_from_slice(&["theta1_raw", "theta2_raw"]);
        let mut csv = Csv::new(&header);
        for pt in &run.points {
            let mut row = vec![
                pt.k.to_string(),
                fmt_f64(pt.t),
                fmt_f64(pt.theta1),
                fmt_f64(pt.theta2),
                fmt_f64(pt.p1),
                fmt_f64(pt.p2),
            ];
            if with_elements {
                row.push(fmt_f64(pt.a.unwrap_or(f64::NAN)));
                row.push(fmt_f64(pt.e.unwrap_or(f64::NAN)));
            }
            row.push(fmt_f64(pt.theta1_raw));
            row.push(fmt_f64(pt.theta2_raw));
            csv.row(&row);
        }
        let name = format!("seed_{:03}.csv", run.seed_index);
        let path = out_dir.join(&name);
        write_atomic(&path, &csv.into_bytes()).map_err(|e| io_err("writing section CSV", e))?;
        files.push(name);
        if let Some(err) = &run.error {
            eprintln!("warning: seed {} stopped early: {err}", run.seed_index);
        }
    }
    Ok(files)
}

fn run_poincare(cmd: PoincareCmd, started: Instant) -> Result<(), CliError> {
    let (params, config_deltas) = cmd.system.load()?;
    let coupling = cmd.model.coupling()?;
    let diss = cmd.model.dissipation(&params, config_deltas)?;
    let cfg = cmd.integrator.config();
    if cmd.n_sections == 0 {
        return Err(CliError::Validation(
            "--n-sections must be at least 1".into(),
        ));
    }
    let seeds: Vec<SpinState> = if cmd.seeds.is_empty() {
        (0..11)
            .map(|i| SpinState {
                theta1: 0.0,
                theta2: 0.0,
                p1: 0.1 + 0.1 * i as f64,
                p2: params.c2,
            })
            .collect()
    } else {
        cmd.seeds
            .iter()
            .map(|s| parse_seed(s))
            .collect::<Result<_, _>>()?
    };
    let spec = PortraitSpec {
        seeds: seeds.clone(),
        n_sections: cmd.n_sections,
    };

    let (runs, with_elements) = match cmd.model_kind {
        ModelKind::Keplerian => (
            section_keplerian(&params, coupling, &diss, &spec, &cfg),
            false,
        ),
        ModelKind::Full => (section_full(&params, coupling, &diss, &spec, &cfg), true),
    };
    std::fs::create_dir_all(&cmd.out_dir).map_err(|e| io_err("creating output dir", e))?;
    let files = seed_runs_to_files(&runs, with_elements, &cmd.out_dir)?;

    let mut manifest = RunManifest::new(
        json!({
            "system": SystemConfig::from_params(&params, config_deltas.0, config_deltas.1),
            "model": format!("{:?}", cmd.model_kind),
            "chi": coupling.chi(),
            "dissipation": diss,
            "seeds": seeds,
            "n_sections": cmd.n_sections,
            "section": match cmd.model_kind {
                ModelKind::Keplerian => "t mod 2pi = 0",
                ModelKind::Full => "r sin f = 0, rising",
            },
        }),
        Some(cfg),
    );
    manifest.outputs = files;
    let manifest_path = cmd.out_dir.join("portrait");
    manifest
        .write(&manifest_path, started.elapsed().as_secs_f64())
        .map_err(|e| io_err("writing manifest", e))?;
    Ok(())
}

fn eigen_row(report: &spinspin::StabilityReport) -> Vec<String> {
    let mut row = vec![fmt_f64(report.max_real)];
    for i in 0..4 {
        row.push(fmt_f64(report.eigenvalues[i].0));
    }
    for i in 0..4 {
        row.push(fmt_f64(report.eigenvalues[i].1));
    }
    row
}

fn run_stability_map(cmd: StabilityMapCmd, started: Instant) -> Result<(), CliError> {
    let (params, config_deltas) = cmd.system.load()?;
    let coupling = cmd.model.coupling()?;
    let diss = cmd.model.dissipation(&params, config_deltas)?;
    let spec = parse_resonance(&cmd.resonance)?;
    let equilibrium = parse_angle_pair(&cmd.equilibrium)?;
    let map = MapSpec {
        a_min: cmd.a_min,
        a_max: cmd.a_max,
        e_min: cmd.e_min,
        e_max: cmd.e_max,
        na: cmd.na,
        ne: cmd.ne,
        equilibrium,
    };
    let cells = stability_map(&params, spec, coupling, &diss, &map)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    let mut csv = Csv::new(&[
        "a", "e", "status", "max_real", "re1", "re2", "re3", "re4", "im1", "im2", "im3", "im4",
    ]);
    for cell in &cells {
        let mut row = vec![fmt_f64(cell.a), fmt_f64(cell.e)];
        match (&cell.status, &cell.report) {
            (CellStatus::Ok, Some(report)) => {
                row.push("ok".to_string());
                row.extend(eigen_row(report));
            }
            _ => {
                row.push("missing".to_string());
                row.extend(std::iter::repeat_n("nan".to_string(), 9));
            }
        }
        csv.row(&row);
    }
    write_atomic(&cmd.output, &csv.into_bytes()).map_err(|e| io_err("writing map", e))?;

    let mut manifest = RunManifest::new(
        json!({
            "system": SystemConfig::from_params(&params, config_deltas.0, config_deltas.1),
            "resonance": spec.to_string(),
            "chi": coupling.chi(),
            "dissipation": diss,
            "grid": map,
        }),
        None,
    );
    manifest.outputs = vec![cmd.output.display().to_string()];
    manifest
        .write(&cmd.output, started.elapsed().as_secs_f64())
        .map_err(|e| io_err("writing manifest", e))?;
    Ok(())
}

fn run_equilibria(cmd: EquilibriaCmd, started: Instant) -> Result<(), CliError> {
    let (params, config_deltas) = cmd.system.load()?;
    let coupling = cmd.model.coupling()?;
    let diss = cmd.model.dissipation(&params, config_deltas)?;
    let spec = parse_resonance(&cmd.resonance)?;
    let extra: Vec<(f64, f64)> = cmd
        .seeds
        .iter()
        .map(|s| parse_angle_pair(s))
        .collect::<Result<_, _>>()?;
    let ctx = ResonanceContext::from(&params);
    let search = equilibria(&ctx, spec, coupling, &diss, &extra)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    let mut csv = Csv::new(&[
        "phi1", "phi2", "residual", "max_real", "re1", "re2", "re3", "re4", "im1", "im2", "im3",
        "im4",
    ]);
    for eq in &search.equilibria {
        let report = linearize(&ctx, spec, coupling, &diss, eq)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let mut row = vec![fmt_f64(eq.phi1), fmt_f64(eq.phi2), fmt_f64(eq.residual)];
        row.extend(eigen_row(&report));
        csv.row(&row);
    }
    for seed in &search.failed_seeds {
        eprintln!("note: no equilibrium from seed ({}, {})", seed.0, seed.1);
    }
    if search.equilibria.is_empty() {
        eprintln!("no equilibrium: the dissipative drive exceeds the restoring torques");
    }

    match &cmd.output {
        Some(path) => {
            write_atomic(path, &csv.into_bytes()).map_err(|e| io_err("writing equilibria", e))?;
            let mut manifest = RunManifest::new(
                json!({
                    "system": SystemConfig::from_params(&params, config_deltas.0, config_deltas.1),
                    "resonance": spec.to_string(),
                    "chi": coupling.chi(),
                    "dissipation": diss,
                    "extra_seeds": extra,
                }),
                None,
            );
            manifest.outputs = vec![path.display().to_string()];
            manifest
                .write(path, started.elapsed().as_secs_f64())
                .map_err(|e| io_err("writing manifest", e))?;
        }
        None => print!("{}", String::from_utf8(csv.into_bytes()).unwrap()),
    }
    Ok(())
}

fn run_coeffs(cmd: CoeffsCmd, started: Instant) -> Result<(), CliError> {
    if let Some(CoeffsAction::DumpPotential { output }) = cmd.action {
        return dump_potential(output.as_deref(), started);
    }
    let (params, config_deltas) = cmd.system.load()?;
    let spec = parse_resonance(&cmd.resonance)?;
    let ctx = ResonanceContext::from(&params);
    let co = coefficients(&ctx, spec);
    let avg = spinspin::averaged_dissipation(&params, config_deltas.0, config_deltas.1)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let mut csv = Csv::new(&[
        "k1",
        "k2",
        "k3",
        "k4",
        "k5",
        "l1",
        "l2",
        "l3",
        "l4",
        "l5",
        "gammabar1",
        "gammabar2",
        "mubar1",
        "mubar2",
    ]);
    csv.row(&[
        fmt_f64(co.k1),
        fmt_f64(co.k2),
        fmt_f64(co.k3),
        fmt_f64(co.k4),
        fmt_f64(co.k5),
        fmt_f64(co.l1),
        fmt_f64(co.l2),
        fmt_f64(co.l3),
        fmt_f64(co.l4),
        fmt_f64(co.l5),
        fmt_f64(avg.gammabar1),
        fmt_f64(avg.gammabar2),
        fmt_f64(avg.mubar1),
        fmt_f64(avg.mubar2),
    ]);
    match &cmd.output {
        Some(path) => {
            write_atomic(path, &csv.into_bytes()).map_err(|e| io_err("writing coeffs", e))?;
            let mut manifest = RunManifest::new(
                json!({
                    "system": SystemConfig::from_params(&params, config_deltas.0, config_deltas.1),
                    "resonance": spec.to_string(),
                }),
                None,
            );
            manifest.outputs = vec![path.display().to_string()];
            manifest
                .write(path, started.elapsed().as_secs_f64())
                .map_err(|e| io_err("writing manifest", e))?;
        }
        None => print!("{}", String::from_utf8(csv.into_bytes()).unwrap()),
    }
    Ok(())
}

fn dump_potential(output: Option<&Path>, started: Instant) -> Result<(), CliError> {
    let mut csv = Csv::new(&[
        "term",
        "amplitude_num",
        "amplitude_den",
        "e_pow",
        "d1_pow",
        "d2_pow",
        "q1_pow",
        "q2_pow",
        "m1_pow",
        "m2_pow",
        "a_pow",
        "t_mult",
        "theta1_mult",
        "theta2_mult",
    ]);
    let mut push = |set: &str, term: &SeriesTerm| {
        csv.row(&[
            set.to_string(),
            term.num.to_string(),
            term.den.to_string(),
            term.e_pow.to_string(),
            term.d1_pow.to_string(),
            term.d2_pow.to_string(),
            term.q1_pow.to_string(),
            term.q2_pow.to_string(),
            term.m1_pow.to_string(),
            term.m2_pow.to_string(),
            term.a_pow.to_string(),
            term.t_mult.to_string(),
            term.th1_mult.to_string(),
            term.th2_mult.to_string(),
        ]);
    };
    for term in &V2_SERIES {
        push("v2", term);
    }
    for term in &V4_SERIES {
        push("v4", term);
    }
    match output {
        Some(path) => {
            write_atomic(path, &csv.into_bytes())
                .map_err(|e| io_err("writing potential table", e))?;
            let mut manifest =
                RunManifest::new(json!({ "table": "expanded potential, O(e^2)" }), None);
            manifest.outputs = vec![path.display().to_string()];
            manifest
                .write(path, started.elapsed().as_secs_f64())
                .map_err(|e| io_err("writing manifest", e))?;
        }
        None => print!("{}", String::from_utf8(csv.into_bytes()).unwrap()),
    }
    Ok(())
}

fn run_check(cmd: CheckCmd) -> Result<(), CliError> {
    if !cmd.conservation {
        return Err(CliError::Validation(
            "nothing to check: pass --conservation".into(),
        ));
    }
    if cmd.model != ModelKind::Full {
        return Err(CliError::Validation(
            "the conservation check applies to the full model (--model full)".into(),
        ));
    }
    let (params, _) = cmd.system.load()?;
    let coupling = Coupling::from_chi(cmd.chi)
        .ok_or_else(|| CliError::Validation(format!("--chi must be 0 or 1, got {}", cmd.chi)))?;
    let cfg = cmd.integrator.config();
    if cmd.tmax <= 0.0 {
        return Err(CliError::Validation(format!(
            "tmax must be positive, got {}",
            cmd.tmax
        )));
    }
    let mut seed = spin_defaults(&params, cmd.p1, cmd.p2);
    seed.theta1 = cmd.theta1;
    seed.theta2 = cmd.theta2;

    let initial = FullState::at_pericenter(&params, &seed);
    let h0 = hamiltonian(&params, coupling, &initial);
    let pf0 = total_angular_momentum(&initial);
    let rhs = full_system(params, coupling, DissipationSpec::None);
    let mut max_dh = 0.0f64;
    let mut max_dpf = 0.0f64;
    spinspin::integrate::propagate_observed(
        &rhs,
        initial.to_array(),
        0.0,
        cmd.tmax * TWO_PI,
        &cfg,
        |_t, y| {
            let s = FullState::from_array(y);
            max_dh = max_dh.max((hamiltonian(&params, coupling, &s) - h0).abs());
            max_dpf = max_dpf.max((total_angular_momentum(&s) - pf0).abs());
        },
    )
    .map_err(|e| CliError::Numerical(e.to_string()))?;

    let h_ok = max_dh <= CONSERVATION_THRESHOLD;
    let pf_ok = max_dpf <= CONSERVATION_THRESHOLD;
    println!(
        "max |H(t)-H(0)|   = {} over {} periods (threshold {:.0e}): {}",
        fmt_f64(max_dh),
        cmd.tmax,
        CONSERVATION_THRESHOLD,
        if h_ok { "PASS" } else { "FAIL" }
    );
    println!(
        "max |Pf(t)-Pf(0)| = {} over {} periods (threshold {:.0e}): {}",
        fmt_f64(max_dpf),
        cmd.tmax,
        CONSERVATION_THRESHOLD,
        if pf_ok { "PASS" } else { "FAIL" }
    );
    if h_ok && pf_ok {
        Ok(())
    } else {
        Err(CliError::Numerical(
            "conservation thresholds exceeded".into(),
        ))
    }
}
