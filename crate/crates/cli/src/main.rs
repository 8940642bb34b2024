use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dfs_core::dfs::default_null_tolerance;
use dfs_sim::commands;
use dfs_sim::config::{GeometrySpec, GridSpec, RfDrive, RfPulse, SurfaceSpec};
use dfs_sim::output::{fmt_num, write_json, Sink, Table};
use dfs_sim::{CliError, RunConfig, OUTPUT_DIR_ENV};

/// Two-atom collective dynamics: couplings, spectra, decoherence-free subspace, master-equation runs.
#[derive(Parser)]
#[command(name = "dfs-sim", version)]
struct Cli {
    /// Write `<stem>.csv` and `<stem>.meta.json` here instead of printing CSV to stdout.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,

    /// Dump the run's operators (Hamiltonian, Kossakowski matrix, dissipator, Liouvillian) as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    dump_operators: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct GeomArgs {
    /// Run configuration (JSON); the flags below override its geometry.
    #[arg(long)]
    config: Option<PathBuf>,
    /// η = k₀R.
    #[arg(long, conflicts_with = "r_over_lambda", allow_negative_numbers = true)]
    eta: Option<f64>,
    /// R/λ₀ (equal to η/2π).
    #[arg(long, visible_alias = "eta-over-2pi", allow_negative_numbers = true)]
    r_over_lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Zeeman splitting δ of the excited triplet.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Coupling constants Ω_ij, Γ_ij, shifts and collective decay rates.
    Couplings(GeomArgs),
    /// Eigenvalues of H_A + H_Ω in both symmetry blocks, Bohr frequency and decay rates.
    Spectrum(GeomArgs),
    /// Antisymmetric shifts on an (l, z) grid in units of λ₀.
    Surface {
        #[command(flatten)]
        geom: GeomArgs,
        /// FROM:TO:POINTS along e_φ.
        #[arg(long, allow_hyphen_values = true)]
        l: Option<GridSpec>,
        /// FROM:TO:POINTS along e_z.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<GridSpec>,
    },
    /// Null space of the dissipator and leakage rates out of the decoherence-free subspace.
    Dfs {
        #[command(flatten)]
        geom: GeomArgs,
        /// Use the R → 0 decay rates.
        #[arg(long)]
        limit_r_zero: bool,
        /// Relative singular-value threshold.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Integrate the master equation described by a config.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Write every snapshot of ρ as JSON.
        #[arg(long, value_name = "PATH")]
        dump_rho: Option<PathBuf>,
    },
    /// Stationary state of the config's time-independent generator.
    Steady {
        #[arg(long)]
        config: PathBuf,
    },
    /// Qubit Bloch vector: static splitting, or RF pulses when any are given.
    Bloch {
        #[command(flatten)]
        geom: GeomArgs,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt_out: Option<f64>,
        /// RF pulse DELTA0,PHI_RF,DETUNING_RF,DURATION; repeat for a sequence.
        #[arg(long, allow_hyphen_values = true)]
        pulse: Vec<String>,
    },
    /// Static splitting δ that steers +z through the given Bloch vector.
    Target {
        #[command(flatten)]
        geom: GeomArgs,
        /// Target X,Y,Z on the unit sphere.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        bloch: Vec<f64>,
    },
    /// Concurrence of a pure two-atom state.
    Concurrence {
        #[command(flatten)]
        geom: GeomArgs,
        /// ground, a1..a3, s1..s3, psi_a1.., psi_s1.., phi_a1.., phi_s1.., product:i,j
        #[arg(long, conflicts_with = "amplitudes")]
        state: Option<String>,
        /// JSON array of 16 [re, im] pairs in the product basis.
        #[arg(long)]
        amplitudes: Option<String>,
    },
    /// Runs the config's sweep block in parallel.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

impl GeomArgs {
    fn has_geometry(&self) -> bool {
        self.eta.is_some() || self.r_over_lambda.is_some()
    }

    /// Config file (if any) with command-line overrides applied.
    fn resolve(&self, fallback: Option<GeometrySpec>) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None if self.has_geometry() => RunConfig::new(GeometrySpec::from_eta(0.0)),
            None => match fallback {
                Some(g) => RunConfig::new(g),
                None => return Err(CliError::config("geometry", "give --eta, --r-over-lambda or --config")),
            },
        };
        if self.has_geometry() {
            cfg.geometry.eta = self.eta;
            cfg.geometry.r_over_lambda = self.r_over_lambda;
        }
        if let Some(t) = self.theta {
            cfg.geometry.theta = t;
        }
        if let Some(p) = self.phi {
            cfg.geometry.phi = p;
        }
        if let Some(d) = self.delta {
            cfg.zeeman = d;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn no_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.sweep.is_some() {
        return Err(CliError::config("sweep", "this config describes a sweep; run it with `dfs-sim sweep`"));
    }
    Ok(())
}

fn parse_pulse(s: &str) -> Result<RfPulse, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::config("pulse", format!("`{s}`: {e}")))?;
    match v[..] {
        [delta0, phi_rf, detuning_rf, duration] => Ok(RfPulse { delta0, phi_rf, detuning_rf, duration }),
        _ => Err(CliError::config("pulse", format!("`{s}`: expected DELTA0,PHI_RF,DETUNING_RF,DURATION"))),
    }
}

struct Run {
    cli_output: Option<PathBuf>,
    dump_operators: Option<PathBuf>,
    argv: Vec<String>,
    started: Instant,
}

impl Run {
    fn sink(&self, cfg: Option<&RunConfig>, default_stem: &str) -> Sink {
        let directory = self.cli_output.clone().or_else(|| cfg.and_then(|c| c.output.directory.clone()));
        let stem = cfg
            .and_then(|c| c.output.stem.clone().or_else(|| c.name.clone()))
            .unwrap_or_else(|| default_stem.to_string());
        Sink { directory, stem }
    }

    fn emit(&self, table: &Table, cfg: Option<&RunConfig>, default_stem: &str) -> Result<(), CliError> {
        let meta = json!({
            "tool": "dfs-sim",
            "version": env!("CARGO_PKG_VERSION"),
            "arguments": self.argv,
            "config": cfg.map(|c| serde_json::to_value(c).unwrap()).unwrap_or(Value::Null),
            "elapsed_seconds": self.started.elapsed().as_secs_f64(),
        });
        self.sink(cfg, default_stem).emit(table, meta)
    }

    fn operators(&self, cfg: &RunConfig) -> Result<(), CliError> {
        match &self.dump_operators {
            Some(p) => write_json(p, &commands::operators_json(cfg)?),
            None => Ok(()),
        }
    }

    fn configured(&self, cfg: &RunConfig) -> Result<(), CliError> {
        no_sweep(cfg)?;
        self.operators(cfg)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let run = Run {
        cli_output: cli.output_dir,
        dump_operators: cli.dump_operators,
        argv: std::env::args().skip(1).collect(),
        started: Instant::now(),
    };
    match cli.command {
        Command::Couplings(g) => {
            let cfg = g.resolve(None)?;
            run.configured(&cfg)?;
            run.emit(&commands::single(commands::couplings_row(&cfg)?), Some(&cfg), "couplings")
        }
        Command::Spectrum(g) => {
            let cfg = g.resolve(None)?;
            run.configured(&cfg)?;
            run.emit(&commands::single(commands::spectrum_row(&cfg)?), Some(&cfg), "spectrum")
        }
        Command::Surface { geom, l, z } => {
            let mut cfg = geom.resolve(Some(GeometrySpec::from_eta(1.0)))?;
            match (l, z, cfg.surface) {
                (Some(l), Some(z), _) => cfg.surface = Some(SurfaceSpec { l, z }),
                (None, None, Some(_)) => {}
                _ => return Err(CliError::config("surface", "give both --l and --z, or a config with a surface block")),
            }
            cfg.validate()?;
            run.configured(&cfg)?;
            run.emit(&commands::surface_table(&cfg)?, Some(&cfg), "surface")
        }
        Command::Dfs { geom, limit_r_zero, tolerance } => {
            let tol = tolerance.unwrap_or_else(default_null_tolerance);
            if limit_r_zero {
                return run.emit(&commands::single(commands::dfs_limit_row(tol)), None, "dfs_limit");
            }
            let cfg = geom.resolve(None)?;
            run.configured(&cfg)?;
            run.emit(&commands::single(commands::dfs_row(&cfg, tol)?), Some(&cfg), "dfs")
        }
        Command::Evolve { config, dump_rho } => {
            let cfg = RunConfig::load(&config)?;
            run.configured(&cfg)?;
            let (traj, frame) = commands::run_evolution(&cfg)?;
            if let Some(p) = dump_rho {
                write_json(&p, &commands::rho_json(&traj))?;
            }
            run.emit(&commands::evolve_table(&cfg, &traj, frame)?, Some(&cfg), "evolve")
        }
        Command::Steady { config } => {
            let cfg = RunConfig::load(&config)?;
            run.configured(&cfg)?;
            run.emit(&commands::single(commands::steady_row(&cfg)?), Some(&cfg), "steady")
        }
        Command::Bloch { geom, t_end, dt_out, pulse } => {
            let mut cfg = geom.resolve(None)?;
            if let Some(t) = t_end {
                cfg.simulation.t_end = t;
            }
            if let Some(dt) = dt_out {
                cfg.simulation.dt_out = dt;
            }
            if !pulse.is_empty() {
                cfg.drive = None;
                cfg.rf = Some(RfDrive { pulses: pulse.iter().map(|p| parse_pulse(p)).collect::<Result<_, _>>()? });
            }
            cfg.validate()?;
            run.configured(&cfg)?;
            run.emit(&commands::bloch_table(&cfg)?, Some(&cfg), "bloch")
        }
        Command::Target { geom, bloch } => {
            let cfg = geom.resolve(None)?;
            if bloch.len() != 3 {
                return Err(CliError::config("bloch", "expected three components X,Y,Z"));
            }
            let delta = commands::target_delta(cfg.geometry.eta()?, [bloch[0], bloch[1], bloch[2]])?;
            println!("{}", fmt_num(delta));
            Ok(())
        }
        Command::Concurrence { geom, state, amplitudes } => {
            let cfg = geom.resolve(Some(GeometrySpec { eta: None, r_over_lambda: Some(0.1), ..GeometrySpec::from_eta(0.0) }))?;
            let amps: Option<Vec<[f64; 2]>> = amplitudes
                .map(|a| serde_json::from_str(&a).map_err(|e| CliError::config("amplitudes", e.to_string())))
                .transpose()?;
            let c = commands::concurrence_of(state.as_deref(), amps.as_deref(), &cfg.geometry()?, cfg.zeeman)?;
            println!("{}", fmt_num(c));
            Ok(())
        }
        Command::Sweep { config } => {
            let cfg = RunConfig::load(&config)?;
            run.operators(&cfg)?;
            run.emit(&commands::sweep_table(&cfg)?, Some(&cfg), "sweep")
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
