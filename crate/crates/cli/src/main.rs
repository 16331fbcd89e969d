//! `toroidsim` command-line front end.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toroidsim::config::CONFIG_ENV_VAR;
use toroidsim::RunConfig;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "toroidsim",
    version,
    about = "Silica microtoroid resonator design and spectrum analysis"
)]
struct Cli {
    /// Config file of `key = value` lines. Defaults to $TOROIDSIM_CONFIG.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set synth.seed=4`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OpticsArgs {
    /// Toroid major diameter (µm).
    #[arg(long, allow_negative_numbers = true)]
    diameter_um: Option<f64>,
    /// Vacuum wavelength (nm).
    #[arg(long, allow_negative_numbers = true)]
    wavelength_nm: Option<f64>,
    /// Radial order n (1..=10).
    #[arg(long)]
    radial_order: Option<u32>,
}

#[derive(Debug, Args)]
struct ThermalArgs {
    /// Incident laser power (mW).
    #[arg(long, allow_negative_numbers = true)]
    power_mw: Option<f64>,
    /// Initial disk diameter (µm).
    #[arg(long, allow_negative_numbers = true)]
    disk_diameter_um: Option<f64>,
    /// Radial grid cells.
    #[arg(long)]
    nr: Option<u64>,
    /// SOR relaxation factor.
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Stop when the largest correction falls below this (K).
    #[arg(long)]
    tol_k: Option<f64>,
    /// Iteration cap.
    #[arg(long)]
    max_iterations: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List resonance wavelengths in a band.
    Modes {
        #[command(flatten)]
        optics: OpticsArgs,
        /// Band as `lo:hi` in nm.
        #[arg(long, value_name = "LO:HI")]
        band_nm: Option<String>,
        /// Also write the table as CSV.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Free spectral range, or the diameter that produces a given one.
    Fsr {
        #[command(flatten)]
        optics: OpticsArgs,
        /// Invert this measured FSR (nm) into a diameter.
        #[arg(long, value_name = "NM", allow_negative_numbers = true)]
        from_fsr_nm: Option<f64>,
    },
    /// Fiber polish angle for phase matching.
    PolishAngle {
        #[command(flatten)]
        optics: OpticsArgs,
    },
    /// Steady-state temperature of the laser-heated disk.
    Thermal {
        #[command(flatten)]
        thermal: ThermalArgs,
        /// Write the temperature field as CSV.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Write the per-iteration residual.
        #[arg(long, value_name = "PATH")]
        log: Option<PathBuf>,
        /// Sweep incident power `lo:hi:count` (mW) and tabulate the melt front.
        #[arg(long, value_name = "LO:HI:COUNT")]
        sweep_mw: Option<String>,
    },
    /// Toroid shape at the end of reflow.
    Reflow {
        #[command(flatten)]
        thermal: ThermalArgs,
        /// Use this melt-front radius (µm) instead of solving for it.
        #[arg(long, value_name = "UM", allow_negative_numbers = true)]
        front_um: Option<f64>,
    },
    /// Implant depth profile, dose and mode overlap.
    Implant {
        /// Peak concentration (ions/cm³).
        #[arg(long, allow_negative_numbers = true)]
        peak_cm3: Option<f64>,
        /// Write the depth profile as CSV.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Report the overlap with the fundamental slab mode.
        #[arg(long)]
        overlap: bool,
    },
    /// Synthesize a photoluminescence spectrum.
    Synth {
        #[command(flatten)]
        optics: OpticsArgs,
        /// Band as `lo:hi` in nm.
        #[arg(long, value_name = "LO:HI")]
        band_nm: Option<String>,
        /// Noise seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Intrinsic quality factor.
        #[arg(long)]
        q: Option<f64>,
        /// Fiber gap (µm).
        #[arg(long, allow_negative_numbers = true)]
        gap_um: Option<f64>,
        /// Output CSV; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Detect and classify the comb in a spectrum CSV.
    Analyze {
        /// Two-column CSV `wavelength_nm,intensity`; `-` reads stdin.
        input: PathBuf,
        #[command(flatten)]
        optics: OpticsArgs,
        /// Instrument resolution (nm).
        #[arg(long)]
        resolution_nm: Option<f64>,
        /// Prominence threshold (intensity units).
        #[arg(long)]
        min_prominence: Option<f64>,
        /// JSON report path; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from));
    if let Some(p) = path {
        let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
        config
            .apply_text(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
    }
    for o in &cli.overrides {
        config.apply_override(o)?;
    }
    Ok(config)
}

fn set<T: ToString>(config: &mut RunConfig, key: &str, value: Option<T>) -> Result<(), CliError> {
    if let Some(v) = value {
        config.set(key, &v.to_string())?;
    }
    Ok(())
}

impl OpticsArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<(), CliError> {
        set(c, "geometry.diameter_um", self.diameter_um)?;
        set(c, "optics.wavelength_nm", self.wavelength_nm)?;
        set(c, "mode.radial_order", self.radial_order)
    }
}

impl ThermalArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<(), CliError> {
        set(c, "laser.power_mw", self.power_mw)?;
        set(c, "thermal.disk_diameter_um", self.disk_diameter_um)?;
        set(c, "thermal.nr", self.nr)?;
        set(c, "thermal.omega", self.omega)?;
        set(c, "thermal.tol_k", self.tol_k)?;
        set(c, "thermal.max_iterations", self.max_iterations)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = load_config(&cli)?;
    match cli.command {
        Command::Modes {
            optics,
            band_nm,
            out,
        } => {
            optics.apply(&mut config)?;
            set(&mut config, "modes.band_nm", band_nm)?;
            commands::modes(&config, out.as_deref())
        }
        Command::Fsr {
            optics,
            from_fsr_nm,
        } => {
            optics.apply(&mut config)?;
            commands::fsr(&config, from_fsr_nm)
        }
        Command::PolishAngle { optics } => {
            optics.apply(&mut config)?;
            commands::polish_angle(&config)
        }
        Command::Thermal {
            thermal,
            out,
            log,
            sweep_mw,
        } => {
            thermal.apply(&mut config)?;
            match sweep_mw {
                Some(s) => commands::thermal_sweep(&config, &s),
                None => commands::thermal(&config, out.as_deref(), log.as_deref()),
            }
        }
        Command::Reflow { thermal, front_um } => {
            thermal.apply(&mut config)?;
            commands::reflow(&config, front_um)
        }
        Command::Implant {
            peak_cm3,
            out,
            overlap,
        } => {
            set(&mut config, "implant.peak_concentration_cm3", peak_cm3)?;
            commands::implant(&config, out.as_deref(), overlap)
        }
        Command::Synth {
            optics,
            band_nm,
            seed,
            q,
            gap_um,
            out,
        } => {
            optics.apply(&mut config)?;
            set(&mut config, "synth.band_nm", band_nm)?;
            set(&mut config, "synth.seed", seed)?;
            set(&mut config, "synth.q", q)?;
            set(&mut config, "synth.gap_um", gap_um)?;
            commands::synth(&config, out.as_deref())
        }
        Command::Analyze {
            input,
            optics,
            resolution_nm,
            min_prominence,
            report,
        } => {
            optics.apply(&mut config)?;
            set(&mut config, "analyze.resolution_nm", resolution_nm)?;
            set(&mut config, "analyze.min_prominence", min_prominence)?;
            commands::analyze(&config, &input, report.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    // clap exits with code 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
