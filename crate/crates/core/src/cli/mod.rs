//! Command-line front end: configuration, artifact formats, acquisition
//! planning and the end-to-end pipeline.

pub mod config;
pub mod formats;
pub mod pipeline;
pub mod planner;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use planner::{estimate_time, Method, TimeEstimate};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "nvscope", version, about = "NV spin-noise molecular imaging simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// key = value configuration file; unspecified keys keep their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key (repeatable), e.g. --set grid_n=32.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Shorthand for --set input=PATH (use `toroid` for the procedural phantom).
    #[arg(long, global = true)]
    pub input: Option<String>,
    /// Shorthand for --set output_dir=DIR.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize the phantom: hydrogen count, extent, B_rms at the sensor, spectral spread.
    PhantomInfo {
        #[command(flatten)]
        common: Common,
    },
    /// Encode all orientations; writes the spectra CSV and the signal array.
    Encode {
        #[command(flatten)]
        common: Common,
    },
    /// Filter and back-project a stored signal array.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Signal array to read (defaults to <output_dir>/signal.nvs).
        #[arg(long)]
        signal: Option<PathBuf>,
    },
    /// Run every stage and write all artifacts plus metrics.
    Pipeline {
        #[command(flatten)]
        common: Common,
    },
    /// Acquisition time for a projection count and spectral spread.
    EstimateTime {
        #[command(flatten)]
        common: Common,
        /// Number of projections (defaults to n_theta × n_phi).
        #[arg(long)]
        projections: Option<usize>,
        /// Spectral spread in Hz (defaults to the phantom's maximum occupied spread).
        #[arg(long)]
        spread_hz: Option<f64>,
        /// xy8, dqc or enhanced (defaults to timing_method).
        #[arg(long)]
        method: Option<String>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::PhantomInfo { common }
            | Command::Encode { common }
            | Command::Reconstruct { common, .. }
            | Command::Pipeline { common }
            | Command::EstimateTime { common, .. } => common,
        }
    }
}

/// Builds the effective configuration: defaults, then file, then overrides.
pub fn resolve_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&common.overrides)?;
    if let Some(input) = &common.input {
        cfg.input = input.clone();
    }
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Executes a parsed command, returning the text to print on success.
/// The resolved configuration is returned alongside any error for echoing.
pub fn run(cli: &Cli) -> std::result::Result<String, (crate::Error, Option<RunConfig>)> {
    let cfg = resolve_config(cli.command.common()).map_err(|e| (e, None))?;
    execute(&cli.command, &cfg).map_err(|e| (e, Some(cfg)))
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<String> {
    use pipeline::*;
    match command {
        Command::PhantomInfo { .. } => phantom_info(cfg),
        Command::Encode { .. } => {
            let placement = place(cfg).map_err(|e| e.in_stage("phantom"))?;
            let (spectra, signal) = encode_stage(cfg, &placement).map_err(|e| e.in_stage("encode"))?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            let spectra_path = cfg.output_dir.join(SPECTRA_FILE);
            let signal_path = cfg.output_dir.join(SIGNAL_FILE);
            formats::save_spectra(&spectra_path, &spectra)?;
            formats::save_signal(&signal_path, &signal)?;
            Ok(format!(
                "wrote {}\nwrote {}\nn_r = {}\nn_projections = {}\n",
                spectra_path.display(),
                signal_path.display(),
                signal.n_r(),
                signal.n_projections()
            ))
        }
        Command::Reconstruct { signal, .. } => {
            let path = signal.clone().unwrap_or_else(|| cfg.output_dir.join(SIGNAL_FILE));
            let sig = formats::load_signal(&path)?;
            let (raw, image) = reconstruct_stage(cfg, &sig).map_err(|e| e.in_stage("reconstruct"))?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            let raw_path = cfg.output_dir.join(RECON_RAW_FILE);
            let img_path = cfg.output_dir.join(RECON_FILE);
            formats::save_grid(&raw_path, &raw.grid)?;
            formats::save_grid(&img_path, &image.grid)?;
            let peak = image.argmax_position();
            Ok(format!(
                "wrote {}\nwrote {}\nmode = {}\nargmax_nm = {} {} {}\n",
                raw_path.display(),
                img_path.display(),
                image.mode,
                peak.x,
                peak.y,
                peak.z
            ))
        }
        Command::Pipeline { .. } => {
            let report = run_pipeline(cfg)?;
            let mut out = report.metrics.to_text();
            for p in &report.artifacts {
                out.push_str(&format!("wrote {}\n", p.display()));
            }
            Ok(out)
        }
        Command::EstimateTime {
            projections,
            spread_hz,
            method,
            ..
        } => {
            let method = match method {
                Some(m) => m.parse()?,
                None => cfg.timing_method,
            };
            let n = projections.unwrap_or(cfg.n_theta * cfg.n_phi);
            let spread = match spread_hz {
                Some(s) => *s,
                None => max_spread_hz(&encode_clean(cfg, &place(cfg)?)?),
            };
            Ok(estimate_time(n, spread, cfg.delta_f_hz, method)?.to_string())
        }
    }
}
