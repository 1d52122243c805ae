use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ratchet_cli::commands::{
    profile_path, run_observable_scan, run_propagation, run_sweep, write_output, CommandError, CommandResult, Figure,
    SweepParam, SweepRange,
};
use ratchet_cli::config::{ConfigError, ConfigLayer, RunConfig, CONFIG_ENV};
use ratchet_cli::verify::run_verification;
use ratchet_core::MethodTag;

/// Waveguide-array ratchet simulator.
#[derive(Debug, Parser)]
#[command(name = "ratchet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Intensity profiles `z,j,intensity`.
    Propagate(Flags),
    /// Site moments `z,mean_j,mean_j2,power,method`.
    Observables(Flags),
    /// Observables over a range of one parameter.
    Sweep {
        #[arg(long, value_enum)]
        param: ParamArg,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        count: usize,
        #[command(flatten)]
        flags: Flags,
    },
    /// Preset runs for the figures.
    Figure {
        #[arg(value_enum)]
        id: FigureArg,
        #[command(flatten)]
        flags: Flags,
    },
    /// Cross-oracle checks; exits 2 if any fails.
    Verify(Flags),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParamArg {
    Alpha,
    PhiDeg,
    BetaOverC,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigureArg {
    #[value(name = "3a")]
    Fig3a,
    #[value(name = "3b")]
    Fig3b,
    #[value(name = "4")]
    Fig4,
    #[value(name = "5")]
    Fig5,
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    #[arg(long)]
    half_width: Option<usize>,
    #[arg(long)]
    coupling: Option<f64>,
    /// Absolute ramp β; excludes --beta-over-c.
    #[arg(long, conflicts_with = "beta_over_c")]
    ramp: Option<f64>,
    #[arg(long)]
    beta_over_c: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi_deg: Option<f64>,
    #[arg(long)]
    z_max: Option<f64>,
    #[arg(long)]
    z_steps: Option<usize>,
    #[arg(long)]
    method: Option<MethodTag>,
    #[arg(long)]
    compare_methods: bool,
    /// Divide moments by the total power.
    #[arg(long)]
    normalized: bool,
    /// Also write per-method intensity tables next to --output.
    #[arg(long)]
    emit_profiles: bool,
    /// Sites shown are -window..=window.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    rk4_step: Option<f64>,
    #[arg(long)]
    spectral_points: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// key=value file; defaults to $RATCHET_CONFIG.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn layer(&self) -> ConfigLayer {
        let on = |b: bool| b.then_some(true);
        ConfigLayer {
            half_width: self.half_width,
            coupling: self.coupling,
            ramp: self.ramp,
            beta_over_c: self.beta_over_c,
            alpha: self.alpha,
            phi_deg: self.phi_deg,
            z_max: self.z_max,
            z_steps: self.z_steps,
            method: self.method,
            compare_methods: on(self.compare_methods),
            normalized: on(self.normalized),
            emit_profiles: on(self.emit_profiles),
            window: self.window,
            rk4_step: self.rk4_step,
            spectral_points: self.spectral_points,
            output: self.output.clone(),
        }
    }

    /// File, then the optional preset, then flags.
    fn merged(&self, preset: Option<ConfigLayer>) -> Result<ConfigLayer, ConfigError> {
        let path = self.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let mut layer = match path {
            Some(p) => ConfigLayer::from_file(&p)?,
            None => ConfigLayer::default(),
        };
        if let Some(preset) = preset {
            layer = layer.overlay(&preset);
        }
        let top = self.layer();
        top.check_ramp()?;
        Ok(layer.overlay(&top))
    }
}

fn propagate_cmd(cfg: &RunConfig) -> CommandResult<()> {
    let csv = run_propagation(cfg)?;
    write_output(cfg.output.as_deref(), &csv)
}

fn observables_cmd(cfg: &RunConfig) -> CommandResult<()> {
    if cfg.emit_profiles && cfg.output.is_none() {
        return Err(ConfigError::Invalid { key: "emit_profiles", reason: "requires --output".into() }.into());
    }
    let scan = run_observable_scan(cfg)?;
    write_output(cfg.output.as_deref(), &scan.table)?;
    if let Some(output) = &cfg.output {
        let methods: Vec<MethodTag> = if cfg.compare_methods { MethodTag::ALL.to_vec() } else { vec![cfg.method] };
        for (table, tag) in scan.profiles.iter().zip(methods) {
            write_output(Some(&profile_path(output, tag.as_str())), table)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CommandResult<u8> {
    match cli.command {
        Command::Propagate(flags) => propagate_cmd(&RunConfig::resolve(&flags.merged(None)?)?)?,
        Command::Observables(flags) => observables_cmd(&RunConfig::resolve(&flags.merged(None)?)?)?,
        Command::Sweep { param, from, to, count, flags } => {
            let layer = flags.merged(None)?;
            let param = match param {
                ParamArg::Alpha => SweepParam::Alpha,
                ParamArg::PhiDeg => SweepParam::PhiDeg,
                ParamArg::BetaOverC => SweepParam::BetaOverC,
            };
            let csv = run_sweep(&layer, &SweepRange { param, from, to, count })?;
            write_output(layer.output.as_deref(), &csv)?;
        }
        Command::Figure { id, flags } => {
            let figure = match id {
                FigureArg::Fig3a => Figure::Fig3a,
                FigureArg::Fig3b => Figure::Fig3b,
                FigureArg::Fig4 => Figure::Fig4,
                FigureArg::Fig5 => Figure::Fig5,
            };
            let cfg = RunConfig::resolve(&flags.merged(Some(figure.preset()))?)?;
            if figure.is_profile() {
                propagate_cmd(&cfg)?;
            } else {
                observables_cmd(&cfg)?;
            }
        }
        Command::Verify(flags) => {
            let cfg = RunConfig::resolve(&flags.merged(None)?)?;
            let report = run_verification(&cfg);
            write_output(cfg.output.as_deref(), &report.to_string())?;
            if !report.passed() {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CommandError::exit_code(&e))
        }
    }
}
