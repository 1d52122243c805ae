//! CSV-producing runs. Every function returns the full table as a string so
//! that output is assembled by a single writer in a fixed order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use ratchet_core::lattice::{build_model, required_half_width, InputSpec, LatticeModel};
use ratchet_core::observables::{uniform_grid, ObservableSeries};
use ratchet_core::propagators::{propagate_series, LEAKAGE_FLAG_THRESHOLD};
use ratchet_core::{MethodTag, PropagationMethod};
use thiserror::Error;

use crate::config::{ConfigError, ConfigLayer, RunConfig};

pub const PROFILE_HEADER: &str = "z,j,intensity";
pub const OBSERVABLE_HEADER: &str = "z,mean_j,mean_j2,power,method";

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Simulation(#[from] ratchet_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CommandError {
    /// 1 for usage and I/O problems, 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Simulation(ratchet_core::Error::NumericalFailure { .. }) => 3,
            _ => 1,
        }
    }
}

pub type CommandResult<T> = Result<T, CommandError>;

/// Twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

impl RunConfig {
    pub fn propagation_method(&self, tag: MethodTag) -> PropagationMethod<f64> {
        match tag {
            MethodTag::Green => PropagationMethod::Green,
            MethodTag::Rk4 => PropagationMethod::Rk4 { step: self.rk4_step },
            MethodTag::Spectral => PropagationMethod::Spectral { points: self.spectral_points },
        }
    }

    pub fn model(&self) -> CommandResult<LatticeModel<f64>> {
        Ok(build_model(self.effective_half_width(), self.coupling, self.ramp)?)
    }

    pub fn input(&self) -> CommandResult<InputSpec<f64>> {
        Ok(InputSpec::from_degrees(self.alpha, self.phi_deg)?)
    }

    pub fn z_grid(&self) -> Vec<f64> {
        uniform_grid(self.effective_z_max(), self.z_steps)
    }

    fn methods(&self) -> Vec<MethodTag> {
        if self.compare_methods {
            MethodTag::ALL.to_vec()
        } else {
            vec![self.method]
        }
    }
}

fn preamble(command: &str, cfg: &RunConfig, model: &LatticeModel<f64>, leakage: f64) -> String {
    let mut out = format!("# ratchet {command}\n{cfg}");
    if !model.truncation_adequate() {
        let needed = required_half_width(model.coupling(), model.ramp()).unwrap_or(0);
        let _ = writeln!(out, "# warning: half_width {} is below the adequate {needed}", model.half_width());
    }
    if leakage > LEAKAGE_FLAG_THRESHOLD {
        let _ = writeln!(out, "# warning: edge leakage {} exceeds {LEAKAGE_FLAG_THRESHOLD:e}", fmt_num(leakage));
    }
    out
}

/// `z,j,intensity` rows for `j = -window..=window`, z-major.
pub fn run_propagation(cfg: &RunConfig) -> CommandResult<String> {
    let model = cfg.model()?;
    if cfg.window > model.half_width() {
        return Err(ConfigError::Invalid {
            key: "window",
            reason: format!("{} exceeds half_width {}", cfg.window, model.half_width()),
        }
        .into());
    }
    let states = propagate_series(&model, &cfg.input()?, &cfg.z_grid(), &cfg.propagation_method(cfg.method))?;
    let leakage = states.iter().map(|s| s.edge_leakage()).fold(0.0, f64::max);
    let mut out = preamble("propagate", cfg, &model, leakage);
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    let w = cfg.window as i64;
    for state in &states {
        let z = fmt_num(state.z());
        for j in -w..=w {
            let _ = writeln!(out, "{z},{j},{}", fmt_num(state.amplitude(j).unwrap().norm_sqr()));
        }
    }
    Ok(out)
}

fn observable_series(cfg: &RunConfig, model: &LatticeModel<f64>) -> CommandResult<Vec<ObservableSeries<f64>>> {
    let input = cfg.input()?;
    let grid = cfg.z_grid();
    cfg.methods()
        .into_iter()
        .map(|tag| Ok(ObservableSeries::compute(model, &input, &grid, &cfg.propagation_method(tag))?))
        .collect()
}

fn observable_rows(out: &mut String, prefix: &str, series: &ObservableSeries<f64>, normalized: bool) {
    let (first, second) = if normalized {
        series.normalized_moments()
    } else {
        (series.mean_site.clone(), series.mean_site_sq.clone())
    };
    for m in 0..series.len() {
        let _ = writeln!(
            out,
            "{prefix}{},{},{},{},{}",
            fmt_num(series.z_grid[m]),
            fmt_num(first[m]),
            fmt_num(second[m]),
            fmt_num(series.power[m]),
            series.method
        );
    }
}

/// Intensity table of a series, in the `propagate` layout.
pub fn profile_table(series: &ObservableSeries<f64>, window: usize) -> String {
    let mut out = format!("# method={}\n{PROFILE_HEADER}\n", series.method);
    let w = window.min(series.half_width()) as i64;
    for m in 0..series.len() {
        let z = fmt_num(series.z_grid[m]);
        for j in -w..=w {
            let _ = writeln!(out, "{z},{j},{}", fmt_num(series.intensity_at(m, j).unwrap()));
        }
    }
    out
}

/// Result of `observables`: the main table plus optional profile tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutput {
    pub table: String,
    pub profiles: Vec<String>,
}

/// `z,mean_j,mean_j2,power,method` rows, one group per method.
pub fn run_observable_scan(cfg: &RunConfig) -> CommandResult<ScanOutput> {
    let model = cfg.model()?;
    let all = observable_series(cfg, &model)?;
    let leakage = all.iter().map(|s| s.max_edge_leakage).fold(0.0, f64::max);
    let mut table = preamble("observables", cfg, &model, leakage);
    if cfg.normalized {
        table.push_str("# moments divided by total power\n");
    }
    table.push_str(OBSERVABLE_HEADER);
    table.push('\n');
    for series in &all {
        observable_rows(&mut table, "", series, cfg.normalized);
    }
    let profiles = if cfg.emit_profiles { all.iter().map(|s| profile_table(s, cfg.window)).collect() } else { Vec::new() };
    Ok(ScanOutput { table, profiles })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    PhiDeg,
    BetaOverC,
}

impl SweepParam {
    pub fn column(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::PhiDeg => "phi_deg",
            SweepParam::BetaOverC => "beta_over_c",
        }
    }

    fn apply(self, base: &ConfigLayer, value: f64) -> ConfigLayer {
        let mut layer = base.clone();
        match self {
            SweepParam::Alpha => layer.alpha = Some(value),
            SweepParam::PhiDeg => layer.phi_deg = Some(value),
            SweepParam::BetaOverC => {
                layer.ramp = None;
                layer.beta_over_c = Some(value);
            }
        }
        layer
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.from];
        }
        let last = (self.count - 1) as f64;
        (0..self.count).map(|i| self.from + (self.to - self.from) * i as f64 / last).collect()
    }
}

/// Observable scan repeated over one parameter. Points run in parallel and
/// are written in sweep order.
pub fn run_sweep(layer: &ConfigLayer, range: &SweepRange) -> CommandResult<String> {
    if range.count == 0 || !range.from.is_finite() || !range.to.is_finite() {
        return Err(ConfigError::Invalid { key: "sweep", reason: "needs finite bounds and count >= 1".into() }.into());
    }
    let base = RunConfig::resolve(layer)?;
    let blocks: Vec<CommandResult<String>> = range
        .values()
        .into_par_iter()
        .map(|value| {
            let cfg = RunConfig::resolve(&range.param.apply(layer, value))?;
            let model = cfg.model()?;
            let mut block = String::new();
            if !model.truncation_adequate() {
                let _ = writeln!(block, "# warning: {}={value}: half_width {} is inadequate", range.param.column(), model.half_width());
            }
            let prefix = format!("{},", fmt_num(value));
            for series in observable_series(&cfg, &model)? {
                observable_rows(&mut block, &prefix, &series, cfg.normalized);
            }
            Ok(block)
        })
        .collect();
    let mut out = format!(
        "# ratchet sweep\n# sweep={} from={} to={} count={}\n{base}",
        range.param.column(),
        range.from,
        range.to,
        range.count
    );
    let _ = writeln!(out, "{},{OBSERVABLE_HEADER}", range.param.column());
    for block in blocks {
        out.push_str(&block?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Bloch oscillation intensity map.
    Fig3a,
    /// Ratchet intensity map.
    Fig3b,
    /// Moments for φ = 37°.
    Fig4,
    /// Moments for φ = 217°.
    Fig5,
}

impl Figure {
    pub fn preset(self) -> ConfigLayer {
        let mut layer = ConfigLayer {
            beta_over_c: Some(0.73),
            coupling: Some(1.0),
            phi_deg: Some(37.0),
            alpha: Some(1.0),
            ..Default::default()
        };
        match self {
            Figure::Fig3a => layer.alpha = Some(0.0),
            Figure::Fig3b => {}
            Figure::Fig4 | Figure::Fig5 => {
                if self == Figure::Fig5 {
                    layer.phi_deg = Some(217.0);
                }
                layer.z_max = Some(2.0 * std::f64::consts::TAU / 0.73);
            }
        }
        layer
    }

    pub fn is_profile(self) -> bool {
        matches!(self, Figure::Fig3a | Figure::Fig3b)
    }
}

pub fn write_output(path: Option<&Path>, text: &str) -> CommandResult<()> {
    match path {
        Some(path) => std::fs::write(path, text).map_err(|source| CommandError::Io { path: path.display().to_string(), source }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CommandError::Io { path: "<stdout>".into(), source })
        }
    }
}

/// `out.csv` → `out_profiles_green.csv`.
pub fn profile_path(output: &Path, method: &str) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "observables".into());
    output.with_file_name(format!("{stem}_profiles_{method}.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(layer: ConfigLayer) -> RunConfig {
        RunConfig::resolve(&layer).unwrap()
    }

    fn data_rows(csv: &str) -> Vec<Vec<String>> {
        csv.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(str::to_owned).collect())
            .collect()
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(-0.012345678901234), "-1.23456789012e-2");
    }

    #[test]
    fn two_step_propagation() {
        let csv = run_propagation(&cfg(ConfigLayer { z_steps: Some(2), ..Default::default() })).unwrap();
        let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, PROFILE_HEADER);
        let rows = data_rows(&csv);
        assert_eq!(rows.len(), 2 * 25);
        let first: Vec<_> = rows.iter().take(25).collect();
        for row in first {
            let j: i64 = row[1].parse().unwrap();
            let v: f64 = row[2].parse().unwrap();
            let want = if j == 0 || j == 1 { 1.0 } else { 0.0 };
            assert_eq!(row[0].parse::<f64>().unwrap(), 0.0);
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn bloch_profiles_are_symmetric() {
        let csv = run_propagation(&cfg(ConfigLayer { alpha: Some(0.0), z_steps: Some(40), ..Default::default() })).unwrap();
        let rows = data_rows(&csv);
        for block in rows.chunks(25) {
            for j in 0..12 {
                let l: f64 = block[j][2].parse().unwrap();
                let r: f64 = block[24 - j][2].parse().unwrap();
                assert!((l - r).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn window_bigger_than_array_is_rejected() {
        let err = run_propagation(&cfg(ConfigLayer { half_width: Some(5), ..Default::default() })).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn undersized_array_is_warned() {
        let layer = ConfigLayer { half_width: Some(12), beta_over_c: Some(0.3), z_steps: Some(7), ..Default::default() };
        let csv = run_propagation(&cfg(layer)).unwrap();
        assert!(csv.contains("# warning: half_width 12 is below the adequate 24"));
        assert!(csv.contains("# warning: edge leakage"));
    }

    #[test]
    fn compare_methods_groups() {
        let layer = ConfigLayer { compare_methods: Some(true), z_steps: Some(6), ..Default::default() };
        let out = run_observable_scan(&cfg(layer)).unwrap();
        let rows = data_rows(&out.table);
        assert_eq!(rows.len(), 18);
        let methods: Vec<&str> = rows.iter().map(|r| r[4].as_str()).collect();
        assert_eq!(&methods[..6], &["green"; 6]);
        assert_eq!(&methods[6..12], &["rk4"; 6]);
        assert_eq!(&methods[12..], &["spectral"; 6]);
        for (i, row) in rows.iter().take(6).enumerate() {
            for col in 1..4 {
                let a: f64 = row[col].parse().unwrap();
                for offset in [6, 12] {
                    let b: f64 = rows[i + offset][col].parse().unwrap();
                    assert!((a - b).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn normalized_moments() {
        let layer = ConfigLayer { normalized: Some(true), z_steps: Some(2), ..Default::default() };
        let rows = data_rows(&run_observable_scan(&cfg(layer)).unwrap().table);
        assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.5);
        assert_eq!(rows[0][3].parse::<f64>().unwrap(), 2.0);
    }

    #[test]
    fn emitted_profiles() {
        let layer = ConfigLayer { emit_profiles: Some(true), z_steps: Some(3), ..Default::default() };
        let out = run_observable_scan(&cfg(layer)).unwrap();
        assert_eq!(out.profiles.len(), 1);
        assert_eq!(data_rows(&out.profiles[0]).len(), 75);
        assert_eq!(profile_path(Path::new("/tmp/x/scan.csv"), "rk4"), PathBuf::from("/tmp/x/scan_profiles_rk4.csv"));
    }

    #[test]
    fn sweep_layout() {
        let range = SweepRange { param: SweepParam::Alpha, from: 0.0, to: 1.0, count: 3 };
        let layer = ConfigLayer { z_steps: Some(4), ..Default::default() };
        let csv = run_sweep(&layer, &range).unwrap();
        assert!(csv.lines().any(|l| l == "alpha,z,mean_j,mean_j2,power,method"));
        let rows = data_rows(&csv);
        assert_eq!(rows.len(), 12);
        assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
        assert_eq!(rows[11][0].parse::<f64>().unwrap(), 1.0);
        // alpha = 0 has no transport
        for row in &rows[..4] {
            assert!(row[2].parse::<f64>().unwrap().abs() < 1e-9);
        }
        assert_eq!(csv, run_sweep(&layer, &range).unwrap());
    }

    #[test]
    fn sweep_over_ramp_uses_per_point_defaults() {
        let range = SweepRange { param: SweepParam::BetaOverC, from: 0.5, to: 2.0, count: 2 };
        let csv = run_sweep(&ConfigLayer { z_steps: Some(3), ..Default::default() }, &range).unwrap();
        let rows = data_rows(&csv);
        // z_max follows each point's Bloch period
        let last_z: f64 = rows[2][1].parse().unwrap();
        assert!((last_z - 4.0 * std::f64::consts::TAU / 0.5).abs() < 1e-9);
        assert!(run_sweep(&ConfigLayer::default(), &SweepRange { count: 0, ..range }).is_err());
    }

    #[test]
    fn figure_presets() {
        assert_eq!(Figure::Fig3a.preset().alpha, Some(0.0));
        assert_eq!(Figure::Fig5.preset().phi_deg, Some(217.0));
        assert!(Figure::Fig3b.is_profile() && !Figure::Fig4.is_profile());
    }

    #[test]
    fn flat_array_runs() {
        let layer = ConfigLayer { beta_over_c: Some(0.0), z_max: Some(3.0), z_steps: Some(4), ..Default::default() };
        let rows = data_rows(&run_observable_scan(&cfg(layer)).unwrap().table);
        let z: f64 = rows[3][0].parse().unwrap();
        let mean: f64 = rows[3][1].parse().unwrap();
        assert!((mean - (1.0 - 2.0 * z * 37f64.to_radians().sin())).abs() < 1e-9);
    }
}
