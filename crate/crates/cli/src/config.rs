//! Flat `key=value` run configuration with `[section]` headers.
//!
//! Every key has a default; a config file and `--set` overrides replace
//! defaults, and unknown keys are rejected.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use sfwm_core::analysis::{G2Zero, SummaryOptions, WindowAnchor, WindowSpec};
use sfwm_core::atomic::{FieldParams, Geometry, LadderSystem, VaporCell};
use sfwm_core::biphoton::{CoefficientModel, GsiOptions, TimeOrdering};
use sfwm_core::counting::{ChannelSpec, DetectorSpec, FWHM_PER_SIGMA};
use sfwm_core::filter::{FilterSpec, Lineshape};
use sfwm_core::io::read_key_values;
use sfwm_core::scaling::ScalingParams;
use sfwm_core::waveform::TimeGrid;

use crate::error::CliError;

const DEFAULTS: &[(&str, &str)] = &[
    ("run.scenario", "default"),
    ("run.seed", "1"),
    ("system.gamma31_hz", "6.07e6"),
    ("system.gamma32_hz", "0.66e6"),
    ("system.lambda_pump_m", "780.2e-9"),
    ("system.lambda_coupling_m", "775.8e-9"),
    ("system.lambda_idler_m", "780.2e-9"),
    ("system.lambda_signal_m", "775.8e-9"),
    ("system.atom_mass_kg", "1.44316e-25"),
    ("fields.rabi_pump_hz", "10e6"),
    ("fields.rabi_coupling_hz", "50e6"),
    ("fields.detuning_pump_hz", "810e6"),
    ("fields.detuning_coupling_hz", "-810e6"),
    ("fields.geometry", "counter"),
    ("cell.temperature_k", "325.15"),
    ("cell.length_m", "12.5e-3"),
    ("cell.optical_depth", "0"),
    ("grid.dt_s", "10e-12"),
    ("grid.samples", "4096"),
    ("grid.velocity_nodes", "513"),
    ("grid.span_sigmas", "6"),
    ("gsi.coefficient", "perturbative"),
    ("gsi.ordering", "causal"),
    ("filter.etalon_fwhm_hz", "940e6"),
    ("filter.absorption_fwhm_hz", "540e6"),
    ("filter.etalon_offset_hz", "0"),
    ("filter.absorption_offset_hz", "0"),
    ("filter.etalon_shape", "gaussian"),
    ("filter.absorption_shape", "gaussian"),
    ("filter.alphas", "0,2,6"),
    ("detector.efficiency", "0.4"),
    ("detector.jitter_fwhm_s", "300e-12"),
    ("detector.dead_time_s", "50e-9"),
    ("detector.dark_rate_hz", "200"),
    ("channel.signal_transmission", "0.145"),
    ("channel.idler_transmission", "0.145"),
    ("channel.splitter", "false"),
    ("source.pair_rate_hz", "8.98e6"),
    ("source.duration_s", "0.1"),
    ("source.waveform", "detector"),
    ("source.alpha", "0"),
    ("analysis.bin_width_s", "100e-12"),
    ("analysis.range_s", "50e-9"),
    ("analysis.window_s", "4.1e-9"),
    ("analysis.anchor", "peak"),
    ("analysis.wing_inner_s", "20e-9"),
    ("analysis.wing_outer_s", "40e-9"),
    ("analysis.g2_zero", "peak"),
    ("analysis.dead_time_correction", "true"),
    ("analysis.duration_s", "auto"),
    ("sweep.enabled", "false"),
    ("sweep.od_values", "1,2,3,4,5,6,7"),
    ("sweep.a_signal", "1e5"),
    ("sweep.a_idler", "1e5"),
    ("sweep.b_coincidence", "1e3"),
    ("sweep.reabsorption", "0"),
    ("sweep.noise", "0"),
    ("sweep.heralding_exponent", "none"),
    ("sweep.heralding_prefactor", "0.01"),
];

/// Where the Monte Carlo source draws its delays from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceWaveform {
    Gsi,
    /// `G_det` after the filter at `source.alpha`.
    Detector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub pair_rate: f64,
    pub duration: f64,
    pub waveform: SourceWaveform,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub enabled: bool,
    pub od_values: Vec<f64>,
    pub model: ScalingParams,
    /// Relative Gaussian noise on every rate.
    pub noise: f64,
    /// Replaces the coincidence model by `n_c = n_s·prefactor·od^exponent`.
    pub heralding: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: u64,
    pub system: LadderSystem,
    pub fields: FieldParams,
    pub cell: VaporCell,
    pub grid: TimeGrid,
    pub velocity_nodes: usize,
    pub span_sigmas: f64,
    pub gsi: GsiOptions,
    pub filter: FilterSpec,
    pub alphas: Vec<f64>,
    pub signal: ChannelSpec,
    pub idler: ChannelSpec,
    pub splitter: bool,
    pub source: SourceConfig,
    pub analysis: SummaryOptions,
    pub analysis_duration: Option<f64>,
    pub sweep: SweepConfig,
    /// Resolved key/value pairs, sorted by key.
    resolved: BTreeMap<String, String>,
}

impl RunConfig {
    /// Defaults, overlaid by the file at `path` (if any) and then by `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut pairs = Vec::new();
        if let Some(path) = path {
            let file = File::open(path)
                .map_err(|e| CliError::Config(format!("cannot open config file {}: {e}", path.display())))?;
            pairs = read_key_values(BufReader::new(file))
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        }
        pairs.extend(overrides.iter().cloned());
        Self::from_pairs(&pairs)
    }

    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, CliError> {
        let mut map: BTreeMap<String, String> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in pairs {
            match map.get_mut(k) {
                Some(slot) => *slot = v.clone(),
                None => return Err(CliError::Config(format!("unknown config key {k:?}"))),
            }
        }
        let r = Reader(&map);
        let hz = |key: &str| r.f64(key).map(|v| v * TAU);

        let system = LadderSystem {
            gamma31: hz("system.gamma31_hz")?,
            gamma32: hz("system.gamma32_hz")?,
            lambda_pump: r.f64("system.lambda_pump_m")?,
            lambda_coupling: r.f64("system.lambda_coupling_m")?,
            lambda_idler: r.f64("system.lambda_idler_m")?,
            lambda_signal: r.f64("system.lambda_signal_m")?,
            atom_mass: r.f64("system.atom_mass_kg")?,
        };
        let fields = FieldParams {
            rabi_pump: hz("fields.rabi_pump_hz")?,
            rabi_coupling: hz("fields.rabi_coupling_hz")?,
            detuning_pump: hz("fields.detuning_pump_hz")?,
            detuning_coupling: hz("fields.detuning_coupling_hz")?,
            geometry: r.choice(
                "fields.geometry",
                &[("counter", Geometry::CounterPropagating), ("co", Geometry::CoPropagating)],
            )?,
        };
        let cell = VaporCell {
            temperature: r.f64("cell.temperature_k")?,
            length: r.f64("cell.length_m")?,
            optical_depth: r.f64("cell.optical_depth")?,
        };
        let samples = r.usize("grid.samples")?;
        let grid = TimeGrid::centered(r.f64("grid.dt_s")?, samples).map_err(|e| field("grid.dt_s/grid.samples", e))?;
        let gsi = GsiOptions {
            coefficient: r.choice(
                "gsi.coefficient",
                &[("perturbative", CoefficientModel::Perturbative), ("flat", CoefficientModel::Flat)],
            )?,
            ordering: r
                .choice("gsi.ordering", &[("causal", TimeOrdering::Causal), ("symmetric", TimeOrdering::Symmetric)])?,
        };
        let shapes = [("gaussian", Lineshape::Gaussian), ("lorentzian", Lineshape::Lorentzian)];
        let filter = FilterSpec {
            etalon_fwhm: r.f64("filter.etalon_fwhm_hz")?,
            absorption_fwhm: r.f64("filter.absorption_fwhm_hz")?,
            alpha: 0.0,
            etalon_center_offset: r.f64("filter.etalon_offset_hz")?,
            absorption_center_offset: r.f64("filter.absorption_offset_hz")?,
            etalon_shape: r.choice("filter.etalon_shape", &shapes)?,
            absorption_shape: r.choice("filter.absorption_shape", &shapes)?,
        };
        let alphas = r.list("filter.alphas")?;
        if alphas.is_empty() {
            return Err(CliError::Config("filter.alphas: need at least one value".into()));
        }
        for &a in &alphas {
            filter.with_alpha(a).validate().map_err(|e| field("filter.alphas", e))?;
        }
        let detector = DetectorSpec {
            quantum_efficiency: r.f64("detector.efficiency")?,
            jitter_sigma: r.f64("detector.jitter_fwhm_s")? / FWHM_PER_SIGMA,
            dead_time: r.f64("detector.dead_time_s")?,
            dark_rate: r.f64("detector.dark_rate_hz")?,
        };
        let signal = ChannelSpec { transmission: r.f64("channel.signal_transmission")?, detector };
        let idler = ChannelSpec { transmission: r.f64("channel.idler_transmission")?, detector };
        let source = SourceConfig {
            pair_rate: r.f64("source.pair_rate_hz")?,
            duration: r.f64("source.duration_s")?,
            waveform: r
                .choice("source.waveform", &[("gsi", SourceWaveform::Gsi), ("detector", SourceWaveform::Detector)])?,
            alpha: r.f64("source.alpha")?,
        };
        let dead_time_correction = r.bool("analysis.dead_time_correction")?;
        let analysis = SummaryOptions {
            bin_width: r.f64("analysis.bin_width_s")?,
            range: r.f64("analysis.range_s")?,
            window: WindowSpec {
                width: r.f64("analysis.window_s")?,
                anchor: r.choice("analysis.anchor", &[("peak", WindowAnchor::Peak), ("zero", WindowAnchor::Zero)])?,
                wing_inner: r.f64("analysis.wing_inner_s")?,
                wing_outer: r.f64("analysis.wing_outer_s")?,
            },
            g2_zero: r.choice("analysis.g2_zero", &[("peak", G2Zero::Peak), ("zero", G2Zero::ZeroBin)])?,
            dead_time: dead_time_correction.then_some(detector.dead_time),
        };
        let analysis_duration = match r.str("analysis.duration_s") {
            "auto" => None,
            _ => Some(r.f64("analysis.duration_s")?),
        };
        let sweep = SweepConfig {
            enabled: r.bool("sweep.enabled")?,
            od_values: r.list("sweep.od_values")?,
            model: ScalingParams {
                a_signal: r.f64("sweep.a_signal")?,
                a_idler: r.f64("sweep.a_idler")?,
                b_coincidence: r.f64("sweep.b_coincidence")?,
                reabsorption: r.f64("sweep.reabsorption")?,
            },
            noise: r.f64("sweep.noise")?,
            heralding: match r.str("sweep.heralding_exponent") {
                "none" => None,
                _ => Some((r.f64("sweep.heralding_prefactor")?, r.f64("sweep.heralding_exponent")?)),
            },
        };

        let cfg = RunConfig {
            scenario: r.str("run.scenario").to_string(),
            seed: r.parse("run.seed")?,
            system,
            fields,
            cell,
            grid,
            velocity_nodes: r.usize("grid.velocity_nodes")?,
            span_sigmas: r.f64("grid.span_sigmas")?,
            gsi,
            filter,
            alphas,
            signal,
            idler,
            splitter: r.bool("channel.splitter")?,
            source,
            analysis,
            analysis_duration,
            sweep,
            resolved: map,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.system.validate().map_err(|e| field("system", e))?;
        self.fields.validate().map_err(|e| field("fields", e))?;
        self.cell.validate().map_err(|e| field("cell", e))?;
        self.signal.validate().map_err(|e| field("detector/channel.signal_transmission", e))?;
        self.idler.validate().map_err(|e| field("detector/channel.idler_transmission", e))?;
        self.sweep.model.validate().map_err(|e| field("sweep", e))?;
        let positive = [
            ("source.pair_rate_hz", self.source.pair_rate),
            ("source.duration_s", self.source.duration),
            ("grid.span_sigmas", self.span_sigmas),
            ("analysis.bin_width_s", self.analysis.bin_width),
            ("analysis.range_s", self.analysis.range),
            ("analysis.window_s", self.analysis.window.width),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("{key}: must be positive, got {v}")));
            }
        }
        if self.velocity_nodes < 2 {
            return Err(CliError::Config("grid.velocity_nodes: need at least 2".into()));
        }
        if !(self.source.alpha.is_finite() && self.source.alpha >= 0.0) {
            return Err(CliError::Config(format!("source.alpha: must be nonnegative, got {}", self.source.alpha)));
        }
        let w = &self.analysis.window;
        if !(w.wing_inner >= 0.0 && w.wing_outer > w.wing_inner && w.wing_outer <= self.analysis.range) {
            return Err(CliError::Config(format!(
                "analysis.wing_inner_s/wing_outer_s: need 0 <= inner < outer <= analysis.range_s, got {} and {}",
                w.wing_inner, w.wing_outer
            )));
        }
        if let Some(d) = self.analysis_duration {
            if !(d.is_finite() && d > 0.0) {
                return Err(CliError::Config(format!("analysis.duration_s: must be positive or auto, got {d}")));
            }
        }
        if !(self.sweep.noise.is_finite() && (0.0..1.0).contains(&self.sweep.noise)) {
            return Err(CliError::Config(format!("sweep.noise: must lie in [0, 1), got {}", self.sweep.noise)));
        }
        if self.sweep.od_values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(CliError::Config("sweep.od_values: every optical depth must be positive".into()));
        }
        Ok(())
    }

    /// Canonical `key=value` text of every setting, sorted by key.
    pub fn canonical(&self) -> String {
        self.resolved.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    #[cfg(test)]
    fn resolved_pairs(&self) -> Vec<(String, String)> {
        self.resolved.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

fn field(key: &str, e: sfwm_core::Error) -> CliError {
    CliError::Config(format!("{key}: {e}"))
}

/// Parses `key=value` from the command line.
pub fn parse_override(s: &str) -> Result<(String, String), CliError> {
    let (k, v) = s.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects key=value, got {s:?}")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

struct Reader<'a>(&'a BTreeMap<String, String>);

impl Reader<'_> {
    fn str(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).unwrap_or_default()
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.str(key);
        s.parse().map_err(|e| CliError::Config(format!("{key}: cannot parse {s:?}: {e}")))
    }

    fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.parse(key)?;
        if !v.is_finite() {
            return Err(CliError::Config(format!("{key}: must be finite, got {v}")));
        }
        Ok(v)
    }

    fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.parse(key)
    }

    fn bool(&self, key: &str) -> Result<bool, CliError> {
        self.parse(key)
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.str(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Config(format!("{key}: cannot parse {s:?} as a number")))
            })
            .collect()
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<T, CliError> {
        let s = self.str(key);
        options.iter().find(|(name, _)| *name == s).map(|(_, v)| *v).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            CliError::Config(format!("{key}: expected one of {}, got {s:?}", names.join("|")))
        })
    }
}
