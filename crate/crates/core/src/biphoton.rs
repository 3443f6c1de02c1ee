//! Two-photon amplitude and the velocity-averaged signal-idler correlation.

use num_complex::Complex64;

use crate::atomic::{two_photon_coefficient, FieldParams, LadderSystem, VelocityGrid};
use crate::error::{Error, Result};
use crate::fourier::amplitude_spectrum;
use crate::waveform::{ComplexWaveform, CorrelationFunction, TimeGrid};

/// Which velocity-dependent coefficient multiplies the emission envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientModel {
    /// Cascaded-Lorentzian `A(v)` from [`two_photon_coefficient`].
    #[default]
    Perturbative,
    /// `A ≡ 1`: every velocity class contributes equally.
    Flat,
}

/// How negative delays (idler before signal) are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeOrdering {
    /// The idler follows the signal: the amplitude vanishes for `τ < 0`.
    #[default]
    Causal,
    /// Decay envelope `exp(-Γ31|τ|/2)` on both sides; the Doppler phase keeps
    /// its sign. Gives the two-sided Doppler-dephasing envelope.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GsiOptions {
    pub coefficient: CoefficientModel,
    pub ordering: TimeOrdering,
}

fn coefficient(model: CoefficientModel, v: f64, system: &LadderSystem, fields: &FieldParams) -> Complex64 {
    match model {
        CoefficientModel::Perturbative => two_photon_coefficient(v, system, fields),
        CoefficientModel::Flat => Complex64::new(1.0, 0.0),
    }
}

/// `Ψ_v(τ) = A(v)·exp[(-Γ31/2 + i·k_idler·v)·τ]` for `τ ≥ 0`, zero before.
pub fn two_photon_amplitude(v: f64, tau: f64, system: &LadderSystem, fields: &FieldParams) -> Complex64 {
    if tau < 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let exponent = Complex64::new(-0.5 * system.gamma31, system.k_idler() * v) * tau;
    two_photon_coefficient(v, system, fields) * exponent.exp()
}

/// `∫ Ψ_v(τ) f(v) dv` sampled on `grid`.
pub fn velocity_averaged_amplitude(
    grid: &TimeGrid,
    vgrid: &VelocityGrid,
    system: &LadderSystem,
    fields: &FieldParams,
    options: GsiOptions,
) -> Result<ComplexWaveform> {
    system.validate()?;
    fields.validate()?;
    let k = system.k_idler();
    let weighted: Vec<(f64, Complex64)> =
        vgrid.iter().map(|(v, w)| (k * v, w * coefficient(options.coefficient, v, system, fields))).collect();
    let values = grid
        .times()
        .map(|tau| {
            if tau < 0.0 && options.ordering == TimeOrdering::Causal {
                return Complex64::new(0.0, 0.0);
            }
            let sum: Complex64 = weighted.iter().map(|&(kv, c)| c * Complex64::from_polar(1.0, kv * tau)).sum();
            sum * (-0.5 * system.gamma31 * tau.abs()).exp()
        })
        .collect();
    ComplexWaveform::new(*grid, values)
}

/// `G_SI(τ) = |Σ_j w_j Ψ_{v_j}(τ)|²` with the perturbative coefficient and
/// causal ordering.
pub fn correlation_gsi(
    grid: &TimeGrid,
    vgrid: &VelocityGrid,
    system: &LadderSystem,
    fields: &FieldParams,
) -> Result<CorrelationFunction> {
    correlation_gsi_with(grid, vgrid, system, fields, GsiOptions::default())
}

pub fn correlation_gsi_with(
    grid: &TimeGrid,
    vgrid: &VelocityGrid,
    system: &LadderSystem,
    fields: &FieldParams,
    options: GsiOptions,
) -> Result<CorrelationFunction> {
    Ok(velocity_averaged_amplitude(grid, vgrid, system, fields, options)?.intensity())
}

/// Full width at half maximum of sampled data around its global maximum, in
/// units of the sample spacing, using linear interpolation of the crossings.
pub(crate) fn half_max_width(values: &[f64]) -> Result<f64> {
    let n = values.len();
    let (peak_idx, peak) =
        values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (j, v)| if v > best.1 { (j, v) } else { best });
    let lowest = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(peak > 0.0) || peak == lowest {
        return Err(Error::Extraction("flat or empty profile has no half maximum".into()));
    }
    if peak_idx == 0 || peak_idx == n - 1 {
        return Err(Error::Extraction("maximum lies on the grid edge".into()));
    }
    let half = 0.5 * peak;
    let left = (0..peak_idx)
        .rev()
        .find(|&j| values[j] < half)
        .ok_or_else(|| Error::Extraction("profile never falls below half maximum on the left".into()))?;
    let right = (peak_idx + 1..n)
        .find(|&j| values[j] < half)
        .ok_or_else(|| Error::Extraction("profile never falls below half maximum on the right".into()))?;
    let cross = |lo: usize, hi: usize| {
        let (a, b) = (values[lo], values[hi]);
        lo as f64 + (half - a) / (b - a) * (hi - lo) as f64
    };
    Ok(cross(right - 1, right) - cross(left, left + 1))
}

/// Correlation time: FWHM of `corr` in seconds.
pub fn correlation_time(corr: &CorrelationFunction) -> Result<f64> {
    Ok(half_max_width(corr.values())? * corr.grid().dt())
}

/// Width at which `corr` drops to `1/e` of its peak, one-sided measure from
/// the peak to the later crossing (s).
pub fn decay_time_1e(corr: &CorrelationFunction) -> Result<f64> {
    let values = corr.values();
    let (p, peak) = corr.peak();
    if !(peak > 0.0) {
        return Err(Error::Extraction("empty profile".into()));
    }
    let level = peak / std::f64::consts::E;
    let j = (p + 1..values.len())
        .find(|&j| values[j] < level)
        .ok_or_else(|| Error::Extraction("profile never falls below 1/e".into()))?;
    let (a, b) = (values[j - 1], values[j]);
    Ok(((j - 1 - p) as f64 + (level - a) / (b - a)) * corr.grid().dt())
}

const TAIL_FRACTION: f64 = 0.01;
const MIN_SPECTRUM_LEN: usize = 1 << 16;

/// Biphoton bandwidth (Hz): FWHM of the amplitude spectrum `|FT{sqrt(G)}|`.
///
/// For a Gaussian `G` of time-FWHM `Δt` this is `2·sqrt(2)·ln2 / (π·Δt)`;
/// the intensity spectrum `|FT{sqrt(G)}|²` would be narrower by `sqrt(2)`.
pub fn bandwidth_from_correlation(corr: &CorrelationFunction) -> Result<f64> {
    let values = corr.values();
    let (_, peak) = corr.peak();
    if !(peak > 0.0) {
        return Err(Error::Extraction("empty correlation".into()));
    }
    let (first, last) = (values[0], values[values.len() - 1]);
    if first >= TAIL_FRACTION * peak || last >= TAIL_FRACTION * peak {
        return Err(Error::Windowing(format!(
            "correlation has not decayed below {TAIL_FRACTION} of peak at the grid edges"
        )));
    }
    let amplitude: Vec<f64> = values.iter().map(|v| v.sqrt()).collect();
    let padded = (8 * values.len()).max(MIN_SPECTRUM_LEN).next_power_of_two();
    let (spectrum, df) = amplitude_spectrum(&amplitude, corr.grid().dt(), padded);
    Ok(half_max_width(&spectrum)? * df)
}
