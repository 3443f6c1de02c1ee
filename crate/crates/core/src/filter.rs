//! Reabsorption/etalon filter `F(ω) = T(ω)·exp[-α·A_abs(ω)]`, its impulse
//! response, and the detector-plane correlation obtained by convolving
//! `G_SI` with `|F̃(t)|²`.
//!
//! `A_abs` is the (unit-peak) Doppler absorption profile of the idler line.
//! The filter is taken real and nonnegative: no dispersive phase.

use std::f64::consts::{LN_2, TAU};

use num_complex::Complex64;

use crate::error::{config, Error, Result};
use crate::fourier::{amplitude_spectrum, direct_convolution, linear_convolution, offset_dft, Sign};
use crate::waveform::{ComplexWaveform, CorrelationFunction, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lineshape {
    #[default]
    Gaussian,
    Lorentzian,
}

impl Lineshape {
    /// Unit-peak profile at detuning `x` (Hz) for full width `fwhm` (Hz).
    fn value(self, x: f64, fwhm: f64) -> f64 {
        let u = x / fwhm;
        match self {
            Lineshape::Gaussian => (-4.0 * LN_2 * u * u).exp(),
            Lineshape::Lorentzian => 1.0 / (1.0 + 4.0 * u * u),
        }
    }

    /// d/dx of [`Lineshape::value`].
    fn slope(self, x: f64, fwhm: f64) -> f64 {
        let w2 = fwhm * fwhm;
        match self {
            Lineshape::Gaussian => -8.0 * LN_2 * x / w2 * self.value(x, fwhm),
            Lineshape::Lorentzian => -8.0 * x / w2 * self.value(x, fwhm).powi(2),
        }
    }
}

/// Etalon plus reabsorption filter. Frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub etalon_fwhm: f64,
    pub absorption_fwhm: f64,
    /// Free absorption strength; not the cell optical depth.
    pub alpha: f64,
    pub etalon_center_offset: f64,
    pub absorption_center_offset: f64,
    pub etalon_shape: Lineshape,
    pub absorption_shape: Lineshape,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            etalon_fwhm: 940e6,
            absorption_fwhm: 540e6,
            alpha: 0.0,
            etalon_center_offset: 0.0,
            absorption_center_offset: 0.0,
            etalon_shape: Lineshape::Gaussian,
            absorption_shape: Lineshape::Gaussian,
        }
    }
}

impl FilterSpec {
    /// Same as the default but with the 950 MHz etalon linewidth.
    pub fn etalon_950() -> Self {
        Self { etalon_fwhm: 950e6, ..Self::default() }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.etalon_fwhm.is_finite() && self.etalon_fwhm > 0.0) {
            return Err(config("filter: etalon_fwhm must be positive"));
        }
        if !(self.absorption_fwhm.is_finite() && self.absorption_fwhm > 0.0) {
            return Err(config("filter: absorption_fwhm must be positive"));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(config("filter: alpha must be nonnegative"));
        }
        if !(self.etalon_center_offset.is_finite() && self.absorption_center_offset.is_finite()) {
            return Err(config("filter: center offsets must be finite"));
        }
        Ok(())
    }

    pub fn transmission(&self, f: f64) -> f64 {
        self.etalon_shape.value(f - self.etalon_center_offset, self.etalon_fwhm)
    }

    pub fn absorption(&self, f: f64) -> f64 {
        self.absorption_shape.value(f - self.absorption_center_offset, self.absorption_fwhm)
    }

    /// `F` at ordinary frequency `f` (Hz).
    pub fn response(&self, f: f64) -> f64 {
        self.transmission(f) * (-self.alpha * self.absorption(f)).exp()
    }

    /// `d/df ln F(f)`.
    pub fn log_slope(&self, f: f64) -> f64 {
        let xe = f - self.etalon_center_offset;
        let xa = f - self.absorption_center_offset;
        self.etalon_shape.slope(xe, self.etalon_fwhm) / self.etalon_shape.value(xe, self.etalon_fwhm)
            - self.alpha * self.absorption_shape.slope(xa, self.absorption_fwhm)
    }

    /// Lobe maxima of `|F|²` (Hz), located as sign changes of
    /// [`FilterSpec::log_slope`] on a fine scan and refined by bisection.
    pub fn lobe_frequencies(&self) -> Vec<f64> {
        let widest = self.etalon_fwhm.max(self.absorption_fwhm);
        let center = self.etalon_center_offset;
        let lo = center - 4.0 * widest;
        let hi = center + 4.0 * widest;
        let steps = 8000;
        let h = (hi - lo) / steps as f64;
        let mut lobes = Vec::new();
        let mut prev = self.log_slope(lo);
        for j in 1..=steps {
            let f = lo + j as f64 * h;
            let cur = self.log_slope(f);
            if prev > 0.0 && cur <= 0.0 {
                lobes.push(self.bisect_slope(f - h, f));
            }
            prev = cur;
        }
        lobes
    }

    fn bisect_slope(&self, mut a: f64, mut b: f64) -> f64 {
        // slope(a) > 0 >= slope(b)
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.log_slope(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
            if (b - a).abs() <= 1e-12 * b.abs().max(1.0) {
                break;
            }
        }
        0.5 * (a + b)
    }
}

/// Smallest `α` in `[0, alpha_max]` for which `|F|²` has two lobes, by
/// bisection on the lobe count.
pub fn beat_onset_alpha(spec: &FilterSpec, alpha_max: f64, tolerance: f64) -> Result<f64> {
    let count = |alpha: f64| spec.with_alpha(alpha).lobe_frequencies().len();
    if count(0.0) >= 2 {
        return Ok(0.0);
    }
    if count(alpha_max) < 2 {
        return Err(Error::Extraction(format!("|F|² stays single-lobed up to alpha = {alpha_max}")));
    }
    let (mut a, mut b) = (0.0, alpha_max);
    while b - a > tolerance {
        let m = 0.5 * (a + b);
        if count(m) >= 2 {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Complex spectrum on the uniform angular grid `omega_start + k·d_omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    omega_start: f64,
    d_omega: f64,
    values: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn new(omega_start: f64, d_omega: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(d_omega.is_finite() && d_omega > 0.0 && omega_start.is_finite()) {
            return Err(config("spectral function: grid must be finite with positive spacing"));
        }
        if values.len() < 2 {
            return Err(config("spectral function: need at least 2 samples"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain("spectral function: non-finite sample".into()));
        }
        Ok(Self { omega_start, d_omega, values })
    }

    pub fn omega_start(&self) -> f64 {
        self.omega_start
    }

    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.omega_start + k as f64 * self.d_omega
    }

    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Local maxima of `|F|²` in Hz, refined by a parabola through the three
    /// samples around each grid maximum.
    pub fn lobe_frequencies(&self) -> Vec<f64> {
        let p = self.power();
        let peak = p.iter().copied().fold(0.0, f64::max);
        let floor = 1e-9 * peak;
        (1..p.len() - 1)
            .filter(|&k| p[k] > floor && p[k] > p[k - 1] && p[k] >= p[k + 1])
            .map(|k| {
                let denom = p[k - 1] - 2.0 * p[k] + p[k + 1];
                let shift = if denom != 0.0 { 0.5 * (p[k - 1] - p[k + 1]) / denom } else { 0.0 };
                (self.omega(k) + shift * self.d_omega) / TAU
            })
            .collect()
    }
}

/// Angular grid conjugate to `grid` under the DFT: same length, centred on
/// zero, `dω = 2π/(n·dt)`.
pub fn conjugate_omega_grid(grid: &TimeGrid) -> (f64, f64, usize) {
    let n = grid.len();
    let d_omega = TAU / (n as f64 * grid.dt());
    (-((n / 2) as f64) * d_omega, d_omega, n)
}

/// Samples `F(ω)` of `spec` on `omega_start + k·d_omega`, `k < n`.
pub fn filter_response(spec: &FilterSpec, omega_start: f64, d_omega: f64, n: usize) -> Result<SpectralFunction> {
    spec.validate()?;
    let span_hz = (n.saturating_sub(1)) as f64 * d_omega / TAU;
    let widest = spec.etalon_fwhm.max(spec.absorption_fwhm);
    if span_hz < 6.0 * widest {
        return Err(Error::Windowing(format!(
            "frequency grid spans {span_hz:.4e} Hz, need at least 6x the widest FWHM ({widest:.4e} Hz)"
        )));
    }
    let values = (0..n).map(|k| Complex64::new(spec.response((omega_start + k as f64 * d_omega) / TAU), 0.0)).collect();
    SpectralFunction::new(omega_start, d_omega, values)
}

const EDGE_DECAY: f64 = 1e-6;

/// `F̃(t) = ∫ F(ω) e^{-iωt} dω/2π` on the conjugate, zero-centred time grid.
pub fn impulse_response(spectrum: &SpectralFunction) -> Result<ComplexWaveform> {
    let values = spectrum.values();
    let n = values.len();
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if values[0].norm() > EDGE_DECAY * peak || values[n - 1].norm() > EDGE_DECAY * peak {
        return Err(Error::Windowing(format!("|F| has not decayed below {EDGE_DECAY} of its peak at the grid edges")));
    }
    let dt = TAU / (n as f64 * spectrum.d_omega());
    let grid = TimeGrid::centered(dt, n)?;
    let transformed =
        offset_dft(values, spectrum.omega_start(), spectrum.d_omega(), grid.t_start(), dt, Sign::Negative);
    let scale = spectrum.d_omega() / TAU;
    ComplexWaveform::new(grid, transformed.into_iter().map(|v| v * scale).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    /// Zero-padded FFT product.
    #[default]
    Fft,
    /// Direct O(N·M) sum in the time domain.
    Direct,
}

/// Detector-plane correlation and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorCorrelation {
    pub correlation: CorrelationFunction,
    /// The kernel `|F̃|²` was linearly resampled onto the `G_SI` time step.
    pub resampled: bool,
}

/// `G_det(t) = Σ_τ |F̃(t-τ)|²·G_SI(τ)·dt` on the grid of `gsi`.
pub fn detector_correlation(gsi: &CorrelationFunction, spectrum: &SpectralFunction) -> Result<DetectorCorrelation> {
    detector_correlation_with(gsi, spectrum, ConvolutionMethod::Fft)
}

pub fn detector_correlation_with(
    gsi: &CorrelationFunction,
    spectrum: &SpectralFunction,
    method: ConvolutionMethod,
) -> Result<DetectorCorrelation> {
    let kernel = impulse_response(spectrum)?.intensity();
    let dt = gsi.grid().dt();
    let kdt = kernel.grid().dt();
    let resampled = ((kdt - dt) / dt).abs() > 1e-9;
    // kernel samples at (j - centre)·dt
    let (kvals, centre) = if resampled {
        let half = (kernel.grid().t_end().min(-kernel.grid().t_start()) / dt).floor() as usize;
        let vals: Vec<f64> = (0..=2 * half).map(|j| kernel.sample((j as f64 - half as f64) * dt)).collect();
        (vals, half)
    } else {
        let centre = (-kernel.grid().t_start() / kdt).round() as usize;
        (kernel.values().to_vec(), centre)
    };
    let full = match method {
        ConvolutionMethod::Fft => linear_convolution(gsi.values(), &kvals),
        ConvolutionMethod::Direct => direct_convolution(gsi.values(), &kvals),
    };
    let values = (0..gsi.grid().len()).map(|i| full.get(i + centre).copied().unwrap_or(0.0).max(0.0) * dt).collect();
    Ok(DetectorCorrelation { correlation: CorrelationFunction::new(*gsi.grid(), values)?, resampled })
}

/// Separation (Hz) between the two lobes of `|F|²`.
pub fn beat_frequency_estimate(spectrum: &SpectralFunction) -> Result<f64> {
    let lobes = spectrum.lobe_frequencies();
    if lobes.len() != 2 {
        return Err(Error::Estimation(format!("|F|² has {} lobe(s), need exactly 2", lobes.len())));
    }
    Ok(lobes[1] - lobes[0])
}

/// Dominant oscillation frequency (Hz) of a sampled correlation: the highest
/// non-zero-frequency local maximum of its zero-padded amplitude spectrum.
/// Maxima below 1e-3 of the zero-frequency amplitude do not count.
pub fn oscillation_frequency(corr: &CorrelationFunction) -> Result<f64> {
    oscillation_frequency_in(corr, 0.0, f64::INFINITY)
}

/// [`oscillation_frequency`] restricted to local maxima in `(f_lo, f_hi)` Hz.
pub fn oscillation_frequency_in(corr: &CorrelationFunction, f_lo: f64, f_hi: f64) -> Result<f64> {
    let n = corr.values().len();
    let padded = (16 * n).next_power_of_two();
    let (spectrum, df) = amplitude_spectrum(corr.values(), corr.grid().dt(), padded);
    let zero = padded / 2;
    let positive = &spectrum[zero..];
    let dc = positive[0];
    let best = (1..positive.len() - 1)
        .filter(|&k| positive[k] > positive[k - 1] && positive[k] >= positive[k + 1])
        .filter(|&k| positive[k] > 1e-3 * dc)
        .filter(|&k| k as f64 * df > f_lo && (k as f64) * df < f_hi)
        .max_by(|&a, &b| positive[a].total_cmp(&positive[b]))
        .ok_or_else(|| Error::Extraction("no oscillatory component in the spectrum".into()))?;
    let (a, b, c) = (positive[best - 1], positive[best], positive[best + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Ok((best as f64 + shift) * df)
}
