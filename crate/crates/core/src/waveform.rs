//! Uniformly sampled functions of the detection-time difference.

use num_complex::Complex64;

use crate::error::{config, Error, Result};

/// Uniform time axis `t_start + j·dt`, `j ∈ [0, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n: usize,
}

pub const DEFAULT_DT: f64 = 10e-12;
pub const DEFAULT_SAMPLES: usize = 4096;

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(config(format!("time grid: dt must be positive, got {dt}")));
        }
        if n < 2 {
            return Err(config(format!("time grid: need at least 2 samples, got {n}")));
        }
        if !t_start.is_finite() {
            return Err(config("time grid: t_start must be finite"));
        }
        Ok(Self { t_start, dt, n })
    }

    /// Grid with `t = 0` at index `n/2`.
    pub fn centered(dt: f64, n: usize) -> Result<Self> {
        Self::new(-((n / 2) as f64) * dt, dt, n)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t_start + j as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.time(j))
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n - 1)
    }

    /// Same samples with every time multiplied by `factor`.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        Self::new(self.t_start * factor, self.dt * factor, self.n)
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::centered(DEFAULT_DT, DEFAULT_SAMPLES).expect("default grid is valid")
    }
}

/// Nonnegative real function on a [`TimeGrid`]: G⁽²⁾ curves and histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFunction {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl CorrelationFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(config(format!("correlation function: {} values for a grid of {}", values.len(), grid.len())));
        }
        if let Some(j) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(format!(
                "correlation function: sample {j} is {} (must be finite and nonnegative)",
                values[j]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.times().zip(self.values.iter().copied())
    }

    /// Rectangle-rule integral `Σ values·dt`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dt()
    }

    pub fn peak(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (j, v)| if v > best.1 { (j, v) } else { best })
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    /// Copy normalised to unit peak (returned unchanged when identically zero).
    pub fn normalized_to_peak(&self) -> Self {
        let (_, peak) = self.peak();
        if peak > 0.0 {
            Self { grid: self.grid, values: self.values.iter().map(|v| v / peak).collect() }
        } else {
            self.clone()
        }
    }

    /// Linear interpolation at `t`; zero outside the grid.
    pub fn sample(&self, t: f64) -> f64 {
        let x = (t - self.grid.t_start()) / self.grid.dt();
        if x < 0.0 || x > (self.grid.len() - 1) as f64 {
            return 0.0;
        }
        let j = (x.floor() as usize).min(self.grid.len() - 2);
        let frac = x - j as f64;
        self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
    }
}

/// Complex amplitude on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWaveform {
    grid: TimeGrid,
    values: Vec<Complex64>,
}

impl ComplexWaveform {
    pub fn new(grid: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(config(format!("complex waveform: {} values for a grid of {}", values.len(), grid.len())));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain("complex waveform: non-finite sample".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `|values|²` as a correlation function.
    pub fn intensity(&self) -> CorrelationFunction {
        CorrelationFunction { grid: self.grid, values: self.values.iter().map(|v| v.norm_sqr()).collect() }
    }
}
