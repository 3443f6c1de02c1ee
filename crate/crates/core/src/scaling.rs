//! Counting rates versus optical depth: singles linear in OD, coincidences
//! quadratic, with an `exp(-r·OD)` idler reabsorption factor.

use crate::error::{config, Error, Result};

/// One point of an OD scan. Rates in counts/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdScanPoint {
    pub od: f64,
    pub n_signal: f64,
    pub n_idler: f64,
    pub n_coincidence: f64,
}

impl OdScanPoint {
    pub fn validate(&self) -> Result<()> {
        let all = [self.od, self.n_signal, self.n_idler, self.n_coincidence];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(format!("OD scan point has a negative or non-finite entry: {self:?}")));
        }
        Ok(())
    }

    /// Idler heralding efficiency `n_c / n_s`.
    pub fn heralding_idler(&self) -> Option<f64> {
        (self.n_signal > 0.0).then(|| self.n_coincidence / self.n_signal)
    }
}

/// Coefficients of the rate model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams {
    pub a_signal: f64,
    pub a_idler: f64,
    pub b_coincidence: f64,
    /// Reabsorption per unit OD.
    pub reabsorption: f64,
}

impl Default for ScalingParams {
    fn default() -> Self {
        Self { a_signal: 1.0e5, a_idler: 1.0e5, b_coincidence: 1.0e3, reabsorption: 0.0 }
    }
}

impl ScalingParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a_signal", self.a_signal),
            ("a_idler", self.a_idler),
            ("b_coincidence", self.b_coincidence),
            ("reabsorption", self.reabsorption),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config(format!("scaling: {name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    /// OD of the coincidence maximum, `2/r`; `None` without reabsorption.
    pub fn coincidence_peak_od(&self) -> Option<f64> {
        (self.reabsorption > 0.0).then(|| 2.0 / self.reabsorption)
    }
}

/// Beer's law, `ln(I_0/I_t)`.
pub fn od_from_transmission(i_transmitted: f64, i_input: f64) -> Result<f64> {
    if !(i_transmitted.is_finite() && i_input.is_finite() && i_transmitted > 0.0 && i_input > 0.0) {
        return Err(Error::Domain(format!("intensities must be positive, got I_t = {i_transmitted}, I_0 = {i_input}")));
    }
    if i_transmitted > i_input {
        return Err(Error::Domain(format!("transmitted intensity {i_transmitted} exceeds input {i_input}")));
    }
    Ok((i_input / i_transmitted).ln())
}

pub fn predict_rates(od: f64, params: &ScalingParams) -> Result<OdScanPoint> {
    params.validate()?;
    if !(od.is_finite() && od >= 0.0) {
        return Err(Error::Domain(format!("optical depth must be nonnegative, got {od}")));
    }
    let roll_off = (-params.reabsorption * od).exp();
    Ok(OdScanPoint {
        od,
        n_signal: params.a_signal * od,
        n_idler: params.a_idler * od * roll_off,
        n_coincidence: params.b_coincidence * od * od * roll_off,
    })
}

/// Result of a log-log least-squares fit `y = prefactor·x^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub exponent_stderr: f64,
}

pub fn powerlaw_fit(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("power-law fit needs at least 3 points, got {}", points.len())));
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| !(x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0)) {
        return Err(Error::Domain(format!("power-law fit needs positive data, got ({x}, {y})")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("power-law fit: all x values are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerLawFit { exponent: slope, prefactor: intercept.exp(), exponent_stderr: (ssr / (n - 2.0) / sxx).sqrt() })
}

/// Through-origin fits `y = a·x` and `y = b·x²` with their residual sums of
/// squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginFits {
    pub linear: f64,
    pub quadratic: f64,
    pub linear_ssr: f64,
    pub quadratic_ssr: f64,
}

impl OriginFits {
    pub fn linear_at(&self, x: f64) -> f64 {
        self.linear * x
    }

    pub fn quadratic_at(&self, x: f64) -> f64 {
        self.quadratic * x * x
    }
}

pub fn polyfit_linear_quadratic(points: &[(f64, f64)]) -> Result<OriginFits> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("polynomial fit needs at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(Error::Domain("polynomial fit: non-finite data".into()));
    }
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sx4: f64 = points.iter().map(|(x, _)| x.powi(4)).sum();
    if sxx <= 0.0 || sx4 <= 0.0 {
        return Err(Error::Fit("polynomial fit: all x are zero, design matrix is singular".into()));
    }
    let linear = points.iter().map(|(x, y)| x * y).sum::<f64>() / sxx;
    let quadratic = points.iter().map(|(x, y)| x * x * y).sum::<f64>() / sx4;
    let linear_ssr = points.iter().map(|(x, y)| (y - linear * x).powi(2)).sum();
    let quadratic_ssr = points.iter().map(|(x, y)| (y - quadratic * x * x).powi(2)).sum();
    Ok(OriginFits { linear, quadratic, linear_ssr, quadratic_ssr })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beer_law() {
        assert_eq!(od_from_transmission(1.0, 1.0).unwrap(), 0.0);
        assert!((od_from_transmission(0.1, 1.0).unwrap() - 10f64.ln()).abs() < 1e-15);
        assert!((od_from_transmission((-7f64).exp(), 1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!(od_from_transmission(0.0, 1.0).is_err());
        assert!(od_from_transmission(-1.0, 1.0).is_err());
        assert!(od_from_transmission(2.0, 1.0).is_err());
    }

    #[test]
    fn rates_vanish_at_zero_od() {
        let p = predict_rates(0.0, &ScalingParams { reabsorption: 0.3, ..Default::default() }).unwrap();
        assert_eq!((p.n_signal, p.n_idler, p.n_coincidence), (0.0, 0.0, 0.0));
    }

    #[test]
    fn pure_quadratic_doubles_to_four() {
        let params = ScalingParams::default();
        for od in [0.5, 1.0, 3.3] {
            let a = predict_rates(od, &params).unwrap().n_coincidence;
            let b = predict_rates(2.0 * od, &params).unwrap().n_coincidence;
            assert_eq!(b / a, 4.0);
        }
    }

    #[test]
    fn negative_inputs_are_rejected() {
        let bad = ScalingParams { a_idler: -1.0, ..Default::default() };
        assert!(matches!(predict_rates(1.0, &bad), Err(Error::Config(_))));
        assert!(matches!(predict_rates(-1.0, &ScalingParams::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn coincidence_peak_sits_at_two_over_r() {
        let params = ScalingParams { reabsorption: 0.25, ..Default::default() };
        let peak = params.coincidence_peak_od().unwrap();
        assert_eq!(peak, 8.0);
        let at = |od: f64| predict_rates(od, &params).unwrap().n_coincidence;
        let mut best = (0.0, 0.0);
        for j in 1..4000 {
            let od = j as f64 * 0.01;
            if at(od) > best.1 {
                best = (od, at(od));
            }
        }
        assert!((best.0 - peak).abs() <= 0.01);
    }

    #[test]
    fn reabsorption_bends_heralding_slope() {
        let params = ScalingParams { reabsorption: 0.05, ..Default::default() };
        let pts: Vec<(f64, f64)> = (0..25)
            .map(|j| {
                let od = 1.0 + 6.0 * j as f64 / 24.0;
                let p = predict_rates(od, &params).unwrap();
                (od, p.heralding_idler().unwrap())
            })
            .collect();
        let fit = powerlaw_fit(&pts).unwrap();
        assert!(fit.exponent > 0.8 && fit.exponent < 1.0, "{}", fit.exponent);
    }

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|x| (x as f64, 3.0 * (x as f64).powf(1.71))).collect();
        let fit = powerlaw_fit(&pts).unwrap();
        assert!((fit.exponent - 1.71).abs() < 1e-9);
        assert!((fit.prefactor - 3.0).abs() < 1e-9);
        let pts: Vec<(f64, f64)> = (1..=10).map(|x| (x as f64, 0.2 * (x as f64).powi(2))).collect();
        assert!((powerlaw_fit(&pts).unwrap().exponent - 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_errors() {
        assert!(matches!(powerlaw_fit(&[(1.0, 1.0), (2.0, 2.0)]), Err(Error::Fit(_))));
        assert!(matches!(powerlaw_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(Error::Domain(_))));
        assert!(matches!(powerlaw_fit(&[(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)]), Err(Error::Fit(_))));
    }

    #[test]
    fn origin_fits_pick_the_right_model() {
        let lin: Vec<(f64, f64)> = (1..=8).map(|x| (x as f64, 5.0 * x as f64)).collect();
        let f = polyfit_linear_quadratic(&lin).unwrap();
        assert!((f.linear - 5.0).abs() < 1e-12);
        assert!(f.quadratic_ssr > f.linear_ssr);
        let quad: Vec<(f64, f64)> = (1..=8).map(|x| (x as f64, 5.0 * (x * x) as f64)).collect();
        let f = polyfit_linear_quadratic(&quad).unwrap();
        assert!((f.quadratic - 5.0).abs() < 1e-12);
        assert!(f.linear_ssr > f.quadratic_ssr);
        assert_eq!(f.linear_at(0.0), 0.0);
        assert_eq!(f.quadratic_at(0.0), 0.0);
        assert!(polyfit_linear_quadratic(&[(0.0, 1.0), (0.0, 2.0), (0.0, 3.0)]).is_err());
    }

    #[test]
    fn model_coincidences_fit_exactly() {
        let params = ScalingParams { b_coincidence: 1.0, ..Default::default() };
        let pts: Vec<(f64, f64)> = (0..13)
            .map(|j| {
                let od = 1.0 + 0.5 * j as f64;
                (od, predict_rates(od, &params).unwrap().n_coincidence)
            })
            .collect();
        let f = polyfit_linear_quadratic(&pts).unwrap();
        assert!(f.quadratic_ssr < 1e-12);
        assert!((f.quadratic - 1.0).abs() < 1e-14);
    }
}
