//! Ladder-system parameters and Maxwell-Boltzmann velocity machinery.
//!
//! Frequencies are angular (rad/s) throughout; conversions to Hz happen only at
//! the edges of the crate ([`crate::hz_to_angular`]).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{config, domain, Result};

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Mass of a Rb-87 atom (kg).
pub const RB87_MASS: f64 = 1.44316e-25;

/// 5S1/2 -> 5P3/2 wavelength (m).
pub const D2_WAVELENGTH: f64 = 780.2e-9;

/// 5P3/2 -> 5D5/2 wavelength (m).
pub const UPPER_WAVELENGTH: f64 = 775.8e-9;

/// Three-level cascade 5S1/2 - 5P3/2 - 5D5/2.
///
/// The idler is the 780 nm photon emitted on the intermediate-to-ground
/// transition; the signal is the 776 nm photon emitted first, on the
/// upper-to-intermediate transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderSystem {
    /// Intermediate -> ground decay rate (rad/s).
    pub gamma31: f64,
    /// Upper -> intermediate decay rate (rad/s).
    pub gamma32: f64,
    pub lambda_pump: f64,
    pub lambda_coupling: f64,
    pub lambda_idler: f64,
    pub lambda_signal: f64,
    pub atom_mass: f64,
}

impl Default for LadderSystem {
    fn default() -> Self {
        Self {
            gamma31: TAU * 6.07e6,
            gamma32: TAU * 0.66e6,
            lambda_pump: D2_WAVELENGTH,
            lambda_coupling: UPPER_WAVELENGTH,
            lambda_idler: D2_WAVELENGTH,
            lambda_signal: UPPER_WAVELENGTH,
            atom_mass: RB87_MASS,
        }
    }
}

impl LadderSystem {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma31", self.gamma31),
            ("gamma32", self.gamma32),
            ("lambda_pump", self.lambda_pump),
            ("lambda_coupling", self.lambda_coupling),
            ("lambda_idler", self.lambda_idler),
            ("lambda_signal", self.lambda_signal),
            ("atom_mass", self.atom_mass),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(config(format!("ladder system: {name} must be positive, got {value}")));
            }
        }
        Ok(())
    }

    pub fn k_pump(&self) -> f64 {
        TAU / self.lambda_pump
    }

    pub fn k_coupling(&self) -> f64 {
        TAU / self.lambda_coupling
    }

    pub fn k_idler(&self) -> f64 {
        TAU / self.lambda_idler
    }

    pub fn k_signal(&self) -> f64 {
        TAU / self.lambda_signal
    }
}

/// Relative orientation of the pump and coupling beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Geometry {
    /// Residual two-photon Doppler shift `(k_p - k_c)·v`.
    #[default]
    CounterPropagating,
    /// Two-photon Doppler shift `(k_p + k_c)·v`.
    CoPropagating,
}

/// Driving fields. All values in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    pub rabi_pump: f64,
    pub rabi_coupling: f64,
    pub detuning_pump: f64,
    pub detuning_coupling: f64,
    pub geometry: Geometry,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            rabi_pump: TAU * 10e6,
            rabi_coupling: TAU * 50e6,
            detuning_pump: TAU * 810e6,
            detuning_coupling: -TAU * 810e6,
            geometry: Geometry::CounterPropagating,
        }
    }
}

impl FieldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rabi_pump.is_finite() && self.rabi_pump >= 0.0) {
            return Err(config("fields: rabi_pump must be nonnegative"));
        }
        if !(self.rabi_coupling.is_finite() && self.rabi_coupling >= 0.0) {
            return Err(config("fields: rabi_coupling must be nonnegative"));
        }
        if !self.two_photon_detuning().is_finite() {
            return Err(config("fields: detunings must be finite"));
        }
        Ok(())
    }

    pub fn two_photon_detuning(&self) -> f64 {
        self.detuning_pump + self.detuning_coupling
    }
}

/// Thermal vapour cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaporCell {
    /// Kelvin.
    pub temperature: f64,
    /// Metres.
    pub length: f64,
    pub optical_depth: f64,
}

impl Default for VaporCell {
    fn default() -> Self {
        Self { temperature: 325.15, length: 12.5e-3, optical_depth: 0.0 }
    }
}

impl VaporCell {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(config("cell: temperature must be positive"));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(config("cell: length must be positive"));
        }
        if !(self.optical_depth.is_finite() && self.optical_depth >= 0.0) {
            return Err(config("cell: optical_depth must be nonnegative"));
        }
        Ok(())
    }
}

fn check_thermal(temperature: f64, mass: f64) -> Result<()> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(domain(format!("temperature must be positive, got {temperature}")));
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(domain(format!("mass must be positive, got {mass}")));
    }
    Ok(())
}

/// One-dimensional thermal velocity spread `sqrt(k_B T / m)` (m/s).
pub fn sigma_v(temperature: f64, mass: f64) -> Result<f64> {
    check_thermal(temperature, mass)?;
    Ok((BOLTZMANN * temperature / mass).sqrt())
}

/// One-dimensional Maxwell-Boltzmann density (s/m).
pub fn maxwell_boltzmann_pdf(v: f64, temperature: f64, mass: f64) -> Result<f64> {
    let sigma = sigma_v(temperature, mass)?;
    Ok(gaussian_pdf(v, sigma))
}

fn gaussian_pdf(v: f64, sigma: f64) -> f64 {
    (-0.5 * (v / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Doppler full width at half maximum (Hz) of a line at `wavelength`.
pub fn doppler_fwhm(temperature: f64, mass: f64, wavelength: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(domain(format!("wavelength must be positive, got {wavelength}")));
    }
    let sigma = sigma_v(temperature, mass)?;
    Ok(sigma / wavelength * 2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// Quadrature rule for averages over the Maxwell-Boltzmann distribution.
///
/// `Σ weights[j]·g(nodes[j])` approximates `∫ g(v) f(v) dv`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    sigma: f64,
}

pub const DEFAULT_VELOCITY_NODES: usize = 513;
pub const DEFAULT_SPAN_SIGMAS: f64 = 6.0;

impl VelocityGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Thermal width the grid was built for (m/s).
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `∫ g(v) f(v) dv` by the grid's rule.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(v, w)| w * g(v)).sum()
    }
}

/// Renormalised trapezoid rule on `[-span·σ, +span·σ]`.
pub fn make_velocity_grid(temperature: f64, mass: f64, n_nodes: usize, span_sigmas: f64) -> Result<VelocityGrid> {
    if n_nodes < 16 {
        return Err(config(format!("velocity grid needs at least 16 nodes, got {n_nodes}")));
    }
    if !(span_sigmas.is_finite() && span_sigmas >= 4.0) {
        return Err(config(format!("velocity grid span must be >= 4 sigma, got {span_sigmas}")));
    }
    let sigma = sigma_v(temperature, mass)?;
    let half = span_sigmas * sigma;
    let h = 2.0 * half / (n_nodes - 1) as f64;
    let nodes: Vec<f64> = (0..n_nodes).map(|j| -half + j as f64 * h).collect();
    let mut weights: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let end = if j == 0 || j == n_nodes - 1 { 0.5 } else { 1.0 };
            end * h * gaussian_pdf(v, sigma)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(VelocityGrid { nodes, weights, sigma })
}

/// Complex pole of an integrand on the velocity axis: `center + i·distance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub center: f64,
    pub distance: f64,
}

/// Poles of [`two_photon_coefficient`] in the complex velocity plane.
pub fn coefficient_resonances(system: &LadderSystem, fields: &FieldParams) -> Vec<Resonance> {
    let k_p = system.k_pump();
    let mut poles = vec![Resonance { center: -fields.detuning_pump / k_p, distance: 0.5 * system.gamma31 / k_p }];
    let two_photon_k = match fields.geometry {
        Geometry::CounterPropagating => k_p - system.k_coupling(),
        Geometry::CoPropagating => k_p + system.k_coupling(),
    };
    if two_photon_k != 0.0 {
        poles.push(Resonance {
            center: -fields.two_photon_detuning() / two_photon_k,
            distance: 0.5 * system.gamma32 / two_photon_k.abs(),
        });
    }
    poles
}

const PANEL_ORDER: usize = 16;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Composite Gauss-Legendre rule on `[-span·σ, +span·σ]` whose panels are
/// graded geometrically toward each resonance, so integrands with poles close
/// to the real axis converge without a uniformly fine grid.
///
/// `n_nodes` sets the number of uniform base panels (`n_nodes / 16`); the
/// graded panels come on top.
pub fn make_resolving_velocity_grid(
    temperature: f64,
    mass: f64,
    n_nodes: usize,
    span_sigmas: f64,
    resonances: &[Resonance],
) -> Result<VelocityGrid> {
    if n_nodes < 16 {
        return Err(config(format!("velocity grid needs at least 16 nodes, got {n_nodes}")));
    }
    if !(span_sigmas.is_finite() && span_sigmas >= 4.0) {
        return Err(config(format!("velocity grid span must be >= 4 sigma, got {span_sigmas}")));
    }
    let sigma = sigma_v(temperature, mass)?;
    let half = span_sigmas * sigma;
    let base_panels = (n_nodes / PANEL_ORDER).max(1);
    let mut edges: Vec<f64> = (0..=base_panels).map(|j| -half + 2.0 * half * j as f64 / base_panels as f64).collect();
    for r in resonances {
        if !(r.distance.is_finite() && r.distance > 0.0 && r.center.is_finite()) {
            continue;
        }
        let mut offset = r.distance;
        edges.push(r.center);
        while offset < 2.0 * half {
            edges.push(r.center - offset);
            edges.push(r.center + offset);
            offset *= 2.0;
        }
    }
    edges.retain(|e| e.abs() <= half);
    edges.sort_by(f64::total_cmp);
    let min_gap = 1e-9 * half;
    edges.dedup_by(|b, a| (*b - *a).abs() < min_gap);

    let rule = gauss_legendre(PANEL_ORDER);
    let mut nodes = Vec::with_capacity(edges.len() * PANEL_ORDER);
    let mut weights = Vec::with_capacity(edges.len() * PANEL_ORDER);
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for &(x, w) in &rule {
            let v = mid + h * x;
            nodes.push(v);
            weights.push(w * h * gaussian_pdf(v, sigma));
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(VelocityGrid { nodes, weights, sigma })
}

/// Velocity-dependent two-photon coefficient `A(v)` from first-order
/// perturbation theory in the cascade:
///
/// ```text
///              Ω_p Ω_c
/// A(v) = ---------------------------------------------------------
///        [γ31/2 + i(δ_p + k_p v)] · [γ32/2 + i(δ_p + δ_c + Δk v)]
/// ```
///
/// with `Δk = k_p - k_c` for counter-propagating beams and `k_p + k_c` for
/// co-propagating ones. The result is divided by `|A(0)|` evaluated at zero
/// two-photon detuning, so the resonant group has unit magnitude.
pub fn two_photon_coefficient(v: f64, system: &LadderSystem, fields: &FieldParams) -> Complex64 {
    if fields.rabi_pump == 0.0 || fields.rabi_coupling == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let k_p = system.k_pump();
    let two_photon_k = match fields.geometry {
        Geometry::CounterPropagating => k_p - system.k_coupling(),
        Geometry::CoPropagating => k_p + system.k_coupling(),
    };
    let one_photon = Complex64::new(0.5 * system.gamma31, fields.detuning_pump + k_p * v);
    let two_photon = Complex64::new(0.5 * system.gamma32, fields.two_photon_detuning() + two_photon_k * v);
    let reference = Complex64::new(0.5 * system.gamma31, fields.detuning_pump).norm() * 0.5 * system.gamma32;
    reference / (one_photon * two_photon)
}

#[cfg(test)]
mod tests {
    use super::*;

    const T52: f64 = 325.15;
    const T75: f64 = 348.15;

    #[test]
    fn sigma_v_matches_closed_form() {
        let s = sigma_v(T52, RB87_MASS).unwrap();
        assert!((s - (1.380649e-23_f64 * 325.15 / 1.44316e-25).sqrt()).abs() < 1e-12);
        assert!((s - 176.4).abs() < 0.1, "{s}");
        let s75 = sigma_v(T75, RB87_MASS).unwrap();
        assert!((s75 - 182.5).abs() < 0.1, "{s75}");
        let r = sigma_v(4.0 * T52, RB87_MASS).unwrap() / s;
        assert!((r - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sigma_v_rejects_nonpositive() {
        assert!(sigma_v(0.0, RB87_MASS).is_err());
        assert!(sigma_v(300.0, -1.0).is_err());
        assert!(maxwell_boltzmann_pdf(0.0, -3.0, RB87_MASS).is_err());
        assert!(doppler_fwhm(300.0, RB87_MASS, 0.0).is_err());
    }

    #[test]
    fn pdf_peak_symmetry_and_normalisation() {
        let s = sigma_v(T52, RB87_MASS).unwrap();
        let p0 = maxwell_boltzmann_pdf(0.0, T52, RB87_MASS).unwrap();
        assert!((p0 - 1.0 / (s * (2.0 * PI).sqrt())).abs() < 1e-15);
        for v in [1.0, 50.0, 300.0, 1000.0] {
            let a = maxwell_boltzmann_pdf(v, T52, RB87_MASS).unwrap();
            let b = maxwell_boltzmann_pdf(-v, T52, RB87_MASS).unwrap();
            assert_eq!(a, b);
        }
        // plain trapezoid, 1e4 points on ±6σ
        let n = 10_000;
        let h = 12.0 * s / (n - 1) as f64;
        let mut total = 0.0;
        for j in 0..n {
            let v = -6.0 * s + j as f64 * h;
            let end = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            total += end * h * maxwell_boltzmann_pdf(v, T52, RB87_MASS).unwrap();
        }
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn velocity_grid_moments() {
        let g = make_velocity_grid(T52, RB87_MASS, DEFAULT_VELOCITY_NODES, DEFAULT_SPAN_SIGMAS).unwrap();
        assert!((g.integrate(|_| 1.0) - 1.0).abs() < 1e-9);
        assert!(g.integrate(|v| v).abs() < 1e-9);
        let s = g.sigma();
        let m2 = g.integrate(|v| v * v);
        assert!((m2 / (s * s) - 1.0).abs() < 1e-3, "{}", m2 / (s * s));
        assert!(g.weights().iter().all(|&w| w >= 0.0));
        assert!(g.nodes().windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn resolving_grid_moments_and_invariants() {
        let poles = coefficient_resonances(&LadderSystem::default(), &FieldParams::default());
        assert_eq!(poles.len(), 2);
        let g = make_resolving_velocity_grid(T52, RB87_MASS, 513, 6.0, &poles).unwrap();
        assert!((g.integrate(|_| 1.0) - 1.0).abs() < 1e-9);
        assert!(g.integrate(|v| v).abs() < 1e-9 * g.sigma());
        let s = g.sigma();
        assert!((g.integrate(|v| v * v) / (s * s) - 1.0).abs() < 1e-6);
        assert!(g.weights().iter().all(|&w| w >= 0.0));
        assert!(g.nodes().windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn resolving_grid_integrates_a_narrow_lorentzian() {
        // ∫ f(v)·d/((v-c)² + d²) dv for d ≪ σ tends to π·f(c)
        let pole = Resonance { center: -300.0, distance: 0.05 };
        let g = make_resolving_velocity_grid(T52, RB87_MASS, 513, 6.0, &[pole]).unwrap();
        let got = g.integrate(|v| pole.distance / ((v - pole.center).powi(2) + pole.distance.powi(2)));
        let expect = PI * maxwell_boltzmann_pdf(pole.center, T52, RB87_MASS).unwrap();
        assert!((got / expect - 1.0).abs() < 1e-3, "{got} vs {expect}");
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = gauss_legendre(PANEL_ORDER);
        let w: f64 = rule.iter().map(|r| r.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        // ∫ x^30 over [-1,1] = 2/31
        let m: f64 = rule.iter().map(|&(x, w)| w * x.powi(30)).sum();
        assert!((m - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn velocity_grid_configuration_errors() {
        assert!(make_velocity_grid(T52, RB87_MASS, 15, 6.0).is_err());
        assert!(make_velocity_grid(T52, RB87_MASS, 64, 3.5).is_err());
        assert!(make_velocity_grid(-1.0, RB87_MASS, 64, 6.0).is_err());
    }

    #[test]
    fn doppler_width_of_idler_line() {
        let w = doppler_fwhm(T52, RB87_MASS, 780.24e-9).unwrap();
        assert!((w / 540e6 - 1.0).abs() < 0.05, "{w}");
        assert!((w - 533e6).abs() < 1.5e6, "{w}");
        let w2 = doppler_fwhm(T52, RB87_MASS, 2.0 * 780.24e-9).unwrap();
        assert!((w / w2 - 2.0).abs() < 1e-14);
        let w75 = doppler_fwhm(T75, RB87_MASS, 780.24e-9).unwrap();
        assert!((w75 - 551e6).abs() < 1.5e6, "{w75}");
        let heavy = doppler_fwhm(T52, 4.0 * RB87_MASS, 780.24e-9).unwrap();
        assert!((w / heavy - 2.0).abs() < 1e-14);
    }

    #[test]
    fn default_ladder_is_near_wavelength_matched() {
        let sys = LadderSystem::default();
        sys.validate().unwrap();
        assert!(((sys.k_pump() - sys.k_coupling()) / sys.k_pump()).abs() < 0.01);
        assert!((sys.k_idler() - TAU / 780.2e-9).abs() < 1e-6);
        FieldParams::default().validate().unwrap();
        assert_eq!(FieldParams::default().two_photon_detuning(), 0.0);
        VaporCell::default().validate().unwrap();
    }

    #[test]
    fn invalid_parameter_sets_are_rejected() {
        let sys = LadderSystem { gamma32: 0.0, ..Default::default() };
        assert!(sys.validate().is_err());
        let f = FieldParams { rabi_pump: -1.0, ..Default::default() };
        assert!(f.validate().is_err());
        let c = VaporCell { optical_depth: -0.1, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn coefficient_reference_and_zero_pump() {
        let sys = LadderSystem::default();
        let f = FieldParams::default();
        assert!((two_photon_coefficient(0.0, &sys, &f).norm() - 1.0).abs() < 1e-12);
        let off = FieldParams { rabi_pump: 0.0, ..f };
        for v in [-300.0, 0.0, 120.0] {
            assert_eq!(two_photon_coefficient(v, &sys, &off), Complex64::new(0.0, 0.0));
        }
    }

    fn min_ratio(geometry: Geometry) -> f64 {
        let sys = LadderSystem::default();
        let f = FieldParams { geometry, ..Default::default() };
        let s = sigma_v(T52, RB87_MASS).unwrap();
        let a0 = two_photon_coefficient(0.0, &sys, &f).norm();
        (0..=400)
            .map(|j| -2.0 * s + j as f64 * 4.0 * s / 400.0)
            .map(|v| two_photon_coefficient(v, &sys, &f).norm() / a0)
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn counter_propagation_beats_co_propagation() {
        assert!(min_ratio(Geometry::CounterPropagating) > min_ratio(Geometry::CoPropagating));
    }

    #[test]
    fn co_propagating_coefficient_collapses_off_resonance() {
        let sys = LadderSystem::default();
        let f = FieldParams { geometry: Geometry::CoPropagating, ..Default::default() };
        let s = sigma_v(T52, RB87_MASS).unwrap();
        let a0 = two_photon_coefficient(0.0, &sys, &f).norm();
        let a2 = two_photon_coefficient(2.0 * s, &sys, &f).norm();
        assert!(a0 / a2 > 10.0, "{}", a0 / a2);
    }

    #[test]
    fn residual_two_photon_doppler_shift_is_small() {
        // The counter-propagating two-photon shift is < 1% of the one-photon
        // shift at every velocity.
        let sys = LadderSystem::default();
        let ratio = (sys.k_pump() - sys.k_coupling()).abs() / sys.k_pump();
        assert!(ratio < 0.01, "{ratio}");
    }

    #[test]
    #[ignore = "fails with the documented defaults: at 810 MHz one-photon detuning the |δ_p + k_p v| \
                factor alone varies ~3.5x over ±2σ, and (k_p - k_c)·2σ ≈ 2π·2.6 MHz exceeds γ32/2"]
    fn counter_propagating_coefficient_is_flat_over_two_sigma() {
        assert!(1.0 - min_ratio(Geometry::CounterPropagating) < 0.2);
    }

    #[test]
    fn coefficient_is_finite_and_continuous() {
        let sys = LadderSystem::default();
        let f = FieldParams::default();
        let s = sigma_v(T52, RB87_MASS).unwrap();
        let n = 20_000;
        let step = 12.0 * s / n as f64;
        let mut prev = two_photon_coefficient(-6.0 * s, &sys, &f);
        for j in 1..=n {
            let a = two_photon_coefficient(-6.0 * s + j as f64 * step, &sys, &f);
            assert!(a.re.is_finite() && a.im.is_finite());
            // step is ~4% of the narrowest Lorentzian width (γ31/2k_p ≈ 2.4 m/s)
            assert!((a - prev).norm() <= 0.1 * a.norm().max(prev.norm()), "jump at node {j}");
            prev = a;
        }
    }
}
