//! Estimators over detector event streams: start-stop histograms, coincidence
//! and accidental rates, dead-time correction, normalised g², heralded g²,
//! pair rate, heralding efficiency and the Cauchy-Schwarz factor.

use crate::counting::{seconds_to_ticks, EventStream, TICK};
use crate::error::{Error, Result};
use crate::waveform::{CorrelationFunction, TimeGrid};

/// Delay histogram with bins centred on multiples of `bin_width`.
/// Bin `k` covers `[offset + k·bin_width, offset + (k+1)·bin_width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    bin_width: f64,
    offset: f64,
    counts: Vec<u64>,
}

impl CoincidenceHistogram {
    pub fn new(bin_width: f64, offset: f64, counts: Vec<u64>) -> Result<Self> {
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(Error::Config(format!("histogram: bin_width must be positive, got {bin_width}")));
        }
        if !offset.is_finite() {
            return Err(Error::Config("histogram: offset must be finite".into()));
        }
        Ok(Self { bin_width, offset, counts })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        self.offset + (k as f64 + 0.5) * self.bin_width
    }

    /// Bin holding the largest count (first one on ties).
    pub fn peak_bin(&self) -> Option<usize> {
        let max = *self.counts.iter().max()?;
        self.counts.iter().position(|&c| c == max)
    }

    /// Bin whose centre is nearest to `tau`.
    pub fn bin_of(&self, tau: f64) -> Option<usize> {
        let k = ((tau - self.offset) / self.bin_width).floor();
        (k >= 0.0 && (k as usize) < self.counts.len()).then_some(k as usize)
    }

    /// Bin-wise sum with a histogram on the same binning.
    pub fn merged(&self, other: &Self) -> Result<Self> {
        if self.counts.len() != other.counts.len()
            || (self.bin_width - other.bin_width).abs() > 1e-15
            || (self.offset - other.offset).abs() > 1e-15
        {
            return Err(Error::Config("histograms have different binning".into()));
        }
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        Ok(Self { counts, ..*self })
    }
}

/// Multi-stop start-stop histogram of `stop - start` over `[-range, range]`,
/// rounded outward to whole bins.
pub fn start_stop_histogram(
    start: &EventStream,
    stop: &EventStream,
    bin_width: f64,
    range: f64,
) -> Result<CoincidenceHistogram> {
    let bin = seconds_to_ticks(bin_width);
    if bin < 1 {
        return Err(Error::Config(format!("histogram: bin_width {bin_width} s is below the {TICK} s tick")));
    }
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::Config(format!("histogram: range must be positive, got {range}")));
    }
    let half_bins = (seconds_to_ticks(range) + bin - 1) / bin;
    let n = (2 * half_bins + 1) as usize;
    let mut counts = vec![0u64; n];
    // bins centred on k·bin: index = floor((2d + bin) / 2bin) + half_bins
    let lo = -(half_bins * bin) - bin / 2 - 1;
    let hi = half_bins * bin + bin;
    let stops = stop.timestamps();
    let mut first = 0usize;
    for &s in start.timestamps() {
        while first < stops.len() && stops[first] - s < lo {
            first += 1;
        }
        for &t in &stops[first..] {
            let d = t - s;
            if d > hi {
                break;
            }
            let k = (2 * d + bin).div_euclid(2 * bin) + half_bins;
            if (0..n as i64).contains(&k) {
                counts[k as usize] += 1;
            }
        }
    }
    let bin_width = bin as f64 * TICK;
    CoincidenceHistogram::new(bin_width, -(half_bins as f64 + 0.5) * bin_width, counts)
}

/// Where the coincidence window sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowAnchor {
    /// Centred on the highest bin.
    #[default]
    Peak,
    /// Starting at the τ = 0 bin.
    Zero,
}

/// Coincidence window and accidental-floor region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub width: f64,
    pub anchor: WindowAnchor,
    /// Wing region `inner ≤ |τ| ≤ outer` for the accidental floor.
    pub wing_inner: f64,
    pub wing_outer: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { width: 4.1e-9, anchor: WindowAnchor::Peak, wing_inner: 20e-9, wing_outer: 40e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceRate {
    pub raw: f64,
    pub accidental: f64,
    pub net: f64,
    /// `raw - accidental` was negative and has been set to zero.
    pub floored: bool,
}

fn window_bins(hist: &CoincidenceHistogram, spec: &WindowSpec) -> Result<std::ops::Range<usize>> {
    let nb = spec.width / hist.bin_width();
    let nwin = nb.round();
    if nwin < 1.0 || (nb - nwin).abs() > 1e-6 * nb.max(1.0) {
        return Err(Error::Windowing(format!(
            "window {} s is not a whole number of {} s bins",
            spec.width,
            hist.bin_width()
        )));
    }
    let nwin = nwin as usize;
    let start = match spec.anchor {
        WindowAnchor::Peak => {
            let p = hist.peak_bin().ok_or_else(|| Error::Estimation("empty histogram".into()))?;
            p.checked_sub((nwin - 1) / 2)
        }
        WindowAnchor::Zero => hist.bin_of(0.0),
    };
    match start {
        Some(s) if s + nwin <= hist.len() => Ok(s..s + nwin),
        _ => Err(Error::Windowing("coincidence window runs off the histogram".into())),
    }
}

/// Mean counts per bin over the wing region.
fn wing_floor(hist: &CoincidenceHistogram, spec: &WindowSpec) -> Result<f64> {
    let wings: Vec<u64> = (0..hist.len())
        .filter(|&k| {
            let t = hist.bin_center(k).abs();
            t >= spec.wing_inner && t <= spec.wing_outer
        })
        .map(|k| hist.counts()[k])
        .collect();
    if wings.is_empty() {
        return Err(Error::Estimation(format!(
            "histogram has no bins with {} s <= |tau| <= {} s for the accidental floor",
            spec.wing_inner, spec.wing_outer
        )));
    }
    Ok(wings.iter().sum::<u64>() as f64 / wings.len() as f64)
}

pub fn coincidence_rate(hist: &CoincidenceHistogram, spec: &WindowSpec, acquisition: f64) -> Result<CoincidenceRate> {
    if !(acquisition.is_finite() && acquisition > 0.0) {
        return Err(Error::Config(format!("acquisition time must be positive, got {acquisition}")));
    }
    let floor = wing_floor(hist, spec)?;
    let bins = window_bins(hist, spec)?;
    let nwin = bins.len() as f64;
    let raw_counts: u64 = hist.counts()[bins].iter().sum();
    let raw = raw_counts as f64 / acquisition;
    let accidental = floor * nwin / acquisition;
    let diff = raw - accidental;
    Ok(CoincidenceRate { raw, accidental, net: diff.max(0.0), floored: diff < 0.0 })
}

/// Counts above a constant floor (per bin), clipped at zero, for the bins
/// whose centres lie in `[t_lo, t_hi]`.
pub fn histogram_excess(hist: &CoincidenceHistogram, floor: f64, t_lo: f64, t_hi: f64) -> Result<CorrelationFunction> {
    let bins: Vec<usize> = (0..hist.len()).filter(|&k| (t_lo..=t_hi).contains(&hist.bin_center(k))).collect();
    let (Some(&first), true) = (bins.first(), bins.len() >= 2) else {
        return Err(Error::Windowing(format!("fewer than 2 bins between {t_lo} s and {t_hi} s")));
    };
    let grid = TimeGrid::new(hist.bin_center(first), hist.bin_width(), bins.len())?;
    CorrelationFunction::new(grid, bins.iter().map(|&k| (hist.counts()[k] as f64 - floor).max(0.0)).collect())
}

/// Mean counts per bin in the accidental wings of `spec`.
pub fn accidental_floor(hist: &CoincidenceHistogram, spec: &WindowSpec) -> Result<f64> {
    wing_floor(hist, spec)
}

/// Non-paralyzable dead-time correction `m / (1 - m·τ)`.
pub fn dead_time_correct(measured_rate: f64, dead_time: f64) -> Result<f64> {
    if !(measured_rate.is_finite() && measured_rate >= 0.0 && dead_time.is_finite() && dead_time >= 0.0) {
        return Err(Error::Domain(format!("rate {measured_rate} and dead time {dead_time} must be nonnegative")));
    }
    let x = measured_rate * dead_time;
    if x >= 1.0 {
        return Err(Error::Saturation(format!("measured rate x dead time = {x} >= 1")));
    }
    Ok(measured_rate / (1.0 - x))
}

/// `N_pair = N_s·N_i / N_c`.
pub fn pair_rate_estimate(n_s: f64, n_i: f64, n_c: f64) -> Result<f64> {
    if !(n_c > 0.0 && n_c.is_finite()) {
        return Err(Error::Estimation(format!("pair rate undefined for coincidence rate {n_c}")));
    }
    if !(n_s >= 0.0 && n_i >= 0.0) {
        return Err(Error::Domain("singles rates must be nonnegative".into()));
    }
    Ok(n_s * n_i / n_c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heralding {
    pub efficiency: f64,
    /// The raw ratio exceeded 1 and was reported as 1.
    pub clamped: bool,
}

/// `η = N_c / N_single`.
pub fn heralding_efficiency(n_c: f64, n_single: f64) -> Result<Heralding> {
    if !(n_single > 0.0 && n_single.is_finite()) {
        return Err(Error::Estimation(format!("heralding efficiency undefined for singles rate {n_single}")));
    }
    if !(n_c >= 0.0) {
        return Err(Error::Domain(format!("coincidence rate must be nonnegative, got {n_c}")));
    }
    let r = n_c / n_single;
    Ok(Heralding { efficiency: r.min(1.0), clamped: r > 1.0 })
}

/// Histogram divided by the accidental level `R₁·R₂·bin·T`; sample `k` sits
/// at the bin centre.
pub fn normalized_g2(
    hist: &CoincidenceHistogram,
    rate_start: f64,
    rate_stop: f64,
    acquisition: f64,
) -> Result<CorrelationFunction> {
    let norm = rate_start * rate_stop * hist.bin_width() * acquisition;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Estimation(format!(
            "cannot normalise with rates ({rate_start}, {rate_stop}) and acquisition {acquisition}"
        )));
    }
    let grid = TimeGrid::new(hist.bin_center(0), hist.bin_width(), hist.len())?;
    CorrelationFunction::new(grid, hist.counts().iter().map(|&c| c as f64 / norm).collect())
}

/// How g²(0) is read off a normalised correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum G2Zero {
    #[default]
    Peak,
    /// The sample nearest τ = 0.
    ZeroBin,
}

pub fn g2_at_zero(g2: &CorrelationFunction, mode: G2Zero) -> f64 {
    match mode {
        G2Zero::Peak => g2.peak().1,
        G2Zero::ZeroBin => {
            let j = (-g2.grid().t_start() / g2.grid().dt()).round();
            if j < 0.0 || j as usize >= g2.values().len() {
                0.0
            } else {
                g2.values()[j as usize]
            }
        }
    }
}

/// Normalised cross-correlation of the two outputs of a splitter on one arm.
pub fn auto_correlation_g2(
    half_a: &EventStream,
    half_b: &EventStream,
    bin_width: f64,
    range: f64,
) -> Result<CorrelationFunction> {
    let hist = start_stop_histogram(half_a, half_b, bin_width, range)?;
    normalized_g2(&hist, half_a.rate(), half_b.rate(), half_a.duration())
}

/// Coincidence window `[center - width/2, center + width/2)` relative to a herald.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldWindow {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldedG2 {
    pub value: f64,
    pub heralds: u64,
    pub doubles_1: u64,
    pub doubles_2: u64,
    pub triples: u64,
}

fn any_in(stream: &[i64], lo: i64, hi: i64) -> bool {
    let k = stream.partition_point(|&t| t < lo);
    k < stream.len() && stream[k] < hi
}

/// Three-detector conditional `g²_c = N_s·N_{s,i1,i2} / (N_{s,i1}·N_{s,i2})`,
/// counting at most one click per idler detector per herald.
pub fn heralded_g2c(
    signal: &EventStream,
    idler1: &EventStream,
    idler2: &EventStream,
    window: &HeraldWindow,
) -> Result<HeraldedG2> {
    if !(window.width > 0.0 && window.width.is_finite() && window.center.is_finite()) {
        return Err(Error::Config(format!("herald window width must be positive, got {}", window.width)));
    }
    let lo_off = seconds_to_ticks(window.center - window.width / 2.0);
    let hi_off = seconds_to_ticks(window.center + window.width / 2.0);
    let (mut d1, mut d2, mut tr) = (0u64, 0u64, 0u64);
    for &s in signal.timestamps() {
        let a = any_in(idler1.timestamps(), s + lo_off, s + hi_off);
        let b = any_in(idler2.timestamps(), s + lo_off, s + hi_off);
        d1 += a as u64;
        d2 += b as u64;
        tr += (a && b) as u64;
    }
    let heralds = signal.len() as u64;
    if d1 == 0 || d2 == 0 {
        return Err(Error::Estimation("heralded g2 undefined: no double coincidences on one idler detector".into()));
    }
    let value = (heralds as f64 * tr as f64) / (d1 as f64 * d2 as f64);
    Ok(HeraldedG2 { value, heralds, doubles_1: d1, doubles_2: d2, triples: tr })
}

/// `R = g_si² / (g_ss·g_ii)`.
pub fn cauchy_schwarz_factor(g2_si0: f64, g2_ss0: f64, g2_ii0: f64) -> Result<f64> {
    if [g2_si0, g2_ss0, g2_ii0].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Domain(format!(
            "Cauchy-Schwarz inputs must be positive, got ({g2_si0}, {g2_ss0}, {g2_ii0})"
        )));
    }
    Ok(g2_si0 * g2_si0 / (g2_ss0 * g2_ii0))
}

/// Rates and derived figures of one counting run.
///
/// `eta_s = n_c/n_s` and `eta_i = n_c/n_i`: each heralded by the named arm, so
/// `eta_s` measures the idler channel's detection probability and vice versa.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountingSummary {
    pub n_s: f64,
    pub n_i: f64,
    pub n_c: f64,
    pub n_c_raw: f64,
    pub n_accidental: f64,
    pub net_floored: bool,
    pub window: f64,
    pub acquisition: f64,
    pub n_pair: Option<f64>,
    pub eta_s: Option<f64>,
    pub eta_i: Option<f64>,
    pub eta_clamped: bool,
    pub g2_si0: Option<f64>,
    pub g2_ss0: Option<f64>,
    pub g2_ii0: Option<f64>,
    pub g2_c0: Option<f64>,
    pub cs_factor: Option<f64>,
}

impl CountingSummary {
    /// Flat `key=value` pairs; absent optional figures are left out.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = [
            ("n_s", self.n_s),
            ("n_i", self.n_i),
            ("n_c", self.n_c),
            ("n_c_raw", self.n_c_raw),
            ("n_accidental", self.n_accidental),
            ("window_s", self.window),
            ("acquisition_s", self.acquisition),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), format!("{v:e}")))
        .collect();
        out.push(("net_floored".into(), self.net_floored.to_string()));
        out.push(("eta_clamped".into(), self.eta_clamped.to_string()));
        for (k, v) in [
            ("n_pair", self.n_pair),
            ("eta_s", self.eta_s),
            ("eta_i", self.eta_i),
            ("g2_si0", self.g2_si0),
            ("g2_ss0", self.g2_ss0),
            ("g2_ii0", self.g2_ii0),
            ("g2_c0", self.g2_c0),
            ("cs_factor", self.cs_factor),
        ] {
            if let Some(v) = v {
                out.push((k.to_string(), format!("{v:e}")));
            }
        }
        out
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut s = Self::default();
        for (k, v) in pairs {
            let num = || v.parse::<f64>().map_err(|e| Error::Parse { line: 0, msg: format!("summary key {k}: {e}") });
            let flag = || v.parse::<bool>().map_err(|e| Error::Parse { line: 0, msg: format!("summary key {k}: {e}") });
            match k {
                "n_s" => s.n_s = num()?,
                "n_i" => s.n_i = num()?,
                "n_c" => s.n_c = num()?,
                "n_c_raw" => s.n_c_raw = num()?,
                "n_accidental" => s.n_accidental = num()?,
                "window_s" => s.window = num()?,
                "acquisition_s" => s.acquisition = num()?,
                "net_floored" => s.net_floored = flag()?,
                "eta_clamped" => s.eta_clamped = flag()?,
                "n_pair" => s.n_pair = Some(num()?),
                "eta_s" => s.eta_s = Some(num()?),
                "eta_i" => s.eta_i = Some(num()?),
                "g2_si0" => s.g2_si0 = Some(num()?),
                "g2_ss0" => s.g2_ss0 = Some(num()?),
                "g2_ii0" => s.g2_ii0 = Some(num()?),
                "g2_c0" => s.g2_c0 = Some(num()?),
                "cs_factor" => s.cs_factor = Some(num()?),
                _ => return Err(Error::Parse { line: 0, msg: format!("unknown summary key {k}") }),
            }
        }
        Ok(s)
    }
}

/// Settings for [`summarize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryOptions {
    pub bin_width: f64,
    pub range: f64,
    pub window: WindowSpec,
    pub g2_zero: G2Zero,
    /// Dead time used to correct the singles rates; `None` leaves them raw.
    pub dead_time: Option<f64>,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self { bin_width: 100e-12, range: 50e-9, window: WindowSpec::default(), g2_zero: G2Zero::Peak, dead_time: None }
    }
}

/// Histograms produced by [`summarize`]: signal-idler, and idler1-idler2 when
/// a second idler detector is present.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryHistograms {
    pub signal_idler: CoincidenceHistogram,
    pub idler_idler: Option<CoincidenceHistogram>,
}

/// Runs the estimators over a signal stream and one or two idler streams.
pub fn summarize(
    signal: &EventStream,
    idlers: &[EventStream],
    options: &SummaryOptions,
) -> Result<(CountingSummary, SummaryHistograms)> {
    if idlers.is_empty() || idlers.len() > 2 {
        return Err(Error::Config(format!("need one or two idler streams, got {}", idlers.len())));
    }
    let acquisition = signal.duration();
    let correct = |r: f64| match options.dead_time {
        Some(tau) => dead_time_correct(r, tau),
        None => Ok(r),
    };
    let mut hist = start_stop_histogram(signal, &idlers[0], options.bin_width, options.range)?;
    for extra in &idlers[1..] {
        hist = hist.merged(&start_stop_histogram(signal, extra, options.bin_width, options.range)?)?;
    }
    let rates = coincidence_rate(&hist, &options.window, acquisition)?;
    let n_s = correct(signal.rate())?;
    let n_i = idlers.iter().map(|s| correct(s.rate())).sum::<Result<f64>>()?;

    let mut summary = CountingSummary {
        n_s,
        n_i,
        n_c: rates.net,
        n_c_raw: rates.raw,
        n_accidental: rates.accidental,
        net_floored: rates.floored,
        window: options.window.width,
        acquisition,
        ..Default::default()
    };
    if rates.net > 0.0 {
        summary.n_pair = Some(pair_rate_estimate(n_s, n_i, rates.net)?);
    }
    if n_s > 0.0 && n_i > 0.0 {
        let hs = heralding_efficiency(rates.net, n_s)?;
        let hi = heralding_efficiency(rates.net, n_i)?;
        summary.eta_s = Some(hs.efficiency);
        summary.eta_i = Some(hi.efficiency);
        summary.eta_clamped = hs.clamped || hi.clamped;
        let g = normalized_g2(&hist, signal.rate(), idlers.iter().map(|s| s.rate()).sum(), acquisition)?;
        summary.g2_si0 = Some(g2_at_zero(&g, options.g2_zero));
    }
    let mut idler_idler = None;
    if let [i1, i2] = idlers {
        if !i1.is_empty() && !i2.is_empty() {
            let h = start_stop_histogram(i1, i2, options.bin_width, options.range)?;
            let g = normalized_g2(&h, i1.rate(), i2.rate(), acquisition)?;
            summary.g2_ii0 = Some(g2_at_zero(&g, G2Zero::ZeroBin));
            idler_idler = Some(h);
        }
        if let Some(peak) = hist.peak_bin() {
            let window = HeraldWindow { center: hist.bin_center(peak), width: options.window.width };
            summary.g2_c0 = heralded_g2c(signal, i1, i2, &window).ok().map(|h| h.value);
        }
    }
    if let (Some(si), Some(ss), Some(ii)) = (summary.g2_si0, summary.g2_ss0, summary.g2_ii0) {
        summary.cs_factor = cauchy_schwarz_factor(si, ss, ii).ok();
    }
    Ok((summary, SummaryHistograms { signal_idler: hist, idler_idler }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::ChannelId;

    fn stream(ch: u32, t_ns: &[f64], duration: f64) -> EventStream {
        EventStream::new(ChannelId(ch), t_ns.iter().map(|t| seconds_to_ticks(t * 1e-9)).collect(), duration).unwrap()
    }

    #[test]
    fn shifted_copy_fills_one_bin() {
        let a: Vec<f64> = (0..500).map(|j| 1000.0 * j as f64 + 17.0).collect();
        let b: Vec<f64> = a.iter().map(|t| t + 3.0).collect();
        let h = start_stop_histogram(&stream(0, &a, 1e-3), &stream(1, &b, 1e-3), 100e-12, 10e-9).unwrap();
        assert_eq!(h.total(), 500);
        let k = h.peak_bin().unwrap();
        assert_eq!(h.counts()[k], 500);
        assert!((h.bin_center(k) - 3e-9).abs() < 1e-15);
    }

    #[test]
    fn self_correlation_peaks_at_zero() {
        let a: Vec<f64> = (0..200).map(|j| 7.0 * j as f64 + 0.5 * (j % 3) as f64).collect();
        let s = stream(0, &a, 1e-5);
        let h = start_stop_histogram(&s, &s, 100e-12, 10e-9).unwrap();
        let k = h.bin_of(0.0).unwrap();
        assert_eq!(h.counts()[k], 200);
        assert_eq!(h.peak_bin(), Some(k));
    }

    #[test]
    fn histogram_binning_edges() {
        let a = stream(0, &[100.0], 1e-6);
        let b = stream(1, &[99.949, 99.95, 100.05, 100.149], 1e-6);
        let h = start_stop_histogram(&a, &b, 100e-12, 1e-9).unwrap();
        let zero = h.bin_of(0.0).unwrap();
        // bins centred on 0 cover [-50, 50) ps
        assert_eq!(h.counts()[zero], 1);
        assert_eq!(h.counts()[zero + 1], 2);
        assert_eq!(h.counts()[zero - 1], 1);
    }

    #[test]
    fn constructed_histogram_arithmetic() {
        let bin = 100e-12;
        let n = 1001;
        let mut counts = vec![10u64; n];
        let c = n / 2 + 3;
        counts[c] += 600;
        counts[c - 1] += 200;
        counts[c + 1] += 200;
        let h = CoincidenceHistogram::new(bin, -(500.5) * bin, counts).unwrap();
        let r = coincidence_rate(&h, &WindowSpec::default(), 2.0).unwrap();
        assert!((r.accidental - 410.0 / 2.0).abs() < 1e-9);
        assert!((r.net - 1000.0 / 2.0).abs() < 1e-9);
        assert!(!r.floored);
    }

    #[test]
    fn window_must_be_whole_bins() {
        let h = CoincidenceHistogram::new(100e-12, -50.05e-9, vec![1; 1001]).unwrap();
        let spec = WindowSpec { width: 4.15e-9, ..Default::default() };
        assert!(matches!(coincidence_rate(&h, &spec, 1.0), Err(Error::Windowing(_))));
        let narrow = CoincidenceHistogram::new(100e-12, -5.05e-9, vec![1; 101]).unwrap();
        assert!(matches!(coincidence_rate(&narrow, &WindowSpec::default(), 1.0), Err(Error::Estimation(_))));
    }

    #[test]
    fn net_is_floored_with_flag() {
        let mut counts = vec![10u64; 1001];
        for c in counts.iter_mut().skip(480).take(41) {
            *c = 5;
        }
        counts[500] = 6;
        let h = CoincidenceHistogram::new(100e-12, -50.05e-9, counts).unwrap();
        let r = coincidence_rate(&h, &WindowSpec { anchor: WindowAnchor::Zero, ..Default::default() }, 1.0).unwrap();
        assert_eq!(r.net, 0.0);
        assert!(r.floored);
    }

    #[test]
    fn dead_time_examples() {
        assert_eq!(dead_time_correct(0.0, 50e-9).unwrap(), 0.0);
        assert!((dead_time_correct(5e5, 50e-9).unwrap() - 512_820.512_820_5).abs() < 1e-3);
        assert!(matches!(dead_time_correct(2e7, 50e-9), Err(Error::Saturation(_))));
    }

    #[test]
    fn pair_rate_and_heralding_examples() {
        let n_c = 30.3e3;
        let singles = n_c / 0.058;
        let pr = pair_rate_estimate(singles, singles, n_c).unwrap();
        assert!((pr / 8.98e6 - 1.0).abs() < 0.03, "{pr}");
        assert_eq!(pair_rate_estimate(5.0, 5.0, 5.0).unwrap(), 5.0);
        assert!(matches!(pair_rate_estimate(1.0, 1.0, 0.0), Err(Error::Estimation(_))));
        let h = heralding_efficiency(30_300.0, 522_400.0).unwrap();
        assert!((h.efficiency - 0.058).abs() < 5e-4);
        assert_eq!(heralding_efficiency(7.0, 7.0).unwrap(), Heralding { efficiency: 1.0, clamped: false });
        assert_eq!(heralding_efficiency(8.0, 7.0).unwrap(), Heralding { efficiency: 1.0, clamped: true });
        assert!(heralding_efficiency(1.0, 0.0).is_err());
    }

    #[test]
    fn g2_normalisation_scales_inversely_with_rates() {
        let h = CoincidenceHistogram::new(1e-9, -5.5e-9, vec![4, 8, 12, 8, 4, 4, 4, 4, 4, 4, 4]).unwrap();
        let a = normalized_g2(&h, 10.0, 20.0, 1.0).unwrap();
        let b = normalized_g2(&h, 20.0, 40.0, 1.0).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x / 4.0 - y).abs() < 1e-15);
        }
        assert!(normalized_g2(&h, 0.0, 1.0, 1.0).is_err());
        assert!((g2_at_zero(&a, G2Zero::Peak) * 200e-9 / 12.0 - 1.0).abs() < 1e-12);
        assert!((g2_at_zero(&a, G2Zero::ZeroBin) * 200e-9 / 4.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_schwarz_examples() {
        assert!((cauchy_schwarz_factor(84.7, 1.74, 1.74).unwrap() - 2369.6).abs() < 0.1);
        assert_eq!(cauchy_schwarz_factor(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(cauchy_schwarz_factor(2.0, 2.0, 2.0).unwrap(), 1.0);
        assert_eq!(cauchy_schwarz_factor(2.0, 1.0, 2.0).unwrap(), 2.0);
        assert!(cauchy_schwarz_factor(0.0, 1.0, 1.0).is_err());
        assert!(cauchy_schwarz_factor(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn heralded_counts_by_hand() {
        let s = stream(0, &[10.0, 100.0, 200.0, 300.0], 1e-6);
        let i1 = stream(1, &[11.0, 101.0, 101.5, 250.0], 1e-6);
        let i2 = stream(2, &[100.5, 201.0], 1e-6);
        let w = HeraldWindow { center: 1e-9, width: 2e-9 };
        let h = heralded_g2c(&s, &i1, &i2, &w).unwrap();
        assert_eq!((h.heralds, h.doubles_1, h.doubles_2, h.triples), (4, 2, 2, 1));
        assert_eq!(h.value, 1.0);
        let empty = stream(2, &[], 1e-6);
        assert!(heralded_g2c(&s, &i1, &empty, &w).is_err());
    }

    #[test]
    fn summary_round_trips_through_pairs() {
        let s =
            CountingSummary { n_s: 1.5, n_pair: Some(3.0), net_floored: true, g2_c0: Some(0.1), ..Default::default() };
        let pairs = s.to_pairs();
        let back = CountingSummary::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        assert_eq!(back, s);
    }
}
