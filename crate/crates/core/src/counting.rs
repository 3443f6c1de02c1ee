//! Monte Carlo photon-pair detection with lossy channels and imperfect
//! avalanche detectors (efficiency, jitter, dark counts, dead time).
//!
//! Timestamps are integer picoseconds, like the ticks of a TCSPC module.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{config, Error, Result};
use crate::waveform::CorrelationFunction;

/// Seconds per timestamp tick.
pub const TICK: f64 = 1e-12;

/// Gaussian FWHM / σ.
pub const FWHM_PER_SIGMA: f64 = 2.355;

pub fn seconds_to_ticks(t: f64) -> i64 {
    (t / TICK).round() as i64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    pub quantum_efficiency: f64,
    pub jitter_sigma: f64,
    pub dead_time: f64,
    pub dark_rate: f64,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self { quantum_efficiency: 0.40, jitter_sigma: 300e-12 / FWHM_PER_SIGMA, dead_time: 50e-9, dark_rate: 200.0 }
    }
}

impl DetectorSpec {
    /// Perfect detector: unit efficiency, no jitter, dark counts or dead time.
    pub fn ideal() -> Self {
        Self { quantum_efficiency: 1.0, jitter_sigma: 0.0, dead_time: 0.0, dark_rate: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.quantum_efficiency) {
            return Err(config(format!("detector: quantum_efficiency {} not in [0, 1]", self.quantum_efficiency)));
        }
        for (name, v) in
            [("jitter_sigma", self.jitter_sigma), ("dead_time", self.dead_time), ("dark_rate", self.dark_rate)]
        {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config(format!("detector: {name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub transmission: f64,
    pub detector: DetectorSpec,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self { transmission: 0.50, detector: DetectorSpec::default() }
    }
}

impl ChannelSpec {
    pub fn ideal() -> Self {
        Self { transmission: 1.0, detector: DetectorSpec::ideal() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.transmission) {
            return Err(config(format!("channel: transmission {} not in [0, 1]", self.transmission)));
        }
        self.detector.validate()
    }

    /// Probability that a photon entering the channel produces a click,
    /// ignoring dead time.
    pub fn detection_probability(&self) -> f64 {
        self.transmission * self.detector.quantum_efficiency
    }

    /// Mean click rate for `photon_rate` incident photons/s, including dark
    /// counts and the non-paralyzable dead-time loss.
    pub fn expected_rate(&self, photon_rate: f64) -> f64 {
        let r = photon_rate * self.detection_probability() + self.detector.dark_rate;
        r / (1.0 + r * self.detector.dead_time)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSourceSpec {
    pub pair_rate: f64,
    /// Idler-after-signal delay density (normalised internally).
    pub waveform: CorrelationFunction,
    pub duration: f64,
    pub seed: u64,
}

impl PairSourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate.is_finite() && self.pair_rate >= 0.0) {
            return Err(config(format!("source: pair_rate must be nonnegative, got {}", self.pair_rate)));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(config(format!("source: duration must be positive, got {}", self.duration)));
        }
        if self.waveform.integral() <= 0.0 {
            return Err(config("source: waveform has zero area and cannot be normalised"));
        }
        Ok(())
    }
}

/// Detector label inside a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelId(pub u32);

impl ChannelId {
    pub const SIGNAL: ChannelId = ChannelId(0);
    pub const IDLER: ChannelId = ChannelId(1);
    pub const IDLER2: ChannelId = ChannelId(2);
}

/// Strictly increasing click times (ticks) of one detector over `[0, duration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    channel: ChannelId,
    timestamps: Vec<i64>,
    duration: f64,
}

impl EventStream {
    pub fn new(channel: ChannelId, timestamps: Vec<i64>, duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(config(format!("event stream: duration must be positive, got {duration}")));
        }
        let end = seconds_to_ticks(duration);
        if let Some(w) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Domain(format!(
                "event stream {}: timestamps not strictly increasing at index {}",
                channel.0,
                w + 1
            )));
        }
        if timestamps.first().is_some_and(|&t| t < 0) || timestamps.last().is_some_and(|&t| t > end) {
            return Err(Error::Domain(format!("event stream {}: timestamp outside [0, duration]", channel.0)));
        }
        Ok(Self { channel, timestamps, duration })
    }

    pub fn empty(channel: ChannelId, duration: f64) -> Result<Self> {
        Self::new(channel, Vec::new(), duration)
    }

    pub fn channel(&self) -> ChannelId {
        self.channel
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Clicks per second over the acquisition.
    pub fn rate(&self) -> f64 {
        self.timestamps.len() as f64 / self.duration
    }
}

fn channel_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn poisson_count(mean: f64, rng: &mut ChaCha8Rng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0)
}

/// Sorted arrival times (s) of a homogeneous Poisson process on `[0, duration)`.
pub fn poisson_arrivals(rate: f64, duration: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mean = rate * duration;
    let n = if mean > 0.0 { Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0) } else { 0 };
    let mut t: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * duration).collect();
    t.sort_by(f64::total_cmp);
    t
}

/// Discrete inverse-CDF sampler over the grid points of a waveform.
struct DelaySampler {
    cdf: Vec<f64>,
    times: Vec<f64>,
}

impl DelaySampler {
    fn new(waveform: &CorrelationFunction) -> Self {
        let total: f64 = waveform.values().iter().sum();
        let mut acc = 0.0;
        let cdf = waveform
            .values()
            .iter()
            .map(|v| {
                acc += v / total;
                acc
            })
            .collect();
        Self { cdf, times: waveform.grid().times().collect() }
    }

    fn sample(&self, u: f64) -> f64 {
        let j = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.times[j]
    }
}

/// Pair emission times `(t_signal, t_idler)` in seconds, sorted by signal time.
///
/// Delays take the grid times of the waveform with probabilities
/// proportional to its samples.
pub fn generate_pairs(src: &PairSourceSpec) -> Result<Vec<(f64, f64)>> {
    src.validate()?;
    let mut rng = channel_rng(src.seed, 0);
    let births = poisson_arrivals(src.pair_rate, src.duration, &mut rng);
    let sampler = DelaySampler::new(&src.waveform);
    Ok(births.into_iter().map(|t| (t, t + sampler.sample(rng.random::<f64>()))).collect())
}

/// Loss, jitter, dark counts and non-paralyzable dead time applied to sorted
/// photon arrival times (s). Clicks outside `[0, duration]` are dropped.
pub fn apply_channel(
    events: &[f64],
    chan: &ChannelSpec,
    channel: ChannelId,
    duration: f64,
    seed: u64,
) -> Result<EventStream> {
    chan.validate()?;
    let mut rng = channel_rng(seed, 1 + u64::from(channel.0));
    apply_channel_with(events, chan, channel, duration, &mut rng)
}

fn apply_channel_with(
    events: &[f64],
    chan: &ChannelSpec,
    channel: ChannelId,
    duration: f64,
    rng: &mut ChaCha8Rng,
) -> Result<EventStream> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(config(format!("channel: duration must be positive, got {duration}")));
    }
    let p = chan.detection_probability();
    let det = &chan.detector;
    let jitter = Normal::new(0.0, det.jitter_sigma).map_err(|e| config(format!("jitter: {e}")))?;
    let mut clicks: Vec<i64> = Vec::with_capacity((events.len() as f64 * p) as usize + 16);
    for &t in events {
        if p < 1.0 && rng.random::<f64>() >= p {
            continue;
        }
        let t = if det.jitter_sigma > 0.0 { t + jitter.sample(rng) } else { t };
        clicks.push(seconds_to_ticks(t));
    }
    let dark = poisson_count(det.dark_rate * duration, rng);
    clicks.extend((0..dark).map(|_| seconds_to_ticks(rng.random::<f64>() * duration)));
    clicks.sort_unstable();

    let end = seconds_to_ticks(duration);
    let dead = seconds_to_ticks(det.dead_time);
    let mut kept = Vec::with_capacity(clicks.len());
    let mut last: Option<i64> = None;
    for t in clicks.into_iter().filter(|t| (0..=end).contains(t)) {
        match last {
            Some(l) if t <= l || t - l < dead => {}
            _ => {
                kept.push(t);
                last = Some(t);
            }
        }
    }
    EventStream::new(channel, kept, duration)
}

/// Signal and idler streams, plus a second idler detector behind a balanced
/// splitter when `chan_idler2` is given.
pub fn simulate_run(
    src: &PairSourceSpec,
    chan_signal: &ChannelSpec,
    chan_idler: &ChannelSpec,
    chan_idler2: Option<&ChannelSpec>,
) -> Result<Vec<EventStream>> {
    chan_signal.validate()?;
    chan_idler.validate()?;
    if let Some(c) = chan_idler2 {
        c.validate()?;
    }
    let pairs = generate_pairs(src)?;
    let signal: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut idler: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    idler.sort_by(f64::total_cmp);

    let mut streams = vec![apply_channel(&signal, chan_signal, ChannelId::SIGNAL, src.duration, src.seed)?];
    match chan_idler2 {
        None => streams.push(apply_channel(&idler, chan_idler, ChannelId::IDLER, src.duration, src.seed)?),
        Some(c2) => {
            let mut rng = channel_rng(src.seed, 100);
            let (mut arm1, mut arm2) = (Vec::new(), Vec::new());
            for t in idler {
                if rng.random::<bool>() {
                    arm1.push(t);
                } else {
                    arm2.push(t);
                }
            }
            streams.push(apply_channel(&arm1, chan_idler, ChannelId::IDLER, src.duration, src.seed)?);
            streams.push(apply_channel(&arm2, c2, ChannelId::IDLER2, src.duration, src.seed)?);
        }
    }
    Ok(streams)
}
