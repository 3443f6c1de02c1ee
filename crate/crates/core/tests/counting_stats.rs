//! Goodness-of-fit checks on the Monte Carlo generators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfwm_core::counting::{
    apply_channel, generate_pairs, poisson_arrivals, ChannelId, ChannelSpec, DetectorSpec, PairSourceSpec,
};
use sfwm_core::waveform::{CorrelationFunction, TimeGrid};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn sampled_delays_follow_the_waveform() {
    let grid = TimeGrid::new(0.0, 10e-12, 2000).unwrap();
    let values: Vec<f64> = grid.times().map(|t| (-t / 5e-9).exp()).collect();
    let total: f64 = values.iter().sum();
    let src = PairSourceSpec {
        pair_rate: 1e6,
        waveform: CorrelationFunction::new(grid, values.clone()).unwrap(),
        duration: 1.0,
        seed: 42,
    };
    let pairs = generate_pairs(&src).unwrap();
    let n = pairs.len() as f64;
    assert!(n > 9.9e5);

    let bins = 100;
    let per_bin = grid.len() / bins;
    let mut observed = vec![0.0; bins];
    for (s, i) in &pairs {
        let j = ((i - s) / grid.dt()).round() as usize;
        observed[j / per_bin] += 1.0;
    }
    let chi2: f64 = (0..bins)
        .map(|b| {
            let p: f64 = values[b * per_bin..(b + 1) * per_bin].iter().sum::<f64>() / total;
            let e = p * n;
            (observed[b] - e).powi(2) / e
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi2);
    assert!(p_value > 0.01, "chi2 = {chi2}, p = {p_value}");
}

/// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> (f64, f64) {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    if lambda < 0.2 {
        return (d, 1.0);
    }
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    (d, p.clamp(0.0, 1.0))
}

fn gaps(ticks: &[i64]) -> Vec<f64> {
    ticks.windows(2).map(|w| (w[1] - w[0]) as f64).collect()
}

fn lossy(transmission: f64) -> ChannelSpec {
    ChannelSpec { transmission, detector: DetectorSpec::ideal() }
}

#[test]
fn sequential_thinning_matches_single_thinning() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let arrivals = poisson_arrivals(2e5, 1.0, &mut rng);
    let (p, q) = (0.6, 0.5);

    let first = apply_channel(&arrivals, &lossy(p), ChannelId(0), 1.0, 100).unwrap();
    let first_s: Vec<f64> = first.timestamps().iter().map(|&t| t as f64 * 1e-12).collect();
    let twice = apply_channel(&first_s, &lossy(q), ChannelId(0), 1.0, 101).unwrap();
    let once = apply_channel(&arrivals, &lossy(p * q), ChannelId(0), 1.0, 102).unwrap();

    let rel = twice.len() as f64 / once.len() as f64 - 1.0;
    assert!(rel.abs() < 0.02, "{} vs {}", twice.len(), once.len());
    let (d, p_value) = ks_two_sample(gaps(twice.timestamps()), gaps(once.timestamps()));
    assert!(p_value > 0.01, "KS D = {d}, p = {p_value}");
}

#[test]
fn ks_helper_rejects_different_distributions() {
    let a: Vec<f64> = (0..5000).map(|j| j as f64).collect();
    let b: Vec<f64> = (0..5000).map(|j| 1.3 * j as f64).collect();
    let (_, p) = ks_two_sample(a.clone(), b);
    assert!(p < 1e-6);
    let (d, p) = ks_two_sample(a.clone(), a);
    assert_eq!(d, 0.0);
    assert!(p > 0.99);
}
