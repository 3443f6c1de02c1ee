//! Discrete Fourier transforms on offset grids, backed by `rustfft`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sign {
    /// Kernel `exp(-i x y)`.
    Negative,
    /// Kernel `exp(+i x y)`.
    #[allow(dead_code)]
    Positive,
}

/// `out[j] = Σ_k v[k]·exp(±i·x_k·y_j)` with `x_k = x0 + k·dx`,
/// `y_j = y0 + j·dy` and `dx·dy = 2π/n`.
pub(crate) fn offset_dft(values: &[Complex64], x0: f64, dx: f64, y0: f64, dy: f64, sign: Sign) -> Vec<Complex64> {
    let n = values.len();
    debug_assert!(((dx * dy * n as f64) / TAU - 1.0).abs() < 1e-9);
    let s = match sign {
        Sign::Negative => -1.0,
        Sign::Positive => 1.0,
    };
    let mut buf: Vec<Complex64> =
        values.iter().enumerate().map(|(k, v)| v * Complex64::from_polar(1.0, s * k as f64 * dx * y0)).collect();
    let mut planner = FftPlanner::new();
    let fft = match sign {
        Sign::Negative => planner.plan_fft_forward(n),
        Sign::Positive => planner.plan_fft_inverse(n),
    };
    fft.process(&mut buf);
    buf.iter().enumerate().map(|(j, v)| v * Complex64::from_polar(1.0, s * x0 * (y0 + j as f64 * dy))).collect()
}

/// Modulus of the DFT of a real sequence zero-padded to `padded_len`,
/// reordered so the zero frequency sits at index `padded_len / 2`.
/// Returns the moduli and the frequency spacing (Hz) for sample spacing `dt`.
pub(crate) fn amplitude_spectrum(samples: &[f64], dt: f64, padded_len: usize) -> (Vec<f64>, f64) {
    let n = padded_len.max(samples.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (b, &s) in buf.iter_mut().zip(samples) {
        b.re = s;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let moduli = (0..n).map(|i| buf[(i + n - half) % n].norm()).collect();
    (moduli, 1.0 / (n as f64 * dt))
}

/// Full linear convolution `c[m] = Σ a[i]·b[m-i]` of length `a.len()+b.len()-1`.
pub(crate) fn linear_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); n];
    let mut fb = vec![Complex64::new(0.0, 0.0); n];
    for (d, &s) in fa.iter_mut().zip(a) {
        d.re = s;
    }
    for (d, &s) in fb.iter_mut().zip(b) {
        d.re = s;
    }
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    planner.plan_fft_inverse(n).process(&mut fa);
    fa.iter().take(out_len).map(|v| v.re / n as f64).collect()
}

/// Direct O(N·M) linear convolution.
pub(crate) fn direct_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(values: &[Complex64], x0: f64, dx: f64, y0: f64, dy: f64, s: f64) -> Vec<Complex64> {
        (0..values.len())
            .map(|j| {
                let y = y0 + j as f64 * dy;
                values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * Complex64::from_polar(1.0, s * (x0 + k as f64 * dx) * y))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn offset_dft_matches_naive_sum() {
        let n = 64;
        let dx = 0.37;
        let dy = TAU / (n as f64 * dx);
        let v: Vec<Complex64> = (0..n).map(|k| Complex64::new((k as f64 * 0.3).sin(), 0.1 * k as f64)).collect();
        for (sign, s) in [(Sign::Negative, -1.0), (Sign::Positive, 1.0)] {
            let fast = offset_dft(&v, -11.84, dx, -5.3 * dy * 6.0, dy, sign);
            let slow = naive(&v, -11.84, dx, -5.3 * dy * 6.0, dy, s);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn fft_and_direct_convolution_agree() {
        let a: Vec<f64> = (0..300).map(|i| ((i as f64) * 0.05).cos().abs()).collect();
        let b: Vec<f64> = (0..77).map(|i| (-(i as f64) / 9.0).exp()).collect();
        let f = linear_convolution(&a, &b);
        let d = direct_convolution(&a, &b);
        assert_eq!(f.len(), d.len());
        for (x, y) in f.iter().zip(&d) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
