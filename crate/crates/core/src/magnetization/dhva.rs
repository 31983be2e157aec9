use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::MagnetizationSweep;
use crate::error::{Error, Result};

/// Smallest sweep accepted by [`dhva_extract`].
pub const MIN_POINTS: usize = 64;

const UNIFORM_TOLERANCE: f64 = 1e-9;
const PEAK_FLOOR: f64 = 1e-3;
const MAX_PEAKS: usize = 16;

/// Oscillation frequencies in the 1/b variable, strongest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DhvaSpectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub detrend_order: usize,
}

impl DhvaSpectrum {
    pub fn dominant(&self) -> Option<f64> {
        self.frequencies.first().copied()
    }
}

/// Peaks of M as a function of 1/b.
pub fn dhva_extract(sweep: &MagnetizationSweep, detrend_order: usize) -> Result<DhvaSpectrum> {
    spectral_peaks(&sweep.inv_b, &sweep.m_values, detrend_order)
}

/// Detrend, Hann-window and Fourier-transform `values` sampled at the
/// uniformly spaced abscissae `u`, then locate spectral peaks with
/// three-point parabolic interpolation.
///
/// Amplitudes are those of the equivalent pure sinusoid.
pub fn spectral_peaks(u: &[f64], values: &[f64], detrend_order: usize) -> Result<DhvaSpectrum> {
    if u.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "{} abscissae but {} values",
            u.len(),
            values.len()
        )));
    }
    let n = u.len();
    if n < MIN_POINTS {
        return Err(Error::TooFewPoints {
            required: MIN_POINTS,
            got: n,
        });
    }
    if detrend_order > 10 {
        return Err(Error::InvalidArgument(format!(
            "detrend order {detrend_order} above 10"
        )));
    }
    let mut pairs: Vec<(f64, f64)> = u.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let step = (pairs[n - 1].0 - pairs[0].0) / (n - 1) as f64;
    let deviation = pairs
        .windows(2)
        .map(|w| ((w[1].0 - w[0].0 - step) / step).abs())
        .fold(0.0, f64::max);
    if !(step > 0.0) || !(deviation <= UNIFORM_TOLERANCE) {
        return Err(Error::NonUniformGrid(deviation));
    }

    let residual = detrend(&pairs, detrend_order);
    let mut buffer: Vec<Complex<f64>> = residual
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos();
            Complex::new(r * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let mag: Vec<f64> = buffer[..=n / 2].iter().map(|c| c.norm()).collect();

    let mut peaks = Vec::new();
    for k in 1..mag.len() - 1 {
        let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
        if b > a && b >= c {
            let denom = a - 2.0 * b + c;
            let delta = if denom != 0.0 {
                0.5 * (a - c) / denom
            } else {
                0.0
            };
            let height = b - 0.25 * (a - c) * delta;
            let freq = (k as f64 + delta) / (n as f64 * step);
            peaks.push((freq, 4.0 * height / n as f64));
        }
    }
    peaks.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.total_cmp(&y.0)));
    let top = peaks.first().map_or(0.0, |p| p.1);
    peaks.retain(|p| p.1 >= PEAK_FLOOR * top && p.1 > 0.0 && p.0 > 0.0);
    peaks.truncate(MAX_PEAKS);
    Ok(DhvaSpectrum {
        frequencies: peaks.iter().map(|p| p.0).collect(),
        amplitudes: peaks.iter().map(|p| p.1).collect(),
        detrend_order,
    })
}

/// Residual after a least-squares polynomial fit in a centred, scaled
/// variable.
fn detrend(pairs: &[(f64, f64)], order: usize) -> Vec<f64> {
    let n = pairs.len();
    let (lo, hi) = (pairs[0].0, pairs[n - 1].0);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let design = DMatrix::from_fn(n, order + 1, |i, j| {
        ((pairs[i].0 - mid) / half).powi(j as i32)
    });
    let y = DVector::from_iterator(n, pairs.iter().map(|p| p.1));
    let coeffs = design
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(order + 1));
    let fit = &design * coeffs;
    y.iter().zip(fit.iter()).map(|(a, b)| a - b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn single_tone() {
        let u = grid(256);
        let v: Vec<f64> = u.iter().map(|x| (2.0 * PI * 5.0 * x).sin()).collect();
        let s = spectral_peaks(&u, &v, 2).unwrap();
        assert!((s.frequencies[0] / 5.0 - 1.0).abs() < 0.005);
    }

    #[test]
    fn two_tones_by_amplitude() {
        let u = grid(256);
        let v: Vec<f64> = u
            .iter()
            .map(|x| (2.0 * PI * 5.0 * x).sin() + 0.3 * (2.0 * PI * 11.0 * x).sin())
            .collect();
        let s = spectral_peaks(&u, &v, 0).unwrap();
        assert!((s.frequencies[0] - 5.0).abs() < 0.05);
        assert!((s.frequencies[1] - 11.0).abs() < 0.05);
        assert!((s.amplitudes[1] / s.amplitudes[0] - 0.3).abs() < 0.02);
    }

    #[test]
    fn amplitude_is_linear() {
        let u = grid(200);
        let v: Vec<f64> = u
            .iter()
            .map(|x| (2.0 * PI * 7.3 * x).cos() + x * x)
            .collect();
        let a = spectral_peaks(&u, &v, 2).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| -3.5 * x).collect();
        let b = spectral_peaks(&u, &scaled, 2).unwrap();
        assert_eq!(a.frequencies.len(), b.frequencies.len());
        for i in 0..a.frequencies.len() {
            assert!((a.frequencies[i] - b.frequencies[i]).abs() < 1e-9 * a.frequencies[i]);
            assert!((b.amplitudes[i] / a.amplitudes[i] - 3.5).abs() < 1e-9);
        }
    }

    #[test]
    fn descending_abscissae_are_accepted() {
        let mut u = grid(128);
        u.reverse();
        let v: Vec<f64> = u.iter().map(|x| (2.0 * PI * 9.0 * x).sin()).collect();
        let s = spectral_peaks(&u, &v, 1).unwrap();
        assert!((s.frequencies[0] / 9.0 - 1.0).abs() < 0.005);
    }

    #[test]
    fn input_checks() {
        let u = grid(63);
        assert!(matches!(
            spectral_peaks(&u, &u, 2),
            Err(Error::TooFewPoints {
                required: 64,
                got: 63
            })
        ));
        let u: Vec<f64> = (0..100).map(|i| 1.0 / (80.0 + i as f64)).collect();
        assert!(matches!(
            spectral_peaks(&u, &u, 2),
            Err(Error::NonUniformGrid(_))
        ));
    }
}
