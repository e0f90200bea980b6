//! Windows, FFT helpers and peak picking shared by the spectral estimators.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowShape {
    Rectangular,
    /// Raised cosine.
    #[default]
    Hann,
    /// Four-term Blackman-Harris, sidelobes below -92 dB.
    BlackmanHarris,
}

impl WindowShape {
    /// Window coefficients of length `n` (periodic-free, symmetric form).
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![1.0; n];
        }
        let m = (n - 1) as f64;
        (0..n)
            .map(|i| {
                let x = 2.0 * PI * i as f64 / m;
                match self {
                    WindowShape::Rectangular => 1.0,
                    WindowShape::Hann => 0.5 - 0.5 * x.cos(),
                    WindowShape::BlackmanHarris => {
                        0.35875 - 0.48829 * x.cos() + 0.14128 * (2.0 * x).cos() - 0.01168 * (3.0 * x).cos()
                    }
                }
            })
            .collect()
    }
}

/// Forward DFT `X_k = sum_n x_n exp(-2 pi i k n / N)`, in place.
pub fn fft_forward(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// Angular frequency of FFT bin `k` for sample spacing `dt`, mapped to
/// `[-pi/dt, pi/dt)`.
pub fn bin_frequency(k: usize, n: usize, dt: f64) -> f64 {
    let k = if k >= n.div_ceil(2) { k as f64 - n as f64 } else { k as f64 };
    2.0 * PI * k / (n as f64 * dt)
}

/// A spectral peak located with sub-bin accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub frequency: f64,
    pub magnitude: f64,
    /// Index of the grid sample closest to the peak.
    pub index: usize,
}

/// Local maxima of `mag` above `rel_floor * max(mag)`, refined by a parabola
/// through the three neighbouring samples. `freq` must be uniform.
///
/// Returned in descending magnitude order.
pub fn find_peaks(freq: &[f64], mag: &[f64], rel_floor: f64) -> Vec<Peak> {
    let n = mag.len();
    if n < 3 {
        return Vec::new();
    }
    let max = mag.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = rel_floor * max;
    let step = freq[1] - freq[0];
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        let (l, c, r) = (mag[i - 1], mag[i], mag[i + 1]);
        if c >= floor && c > l && c >= r {
            let denom = l - 2.0 * c + r;
            let shift = if denom.abs() > 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            let shift = shift.clamp(-0.5, 0.5);
            peaks.push(Peak { frequency: freq[i] + shift * step, magnitude: c - 0.25 * (l - r) * shift, index: i });
        }
    }
    peaks.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    peaks
}

/// Trapezoidal integral of `y` on a uniform grid with spacing `dx`.
pub fn trapz(y: &[f64], dx: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => dx * (y.iter().sum::<f64>() - 0.5 * (y[0] + y[n - 1])),
    }
}
