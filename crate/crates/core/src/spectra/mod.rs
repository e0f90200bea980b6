//! Two-time correlations, windowed emission spectrograms and gap extraction.
//!
//! The spectrogram of a correlation `C(tau)` is
//!
//! ```text
//! S(t, W) = 2 | sum_tau w(t - tau) C(tau) exp(-i W tau) dtau |
//! ```
//!
//! with the window centred on the frame time `t`. The kernel sign makes a
//! correlation `exp(+i nu tau)` peak at `W = +nu`; for the cavity fields,
//! which rotate as `exp(-i nu t)`, `<alpha*(t0 + tau) alpha(t0)>` carries
//! `exp(+i nu tau)`, so emission lines appear at positive `W`.

mod tracks;

pub use tracks::{
    extract_gaps, fit_power_law, track_peaks, GapEstimate, GapOptions, PeakTrack, PeakTracks, PowerLawFit,
};

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::WindowShape;
use crate::twa::Ensemble;

/// Correlation reference times below this are treated as transient.
pub const TRANSIENT_FLOOR: f64 = 20.0;

/// `<alpha1*(t0 + tau) alpha1(t0)>` on a uniform lag grid (rescaled fields).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSeries {
    pub t0: f64,
    pub taus: Vec<f64>,
    pub values: Vec<Complex64>,
    pub n_traj: usize,
}

impl CorrelationSeries {
    /// Builds a series from samples `values[i] = C(i * dtau)`.
    pub fn uniform(t0: f64, dtau: f64, values: Vec<Complex64>, n_traj: usize) -> Self {
        let taus = (0..values.len()).map(|i| i as f64 * dtau).collect();
        Self { t0, taus, values, n_traj }
    }

    pub fn dtau(&self) -> Result<f64> {
        if self.taus.len() < 2 {
            return Err(Error::TooShort { needed: 2, got: self.taus.len() });
        }
        let d = self.taus[1] - self.taus[0];
        let uniform = self.taus.windows(2).all(|w| ((w[1] - w[0]) - d).abs() <= 1e-9 * d.abs().max(1.0));
        if !(d > 0.0) || !uniform {
            return Err(Error::GridMismatch("lag grid must be uniform and increasing".into()));
        }
        Ok(d)
    }
}

/// Every lag available in the ensemble for reference time `t0`.
pub fn available_lags(ensemble: &Ensemble, t0: f64) -> Vec<f64> {
    let i0 = ensemble.sample_index(t0);
    let dt = ensemble.config.sample_dt();
    (0..ensemble.times.len() - i0).map(|k| k as f64 * dt).collect()
}

/// Trajectory-averaged `<alpha1*(t0 + tau) alpha1(t0)>` at the requested
/// lags, which must lie on the sample grid.
///
/// Uses the streamed taps when `t0` matches the configured correlation
/// reference, otherwise stored trajectories.
pub fn two_time_correlation(ensemble: &Ensemble, t0: f64, taus: &[f64]) -> Result<CorrelationSeries> {
    let n = ensemble.alive();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    if t0 < TRANSIENT_FLOOR {
        warn!("correlation reference t0 = {t0} lies inside the transient (< {TRANSIENT_FLOOR})");
    }
    let dt = ensemble.config.sample_dt();
    let i0 = ensemble.sample_index(t0);
    if ((i0 as f64 * dt) - t0).abs() > 1e-9 * dt.max(t0) {
        return Err(Error::GridMismatch(format!("t0 = {t0} is not a sample time")));
    }
    let mut lags = Vec::with_capacity(taus.len());
    for &tau in taus {
        let k = (tau / dt).round();
        if k < 0.0 || (k * dt - tau).abs() > 1e-9 * dt.max(tau) || i0 + k as usize >= ensemble.times.len() {
            return Err(Error::GridMismatch(format!("lag {tau} is not on the sample grid after t0")));
        }
        lags.push(k as usize);
    }
    let nf = n as f64;
    let values: Vec<Complex64> = if ensemble.correlation_t0_index == Some(i0) {
        lags.iter().map(|&k| ensemble.reductions.sum_correlation[i0 + k] / nf).collect()
    } else if let Some(tr) = &ensemble.trajectories {
        lags.iter()
            .map(|&k| tr.iter().map(|v| v[i0 + k].alpha[0].conj() * v[i0].alpha[0]).sum::<Complex64>() / nf)
            .collect()
    } else {
        return Err(Error::Unavailable(format!(
            "no correlation taps at t0 = {t0}; set correlation_t0 or store trajectories"
        )));
    };
    Ok(CorrelationSeries { t0: i0 as f64 * dt, taus: taus.to_vec(), values, n_traj: n })
}

/// Averages the correlation over several reference times (stored
/// trajectories only). Lags are the first `n_lags` sample offsets.
pub fn multi_reference_correlation(ensemble: &Ensemble, t0s: &[f64], n_lags: usize) -> Result<CorrelationSeries> {
    if t0s.is_empty() {
        return Err(Error::Empty("reference times".into()));
    }
    let dt = ensemble.config.sample_dt();
    let taus: Vec<f64> = (0..n_lags).map(|k| k as f64 * dt).collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); n_lags];
    let mut n_traj = 0;
    for &t0 in t0s {
        let c = two_time_correlation(ensemble, t0, &taus)?;
        n_traj = c.n_traj;
        for (a, v) in acc.iter_mut().zip(&c.values) {
            *a += v;
        }
    }
    let m = t0s.len() as f64;
    Ok(CorrelationSeries { t0: t0s[0], taus, values: acc.into_iter().map(|v| v / m).collect(), n_traj })
}

/// How each windowed transform is reduced to a real spectrum value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumValue {
    /// `2 |F|`: non-negative and insensitive to the frame phase.
    #[default]
    Modulus,
    /// `2 Re F`: linear in the correlation.
    RealPart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramOptions {
    pub window: WindowShape,
    /// Full window width in lag units.
    pub width: f64,
    /// Frame advance in lag units.
    pub hop: f64,
    /// FFT length is the next power of two above `pad * samples per window`.
    pub pad: usize,
    /// Optional band `[lo, hi]` of angular frequencies kept in the output.
    pub band: Option<(f64, f64)>,
    pub value: SpectrumValue,
}

impl Default for SpectrogramOptions {
    fn default() -> Self {
        Self {
            window: WindowShape::Hann,
            width: 20.0,
            hop: 1.0,
            pad: 8,
            band: Some((-3.0, 3.0)),
            value: SpectrumValue::Modulus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrogram {
    pub window: WindowShape,
    pub width: f64,
    pub hop: f64,
    pub value: SpectrumValue,
    /// Window centres.
    pub frame_times: Vec<f64>,
    /// Ascending angular frequencies.
    pub omegas: Vec<f64>,
    /// Row-major `[frame][omega]`.
    pub values: Vec<f64>,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.frame_times.len()
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        let n = self.omegas.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn bin_width(&self) -> f64 {
        if self.omegas.len() > 1 {
            self.omegas[1] - self.omegas[0]
        } else {
            0.0
        }
    }
}

/// Short-time transform of a correlation series.
pub fn spectrogram(corr: &CorrelationSeries, opts: &SpectrogramOptions) -> Result<Spectrogram> {
    let dtau = corr.dtau()?;
    if !(opts.width > 0.0) || !(opts.hop > 0.0) || opts.pad == 0 {
        return Err(Error::Domain("window width, hop and padding must be positive".into()));
    }
    let n_win = (opts.width / dtau).round() as usize + 1;
    if n_win < 3 || n_win > corr.values.len() {
        return Err(Error::TooShort { needed: n_win.max(3), got: corr.values.len() });
    }
    let hop = ((opts.hop / dtau).round() as usize).max(1);
    let n_frames = (corr.values.len() - n_win) / hop + 1;
    let n_fft = (n_win * opts.pad).next_power_of_two();
    let w = opts.window.coefficients(n_win);

    // FFT bins reordered to ascending frequency, restricted to the band.
    let order: Vec<(usize, f64)> = {
        let mut bins: Vec<(usize, f64)> = (0..n_fft)
            .map(|k| (k, crate::signal::bin_frequency(k, n_fft, dtau)))
            .filter(|(_, f)| opts.band.is_none_or(|(lo, hi)| *f >= lo && *f <= hi))
            .collect();
        bins.sort_by(|a, b| a.1.total_cmp(&b.1));
        bins
    };
    if order.len() < 3 {
        return Err(Error::Domain("frequency band holds fewer than three bins".into()));
    }
    let fft = FftPlanner::new().plan_fft_forward(n_fft);

    let rows: Vec<Vec<f64>> = (0..n_frames)
        .into_par_iter()
        .map(|f| {
            let start = f * hop;
            let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
            for j in 0..n_win {
                buf[j] = corr.values[start + j] * w[j];
            }
            fft.process(&mut buf);
            let tau_start = corr.taus[start];
            order
                .iter()
                .map(|&(k, om)| {
                    let v = buf[k] * Complex64::from_polar(2.0 * dtau, -om * tau_start);
                    match opts.value {
                        SpectrumValue::Modulus => v.norm(),
                        SpectrumValue::RealPart => v.re,
                    }
                })
                .collect()
        })
        .collect();

    let half = (n_win - 1) as f64 * dtau / 2.0;
    Ok(Spectrogram {
        window: opts.window,
        width: (n_win - 1) as f64 * dtau,
        hop: hop as f64 * dtau,
        value: opts.value,
        frame_times: (0..n_frames).map(|f| corr.taus[f * hop] + half).collect(),
        omegas: order.iter().map(|o| o.1).collect(),
        values: rows.concat(),
    })
}

/// Smallest window width resolving two tones `separation` apart (Hann main
/// lobe half-width `4 pi / W`).
pub fn min_resolving_width(separation: f64) -> f64 {
    4.0 * PI / separation.abs()
}
