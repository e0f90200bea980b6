//! Dephasing of the mode-1 phase-space angle: circular variance, its
//! period average, relaxation fits and the two-parameter scaling collapse.

mod collapse;

pub use collapse::{collapse, collapse_quality, CollapseOptions, CollapseResult, Curve, RescaledCurve};

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_log_log, fit_saturation};
use crate::signal::{find_peaks, WindowShape};
use crate::twa::Ensemble;

/// Point about which trajectory angles are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    #[default]
    Origin,
    /// Ensemble mean of `alpha_1` at the same time.
    Centroid,
}

/// Angles `theta_n` in `(-pi, pi]` of every surviving trajectory at sample `index`.
pub fn phase_samples(ensemble: &Ensemble, index: usize, centering: Centering) -> Result<Vec<f64>> {
    let states = ensemble.states_at(index).ok_or_else(|| {
        Error::Unavailable(format!("no stored states at sample {index}; add a snapshot or store trajectories"))
    })?;
    let center = match centering {
        Centering::Origin => Complex64::new(0.0, 0.0),
        Centering::Centroid => ensemble.reductions.sum_alpha[0][index] / ensemble.reductions.count as f64,
    };
    Ok(states
        .iter()
        .map(|s| {
            let th = (s.alpha[0] - center).arg();
            if th <= -PI {
                th + TAU
            } else {
                th
            }
        })
        .collect())
}

/// `R = 1 - |mean(exp(i theta))|`, clamped to `[0, 1]` against rounding.
/// Angles are taken relative to the first one, so identical phases give
/// exactly zero.
pub fn circular_variance_of(thetas: &[f64]) -> Result<f64> {
    if thetas.is_empty() {
        return Err(Error::Empty("phase sample".into()));
    }
    let t0 = thetas[0];
    let m: Complex64 = thetas.iter().map(|t| Complex64::from_polar(1.0, *t - t0)).sum();
    Ok((1.0 - m.norm() / thetas.len() as f64).clamp(0.0, 1.0))
}

/// Circular variance of the ensemble at sample `index`.
pub fn circular_variance(ensemble: &Ensemble, index: usize, centering: Centering) -> Result<f64> {
    let n = ensemble.alive();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    match centering {
        Centering::Origin => {
            let m = ensemble.reductions.sum_phasor[index].norm() / n as f64;
            Ok((1.0 - m).clamp(0.0, 1.0))
        }
        Centering::Centroid => circular_variance_of(&phase_samples(ensemble, index, centering)?),
    }
}

/// `R(t)` at every sample time. Origin centering uses the streamed phasor
/// sums; centroid centering needs stored trajectories.
pub fn circular_variance_series(ensemble: &Ensemble, centering: Centering) -> Result<Vec<f64>> {
    (0..ensemble.times.len()).map(|i| circular_variance(ensemble, i, centering)).collect()
}

/// Argument of the mean unit phasor about the origin at every sample time.
pub fn mean_angle_series(ensemble: &Ensemble) -> Vec<f64> {
    ensemble.reductions.sum_phasor.iter().map(|z| z.arg()).collect()
}

/// Nearest-branch continuation of a wrapped angle series.
pub fn unwrap(angles: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(angles.len());
    let mut offset = 0.0;
    for (i, &a) in angles.iter().enumerate() {
        if i > 0 {
            let d = a + offset - out[i - 1];
            offset -= TAU * (d / TAU).round();
        }
        out.push(a + offset);
    }
    out
}

/// Oscillation period of a mean-angle series on a uniform grid.
///
/// The angle is unwrapped and the dominant non-zero frequency of its unit
/// phasor is located, which covers both a steadily rotating mean angle and
/// an angle oscillating about a fixed direction.
pub fn estimate_period(times: &[f64], angles: &[f64]) -> Result<f64> {
    let n = angles.len();
    if n != times.len() || n < 8 {
        return Err(Error::TooShort { needed: 8, got: n.min(times.len()) });
    }
    let dt = times[1] - times[0];
    let theta = unwrap(angles);
    let mut z: Vec<Complex64> = theta.iter().map(|t| Complex64::from_polar(1.0, *t)).collect();
    let mean = z.iter().sum::<Complex64>() / n as f64;
    for v in &mut z {
        *v -= mean;
    }
    if z.iter().all(|v| v.norm() < 1e-9) {
        return Err(Error::NoPeak);
    }
    let w = WindowShape::Hann.coefficients(n);
    let n_fft = (8 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for i in 0..n {
        buf[i] = z[i] * w[i];
    }
    crate::signal::fft_forward(&mut buf);
    let mut bins: Vec<(f64, f64)> =
        (0..n_fft).map(|k| (crate::signal::bin_frequency(k, n_fft, dt), buf[k].norm())).collect();
    bins.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (freq, mag): (Vec<f64>, Vec<f64>) = bins.into_iter().unzip();
    // Resolution of the record; anything slower is leakage from the mean.
    let resolution = TAU / (times[n - 1] - times[0]);
    let peak = find_peaks(&freq, &mag, 1e-3)
        .into_iter()
        .find(|p| p.frequency.abs() >= 2.0 * resolution)
        .ok_or(Error::NoPeak)?;
    let period = TAU / peak.frequency.abs();
    let span = times[n - 1] - times[0];
    if span < 3.0 * period {
        return Err(Error::TooShort { needed: (3.0 * period / dt).ceil() as usize, got: n });
    }
    Ok(period)
}

/// Sliding one-period mean `(1/T) int_{t-T/2}^{t+T/2} R` of the linear
/// interpolant of `r`. Returns the sample times whose window fits inside
/// the record, with the averaged values; empty if none fits.
pub fn period_average(times: &[f64], r: &[f64], period: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if times.len() != r.len() {
        return Err(Error::GridMismatch("times and values differ in length".into()));
    }
    if !(period >= 0.0) || !period.is_finite() {
        return Err(Error::Domain(format!("period must be >= 0, got {period}")));
    }
    let n = r.len();
    if n < 2 || period < 1e-12 * (times[n - 1] - times[0]).abs().max(1e-300) {
        return Ok((times.to_vec(), r.to_vec()));
    }
    let dt = times[1] - times[0];
    let mut cum = vec![0.0; n];
    for i in 1..n {
        cum[i] = cum[i - 1] + 0.5 * dt * (r[i - 1] + r[i]);
    }
    // Integral of the interpolant from times[0] to t.
    let integral = |t: f64| {
        let u = (t - times[0]) / dt;
        let k = (u.floor() as usize).min(n - 2);
        let s = (u - k as f64) * dt;
        cum[k] + s * r[k] + 0.5 * s * s / dt * (r[k + 1] - r[k])
    };
    let half = 0.5 * period;
    let eps = 1e-9 * dt;
    let (mut t_out, mut r_out) = (Vec::new(), Vec::new());
    for &t in times {
        if t - half >= times[0] - eps && t + half <= times[n - 1] + eps {
            let lo = (t - half).max(times[0]);
            let hi = (t + half).min(times[n - 1]);
            t_out.push(t);
            r_out.push((integral(hi) - integral(lo)) / period);
        }
    }
    Ok((t_out, r_out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationOptions {
    /// Points with `x` below this are transient and excluded.
    pub x_min: f64,
    /// Points above this value are saturated and excluded.
    pub max_value: f64,
    pub min_points: usize,
}

impl RelaxationOptions {
    /// Defaults for fits along time.
    pub fn time() -> Self {
        Self { x_min: 20.0, max_value: 0.95, min_points: 5 }
    }

    /// Defaults for fits along `1/aleph`, which has one point per run.
    pub fn inverse_aleph() -> Self {
        Self { x_min: 0.0, max_value: 0.95, min_points: 3 }
    }
}

/// `R(x) = 1 - exp(-delta x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationFit {
    pub delta: f64,
    pub delta_err: Option<f64>,
    pub n_points: usize,
    pub residual_ss: f64,
    /// The data decrease by more than three residual standard deviations
    /// somewhere inside the fit window.
    pub non_monotone: bool,
}

pub fn fit_relaxation(x: &[f64], r: &[f64], opts: &RelaxationOptions) -> Result<RelaxationFit> {
    if x.len() != r.len() {
        return Err(Error::GridMismatch("x and values differ in length".into()));
    }
    if let Some(v) = r.iter().find(|v| !(-1e-12..=1.0 + 1e-12).contains(*v)) {
        return Err(Error::Domain(format!("period-averaged variance must lie in [0, 1], got {v}")));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        x.iter().zip(r).filter(|(a, b)| **a >= opts.x_min && **b <= opts.max_value).map(|(a, b)| (*a, *b)).unzip();
    if xs.len() < opts.min_points {
        return Err(Error::TooShort { needed: opts.min_points, got: xs.len() });
    }
    let f = fit_saturation(&xs, &ys)?;
    let sigma = (f.residual_ss / (xs.len() as f64 - 1.0)).sqrt();
    let drop = ys.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    Ok(RelaxationFit {
        delta: f.rate,
        delta_err: f.rate_err,
        n_points: xs.len(),
        residual_ss: f.residual_ss,
        non_monotone: drop > 3.0 * sigma && drop > 1e-12,
    })
}

/// `delta(x) = c x^d`; `d` carries its sign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePowerLaw {
    pub c: f64,
    pub d: f64,
    pub c_err: Option<f64>,
    pub d_err: Option<f64>,
    pub n_points: usize,
}

pub fn fit_rate_power_law(x: &[f64], delta: &[f64]) -> Result<RatePowerLaw> {
    let f = fit_log_log(x, delta)?;
    Ok(RatePowerLaw { c: f.prefactor, d: f.slope, c_err: f.prefactor_err, d_err: f.slope_err, n_points: f.n_points })
}
