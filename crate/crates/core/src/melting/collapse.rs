use serde::{Deserialize, Serialize};

use super::{fit_rate_power_law, fit_relaxation, RatePowerLaw, RelaxationOptions};
use crate::error::{Error, Result};

/// One `R(x)` curve at a fixed value `param` of the other variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub param: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledCurve {
    pub param: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseOptions {
    /// Reference scaling parameter; the smallest `aleph_j` if unset.
    pub aleph0: Option<f64>,
    /// Reference time; the earliest `t_j` if unset.
    pub t0: Option<f64>,
    pub time_fit: RelaxationOptions,
    pub aleph_fit: RelaxationOptions,
    /// Resampling points per pairwise distance.
    pub quality_points: usize,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            aleph0: None,
            t0: None,
            time_fit: RelaxationOptions::time(),
            aleph_fit: RelaxationOptions::inverse_aleph(),
            quality_points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseResult {
    /// Magnitude of the time-direction exponent, `delta_t ~ aleph^(-d1)`.
    pub d1: f64,
    /// Signed exponent of `delta_t(aleph) = c1 aleph^d1_signed`.
    pub d1_signed: f64,
    /// Exponent of `delta_(1/aleph)(t) = c2 t^d2`.
    pub d2: f64,
    pub c1: f64,
    pub c2: f64,
    pub time_law: RatePowerLaw,
    pub aleph_law: RatePowerLaw,
    /// `t = alpha aleph^beta` with `alpha = (c1/c2)^(1/d2)`, `beta = d1_signed / d2`.
    pub alpha: f64,
    pub beta: f64,
    /// `t' -> k1 t'^k2` with `k1 = (c1/c2)^(d2/d1 - 1) t0^d2 / aleph0^d1`, `k2 = -d2/d1`
    /// (signed `d1`).
    pub k1: f64,
    pub k2: f64,
    pub aleph0: f64,
    pub t0: f64,
    /// Relaxation rate along `t` for each `aleph_j`.
    pub time_rates: Vec<(f64, f64)>,
    /// Relaxation rate along `1/aleph` for each `t_j`.
    pub aleph_rates: Vec<(f64, f64)>,
    /// Mean pairwise L2 distance after rescaling.
    pub quality: f64,
    /// The same metric on the raw axes, if the raw curves overlap.
    pub quality_unrescaled: Option<f64>,
    /// `R(aleph_j, t')`.
    pub time_curves: Vec<RescaledCurve>,
    /// `R(aleph', t_j)` against `1/aleph'`.
    pub aleph_curves: Vec<RescaledCurve>,
    /// Time curves after the second rescaling `k1 t'^k2`.
    pub universal_curves: Vec<RescaledCurve>,
}

fn interp(x: &[f64], y: &[f64], at: f64) -> f64 {
    let k = x.partition_point(|v| *v < at);
    if k == 0 {
        return y[0];
    }
    if k >= x.len() {
        return y[x.len() - 1];
    }
    let (x0, x1) = (x[k - 1], x[k]);
    if x1 == x0 {
        return y[k];
    }
    y[k - 1] + (y[k] - y[k - 1]) * (at - x0) / (x1 - x0)
}

fn sorted(x: Vec<f64>, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|a, b| x[*a].total_cmp(&x[*b]));
    (idx.iter().map(|&i| x[i]).collect(), idx.iter().map(|&i| y[i]).collect())
}

/// Mean pairwise RMS distance of the curves on their common support.
fn family_distance(curves: &[RescaledCurve], n_points: usize) -> Result<f64> {
    let lo = curves.iter().map(|c| c.x[0]).fold(f64::NEG_INFINITY, f64::max);
    let hi = curves.iter().map(|c| c.x[c.x.len() - 1]).fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        let supports: Vec<String> =
            curves.iter().map(|c| format!("{}: [{:.4e}, {:.4e}]", c.param, c.x[0], c.x[c.x.len() - 1])).collect();
        return Err(Error::NoOverlap(supports.join(", ")));
    }
    let grid: Vec<f64> = (0..n_points).map(|i| lo + (hi - lo) * i as f64 / (n_points - 1) as f64).collect();
    let sampled: Vec<Vec<f64>> = curves.iter().map(|c| grid.iter().map(|g| interp(&c.x, &c.y, *g)).collect()).collect();
    let (mut total, mut pairs) = (0.0, 0);
    for i in 0..sampled.len() {
        for j in i + 1..sampled.len() {
            let ms = sampled[i].iter().zip(&sampled[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n_points as f64;
            total += ms.sqrt();
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

fn rescale(curves: &[Curve], factor: impl Fn(f64) -> f64) -> Vec<RescaledCurve> {
    curves
        .iter()
        .map(|c| {
            let f = factor(c.param);
            let (x, y) = sorted(c.x.iter().map(|v| v * f).collect(), &c.y);
            RescaledCurve { param: c.param, x, y }
        })
        .collect()
}

fn rescaled_families(
    time_curves: &[Curve],
    aleph_curves: &[Curve],
    d1_signed: f64,
    d2: f64,
    aleph0: f64,
    t0: f64,
) -> (Vec<RescaledCurve>, Vec<RescaledCurve>) {
    (rescale(time_curves, |a| (a / aleph0).powf(d1_signed)), rescale(aleph_curves, |t| (t / t0).powf(d2)))
}

/// Average of the two families' mean pairwise distances after rescaling
/// with the given exponents.
pub fn collapse_quality(
    time_curves: &[Curve],
    aleph_curves: &[Curve],
    d1_signed: f64,
    d2: f64,
    aleph0: f64,
    t0: f64,
    n_points: usize,
) -> Result<f64> {
    let (tc, ac) = rescaled_families(time_curves, aleph_curves, d1_signed, d2, aleph0, t0);
    Ok(0.5 * (family_distance(&tc, n_points)? + family_distance(&ac, n_points)?))
}

fn check_family(curves: &[Curve], what: &str) -> Result<()> {
    if curves.len() < 3 {
        return Err(Error::TooShort { needed: 3, got: curves.len() });
    }
    for c in curves {
        if c.x.len() != c.y.len() || c.x.len() < 2 {
            return Err(Error::GridMismatch(format!("{what} curve at {} is malformed", c.param)));
        }
        if !(c.param > 0.0) {
            return Err(Error::Domain(format!("{what} curve parameter must be positive, got {}", c.param)));
        }
    }
    Ok(())
}

/// Fits relaxation rates along both directions, their power laws, and
/// rescales the curves onto common axes.
///
/// `time_curves` hold `R(t)` at fixed `aleph_j` (`param = aleph_j`);
/// `aleph_curves` hold `R(1/aleph)` at fixed `t_j` (`param = t_j`, `x = 1/aleph`).
pub fn collapse(time_curves: &[Curve], aleph_curves: &[Curve], opts: &CollapseOptions) -> Result<CollapseResult> {
    check_family(time_curves, "time")?;
    check_family(aleph_curves, "aleph")?;
    let mut time_rates = Vec::new();
    for c in time_curves {
        time_rates.push((c.param, fit_relaxation(&c.x, &c.y, &opts.time_fit)?.delta));
    }
    let mut aleph_rates = Vec::new();
    for c in aleph_curves {
        aleph_rates.push((c.param, fit_relaxation(&c.x, &c.y, &opts.aleph_fit)?.delta));
    }
    let (ax, ay): (Vec<f64>, Vec<f64>) = time_rates.iter().cloned().unzip();
    let time_law = fit_rate_power_law(&ax, &ay)?;
    let (tx, ty): (Vec<f64>, Vec<f64>) = aleph_rates.iter().cloned().unzip();
    let aleph_law = fit_rate_power_law(&tx, &ty)?;

    let (c1, d1s) = (time_law.c, time_law.d);
    let (c2, d2) = (aleph_law.c, aleph_law.d);
    let aleph0 = opts.aleph0.unwrap_or_else(|| ax.iter().cloned().fold(f64::INFINITY, f64::min));
    let t0 = opts.t0.unwrap_or_else(|| tx.iter().cloned().fold(f64::INFINITY, f64::min));

    let alpha = (c1 / c2).powf(1.0 / d2);
    let beta = d1s / d2;
    let k1 = (c1 / c2).powf(d2 / d1s - 1.0) * t0.powf(d2) / aleph0.powf(d1s);
    let k2 = -d2 / d1s;

    let n_points = opts.quality_points.max(2);
    let (tc, ac) = rescaled_families(time_curves, aleph_curves, d1s, d2, aleph0, t0);
    let quality = 0.5 * (family_distance(&tc, n_points)? + family_distance(&ac, n_points)?);
    let quality_unrescaled = collapse_quality(time_curves, aleph_curves, 0.0, 0.0, aleph0, t0, n_points).ok();

    let universal = tc
        .iter()
        .map(|c| {
            let (x, y): (Vec<f64>, Vec<f64>) =
                c.x.iter().zip(&c.y).filter(|(x, _)| **x > 0.0).map(|(x, y)| (k1 * x.powf(k2), *y)).unzip();
            let (x, y) = sorted(x, &y);
            RescaledCurve { param: c.param, x, y }
        })
        .collect();

    Ok(CollapseResult {
        d1: d1s.abs(),
        d1_signed: d1s,
        d2,
        c1,
        c2,
        time_law,
        aleph_law,
        alpha,
        beta,
        k1,
        k2,
        aleph0,
        t0,
        time_rates,
        aleph_rates,
        quality,
        quality_unrescaled,
        time_curves: tc,
        aleph_curves: ac,
        universal_curves: universal,
    })
}
