//! Least-squares helpers: straight lines, log-log power laws and the
//! one-parameter saturating exponential `1 - exp(-delta x)`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard errors from the regression covariance; `None` when there are
    /// no residual degrees of freedom.
    pub slope_err: Option<f64>,
    pub intercept_err: Option<f64>,
    pub residual_ss: f64,
    pub n_points: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_ss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let (slope_err, intercept_err) = if n > 2 {
        let s2 = residual_ss / (nf - 2.0);
        let sx2: f64 = x.iter().map(|v| v * v).sum();
        (Some((s2 / sxx).sqrt()), Some((s2 * sx2 / (nf * sxx)).sqrt()))
    } else {
        (None, None)
    };
    Ok(LineFit { slope, intercept, slope_err, intercept_err, residual_ss, n_points: n })
}

/// Power law `y = prefactor * x^slope`, fitted as a line in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub prefactor: f64,
    pub slope_err: Option<f64>,
    pub prefactor_err: Option<f64>,
    pub residual_ss: f64,
    pub n_points: usize,
}

pub fn fit_log_log(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if let Some(v) = x.iter().chain(y).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("power-law fit needs positive finite data, got {v}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let line = fit_line(&lx, &ly)?;
    let prefactor = line.intercept.exp();
    Ok(LogLogFit {
        slope: line.slope,
        prefactor,
        slope_err: line.slope_err,
        prefactor_err: line.intercept_err.map(|e| e * prefactor),
        residual_ss: line.residual_ss,
        n_points: line.n_points,
    })
}

/// Fit of `y = 1 - exp(-rate * x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationFit {
    pub rate: f64,
    pub rate_err: Option<f64>,
    pub residual_ss: f64,
    pub iterations: usize,
}

fn saturation_ss(x: &[f64], y: &[f64], rate: f64) -> f64 {
    x.iter().zip(y).map(|(a, b)| (b - 1.0 + (-rate * a).exp()).powi(2)).sum()
}

/// Gauss-Newton with step halving, started from the linearised estimate
/// `-ln(1 - y) = rate * x`.
pub fn fit_saturation(x: &[f64], y: &[f64]) -> Result<SaturationFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        if *b < 1.0 {
            num += a * (-(1.0 - b).ln());
            den += a * a;
        }
    }
    let mut rate = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
    let mut ss = saturation_ss(x, y, rate);
    let mut iterations = 0;
    for it in 0..200 {
        iterations = it + 1;
        let (mut jr, mut jj) = (0.0, 0.0);
        for (a, b) in x.iter().zip(y) {
            let e = (-rate * a).exp();
            let r = b - 1.0 + e;
            let j = -a * e;
            jr += j * r;
            jj += j * j;
        }
        if jj <= 0.0 || jr == 0.0 {
            break;
        }
        let mut step = -jr / jj;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = rate + step;
            let tss = saturation_ss(x, y, trial);
            if tss <= ss {
                let converged = (trial - rate).abs() <= 1e-15 * rate.abs().max(1e-300);
                rate = trial;
                ss = tss;
                accepted = !converged;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let n = x.len();
    let jj: f64 = x.iter().map(|a| (a * (-rate * a).exp()).powi(2)).sum();
    let rate_err = (n > 1 && jj > 0.0).then(|| (ss / (n as f64 - 1.0) / jj).sqrt());
    Ok(SaturationFit { rate, rate_err, residual_ss: ss, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 - 0.75 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.75).abs() < 1e-14);
        assert!((f.intercept - 2.5).abs() < 1e-14);
        assert!(f.slope_err.unwrap() < 1e-12);
    }

    #[test]
    fn two_points_have_no_uncertainty() {
        let f = fit_log_log(&[1.0, 10.0], &[3.0, 30.0]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-14);
        assert!(f.residual_ss < 1e-28);
        assert!(f.slope_err.is_none());
    }

    #[test]
    fn rejects_non_positive() {
        assert!(fit_log_log(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(fit_log_log(&[-1.0, 2.0, 3.0], &[1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn saturation_exact_and_zero() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 * 5.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - (-0.02 * v).exp()).collect();
        let f = fit_saturation(&x, &y).unwrap();
        assert!((f.rate - 0.02).abs() < 1e-14, "{}", f.rate);
        let z = vec![0.0; x.len()];
        assert_eq!(fit_saturation(&x, &z).unwrap().rate, 0.0);
    }

    #[test]
    fn saturation_with_noise_recovers_rate() {
        let x: Vec<f64> = (1..60).map(|i| i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| 1.0 - (-0.05 * v).exp() + 1e-3 * ((i * 7919) % 13) as f64 / 13.0 - 5e-4)
            .collect();
        let f = fit_saturation(&x, &y).unwrap();
        assert!((f.rate - 0.05).abs() < 2e-3);
        assert!(f.rate_err.unwrap() > 0.0);
    }
}
