use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{integrate_gpe, lyapunov_spectrum, FieldState, LyapunovOptions, LyapunovSpectrum, Trajectory};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::signal::{bin_frequency, fft_forward, find_peaks, Peak, WindowShape};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Samples with `t < transient` are discarded.
    pub transient: f64,
    pub window: WindowShape,
    /// Peaks below this fraction of the largest magnitude are ignored.
    pub rel_floor: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { transient: 50.0, window: WindowShape::BlackmanHarris, rel_floor: 1e-3 }
    }
}

/// Two-sided magnitude spectrum, frequencies ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSpectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub bin_width: f64,
    pub rel_floor: f64,
}

impl PowerSpectrum {
    pub fn peaks(&self) -> Vec<Peak> {
        find_peaks(&self.frequencies, &self.magnitudes, self.rel_floor)
    }

    /// Copy scaled to unit maximum.
    pub fn normalized(&self) -> PowerSpectrum {
        let max = self.magnitudes.iter().cloned().fold(0.0, f64::max);
        let scale = if max > 0.0 { 1.0 / max } else { 1.0 };
        PowerSpectrum { magnitudes: self.magnitudes.iter().map(|m| m * scale).collect(), ..self.clone() }
    }
}

/// Windowed DFT magnitude of `alpha_mode(t)` (mode is 1 or 2) after the
/// transient, normalised by the window sum so a pure tone of amplitude `A`
/// peaks near `A`. The sign convention is `exp(-i Omega t)`, so
/// `exp(i 2.3 t)` peaks at `Omega = +2.3`.
pub fn power_spectrum(traj: &Trajectory, mode: usize, opts: &SpectrumOptions) -> Result<PowerSpectrum> {
    if !(1..=2).contains(&mode) {
        return Err(Error::Domain(format!("mode must be 1 or 2, got {mode}")));
    }
    let tail = traj.after(opts.transient);
    let n = tail.len();
    if n < 16 {
        return Err(Error::TooShort { needed: 16, got: n });
    }
    let dt = tail.sample_dt().unwrap();
    let w = opts.window.coefficients(n);
    let wsum: f64 = w.iter().sum();
    let mut buf: Vec<Complex64> = tail.states.iter().zip(&w).map(|(s, wi)| s.alpha[mode - 1] * *wi).collect();
    fft_forward(&mut buf);
    let mut pairs: Vec<(f64, f64)> =
        buf.iter().enumerate().map(|(k, x)| (bin_frequency(k, n, dt), x.norm() / wsum)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (frequencies, magnitudes) = pairs.into_iter().unzip();
    Ok(PowerSpectrum {
        frequencies,
        magnitudes,
        bin_width: 2.0 * std::f64::consts::PI / (n as f64 * dt),
        rel_floor: opts.rel_floor,
    })
}

/// Greedy integer-relation count of independent frequencies among the
/// significant peaks: a peak is new unless it equals `sum n_i f_i` with
/// `|n_i| <= max_order` within `tol`. Peaks within one bin of zero are DC.
pub fn count_fundamentals(peaks: &[Peak], bin_width: f64, max_order: i32) -> Vec<f64> {
    let tol = 1.5 * bin_width;
    let mut fundamentals: Vec<f64> = Vec::new();
    for p in peaks {
        if p.frequency.abs() < bin_width {
            continue;
        }
        if !representable(p.frequency, &fundamentals, max_order, tol) {
            fundamentals.push(p.frequency);
        }
    }
    fundamentals
}

fn representable(f: f64, basis: &[f64], max_order: i32, tol: f64) -> bool {
    fn rec(target: f64, basis: &[f64], max_order: i32, tol: f64) -> bool {
        match basis.split_first() {
            None => target.abs() <= tol,
            Some((b, rest)) => (-max_order..=max_order).any(|n| rec(target - n as f64 * b, rest, max_order, tol)),
        }
    }
    // Four independent frequencies already means irregular; stop growing.
    if basis.len() >= 4 {
        return true;
    }
    !basis.is_empty() && rec(f, basis, max_order, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttractorClass {
    FixedPoint,
    LimitCycle,
    LimitTorus,
    Irregular,
}

impl AttractorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AttractorClass::FixedPoint => "fixed-point",
            AttractorClass::LimitCycle => "limit-cycle",
            AttractorClass::LimitTorus => "limit-torus",
            AttractorClass::Irregular => "irregular",
        }
    }

    fn expected_fundamentals(self) -> Option<usize> {
        match self {
            AttractorClass::FixedPoint => Some(0),
            AttractorClass::LimitCycle => Some(1),
            AttractorClass::LimitTorus => Some(2),
            AttractorClass::Irregular => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: AttractorClass,
    pub zero_exponents: usize,
    /// Independent spectral frequencies, when a spectrum was supplied.
    pub fundamentals: Option<Vec<f64>>,
    pub diagnostics: Option<String>,
}

/// Classifies by the number of near-zero Lyapunov exponents and cross-checks
/// against the number of independent spectral frequencies.
pub fn classify_attractor(
    spectrum: Option<&PowerSpectrum>,
    lyapunov: &LyapunovSpectrum,
    zero_tol: f64,
) -> Classification {
    let zero_exponents = lyapunov.zero_count(zero_tol);
    let positive = lyapunov.exponents.iter().any(|l| *l >= zero_tol);
    let mut class = if positive {
        AttractorClass::Irregular
    } else {
        match zero_exponents {
            0 => AttractorClass::FixedPoint,
            1 => AttractorClass::LimitCycle,
            2 => AttractorClass::LimitTorus,
            _ => AttractorClass::Irregular,
        }
    };
    let mut diagnostics = positive.then(|| format!("positive exponent in {:?}", lyapunov.exponents));
    if !lyapunov.converged {
        diagnostics = Some(format!("Lyapunov estimate not converged (error {:.2e})", lyapunov.convergence_error));
    }
    let fundamentals = spectrum.map(|s| count_fundamentals(&s.peaks(), s.bin_width, 8));
    if let (Some(f), Some(expected)) = (&fundamentals, class.expected_fundamentals()) {
        if f.len() != expected {
            diagnostics = Some(format!(
                "{} zero exponents ({}) but {} spectral fundamentals {:?}",
                zero_exponents,
                class.as_str(),
                f.len(),
                f
            ));
            class = AttractorClass::Irregular;
        }
    }
    Classification { class, zero_exponents, fundamentals, diagnostics }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub initial: FieldState,
    pub t_end: f64,
    pub dt: f64,
    /// Integration steps between spectrum samples.
    pub stride: usize,
    pub spectrum: SpectrumOptions,
    /// `None` classifies from the spectral frequency count alone.
    pub lyapunov: Option<LyapunovOptions>,
    pub zero_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            initial: FieldState::new(Complex64::new(0.05, 0.0), Complex64::new(0.05, 0.0)),
            t_end: 1e4,
            dt: 1e-3,
            stride: 100,
            spectrum: SpectrumOptions::default(),
            lyapunov: Some(LyapunovOptions::default()),
            zero_tol: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    /// Spectrum of mode 1, normalised to unit peak.
    pub spectrum: Option<PowerSpectrum>,
    pub classification: Option<Classification>,
    pub lyapunov: Option<LyapunovSpectrum>,
    pub error: Option<String>,
}

fn sweep_point(omega: f64, template: &ModelParams, opts: &SweepOptions) -> Result<SweepRow> {
    let params = template.with_omega(omega);
    let traj = integrate_gpe(opts.initial, &params, opts.t_end, opts.dt, opts.stride)?;
    let spec = power_spectrum(&traj, 1, &opts.spectrum)?;
    let (classification, lyap) = match &opts.lyapunov {
        Some(lo) => {
            let ly = lyapunov_spectrum(&params, opts.initial, lo)?;
            (classify_attractor(Some(&spec), &ly, opts.zero_tol), Some(ly))
        }
        None => {
            let f = count_fundamentals(&spec.peaks(), spec.bin_width, 8);
            let class = match f.len() {
                0 => AttractorClass::FixedPoint,
                1 => AttractorClass::LimitCycle,
                2 => AttractorClass::LimitTorus,
                _ => AttractorClass::Irregular,
            };
            let c = Classification {
                class,
                zero_exponents: 0,
                fundamentals: Some(f),
                diagnostics: Some("spectral classification only".into()),
            };
            (c, None)
        }
    };
    Ok(SweepRow {
        omega,
        spectrum: Some(spec.normalized()),
        classification: Some(classification),
        lyapunov: lyap,
        error: None,
    })
}

/// Independent classified runs over `omegas` (both cavities share `omega`).
/// Failed points are recorded in their row and the sweep continues.
pub fn sweep_omega(omegas: &[f64], template: &ModelParams, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    if omegas.is_empty() {
        return Err(Error::Empty("omega grid".into()));
    }
    Ok(omegas
        .par_iter()
        .map(|&w| {
            sweep_point(w, template, opts).unwrap_or_else(|e| SweepRow {
                omega: w,
                spectrum: None,
                classification: None,
                lyapunov: None,
                error: Some(e.to_string()),
            })
        })
        .collect())
}
