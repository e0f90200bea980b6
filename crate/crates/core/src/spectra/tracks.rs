use serde::{Deserialize, Serialize};

use super::Spectrogram;
use crate::error::{Error, Result};
use crate::fit::{fit_line, fit_log_log};
use crate::signal::find_peaks;

/// Association gate between frames, in frequency bins.
const GATE_BINS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakTrack {
    /// Per frame; `None` where the peak was not found inside the gate.
    pub frequencies: Vec<Option<f64>>,
    pub amplitudes: Vec<Option<f64>>,
}

impl PeakTrack {
    pub fn present(&self) -> usize {
        self.amplitudes.iter().filter(|a| a.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakTracks {
    pub times: Vec<f64>,
    pub bin_width: f64,
    /// Ordered by amplitude in the first frame, strongest first.
    pub tracks: Vec<PeakTrack>,
    /// Frames where two tracks competed for the same peak.
    pub merged_frames: Vec<usize>,
}

/// Follows the `n_peaks` strongest local maxima through the frames by
/// nearest-frequency matching with a three-bin gate.
pub fn track_peaks(spec: &Spectrogram, n_peaks: usize, rel_floor: f64) -> Result<PeakTracks> {
    let n_frames = spec.n_frames();
    if n_frames < 2 {
        return Err(Error::TooShort { needed: 2, got: n_frames });
    }
    if n_peaks == 0 {
        return Err(Error::Domain("n_peaks must be >= 1".into()));
    }
    let bin = spec.bin_width();
    let gate = GATE_BINS * bin;
    let first = find_peaks(&spec.omegas, spec.frame(0), rel_floor);
    if first.len() < n_peaks {
        return Err(Error::NoPeak);
    }
    let mut tracks: Vec<PeakTrack> = first[..n_peaks]
        .iter()
        .map(|p| PeakTrack { frequencies: vec![Some(p.frequency)], amplitudes: vec![Some(p.magnitude)] })
        .collect();
    let mut reference: Vec<f64> = first[..n_peaks].iter().map(|p| p.frequency).collect();
    let mut merged = Vec::new();

    for f in 1..n_frames {
        let mut cands = find_peaks(&spec.omegas, spec.frame(f), rel_floor);
        cands.truncate(n_peaks);
        let mut claim: Vec<Option<(usize, f64)>> = vec![None; n_peaks];
        for (j, r) in reference.iter().enumerate() {
            claim[j] = cands
                .iter()
                .enumerate()
                .map(|(c, p)| (c, (p.frequency - r).abs()))
                .filter(|(_, d)| *d <= gate)
                .min_by(|a, b| a.1.total_cmp(&b.1));
        }
        let mut conflict = false;
        for j in 0..n_peaks {
            for k in 0..n_peaks {
                if j != k {
                    if let (Some((cj, dj)), Some((ck, dk))) = (claim[j], claim[k]) {
                        if cj == ck {
                            conflict = true;
                            if dj > dk || (dj == dk && j > k) {
                                claim[j] = None;
                            }
                        }
                    }
                }
            }
        }
        if conflict {
            merged.push(f);
        }
        for (j, t) in tracks.iter_mut().enumerate() {
            match claim[j] {
                Some((c, _)) => {
                    t.frequencies.push(Some(cands[c].frequency));
                    t.amplitudes.push(Some(cands[c].magnitude));
                    reference[j] = cands[c].frequency;
                }
                None => {
                    t.frequencies.push(None);
                    t.amplitudes.push(None);
                }
            }
        }
    }
    Ok(PeakTracks { times: spec.frame_times.clone(), bin_width: bin, tracks, merged_frames: merged })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    /// Frames with centre outside `[t_min, t_max]` are ignored.
    pub t_min: f64,
    pub t_max: f64,
    /// Frames whose amplitude falls below this fraction of the track's
    /// largest amplitude are ignored (noise floor).
    pub min_rel_amplitude: f64,
    pub min_frames: usize,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self { t_min: f64::NEG_INFINITY, t_max: f64::INFINITY, min_rel_amplitude: 0.0, min_frames: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEstimate {
    /// 1-based track index.
    pub index: usize,
    pub nu: f64,
    pub nu_err: f64,
    pub lambda: f64,
    pub lambda_err: Option<f64>,
    /// Log-amplitude intercept of the fit.
    pub log_amplitude: f64,
    pub n_frames: usize,
    /// The fitted slope was non-negative and `lambda` was set to zero.
    pub clamped: bool,
}

/// Decay rate of each track from a straight-line fit of log amplitude
/// against frame time; the frequency is the amplitude-squared weighted
/// track mean over the fitted frames.
pub fn extract_gaps(tracks: &PeakTracks, opts: &GapOptions) -> Result<Vec<GapEstimate>> {
    let mut out = Vec::with_capacity(tracks.tracks.len());
    for (j, tr) in tracks.tracks.iter().enumerate() {
        let peak = tr.amplitudes.iter().flatten().cloned().fold(0.0, f64::max);
        let floor = opts.min_rel_amplitude * peak;
        let (mut t, mut y, mut nu) = (Vec::new(), Vec::new(), Vec::new());
        for (i, (a, f)) in tr.amplitudes.iter().zip(&tr.frequencies).enumerate() {
            let ti = tracks.times[i];
            if let (Some(a), Some(f)) = (a, f) {
                if *a > 0.0 && *a >= floor && ti >= opts.t_min && ti <= opts.t_max {
                    t.push(ti);
                    y.push(a.ln());
                    nu.push(*f);
                }
            }
        }
        if t.len() < opts.min_frames.max(2) {
            return Err(Error::TooShort { needed: opts.min_frames.max(2), got: t.len() });
        }
        let line = fit_line(&t, &y)?;
        // Squared-amplitude weights keep weak tail frames, where leakage from
        // neighbouring lines dominates, from pulling the frequency.
        let w: Vec<f64> = y.iter().map(|l| (2.0 * (l - y[0])).exp()).collect();
        let sw: f64 = w.iter().sum();
        let nu_mean = w.iter().zip(&nu).map(|(w, f)| w * f).sum::<f64>() / sw;
        let nu_var = w.iter().zip(&nu).map(|(w, f)| w * (f - nu_mean).powi(2)).sum::<f64>() / sw;
        let n_eff = sw * sw / w.iter().map(|w| w * w).sum::<f64>();
        let clamped = line.slope >= 0.0;
        out.push(GapEstimate {
            index: j + 1,
            nu: nu_mean,
            nu_err: (nu_var / (n_eff - 1.0).max(1.0)).sqrt(),
            lambda: if clamped { 0.0 } else { -line.slope },
            lambda_err: line.slope_err,
            log_amplitude: line.intercept,
            n_frames: t.len(),
            clamped,
        });
    }
    Ok(out)
}

/// `Lambda = b * aleph^(-a)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// `None` when the fit is exactly determined (two points).
    pub exponent_err: Option<f64>,
    pub prefactor_err: Option<f64>,
    pub range: (f64, f64),
    pub n_points: usize,
    pub residual_ss: f64,
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * x.powf(-self.exponent)
    }
}

/// Log-log regression over the points with `x` inside `range` (inclusive).
pub fn fit_power_law(points: &[(f64, f64)], range: Option<(f64, f64)>) -> Result<PowerLawFit> {
    let (lo, hi) = range.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().filter(|(x, _)| *x >= lo && *x <= hi).cloned().unzip();
    let f = fit_log_log(&x, &y)?;
    let used = (x.iter().cloned().fold(f64::INFINITY, f64::min), x.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    Ok(PowerLawFit {
        exponent: -f.slope,
        prefactor: f.prefactor,
        exponent_err: f.slope_err,
        prefactor_err: f.prefactor_err,
        range: used,
        n_points: f.n_points,
        residual_ss: f.residual_ss,
    })
}
