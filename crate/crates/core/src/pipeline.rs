//! Multi-stage analyses shared by the command-line driver and the
//! acceptance runs: gap extraction from one ensemble, melting series, and
//! assembly of the two curve families for the scaling collapse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::melting::{circular_variance_series, estimate_period, mean_angle_series, period_average, Centering, Curve};
use crate::model::{apply_scaling, Aleph, ScalingMode, TildeParams};
use crate::spectra::{
    available_lags, extract_gaps, spectrogram, track_peaks, two_time_correlation, CorrelationSeries, GapEstimate,
    GapOptions, PeakTracks, Spectrogram, SpectrogramOptions, TRANSIENT_FLOOR,
};
use crate::twa::{run_ensemble, Ensemble, EnsembleConfig};

/// Ensemble for the dephasing analyses: correlation taps from `t0`,
/// everything else from `template`.
pub fn lt_ensemble(
    tilde: &TildeParams,
    mode: ScalingMode,
    aleph: f64,
    t0: f64,
    template: &EnsembleConfig,
) -> Result<Ensemble> {
    let a = Aleph::new(aleph)?;
    let params = apply_scaling(tilde, a, mode)?;
    let cfg = EnsembleConfig { aleph: a, correlation_t0: Some(t0), ..template.clone() };
    run_ensemble(&cfg, &params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapAnalysisOptions {
    pub t0: f64,
    pub spectrogram: SpectrogramOptions,
    pub n_peaks: usize,
    /// Relative floor for peak candidates in each frame.
    pub peak_floor: f64,
    pub gaps: GapOptions,
}

impl Default for GapAnalysisOptions {
    fn default() -> Self {
        Self {
            t0: TRANSIENT_FLOOR,
            spectrogram: SpectrogramOptions::default(),
            n_peaks: 2,
            peak_floor: 1e-3,
            gaps: GapOptions { min_rel_amplitude: 0.05, ..GapOptions::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAnalysis {
    pub aleph: f64,
    pub correlation: CorrelationSeries,
    pub spectrogram: Spectrogram,
    pub tracks: PeakTracks,
    pub gaps: Vec<GapEstimate>,
}

/// Correlation at `t0` over every available lag, spectrogram, peak tracks
/// and per-track decay rates.
pub fn gap_analysis(ensemble: &Ensemble, opts: &GapAnalysisOptions) -> Result<GapAnalysis> {
    let lags = available_lags(ensemble, opts.t0);
    if lags.is_empty() {
        return Err(Error::Unavailable(format!("no correlation lags at t0 = {}", opts.t0)));
    }
    let correlation = two_time_correlation(ensemble, opts.t0, &lags)?;
    let spec = spectrogram(&correlation, &opts.spectrogram)?;
    let tracks = track_peaks(&spec, opts.n_peaks, opts.peak_floor)?;
    let gaps = extract_gaps(&tracks, &opts.gaps)?;
    Ok(GapAnalysis { aleph: ensemble.config.aleph.get(), correlation, spectrogram: spec, tracks, gaps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeltSeries {
    pub aleph: f64,
    pub times: Vec<f64>,
    pub r: Vec<f64>,
    pub period: f64,
    /// Period-averaged variance on the trimmed grid.
    pub averaged_times: Vec<f64>,
    pub averaged: Vec<f64>,
}

impl MeltSeries {
    /// Linear interpolation of the averaged series; `None` outside its span.
    pub fn averaged_at(&self, t: f64) -> Option<f64> {
        let x = &self.averaged_times;
        if x.is_empty() || t < x[0] || t > x[x.len() - 1] {
            return None;
        }
        let k = x.partition_point(|v| *v < t);
        if k == 0 || x[k] == t {
            return Some(self.averaged[k]);
        }
        let f = (t - x[k - 1]) / (x[k] - x[k - 1]);
        Some(self.averaged[k - 1] + f * (self.averaged[k] - self.averaged[k - 1]))
    }
}

/// `R(t)` and its period average; the period is estimated from the mean
/// angle after `transient` unless given.
pub fn melt_series(
    ensemble: &Ensemble,
    centering: Centering,
    period: Option<f64>,
    transient: f64,
) -> Result<MeltSeries> {
    let r = circular_variance_series(ensemble, centering)?;
    let times = ensemble.times.clone();
    let period = match period {
        Some(p) => p,
        None => {
            let start = times.partition_point(|t| *t < transient);
            estimate_period(&times[start..], &mean_angle_series(ensemble)[start..])?
        }
    };
    let (averaged_times, averaged) = period_average(&times, &r, period)?;
    Ok(MeltSeries { aleph: ensemble.config.aleph.get(), times, r, period, averaged_times, averaged })
}

/// `R(aleph_j, t)` curves, one per series.
pub fn time_curves(series: &[MeltSeries]) -> Vec<Curve> {
    series.iter().map(|s| Curve { param: s.aleph, x: s.averaged_times.clone(), y: s.averaged.clone() }).collect()
}

/// `R(aleph, t_j)` against `1/aleph`, one curve per `t_j`.
pub fn aleph_curves(series: &[MeltSeries], times: &[f64]) -> Result<Vec<Curve>> {
    times
        .iter()
        .map(|&t| {
            let mut pts = Vec::with_capacity(series.len());
            for s in series {
                let v = s.averaged_at(t).ok_or_else(|| {
                    Error::Unavailable(format!("aleph = {} has no averaged value at t = {t}", s.aleph))
                })?;
                pts.push((1.0 / s.aleph, v));
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (x, y) = pts.into_iter().unzip();
            Ok(Curve { param: t, x, y })
        })
        .collect()
}
