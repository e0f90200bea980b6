//! Run configuration: TOML file, command-line overrides and per-field
//! provenance.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kerrtorus::melting::Centering;
use kerrtorus::model::{apply_scaling, Aleph, ModelParams, ScalingMode, TildeParams};
use kerrtorus::signal::WindowShape;
use kerrtorus::spectra::SpectrumValue;
use kerrtorus::twa::{EnsembleConfig, Integrator};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A per-cavity value given either once for both cavities or as `[c1, c2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Pair {
    Both(f64),
    Each([f64; 2]),
}

impl Pair {
    pub fn get(self) -> [f64; 2] {
        match self {
            Pair::Both(v) => [v, v],
            Pair::Each(v) => v,
        }
    }
}

/// Scaled (tilde) model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub omega: Pair,
    pub kerr: Pair,
    pub tunneling: f64,
    pub pump: Pair,
    pub two_photon_loss: Pair,
    pub single_photon_loss: Pair,
    pub n_thermal: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            omega: Pair::Each(p.omega),
            kerr: Pair::Each(p.kerr),
            tunneling: p.tunneling,
            pump: Pair::Each(p.pump),
            two_photon_loss: Pair::Each(p.two_photon_loss),
            single_photon_loss: Pair::Each(p.single_photon_loss),
            n_thermal: p.n_thermal,
        }
    }
}

impl ModelSection {
    pub fn tilde(&self) -> TildeParams {
        TildeParams(ModelParams {
            omega: self.omega.get(),
            kerr: self.kerr.get(),
            tunneling: self.tunneling,
            pump: self.pump.get(),
            two_photon_loss: self.two_photon_loss.get(),
            single_photon_loss: self.single_photon_loss.get(),
            n_thermal: self.n_thermal,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    pub aleph: f64,
    /// Scaling parameters for multi-run commands.
    pub alephs: Vec<f64>,
    pub mode: ScalingMode,
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self { aleph: 1e4, alephs: vec![500.0, 1000.0, 2000.0, 4000.0, 8000.0], mode: ScalingMode::Standard }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_traj: usize,
    pub dt: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    pub noise: bool,
    pub integrator: Integrator,
    /// Initial rescaled field of both modes as `[re, im]`.
    pub alpha0: [f64; 2],
    pub band_after: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        let d = EnsembleConfig::default();
        Self {
            n_traj: 5000,
            dt: d.dt,
            t_end: d.t_end,
            sample_stride: d.sample_stride,
            noise: d.noise,
            integrator: d.integrator,
            alpha0: [d.alpha_0[0].re, d.alpha_0[0].im],
            band_after: d.band_after,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    // mean field
    pub gpe_t_end: f64,
    pub gpe_dt: f64,
    pub gpe_stride: usize,
    pub transient: f64,
    pub lyapunov_time: f64,
    pub zero_tol: f64,
    pub spectral_only: bool,
    /// Kept frequency band of emitted power spectra.
    pub spectrum_band: f64,
    pub spectrum_points: usize,
    // spectra
    pub t0: f64,
    /// Lag span per run; `0` uses `max(100, 0.08 aleph)`.
    pub tau_max: f64,
    pub window: WindowShape,
    pub width: f64,
    pub hop: f64,
    pub pad: usize,
    pub band: [f64; 2],
    pub value: SpectrumValue,
    pub n_peaks: usize,
    pub min_rel_amplitude: f64,
    // melting
    pub centering: Centering,
    /// Averaging period; `0` estimates it from the mean angle.
    pub period: f64,
    pub collapse_times: Vec<f64>,
    // wigner
    pub wigner_times: Vec<f64>,
    pub wigner_bins: usize,
    pub wigner_extent: f64,
    pub wigner_margin: usize,
    pub wigner_smoothing: f64,
    pub wigner_format: GridFormat,
    // fock space
    pub cutoff: [usize; 2],
    pub n_eigenvalues: usize,
    pub evolve_times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridFormat {
    Binary,
    Csv,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            gpe_t_end: 1e4,
            gpe_dt: 1e-3,
            gpe_stride: 100,
            transient: 50.0,
            lyapunov_time: 1e4,
            zero_tol: 5e-3,
            spectral_only: false,
            spectrum_band: 3.0,
            spectrum_points: 2000,
            t0: 20.0,
            tau_max: 0.0,
            window: WindowShape::Hann,
            width: 20.0,
            hop: 1.0,
            pad: 8,
            band: [-3.0, 3.0],
            value: SpectrumValue::Modulus,
            n_peaks: 2,
            min_rel_amplitude: 0.05,
            centering: Centering::Origin,
            period: 0.0,
            collapse_times: vec![25.0, 30.0, 36.0, 43.0, 52.0],
            wigner_times: vec![10.0, 50.0, 100.0],
            wigner_bins: 256,
            wigner_extent: 1.5,
            wigner_margin: 2,
            wigner_smoothing: 0.0,
            wigner_format: GridFormat::Binary,
            cutoff: [8, 8],
            n_eigenvalues: 20,
            evolve_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; `0` uses the hardware parallelism.
    pub threads: usize,
    pub out: PathBuf,
    pub model: ModelSection,
    pub scaling: ScalingSection,
    pub ensemble: EnsembleSection,
    pub analysis: AnalysisSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: 0,
            out: PathBuf::from("out"),
            model: ModelSection::default(),
            scaling: ScalingSection::default(),
            ensemble: EnsembleSection::default(),
            analysis: AnalysisSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    File,
    Flag,
}

/// Resolved configuration with the origin of every leaf value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub config: RunConfig,
    pub provenance: BTreeMap<String, Source>,
}

fn leaves(prefix: &str, v: &serde_json::Value, out: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, v) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                leaves(&p, v, out);
            }
        }
        _ => out.push(prefix.to_string()),
    }
}

fn toml_leaves(prefix: &str, v: &toml::Value, out: &mut Vec<String>) {
    match v {
        toml::Value::Table(m) => {
            for (k, v) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                toml_leaves(&p, v, out);
            }
        }
        _ => out.push(prefix.to_string()),
    }
}

impl Resolved {
    pub fn defaults() -> Self {
        let config = RunConfig::default();
        let mut keys = Vec::new();
        leaves("", &serde_json::to_value(&config).expect("config serialises"), &mut keys);
        Self { config, provenance: keys.into_iter().map(|k| (k, Source::Default)).collect() }
    }

    /// Parses a TOML document on top of the defaults.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        let raw: toml::Value = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        let mut r = Self::defaults();
        r.config = config;
        let mut keys = Vec::new();
        toml_leaves("", &raw, &mut keys);
        for k in keys {
            r.provenance.insert(k, Source::File);
        }
        Ok(r)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::defaults()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Self::from_toml(&text, &p.display().to_string())
            }
        }
    }

    /// Applies a command-line override and records it.
    pub fn set<T>(&mut self, key: &str, value: Option<T>, apply: impl FnOnce(&mut RunConfig, T)) {
        if let Some(v) = value {
            apply(&mut self.config, v);
            self.provenance.insert(key.to_string(), Source::Flag);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.config;
        let cfg = |e: kerrtorus::Error, what: &str| CliError::Config(format!("{what}: {e}"));
        Aleph::new(c.scaling.aleph).map_err(|e| cfg(e, "scaling.aleph"))?;
        for a in &c.scaling.alephs {
            Aleph::new(*a).map_err(|e| cfg(e, "scaling.alephs"))?;
        }
        c.model.tilde().validate().map_err(|e| cfg(e, "model"))?;
        self.ensemble(c.scaling.aleph)?.validate().map_err(|e| cfg(e, "ensemble"))?;
        let a = &c.analysis;
        if !(a.width > 0.0 && a.hop > 0.0 && a.pad > 0) {
            return Err(CliError::Config("analysis: width, hop and pad must be positive".into()));
        }
        if !(a.band[1] > a.band[0]) {
            return Err(CliError::Config("analysis.band must be increasing".into()));
        }
        if a.wigner_bins == 0 || !(a.wigner_extent > 0.0) {
            return Err(CliError::Config("analysis: wigner_bins and wigner_extent must be positive".into()));
        }
        Ok(())
    }

    pub fn physical(&self, aleph: f64) -> Result<ModelParams, CliError> {
        let a = Aleph::new(aleph).map_err(|e| CliError::Config(format!("aleph: {e}")))?;
        apply_scaling(&self.config.model.tilde(), a, self.config.scaling.mode)
            .map_err(|e| CliError::Config(format!("model: {e}")))
    }

    pub fn ensemble(&self, aleph: f64) -> Result<EnsembleConfig, CliError> {
        let e = &self.config.ensemble;
        let a0 = Complex64::new(e.alpha0[0], e.alpha0[1]);
        Ok(EnsembleConfig {
            n_traj: e.n_traj,
            aleph: Aleph::new(aleph).map_err(|err| CliError::Config(format!("aleph: {err}")))?,
            alpha_0: [a0, a0],
            dt: e.dt,
            t_end: e.t_end,
            sample_stride: e.sample_stride,
            master_seed: self.config.seed,
            noise: e.noise,
            integrator: e.integrator,
            store_trajectories: false,
            correlation_t0: None,
            monomials: Vec::new(),
            snapshot_times: Vec::new(),
            band_after: e.band_after,
        })
    }

    pub fn tau_max(&self, aleph: f64) -> f64 {
        let t = self.config.analysis.tau_max;
        if t > 0.0 {
            t
        } else {
            (0.08 * aleph).max(100.0)
        }
    }
}
