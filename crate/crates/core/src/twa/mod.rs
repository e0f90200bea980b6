//! Truncated-Wigner ensembles for the rescaled fields `alpha~ = alpha / sqrt(aleph)`.
//!
//! Each trajectory obeys the Langevin equations
//!
//! ```text
//! i da1~ = [w1 + i g1/2 + (U1~ - i e1~)(|a1~|^2 - 1/aleph)] a1~ dt - 2 J~ a1~* a2~ dt
//!          + sqrt(g1 / (2 aleph)) dChi1 + sqrt(2 e1~ |a1~|^2 / aleph) dXi1
//! ```
//!
//! (mode 2 analogous with `-J~ a1~^2`), integrated in the Ito sense with
//! Euler-Maruyama: complex increments have `E|dW|^2 = dt` and the
//! multiplicative amplitude is evaluated at the pre-step field. Since the
//! noise sits on the same side as `i d/dt`, it enters the update rotated by
//! `-i`. A Heun drift corrector (noise still evaluated pre-step) is available
//! for sensitivity checks.

mod ensemble;

pub use ensemble::{
    occupation_envelope, run_ensemble, weyl_expectation, Ensemble, Envelope, Ordering, Reductions, Snapshot,
};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::FieldState;
use crate::model::{Aleph, ModelParams};
use crate::rng::complex_normal;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Per-trajectory divergence threshold on `|alpha~_k|`.
pub const DIVERGENCE_THRESHOLD: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    EulerMaruyama,
    /// Predictor-corrector on the drift, Ito noise.
    Heun,
}

/// Observable `(alpha_i*)^n (alpha_j)^m` in rescaled fields; modes are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub n: u32,
    pub m: u32,
    pub conj_mode: usize,
    pub mode: usize,
}

impl Monomial {
    pub fn new(n: u32, conj_mode: usize, m: u32, mode: usize) -> Self {
        Self { n, m, conj_mode, mode }
    }

    /// `|alpha_k|^2`.
    pub fn occupation(mode: usize) -> Self {
        Self::new(1, mode, 1, mode)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.mode) || !(1..=2).contains(&self.conj_mode) {
            return Err(Error::Domain(format!("monomial modes must be 1 or 2: {self:?}")));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, s: &FieldState) -> Complex64 {
        s.alpha[self.conj_mode - 1].conj().powu(self.n) * s.alpha[self.mode - 1].powu(self.m)
    }

    pub fn is_occupation(&self) -> bool {
        self.n == 1 && self.m == 1 && self.mode == self.conj_mode
    }
}

/// Ensemble run settings. Times are in the units of the model rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub aleph: Aleph,
    /// Coherent seed amplitude of each mode (rescaled).
    pub alpha_0: [Complex64; 2],
    pub dt: f64,
    pub t_end: f64,
    /// Integration steps between stored samples.
    pub sample_stride: usize,
    pub master_seed: u64,
    /// `false` gives the classical limit: no sampling noise, no Langevin
    /// noise and no `1/aleph` ordering correction in the drift.
    pub noise: bool,
    pub integrator: Integrator,
    /// Keep every sampled state of every trajectory.
    pub store_trajectories: bool,
    /// Reference time of the streamed `<alpha1*(t0+tau) alpha1(t0)>` taps.
    pub correlation_t0: Option<f64>,
    /// Extra monomials averaged on the fly.
    pub monomials: Vec<Monomial>,
    /// Times at which all trajectory states are kept.
    pub snapshot_times: Vec<f64>,
    /// Per-trajectory occupation extremes are tracked for `t >= band_after`.
    pub band_after: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        let a0 = Complex64::new(0.05, 0.0);
        Self {
            n_traj: 30_000,
            aleph: Aleph::new(1e4).unwrap(),
            alpha_0: [a0, a0],
            dt: 1e-3,
            t_end: 100.0,
            sample_stride: 100,
            master_seed: 0,
            noise: true,
            integrator: Integrator::EulerMaruyama,
            store_trajectories: false,
            correlation_t0: None,
            monomials: Vec::new(),
            snapshot_times: Vec::new(),
            band_after: 10.0,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::Domain("n_traj must be >= 1".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Domain(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Domain(format!("t_end must be > 0, got {}", self.t_end)));
        }
        if self.sample_stride == 0 {
            return Err(Error::Domain("sample_stride must be >= 1".into()));
        }
        if let Some(t0) = self.correlation_t0 {
            if !(0.0..=self.t_end).contains(&t0) {
                return Err(Error::Domain(format!("correlation t0 {t0} outside [0, t_end]")));
            }
        }
        for m in &self.monomials {
            m.validate()?;
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn sample_dt(&self) -> f64 {
        self.dt * self.sample_stride as f64
    }

    pub fn n_samples(&self) -> usize {
        self.n_steps() / self.sample_stride + 1
    }

    /// Index of the sample closest to time `t`.
    pub fn sample_index(&self, t: f64) -> usize {
        ((t / self.sample_dt()).round().max(0.0) as usize).min(self.n_samples() - 1)
    }
}

/// One step worth of unit-variance complex noise; the integrator scales it by
/// `sqrt(dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseDraw {
    /// Additive (pump, single-photon loss, thermal) noise.
    pub chi: [Complex64; 2],
    /// Multiplicative two-photon-loss noise.
    pub xi: [Complex64; 2],
}

impl NoiseDraw {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self { chi: [complex_normal(rng), complex_normal(rng)], xi: [complex_normal(rng), complex_normal(rng)] }
    }
}

/// Rescaled couplings and noise amplitudes derived from physical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwaCouplings {
    linear: [Complex64; 2],
    nonlinear: [Complex64; 2],
    tunneling: f64,
    /// `1/aleph` ordering correction, zero in the classical limit.
    shift: f64,
    additive: [f64; 2],
    /// `sqrt(2 eta~ / aleph)`; multiplied by `|alpha~|` at each step.
    multiplicative: [f64; 2],
}

impl TwaCouplings {
    pub fn new(params: &ModelParams, aleph: Aleph, noise: bool) -> Self {
        let a = aleph.get();
        let linear = [0, 1].map(|k| {
            Complex64::new(params.omega[k], 0.5 * params.pump[k])
                + Complex64::new(0.0, -0.5 * params.single_photon_loss[k])
        });
        let nonlinear = [0, 1].map(|k| Complex64::new(params.kerr[k] * a, -params.two_photon_loss[k] * a));
        let on = if noise { 1.0 } else { 0.0 };
        let additive = [0, 1].map(|k| {
            let var = 0.5 * params.pump[k] + params.single_photon_loss[k] * (params.n_thermal + 0.5);
            on * (var / a).sqrt()
        });
        let multiplicative = [0, 1].map(|k| on * (2.0 * params.two_photon_loss[k]).sqrt());
        Self { linear, nonlinear, tunneling: params.tunneling * a.sqrt(), shift: on / a, additive, multiplicative }
    }

    /// Deterministic part of the Langevin equations.
    #[inline]
    pub fn drift(&self, s: &FieldState) -> FieldState {
        let [a1, a2] = s.alpha;
        let g1 = self.linear[0] + self.nonlinear[0] * (a1.norm_sqr() - self.shift);
        let g2 = self.linear[1] + self.nonlinear[1] * (a2.norm_sqr() - self.shift);
        FieldState::new(
            -I * (g1 * a1 - 2.0 * self.tunneling * a1.conj() * a2),
            -I * (g2 * a2 - self.tunneling * a1 * a1),
        )
    }

    /// Noise increment `-i (b_add chi + b_mult |alpha| xi) sqrt(dt)` at the
    /// pre-step field.
    #[inline]
    pub fn diffusion(&self, s: &FieldState, noise: &NoiseDraw, sqrt_dt: f64) -> FieldState {
        let d = |k: usize| {
            -I * (self.additive[k] * noise.chi[k] + self.multiplicative[k] * s.alpha[k].norm() * noise.xi[k]) * sqrt_dt
        };
        FieldState::new(d(0), d(1))
    }

    #[inline]
    pub fn step(&self, s: &FieldState, dt: f64, noise: &NoiseDraw, integrator: Integrator) -> FieldState {
        let sqrt_dt = dt.sqrt();
        let f0 = self.drift(s);
        let dw = self.diffusion(s, noise, sqrt_dt);
        match integrator {
            Integrator::EulerMaruyama => *s + f0 * dt + dw,
            Integrator::Heun => {
                let pred = *s + f0 * dt + dw;
                let f1 = self.drift(&pred);
                *s + (f0 + f1) * (0.5 * dt) + dw
            }
        }
    }
}

/// One Euler-Maruyama update.
pub fn twa_step(state: &FieldState, params: &ModelParams, aleph: Aleph, dt: f64, noise: &NoiseDraw) -> FieldState {
    TwaCouplings::new(params, aleph, true).step(state, dt, noise, Integrator::EulerMaruyama)
}

/// Initial fields `alpha~_k(0) = alpha~_0 + zeta_k / sqrt(2 aleph)` with
/// unit-variance complex Gaussian `zeta_k`; exactly the seed without noise.
pub fn sample_initial<R: Rng + ?Sized>(config: &EnsembleConfig, rng: &mut R) -> FieldState {
    if !config.noise {
        return FieldState { alpha: config.alpha_0 };
    }
    let width = 1.0 / (2.0 * config.aleph.get()).sqrt();
    let z1 = complex_normal(rng);
    let z2 = complex_normal(rng);
    FieldState::new(config.alpha_0[0] + z1 * width, config.alpha_0[1] + z2 * width)
}
