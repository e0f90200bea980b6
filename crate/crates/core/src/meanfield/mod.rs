//! Deterministic mean-field (Gross-Pitaevskii) dynamics of the two cavity
//! amplitudes, Lyapunov spectra and spectral classification of attractors.

mod lyapunov;
mod spectrum;

pub use lyapunov::{lyapunov_spectrum, LyapunovOptions, LyapunovSpectrum};
pub use spectrum::{
    classify_attractor, count_fundamentals, power_spectrum, sweep_omega, AttractorClass, Classification, PowerSpectrum,
    SpectrumOptions, SweepOptions, SweepRow,
};

use std::ops::{Add, Mul, Sub};

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Blow-up threshold on `|alpha_k|` for deterministic integration.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Pair of complex mode amplitudes `(alpha_1, alpha_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldState {
    pub alpha: [Complex64; 2],
}

impl FieldState {
    pub fn new(alpha_1: Complex64, alpha_2: Complex64) -> Self {
        Self { alpha: [alpha_1, alpha_2] }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub fn max_norm(&self) -> f64 {
        self.alpha[0].norm().max(self.alpha[1].norm())
    }

    /// Applies the U(1) symmetry `(alpha_1, alpha_2) -> (e^{i phi} alpha_1, e^{2 i phi} alpha_2)`.
    pub fn rotate(&self, phi: f64) -> Self {
        Self::new(
            self.alpha[0] * Complex64::from_polar(1.0, phi),
            self.alpha[1] * Complex64::from_polar(1.0, 2.0 * phi),
        )
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.alpha[0] * factor, self.alpha[1] * factor)
    }

    /// Real coordinates `(Re a1, Im a1, Re a2, Im a2)`.
    pub fn to_real(&self) -> [f64; 4] {
        [self.alpha[0].re, self.alpha[0].im, self.alpha[1].re, self.alpha[1].im]
    }

    pub fn from_real(x: [f64; 4]) -> Self {
        Self::new(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]))
    }
}

impl Add for FieldState {
    type Output = FieldState;
    fn add(self, o: FieldState) -> FieldState {
        FieldState::new(self.alpha[0] + o.alpha[0], self.alpha[1] + o.alpha[1])
    }
}

impl Sub for FieldState {
    type Output = FieldState;
    fn sub(self, o: FieldState) -> FieldState {
        FieldState::new(self.alpha[0] - o.alpha[0], self.alpha[1] - o.alpha[1])
    }
}

impl Mul<f64> for FieldState {
    type Output = FieldState;
    fn mul(self, s: f64) -> FieldState {
        self.scale(s)
    }
}

/// Time derivative of the mean fields,
///
/// ```text
/// i da1/dt = (w1 + i g1/2 + (U1 - i e1)|a1|^2) a1 - 2 J a1* a2
/// i da2/dt = (w2 + i g2/2 + (U2 - i e2)|a2|^2) a2 - J a1^2
/// ```
///
/// with an extra `-kappa_k/2 a_k` when single-photon loss is enabled.
pub fn gpe_drift(state: &FieldState, p: &ModelParams) -> FieldState {
    let [a1, a2] = state.alpha;
    let lin = |k: usize, a: Complex64| {
        Complex64::new(p.omega[k], 0.5 * p.pump[k]) + Complex64::new(p.kerr[k], -p.two_photon_loss[k]) * a.norm_sqr()
    };
    let d1 = -I * (lin(0, a1) * a1 - 2.0 * p.tunneling * a1.conj() * a2) - 0.5 * p.single_photon_loss[0] * a1;
    let d2 = -I * (lin(1, a2) * a2 - p.tunneling * a1 * a1) - 0.5 * p.single_photon_loss[1] * a2;
    FieldState::new(d1, d2)
}

/// Jacobian of [`gpe_drift`] in the real coordinates of [`FieldState::to_real`].
pub fn gpe_jacobian(state: &FieldState, p: &ModelParams) -> Matrix4<f64> {
    let [a1, a2] = state.alpha;
    let j = p.tunneling;
    let nl = |k: usize| Complex64::new(p.kerr[k], -p.two_photon_loss[k]);
    let base = |k: usize| Complex64::new(p.omega[k], 0.5 * p.pump[k]);
    // Wirtinger derivatives: df/dz (holomorphic) and df/dz*.
    let d11 = -I * (base(0) + 2.0 * nl(0) * a1.norm_sqr()) - 0.5 * p.single_photon_loss[0];
    let d11c = -I * (nl(0) * a1 * a1 - 2.0 * j * a2);
    let d12 = 2.0 * I * j * a1.conj();
    let d12c = Complex64::new(0.0, 0.0);
    let d22 = -I * (base(1) + 2.0 * nl(1) * a2.norm_sqr()) - 0.5 * p.single_photon_loss[1];
    let d22c = -I * nl(1) * a2 * a2;
    let d21 = 2.0 * I * j * a1;
    let d21c = Complex64::new(0.0, 0.0);

    let mut m = Matrix4::zeros();
    let blocks = [[(d11, d11c), (d12, d12c)], [(d21, d21c), (d22, d22c)]];
    for (r, row) in blocks.iter().enumerate() {
        for (c, &(a, b)) in row.iter().enumerate() {
            // f = A dz + B dz*, dz = dx + i dy.
            let s = a + b;
            let d = a - b;
            m[(2 * r, 2 * c)] = s.re;
            m[(2 * r, 2 * c + 1)] = -d.im;
            m[(2 * r + 1, 2 * c)] = s.im;
            m[(2 * r + 1, 2 * c + 1)] = d.re;
        }
    }
    m
}

/// One classical fourth-order Runge-Kutta step of the mean-field equations.
pub fn rk4_step(state: &FieldState, p: &ModelParams, dt: f64) -> FieldState {
    let k1 = gpe_drift(state, p);
    let k2 = gpe_drift(&(*state + k1 * (0.5 * dt)), p);
    let k3 = gpe_drift(&(*state + k2 * (0.5 * dt)), p);
    let k4 = gpe_drift(&(*state + k3 * dt), p);
    *state + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Sampled mean-field trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FieldState>,
    pub params: ModelParams,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample spacing, assuming a uniform grid.
    pub fn sample_dt(&self) -> Option<f64> {
        (self.times.len() >= 2).then(|| self.times[1] - self.times[0])
    }

    /// Copy restricted to samples with `t >= t_from`.
    pub fn after(&self, t_from: f64) -> Trajectory {
        let start = self.times.partition_point(|&t| t < t_from);
        Trajectory { times: self.times[start..].to_vec(), states: self.states[start..].to_vec(), params: self.params }
    }

    pub fn last(&self) -> Option<&FieldState> {
        self.states.last()
    }
}

/// Fixed-step RK4 integration, sampled every `stride` steps (the initial
/// state is always the first sample).
pub fn integrate_gpe(
    initial: FieldState,
    params: &ModelParams,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain(format!("t_end must be > 0, got {t_end}")));
    }
    if !initial.is_finite() {
        return Err(Error::Domain("initial state is not finite".into()));
    }
    let stride = stride.max(1);
    let n_steps = (t_end / dt).round() as usize;
    let cap = n_steps / stride + 1;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    times.push(0.0);
    states.push(initial);
    let mut s = initial;
    for step in 1..=n_steps {
        s = rk4_step(&s, params, dt);
        let norm = s.max_norm();
        if !(norm < DIVERGENCE_THRESHOLD) {
            return Err(Error::Divergence { time: step as f64 * dt, magnitude: norm });
        }
        if step % stride == 0 {
            times.push(step as f64 * dt);
            states.push(s);
        }
    }
    Ok(Trajectory { times, states, params: *params })
}
