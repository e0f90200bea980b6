//! Model parameters for two coupled Kerr cavities with incoherent pumping and
//! two-photon loss, plus the quantum-to-classical rescalings.
//!
//! Parameters are always held in physical (unscaled) form. The tilde forms
//! only exist at the configuration boundary and are converted with
//! [`rescale_params`] or [`dual_rescale_params`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical rates and frequencies. Index 0 is cavity 1, index 1 is cavity 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: [f64; 2],
    /// On-site Kerr strength `U_k`.
    pub kerr: [f64; 2],
    /// Nonlinear tunneling `J` of the `a1†² a2 + h.c.` term.
    pub tunneling: f64,
    /// Incoherent pump rate `gamma_k` (jump operator `a_k†`).
    pub pump: [f64; 2],
    /// Two-photon loss rate `eta_k` (jump operator `a_k²`).
    pub two_photon_loss: [f64; 2],
    /// Single-photon loss rate `kappa_k`; zero disables the channel.
    pub single_photon_loss: [f64; 2],
    /// Thermal occupation of the single-photon loss bath.
    pub n_thermal: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega: [1.0, 1.0],
            kerr: [0.1, 0.1],
            tunneling: 0.4,
            pump: [1.0, 1.0],
            two_photon_loss: [1.0, 1.0],
            single_photon_loss: [0.0, 0.0],
            n_thermal: 0.0,
        }
    }
}

impl ModelParams {
    /// Same parameters with both cavity frequencies set to `omega`.
    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = [omega, omega];
        self
    }

    fn values(&self) -> [(&'static str, f64); 12] {
        [
            ("omega_1", self.omega[0]),
            ("omega_2", self.omega[1]),
            ("U_1", self.kerr[0]),
            ("U_2", self.kerr[1]),
            ("J", self.tunneling),
            ("gamma_1", self.pump[0]),
            ("gamma_2", self.pump[1]),
            ("eta_1", self.two_photon_loss[0]),
            ("eta_2", self.two_photon_loss[1]),
            ("kappa_1", self.single_photon_loss[0]),
            ("kappa_2", self.single_photon_loss[1]),
            ("n_th", self.n_thermal),
        ]
    }

    /// Checks finiteness, non-negative rates and `eta_k > 0`.
    ///
    /// Frequencies may carry any sign; every rate and coupling must be
    /// non-negative.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.values() {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
            if !name.starts_with("omega") && v < 0.0 {
                return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (k, eta) in self.two_photon_loss.iter().enumerate() {
            if *eta <= 0.0 {
                return Err(Error::Domain(format!("eta_{} must be > 0 to stabilise the pump, got {eta}", k + 1)));
            }
        }
        Ok(())
    }

    /// Whether any single-photon loss or thermal channel is active.
    pub fn has_extension(&self) -> bool {
        self.single_photon_loss.iter().any(|&k| k > 0.0)
    }
}

/// Rescaled (tilde) parameters, same layout as [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TildeParams(pub ModelParams);

impl TildeParams {
    pub fn validate(&self) -> Result<()> {
        self.0.validate()
    }
}

impl std::ops::Deref for TildeParams {
    type Target = ModelParams;
    fn deref(&self) -> &ModelParams {
        &self.0
    }
}

/// Dimensionless quantum-to-classical scaling parameter; the classical limit
/// is `aleph -> inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Aleph(f64);

impl Aleph {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("aleph must be finite and > 0, got {value}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn sqrt(self) -> f64 {
        self.0.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingMode {
    /// `U = U~/aleph`, `J = J~/sqrt(aleph)`, `eta = eta~/aleph`.
    #[default]
    Standard,
    /// `omega = omega~ aleph`, `J = J~ sqrt(aleph)`, `gamma = gamma~ aleph`.
    Dual,
}

/// Standard rescaling. Frequencies and pump rates pass through; single-photon
/// loss is a linear rate and passes through as well.
pub fn rescale_params(tilde: &TildeParams, aleph: Aleph) -> Result<ModelParams> {
    tilde.validate()?;
    let a = aleph.get();
    let t = tilde.0;
    Ok(ModelParams {
        kerr: t.kerr.map(|u| u / a),
        tunneling: t.tunneling / a.sqrt(),
        two_photon_loss: t.two_photon_loss.map(|e| e / a),
        ..t
    })
}

/// Dual rescaling, where frequencies and pump grow with `aleph` instead of the
/// nonlinearities shrinking.
pub fn dual_rescale_params(tilde: &TildeParams, aleph: Aleph) -> Result<ModelParams> {
    tilde.validate()?;
    let a = aleph.get();
    let t = tilde.0;
    Ok(ModelParams {
        omega: t.omega.map(|w| w * a),
        tunneling: t.tunneling * a.sqrt(),
        pump: t.pump.map(|g| g * a),
        ..t
    })
}

/// Applies the rescaling selected by `mode`.
pub fn apply_scaling(tilde: &TildeParams, aleph: Aleph, mode: ScalingMode) -> Result<ModelParams> {
    match mode {
        ScalingMode::Standard => rescale_params(tilde, aleph),
        ScalingMode::Dual => dual_rescale_params(tilde, aleph),
    }
}

/// Inverse of [`rescale_params`].
pub fn unscale_params(params: &ModelParams, aleph: Aleph) -> TildeParams {
    let a = aleph.get();
    TildeParams(ModelParams {
        kerr: params.kerr.map(|u| u * a),
        tunneling: params.tunneling * a.sqrt(),
        two_photon_loss: params.two_photon_loss.map(|e| e * a),
        ..*params
    })
}

/// Inverse of [`dual_rescale_params`].
pub fn dual_unscale_params(params: &ModelParams, aleph: Aleph) -> TildeParams {
    let a = aleph.get();
    TildeParams(ModelParams {
        omega: params.omega.map(|w| w / a),
        tunneling: params.tunneling / a.sqrt(),
        pump: params.pump.map(|g| g / a),
        ..*params
    })
}

/// Frequencies marking the two reference regimes of the default sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepMarkers {
    pub limit_cycle_omega: f64,
    pub limit_torus_omega: f64,
}

/// The symmetric reference parameter set (`omega = 1`, `U = 0.1`, `J = 0.4`,
/// `gamma = eta = 1`) with its regime markers.
pub fn default_params() -> (TildeParams, SweepMarkers) {
    (TildeParams(ModelParams::default()), SweepMarkers { limit_cycle_omega: 0.8, limit_torus_omega: 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tilde(u: f64, j: f64, eta: f64) -> TildeParams {
        TildeParams(ModelParams { kerr: [u, u], tunneling: j, two_photon_loss: [eta, eta], ..ModelParams::default() })
    }

    #[test]
    fn identity_at_unit_aleph() {
        let t = tilde(0.3, 0.7, 2.0);
        let one = Aleph::new(1.0).unwrap();
        assert_eq!(rescale_params(&t, one).unwrap(), t.0);
        assert_eq!(dual_rescale_params(&t, one).unwrap(), t.0);
    }

    #[test]
    fn standard_rescaling_values() {
        let p = rescale_params(&tilde(0.1, 0.4, 1.0), Aleph::new(100.0).unwrap()).unwrap();
        assert!((p.kerr[0] - 0.001).abs() < 1e-15);
        assert!((p.tunneling - 0.04).abs() < 1e-15);
        assert!((p.two_photon_loss[1] - 0.01).abs() < 1e-15);
        assert_eq!(p.omega, [1.0, 1.0]);
        assert_eq!(p.pump, [1.0, 1.0]);
    }

    #[test]
    fn tunneling_divisor_is_square_root() {
        let t = tilde(0.1, 0.4, 1.0);
        let j4 = rescale_params(&t, Aleph::new(4.0).unwrap()).unwrap().tunneling;
        let j16 = rescale_params(&t, Aleph::new(16.0).unwrap()).unwrap().tunneling;
        assert!((j16 - j4 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn dual_rescaling_values() {
        let p = dual_rescale_params(&tilde(0.1, 0.4, 1.0), Aleph::new(4.0).unwrap()).unwrap();
        assert_eq!(p.omega, [4.0, 4.0]);
        assert_eq!(p.pump, [4.0, 4.0]);
        assert!((p.tunneling - 0.8).abs() < 1e-15);
        assert_eq!(p.kerr, [0.1, 0.1]);
    }

    #[test]
    fn rejects_bad_aleph_and_params() {
        assert!(Aleph::new(0.0).is_err());
        assert!(Aleph::new(-1.0).is_err());
        assert!(Aleph::new(f64::NAN).is_err());
        let mut p = ModelParams::default();
        p.two_photon_loss[0] = 0.0;
        assert!(p.validate().is_err());
        let mut p = ModelParams::default();
        p.pump[1] = -0.1;
        assert!(p.validate().is_err());
        let mut p = ModelParams::default();
        p.kerr[1] = f64::INFINITY;
        assert!(p.validate().is_err());
    }

    #[test]
    fn default_markers() {
        let (t, m) = default_params();
        assert_eq!(t.two_photon_loss, [1.0, 1.0]);
        assert_eq!(m.limit_cycle_omega, 0.8);
        assert_eq!(m.limit_torus_omega, 1.0);
    }

    proptest::proptest! {
        #[test]
        fn rescale_round_trip(log_a in -3.0f64..9.0, u in 0.0f64..2.0, j in 0.0f64..2.0, eta in 0.01f64..5.0) {
            let a = Aleph::new(10f64.powf(log_a)).unwrap();
            let t = tilde(u, j, eta);
            let back = unscale_params(&rescale_params(&t, a).unwrap(), a);
            proptest::prop_assert!((back.kerr[0] - u).abs() <= 1e-14 * u.max(1.0));
            proptest::prop_assert!((back.tunneling - j).abs() <= 1e-14 * j.max(1.0));
            proptest::prop_assert!((back.two_photon_loss[1] - eta).abs() <= 1e-14 * eta.max(1.0));
            let back = dual_unscale_params(&dual_rescale_params(&t, a).unwrap(), a);
            proptest::prop_assert!((back.omega[0] - 1.0).abs() <= 1e-14);
            proptest::prop_assert!((back.tunneling - j).abs() <= 1e-14 * j.max(1.0));
        }
    }
}
