//! Exact Lindblad dynamics in a truncated two-mode Fock space.
//!
//! Basis states `|n1, n2>` are indexed `n1 + (N1 + 1) n2`. Density matrices
//! are vectorised by stacking columns, `vec(rho)[i + d j] = rho[i, j]`, so
//! `vec(A rho B) = (B^T (x) A) vec(rho)`.

mod solve;
mod sparse;

pub use solve::{
    block_decompose, evolve_master, low_spectrum, spectrum, steady_state, steady_state_from, ChargeBlock,
    LiouvillianSpectrum, SteadyState, EVOLVE_TRACE_TOL, UNIQUENESS_TOL,
};
pub use sparse::SparseMatrix;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockCutoff {
    pub n_max_1: usize,
    pub n_max_2: usize,
}

impl FockCutoff {
    pub fn new(n_max_1: usize, n_max_2: usize) -> Result<Self> {
        if n_max_1 < 2 || n_max_2 < 2 {
            return Err(Error::Domain(format!("Fock cutoff must be >= 2 per mode, got ({n_max_1}, {n_max_2})")));
        }
        Ok(Self { n_max_1, n_max_2 })
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        (self.n_max_1 + 1) * (self.n_max_2 + 1)
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 + (self.n_max_1 + 1) * n2
    }

    pub fn occupations(&self, i: usize) -> (usize, usize) {
        (i % (self.n_max_1 + 1), i / (self.n_max_1 + 1))
    }

    /// U(1) charge `n1 + 2 n2` of basis state `i`.
    pub fn charge(&self, i: usize) -> i64 {
        let (a, b) = self.occupations(i);
        (a + 2 * b) as i64
    }

    /// Annihilation operator of mode `mode` (1 or 2).
    pub fn annihilation(&self, mode: usize) -> SparseMatrix {
        let d = self.dim();
        let mut e = Vec::new();
        for i in 0..d {
            let (n1, n2) = self.occupations(i);
            let (n, target) = match mode {
                1 if n1 > 0 => (n1, self.index(n1 - 1, n2)),
                2 if n2 > 0 => (n2, self.index(n1, n2 - 1)),
                _ => continue,
            };
            e.push((target, i, Complex64::new((n as f64).sqrt(), 0.0)));
        }
        SparseMatrix::new(d, d, e)
    }

    pub fn number(&self, mode: usize) -> SparseMatrix {
        let a = self.annihilation(mode);
        a.adjoint().mul(&a)
    }
}

/// `H = sum_k w_k n_k + U_k/2 a_k^+2 a_k^2 - J (a1^+2 a2 + a2^+ a1^2)`.
pub fn build_hamiltonian(params: &ModelParams, cutoff: FockCutoff) -> SparseMatrix {
    let d = cutoff.dim();
    let a = [cutoff.annihilation(1), cutoff.annihilation(2)];
    let mut h = SparseMatrix::zeros(d, d);
    for k in 0..2 {
        let ad = a[k].adjoint();
        let n = ad.mul(&a[k]);
        let kerr = ad.mul(&ad).mul(&a[k]).mul(&a[k]);
        h = h
            .add(&n.scale(Complex64::new(params.omega[k], 0.0)))
            .add(&kerr.scale(Complex64::new(0.5 * params.kerr[k], 0.0)));
    }
    let a1d = a[0].adjoint();
    let hop = a1d.mul(&a1d).mul(&a[1]);
    h.add(&hop.add(&hop.adjoint()).scale(Complex64::new(-params.tunneling, 0.0)))
}

/// Jump operators with their rates folded in as `sqrt(rate) L`.
pub fn jump_operators(params: &ModelParams, cutoff: FockCutoff) -> Vec<SparseMatrix> {
    let mut out = Vec::new();
    for k in 0..2 {
        let a = cutoff.annihilation(k + 1);
        let ad = a.adjoint();
        let channels = [
            (params.pump[k], ad.clone()),
            (params.two_photon_loss[k], a.mul(&a)),
            (params.single_photon_loss[k] * (1.0 + params.n_thermal), a.clone()),
            (params.single_photon_loss[k] * params.n_thermal, ad),
        ];
        for (rate, op) in channels {
            if rate > 0.0 {
                out.push(op.scale(Complex64::new(rate.sqrt(), 0.0)));
            }
        }
    }
    out
}

/// Vectorised Lindblad generator on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSuperoperator {
    pub cutoff: FockCutoff,
    /// Hilbert-space dimension `d`; the matrix is `d^2 x d^2`.
    pub dim: usize,
    pub matrix: SparseMatrix,
}

impl SparseSuperoperator {
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let v = self.matrix.mul_vec(&rho.to_vec());
        DensityMatrix::from_vec(self.cutoff, &v)
    }
}

/// `L rho = -i [H, rho] + sum_c (c rho c^+ - {c^+ c, rho} / 2)`.
pub fn build_liouvillian(params: &ModelParams, cutoff: FockCutoff) -> Result<SparseSuperoperator> {
    params.validate()?;
    let d = cutoff.dim();
    let id = SparseMatrix::identity(d);
    let h = build_hamiltonian(params, cutoff);
    let mi = Complex64::new(0.0, -1.0);
    let mut l = id.kron(&h).scale(mi).add(&h.transpose().kron(&id).scale(-mi));
    for c in jump_operators(params, cutoff) {
        let cdc = c.adjoint().mul(&c);
        let half = Complex64::new(-0.5, 0.0);
        l = l.add(&c.conj().kron(&c)).add(&id.kron(&cdc).scale(half)).add(&cdc.transpose().kron(&id).scale(half));
    }
    Ok(SparseSuperoperator { cutoff, dim: d, matrix: l })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub cutoff: FockCutoff,
    pub data: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_vec(cutoff: FockCutoff, v: &[Complex64]) -> Self {
        let d = cutoff.dim();
        Self { cutoff, data: DMatrix::from_column_slice(d, d, v) }
    }

    pub fn to_vec(&self) -> Vec<Complex64> {
        self.data.as_slice().to_vec()
    }

    /// Product coherent state `|a1, a2>` projected on the cutoff and
    /// renormalised.
    pub fn coherent(cutoff: FockCutoff, alpha: [Complex64; 2]) -> Self {
        let d = cutoff.dim();
        let amp = |a: Complex64, n: usize| {
            let mut z = Complex64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
            for k in 1..=n {
                z *= a / (k as f64).sqrt();
            }
            z
        };
        let mut psi: Vec<Complex64> = (0..d)
            .map(|i| {
                let (n1, n2) = cutoff.occupations(i);
                amp(alpha[0], n1) * amp(alpha[1], n2)
            })
            .collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|z| *z /= norm);
        let v = nalgebra::DVector::from_vec(psi);
        Self { cutoff, data: &v * v.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.data * &self.data).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_modulus(&(&self.data - self.data.adjoint()))
    }

    pub fn hermitize(&mut self) {
        self.data = (&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0);
    }

    pub fn mean_occupation(&self, mode: usize) -> f64 {
        (0..self.cutoff.dim())
            .map(|i| {
                let (n1, n2) = self.cutoff.occupations(i);
                let n = if mode == 1 { n1 } else { n2 };
                n as f64 * self.data[(i, i)].re
            })
            .sum()
    }

    /// Eigenvalues of the hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut h = self.clone();
        h.hermitize();
        let mut e: Vec<f64> = h.data.symmetric_eigenvalues().iter().cloned().collect();
        e.sort_by(|a, b| a.total_cmp(b));
        e
    }

    /// `||rho - sigma||_1 / 2`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let mut diff = DensityMatrix { cutoff: self.cutoff, data: &self.data - &other.data };
        diff.hermitize();
        0.5 * diff.eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Largest marginal population in the two highest Fock levels of either mode.
    pub fn cutoff_leakage(&self) -> f64 {
        let c = self.cutoff;
        let mut top = [0.0f64; 2];
        for i in 0..c.dim() {
            let (n1, n2) = c.occupations(i);
            let p = self.data[(i, i)].re;
            if n1 + 1 >= c.n_max_1 {
                top[0] += p;
            }
            if n2 + 1 >= c.n_max_2 {
                top[1] += p;
            }
        }
        top[0].max(top[1])
    }
}

/// Largest entry modulus.
pub fn max_modulus(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Warns when the cutoff visibly truncates `rho`.
pub fn check_leakage(rho: &DensityMatrix, tol: f64) -> f64 {
    let leak = rho.cutoff_leakage();
    if leak >= tol {
        warn!("top two Fock levels hold population {leak:.3e} >= {tol:.0e}; raise the cutoff");
    }
    leak
}
