use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::{gpe_drift, gpe_jacobian, rk4_step, FieldState, DIVERGENCE_THRESHOLD};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    pub dt: f64,
    /// Time integrated before tangent vectors are tracked.
    pub transient: f64,
    /// Interval between QR re-orthonormalisations.
    pub renorm_interval: f64,
    /// Averaging time after the transient.
    pub total_time: f64,
    /// Number of blocks used for the convergence estimate.
    pub blocks: usize,
    /// Block-error threshold above which the result is flagged.
    pub tolerance: f64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self { dt: 1e-3, transient: 100.0, renorm_interval: 1.0, total_time: 1e4, blocks: 10, tolerance: 2.5e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovSpectrum {
    /// Four exponents in descending order.
    pub exponents: [f64; 4],
    /// Largest standard error of the block means.
    pub convergence_error: f64,
    pub converged: bool,
}

impl LyapunovSpectrum {
    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }

    /// Number of exponents with `|lambda| < zero_tol`.
    pub fn zero_count(&self, zero_tol: f64) -> usize {
        self.exponents.iter().filter(|l| l.abs() < zero_tol).count()
    }
}

fn tangent_rk4(s: &FieldState, q: &Matrix4<f64>, p: &ModelParams, dt: f64) -> (FieldState, Matrix4<f64>) {
    let k1 = gpe_drift(s, p);
    let t1 = gpe_jacobian(s, p) * q;
    let s2 = *s + k1 * (0.5 * dt);
    let k2 = gpe_drift(&s2, p);
    let t2 = gpe_jacobian(&s2, p) * (q + t1 * (0.5 * dt));
    let s3 = *s + k2 * (0.5 * dt);
    let k3 = gpe_drift(&s3, p);
    let t3 = gpe_jacobian(&s3, p) * (q + t2 * (0.5 * dt));
    let s4 = *s + k3 * dt;
    let k4 = gpe_drift(&s4, p);
    let t4 = gpe_jacobian(&s4, p) * (q + t3 * dt);
    (*s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0), q + (t1 + t2 * 2.0 + t3 * 2.0 + t4) * (dt / 6.0))
}

fn check(s: &FieldState, t: f64) -> Result<()> {
    let norm = s.max_norm();
    if norm < DIVERGENCE_THRESHOLD {
        Ok(())
    } else {
        Err(Error::Divergence { time: t, magnitude: norm })
    }
}

/// Benettin-style Lyapunov spectrum: the tangent flow of the analytic
/// Jacobian is integrated alongside the orbit and re-orthonormalised by QR
/// every `renorm_interval`; exponents are averaged log stretch factors.
pub fn lyapunov_spectrum(
    params: &ModelParams,
    initial: FieldState,
    opts: &LyapunovOptions,
) -> Result<LyapunovSpectrum> {
    if !(opts.dt > 0.0) || !(opts.renorm_interval >= opts.dt) || !(opts.total_time > 0.0) {
        return Err(Error::Domain(format!("invalid Lyapunov options {opts:?}")));
    }
    let dt = opts.dt;
    let mut s = initial;
    let n_transient = (opts.transient / dt).round() as usize;
    for step in 1..=n_transient {
        s = rk4_step(&s, params, dt);
        if step % 1000 == 0 {
            check(&s, step as f64 * dt)?;
        }
    }
    check(&s, opts.transient)?;

    let steps_per_renorm = (opts.renorm_interval / dt).round().max(1.0) as usize;
    let interval = steps_per_renorm as f64 * dt;
    let n_renorm = ((opts.total_time / interval).round() as usize).max(1);
    let blocks = opts.blocks.clamp(1, n_renorm);
    let per_block = n_renorm / blocks;

    let mut q = Matrix4::<f64>::identity();
    let mut total = [0.0; 4];
    let mut block_sums = vec![[0.0; 4]; blocks];
    for r in 0..n_renorm {
        for _ in 0..steps_per_renorm {
            let (ns, nq) = tangent_rk4(&s, &q, params, dt);
            s = ns;
            q = nq;
        }
        check(&s, opts.transient + (r + 1) as f64 * interval)?;
        let qr = q.qr();
        let rmat = qr.r();
        let mut qm = qr.q();
        for i in 0..4 {
            let d = rmat[(i, i)];
            let l = d.abs().ln();
            total[i] += l;
            block_sums[(r / per_block).min(blocks - 1)][i] += l;
            if d < 0.0 {
                qm.column_mut(i).neg_mut();
            }
        }
        q = qm;
    }
    let time = n_renorm as f64 * interval;
    let mut exponents = total.map(|v| v / time);
    exponents.sort_by(|a, b| b.total_cmp(a));

    // Block means of the (unsorted) Gram-Schmidt columns; columns keep their
    // ordering after the transient of the tangent flow.
    let mut convergence_error: f64 = 0.0;
    if blocks >= 2 {
        let block_time = per_block as f64 * interval;
        for i in 0..4 {
            let means: Vec<f64> = block_sums[..blocks - 1].iter().map(|b| b[i] / block_time).collect();
            let m = means.len() as f64;
            if m < 2.0 {
                continue;
            }
            let mu = means.iter().sum::<f64>() / m;
            let var = means.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (m - 1.0);
            convergence_error = convergence_error.max((var / m).sqrt());
        }
    }
    Ok(LyapunovSpectrum { exponents, convergence_error, converged: convergence_error <= opts.tolerance })
}
