use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_leakage, DensityMatrix, SparseSuperoperator};
use crate::error::{Error, Result};

/// Eigenvalues below this modulus count as zero.
pub const UNIQUENESS_TOL: f64 = 1e-10;
/// Largest tolerated trace change during evolution.
pub const EVOLVE_TRACE_TOL: f64 = 1e-9;
const LEAKAGE_TOL: f64 = 1e-6;

/// The generator restricted to matrix units `|i><j|` of fixed charge
/// `q = N(i) - N(j)`, `N = n1 + 2 n2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeBlock {
    pub charge: i64,
    /// Vectorised indices `i + d j` belonging to the block, ascending.
    pub indices: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

fn unit_charge(l: &SparseSuperoperator, s: usize) -> i64 {
    l.cutoff.charge(s % l.dim) - l.cutoff.charge(s / l.dim)
}

/// Splits the generator into U(1) charge sectors. Fails if any element
/// connects different sectors.
pub fn block_decompose(l: &SparseSuperoperator) -> Result<Vec<ChargeBlock>> {
    let n = l.dim * l.dim;
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for s in 0..n {
        groups.entry(unit_charge(l, s)).or_default().push(s);
    }
    let mut local = vec![0usize; n];
    for idx in groups.values() {
        for (k, &s) in idx.iter().enumerate() {
            local[s] = k;
        }
    }
    let mut blocks: BTreeMap<i64, ChargeBlock> = groups
        .into_iter()
        .map(|(q, idx)| {
            let m = idx.len();
            (q, ChargeBlock { charge: q, indices: idx, matrix: DMatrix::zeros(m, m) })
        })
        .collect();
    for &(r, c, v) in &l.matrix.entries {
        let (qr, qc) = (unit_charge(l, r), unit_charge(l, c));
        if qr != qc {
            return Err(Error::Domain(format!("generator couples charge sectors {qc} -> {qr}")));
        }
        blocks.get_mut(&qr).unwrap().matrix[(local[r], local[c])] += v;
    }
    Ok(blocks.into_values().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvillianSpectrum {
    /// `(charge, eigenvalue)`, sorted by `|Re|` then `|Im|`.
    pub eigenvalues: Vec<(i64, Complex64)>,
}

impl LiouvillianSpectrum {
    pub fn zero_count(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|e| e.1.norm() < tol).count()
    }

    pub fn lowest(&self, k: usize) -> Vec<Complex64> {
        self.eigenvalues.iter().take(k).map(|e| e.1).collect()
    }
}

fn block_eigenvalues(b: &ChargeBlock) -> Result<Vec<Complex64>> {
    let n = b.matrix.nrows();
    if n == 1 {
        return Ok(vec![b.matrix[(0, 0)]]);
    }
    let max_iter = 200 * n;
    let schur = nalgebra::linalg::Schur::try_new(b.matrix.clone(), 1e-15, max_iter).ok_or_else(|| {
        Error::Fit(format!("Schur iteration for charge {} ({n}x{n}) exceeded {max_iter} sweeps", b.charge))
    })?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().cloned().collect())
}

/// Full spectrum by dense Schur decomposition of every charge sector.
pub fn spectrum(l: &SparseSuperoperator) -> Result<LiouvillianSpectrum> {
    let blocks = block_decompose(l)?;
    let parts: Vec<Vec<(i64, Complex64)>> = blocks
        .par_iter()
        .map(|b| Ok(block_eigenvalues(b)?.into_iter().map(|e| (b.charge, e)).collect()))
        .collect::<Result<_>>()?;
    let mut eigenvalues: Vec<(i64, Complex64)> = parts.concat();
    eigenvalues.sort_by(|a, b| {
        a.1.re
            .abs()
            .total_cmp(&b.1.re.abs())
            .then(a.1.im.abs().total_cmp(&b.1.im.abs()))
            .then(a.1.im.total_cmp(&b.1.im))
    });
    Ok(LiouvillianSpectrum { eigenvalues })
}

/// The `k >= 5` eigenvalues with smallest `|Re|`.
pub fn low_spectrum(l: &SparseSuperoperator, k: usize) -> Result<Vec<Complex64>> {
    if k < 5 {
        return Err(Error::Domain(format!("low_spectrum needs k >= 5, got {k}")));
    }
    Ok(spectrum(l)?.lowest(k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `||L rho||_2`.
    pub residual: f64,
    pub zero_eigenvalues: usize,
    pub min_eigenvalue: f64,
    pub leakage: f64,
    pub mean_occupation: [f64; 2],
    pub purity: f64,
}

pub fn steady_state(l: &SparseSuperoperator) -> Result<SteadyState> {
    let sp = spectrum(l)?;
    steady_state_from(l, &sp)
}

/// Steady state given an already computed spectrum (used for the
/// uniqueness check).
pub fn steady_state_from(l: &SparseSuperoperator, sp: &LiouvillianSpectrum) -> Result<SteadyState> {
    let zeros = sp.zero_count(UNIQUENESS_TOL);
    if zeros != 1 {
        return Err(Error::NonUnique { count: zeros, tol: UNIQUENESS_TOL });
    }
    let d = l.dim;
    let block = block_decompose(l)?.into_iter().find(|b| b.charge == 0).expect("charge-0 sector always exists");
    let mut a = block.matrix.clone();
    let m = a.nrows();
    // Trace condition replaces the first (diagonal-unit) equation.
    for k in 0..m {
        let s = block.indices[k];
        a[(0, k)] = if s % d == s / d { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let mut rhs = DVector::zeros(m);
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = a.lu().solve(&rhs).ok_or_else(|| Error::Fit("steady-state system is singular".into()))?;
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for (k, &s) in block.indices.iter().enumerate() {
        v[s] = x[k];
    }
    let mut rho = DensityMatrix::from_vec(l.cutoff, &v);
    rho.hermitize();
    let tr = rho.trace();
    rho.data /= tr;
    let r = l.matrix.mul_vec(&rho.to_vec());
    let residual = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let leakage = check_leakage(&rho, LEAKAGE_TOL);
    Ok(SteadyState {
        min_eigenvalue: rho.eigenvalues()[0],
        mean_occupation: [rho.mean_occupation(1), rho.mean_occupation(2)],
        purity: rho.purity(),
        rho,
        residual,
        zero_eigenvalues: zeros,
        leakage,
    })
}

/// `rho(t) = exp(L t) rho0` at each time of the non-decreasing, non-negative
/// grid, by exact exponentiation of every populated charge sector.
pub fn evolve_master(rho0: &DensityMatrix, l: &SparseSuperoperator, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("time grid must be non-negative and non-decreasing".into()));
    }
    let d = l.dim;
    let v0 = rho0.to_vec();
    let blocks = block_decompose(l)?;
    let steps: Vec<f64> = times
        .iter()
        .scan(0.0, |prev, &t| {
            let dt = t - *prev;
            *prev = t;
            Some(dt)
        })
        .collect();

    let evolved: Vec<(Vec<usize>, Vec<DVector<Complex64>>)> = blocks
        .par_iter()
        .filter_map(|b| {
            let x0 = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&s| v0[s]));
            if x0.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                return None;
            }
            let mut cache: HashMap<u64, DMatrix<Complex64>> = HashMap::new();
            let mut x = x0;
            let mut out = Vec::with_capacity(steps.len());
            for &dt in &steps {
                if dt > 0.0 {
                    let prop = cache.entry(dt.to_bits()).or_insert_with(|| (&b.matrix * Complex64::new(dt, 0.0)).exp());
                    x = &*prop * x;
                }
                out.push(x.clone());
            }
            Some((b.indices.clone(), out))
        })
        .collect();

    let tr0 = rho0.trace();
    let mut series = Vec::with_capacity(times.len());
    let mut drift = 0.0f64;
    for k in 0..times.len() {
        let mut v = vec![Complex64::new(0.0, 0.0); d * d];
        for (idx, xs) in &evolved {
            for (p, &s) in idx.iter().enumerate() {
                v[s] = xs[k][p];
            }
        }
        let rho = DensityMatrix::from_vec(l.cutoff, &v);
        drift = drift.max((rho.trace() - tr0).norm());
        series.push(rho);
    }
    if drift > EVOLVE_TRACE_TOL {
        return Err(Error::TraceDrift { drift, tol: EVOLVE_TRACE_TOL });
    }
    Ok(series)
}
