use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{sample_initial, EnsembleConfig, Monomial, NoiseDraw, TwaCouplings, DIVERGENCE_THRESHOLD};
use crate::error::{Error, Result};
use crate::meanfield::FieldState;
use crate::model::ModelParams;
use crate::rng::stream;

/// Trajectories per work unit. Partial sums are formed per chunk in index
/// order and merged in chunk order, so results do not depend on threads.
const CHUNK: usize = 64;

/// Streamed sums over the surviving trajectories, one entry per sample time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reductions {
    pub count: usize,
    pub sum_occupation: [Vec<f64>; 2],
    pub min_occupation: [Vec<f64>; 2],
    pub max_occupation: [Vec<f64>; 2],
    pub sum_alpha: [Vec<Complex64>; 2],
    /// Sum of `alpha_1 / |alpha_1|` (angle about the phase-space origin).
    pub sum_phasor: Vec<Complex64>,
    /// Sum of `alpha_1*(t) alpha_1(t0)`; zero for `t < t0`.
    pub sum_correlation: Vec<Complex64>,
    pub sum_monomials: Vec<Vec<Complex64>>,
}

impl Reductions {
    fn new(n: usize, n_monomials: usize) -> Self {
        let zc = vec![Complex64::new(0.0, 0.0); n];
        Self {
            count: 0,
            sum_occupation: [vec![0.0; n], vec![0.0; n]],
            min_occupation: [vec![f64::INFINITY; n], vec![f64::INFINITY; n]],
            max_occupation: [vec![f64::NEG_INFINITY; n], vec![f64::NEG_INFINITY; n]],
            sum_alpha: [zc.clone(), zc.clone()],
            sum_phasor: zc.clone(),
            sum_correlation: zc.clone(),
            sum_monomials: vec![zc; n_monomials],
        }
    }

    fn add_trajectory(&mut self, states: &[FieldState], t0_index: Option<usize>, monomials: &[Monomial]) {
        self.count += 1;
        let a_t0 = t0_index.map(|i| states[i].alpha[0]);
        for (i, s) in states.iter().enumerate() {
            for k in 0..2 {
                let n = s.alpha[k].norm_sqr();
                self.sum_occupation[k][i] += n;
                self.min_occupation[k][i] = self.min_occupation[k][i].min(n);
                self.max_occupation[k][i] = self.max_occupation[k][i].max(n);
                self.sum_alpha[k][i] += s.alpha[k];
            }
            let r = s.alpha[0].norm();
            if r > 0.0 {
                self.sum_phasor[i] += s.alpha[0] / r;
            }
            if let (Some(i0), Some(a0)) = (t0_index, a_t0) {
                if i >= i0 {
                    self.sum_correlation[i] += s.alpha[0].conj() * a0;
                }
            }
            for (acc, m) in self.sum_monomials.iter_mut().zip(monomials) {
                acc[i] += m.eval(s);
            }
        }
    }

    fn merge(&mut self, o: &Reductions) {
        self.count += o.count;
        for k in 0..2 {
            for (a, b) in self.sum_occupation[k].iter_mut().zip(&o.sum_occupation[k]) {
                *a += b;
            }
            for (a, b) in self.min_occupation[k].iter_mut().zip(&o.min_occupation[k]) {
                *a = a.min(*b);
            }
            for (a, b) in self.max_occupation[k].iter_mut().zip(&o.max_occupation[k]) {
                *a = a.max(*b);
            }
            for (a, b) in self.sum_alpha[k].iter_mut().zip(&o.sum_alpha[k]) {
                *a += b;
            }
        }
        for (a, b) in self.sum_phasor.iter_mut().zip(&o.sum_phasor) {
            *a += b;
        }
        for (a, b) in self.sum_correlation.iter_mut().zip(&o.sum_correlation) {
            *a += b;
        }
        for (va, vb) in self.sum_monomials.iter_mut().zip(&o.sum_monomials) {
            for (a, b) in va.iter_mut().zip(vb) {
                *a += b;
            }
        }
    }
}

/// All trajectory states at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub sample_index: usize,
    /// States of surviving trajectories, in trajectory-index order.
    pub states: Vec<FieldState>,
}

/// Result of [`run_ensemble`]. Fields are the rescaled `alpha~`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ensemble {
    pub config: EnsembleConfig,
    pub params: ModelParams,
    pub times: Vec<f64>,
    pub reductions: Reductions,
    pub snapshots: Vec<Snapshot>,
    /// Indices (RNG stream ids) of surviving trajectories, ascending.
    pub trajectory_ids: Vec<u64>,
    /// Sampled states per surviving trajectory when storage was requested.
    pub trajectories: Option<Vec<Vec<FieldState>>>,
    /// Per surviving trajectory: (min, max) of `|alpha~_1|^2` for `t >= band_after`.
    pub occupation_extremes: Vec<(f64, f64)>,
    pub diverged: Vec<u64>,
    pub correlation_t0_index: Option<usize>,
}

impl Ensemble {
    /// Wraps externally generated trajectories (sampled on the config's
    /// grid) as an ensemble, computing every reduction.
    pub fn from_trajectories(
        config: EnsembleConfig,
        params: ModelParams,
        trajectories: Vec<Vec<FieldState>>,
    ) -> Result<Self> {
        config.validate()?;
        let n_samples = config.n_samples();
        if trajectories.is_empty() {
            return Err(Error::Empty("trajectories".into()));
        }
        if let Some(bad) = trajectories.iter().find(|t| t.len() != n_samples) {
            return Err(Error::GridMismatch(format!(
                "trajectory has {} samples, config implies {n_samples}",
                bad.len()
            )));
        }
        let t0_index = config.correlation_t0.map(|t| config.sample_index(t));
        let band_from = config.sample_index(config.band_after);
        let mut reductions = Reductions::new(n_samples, config.monomials.len());
        let mut extremes = Vec::with_capacity(trajectories.len());
        for tr in &trajectories {
            reductions.add_trajectory(tr, t0_index, &config.monomials);
            extremes.push(occupation_extremes(&tr[band_from..]));
        }
        let snapshots = config
            .snapshot_times
            .iter()
            .map(|&t| {
                let i = config.sample_index(t);
                Snapshot {
                    time: i as f64 * config.sample_dt(),
                    sample_index: i,
                    states: trajectories.iter().map(|v| v[i]).collect(),
                }
            })
            .collect();
        Ok(Self {
            times: (0..n_samples).map(|i| i as f64 * config.sample_dt()).collect(),
            trajectory_ids: (0..trajectories.len() as u64).collect(),
            trajectories: Some(trajectories),
            config,
            params,
            reductions,
            snapshots,
            occupation_extremes: extremes,
            diverged: Vec::new(),
            correlation_t0_index: t0_index,
        })
    }

    pub fn alive(&self) -> usize {
        self.reductions.count
    }

    pub fn sample_index(&self, t: f64) -> usize {
        self.config.sample_index(t)
    }

    /// States of every surviving trajectory at sample `index`, from full
    /// storage or a snapshot.
    pub fn states_at(&self, index: usize) -> Option<Vec<FieldState>> {
        if let Some(tr) = &self.trajectories {
            return Some(tr.iter().map(|v| v[index]).collect());
        }
        self.snapshots.iter().find(|s| s.sample_index == index).map(|s| s.states.clone())
    }
}

/// Integrates a single trajectory; `None` if it diverged.
pub(crate) fn simulate_trajectory(
    config: &EnsembleConfig,
    couplings: &TwaCouplings,
    id: u64,
) -> Option<Vec<FieldState>> {
    let mut rng = stream(config.master_seed, id);
    let mut s = sample_initial(config, &mut rng);
    let n_steps = config.n_steps();
    let stride = config.sample_stride;
    let mut out = Vec::with_capacity(config.n_samples());
    out.push(s);
    let quiet = NoiseDraw::default();
    for step in 1..=n_steps {
        let noise = if config.noise { NoiseDraw::draw(&mut rng) } else { quiet };
        s = couplings.step(&s, config.dt, &noise, config.integrator);
        if step % stride == 0 {
            let norm = s.max_norm();
            if !(norm <= DIVERGENCE_THRESHOLD) {
                return None;
            }
            out.push(s);
        }
    }
    Some(out)
}

fn occupation_extremes(states: &[FieldState]) -> (f64, f64) {
    states.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| {
        let n = s.alpha[0].norm_sqr();
        (a.min(n), b.max(n))
    })
}

struct ChunkResult {
    reductions: Reductions,
    snapshots: Vec<Vec<FieldState>>,
    ids: Vec<u64>,
    trajectories: Vec<Vec<FieldState>>,
    extremes: Vec<(f64, f64)>,
    diverged: Vec<u64>,
}

/// Runs `n_traj` independent trajectories. Trajectory `i` uses RNG stream
/// `(master_seed, i)`. Diverged trajectories are excluded from every
/// reduction; more than 1% diverged is an error.
pub fn run_ensemble(config: &EnsembleConfig, params: &ModelParams) -> Result<Ensemble> {
    config.validate()?;
    params.validate()?;
    let couplings = TwaCouplings::new(params, config.aleph, config.noise);
    let n_samples = config.n_samples();
    let t0_index = config.correlation_t0.map(|t| config.sample_index(t));
    let snap_idx: Vec<usize> = config.snapshot_times.iter().map(|&t| config.sample_index(t)).collect();
    let band_from = config.sample_index(config.band_after).min(n_samples - 1);
    let n_chunks = config.n_traj.div_ceil(CHUNK);

    let chunks: Vec<ChunkResult> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(config.n_traj);
            let mut res = ChunkResult {
                reductions: Reductions::new(n_samples, config.monomials.len()),
                snapshots: vec![Vec::new(); snap_idx.len()],
                ids: Vec::new(),
                trajectories: Vec::new(),
                extremes: Vec::new(),
                diverged: Vec::new(),
            };
            for id in lo as u64..hi as u64 {
                match simulate_trajectory(config, &couplings, id) {
                    None => res.diverged.push(id),
                    Some(states) => {
                        res.reductions.add_trajectory(&states, t0_index, &config.monomials);
                        for (dst, &i) in res.snapshots.iter_mut().zip(&snap_idx) {
                            dst.push(states[i]);
                        }
                        res.extremes.push(occupation_extremes(&states[band_from..]));
                        res.ids.push(id);
                        if config.store_trajectories {
                            res.trajectories.push(states);
                        }
                    }
                }
            }
            res
        })
        .collect();

    let mut reductions = Reductions::new(n_samples, config.monomials.len());
    let mut snapshots: Vec<Snapshot> = snap_idx
        .iter()
        .map(|&i| Snapshot { time: i as f64 * config.sample_dt(), sample_index: i, states: Vec::new() })
        .collect();
    let mut ids = Vec::new();
    let mut trajectories = Vec::new();
    let mut extremes = Vec::new();
    let mut diverged = Vec::new();
    for ch in chunks {
        reductions.merge(&ch.reductions);
        for (dst, src) in snapshots.iter_mut().zip(ch.snapshots) {
            dst.states.extend(src);
        }
        ids.extend(ch.ids);
        trajectories.extend(ch.trajectories);
        extremes.extend(ch.extremes);
        diverged.extend(ch.diverged);
    }

    if !diverged.is_empty() {
        warn!("{} of {} trajectories diverged and were excluded", diverged.len(), config.n_traj);
        if diverged.len() * 100 > config.n_traj {
            return Err(Error::EnsembleDivergence { diverged: diverged.len(), total: config.n_traj });
        }
    }
    if reductions.count == 0 {
        return Err(Error::Empty("no surviving trajectories".into()));
    }

    let times = (0..n_samples).map(|i| i as f64 * config.sample_dt()).collect();
    Ok(Ensemble {
        config: config.clone(),
        params: *params,
        times,
        reductions,
        snapshots,
        trajectory_ids: ids,
        trajectories: config.store_trajectories.then_some(trajectories),
        occupation_extremes: extremes,
        diverged,
        correlation_t0_index: t0_index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Ordering {
    /// Plain Weyl-symbol average (symmetric ordering).
    #[default]
    Symmetric,
    /// Normal-ordered occupation `<a†a> = <|alpha|^2> - 1/2`, i.e.
    /// `- 1/(2 aleph)` in rescaled fields. Only changes occupations.
    Normal,
}

/// Trajectory average of a monomial at every sample time.
pub fn weyl_expectation(ensemble: &Ensemble, monomial: &Monomial, ordering: Ordering) -> Result<Vec<Complex64>> {
    monomial.validate()?;
    let red = &ensemble.reductions;
    if red.count == 0 {
        return Err(Error::Empty("ensemble".into()));
    }
    let nf = red.count as f64;
    let mut series: Vec<Complex64> = if monomial.n == 0 && monomial.m == 0 {
        vec![Complex64::new(1.0, 0.0); ensemble.times.len()]
    } else if monomial.is_occupation() {
        red.sum_occupation[monomial.mode - 1].iter().map(|v| Complex64::new(v / nf, 0.0)).collect()
    } else if monomial.n == 0 && monomial.m == 1 {
        red.sum_alpha[monomial.mode - 1].iter().map(|v| v / nf).collect()
    } else if monomial.n == 1 && monomial.m == 0 {
        red.sum_alpha[monomial.conj_mode - 1].iter().map(|v| v.conj() / nf).collect()
    } else if let Some(pos) = ensemble.config.monomials.iter().position(|m| m == monomial) {
        red.sum_monomials[pos].iter().map(|v| v / nf).collect()
    } else if let Some(tr) = &ensemble.trajectories {
        (0..ensemble.times.len()).map(|i| tr.iter().map(|v| monomial.eval(&v[i])).sum::<Complex64>() / nf).collect()
    } else {
        return Err(Error::Unavailable(format!(
            "{monomial:?} was neither streamed nor stored; add it to the config monomials"
        )));
    };
    if ordering == Ordering::Normal && monomial.is_occupation() {
        let shift = 0.5 / ensemble.config.aleph.get();
        for v in &mut series {
            *v -= shift;
        }
    }
    Ok(series)
}

/// Pointwise spread of `|alpha~_1|^2 = n_1 / aleph` across trajectories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub times: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub mean: Vec<f64>,
}

pub fn occupation_envelope(ensemble: &Ensemble) -> Result<Envelope> {
    let red = &ensemble.reductions;
    if red.count == 0 {
        return Err(Error::Empty("ensemble".into()));
    }
    let nf = red.count as f64;
    Ok(Envelope {
        times: ensemble.times.clone(),
        min: red.min_occupation[0].clone(),
        max: red.max_occupation[0].clone(),
        mean: red.sum_occupation[0].iter().map(|v| v / nf).collect(),
    })
}
