//! Subcommand implementations. Each writes its tables into the output
//! directory; per-item failures are recorded and the run continues.

use kerrtorus::fockspace::{build_liouvillian, evolve_master, spectrum, steady_state_from, DensityMatrix, FockCutoff};
use kerrtorus::meanfield::{
    integrate_gpe, lyapunov_spectrum, sweep_omega, FieldState, LyapunovOptions, SpectrumOptions, SweepOptions,
    Trajectory,
};
use kerrtorus::melting::{collapse, fit_relaxation, CollapseOptions, RelaxationOptions};
use kerrtorus::model::{Aleph, ModelParams};
use kerrtorus::pipeline::{
    aleph_curves, gap_analysis, lt_ensemble, melt_series, time_curves, GapAnalysis, GapAnalysisOptions, MeltSeries,
};
use kerrtorus::spectra::{fit_power_law, GapOptions, SpectrogramOptions};
use kerrtorus::twa::{run_ensemble, Ensemble};
use kerrtorus::wigner::{attractor_mask, confinement_fraction, histogram2d, PhaseSpaceGrid};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{GridFormat, Resolved, Source};
use crate::error::CliError;
use crate::output::{num, Output};

type Res<T = ()> = Result<T, CliError>;

fn flagged(r: &Resolved, key: &str) -> bool {
    r.provenance.get(key).is_some_and(|s| *s != Source::Default)
}

fn initial_state(r: &Resolved) -> FieldState {
    let a = r.config.ensemble.alpha0;
    let z = Complex64::new(a[0], a[1]);
    FieldState::new(z, z)
}

fn tag(aleph: f64) -> String {
    format!("aleph{}", num(aleph))
}

/// Mean-field stride matching the ensemble sample spacing.
fn matching_stride(r: &Resolved) -> usize {
    let e = &r.config.ensemble;
    ((e.dt * e.sample_stride as f64) / r.config.analysis.gpe_dt).round().max(1.0) as usize
}

/// Scaled mean-field trajectory from the configured initial field.
fn reference_gpe(r: &Resolved, t_end: f64, stride: usize) -> Res<Trajectory> {
    let a = &r.config.analysis;
    Ok(integrate_gpe(initial_state(r), &r.config.model.tilde().0, t_end, a.gpe_dt, stride)?)
}

fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| {
            let [a1, a2] = s.alpha;
            vec![num(*t), num(a1.re), num(a1.im), num(a2.re), num(a2.im), num(a1.norm_sqr()), num(a2.norm_sqr())]
        })
        .collect()
}

const TRAJ_HEADER: [&str; 7] = ["t", "re1", "im1", "re2", "im2", "n1", "n2"];

pub fn gpe(r: &Resolved, out: &mut Output) -> Res {
    let a = &r.config.analysis;
    let traj = reference_gpe(r, a.gpe_t_end, a.gpe_stride)?;
    out.csv("gpe.csv", &TRAJ_HEADER, trajectory_rows(&traj))
}

fn lyapunov_options(r: &Resolved) -> LyapunovOptions {
    let a = &r.config.analysis;
    LyapunovOptions { dt: a.gpe_dt, transient: a.transient, total_time: a.lyapunov_time, ..LyapunovOptions::default() }
}

pub fn lyapunov(r: &Resolved, out: &mut Output) -> Res {
    let p = r.config.model.tilde().0;
    let ly = lyapunov_spectrum(&p, initial_state(r), &lyapunov_options(r))?;
    let zero_tol = r.config.analysis.zero_tol;
    if !ly.converged {
        out.fail(format!("Lyapunov spectrum not converged (block error {:e})", ly.convergence_error));
    }
    let rec = json!({
        "omega": p.omega,
        "exponents": ly.exponents,
        "sum": ly.sum(),
        "zero_exponents": ly.zero_count(zero_tol),
        "zero_tol": zero_tol,
        "convergence_error": ly.convergence_error,
        "converged": ly.converged,
    });
    out.ndjson("lyapunov.ndjson", &[rec])
}

/// Parses `a:b:step` into an inclusive grid.
pub fn parse_range(s: &str) -> Res<Vec<f64>> {
    let bad = || CliError::Config(format!("omega range must be a:b:step, got {s:?}"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Res<_>>()?;
    match parts[..] {
        [a] => Ok(vec![a]),
        [a, b, step] if step > 0.0 && b >= a => {
            let n = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect())
        }
        _ => Err(bad()),
    }
}

pub fn sweep(r: &Resolved, out: &mut Output, omegas: &[f64], prefix: &str) -> Res {
    let a = &r.config.analysis;
    let opts = SweepOptions {
        initial: initial_state(r),
        t_end: a.gpe_t_end,
        dt: a.gpe_dt,
        stride: a.gpe_stride,
        spectrum: SpectrumOptions { transient: a.transient, ..SpectrumOptions::default() },
        lyapunov: (!a.spectral_only).then(|| lyapunov_options(r)),
        zero_tol: a.zero_tol,
    };
    let rows = sweep_omega(omegas, &r.config.model.tilde().0, &opts)?;
    let mut table = Vec::new();
    let mut spectra = Vec::new();
    for row in &rows {
        if let Some(e) = &row.error {
            out.fail(format!("omega = {}: {e}", row.omega));
        }
        let c = row.classification.as_ref();
        let fundamentals = c
            .and_then(|c| c.fundamentals.as_ref())
            .map(|f| f.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        let mut rec = vec![
            num(row.omega),
            c.map(|c| c.class.as_str().to_string()).unwrap_or_default(),
            c.map(|c| c.zero_exponents.to_string()).unwrap_or_default(),
            fundamentals,
        ];
        for k in 0..4 {
            rec.push(row.lyapunov.as_ref().map(|l| num(l.exponents[k])).unwrap_or_default());
        }
        rec.push(row.lyapunov.as_ref().map(|l| l.converged.to_string()).unwrap_or_default());
        rec.push(c.and_then(|c| c.diagnostics.clone()).unwrap_or_default());
        rec.push(row.error.clone().unwrap_or_default());
        table.push(rec);
        if let Some(sp) = &row.spectrum {
            for (f, m) in pool_spectrum(&sp.frequencies, &sp.magnitudes, a.spectrum_band, a.spectrum_points) {
                spectra.push(vec![num(row.omega), num(f), num(m)]);
            }
        }
    }
    out.csv(
        &format!("{prefix}sweep.csv"),
        &[
            "omega",
            "class",
            "zero_exponents",
            "fundamentals",
            "l1",
            "l2",
            "l3",
            "l4",
            "converged",
            "diagnostics",
            "error",
        ],
        table,
    )?;
    out.csv(&format!("{prefix}sweep_spectra.csv"), &["omega", "frequency", "magnitude"], spectra)
}

/// Keeps `|f| <= band` and max-pools into at most `points` equal bins.
fn pool_spectrum(freq: &[f64], mag: &[f64], band: f64, points: usize) -> Vec<(f64, f64)> {
    let kept: Vec<(f64, f64)> = freq.iter().zip(mag).filter(|(f, _)| f.abs() <= band).map(|(f, m)| (*f, *m)).collect();
    if points == 0 || kept.len() <= points {
        return kept;
    }
    let per = kept.len().div_ceil(points);
    kept.chunks(per).map(|c| *c.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap()).collect()
}

fn run_twa(r: &Resolved, out: &mut Output, aleph: f64, mut cfg: kerrtorus::twa::EnsembleConfig) -> Res<Ensemble> {
    let params = r.physical(aleph)?;
    cfg.aleph = Aleph::new(aleph)?;
    log::info!("ensemble aleph = {aleph}: {} trajectories to t = {}", cfg.n_traj, cfg.t_end);
    let ens = run_ensemble(&cfg, &params)?;
    out.divergence(aleph, ens.diverged.len(), cfg.n_traj);
    Ok(ens)
}

/// Occupation band `[min, max]` of the scaled mean field for `t >= from`.
fn gpe_band(traj: &Trajectory, from: f64) -> (f64, f64) {
    traj.after(from)
        .states
        .iter()
        .map(|s| s.alpha[0].norm_sqr())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| (lo.min(n), hi.max(n)))
}

pub fn twa(r: &Resolved, out: &mut Output, aleph: f64, suffix: &str) -> Res {
    let cfg = r.ensemble(aleph)?;
    let ens = run_twa(r, out, aleph, cfg.clone())?;
    let red = &ens.reductions;
    let nf = red.count as f64;
    let shift = if cfg.noise { 0.5 / aleph } else { 0.0 };
    let rows = (0..ens.times.len()).map(|i| {
        vec![
            num(ens.times[i]),
            num(red.sum_occupation[0][i] / nf - shift),
            num(red.sum_occupation[1][i] / nf - shift),
            num(red.min_occupation[0][i]),
            num(red.max_occupation[0][i]),
            num(red.sum_alpha[0][i].re / nf),
            num(red.sum_alpha[0][i].im / nf),
            num(1.0 - red.sum_phasor[i].norm() / nf),
        ]
    });
    out.csv(
        &format!("twa{suffix}.csv"),
        &["t", "n1", "n2", "n1_min", "n1_max", "mean_re1", "mean_im1", "circular_variance"],
        rows,
    )?;
    let gpe = reference_gpe(r, cfg.t_end, matching_stride(r))?;
    let (lo, hi) = gpe_band(&gpe, cfg.band_after);
    let (mid, half) = (0.5 * (lo + hi), 0.6 * (hi - lo));
    let inside = ens.occupation_extremes.iter().filter(|(a, b)| *a >= mid - half && *b <= mid + half).count();
    let rec = json!({
        "aleph": aleph,
        "n_traj": cfg.n_traj,
        "alive": ens.alive(),
        "diverged": ens.diverged.len(),
        "gpe_band": [lo, hi],
        "inside_widened_band": inside as f64 / nf,
    });
    out.ndjson(&format!("twa{suffix}_summary.ndjson"), &[rec])
}

fn gap_options(r: &Resolved) -> GapAnalysisOptions {
    let a = &r.config.analysis;
    GapAnalysisOptions {
        t0: a.t0,
        spectrogram: SpectrogramOptions {
            window: a.window,
            width: a.width,
            hop: a.hop,
            pad: a.pad,
            band: Some((a.band[0], a.band[1])),
            value: a.value,
        },
        n_peaks: a.n_peaks,
        gaps: GapOptions { min_rel_amplitude: a.min_rel_amplitude, ..GapOptions::default() },
        ..GapAnalysisOptions::default()
    }
}

/// Ensemble with correlation taps at `t0`, run to `t0 + tau_max` unless
/// the end time was set explicitly.
fn dephasing_ensemble(r: &Resolved, out: &mut Output, aleph: f64) -> Res<Ensemble> {
    let mut cfg = r.ensemble(aleph)?;
    let t0 = r.config.analysis.t0;
    if !flagged(r, "ensemble.t_end") {
        cfg.t_end = t0 + r.tau_max(aleph);
    }
    log::info!("ensemble aleph = {aleph}: {} trajectories to t = {}", cfg.n_traj, cfg.t_end);
    let ens = lt_ensemble(&r.config.model.tilde(), r.config.scaling.mode, aleph, t0, &cfg)?;
    out.divergence(aleph, ens.diverged.len(), cfg.n_traj);
    Ok(ens)
}

fn write_gap_analysis(out: &mut Output, g: &GapAnalysis, with_spectrogram: bool) -> Res {
    let t = tag(g.aleph);
    let c = &g.correlation;
    out.csv(
        &format!("correlation_{t}.csv"),
        &["tau", "re", "im"],
        c.taus.iter().zip(&c.values).map(|(tau, v)| vec![num(*tau), num(v.re), num(v.im)]),
    )?;
    if with_spectrogram {
        let s = &g.spectrogram;
        let n = s.omegas.len();
        let rows =
            s.values.iter().enumerate().map(|(k, v)| vec![num(s.frame_times[k / n]), num(s.omegas[k % n]), num(*v)]);
        out.csv(&format!("spectrogram_{t}.csv"), &["t", "omega", "value"], rows)?;
    }
    let mut rows = Vec::new();
    for (j, tr) in g.tracks.tracks.iter().enumerate() {
        for (i, (f, a)) in tr.frequencies.iter().zip(&tr.amplitudes).enumerate() {
            if let (Some(f), Some(a)) = (f, a) {
                rows.push(vec![num(g.tracks.times[i]), (j + 1).to_string(), num(*f), num(*a)]);
            }
        }
    }
    out.csv(&format!("tracks_{t}.csv"), &["t", "track", "omega", "amplitude"], rows)
}

fn gap_runs(r: &Resolved, out: &mut Output, alephs: &[f64], with_spectrogram: bool) -> Res<Vec<GapAnalysis>> {
    let opts = gap_options(r);
    let mut done = Vec::new();
    for &aleph in alephs {
        let res = dephasing_ensemble(r, out, aleph).and_then(|ens| Ok(gap_analysis(&ens, &opts)?));
        match res {
            Ok(g) => {
                write_gap_analysis(out, &g, with_spectrogram)?;
                done.push(g);
            }
            Err(e) => out.fail(format!("aleph = {aleph}: {e}")),
        }
    }
    Ok(done)
}

pub fn spectrogram_cmd(r: &Resolved, out: &mut Output) -> Res {
    let aleph = r.config.scaling.aleph;
    let opts = gap_options(r);
    let ens = dephasing_ensemble(r, out, aleph)?;
    let g = gap_analysis(&ens, &opts)?;
    write_gap_analysis(out, &g, true)
}

pub fn gaps(r: &Resolved, out: &mut Output, alephs: &[f64], with_spectrogram: bool) -> Res {
    let runs = gap_runs(r, out, alephs, with_spectrogram)?;
    let mut rows = Vec::new();
    for g in &runs {
        for e in &g.gaps {
            rows.push(vec![
                num(g.aleph),
                e.index.to_string(),
                num(e.nu),
                num(e.nu_err),
                num(e.lambda),
                e.lambda_err.map(num).unwrap_or_default(),
                e.n_frames.to_string(),
                e.clamped.to_string(),
            ]);
        }
    }
    out.csv("gaps.csv", &["aleph", "track", "nu", "nu_err", "lambda", "lambda_err", "n_frames", "clamped"], rows)?;
    let n_tracks = r.config.analysis.n_peaks;
    let mut fits = Vec::new();
    for k in 1..=n_tracks {
        let pts: Vec<(f64, f64)> = runs
            .iter()
            .filter_map(|g| g.gaps.iter().find(|e| e.index == k && !e.clamped).map(|e| (g.aleph, e.lambda)))
            .collect();
        if pts.len() < 2 {
            out.fail(format!("track {k}: {} usable decay rates, power law needs 2", pts.len()));
            continue;
        }
        match fit_power_law(&pts, None) {
            Ok(f) => fits.push(json!({
                "track": k,
                "exponent": f.exponent,
                "exponent_err": f.exponent_err,
                "prefactor": f.prefactor,
                "prefactor_err": f.prefactor_err,
                "n_points": f.n_points,
                "range": [f.range.0, f.range.1],
            })),
            Err(e) => out.fail(format!("track {k}: {e}")),
        }
    }
    out.ndjson("fit.ndjson", &fits)
}

fn melt_runs(r: &Resolved, out: &mut Output, alephs: &[f64]) -> Res<Vec<MeltSeries>> {
    let a = &r.config.analysis;
    let period = (a.period > 0.0).then_some(a.period);
    let mut series = Vec::new();
    for &aleph in alephs {
        let res = dephasing_ensemble(r, out, aleph).and_then(|ens| Ok(melt_series(&ens, a.centering, period, a.t0)?));
        match res {
            Ok(s) => series.push(s),
            Err(e) => out.fail(format!("aleph = {aleph}: {e}")),
        }
    }
    let raw = series.iter().flat_map(|s| s.times.iter().zip(&s.r).map(|(t, v)| vec![num(s.aleph), num(*t), num(*v)]));
    out.csv("melt.csv", &["aleph", "t", "r"], raw.collect::<Vec<_>>())?;
    let avg = series
        .iter()
        .flat_map(|s| s.averaged_times.iter().zip(&s.averaged).map(|(t, v)| vec![num(s.aleph), num(*t), num(*v)]));
    out.csv("melt_averaged.csv", &["aleph", "t", "r_avg"], avg.collect::<Vec<_>>())?;
    Ok(series)
}

pub fn melt(r: &Resolved, out: &mut Output, alephs: &[f64]) -> Res {
    let series = melt_runs(r, out, alephs)?;
    let mut fits = Vec::new();
    for s in &series {
        match fit_relaxation(&s.averaged_times, &s.averaged, &RelaxationOptions::time()) {
            Ok(f) => fits.push(json!({
                "aleph": s.aleph,
                "period": s.period,
                "delta": f.delta,
                "delta_err": f.delta_err,
                "n_points": f.n_points,
                "non_monotone": f.non_monotone,
            })),
            Err(e) => out.fail(format!("aleph = {}: relaxation fit: {e}", s.aleph)),
        }
    }
    out.ndjson("melt_fit.ndjson", &fits)
}

pub fn collapse_cmd(r: &Resolved, out: &mut Output, alephs: &[f64]) -> Res {
    let series = melt_runs(r, out, alephs)?;
    let tc = time_curves(&series);
    let ac = aleph_curves(&series, &r.config.analysis.collapse_times)?;
    let res = collapse(&tc, &ac, &CollapseOptions::default())?;
    let mut summary = serde_json::to_value(&res)?;
    if let Some(m) = summary.as_object_mut() {
        for k in ["time_curves", "aleph_curves", "universal_curves"] {
            m.remove(k);
        }
    }
    out.ndjson("collapse.ndjson", &[summary])?;
    for (name, curves) in [
        ("collapse_time_curves.csv", &res.time_curves),
        ("collapse_aleph_curves.csv", &res.aleph_curves),
        ("collapse_universal_curves.csv", &res.universal_curves),
    ] {
        let rows = curves
            .iter()
            .flat_map(|c| c.x.iter().zip(&c.y).map(|(x, y)| vec![num(c.param), num(*x), num(*y)]))
            .collect::<Vec<_>>();
        out.csv(name, &["param", "x", "r"], rows)?;
    }
    Ok(())
}

pub fn wigner(r: &Resolved, out: &mut Output, alephs: &[f64]) -> Res {
    let a = &r.config.analysis;
    if a.wigner_times.is_empty() {
        return Err(CliError::Config("analysis.wigner_times is empty".into()));
    }
    let t_last = a.wigner_times.iter().cloned().fold(0.0, f64::max);
    let attractor = reference_gpe(r, a.transient + 1000.0, 10)?.after(a.transient);
    let markers = reference_gpe(r, t_last.max(a.gpe_dt), 1)?;
    let mut marker_rows = Vec::new();
    for &t in &a.wigner_times {
        let i = markers.times.partition_point(|v| *v < t - 0.5 * a.gpe_dt).min(markers.len() - 1);
        for m in 1..=2 {
            let z = markers.states[i].alpha[m - 1];
            marker_rows.push(vec![num(t), m.to_string(), num(z.re), num(z.im)]);
        }
    }
    out.csv("gpe_markers.csv", &["t", "mode", "re", "im"], marker_rows)?;

    let grids: Vec<PhaseSpaceGrid> = (1..=2)
        .map(|m| PhaseSpaceGrid::around(&attractor, m, a.wigner_extent, a.wigner_bins))
        .collect::<Result<_, _>>()?;
    let masks: Vec<_> =
        (1..=2).map(|m| attractor_mask(&attractor, m, &grids[m - 1], a.wigner_margin)).collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for &aleph in alephs {
        let mut cfg = r.ensemble(aleph)?;
        cfg.t_end = cfg.t_end.max(t_last);
        cfg.snapshot_times = a.wigner_times.clone();
        let ens = match run_twa(r, out, aleph, cfg) {
            Ok(e) => e,
            Err(e) => {
                out.fail(format!("aleph = {aleph}: {e}"));
                continue;
            }
        };
        for &t in &a.wigner_times {
            let idx = ens.sample_index(t);
            for m in 1..=2 {
                let mut d = histogram2d(&ens, m, idx, &grids[m - 1])?;
                if a.wigner_smoothing > 0.0 {
                    d = d.smoothed(a.wigner_smoothing);
                }
                let frac = confinement_fraction(&d, &masks[m - 1])?;
                rows.push(vec![
                    num(aleph),
                    num(t),
                    m.to_string(),
                    num(frac),
                    d.samples.to_string(),
                    d.clipped.to_string(),
                ]);
                let stem = format!("wigner_{}_t{}_mode{m}", tag(aleph), num(t));
                match a.wigner_format {
                    GridFormat::Binary => {
                        let mut data = serde_json::to_vec(&d.header())?;
                        data.push(b'\n');
                        data.extend(d.to_le_bytes());
                        out.write(&format!("{stem}.bin"), &data)?;
                    }
                    GridFormat::Csv => {
                        let nx = d.grid.nx;
                        let dense = d.weights.chunks(nx).map(|row| row.iter().map(|w| num(*w)).collect::<Vec<_>>());
                        let header: Vec<String> = (0..nx).map(|ix| num(d.grid.center(ix, 0).0)).collect();
                        let header: Vec<&str> = header.iter().map(String::as_str).collect();
                        out.csv(&format!("{stem}.csv"), &header, dense)?;
                    }
                }
            }
        }
    }
    out.csv("confinement.csv", &["aleph", "t", "mode", "fraction", "samples", "clipped"], rows)
}

pub fn liouville(r: &Resolved, out: &mut Output) -> Res {
    let a = &r.config.analysis;
    let aleph = r.config.scaling.aleph;
    let params: ModelParams = r.physical(aleph)?;
    let cutoff =
        FockCutoff::new(a.cutoff[0], a.cutoff[1]).map_err(|e| CliError::Config(format!("analysis.cutoff: {e}")))?;
    let l = build_liouvillian(&params, cutoff)?;
    let sp = spectrum(&l)?;
    let rows = sp
        .eigenvalues
        .iter()
        .take(a.n_eigenvalues)
        .enumerate()
        .map(|(k, (q, z))| vec![k.to_string(), q.to_string(), num(z.re), num(z.im)]);
    out.csv("liouville_spectrum.csv", &["k", "charge", "re", "im"], rows)?;
    match steady_state_from(&l, &sp) {
        Ok(ss) => out.ndjson(
            "steady_state.ndjson",
            &[json!({
                "aleph": aleph,
                "cutoff": a.cutoff,
                "residual": ss.residual,
                "zero_eigenvalues": ss.zero_eigenvalues,
                "min_eigenvalue": ss.min_eigenvalue,
                "leakage": ss.leakage,
                "mean_occupation": ss.mean_occupation,
                "purity": ss.purity,
            })],
        )?,
        Err(e) => out.fail(format!("steady state: {e}")),
    }
    if !a.evolve_times.is_empty() {
        let e = &r.config.ensemble;
        let z = Complex64::new(e.alpha0[0], e.alpha0[1]) * aleph.sqrt();
        let rho0 = DensityMatrix::coherent(cutoff, [z, z]);
        let states = evolve_master(&rho0, &l, &a.evolve_times)?;
        let rows = a.evolve_times.iter().zip(&states).map(|(t, rho)| {
            vec![
                num(*t),
                num(rho.mean_occupation(1)),
                num(rho.mean_occupation(2)),
                num(rho.trace().re),
                num(rho.purity()),
            ]
        });
        out.csv("liouville_evolution.csv", &["t", "n1", "n2", "trace", "purity"], rows)?;
    }
    Ok(())
}

/// Figure 1: frequency sweep plus the two reference orbits.
pub fn fig1(r: &Resolved, out: &mut Output, omegas: &[f64]) -> Res {
    sweep(r, out, omegas, "fig1_")?;
    let a = &r.config.analysis;
    for w in [0.8, 1.0] {
        let p = r.config.model.tilde().0.with_omega(w);
        let tail = a.transient.max(a.gpe_t_end - 200.0);
        let traj = integrate_gpe(initial_state(r), &p, tail + 200.0, a.gpe_dt, 10)?.after(tail);
        out.csv(&format!("fig1_orbit_w{}.csv", num(w)), &TRAJ_HEADER, trajectory_rows(&traj))?;
    }
    Ok(())
}

/// Figure 2: ensembles at several scaling parameters against the mean field.
pub fn fig2(r: &Resolved, out: &mut Output, alephs: &[f64]) -> Res {
    for &aleph in alephs {
        if let Err(e) = twa(r, out, aleph, &format!("_{}", tag(aleph))) {
            out.fail(format!("aleph = {aleph}: {e}"));
        }
    }
    let e = &r.config.ensemble;
    let traj = reference_gpe(r, e.t_end, matching_stride(r))?;
    out.csv("fig2_gpe.csv", &TRAJ_HEADER, trajectory_rows(&traj))
}
