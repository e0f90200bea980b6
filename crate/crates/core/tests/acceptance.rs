//! Acceptance criteria, one report line each.
//!
//! `cargo test --test acceptance` runs every criterion except the long
//! gap power-law job (criterion 5 together with the desk-data half of
//! criterion 7), which is started with
//! `cargo test --release --test acceptance -- --ignored --nocapture`.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use kerrtorus::fockspace::*;
use kerrtorus::meanfield::*;
use kerrtorus::melting::*;
use kerrtorus::model::*;
use kerrtorus::pipeline::*;
use kerrtorus::rng::stream;
use kerrtorus::spectra::*;
use kerrtorus::twa::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

type Check = (bool, String);

/// Written straight to the stderr handle so the line survives output capture.
fn report(id: &str, title: &str, (pass, detail): &Check, secs: f64) {
    let line = format!("[{}] criterion {id}: {title} ({secs:.1} s) {detail}\n", if *pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn run(id: &str, title: &str, f: impl FnOnce() -> Check, failures: &mut Vec<String>) -> f64 {
    let t = Instant::now();
    let out = f();
    let secs = t.elapsed().as_secs_f64();
    report(id, title, &out, secs);
    if !out.0 {
        failures.push(format!("criterion {id}: {}", out.1));
    }
    secs
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn seed_state() -> FieldState {
    FieldState::new(c(0.05, 0.0), c(0.05, 0.0))
}

fn physical(aleph: f64) -> (ModelParams, Aleph) {
    let a = Aleph::new(aleph).unwrap();
    (rescale_params(&TildeParams(ModelParams::default()), a).unwrap(), a)
}

// 1 -------------------------------------------------------------------------

fn attractor_classification() -> Check {
    let (tilde, markers) = default_params();
    let opts = SweepOptions::default();
    let rows = sweep_omega(&[markers.limit_cycle_omega, markers.limit_torus_omega], &tilde.0, &opts).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (row, (want, zeros, fund)) in
        rows.iter().zip([(AttractorClass::LimitCycle, 1, 1), (AttractorClass::LimitTorus, 2, 2)])
    {
        let Some(cl) = &row.classification else {
            return (false, format!("omega {}: {:?}", row.omega, row.error));
        };
        let n_fund = cl.fundamentals.as_ref().map(|f| f.len()).unwrap_or(0);
        let pass = cl.class == want && cl.zero_exponents == zeros && n_fund == fund;
        ok &= pass;
        detail.push(format!(
            "omega={}: {} zero={} fundamentals={:?} exponents={:.4?}",
            row.omega,
            cl.class.as_str(),
            cl.zero_exponents,
            cl.fundamentals.as_deref().unwrap_or(&[]),
            row.lyapunov.as_ref().map(|l| l.exponents).unwrap_or_default()
        ));
    }
    (ok, detail.join("; "))
}

// 2 -------------------------------------------------------------------------

fn linear_drift_lyapunov() -> Check {
    let p = ModelParams {
        kerr: [0.0; 2],
        tunneling: 0.0,
        two_photon_loss: [0.0; 2],
        pump: [1.0; 2],
        ..ModelParams::default()
    };
    // The origin is a fixed point and the tangent flow is state independent.
    let opts = LyapunovOptions { transient: 0.0, total_time: 1e3, ..Default::default() };
    let ly = lyapunov_spectrum(&p, FieldState::zero(), &opts).unwrap();
    let worst = ly.exponents.iter().map(|l| (l - 0.5).abs()).fold(0.0, f64::max);
    (worst < 1e-3, format!("exponents {:?}, max |l - 0.5| = {worst:.2e}", ly.exponents))
}

// 3 -------------------------------------------------------------------------

fn twa_determinism_and_classical_limit() -> Check {
    let mut detail = Vec::new();

    let (p, aleph) = physical(2e3);
    let cfg = EnsembleConfig {
        n_traj: 500,
        aleph,
        t_end: 20.0,
        master_seed: 42,
        correlation_t0: Some(5.0),
        snapshot_times: vec![10.0],
        ..Default::default()
    };
    let in_pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_ensemble(&cfg, &p).unwrap())
    };
    let base = in_pool(1);
    let identical = [2, 4, 7].iter().all(|&n| {
        let e = in_pool(n);
        e.reductions == base.reductions
            && e.snapshots == base.snapshots
            && e.occupation_extremes == base.occupation_extremes
    });
    detail.push(format!("bit-identical over 1/2/4/7 threads: {identical}"));

    // Noiseless trajectory against a fine RK4 reference.
    let (p1, a1) = physical(1.0);
    let reference = *integrate_gpe(seed_state(), &p1, 4.0, 1e-5, 1).unwrap().last().unwrap();
    let err = |dt: f64| {
        let cfg = EnsembleConfig {
            n_traj: 1,
            aleph: a1,
            alpha_0: seed_state().alpha,
            dt,
            t_end: 4.0,
            sample_stride: (4.0 / dt).round() as usize,
            noise: false,
            store_trajectories: true,
            ..Default::default()
        };
        let e = run_ensemble(&cfg, &p1).unwrap();
        let end = *e.trajectories.unwrap()[0].last().unwrap();
        (end.alpha[0] - reference.alpha[0]).norm() + (end.alpha[1] - reference.alpha[1]).norm()
    };
    let errs = [err(4e-3), err(2e-3), err(1e-3)];
    let order = (errs[0] / errs[2]).ln() / 4f64.ln();
    let first_order = (0.8..=1.2).contains(&order);
    detail.push(format!("noiseless errors {errs:.3?} -> order {order:.3}"));

    // Trajectory deviation from the mean-field orbit over 0 <= t <= 10.
    let gpe = integrate_gpe(seed_state(), &ModelParams::default(), 10.0, 1e-3, 100).unwrap();
    let alephs = [1e4, 1e5, 1e6];
    let devs: Vec<f64> = alephs
        .iter()
        .map(|&al| {
            let (p, a) = physical(al);
            let cfg = EnsembleConfig {
                n_traj: 400,
                aleph: a,
                t_end: 10.0,
                master_seed: 3,
                store_trajectories: true,
                ..Default::default()
            };
            let e = run_ensemble(&cfg, &p).unwrap();
            let tr = e.trajectories.unwrap();
            tr.iter()
                .map(|t| {
                    let ms = t
                        .iter()
                        .zip(&gpe.states)
                        .map(|(x, y)| (x.alpha[0] - y.alpha[0]).norm_sqr() + (x.alpha[1] - y.alpha[1]).norm_sqr())
                        .sum::<f64>()
                        / t.len() as f64;
                    ms.sqrt()
                })
                .sum::<f64>()
                / tr.len() as f64
        })
        .collect();
    let slope = kerrtorus::fit::fit_log_log(&alephs, &devs).unwrap().slope;
    // Within a factor 2 of -1/2.
    let scaling = (-1.0..=-0.25).contains(&slope);
    detail.push(format!("deviation {devs:.4?} -> slope {slope:.3}"));
    (identical && first_order && scaling, detail.join("; "))
}

// 4 -------------------------------------------------------------------------

fn dephasing_phenomenology() -> Check {
    let gpe = integrate_gpe(seed_state(), &ModelParams::default(), 300.0, 1e-3, 100).unwrap();
    let late = gpe.after(10.0);
    let n_gpe: Vec<f64> = late.states.iter().map(|s| s.alpha[0].norm_sqr()).collect();
    let (lo, hi) = n_gpe.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let (band_lo, band_hi) = (mid - 1.2 * half, mid + 1.2 * half);
    let window = |t: &[f64], y: &[f64]| {
        let v: Vec<f64> = t.iter().zip(y).filter(|(t, _)| **t >= 250.0).map(|(_, y)| *y).collect();
        let (a, b) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        (0.5 * (b - a), v.iter().sum::<f64>() / v.len() as f64)
    };
    let (amp_gpe, _) = window(&gpe.times, &gpe.states.iter().map(|s| s.alpha[0].norm_sqr()).collect::<Vec<_>>());

    let mut ok = true;
    let mut detail = vec![format!("GPE band [{lo:.3}, {hi:.3}], late oscillation amplitude {amp_gpe:.3}")];
    for aleph in [200.0, 4000.0] {
        let (p, a) = physical(aleph);
        let cfg = EnsembleConfig {
            n_traj: 5000,
            aleph: a,
            t_end: 300.0,
            master_seed: 4,
            band_after: 10.0,
            ..Default::default()
        };
        let e = run_ensemble(&cfg, &p).unwrap();
        let n1: Vec<f64> =
            weyl_expectation(&e, &Monomial::occupation(1), Ordering::Normal).unwrap().iter().map(|z| z.re).collect();
        let (amp, level) = window(&e.times, &n1);
        let inside = e.occupation_extremes.iter().filter(|(mn, mx)| *mn >= band_lo && *mx <= band_hi).count();
        let frac = inside as f64 / e.occupation_extremes.len() as f64;
        let plateau = amp <= 0.1 * amp_gpe;
        ok &= plateau && frac >= 0.99;
        detail.push(format!(
            "aleph={aleph}: plateau n1={level:.4} residual amplitude {amp:.2e} ({:.1}% of GPE), inside 1.2x band {:.2}%",
            100.0 * amp / amp_gpe,
            100.0 * frac
        ));
    }
    (ok, detail.join("; "))
}

// 6 -------------------------------------------------------------------------

fn synthetic_series(f: impl Fn(f64) -> f64, dtau: f64, t_max: f64) -> CorrelationSeries {
    let n = (t_max / dtau).round() as usize + 1;
    CorrelationSeries::uniform(20.0, dtau, (0..n).map(|i| c(f(i as f64 * dtau), 0.0)).collect(), 1)
}

fn recovered(series: &CorrelationSeries, n_peaks: usize) -> (Vec<GapEstimate>, f64) {
    let opts = SpectrogramOptions { width: 60.0, hop: 2.0, band: Some((0.0, 3.0)), ..Default::default() };
    let s = spectrogram(series, &opts).unwrap();
    let tr = track_peaks(&s, n_peaks, 1e-3).unwrap();
    (extract_gaps(&tr, &GapOptions::default()).unwrap(), s.bin_width())
}

fn spectrogram_oracle() -> Check {
    let (g, bin) = recovered(&synthetic_series(|t| (-0.01 * t).exp() * (2.3 * t).cos(), 0.05, 400.0), 1);
    let single = (g[0].lambda - 0.01).abs() < 0.05 * 0.01 && (g[0].nu - 2.3).abs() <= bin;
    let (g2, _) = recovered(
        &synthetic_series(
            |t| (-0.01 * t).exp() * (2.3 * t).cos() + 0.6 * (-0.03 * t).exp() * (1.1 * t).cos(),
            0.05,
            400.0,
        ),
        2,
    );
    let find = |nu: f64| g2.iter().min_by(|a, b| (a.nu - nu).abs().total_cmp(&(b.nu - nu).abs())).unwrap();
    let (a, b) = (find(2.3), find(1.1));
    let two = (a.lambda - 0.01).abs() < 0.05 * 0.01 && (b.lambda - 0.03).abs() < 0.05 * 0.03 && a.index != b.index;
    (
        single && two,
        format!(
            "single: Lambda={:.5} nu={:.4} (bin {bin:.4}); two-tone: Lambda={:.5}@{:.3}, {:.5}@{:.3}",
            g[0].lambda, g[0].nu, a.lambda, a.nu, b.lambda, b.nu
        ),
    )
}

// 7 (synthetic) -------------------------------------------------------------

fn synthetic_collapse() -> Check {
    let alephs = [100.0, 200.0, 400.0, 800.0, 1600.0];
    let t: Vec<f64> = (0..=2000).map(|i| i as f64).collect();
    let time: Vec<Curve> = alephs
        .iter()
        .map(|&a| Curve { param: a, x: t.clone(), y: t.iter().map(|t| 1.0 - (-t / a).exp()).collect() })
        .collect();
    let inv: Vec<f64> = (0..40).map(|i| 1.0 / (50.0 * 1.12f64.powi(i))).collect();
    let aleph: Vec<Curve> = [25.0, 50.0, 100.0, 200.0, 400.0]
        .iter()
        .map(|&tj| Curve { param: tj, x: inv.clone(), y: inv.iter().map(|x| 1.0 - (-tj * x).exp()).collect() })
        .collect();
    let r = collapse(&time, &aleph, &CollapseOptions::default()).unwrap();
    let ok = (r.beta + 1.0).abs() <= 0.02 && r.quality < 1e-3;
    (
        ok,
        format!(
            "beta={:.4} d1={:.4} d2={:.4} quality={:.2e} (raw {:.4?})",
            r.beta, r.d1, r.d2, r.quality, r.quality_unrescaled
        ),
    )
}

// 8 -------------------------------------------------------------------------

fn circular_variance_properties() -> Check {
    let mut rng = stream(8, 0);
    let mut in_range = true;
    for _ in 0..100_000 {
        let n = rng.random_range(1..40);
        let th: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
        let r = circular_variance_of(&th).unwrap();
        in_range &= (0.0..=1.0).contains(&r);
    }
    let sigma = 0.8;
    let normal = Normal::new(0.3, sigma).unwrap();
    let n = 100_000;
    let th: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let r = circular_variance_of(&th).unwrap();
    let expected = 1.0 - (-sigma * sigma / 2.0f64).exp();
    let proj: Vec<f64> = th.iter().map(|t| (t - 0.3).cos()).collect();
    let m = proj.iter().sum::<f64>() / n as f64;
    let se = (proj.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0) / n as f64).sqrt();
    let gauss = (r - expected).abs() <= 3.0 * se;
    let identical = circular_variance_of(&[1.234; 50]).unwrap() == 0.0;
    let antipodal = (circular_variance_of(&[0.7, 0.7 + PI, 0.7, 0.7 + PI]).unwrap() - 1.0).abs() < 1e-15;
    (
        in_range && gauss && identical && antipodal,
        format!("range ok={in_range}; wrapped Gaussian R={r:.5} expected {expected:.5} (3 SE = {:.1e}); identical={identical} antipodal={antipodal}", 3.0 * se),
    )
}

// 9 -------------------------------------------------------------------------

fn ladder(n_max: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(
        n_max + 1,
        n_max + 1,
        |r, col| if col == r + 1 { c((col as f64).sqrt(), 0.0) } else { c(0.0, 0.0) },
    )
}

/// Dense generator from the master equation applied to every matrix unit.
fn dense_liouvillian(p: &ModelParams, n1: usize, n2: usize) -> DMatrix<Complex64> {
    type M = DMatrix<Complex64>;
    let (d1, d2) = (n1 + 1, n2 + 1);
    let d = d1 * d2;
    let a = [M::identity(d2, d2).kronecker(&ladder(n1)), ladder(n2).kronecker(&M::identity(d1, d1))];
    let mut h = M::zeros(d, d);
    let mut jumps = Vec::new();
    for k in 0..2 {
        let ad = a[k].adjoint();
        h += &ad * &a[k] * c(p.omega[k], 0.0) + &ad * &ad * &a[k] * &a[k] * c(0.5 * p.kerr[k], 0.0);
        jumps.push(&ad * c(p.pump[k].sqrt(), 0.0));
        jumps.push(&a[k] * &a[k] * c(p.two_photon_loss[k].sqrt(), 0.0));
    }
    let hop = a[0].adjoint() * a[0].adjoint() * &a[1] * c(-p.tunneling, 0.0);
    h += &hop + hop.adjoint();
    let mut l = M::zeros(d * d, d * d);
    for col in 0..d * d {
        let mut e = M::zeros(d, d);
        e[(col % d, col / d)] = c(1.0, 0.0);
        let mut out = (&h * &e - &e * &h) * c(0.0, -1.0);
        for j in &jumps {
            let jd = j.adjoint();
            let jdj = &jd * j;
            out += j * &e * &jd - (&jdj * &e + &e * &jdj) * c(0.5, 0.0);
        }
        for (i, v) in out.iter().enumerate() {
            l[(i, col)] = *v;
        }
    }
    l
}

fn fock_structure() -> Check {
    let p = ModelParams { pump: [0.1, 0.1], ..ModelParams::default() };
    let cutoff = FockCutoff::new(8, 8).unwrap();
    let l = build_liouvillian(&p, cutoff).unwrap();
    let sp = spectrum(&l).unwrap();
    let mut ev: Vec<Complex64> = sp.eigenvalues.iter().map(|e| e.1).collect();
    ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let (l0, l1) = (ev[0], ev[1]);
    let unique = l0.norm() < 1e-10 && l1.norm() > 1e-6;
    let max_re = ev[1..].iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    let stable = max_re < 0.0;
    // Every eigenvalue has its conjugate in the spectrum.
    let pair_err =
        ev.iter().map(|e| ev.iter().map(|f| (f - e.conj()).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    let pairs = pair_err < 1e-9;

    let rho0 = DensityMatrix::coherent(cutoff, [c(0.5, 0.0), c(0.3, 0.2)]);
    let times: Vec<f64> = (0..=20).map(|i| i as f64).collect();
    let states = evolve_master(&rho0, &l, &times).unwrap();
    let drift = states.iter().map(|r| (r.trace() - 1.0).norm()).fold(0.0, f64::max);
    let trace_ok = drift < 1e-9;

    let small = FockCutoff::new(4, 4).unwrap();
    let dense = dense_liouvillian(&ModelParams::default(), 4, 4);
    let sparse = build_liouvillian(&ModelParams::default(), small).unwrap().matrix.to_dense();
    let builder_err = max_modulus(&(sparse - dense));
    let builder_ok = builder_err < 1e-12;
    (
        unique && stable && pairs && trace_ok && builder_ok,
        format!(
            "|l0|={:.1e} |l1|={:.3e} max Re(others)={max_re:.3e} conj-pair err={pair_err:.1e} trace drift={drift:.1e} dense-oracle err={builder_err:.1e}",
            l0.norm(),
            l1.norm()
        ),
    )
}

#[test]
fn acceptance_suite() {
    let start = Instant::now();
    let mut failures = Vec::new();
    run("1", "attractor classification", attractor_classification, &mut failures);
    run("2", "linear-drift Lyapunov oracle", linear_drift_lyapunov, &mut failures);
    run("3", "TWA determinism and classical limit", twa_determinism_and_classical_limit, &mut failures);
    run("4", "dephasing phenomenology", dephasing_phenomenology, &mut failures);
    let _ = std::io::stderr()
        .write_all(b"[SKIP] criterion 5: gap power law (long job, run acceptance_long with --ignored)\n");
    run("6", "spectrogram oracle", spectrogram_oracle, &mut failures);
    run("7", "scaling collapse (synthetic family)", synthetic_collapse, &mut failures);
    run("8", "circular-variance properties", circular_variance_properties, &mut failures);
    run("9", "Fock-space structural suite", fock_structure, &mut failures);
    let total = start.elapsed().as_secs_f64();
    let budget = (total < 1800.0, format!("suite without criterion 5 took {:.1} min (limit 30)", total / 60.0));
    report("10", "runtime budget", &budget, total);
    if !budget.0 {
        failures.push(budget.1);
    }
    assert!(failures.is_empty(), "failed: {failures:#?}");
}

// 5 and 7 (desk data) -------------------------------------------------------

const DESK_ALEPHS: [f64; 5] = [500.0, 1000.0, 2000.0, 4000.0, 8000.0];
const PAPER_PREFACTORS: [f64; 2] = [47.144, 32.922];

/// Lag span per aleph: long enough for the slower decay to fall through
/// the noise floor.
fn tau_max(aleph: f64) -> f64 {
    (0.08 * aleph).max(100.0)
}

fn gpe_fundamentals() -> Vec<f64> {
    let p = ModelParams::default();
    let traj = integrate_gpe(seed_state(), &p, 1e4, 1e-3, 100).unwrap();
    let spec = power_spectrum(&traj, 1, &SpectrumOptions::default()).unwrap();
    count_fundamentals(&spec.peaks(), spec.bin_width, 8)
}

fn gap_power_law(analyses: &[GapAnalysis]) -> Check {
    let fundamentals = gpe_fundamentals();
    let mut ok = true;
    let mut detail = vec![format!("GPE fundamentals {fundamentals:.4?}")];
    for j in 0..2 {
        let pts: Vec<(f64, f64)> = analyses.iter().map(|g| (g.aleph, g.gaps[j].lambda)).collect();
        let fit = fit_power_law(&pts, None).unwrap();
        let ratio = fit.prefactor / PAPER_PREFACTORS[j];
        let exp_ok = (0.85..=1.25).contains(&fit.exponent);
        let pre_ok = (0.5..=2.0).contains(&ratio);
        ok &= exp_ok && pre_ok;
        detail.push(format!(
            "gap {}: a={:.3}+-{:.3} b={:.2} (b/paper {ratio:.2}) Lambda={:.5?}",
            j + 1,
            fit.exponent,
            fit.exponent_err.unwrap_or(f64::NAN),
            fit.prefactor,
            pts.iter().map(|p| p.1).collect::<Vec<_>>()
        ));
    }
    for g in analyses {
        let bin = g.spectrogram.bin_width();
        for est in &g.gaps {
            let nearest = fundamentals.iter().map(|f| (est.nu.abs() - f.abs()).abs()).fold(f64::INFINITY, f64::min);
            if nearest > bin {
                ok = false;
                detail.push(format!(
                    "aleph={} nu{}={:.4} is {nearest:.4} from a GPE fundamental (bin {bin:.4})",
                    g.aleph, est.index, est.nu
                ));
            }
        }
    }
    detail.push(format!(
        "nu per aleph {:?}",
        analyses
            .iter()
            .map(|g| (g.aleph, g.gaps.iter().map(|e| (e.nu * 1e4).round() / 1e4).collect::<Vec<_>>()))
            .collect::<Vec<_>>()
    ));
    (ok, detail.join("; "))
}

fn desk_collapse(series: &[MeltSeries]) -> Check {
    let time = time_curves(series);
    let aleph = match aleph_curves(series, &[25.0, 30.0, 36.0, 43.0, 52.0]) {
        Ok(a) => a,
        Err(e) => return (false, e.to_string()),
    };
    match collapse(&time, &aleph, &CollapseOptions::default()) {
        Ok(r) => {
            let ok = (0.85..=1.3).contains(&r.d1) && (0.7..=1.1).contains(&r.d2) && (-1.5..=-0.9).contains(&r.beta);
            (
                ok,
                format!(
                    "d1={:.3} d2={:.3} beta={:.3} alpha={:.3} quality={:.3e} (raw {:.4?}) time rates {:.4?} aleph rates {:.4?}",
                    r.d1, r.d2, r.beta, r.alpha, r.quality, r.quality_unrescaled, r.time_rates, r.aleph_rates
                ),
            )
        }
        Err(e) => (false, e.to_string()),
    }
}

#[test]
#[ignore = "long job: desk-scale gap power law and collapse"]
fn acceptance_long() {
    let start = Instant::now();
    let tilde = TildeParams(ModelParams::default());
    let opts = GapAnalysisOptions::default();
    let mut analyses = Vec::new();
    let mut series = Vec::new();
    for aleph in DESK_ALEPHS {
        let t = Instant::now();
        let template =
            EnsembleConfig { n_traj: 10_000, t_end: opts.t0 + tau_max(aleph), master_seed: 5, ..Default::default() };
        let e = lt_ensemble(&tilde, ScalingMode::Standard, aleph, opts.t0, &template).unwrap();
        let g = gap_analysis(&e, &opts).unwrap();
        let m = melt_series(&e, Centering::Origin, None, opts.t0).unwrap();
        let _ = std::io::stderr().write_all(
            format!(
                "  aleph={aleph}: {:.0} s, gaps {:?}, period {:.3}\n",
                t.elapsed().as_secs_f64(),
                g.gaps.iter().map(|x| (x.nu, x.lambda)).collect::<Vec<_>>(),
                m.period
            )
            .as_bytes(),
        );
        analyses.push(g);
        series.push(m);
    }
    let mut failures = Vec::new();
    let t5 = start.elapsed().as_secs_f64();
    let c5 = gap_power_law(&analyses);
    report("5", "gap power law (desk scale)", &c5, t5);
    if !c5.0 {
        failures.push(c5.1.clone());
    }
    run("7", "scaling collapse (desk data)", || desk_collapse(&series), &mut failures);
    assert!(failures.is_empty(), "failed: {failures:#?}");
}
