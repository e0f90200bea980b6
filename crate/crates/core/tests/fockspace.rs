use kerrtorus::fockspace::*;
use kerrtorus::model::{Aleph, ModelParams};
use kerrtorus::rng::stream;
use kerrtorus::twa::{run_ensemble, weyl_expectation, EnsembleConfig, Monomial, Ordering};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

type M = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ladder(n_max: usize) -> M {
    M::from_fn(n_max + 1, n_max + 1, |r, col| if col == r + 1 { c((col as f64).sqrt()) } else { c(0.0) })
}

/// Generator built by applying the master equation to every matrix unit.
fn dense_oracle(p: &ModelParams, n1: usize, n2: usize) -> M {
    let (d1, d2) = (n1 + 1, n2 + 1);
    let a1 = M::identity(d2, d2).kronecker(&ladder(n1));
    let a2 = ladder(n2).kronecker(&M::identity(d1, d1));
    let d = d1 * d2;
    let a = [a1, a2];
    let mut h = M::zeros(d, d);
    let mut jumps = Vec::new();
    for (k, ak) in a.iter().enumerate() {
        let ad = ak.adjoint();
        h += &ad * ak * c(p.omega[k]) + &ad * &ad * ak * ak * c(0.5 * p.kerr[k]);
        jumps.push(&ad * c(p.pump[k].sqrt()));
        jumps.push(ak * ak * c(p.two_photon_loss[k].sqrt()));
        jumps.push(ak * c((p.single_photon_loss[k] * (1.0 + p.n_thermal)).sqrt()));
        jumps.push(&ad * c((p.single_photon_loss[k] * p.n_thermal).sqrt()));
    }
    let hop = a[0].adjoint() * a[0].adjoint() * &a[1];
    h -= (&hop + hop.adjoint()) * c(p.tunneling);
    let mut l = M::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            let mut e = M::zeros(d, d);
            e[(i, j)] = c(1.0);
            let mut out = (&h * &e - &e * &h) * Complex64::new(0.0, -1.0);
            for cj in &jumps {
                let cdc = cj.adjoint() * cj;
                out += cj * &e * cj.adjoint() - (&cdc * &e + &e * &cdc) * c(0.5);
            }
            for jj in 0..d {
                for ii in 0..d {
                    l[(ii + d * jj, i + d * j)] = out[(ii, jj)];
                }
            }
        }
    }
    l
}

fn random_params(rng: &mut impl Rng) -> ModelParams {
    let mut p = ModelParams::default();
    for k in 0..2 {
        p.omega[k] = rng.random_range(-2.0..2.0);
        p.kerr[k] = rng.random_range(0.0..1.0);
        p.pump[k] = rng.random_range(0.0..2.0);
        p.two_photon_loss[k] = rng.random_range(0.05..2.0);
        p.single_photon_loss[k] = if rng.random::<bool>() { rng.random_range(0.0..0.5) } else { 0.0 };
    }
    p.tunneling = rng.random_range(0.0..1.0);
    p.n_thermal = rng.random_range(0.0..0.5);
    p
}

fn max_diff(a: &M, b: &M) -> f64 {
    max_modulus(&(a - b))
}

#[test]
fn sparse_builder_matches_dense_oracle() {
    let mut rng = stream(2024, 0);
    for case in 0..20 {
        let p = random_params(&mut rng);
        let (n1, n2) = (rng.random_range(2..=4), rng.random_range(2..=4));
        let l = build_liouvillian(&p, FockCutoff::new(n1, n2).unwrap()).unwrap();
        let diff = max_diff(&l.matrix.to_dense(), &dense_oracle(&p, n1, n2));
        assert!(diff < 1e-12, "case {case} cutoff ({n1},{n2}): {diff:e}");
    }
}

fn random_hermitian(d: usize, rng: &mut impl Rng) -> M {
    let m = M::from_fn(d, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&m + m.adjoint()) * c(0.5)
}

#[test]
fn generator_preserves_trace() {
    let mut rng = stream(7, 0);
    let cut = FockCutoff::new(3, 3).unwrap();
    let l = build_liouvillian(&random_params(&mut rng), cut).unwrap();
    for _ in 0..100 {
        let rho = DensityMatrix { cutoff: cut, data: random_hermitian(cut.dim(), &mut rng) };
        assert!(l.apply(&rho).trace().norm() < 1e-12);
    }
    // Structurally: the identity functional annihilates every column.
    let d = cut.dim();
    let mut sums = vec![Complex64::new(0.0, 0.0); d * d];
    for &(r, col, v) in &l.matrix.entries {
        if r % d == r / d {
            sums[col] += v;
        }
    }
    assert!(sums.iter().all(|s| s.norm() < 1e-12));
}

#[test]
fn spectrum_closed_under_conjugation() {
    let mut rng = stream(8, 0);
    let l = build_liouvillian(&random_params(&mut rng), FockCutoff::new(3, 2).unwrap()).unwrap();
    let sp = spectrum(&l).unwrap();
    for (_, e) in &sp.eigenvalues {
        let partner = sp.eigenvalues.iter().map(|(_, f)| (f - e.conj()).norm()).fold(f64::INFINITY, f64::min);
        assert!(partner < 1e-9, "{e} has no conjugate partner ({partner:e})");
    }
}

#[test]
fn charge_sectors_decouple() {
    let mut rng = stream(9, 0);
    for _ in 0..5 {
        let l = build_liouvillian(&random_params(&mut rng), FockCutoff::new(4, 3).unwrap()).unwrap();
        let blocks = block_decompose(&l).unwrap();
        assert_eq!(blocks.iter().map(|b| b.indices.len()).sum::<usize>(), l.dim * l.dim);
    }
}

fn small_drive() -> ModelParams {
    ModelParams { pump: [0.1, 0.1], ..ModelParams::default() }
}

#[test]
fn steady_state_contract() {
    let l = build_liouvillian(&small_drive(), FockCutoff::new(5, 5).unwrap()).unwrap();
    let ss = steady_state(&l).unwrap();
    assert_eq!(ss.zero_eigenvalues, 1);
    assert!((ss.rho.trace().re - 1.0).abs() < 1e-12);
    assert!(ss.residual < 1e-9);
    assert!(ss.min_eigenvalue > -1e-8);
    assert!(ss.rho.hermiticity_error() < 1e-14);
}

#[test]
fn dark_states_without_pump_are_reported() {
    // Detuned modes, so no coherence between |1,0> and |0,1> survives.
    let p = ModelParams { pump: [0.0, 0.0], tunneling: 0.0, omega: [1.0, 1.3], ..ModelParams::default() };
    let cut = FockCutoff::new(3, 3).unwrap();
    let l = build_liouvillian(&p, cut).unwrap();
    // Dense null space: {|0>,|1>} populations of each mode, four in total.
    let sv = dense_oracle(&p, 3, 3).singular_values();
    let nullity = sv.iter().filter(|s| **s < 1e-10).count();
    assert_eq!(nullity, 4);
    match steady_state(&l) {
        Err(kerrtorus::Error::NonUnique { count, .. }) => assert_eq!(count, nullity),
        other => panic!("expected non-uniqueness, got {other:?}"),
    }
}

#[test]
fn low_spectrum_structure() {
    let l = build_liouvillian(&small_drive(), FockCutoff::new(5, 5).unwrap()).unwrap();
    let ev = low_spectrum(&l, 9).unwrap();
    assert!(ev[0].norm() < 1e-10);
    assert!(ev[1..].iter().all(|e| e.re < 0.0));
    assert!(low_spectrum(&l, 4).is_err());
}

#[test]
fn evolution_fixed_point_and_relaxation() {
    let cut = FockCutoff::new(4, 4).unwrap();
    let l = build_liouvillian(&small_drive(), cut).unwrap();
    let ss = steady_state(&l).unwrap();
    let times: Vec<f64> = (0..=5).map(|i| i as f64 * 2.0).collect();
    for r in evolve_master(&ss.rho, &l, &times).unwrap() {
        assert!(r.trace_distance(&ss.rho) < 1e-10);
    }
    let mut rng = stream(10, 0);
    let m = M::from_fn(cut.dim(), cut.dim(), |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let mut rho0 = DensityMatrix { cutoff: cut, data: &m * m.adjoint() };
    let tr = rho0.trace();
    rho0.data /= tr;
    let series = evolve_master(&rho0, &l, &[10.0, 50.0, 200.0]).unwrap();
    for r in &series {
        assert!(r.hermiticity_error() < 1e-9);
    }
    assert!(series[2].trace_distance(&ss.rho) < 1e-6);
}

#[test]
fn occupation_agrees_with_twa_at_low_occupation() {
    let p = ModelParams::default();
    let cut = FockCutoff::new(7, 7).unwrap();
    let l = build_liouvillian(&p, cut).unwrap();
    let a0 = Complex64::new(0.05, 0.0);
    let rho0 = DensityMatrix::coherent(cut, [a0, a0]);
    let times = [1.0, 2.0, 4.0, 8.0, 16.0];
    let exact = evolve_master(&rho0, &l, &times).unwrap();

    let cfg = EnsembleConfig {
        n_traj: 2000,
        aleph: Aleph::new(1.0).unwrap(),
        alpha_0: [a0, a0],
        t_end: 16.0,
        sample_stride: 100,
        master_seed: 11,
        ..Default::default()
    };
    let ens = run_ensemble(&cfg, &p).unwrap();
    let n1 = weyl_expectation(&ens, &Monomial::occupation(1), Ordering::Normal).unwrap();
    for (t, rho) in times.iter().zip(&exact) {
        let twa = n1[ens.sample_index(*t)].re;
        let fock = rho.mean_occupation(1);
        assert!(twa / fock < 2.0 && fock / twa < 2.0, "t {t}: twa {twa} vs exact {fock}");
    }
}
