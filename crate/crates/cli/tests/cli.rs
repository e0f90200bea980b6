use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn kerrtorus(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kerrtorus"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .env_remove("KERRTORUS_THREADS")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

const SMALL_TWA: [&str; 7] = ["twa", "--aleph", "1000", "--ntraj", "64", "--t-end", "5"];

#[test]
fn unknown_subcommand_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = kerrtorus(&["frobnicate"], dir.path());
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn ensemble_output_is_byte_identical_across_runs_and_threads() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let oa = kerrtorus(&[&SMALL_TWA[..], &["--threads", "1"]].concat(), a.path());
    let ob = kerrtorus(&[&SMALL_TWA[..], &["--threads", "3"]].concat(), b.path());
    assert!(oa.status.success() && ob.status.success(), "{}", String::from_utf8_lossy(&oa.stderr));
    for f in ["twa.csv", "twa_summary.ndjson"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_changes_the_ensemble() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    kerrtorus(&[&SMALL_TWA[..], &["--seed", "1"]].concat(), a.path());
    kerrtorus(&[&SMALL_TWA[..], &["--seed", "2"]].concat(), b.path());
    assert_ne!(std::fs::read(a.path().join("twa.csv")).unwrap(), std::fs::read(b.path().join("twa.csv")).unwrap());
}

#[test]
fn manifest_indexes_every_file_with_its_hash() {
    let dir = tempfile::tempdir().unwrap();
    let o = kerrtorus(&SMALL_TWA, dir.path());
    assert!(o.status.success());
    let m = manifest(dir.path());
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for f in files {
        let data = std::fs::read(dir.path().join(f["path"].as_str().unwrap())).unwrap();
        let hex: String = Sha256::digest(&data).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"], hex);
        assert_eq!(f["bytes"], data.len());
    }
    assert_eq!(m["provenance"]["ensemble.n_traj"], "flag");
    assert_eq!(m["provenance"]["ensemble.dt"], "default");
    assert_eq!(m["config"]["ensemble"]["n_traj"], 64);
    assert_eq!(m["divergences"][0]["diverged"], 0);
    assert!(m["failures"].as_array().unwrap().is_empty());
}

#[test]
fn config_file_values_are_used_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 5\n[analysis]\ngpe_t_end = 2.0\ngpe_stride = 10\n").unwrap();
    let out = dir.path().join("out");
    let o = kerrtorus(&["gpe", "--config", cfg.to_str().unwrap(), "--seed", "6"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(out.join("gpe.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 201);
    let m = manifest(&out);
    assert_eq!(m["provenance"]["analysis.gpe_t_end"], "file");
    assert_eq!(m["provenance"]["seed"], "flag");
    assert_eq!(m["config"]["seed"], 6);
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[model]\nomegaa = 1.0\n").unwrap();
    let o = kerrtorus(&["gpe", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("omegaa"));
}

#[test]
fn invalid_scaling_parameter_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = kerrtorus(&["twa", "--aleph", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn liouville_writes_spectrum_steady_state_and_evolution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fock.toml");
    std::fs::write(&cfg, "[analysis]\ncutoff = [3, 3]\nn_eigenvalues = 5\nevolve_times = [0.0, 1.0]\n").unwrap();
    let out = dir.path().join("out");
    let o = kerrtorus(&["liouville", "--aleph", "1", "--config", cfg.to_str().unwrap()], &out);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(4));
    let spec = std::fs::read_to_string(out.join("liouville_spectrum.csv")).unwrap();
    assert_eq!(spec.lines().count(), 6);
    let evo = std::fs::read_to_string(out.join("liouville_evolution.csv")).unwrap();
    let trace: f64 = evo.lines().nth(2).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((trace - 1.0).abs() < 1e-9);
}

#[test]
fn sweep_rejects_malformed_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = kerrtorus(&["sweep", "--omega", "1.2:0.6"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
