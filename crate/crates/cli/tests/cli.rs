//! End-to-end tests of the binary: exit codes, artifact formats,
//! determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ksurf"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ksurf-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn sweep_config(dir: &Path, csv: &Path) -> PathBuf {
    let cfg = dir.join("sweep.cfg");
    write(
        &cfg,
        &format!(
            "[core]\nkind = plane\n\n[chart]\nrho_min = 0.1\nrho_max = 1.0\nn_rho = 16\nn_theta = 16\n\n\
             [run]\nmode = sweep\nk_start = 0.1\nk_end = 0.9\nk_step = 0.2\n\n\
             [outputs]\ncsv = {}\n",
            csv.display()
        ),
    );
    cfg
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn sweep_writes_csv_and_is_deterministic() {
    let dir = tmp_dir("sweep");
    let csv = dir.join("out.csv");
    let cfg = sweep_config(&dir, &csv);
    let out = run(bin().arg("run").arg(&cfg));
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read(&csv).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,t,det_min,det_max,dist_min,dist_max,area,volume"
    );
    assert_eq!(text.lines().count(), 1 + 5); // header + one row per k
    assert!(text.ends_with('\n'));
    assert!(!text.contains(','.to_string().repeat(2).as_str()));

    // Byte-identical on re-run.
    let out2 = run(bin().arg("run").arg(&cfg));
    assert_eq!(out2.status.code(), Some(0));
    let second = std::fs::read(&csv).unwrap();
    assert_eq!(first, second);
}

#[test]
fn invalid_ranges_exit_with_code_1_and_line() {
    let dir = tmp_dir("badrange");
    let cfg = dir.join("bad.cfg");
    write(
        &cfg,
        "[core]\nkind = plane\n\n[chart]\nrho_min = 0.1\nrho_max = 1.0\nn_rho = 16\nn_theta = 16\n\n\
         [run]\nmode = sweep\nk_start = 0.5\nk_end = 0.2\n",
    );
    let out = run(bin().arg("run").arg(&cfg));
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 13"), "stderr: {err}");
    assert!(err.contains("k_end"), "stderr: {err}");
}

#[test]
fn syntax_errors_are_line_anchored() {
    let dir = tmp_dir("badsyntax");
    let cfg = dir.join("bad.cfg");
    write(&cfg, "[core]\nkind plane\n");
    let out = run(bin().arg("run").arg(&cfg));
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "stderr: {err}");
}

#[test]
fn paper_literal_with_k_plus_t_tracking_aborts_with_code_2() {
    let dir = tmp_dir("paperlit");
    let cfg = dir.join("run.cfg");
    write(
        &cfg,
        "[core]\nkind = plane\n\n[chart]\nrho_min = 0.1\nrho_max = 1.0\nn_rho = 16\nn_theta = 16\n\n\
         [run]\nmode = continue\nk_start = 0.25\nk_end = 0.4\nforcing = paper-literal\ntrack_det_law = true\n",
    );
    let out = run(bin().arg("run").arg(&cfg));
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("det_law_k_plus_t"), "stderr: {err}");
}

#[test]
fn continuation_run_writes_checkpoint_rows() {
    let dir = tmp_dir("continue");
    let csv = dir.join("run.csv");
    let cfg = dir.join("run.cfg");
    write(
        &cfg,
        &format!(
            "[core]\nkind = plane\n\n[chart]\nrho_min = 0.1\nrho_max = 1.0\nn_rho = 16\nn_theta = 16\n\n\
             [run]\nmode = continue\nk_start = 0.25\nk_end = 0.3\ndt = 0.01\n\n\
             [outputs]\ncsv = {}\n",
            csv.display()
        ),
    );
    let out = run(bin().arg("run").arg(&cfg));
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5); // 5 steps of 0.01 from 0.25 to 0.30
    // det columns track k = k0 + t.
    for row in rows {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        let (k, det_min, det_max) = (cols[0], cols[2], cols[3]);
        assert!((det_min - k).abs() < 1e-6 && (det_max - k).abs() < 1e-6);
    }
}

#[test]
fn mesh_export_counts_rings_and_determinism() {
    let dir = tmp_dir("mesh");
    let cfg = dir.join("mesh.cfg");
    write(
        &cfg,
        "[core]\nkind = plane\n\n[chart]\nrho_min = 0.1\nrho_max = 1.0\nn_rho = 12\nn_theta = 16\n\n\
         [run]\nmode = sweep\nk_start = 0.2\nk_end = 0.3\n",
    );
    let mesh = dir.join("leaf.off");
    let k = 0.25f64;
    let out = run(bin()
        .arg("export-mesh")
        .arg(&cfg)
        .args(["--k", &k.to_string()])
        .arg("--out")
        .arg(&mesh));
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read(&mesh).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "OFF");
    let counts: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|w| w.parse().unwrap())
        .collect();
    assert_eq!(counts[0], 12 * 16);
    assert_eq!(counts[1], 11 * 16);

    // Ring property: on the exact leaf at height d, the ball-model norm
    // of every ring-i vertex is tanh(D_i / 2) with
    // cosh(D_i) = cosh(d) cosh(rho_i).
    let d = k.sqrt().atanh();
    let verts: Vec<Vec<f64>> = text
        .lines()
        .skip(2)
        .take(12 * 16)
        .map(|l| l.split_whitespace().map(|w| w.parse().unwrap()).collect())
        .collect();
    let h_rho = 0.9 / 11.0;
    for (vi, v) in verts.iter().enumerate() {
        let ring = vi / 16;
        let rho = 0.1 + h_rho * ring as f64;
        let big_d = (d.cosh() * rho.cosh()).acosh();
        let expect = (big_d / 2.0).tanh();
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        assert!(
            (norm - expect).abs() < 1e-8,
            "vertex {vi}: norm {norm} vs {expect}"
        );
    }

    // Face lines reference valid vertices and are quads.
    for l in text.lines().skip(2 + 12 * 16) {
        let idx: Vec<usize> = l.split_whitespace().map(|w| w.parse().unwrap()).collect();
        assert_eq!(idx[0], 4);
        assert!(idx[1..].iter().all(|&i| i < 12 * 16));
    }

    let out2 = run(bin()
        .arg("export-mesh")
        .arg(&cfg)
        .args(["--k", &k.to_string()])
        .arg("--out")
        .arg(&mesh));
    assert_eq!(out2.status.code(), Some(0));
    assert_eq!(first, std::fs::read(&mesh).unwrap());
}

#[test]
fn verify_riccati_reports_and_passes() {
    let dir = tmp_dir("verify");
    let report = dir.join("riccati.txt");
    let out = run(bin()
        .args(["verify", "riccati"])
        .arg("--report")
        .arg(&report));
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&report).unwrap();
    for line in text.lines() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(parts.len(), 4, "bad report line: {line}");
        assert!(parts[1].parse::<f64>().is_ok());
        assert!(parts[2].parse::<f64>().is_ok());
        assert!(parts[3] == "PASS" || parts[3] == "FAIL");
    }
    assert!(text.lines().any(|l| l.starts_with("riccati_closed_vs_rk4_max_gap")));
}

#[test]
fn verify_unknown_suite_exits_1() {
    let out = run(bin().args(["verify", "nonsense"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_continuation_with_coarse_dt_fails_with_code_3() {
    let dir = tmp_dir("coarse");
    let report = dir.join("continuation.txt");
    let out = run(bin()
        .args(["verify", "continuation", "--dt", "0.2"])
        .arg("--report")
        .arg(&report));
    assert_eq!(out.status.code(), Some(3), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let text = std::fs::read_to_string(&report).unwrap();
    let has_det_fail = text
        .lines()
        .any(|l| l.contains("det") && l.ends_with("FAIL"));
    assert!(has_det_fail, "report:\n{text}");
}

#[test]
fn flow_table_matches_closed_forms() {
    let dir = tmp_dir("flow");
    let csv = dir.join("flow.csv");
    let out = run(bin()
        .args(["flow", "--lambda1", "0.5", "--lambda2", "2.0", "--t-max", "2.0"])
        .arg("--out")
        .arg(&csv));
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let last = text.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    // Final lambda1 = tanh(arctanh(0.5) + 2).
    let expect = (0.5f64.atanh() + 2.0).tanh();
    assert!((cols[1] - expect).abs() < 1e-12);
    assert!(cols[5] <= 1e-8);
    // Product column tends to 1 from the tanh/coth pair.
    assert!((cols[1] * cols[2] - 1.0).abs() < 1e-3);
}

#[test]
fn flow_identity_seed_is_constant() {
    let out = run(bin().args(["flow", "--lambda1", "1.0", "--lambda2", "1.0", "--t-max", "0.5"]));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[1], 1.0);
        assert_eq!(cols[2], 1.0);
    }
}
