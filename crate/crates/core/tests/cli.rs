use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use timebin::cli::{config_from_summary, load_config, Summary};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn timebin(job: &str, cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timebin"))
        .arg(job)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .env_remove("TIMEBIN_THREADS")
        .output()
        .expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn base_text() -> String {
    std::fs::read_to_string(configs().join("rb87_no_coupling.cfg")).unwrap()
}

fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn derive_succeeds_and_echoes_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("rb87_reference.cfg");
    let out = timebin("derive", &cfg, tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(tmp.path().join("summary.txt")).unwrap();
    let summary = Summary::parse(&text);
    assert_eq!(summary.get("run.job"), Some("derive"));
    assert_eq!(summary.get("run.status"), Some("ok"));
    // the echoed configuration parses back to the one that was loaded
    assert_eq!(config_from_summary(&text).unwrap(), load_config(&cfg).unwrap());
    // regime violations of the reference medium show up as warnings
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: regime"));
}

#[test]
fn strict_regime_rejects_reference_medium() {
    let tmp = tempfile::tempdir().unwrap();
    let text = base_text().replace("regime_strict  = false", "regime_strict  = true");
    let cfg = write_cfg(tmp.path(), "strict.cfg", &text);
    let out = timebin("derive", &cfg, &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("regime"));
}

#[test]
fn bad_config_reports_every_problem_with_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{}\nbogus_key = 1\nwavelength = 780 nm\n", base_text());
    let cfg = write_cfg(tmp.path(), "bad.cfg", &text);
    let out = timebin("derive", &cfg, &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    let n = text.lines().count();
    assert!(err.contains(&format!("line {}", n - 1)), "{err}");
    assert!(err.contains(&format!("line {n}")), "{err}");
    assert!(err.contains("bogus_key") && err.contains("wavelength"), "{err}");
    assert!(!tmp.path().join("out/summary.txt").exists());
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = timebin("derive", &tmp.path().join("nope.cfg"), tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn truncated_time_window_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let text = base_text().replace("coupling_scale = 0", "coupling_scale = 1") + "t_max = 8\n";
    let cfg = write_cfg(tmp.path(), "short.cfg", &text);
    let out = timebin("propagate", &cfg, &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not conserved"));
}

#[test]
fn uncoupled_propagation_is_a_pure_delay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("rb87_no_coupling.cfg");
    let out = timebin("propagate", &cfg, tmp.path());
    assert_eq!(out.status.code(), Some(0));

    let summary = Summary::parse(&std::fs::read_to_string(tmp.path().join("summary.txt")).unwrap());
    let v1: f64 = summary.get("frame.v1").unwrap().parse().unwrap();
    let (header, input) = read_csv(&tmp.path().join("input.csv"));
    assert_eq!(header, "t,re,im");
    let input: Vec<Vec<f64>> = input.iter().map(|r| vec![r[0], r[1], r[2], r[1] * r[1] + r[2] * r[2]]).collect();
    let (header, at_l) = read_csv(&tmp.path().join("envelope_02.csv"));
    assert_eq!(header, "t,re_phi1,im_phi1,abs2_phi1,abs2_phi2");
    assert_eq!(input.len(), at_l.len());

    // |Φ1(L, t)|² = |f1(t - 1/ṽ1)|²: compare at the peaks and the total weight
    let peak = |rows: &[Vec<f64>]| rows.iter().max_by(|a, b| a[3].total_cmp(&b[3])).map(|r| (r[0], r[3])).unwrap();
    let (t_in, h_in) = peak(&input);
    let (t_out, h_out) = peak(&at_l);
    let dt = input[1][0] - input[0][0];
    assert!((t_out - t_in - 1.0 / v1).abs() <= dt, "{t_out} - {t_in} vs {}", 1.0 / v1);
    assert!((h_out - h_in).abs() < 1e-3 * h_in);
    assert!(at_l.iter().all(|r| r[4] == 0.0));
}

#[test]
fn bell_job_reports_the_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = timebin("bell", &configs().join("rb87_reference.cfg"), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_csv(&tmp.path().join("bell.csv"));
    assert_eq!(header, "J,B");
    assert_eq!(rows[0], vec![0.0, -2.0]);
    let min = rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    assert!((min + 2.1759).abs() < 1e-3, "{min}");

    let summary = Summary::parse(&std::fs::read_to_string(tmp.path().join("summary.txt")).unwrap());
    assert_eq!(summary.get("results.violates_local_bound"), Some("true"));
}

#[test]
fn scan_z_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = timebin("scan-z", &configs().join("rb87_reference.cfg"), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_csv(&tmp.path().join("scan_z.csv"));
    assert_eq!(header, "z,n1,n2");
    assert_eq!(rows.len(), 101);
    assert!((rows[0][1] - 1.0).abs() < 1e-8 && rows[0][2] == 0.0);
    for r in &rows {
        assert!((r[1] + r[2] - 1.0).abs() < 1e-4);
    }
}
