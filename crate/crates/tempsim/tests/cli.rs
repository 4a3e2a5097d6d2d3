//! Binary-level tests: subcommand behavior, exit codes and reproducibility
//! of emitted files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tempsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tempsim"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    tempsim()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p).unwrap();
    }
    fs::write(path, text).unwrap();
}

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

const SMOKE_SWEEP: &str = r#"
[sweep]
temp_start_c = 0.0
temp_stop_c = 100.0
temp_step_c = 10.0
vdd_v = [0.6]

[outputs]
directory = "out"
"#;

#[test]
fn validate_default_scenario_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["validate"]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("config_hash="), "{stdout}");
}

#[test]
fn validate_rejects_bad_scenario_with_field_path_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("bad.toml");
    write(
        &scn,
        "[sweep]\ntemp_start_c = 0.0\ntemp_stop_c = 150.0\ntemp_step_c = 1.0\nvdd_v = [0.6]\n",
    );
    let out = run_in(dir.path(), &["--config", "bad.toml", "validate"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("sweep"), "{stderr}");
}

#[test]
fn sweep_smoke_monotone_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("scn.toml"), SMOKE_SWEEP);
    let out = run_in(dir.path(), &["--config", "scn.toml", "sweep"]);
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "temp_C,vdd_V,die_id,v_vdd_V,i_supply_A,f_h_Hz,f_l_Hz,code,t_est_C,inaccuracy_C,power_W,energy_J"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    let codes: Vec<i64> = rows
        .iter()
        .map(|r| r.split(',').nth(7).unwrap().parse().unwrap())
        .collect();
    assert!(codes.windows(2).all(|w| w[1] > w[0]), "codes {codes:?}");
    assert!(dir.path().join("out/sweep_manifest.json").exists());
}

#[test]
fn sweep_default_frequency_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let root = repo_root();
    let scn = root.join("scenarios/default_sweep.toml");
    let out = run_in(
        dir.path(),
        &["--config", scn.to_str().unwrap(), "--out", "o", "sweep"],
    );
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(dir.path().join("o/sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 101);
    let f_l = |row: &str| -> f64 { row.split(',').nth(6).unwrap().parse().unwrap() };
    let first = f_l(rows.first().unwrap());
    let last = f_l(rows.last().unwrap());
    assert!((first / 17e3 - 1.0).abs() < 0.01, "f_l(0C) = {first}");
    assert!((last / 31.8e3 - 1.0).abs() < 0.01, "f_l(100C) = {last}");
}

#[test]
fn vdd_sweep_power_span() {
    let dir = tempfile::tempdir().unwrap();
    let scn = repo_root().join("scenarios/vdd_sweep.toml");
    let out = run_in(
        dir.path(),
        &["--config", scn.to_str().unwrap(), "--out", "o", "sweep", "--jobs", "4"],
    );
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(dir.path().join("o/sweep.csv")).unwrap();
    let mut power_by_vdd: Vec<(f64, f64)> = Vec::new();
    for row in csv.lines().skip(2) {
        let f: Vec<&str> = row.split(',').collect();
        let t: f64 = f[0].parse().unwrap();
        if t == 25.0 {
            power_by_vdd.push((f[1].parse().unwrap(), f[10].parse().unwrap()));
        }
    }
    assert_eq!(power_by_vdd.len(), 13);
    let p06 = power_by_vdd.first().unwrap().1;
    let p18 = power_by_vdd.last().unwrap().1;
    assert!((p06 / 1.57e-6 - 1.0).abs() < 0.15);
    assert!((p18 / 5.61e-6 - 1.0).abs() < 0.15);
    assert!(power_by_vdd.windows(2).all(|w| w[1].1 > w[0].1));
}

#[test]
fn montecarlo_without_campaign_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("scn.toml"), SMOKE_SWEEP);
    let out = run_in(dir.path(), &["--config", "scn.toml", "montecarlo"]);
    assert_eq!(out.status.code(), Some(2));
}

const SMALL_MC: &str = r#"
[sweep]
temp_start_c = 0.0
temp_stop_c = 100.0
temp_step_c = 1.0
vdd_v = [0.6]

[campaign]
n_dies = 4
master_seed = 20220601
corners = ["FS", "SF"]

[outputs]
directory = "out"
"#;

#[test]
fn montecarlo_emits_reports_and_corner_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("scn.toml"), SMALL_MC);
    let out = run_in(dir.path(), &["--config", "scn.toml", "montecarlo"]);
    assert!(out.status.success(), "{out:?}");
    let reports: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/montecarlo_reports.json")).unwrap())
            .unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 4);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/montecarlo_summary.json")).unwrap())
            .unwrap();
    let corners = summary["corners"].as_array().unwrap();
    assert_eq!(corners.len(), 2);
    let fs_err = corners[0]["inaccuracy_at_50c"].as_f64().unwrap();
    let sf_err = corners[1]["inaccuracy_at_50c"].as_f64().unwrap();
    assert!((fs_err + 1.14).abs() < 0.3, "FS {fs_err}");
    assert!((sf_err - 1.16).abs() < 0.3, "SF {sf_err}");
    // r_fom identity on every emitted report
    for r in reports.as_array().unwrap() {
        let e = r["energy_per_conv_j"].as_f64().unwrap();
        let n = r["noise_resolution_c"].as_f64().unwrap();
        let fom = r["r_fom_nj_k2"].as_f64().unwrap();
        if n > 0.0 {
            assert!((fom - e * 1e9 * n * n).abs() < 1e-12);
        }
    }
}

#[test]
fn single_die_zero_sigma_summary_equals_report() {
    let dir = tempfile::tempdir().unwrap();
    let scn = r#"
[sweep]
temp_start_c = 0.0
temp_stop_c = 100.0
temp_step_c = 1.0
vdd_v = [0.6]

[campaign]
n_dies = 1
master_seed = 5

[campaign.variation]
sigma_vth = 0.0
sigma_i0 = 0.0
sigma_cap = 0.0

[outputs]
directory = "out"
"#;
    write(&dir.path().join("scn.toml"), scn);
    let out = run_in(dir.path(), &["--config", "scn.toml", "montecarlo"]);
    assert!(out.status.success(), "{out:?}");
    let reports: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/montecarlo_reports.json")).unwrap())
            .unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/montecarlo_summary.json")).unwrap())
            .unwrap();
    let r = &reports.as_array().unwrap()[0];
    let peak = r["max_inacc_c"]
        .as_f64()
        .unwrap()
        .abs()
        .max(r["min_inacc_c"].as_f64().unwrap().abs());
    for key in ["peak_inacc_min_c", "peak_inacc_median_c", "peak_inacc_max_c"] {
        assert_eq!(summary[key].as_f64().unwrap(), peak, "{key}");
    }
    assert_eq!(
        summary["rms_inacc_median_c"].as_f64().unwrap(),
        r["rms_inacc_c"].as_f64().unwrap()
    );
}

#[test]
fn seed_override_changes_population() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("scn.toml"), SMALL_MC);
    assert!(run_in(dir.path(), &["--config", "scn.toml", "--out", "a", "montecarlo"]).status.success());
    assert!(run_in(
        dir.path(),
        &["--config", "scn.toml", "--out", "b", "--seed", "99", "montecarlo"]
    )
    .status
    .success());
    let a = fs::read_to_string(dir.path().join("a/montecarlo_reports.json")).unwrap();
    let b = fs::read_to_string(dir.path().join("b/montecarlo_reports.json")).unwrap();
    assert_ne!(a, b);
}

const NOISE_SCN: &str = r#"
[sweep]
vdd_v = [0.6]
temp_start_c = 0.0
temp_stop_c = 100.0
temp_step_c = 1.0

[noise]
enable = true
repeats = 200
master_seed = 1

[outputs]
directory = "out"
"#;

#[test]
fn resolution_sigma_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("scn.toml"), NOISE_SCN);
    let out = run_in(dir.path(), &["--config", "scn.toml", "--out", "r1", "resolution"]);
    assert!(out.status.success(), "{out:?}");
    let art: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r1/resolution.json")).unwrap())
            .unwrap();
    let sigma_lsb = art["sigma_lsb"].as_f64().unwrap();
    assert!((sigma_lsb - 1.84).abs() < 0.3, "sigma {sigma_lsb} LSB");
    assert_eq!(art["codes"].as_array().unwrap().len(), 200);
    // byte-identical on rerun with the same seed
    assert!(run_in(dir.path(), &["--config", "scn.toml", "--out", "r2", "resolution"]).status.success());
    assert_eq!(
        fs::read(dir.path().join("r1/resolution.json")).unwrap(),
        fs::read(dir.path().join("r2/resolution.json")).unwrap()
    );
}

#[test]
fn resolution_without_jitter_yields_identical_codes() {
    let dir = tempfile::tempdir().unwrap();
    // canonical sensor with the jitter switched off
    let mut cfg = tempsim::SensorConfig::canonical().clone();
    cfg.osc.jitter_rel_sigma = 0.0;
    write(&dir.path().join("quiet.toml"), &cfg.to_toml_string().unwrap());
    let scn = r#"
[sensor]
config_path = "quiet.toml"

[sweep]
vdd_v = [0.6]
temp_start_c = 0.0
temp_stop_c = 100.0
temp_step_c = 1.0

[noise]
enable = true
repeats = 200
master_seed = 1

[outputs]
directory = "out"
"#;
    write(&dir.path().join("scn.toml"), scn);
    let out = run_in(dir.path(), &["--config", "scn.toml", "resolution"]);
    assert!(out.status.success(), "{out:?}");
    let art: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/resolution.json")).unwrap())
            .unwrap();
    assert_eq!(art["sigma_lsb"].as_f64().unwrap(), 0.0);
    assert_eq!(art["histogram"].as_array().unwrap().len(), 1);
}

#[test]
fn compare_recomputes_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let rows = repo_root().join("data/comparison_rows.csv");
    let out = run_in(
        dir.path(),
        &["--out", "c", "compare", "--rows", rows.to_str().unwrap()],
    );
    assert!(out.status.success(), "{out:?}");
    let txt = fs::read_to_string(dir.path().join("c/compare.txt")).unwrap();
    assert!(txt.contains("this-work"), "{txt}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c/compare.json")).unwrap())
            .unwrap();
    let first = &json.as_array().unwrap()[0];
    assert!((first["relative_inacc_pct"].as_f64().unwrap() - 2.85).abs() < 0.01);
    assert!((first["r_fom_nj_k2"].as_f64().unwrap() - 0.061).abs() < 0.001);
}

#[test]
fn compare_rejects_zero_range_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("rows.csv"),
        "name,energy_nj,resolution_c,range_c,min_inacc_c,max_inacc_c\nz,1.0,0.2,0,-1,1\n",
    );
    let out = run_in(dir.path(), &["compare", "--rows", "rows.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_summarizes_and_rejects_mixed_hashes() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("scn.toml"), SMOKE_SWEEP);
    assert!(run_in(dir.path(), &["--config", "scn.toml", "sweep"]).status.success());
    let out = run_in(dir.path(), &["report", "--inputs", "out"]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("config_hash:"), "{stdout}");
    assert!(stdout.contains("sweep.csv: 11 data rows"), "{stdout}");

    // Corrupt the manifest hash: report must refuse to mix.
    let manifest_path = dir.path().join("out/sweep_manifest.json");
    let text = fs::read_to_string(&manifest_path).unwrap();
    let mut manifest: serde_json::Value = serde_json::from_str(&text).unwrap();
    manifest["config_hash"] = serde_json::Value::String("deadbeef".into());
    write(&manifest_path, &serde_json::to_string_pretty(&manifest).unwrap());
    let out = run_in(dir.path(), &["report", "--inputs", "out"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("hash"), "{stderr}");
}

#[test]
fn fit_writes_config_and_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--out", "f", "fit"]);
    assert!(out.status.success(), "{out:?}");
    assert!(dir.path().join("f/fitted_config.toml").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("f/fit_report.json")).unwrap())
            .unwrap();
    assert!(report["worst_rel_err"].as_f64().unwrap() < 1e-9);
    // the emitted config is loadable and matches the canonical hash
    let text = fs::read_to_string(dir.path().join("f/fitted_config.toml")).unwrap();
    let cfg = tempsim::SensorConfig::from_toml_str(&text).unwrap();
    assert_eq!(cfg.config_hash(), tempsim::SensorConfig::canonical().config_hash());
}

#[test]
fn shipped_scenarios_validate() {
    let root = repo_root();
    for name in [
        "scenarios/default_sweep.toml",
        "scenarios/vdd_sweep.toml",
        "scenarios/montecarlo_20die.toml",
        "scenarios/noise_resolution.toml",
    ] {
        let dir = tempfile::tempdir().unwrap();
        let path = root.join(name);
        let out = run_in(
            dir.path(),
            &["--config", path.to_str().unwrap(), "validate"],
        );
        assert!(out.status.success(), "{name}: {out:?}");
    }
}
