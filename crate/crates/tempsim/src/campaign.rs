//! Scenario execution: sweeps, Monte Carlo campaigns, noise-resolution runs
//! and the comparison/report stages, with deterministic parallelism and
//! reproducible CSV/JSON artifacts.
//!
//! Grid points are dispatched to a fixed-size worker pool; results are
//! gathered and emitted in sorted order, so output bytes do not depend on
//! the worker count or scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SensorConfig;
use crate::error::{Error, Result};
use crate::metrology::{
    inaccuracy_stats, noise_resolution, population_three_sigma, two_point_calibrate,
    MetricsReport,
};
use crate::pipeline::{calibration_codes, evaluate_point};
use crate::scenario::Scenario;
use crate::stats::{linear_fit, median};
use crate::variation::{apply_corner, apply_die, sample_die, derive_seed, Corner, DieSample};

/// Run provenance embedded in every artifact. Worker count is deliberately
/// not recorded: outputs are byte-identical at any parallelism level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub master_seed: Option<u64>,
}

impl RunManifest {
    fn new(command: &str, config_hash: String, master_seed: Option<u64>) -> Self {
        RunManifest {
            tool: "tempsim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash,
            master_seed,
        }
    }
}

/// Paths produced by one command.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("json serialization failed: {e}")))?;
    text.push('\n');
    write_file(path, &text)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

/// SI value formatting used in CSV cells; fixed width keeps byte output
/// independent of the value's magnitude path.
fn si(x: f64) -> String {
    format!("{x:.9e}")
}

/// The dies of a campaign (one nominal die when no campaign is configured).
fn campaign_dies(scn: &Scenario, jitter: f64) -> Vec<DieSample> {
    match &scn.campaign {
        None => vec![DieSample::nominal(jitter)],
        Some(c) => (0..c.n_dies)
            .map(|i| {
                sample_die(
                    &c.variation,
                    jitter,
                    derive_seed(c.master_seed, &[i as u64]),
                )
            })
            .collect(),
    }
}

fn master_seed(scn: &Scenario) -> Option<u64> {
    scn.campaign
        .as_ref()
        .map(|c| c.master_seed)
        .or(scn.noise.as_ref().and_then(|n| n.master_seed))
}

pub const SWEEP_CSV_HEADER: &str =
    "temp_C,vdd_V,die_id,v_vdd_V,i_supply_A,f_h_Hz,f_l_Hz,code,t_est_C,inaccuracy_C,power_W,energy_J";

/// One sweep grid point as emitted to CSV/JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub temp_c: f64,
    pub vdd_v: f64,
    pub die_id: u32,
    pub v_vdd_v: f64,
    pub i_supply_a: f64,
    pub f_h_hz: f64,
    pub f_l_hz: f64,
    pub code: u32,
    pub t_est_c: f64,
    pub inaccuracy_c: f64,
    pub power_w: f64,
    pub energy_j: f64,
}

impl SweepRow {
    fn to_csv(&self) -> String {
        format!(
            "{:.3},{:.3},{},{},{},{},{},{},{:.6},{:.6},{},{}",
            self.temp_c,
            self.vdd_v,
            self.die_id,
            si(self.v_vdd_v),
            si(self.i_supply_a),
            si(self.f_h_hz),
            si(self.f_l_hz),
            self.code,
            self.t_est_c,
            self.inaccuracy_c,
            si(self.power_w),
            si(self.energy_j),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepJson<'a> {
    config_hash: &'a str,
    rows: &'a [SweepRow],
}

/// Full factorial sweep: dies × supplies × temperatures, one row per grid
/// point, calibrated per (die, supply).
pub fn run_sweep(
    scn: &Scenario,
    base: &SensorConfig,
    out_dir: &Path,
    jobs: usize,
) -> Result<Artifacts> {
    let temps = scn.sweep.temperatures();
    let dies = campaign_dies(scn, 0.0);
    let hash = base.config_hash();

    struct Lane {
        die_id: u32,
        vdd: f64,
        rows: Vec<SweepRow>,
    }

    let mut lanes: Vec<(u32, f64)> = Vec::new();
    for (i, _) in dies.iter().enumerate() {
        for &v in &scn.sweep.vdd_v {
            lanes.push((i as u32, v));
        }
    }

    let worker = |&(die_id, vdd): &(u32, f64)| -> Result<Lane> {
        let cfg = apply_die(base, &dies[die_id as usize]);
        let (c10, c90) = calibration_codes(&cfg, vdd, 10.0, 90.0)?;
        let cal = two_point_calibrate(c10, c90)?;
        let mut rows = Vec::with_capacity(temps.len());
        for &t in &temps {
            let p = evaluate_point(&cfg, vdd, t)?;
            let t_est = cal.estimate(p.code as f64);
            rows.push(SweepRow {
                temp_c: t,
                vdd_v: vdd,
                die_id,
                v_vdd_v: p.state.v_vdd,
                i_supply_a: p.state.i_supply,
                f_h_hz: p.f_h,
                f_l_hz: p.f_l,
                code: p.code,
                t_est_c: t_est,
                inaccuracy_c: t_est - t,
                power_w: p.power,
                energy_j: p.energy,
            });
        }
        Ok(Lane {
            die_id,
            vdd,
            rows,
        })
    };

    let mut results: Vec<Lane> = pool(jobs)?.install(|| {
        lanes
            .par_iter()
            .map(worker)
            .collect::<Result<Vec<Lane>>>()
    })?;
    results.sort_by(|a, b| {
        (a.die_id, a.vdd)
            .partial_cmp(&(b.die_id, b.vdd))
            .unwrap()
    });
    let rows: Vec<SweepRow> = results.into_iter().flat_map(|l| l.rows).collect();

    let mut artifacts = Artifacts::default();
    if scn.outputs.formats.iter().any(|f| f == "csv") {
        let mut csv = format!("# config_hash={hash}\n{SWEEP_CSV_HEADER}\n");
        for row in &rows {
            csv.push_str(&row.to_csv());
            csv.push('\n');
        }
        let csv_path = out_dir.join("sweep.csv");
        write_file(&csv_path, &csv)?;
        artifacts.files.push(csv_path);
    }
    if scn.outputs.formats.iter().any(|f| f == "json") {
        let json_path = out_dir.join("sweep.json");
        write_json(
            &json_path,
            &SweepJson {
                config_hash: &hash,
                rows: &rows,
            },
        )?;
        artifacts.files.push(json_path);
    }
    let manifest = RunManifest::new("sweep", hash, master_seed(scn));
    let manifest_path = out_dir.join("sweep_manifest.json");
    write_json(&manifest_path, &manifest)?;
    artifacts.files.push(manifest_path);
    Ok(artifacts)
}

/// Per-die report plus identifying fields, as emitted in the report array.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DieReport {
    pub die_id: u32,
    pub seed: u64,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

/// Corner characterization entry of the Monte Carlo summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CornerOutcome {
    pub corner: String,
    pub inaccuracy_at_50c: f64,
    pub peak_inaccuracy_c: f64,
    pub max_code: u32,
    pub monotone: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PopulationSummary {
    pub config_hash: String,
    pub n_dies: u32,
    pub vdd_v: Vec<f64>,
    pub peak_inacc_min_c: f64,
    pub peak_inacc_median_c: f64,
    pub peak_inacc_max_c: f64,
    pub rms_inacc_min_c: f64,
    pub rms_inacc_median_c: f64,
    pub rms_inacc_max_c: f64,
    pub three_sigma_worst_c: f64,
    pub min_adj_r2: f64,
    pub corners: Vec<CornerOutcome>,
}

struct DieOutcome {
    die_id: u32,
    seed: u64,
    samples: Vec<(f64, f64)>,
    per_temp_errors: Vec<Vec<f64>>,
    counter_resolution: f64,
    adj_r2: f64,
    energy_j: f64,
    conv_time_s: f64,
    noise_resolution_c: f64,
}

/// Monte Carlo campaign: die population metrics plus corner outcomes.
pub fn run_montecarlo(
    scn: &Scenario,
    base: &SensorConfig,
    out_dir: &Path,
    jobs: usize,
) -> Result<Artifacts> {
    let campaign = scn
        .campaign
        .as_ref()
        .ok_or_else(|| Error::Config("montecarlo requires a [campaign] section".into()))?;
    let temps = scn.sweep.temperatures();
    let vdds = scn.sweep.vdd_v.clone();
    let noise = scn.noise.clone().filter(|n| n.enable);
    let jitter = noise
        .as_ref()
        .map(|_| base.osc.jitter_rel_sigma)
        .unwrap_or(0.0);
    let dies = campaign_dies(scn, jitter);
    let hash = base.config_hash();

    let worker = |die_id: usize| -> Result<DieOutcome> {
        let die = &dies[die_id];
        let cfg = apply_die(base, die);
        let mut samples = Vec::with_capacity(vdds.len() * temps.len());
        let mut per_temp_errors = vec![Vec::with_capacity(vdds.len()); temps.len()];
        let mut counter_resolution = 0.0;
        let mut min_r2 = f64::INFINITY;
        for (vi, &vdd) in vdds.iter().enumerate() {
            let (c10, c90) = calibration_codes(&cfg, vdd, 10.0, 90.0)?;
            let cal = two_point_calibrate(c10, c90)?;
            if vi == 0 {
                counter_resolution = cal.slope_c_per_lsb();
            }
            let mut code_curve = Vec::with_capacity(temps.len());
            for (ti, &t) in temps.iter().enumerate() {
                let p = evaluate_point(&cfg, vdd, t)?;
                let err = cal.estimate(p.code as f64) - t;
                samples.push((t, t + err));
                per_temp_errors[ti].push(err);
                code_curve.push((t, p.code as f64));
            }
            min_r2 = min_r2.min(linear_fit(&code_curve)?.adj_r_squared);
        }
        // Table I operating point: 0.6 V, 30 degC.
        let p_e = evaluate_point(&cfg, 0.6, 30.0)?;
        let noise_resolution_c = match &noise {
            None => 0.0,
            Some(nspec) => {
                let seed = derive_seed(
                    nspec.master_seed.unwrap_or(campaign.master_seed),
                    &[die_id as u64, 0xA0],
                );
                noise_resolution(&cfg, nspec.temp_c, nspec.vdd_v, nspec.repeats, seed)?.sigma_c
            }
        };
        Ok(DieOutcome {
            die_id: die_id as u32,
            seed: die.seed,
            samples,
            per_temp_errors,
            counter_resolution,
            adj_r2: min_r2,
            energy_j: p_e.energy,
            conv_time_s: p_e.t_conv,
            noise_resolution_c,
        })
    };

    let mut outcomes: Vec<DieOutcome> = pool(jobs)?.install(|| {
        (0..dies.len())
            .into_par_iter()
            .map(worker)
            .collect::<Result<Vec<_>>>()
    })?;
    outcomes.sort_by_key(|o| o.die_id);

    // Population 3-sigma: per temperature across dies, worst over temperature.
    let mut per_temp_population: Vec<Vec<f64>> = vec![Vec::new(); temps.len()];
    for o in &outcomes {
        for (ti, errs) in o.per_temp_errors.iter().enumerate() {
            per_temp_population[ti].extend_from_slice(errs);
        }
    }
    let three_sigma = population_three_sigma(&per_temp_population);

    let mut reports = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        let inacc = inaccuracy_stats(&o.samples)?;
        reports.push(DieReport {
            die_id: o.die_id,
            seed: o.seed,
            metrics: MetricsReport::assemble(
                inacc,
                three_sigma,
                o.counter_resolution,
                o.noise_resolution_c,
                0.0,
                o.energy_j,
                o.conv_time_s,
                o.adj_r2,
            ),
        });
    }

    // Corner characterization at the first supply.
    let mut corners = Vec::new();
    for name in &campaign.corners {
        let corner = Corner::nominal(*name);
        corners.push(characterize_corner(base, &corner, &temps, vdds[0])?);
    }

    let peaks: Vec<f64> = reports.iter().map(|r| r.metrics.peak_inacc_c()).collect();
    let rmss: Vec<f64> = reports.iter().map(|r| r.metrics.rms_inacc_c).collect();
    let summary = PopulationSummary {
        config_hash: hash.clone(),
        n_dies: campaign.n_dies,
        vdd_v: vdds,
        peak_inacc_min_c: peaks.iter().copied().fold(f64::INFINITY, f64::min),
        peak_inacc_median_c: median(&peaks),
        peak_inacc_max_c: peaks.iter().copied().fold(0.0, f64::max),
        rms_inacc_min_c: rmss.iter().copied().fold(f64::INFINITY, f64::min),
        rms_inacc_median_c: median(&rmss),
        rms_inacc_max_c: rmss.iter().copied().fold(0.0, f64::max),
        three_sigma_worst_c: three_sigma,
        min_adj_r2: reports
            .iter()
            .map(|r| r.metrics.adj_r2)
            .fold(f64::INFINITY, f64::min),
        corners,
    };

    let mut artifacts = Artifacts::default();
    let reports_path = out_dir.join("montecarlo_reports.json");
    write_json(&reports_path, &reports)?;
    artifacts.files.push(reports_path);
    let summary_path = out_dir.join("montecarlo_summary.json");
    write_json(&summary_path, &summary)?;
    artifacts.files.push(summary_path);
    let manifest = RunManifest::new("montecarlo", hash, Some(campaign.master_seed));
    let manifest_path = out_dir.join("montecarlo_manifest.json");
    write_json(&manifest_path, &manifest)?;
    artifacts.files.push(manifest_path);
    Ok(artifacts)
}

/// Sweep a corner-shifted configuration and characterize its calibrated
/// error curve.
pub fn characterize_corner(
    base: &SensorConfig,
    corner: &Corner,
    temps: &[f64],
    vdd: f64,
) -> Result<CornerOutcome> {
    let cfg = apply_corner(base, corner);
    let (c10, c90) = calibration_codes(&cfg, vdd, 10.0, 90.0)?;
    let cal = two_point_calibrate(c10, c90)?;
    let mut peak = 0.0f64;
    let mut err50 = f64::NAN;
    let mut max_code = 0u32;
    let mut monotone = true;
    let mut prev_code: Option<u32> = None;
    for &t in temps {
        let p = evaluate_point(&cfg, vdd, t)?;
        let err = cal.estimate(p.code as f64) - t;
        peak = peak.max(err.abs());
        if (t - 50.0).abs() < 1e-9 {
            err50 = err;
        }
        max_code = max_code.max(p.code);
        if let Some(prev) = prev_code {
            monotone &= p.code >= prev;
        }
        prev_code = Some(p.code);
    }
    Ok(CornerOutcome {
        corner: corner.name.to_string(),
        inaccuracy_at_50c: err50,
        peak_inaccuracy_c: peak,
        max_code,
        monotone,
    })
}

/// Output of the repeated-reading (noise histogram) experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolutionArtifact {
    pub config_hash: String,
    pub master_seed: u64,
    pub temp_c: f64,
    pub vdd_v: f64,
    pub repeats: u32,
    pub sigma_lsb: f64,
    pub sigma_c: f64,
    pub mean_code: f64,
    pub codes: Vec<u32>,
    /// (code, count) pairs, sorted by code.
    pub histogram: Vec<(u32, u32)>,
}

/// Repeated jittered readings at one operating point.
pub fn run_resolution(scn: &Scenario, base: &SensorConfig, out_dir: &Path) -> Result<Artifacts> {
    let noise = scn
        .noise
        .as_ref()
        .filter(|n| n.enable)
        .ok_or_else(|| Error::Config("resolution requires [noise] with enable = true".into()))?;
    let seed = noise
        .master_seed
        .ok_or_else(|| Error::Config("noise.master_seed: required".into()))?;
    let res = noise_resolution(base, noise.temp_c, noise.vdd_v, noise.repeats, seed)?;
    let mut histogram: Vec<(u32, u32)> = Vec::new();
    let mut sorted = res.codes.clone();
    sorted.sort_unstable();
    for code in sorted {
        match histogram.last_mut() {
            Some((c, n)) if *c == code => *n += 1,
            _ => histogram.push((code, 1)),
        }
    }
    let artifact = ResolutionArtifact {
        config_hash: base.config_hash(),
        master_seed: seed,
        temp_c: noise.temp_c,
        vdd_v: noise.vdd_v,
        repeats: noise.repeats,
        sigma_lsb: res.sigma_lsb,
        sigma_c: res.sigma_c,
        mean_code: res.mean_code,
        codes: res.codes,
        histogram,
    };
    let mut artifacts = Artifacts::default();
    let path = out_dir.join("resolution.json");
    write_json(&path, &artifact)?;
    artifacts.files.push(path);
    let manifest = RunManifest::new("resolution", base.config_hash(), Some(seed));
    let manifest_path = out_dir.join("resolution_manifest.json");
    write_json(&manifest_path, &manifest)?;
    artifacts.files.push(manifest_path);
    Ok(artifacts)
}

/// Recompute the comparison-table figures for externally supplied rows.
pub fn run_compare(rows_csv: &Path, out_dir: &Path) -> Result<Artifacts> {
    let text = fs::read_to_string(rows_csv)?;
    let rows = crate::metrology::parse_comparison_csv(&text)?;
    let entries = crate::metrology::comparison_table(&rows)?;
    let mut artifacts = Artifacts::default();
    let json_path = out_dir.join("compare.json");
    write_json(&json_path, &entries)?;
    artifacts.files.push(json_path);
    let txt_path = out_dir.join("compare.txt");
    write_file(&txt_path, &crate::metrology::render_comparison(&entries))?;
    artifacts.files.push(txt_path);
    Ok(artifacts)
}

/// Cross-check and summarize previously emitted artifacts. Files from
/// different config hashes in one directory are rejected.
pub fn run_report(inputs: &Path) -> Result<String> {
    let mut hashes: Vec<(String, String)> = Vec::new();
    let mut lines = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(inputs)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for path in &entries {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        if name.ends_with("_manifest.json") {
            let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| Error::Input(format!("{name}: {e}")))?;
            hashes.push((name.clone(), manifest.config_hash.clone()));
            lines.push(format!(
                "{name}: command={} version={} seed={:?}",
                manifest.command, manifest.version, manifest.master_seed
            ));
        } else if name == "sweep.csv" {
            let text = fs::read_to_string(path)?;
            if let Some(first) = text.lines().next() {
                if let Some(h) = first.strip_prefix("# config_hash=") {
                    hashes.push((name.clone(), h.to_string()));
                }
            }
            let rows = text.lines().filter(|l| !l.starts_with('#')).count().saturating_sub(1);
            lines.push(format!("sweep.csv: {rows} data rows"));
        } else if name == "sweep.json" {
            #[derive(Deserialize)]
            struct SweepFile {
                config_hash: String,
                rows: Vec<SweepRow>,
            }
            let file: SweepFile = serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| Error::Input(format!("{name}: {e}")))?;
            hashes.push((name.clone(), file.config_hash));
            lines.push(format!("sweep.json: {} data rows", file.rows.len()));
        } else if name == "montecarlo_summary.json" {
            let summary: PopulationSummary = serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| Error::Input(format!("{name}: {e}")))?;
            hashes.push((name.clone(), summary.config_hash.clone()));
            lines.push(format!(
                "montecarlo: {} dies, peak inaccuracy {:.3}/{:.3}/{:.3} degC (min/median/max), 3-sigma {:.3} degC",
                summary.n_dies,
                summary.peak_inacc_min_c,
                summary.peak_inacc_median_c,
                summary.peak_inacc_max_c,
                summary.three_sigma_worst_c
            ));
        } else if name == "resolution.json" {
            let art: ResolutionArtifact = serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| Error::Input(format!("{name}: {e}")))?;
            hashes.push((name.clone(), art.config_hash.clone()));
            lines.push(format!(
                "resolution: sigma {:.3} LSB = {:.4} degC over {} readings",
                art.sigma_lsb, art.sigma_c, art.repeats
            ));
        }
    }
    if hashes.is_empty() {
        return Err(Error::Input(format!(
            "no tempsim artifacts found in {}",
            inputs.display()
        )));
    }
    let first = &hashes[0].1;
    for (name, h) in &hashes {
        if h != first {
            return Err(Error::Config(format!(
                "config hash mismatch: {} carries {h}, expected {first}; refusing to mix runs",
                name
            )));
        }
    }
    let mut out = format!("config_hash: {first}\n");
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    Ok(out)
}
