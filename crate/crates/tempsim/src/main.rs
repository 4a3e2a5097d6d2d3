//! Scenario-driven command line for the temperature-sensor simulator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tempsim::campaign;
use tempsim::error::{Error, Result};
use tempsim::fit::{calibrate_corners, calibrate_jitter_sigma, fit_canonical, verify_anchors, AnchorSet};
use tempsim::scenario::Scenario;

#[derive(Parser)]
#[command(name = "tempsim", version, about = "Subthreshold temperature-sensor simulator")]
struct Cli {
    /// Scenario TOML; defaults to a single-die noiseless sweep at 0.6 V.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides the scenario's outputs.directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed override for campaigns and noise runs.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker count for sweeps and campaigns.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Restrict output formats (overrides the scenario's outputs.formats).
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the scenario (and its sensor config) without running.
    Validate,
    /// Run the parameter-fitting procedure against the anchor set and write
    /// the fitted configuration plus a residual report.
    Fit {
        /// Also re-derive the jitter and corner calibrations (slower).
        #[arg(long)]
        full: bool,
    },
    /// Factorial (die, supply, temperature) sweep to CSV.
    Sweep,
    /// Monte Carlo die campaign with per-die metrics and corner outcomes.
    Montecarlo,
    /// Repeated jittered readings at one operating point.
    Resolution,
    /// Recompute comparison-table figures for external sensor rows.
    Compare {
        /// CSV with header name,energy_nj,resolution_c,range_c,min_inacc_c,max_inacc_c[,...]
        #[arg(long)]
        rows: PathBuf,
    },
    /// Summarize previously emitted artifacts, refusing mixed config hashes.
    Report {
        /// Directory holding tempsim output files.
        #[arg(long)]
        inputs: PathBuf,
    },
}

fn load_scenario(cli: &Cli) -> Result<(Scenario, PathBuf)> {
    let (mut scn, dir) = match &cli.config {
        None => (Scenario::default(), PathBuf::from(".")),
        Some(path) => {
            let scn = Scenario::load(path)?;
            let dir = path
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            (scn, dir)
        }
    };
    if let Some(seed) = cli.seed {
        if let Some(c) = scn.campaign.as_mut() {
            c.master_seed = seed;
        }
        if let Some(n) = scn.noise.as_mut() {
            n.master_seed = Some(seed);
        }
    }
    if let Some(out) = &cli.out {
        scn.outputs.directory = out.clone();
    }
    if let Some(format) = &cli.format {
        scn.outputs.formats = vec![format.clone()];
    }
    Ok((scn, dir))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Validate => {
            let (scn, dir) = load_scenario(cli)?;
            scn.validate()?;
            let cfg = scn.sensor_config(&dir)?;
            cfg.validate()?;
            for w in scn.vdd_warnings() {
                eprintln!("warning: {w}");
            }
            println!("scenario ok; config_hash={}", cfg.config_hash());
            Ok(())
        }
        Command::Fit { full } => {
            let (scn, _) = load_scenario(cli)?;
            let anchors = AnchorSet::default();
            let cfg = fit_canonical(&anchors)?;
            let report = verify_anchors(&cfg, &anchors)?;
            let out_dir = scn.outputs.directory.clone();
            std::fs::create_dir_all(&out_dir)?;
            std::fs::write(out_dir.join("fitted_config.toml"), cfg.to_toml_string()?)?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Config(format!("fit report: {e}")))?;
            std::fs::write(out_dir.join("fit_report.json"), json + "\n")?;
            println!("fitted configuration written to {}", out_dir.display());
            for r in &report.residuals {
                println!(
                    "  {:<18} target {:>12.6e} achieved {:>12.6e} rel {:.2e}",
                    r.name, r.target, r.achieved, r.rel_err
                );
            }
            if *full {
                let sigma = calibrate_jitter_sigma(&cfg, 1.84, 200)?;
                println!("  jitter sigma_rel  {sigma:.6e}");
                let cc = calibrate_corners(&cfg)?;
                for c in &cc.corners {
                    println!(
                        "  corner {:<3} dvth_p {:+.4} dvth_n {:+.4} mm0 {:+.4} mm2 {:+.6}",
                        c.name, c.dvth_p, c.dvth_n, c.dvth_mm0, c.dvth_mm2
                    );
                }
                println!(
                    "  corner err50: FS {:+.3} degC, SF {:+.3} degC",
                    cc.fs_err50_c, cc.sf_err50_c
                );
            }
            Ok(())
        }
        Command::Sweep => {
            let (scn, dir) = load_scenario(cli)?;
            scn.validate()?;
            let cfg = scn.sensor_config(&dir)?;
            for w in scn.vdd_warnings() {
                eprintln!("warning: {w}");
            }
            let arts = campaign::run_sweep(&scn, &cfg, &scn.outputs.directory, cli.jobs)?;
            for f in arts.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Montecarlo => {
            let (scn, dir) = load_scenario(cli)?;
            scn.validate()?;
            let cfg = scn.sensor_config(&dir)?;
            let arts = campaign::run_montecarlo(&scn, &cfg, &scn.outputs.directory, cli.jobs)?;
            for f in arts.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Resolution => {
            let (scn, dir) = load_scenario(cli)?;
            scn.validate()?;
            let cfg = scn.sensor_config(&dir)?;
            let arts = campaign::run_resolution(&scn, &cfg, &scn.outputs.directory)?;
            for f in arts.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Compare { rows } => {
            let (scn, _) = load_scenario(cli)?;
            let arts = campaign::run_compare(rows, &scn.outputs.directory)?;
            for f in arts.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Report { inputs } => {
            let summary = campaign::run_report(inputs)?;
            print!("{summary}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
