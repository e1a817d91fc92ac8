use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use fluxladder_cli::config::{ExperimentConfig, Mode};
use fluxladder_cli::sweep::{evaluate_ratio, prepare, run_sweep, sweep_golden};
use fluxladder_cli::{figures, output, verify};

#[derive(Parser)]
#[command(name = "fluxladder", version, about = "Triangular flux-ladder simulator: sweeps, measurement emulation, verification")]
struct Cli {
    /// Experiment configuration (TOML, see schema/config-v1.md).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Base seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Shots per plan; overrides every plan in the config.
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Worker threads for the ratio sweep (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact studied eigenstate per ratio: energy, gap and order parameters.
    Ground,
    /// Ramp preparation fidelity per ratio (needs a [ramp] block).
    Ramp,
    /// Emulated readout of every plan at one ratio, printed as JSON.
    Measure {
        /// Coupling ratio; defaults to the first ratio of the config.
        #[arg(long, allow_hyphen_values = true)]
        ratio: Option<f64>,
    },
    /// Full sweep: per-ratio reports, CSV tables, summaries and figures.
    Sweep,
    /// Runs the verification suite; exit code 0 only if every check passes.
    Verify {
        /// Print the report as JSON instead of text lines.
        #[arg(long)]
        json: bool,
    },
    /// Redraws figures from the `report.json` files of an output directory.
    Figures,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_ref().context("--config is required for this command")?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(o) = &cli.output {
        cfg.output = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.shots {
        cfg.plans.iter_mut().for_each(|p| p.shots = n);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Ground => {
            let cfg = load(cli)?;
            cfg.validate()?;
            let cfg = ExperimentConfig { mode: Mode::ExactGround, ..cfg };
            for &r in &cfg.ratios {
                let p = prepare(&cfg, r)?;
                let spec = cfg.spec(r)?;
                let rep = fluxladder::observables::ObservableReport::exact(&p.state, &spec)?;
                println!(
                    "{}",
                    serde_json::json!({
                        "ratio": r, "flux": spec.flux, "energy": p.energy, "gap": p.gap, "degenerate": p.degenerate,
                        "chiral_c": rep.chiral_c, "bond_order": rep.bond_order, "max_abs_current":
                            rep.currents.iter().fold(0.0f64, |m, c| m.max(c.abs())),
                    })
                );
            }
            Ok(true)
        }
        Command::Ramp => {
            let cfg = load(cli)?;
            let cfg = ExperimentConfig { mode: Mode::RampPrepared, ..cfg };
            cfg.validate()?;
            for &r in &cfg.ratios {
                let p = prepare(&cfg, r)?;
                println!("{}", serde_json::json!({ "ratio": r, "fidelity": p.ramp_fidelity, "target_energy": p.energy }));
            }
            Ok(true)
        }
        Command::Measure { ratio } => {
            let cfg = load(cli)?;
            cfg.validate()?;
            let r = match ratio {
                Some(r) => *r,
                None => *cfg.ratios.first().context("config has no ratios")?,
            };
            let index = cfg.ratios.iter().position(|&x| x == r).unwrap_or(0);
            let out = evaluate_ratio(&cfg, index, r, &sweep_golden())?;
            print!("{}", output::json(&out.record.shots));
            Ok(true)
        }
        Command::Sweep => {
            let cfg = load(cli)?;
            let outputs = run_sweep(&cfg)?;
            let written = output::write_sweep(&cfg.output, &cfg.hash(), cfg.seed, &outputs)?;
            let records: Vec<_> = outputs.iter().map(|o| o.record.clone()).collect();
            let svgs = if cfg.figures { figures::emit_figures(&cfg.output, &records)? } else { Vec::new() };
            let mut ok = true;
            for rec in &records {
                for g in rec.golden.iter().filter(|g| !g.pass) {
                    ok = false;
                    eprintln!("golden mismatch at ratio {}: {} deviates by {:e} (tolerance {:e})", rec.ratio, g.name, g.deviation, g.tolerance);
                }
            }
            println!("wrote {} files and {} figures to {}", written.len(), svgs.len(), cfg.output.display());
            Ok(ok)
        }
        Command::Verify { json } => {
            let cfg = match &cli.config {
                Some(_) => Some(load(cli)?),
                None => None,
            };
            let report = verify::run(cfg.as_ref());
            if *json {
                print!("{}", output::json(&report));
            } else {
                print!("{}", report.text());
            }
            Ok(report.all_passed())
        }
        Command::Figures => {
            let dir = match (&cli.output, &cli.config) {
                (Some(d), _) => d.clone(),
                (None, Some(_)) => load(cli)?.output,
                (None, None) => bail!("give --output or --config"),
            };
            let records = output::read_records(&dir)?;
            let svgs = figures::emit_figures(&dir, &records)?;
            println!("wrote {} figures to {}", svgs.len(), dir.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
