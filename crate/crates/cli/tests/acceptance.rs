//! One PASS/FAIL line per acceptance criterion. Criteria 1 to 10 come from
//! the verification suite, whose tolerances are fixed in `verify.rs`;
//! criterion 11 times the suite plus the shipped six-ratio exact sweep.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use fluxladder_cli::config::ExperimentConfig;
use fluxladder_cli::figures::emit_figures;
use fluxladder_cli::output::write_sweep;
use fluxladder_cli::sweep::run_sweep;
use fluxladder_cli::verify;

/// Wall-clock budget of criterion 11.
const END_TO_END_BUDGET_S: f64 = 60.0;

fn main() -> ExitCode {
    let start = Instant::now();
    let cfg = ExperimentConfig::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml")).unwrap();
    let report = verify::run(Some(&cfg));
    let tmp = tempfile::tempdir().unwrap();
    let outputs = run_sweep(&cfg).unwrap();
    write_sweep(tmp.path(), &cfg.hash(), cfg.seed, &outputs).unwrap();
    let records: Vec<_> = outputs.iter().map(|o| o.record.clone()).collect();
    emit_figures(tmp.path(), &records).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let mut lines = Vec::new();
    for k in 1..=10 {
        let c = report.get(&format!("C{k}")).expect("criterion present in suite");
        lines.push((c.pass, format!("criterion {k} {} ({:.2} s): {}", c.name, c.elapsed_s, c.detail)));
    }
    let sweep_ok = outputs.len() == 6 && records.iter().all(|r| r.golden.iter().all(|g| g.pass));
    let suite_ok = report.all_passed();
    lines.push((
        elapsed < END_TO_END_BUDGET_S && sweep_ok && suite_ok,
        format!(
            "criterion 11 end-to-end: verify ({} checks, all pass: {suite_ok}) and six-ratio sweep (golden checks pass: {sweep_ok}) in {elapsed:.1} s (budget {END_TO_END_BUDGET_S} s)",
            report.checks.len()
        ),
    ));
    for (pass, line) in &lines {
        println!("{} {line}", if *pass { "PASS" } else { "FAIL" });
    }
    let failed = lines.iter().filter(|(p, _)| !p).count();
    println!("SUMMARY passed={} failed={failed}", lines.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        eprint!("{}", report.text());
        ExitCode::FAILURE
    }
}
