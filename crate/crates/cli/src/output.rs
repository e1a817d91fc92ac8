//! Output files. Every CSV opens with `#` comment lines carrying the schema
//! version, config hash and seed; column layouts are listed in
//! `schema/config-v1.md`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::sweep::{RatioOutput, RatioRecord};

/// Directory name of one ratio, e.g. `ratio_-1.22` or `ratio_+0.98`.
pub fn ratio_dir(ratio: f64) -> String {
    format!("ratio_{ratio:+}")
}

fn header(config_hash: &str, seed: u64, what: &str) -> String {
    format!("# fluxladder schema {SCHEMA_VERSION}: {what}\n# config_hash={config_hash}\n# seed={seed}\n")
}

/// One comment line per golden comparison attached to the record.
fn golden_lines(rec: &RatioRecord) -> String {
    rec.golden
        .iter()
        .map(|g| {
            format!(
                "# golden {}: {} deviation={:e} tolerance={:e} provenance=\"{}\"\n",
                g.name,
                if g.pass { "pass" } else { "fail" },
                g.deviation,
                g.tolerance,
                g.provenance
            )
        })
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn g_csv(rec: &RatioRecord) -> String {
    let mut out = header(&rec.config_hash, rec.seed, "current correlations, 1-based rungs, units J^2");
    out.push_str(&golden_lines(rec));
    out.push_str("rung_i,rung_j,distance,exact,shots,stderr\n");
    for e in &rec.exact.g_matrix {
        let (i, j) = (e.rung_i + 1, e.rung_j + 1);
        let shot = rec.shots.correlations.iter().find(|p| p.rung_i == i && p.rung_j == j);
        let _ = writeln!(
            out,
            "{i},{j},{},{},{},{}",
            j - i,
            num(e.value),
            opt(shot.map(|s| s.value)),
            opt(shot.map(|s| s.stderr))
        );
    }
    out
}

pub fn rungs_csv(rec: &RatioRecord) -> String {
    let mut out = header(&rec.config_hash, rec.seed, "per-rung currents (units J) and bond kinetic energies");
    out.push_str(&golden_lines(rec));
    out.push_str("rung,current_exact,current_shots,current_stderr,bond_exact,bond_shots,bond_stderr\n");
    for r in 0..rec.exact.currents.len() {
        let c = rec.shots.currents.iter().find(|e| e.rung == r + 1);
        let b = rec.shots.bonds.iter().find(|e| e.rung == r + 1);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r + 1,
            num(rec.exact.currents[r]),
            opt(c.map(|e| e.value)),
            opt(c.map(|e| e.stderr)),
            num(rec.exact.bond_o[r]),
            opt(b.map(|e| e.value)),
            opt(b.map(|e| e.stderr)),
        );
    }
    out
}

pub fn shots_csv(out: &RatioOutput) -> String {
    let rec = &out.record;
    let mut s = header(&rec.config_hash, rec.seed, "raw readout counts, one block per plan");
    s.push_str(&golden_lines(rec));
    s.push_str("plan,plan_seed,bitstring,count\n");
    for (label, table) in &out.tables {
        for (bits, count) in &table.counts {
            let _ = writeln!(s, "{label},{},{bits},{count}", table.seed);
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub ratio: f64,
    pub flux: f64,
    pub energy: f64,
    pub chiral_c_exact: f64,
    pub chiral_c_shots: Option<f64>,
    pub chiral_c_stderr: Option<f64>,
    pub bond_order_exact: f64,
    pub bond_order_shots: Option<f64>,
    pub bond_order_stderr: Option<f64>,
    pub ramp_fidelity: Option<f64>,
    /// Golden comparisons as `name:pass|fail:provenance`.
    pub golden: Vec<String>,
}

impl SummaryRow {
    pub fn from_record(r: &RatioRecord) -> Self {
        SummaryRow {
            ratio: r.ratio,
            flux: r.flux,
            energy: r.energy,
            chiral_c_exact: r.exact.chiral_c,
            chiral_c_shots: r.shots.chiral_c.map(|e| e.value),
            chiral_c_stderr: r.shots.chiral_c.map(|e| e.stderr),
            bond_order_exact: r.exact.bond_order,
            bond_order_shots: r.shots.bond_order.map(|e| e.value),
            bond_order_stderr: r.shots.bond_order.map(|e| e.stderr),
            ramp_fidelity: r.ramp_fidelity,
            golden: r
                .golden
                .iter()
                .map(|g| format!("{}:{}:{}", g.name, if g.pass { "pass" } else { "fail" }, g.provenance))
                .collect(),
        }
    }
}

pub fn summary_csv(config_hash: &str, seed: u64, rows: &[SummaryRow]) -> String {
    let mut out = header(config_hash, seed, "order parameters per coupling ratio");
    out.push_str(
        "ratio,flux,energy,chiral_c_exact,chiral_c_shots,chiral_c_stderr,bond_order_exact,bond_order_shots,bond_order_stderr,ramp_fidelity,golden\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},\"{}\"",
            r.ratio,
            num(r.flux),
            num(r.energy),
            num(r.chiral_c_exact),
            opt(r.chiral_c_shots),
            opt(r.chiral_c_stderr),
            num(r.bond_order_exact),
            opt(r.bond_order_shots),
            opt(r.bond_order_stderr),
            opt(r.ramp_fidelity),
            r.golden.join(";")
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub rows: Vec<SummaryRow>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Writes every per-ratio file and the summaries; returns the paths written.
pub fn write_sweep(dir: &Path, config_hash: &str, seed: u64, outputs: &[RatioOutput]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if outputs.is_empty() {
        return Ok(written);
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for out in outputs {
        let sub = dir.join(ratio_dir(out.record.ratio));
        fs::create_dir_all(&sub)?;
        for (name, text) in [
            ("report.json", json(&out.record)),
            ("g.csv", g_csv(&out.record)),
            ("rungs.csv", rungs_csv(&out.record)),
            ("shots.csv", shots_csv(out)),
        ] {
            let p = sub.join(name);
            write(&p, &text)?;
            written.push(p);
        }
    }
    let rows: Vec<SummaryRow> = outputs.iter().map(|o| SummaryRow::from_record(&o.record)).collect();
    let p = dir.join("summary.csv");
    write(&p, &summary_csv(config_hash, seed, &rows))?;
    written.push(p);
    let p = dir.join("summary.json");
    write(&p, &json(&Summary { schema_version: SCHEMA_VERSION, config_hash: config_hash.into(), seed, rows }))?;
    written.push(p);
    Ok(written)
}

/// Loads every `ratio_*/report.json` below `dir`, sorted by ratio.
pub fn read_records(dir: &Path) -> Result<Vec<RatioRecord>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let p = entry?.path().join("report.json");
        if p.is_file() {
            let text = fs::read_to_string(&p)?;
            out.push(serde_json::from_str::<RatioRecord>(&text).with_context(|| format!("parsing {}", p.display()))?);
        }
    }
    out.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    Ok(out)
}
