use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use fluxladder_cli::config::ExperimentConfig;
use fluxladder_cli::figures::emit_figures;
use fluxladder_cli::output::{read_records, write_sweep};
use fluxladder_cli::sweep::run_sweep;

const BIN: &str = env!("CARGO_BIN_EXE_fluxladder");

fn config(ratios: &str, plans: &str) -> String {
    format!(
        r#"
schema_version = 1
seed = 99
output = "unused"
mode = "exact_ground"
ratios = {ratios}

[lattice]
n_sites = 8
particles = 4
n_max = 1
j_rung = 1.0
{plans}
"#
    )
}

const ALL_PAIRS: &str = r#"
[[plans]]
kind = "current_correlation"
pairs = "all"
shots = 100000

[[plans]]
kind = "bond_kinetic"
rungs = [1, 3, 5, 7]
shots = 20000
delta = 5.0

[[plans]]
kind = "bond_kinetic"
rungs = [2, 4, 6]
shots = 20000
delta = 5.0
"#;

fn run_to(cfg: &ExperimentConfig, dir: &Path) {
    let outputs = run_sweep(cfg).unwrap();
    write_sweep(dir, &cfg.hash(), cfg.seed, &outputs).unwrap();
    let records: Vec<_> = outputs.into_iter().map(|o| o.record).collect();
    emit_figures(dir, &records).unwrap();
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if p.is_dir() {
            for (k, v) in tree(&p) {
                out.insert(format!("{name}/{k}"), v);
            }
        } else {
            out.insert(name, fs::read(&p).unwrap());
        }
    }
    out
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn empty_sweep_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let path = tmp.path().join("empty.toml");
    fs::write(&path, config("[]", ALL_PAIRS)).unwrap();
    let status = Command::new(BIN).args(["sweep", "--config"]).arg(&path).arg("--output").arg(&dir).status().unwrap();
    assert!(status.success());
    assert!(!dir.exists());
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let cfg = ExperimentConfig::parse(&config("[-1.22, 0.98]", ALL_PAIRS)).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_to(&cfg, a.path());
    run_to(&cfg, b.path());
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta.len(), 2 * 7 + 2);
    assert_eq!(ta, tb);
    let c = tempfile::tempdir().unwrap();
    run_to(&ExperimentConfig { seed: 100, ..cfg }, c.path());
    assert_ne!(ta["ratio_-1.22/shots.csv"], tree(c.path())["ratio_-1.22/shots.csv"]);
}

#[test]
fn correlation_table_has_fifteen_rows() {
    let cfg = ExperimentConfig::parse(&config("[-1.22]", ALL_PAIRS)).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    run_to(&cfg, tmp.path());
    let text = fs::read_to_string(tmp.path().join("ratio_-1.22/g.csv")).unwrap();
    assert!(text.contains(&format!("# config_hash={}", cfg.hash())));
    assert!(text.contains("provenance=\"oracle:"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 15);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        let (exact, shots, se): (f64, f64, f64) = (f[3].parse().unwrap(), f[4].parse().unwrap(), f[5].parse().unwrap());
        assert!(exact > 0.0);
        assert!(se > 0.0 && (shots - exact).abs() < 5.0 * se, "{row}");
    }
    let summary = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert_eq!(data_rows(&summary).len(), 1);
}

#[test]
fn figures_are_well_formed_and_reloadable() {
    let cfg = ExperimentConfig::parse(&config("[-1.22]", ALL_PAIRS)).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    run_to(&cfg, tmp.path());
    let sub = tmp.path().join("ratio_-1.22");
    let mut first = BTreeMap::new();
    for name in ["g_heatmap.svg", "g_distance.svg", "bonds.svg"] {
        let text = fs::read_to_string(sub.join(name)).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        first.insert(name, text);
        fs::remove_file(sub.join(name)).unwrap();
    }
    // every heatmap cell at pi flux is white or red: all correlations positive
    let doc = roxmltree::Document::parse(&first["g_heatmap.svg"]).unwrap();
    let cells: Vec<&str> = doc
        .descendants()
        .filter(|n| n.has_tag_name("rect") && n.attribute("stroke").is_some())
        .map(|n| n.attribute("fill").unwrap())
        .collect();
    assert_eq!(cells.len(), 49);
    let measured: Vec<&str> = cells.into_iter().filter(|f| *f != "#d0d0d0").collect();
    assert_eq!(measured.len(), 30);
    assert!(measured.iter().all(|f| f.starts_with("#ff")), "{measured:?}");

    let status = Command::new(BIN).args(["figures", "--output"]).arg(tmp.path()).status().unwrap();
    assert!(status.success());
    for (name, text) in first {
        assert_eq!(fs::read_to_string(sub.join(name)).unwrap(), text);
    }
    assert_eq!(read_records(tmp.path()).unwrap().len(), 1);
}

fn verify_output(cfg_text: &str) -> (bool, String) {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("c.toml");
    fs::write(&path, cfg_text).unwrap();
    let out = Command::new(BIN).args(["verify", "--config"]).arg(&path).output().unwrap();
    (out.status.success(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn verify_rejects_invalid_configs() {
    let noisy = format!("{}\n[noise]\nt1 = [10.0]\nt2r = [25.0]\n", config("[-1.22]", ALL_PAIRS));
    let (ok, text) = verify_output(&noisy);
    assert!(!ok);
    let line = text.lines().find(|l| l.contains(" CFG ")).unwrap();
    assert!(line.starts_with("FAIL") && line.contains("invalid noise model"), "{line}");
    assert!(text.lines().last().unwrap().starts_with("SUMMARY passed="));

    let overlap = config("[-1.22]", "[[plans]]\nkind = \"current_correlation\"\npairs = [[2, 3]]\nshots = 10\n");
    let (ok, text) = verify_output(&overlap);
    assert!(!ok);
    let line = text.lines().find(|l| l.contains(" CFG ")).unwrap();
    assert!(line.starts_with("FAIL") && line.contains("non-measurable pair"), "{line}");
}

#[test]
fn shipped_configs_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(root).unwrap() {
        let cfg = ExperimentConfig::load(entry.unwrap().path()).unwrap();
        cfg.validate().unwrap();
        n += 1;
    }
    assert!(n >= 4);
}
