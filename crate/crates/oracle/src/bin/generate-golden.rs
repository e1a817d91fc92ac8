//! Writes the golden files under `golden/` of this crate.
//!
//! Usage: `generate-golden [sweep|ramp|lindblad]...` (all when empty).

use std::path::PathBuf;
use std::time::Instant;

use fluxladder_oracle::golden::{lindblad_golden, ramp_golden, sweep_golden};

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden");
    std::fs::create_dir_all(&dir).expect("create golden dir");
    let args: Vec<String> = std::env::args().skip(1).collect();
    let wanted = |name: &str| args.is_empty() || args.iter().any(|a| a == name);
    let jobs: [(&str, fn() -> fluxladder::golden::GoldenSet); 3] = [
        ("sweep", sweep_golden),
        ("ramp", || ramp_golden(1000.0)),
        ("lindblad", || lindblad_golden(20000)),
    ];
    for (name, job) in jobs {
        if !wanted(name) {
            continue;
        }
        let t0 = Instant::now();
        let set = job();
        let path = dir.join(format!("{name}.json"));
        set.write(&path).expect("write golden file");
        println!("{} ({} values, {:.1?})", path.display(), set.values.len(), t0.elapsed());
    }
}
