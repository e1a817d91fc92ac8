//! Experiment configuration.
//!
//! A TOML document checked against `schema_version`. Rung labels in the
//! file are 1-based, like every CSV the tool writes; they are converted to
//! 0-based indices on load.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use fluxladder::engine::{Integrator, RampOptions, RampSchedule, RampShape};
use fluxladder::fock::LatticeSpec;
use fluxladder::mhz_to_rad;
use fluxladder::noise::NoiseModel;
use fluxladder::observables::measurable_pairs;
use fluxladder::protocol::MeasurementPlan;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Highest eigenstate of the lattice Hamiltonian, by exact diagonalization.
    ExactGround,
    /// State reached by the detuning ramp from a Fock state.
    RampPrepared,
}

/// Unit system of every frequency, coupling and time in the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// Energies in units of the rung coupling, times in its inverse.
    #[default]
    Natural,
    /// Frequencies as `f/2π` in MHz, times in seconds.
    Mhz,
}

impl Units {
    pub fn rate(self, x: f64) -> f64 {
        match self {
            Units::Natural => x,
            Units::Mhz => mhz_to_rad(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub n_sites: usize,
    pub particles: usize,
    pub n_max: u8,
    #[serde(default)]
    pub units: Units,
    pub j_rung: f64,
    #[serde(default)]
    pub u: f64,
    /// Per-site frequency offsets; all zero when empty.
    #[serde(default)]
    pub omega: Vec<f64>,
    /// Overrides the flux otherwise inferred from the sign of the ratio.
    #[serde(default)]
    pub flux: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKindConfig {
    Current,
    CurrentCorrelation,
    BondKinetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Pairs {
    /// `"all"`: every measurable pair.
    Named(String),
    List(Vec<[usize; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub kind: PlanKindConfig,
    /// Rungs read out together (current and bond plans).
    #[serde(default)]
    pub rungs: Vec<usize>,
    /// Rung pairs, each read out by its own plan (correlation plans).
    #[serde(default)]
    pub pairs: Option<Pairs>,
    pub shots: u64,
    /// Idle detuning of bond plans.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Keep the on-site interaction on during the rotations.
    #[serde(default)]
    pub interacting: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Per-site `T1` (one value applies to every site).
    pub t1: Vec<f64>,
    pub t2r: Vec<f64>,
    /// Master-equation step.
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampConfig {
    /// 1-based sites loaded with one boson, in order of their initial detuning.
    pub excited: Vec<usize>,
    pub spacing: f64,
    pub park: f64,
    pub settle: f64,
    pub duration: f64,
    pub dt: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub shape: RampShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub output: PathBuf,
    pub mode: Mode,
    pub ratios: Vec<f64>,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub plans: Vec<PlanConfig>,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub ramp: Option<RampConfig>,
    #[serde(default = "yes")]
    pub figures: bool,
}

fn yes() -> bool {
    true
}

/// One readout: a core plan with a label used in file names.
#[derive(Debug, Clone)]
pub struct LabelledPlan {
    pub label: String,
    pub plan: MeasurementPlan,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: toml::Value = toml::from_str(text).context("config is not valid TOML")?;
        match raw.get("schema_version").and_then(|v| v.as_integer()) {
            Some(v) if v == SCHEMA_VERSION as i64 => {}
            Some(v) => bail!("unsupported schema_version {v}, expected {SCHEMA_VERSION}"),
            None => bail!("config needs an integer schema_version"),
        }
        let cfg: ExperimentConfig = toml::from_str(text).context("config does not match the schema")?;
        Ok(cfg)
    }

    /// Hex SHA-256 of the canonical JSON form; the output directory is not
    /// part of the experiment and is left out.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig { output: PathBuf::new(), ..self.clone() };
        hex::encode(Sha256::digest(serde_json::to_vec(&canonical).expect("config serializes")))
    }

    /// Static checks that do not need a lattice solve.
    pub fn validate(&self) -> Result<()> {
        ensure!(self.schema_version == SCHEMA_VERSION, "unsupported schema_version {}", self.schema_version);
        for &r in &self.ratios {
            ensure!(r.is_finite() && r != 0.0, "coupling ratio must be finite and nonzero, got {r}");
        }
        let lat = &self.lattice;
        ensure!(lat.particles <= lat.n_sites * lat.n_max as usize, "too many particles for the lattice");
        ensure!(lat.omega.is_empty() || lat.omega.len() == lat.n_sites, "omega needs one entry per site");
        if let Some(&r) = self.ratios.first() {
            self.spec(r)?;
            self.plans(r, 0)?;
        }
        self.noise_model()?;
        if self.mode == Mode::RampPrepared {
            ensure!(self.ramp.is_some(), "ramp_prepared mode needs a [ramp] block");
            self.ramp_setup()?;
        }
        Ok(())
    }

    pub fn spec(&self, ratio: f64) -> Result<LatticeSpec> {
        let lat = &self.lattice;
        let j = lat.units.rate(lat.j_rung);
        let mut spec = LatticeSpec::from_ratio(lat.n_sites, j, ratio, lat.units.rate(lat.u), lat.n_max)?;
        if !lat.omega.is_empty() {
            spec.omega = lat.omega.iter().map(|&w| lat.units.rate(w)).collect();
        }
        if let Some(f) = lat.flux {
            spec.flux = f;
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Core plans for one ratio; seeds are derived from the config seed, the
    /// ratio index and the plan position.
    pub fn plans(&self, ratio: f64, ratio_index: usize) -> Result<Vec<LabelledPlan>> {
        let spec = self.spec(ratio)?;
        let n_rungs = spec.n_rungs();
        let mut out = Vec::new();
        for (p, pc) in self.plans.iter().enumerate() {
            let rungs = zero_based(&pc.rungs, n_rungs)?;
            let seed = |k: usize| derive_seed(self.seed, &[ratio_index as u64, p as u64, k as u64]);
            let finish = |plan: MeasurementPlan| {
                if pc.interacting {
                    plan.with_interaction(spec.u[0])
                } else {
                    plan
                }
            };
            match pc.kind {
                PlanKindConfig::Current => {
                    ensure!(!rungs.is_empty(), "current plan {} needs rungs", p + 1);
                    let plan = MeasurementPlan::current(&rungs, &spec, pc.shots, seed(0))?;
                    out.push(LabelledPlan { label: format!("p{}_current", p + 1), plan: finish(plan) });
                }
                PlanKindConfig::BondKinetic => {
                    ensure!(!rungs.is_empty(), "bond plan {} needs rungs", p + 1);
                    let delta = pc.delta.context("bond plans need a delta")?;
                    let plan = MeasurementPlan::bond(&rungs, &spec, self.lattice.units.rate(delta), pc.shots, seed(0))?;
                    out.push(LabelledPlan { label: format!("p{}_bond", p + 1), plan: finish(plan) });
                }
                PlanKindConfig::CurrentCorrelation => {
                    let pairs: Vec<(usize, usize)> = match &pc.pairs {
                        Some(Pairs::Named(n)) if n == "all" => measurable_pairs(n_rungs),
                        Some(Pairs::Named(n)) => bail!("unknown pair set {n:?}, use \"all\" or a list"),
                        Some(Pairs::List(list)) => list
                            .iter()
                            .map(|[a, b]| Ok((zero_based(&[*a], n_rungs)?[0], zero_based(&[*b], n_rungs)?[0])))
                            .collect::<Result<_>>()?,
                        None if rungs.len() >= 2 => vec![(rungs[0], rungs[1])],
                        None => bail!("correlation plan {} needs pairs", p + 1),
                    };
                    for (k, (i, j)) in pairs.into_iter().enumerate() {
                        let plan = MeasurementPlan::correlation(i, j, &spec, pc.shots, seed(k))?;
                        out.push(LabelledPlan { label: format!("p{}_g{}_{}", p + 1, i + 1, j + 1), plan: finish(plan) });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn noise_model(&self) -> Result<Option<NoiseModel>> {
        let Some(n) = &self.noise else { return Ok(None) };
        let sites = self.lattice.n_sites;
        let expand = |v: &[f64], name: &str| -> Result<Vec<f64>> {
            match v.len() {
                1 => Ok(vec![v[0]; sites]),
                l if l == sites => Ok(v.to_vec()),
                l => bail!("noise.{name} needs 1 or {sites} entries, got {l}"),
            }
        };
        Ok(Some(NoiseModel::new(expand(&n.t1, "t1")?, expand(&n.t2r, "t2r")?)?))
    }

    /// Noise step, defaulting to a small fraction of the beamsplitter time.
    pub fn noise_dt(&self) -> f64 {
        let j = self.lattice.units.rate(self.lattice.j_rung);
        self.noise.as_ref().and_then(|n| n.dt).unwrap_or(PI / (4.0 * j) / 50.0)
    }

    pub fn ramp_setup(&self) -> Result<(RampSchedule, RampOptions)> {
        let r = self.ramp.as_ref().context("config has no [ramp] block")?;
        let units = self.lattice.units;
        let excited = r
            .excited
            .iter()
            .map(|&s| {
                ensure!(s >= 1 && s <= self.lattice.n_sites, "excited site {s} out of range");
                Ok(s - 1)
            })
            .collect::<Result<Vec<_>>>()?;
        ensure!(excited.len() == self.lattice.particles, "ramp excites {} sites for {} particles", excited.len(), self.lattice.particles);
        let schedule = RampSchedule::staged(
            self.lattice.n_sites,
            &excited,
            units.rate(r.spacing),
            units.rate(r.park),
            r.settle,
            r.duration,
            r.shape,
        )?;
        Ok((schedule, RampOptions { dt: r.dt, integrator: r.integrator }))
    }
}

fn zero_based(labels: &[usize], n_rungs: usize) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|&l| {
            ensure!(l >= 1 && l <= n_rungs, "rung label {l} out of range 1..={n_rungs}");
            Ok(l - 1)
        })
        .collect()
}

/// SplitMix64 over the parts.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ p))
}
