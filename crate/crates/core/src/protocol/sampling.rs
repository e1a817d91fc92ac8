use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::plan::{MeasurementPlan, ReadoutMode};
use crate::fock::{occupation_string, parse_occupation_string, OccupationBasis, StateVector};
use crate::{Error, Result};

/// Counts of measured occupation strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotTable {
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
    pub seed: u64,
    pub plan: MeasurementPlan,
}

impl ShotTable {
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        let sum: u64 = self.counts.values().sum();
        if sum != self.total {
            return Err(Error::Format(format!("counts sum to {sum}, table claims {}", self.total)));
        }
        for key in self.counts.keys() {
            let occ = parse_occupation_string(key)?;
            if occ.len() != n_sites {
                return Err(Error::Format(format!("outcome {key:?} does not have {n_sites} sites")));
            }
            if self.plan.readout == ReadoutMode::Binary && occ.iter().any(|&n| n > 1) {
                return Err(Error::Format(format!("binary outcome {key:?} has occupations above 1")));
            }
        }
        Ok(())
    }

    /// `bitstring,count` rows in string order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count\n");
        for (k, c) in &self.counts {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }

    /// Parses counts written by [`ShotTable::to_csv`].
    pub fn from_csv(text: &str, plan: MeasurementPlan) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut counts = BTreeMap::new();
        for row in reader.records() {
            let row = row.map_err(|e| Error::Format(e.to_string()))?;
            let key = row.get(0).ok_or_else(|| Error::Format("missing bitstring".into()))?;
            let count: u64 = row
                .get(1)
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| Error::Format(format!("bad count for {key}")))?;
            parse_occupation_string(key)?;
            *counts.entry(key.to_string()).or_insert(0) += count;
        }
        let total = counts.values().sum();
        Ok(ShotTable { counts, total, seed: plan.seed, plan })
    }
}

pub(crate) fn readout(occ: &[u8], mode: ReadoutMode) -> Vec<u8> {
    match mode {
        ReadoutMode::Occupancy => occ.to_vec(),
        ReadoutMode::Binary => occ.iter().map(|&n| n.min(1)).collect(),
    }
}

/// Draws `plan.shots` projective outcomes with Born probabilities, from a
/// ChaCha stream seeded with `plan.seed`.
pub fn sample<B: OccupationBasis>(state: &StateVector<B>, plan: &MeasurementPlan) -> Result<ShotTable> {
    sample_probabilities(&**state.basis(), &state.probabilities(), plan)
}

/// Same as [`sample`] for an explicit probability vector over `basis`.
pub fn sample_probabilities<B: OccupationBasis + ?Sized>(
    basis: &B,
    probs: &[f64],
    plan: &MeasurementPlan,
) -> Result<ShotTable> {
    if probs.len() != basis.len() {
        return Err(Error::Dimension { expected: basis.len(), got: probs.len() });
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::param("cannot sample from a zero state"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut hits = vec![0u64; probs.len()];
    for _ in 0..plan.shots {
        let r: f64 = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= r).min(probs.len() - 1);
        hits[k] += 1;
    }
    let mut counts = BTreeMap::new();
    for (k, &h) in hits.iter().enumerate() {
        if h > 0 {
            let key = occupation_string(&readout(basis.occupations(k), plan.readout));
            *counts.entry(key).or_insert(0) += h;
        }
    }
    Ok(ShotTable { counts, total: plan.shots, seed: plan.seed, plan: plan.clone() })
}
