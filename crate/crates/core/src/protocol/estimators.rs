use serde::{Deserialize, Serialize};

use super::plan::{MeasurementPlan, PlanKind};
use super::sampling::{readout, ShotTable};
use crate::fock::{parse_occupation_string, OccupationBasis};
use crate::{Error, Result};

/// Estimated value with its standard error; `stderr` is zero for
/// infinite-shot estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Weighted measurement outcomes, from shots or from exact probabilities.
#[derive(Debug, Clone)]
pub struct OutcomeSample {
    outcomes: Vec<(Vec<u8>, f64)>,
    /// Number of shots, `None` for the infinite-shot limit.
    shots: Option<u64>,
    plan: MeasurementPlan,
}

impl OutcomeSample {
    pub fn from_table(table: &ShotTable) -> Result<Self> {
        if table.total == 0 {
            return Err(Error::param("empty shot table"));
        }
        let outcomes = table
            .counts
            .iter()
            .map(|(k, &c)| Ok((parse_occupation_string(k)?, c as f64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(OutcomeSample { outcomes, shots: Some(table.total), plan: table.plan.clone() })
    }

    /// Infinite-shot outcomes: `probs` are the post-protocol Born
    /// probabilities over `basis`.
    pub fn exact<B: OccupationBasis + ?Sized>(basis: &B, probs: &[f64], plan: &MeasurementPlan) -> Result<Self> {
        if probs.len() != basis.len() {
            return Err(Error::Dimension { expected: basis.len(), got: probs.len() });
        }
        let total: f64 = probs.iter().sum();
        let outcomes = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, &p)| (readout(basis.occupations(k), plan.readout), p / total))
            .collect();
        Ok(OutcomeSample { outcomes, shots: None, plan: plan.clone() })
    }

    pub fn plan(&self) -> &MeasurementPlan {
        &self.plan
    }

    pub fn shots(&self) -> Option<u64> {
        self.shots
    }

    fn weight(&self) -> f64 {
        self.outcomes.iter().map(|(_, w)| w).sum()
    }

    fn imbalance(&self, rung: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.outcomes
            .iter()
            .map(move |(occ, w)| (occ[rung] as f64 - occ[rung + 1] as f64, *w))
    }

    /// Mean of the population imbalance `D = n_j - n_{j+1}` and the
    /// standard error of that mean.
    fn imbalance_stats(&self, rung: usize) -> (f64, f64) {
        let w = self.weight();
        let mean = self.imbalance(rung).map(|(d, c)| d * c).sum::<f64>() / w;
        let stderr = match self.shots {
            None => 0.0,
            Some(s) => {
                let var = self.imbalance(rung).map(|(d, c)| c * (d - mean).powi(2)).sum::<f64>() / w;
                (var / s as f64).sqrt()
            }
        };
        (mean, stderr)
    }

    fn check_kind(&self, kinds: &[PlanKind]) -> Result<()> {
        if kinds.contains(&self.plan.kind) {
            Ok(())
        } else {
            Err(Error::param(format!("estimator does not apply to {:?} plans", self.plan.kind)))
        }
    }
}

/// `𝒥̂_j = J_j (n̄_j - n̄_{j+1})` after the beamsplitter.
pub fn estimate_current(sample: &OutcomeSample, rung: usize) -> Result<Estimate> {
    sample.check_kind(&[PlanKind::Current, PlanKind::CurrentCorrelation])?;
    let j = sample.plan.coupling(rung)?;
    let (mean, se) = sample.imbalance_stats(rung);
    Ok(Estimate { value: j * mean, stderr: j * se })
}

/// `Ĝ = J_i J_j cov(D_i, D_j)` with a leave-one-shot-out jackknife error.
pub fn estimate_current_correlation(sample: &OutcomeSample, i: usize, j: usize) -> Result<Estimate> {
    sample.check_kind(&[PlanKind::CurrentCorrelation, PlanKind::Current])?;
    if i.abs_diff(j) < 2 {
        return Err(Error::NonMeasurablePair(i.min(j), i.max(j)));
    }
    let scale = sample.plan.coupling(i)? * sample.plan.coupling(j)?;
    let rows: Vec<(f64, f64, f64)> = sample
        .outcomes
        .iter()
        .map(|(occ, w)| (occ[i] as f64 - occ[i + 1] as f64, occ[j] as f64 - occ[j + 1] as f64, *w))
        .collect();
    let n: f64 = rows.iter().map(|r| r.2).sum();
    let sx: f64 = rows.iter().map(|r| r.0 * r.2).sum();
    let sy: f64 = rows.iter().map(|r| r.1 * r.2).sum();
    let sxy: f64 = rows.iter().map(|r| r.0 * r.1 * r.2).sum();
    let cov = |n: f64, sx: f64, sy: f64, sxy: f64| sxy / n - (sx / n) * (sy / n);
    let value = scale * cov(n, sx, sy, sxy);
    let stderr = match sample.shots {
        None => 0.0,
        Some(s) if s < 2 => f64::NAN,
        Some(_) => {
            let loo: Vec<(f64, f64)> = rows
                .iter()
                .map(|&(x, y, w)| (cov(n - 1.0, sx - x, sy - y, sxy - x * y), w))
                .collect();
            let mean = loo.iter().map(|(v, w)| v * w).sum::<f64>() / n;
            let ss = loo.iter().map(|(v, w)| w * (v - mean).powi(2)).sum::<f64>();
            scale.abs() * ((n - 1.0) / n * ss).sqrt()
        }
    };
    Ok(Estimate { value, stderr })
}

/// `𝒪̂_j = sign · (n̄_j - n̄_{j+1})` after the idle and beamsplitter steps.
/// `sign` comes from [`super::calibrate_bond_sign`].
pub fn estimate_bond_kinetic(sample: &OutcomeSample, rung: usize, sign: f64) -> Result<Estimate> {
    sample.check_kind(&[PlanKind::BondKinetic])?;
    if sign.abs() != 1.0 {
        return Err(Error::param("bond sign convention must be +1 or -1"));
    }
    sample.plan.position(rung)?;
    let (mean, se) = sample.imbalance_stats(rung);
    Ok(Estimate { value: sign * mean, stderr: se })
}
