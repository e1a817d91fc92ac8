use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{evolve_diagonal, krylov_evolve, KrylovOptions};
use crate::fock::{LatticeSpec, OccupationBasis, StateVector};
use crate::hamiltonian::{assemble_pair, PairHamiltonianSpec};
use crate::operator::SparseOperator;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    Current,
    CurrentCorrelation,
    BondKinetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutMode {
    /// Full occupation numbers.
    #[default]
    Occupancy,
    /// Occupations clipped at 1.
    Binary,
}

/// Detuned phase accumulation preceding the beamsplitter in bond plans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdleStep {
    /// Pair detuning `Δ` in rad/s.
    pub delta: f64,
    /// Idle duration in seconds.
    pub t_idle: f64,
}

impl IdleStep {
    /// Quarter-turn idle `t = π/(4|Δ|)`.
    pub fn quarter_turn(delta: f64) -> Result<Self> {
        if delta == 0.0 || !delta.is_finite() {
            return Err(Error::param("idle detuning must be finite and nonzero"));
        }
        Ok(IdleStep { delta, t_idle: PI / (4.0 * delta.abs()) })
    }
}

/// One simultaneous readout of one or more disjoint rungs.
///
/// `rungs[k]` is read out through a beamsplitter of strength `couplings[k]`
/// applied for `t_bs[k]`; bond plans first apply `idle` to every rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub kind: PlanKind,
    pub rungs: Vec<usize>,
    pub couplings: Vec<f64>,
    pub t_bs: Vec<f64>,
    pub idle: Option<IdleStep>,
    pub shots: u64,
    pub seed: u64,
    #[serde(default)]
    pub readout: ReadoutMode,
    /// On-site interaction `U` (rad/s) acting on the plan sites during the
    /// protocol; `None` gives ideal linear rotations.
    #[serde(default)]
    pub interaction: Option<f64>,
}

impl MeasurementPlan {
    fn build(
        kind: PlanKind,
        rungs: &[usize],
        spec: &LatticeSpec,
        idle: Option<IdleStep>,
        shots: u64,
        seed: u64,
    ) -> Result<Self> {
        let couplings = rungs
            .iter()
            .map(|&r| {
                spec.j_rung
                    .get(r)
                    .copied()
                    .ok_or_else(|| Error::param(format!("rung {r} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        let t_bs = couplings.iter().map(|&j| super::calibrate_tbs(j)).collect::<Result<Vec<_>>>()?;
        let plan = MeasurementPlan {
            kind,
            rungs: rungs.to_vec(),
            couplings,
            t_bs,
            idle,
            shots,
            seed,
            readout: ReadoutMode::Occupancy,
            interaction: None,
        };
        plan.validate(spec.n_sites)?;
        Ok(plan)
    }

    /// Current readout of the given rungs, calibrated from `spec`.
    pub fn current(rungs: &[usize], spec: &LatticeSpec, shots: u64, seed: u64) -> Result<Self> {
        Self::build(PlanKind::Current, rungs, spec, None, shots, seed)
    }

    /// Simultaneous current readout of rungs `i` and `j`.
    pub fn correlation(i: usize, j: usize, spec: &LatticeSpec, shots: u64, seed: u64) -> Result<Self> {
        Self::build(PlanKind::CurrentCorrelation, &[i, j], spec, None, shots, seed)
    }

    /// Correlation readout of several mutually disjoint rungs at once.
    pub fn correlation_group(rungs: &[usize], spec: &LatticeSpec, shots: u64, seed: u64) -> Result<Self> {
        Self::build(PlanKind::CurrentCorrelation, rungs, spec, None, shots, seed)
    }

    pub fn bond(rungs: &[usize], spec: &LatticeSpec, delta: f64, shots: u64, seed: u64) -> Result<Self> {
        Self::build(PlanKind::BondKinetic, rungs, spec, Some(IdleStep::quarter_turn(delta)?), shots, seed)
    }

    pub fn with_readout(mut self, readout: ReadoutMode) -> Self {
        self.readout = readout;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_interaction(mut self, u: f64) -> Self {
        self.interaction = Some(u);
        self
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.rungs.is_empty() {
            return Err(Error::param("plan needs at least one rung"));
        }
        if self.couplings.len() != self.rungs.len() || self.t_bs.len() != self.rungs.len() {
            return Err(Error::param("plan needs one coupling and one t_bs per rung"));
        }
        if self.interaction.is_some_and(|u| !u.is_finite()) {
            return Err(Error::param("protocol interaction must be finite"));
        }
        if self.shots == 0 {
            return Err(Error::param("plan needs at least one shot"));
        }
        for (k, &r) in self.rungs.iter().enumerate() {
            if r + 1 >= n_sites {
                return Err(Error::param(format!("rung {r} out of range for {n_sites} sites")));
            }
            if !(self.t_bs[k] > 0.0) || !self.t_bs[k].is_finite() {
                return Err(Error::param(format!("t_bs for rung {r} must be positive")));
            }
            if !(self.couplings[k] > 0.0) || !self.couplings[k].is_finite() {
                return Err(Error::param(format!("coupling for rung {r} must be positive")));
            }
            for &s in &self.rungs[..k] {
                if s.abs_diff(r) < 2 {
                    return Err(Error::NonMeasurablePair(s.min(r), s.max(r)));
                }
            }
        }
        match self.kind {
            PlanKind::CurrentCorrelation if self.rungs.len() < 2 => {
                Err(Error::param("correlation plans need at least two rungs"))
            }
            PlanKind::BondKinetic => match self.idle {
                Some(idle) if idle.delta != 0.0 && idle.t_idle > 0.0 && idle.delta.is_finite() => Ok(()),
                _ => Err(Error::param("bond plans need an idle step with nonzero detuning")),
            },
            _ if self.idle.is_some() => Err(Error::param("only bond plans take an idle step")),
            _ => Ok(()),
        }
    }

    pub fn position(&self, rung: usize) -> Result<usize> {
        self.rungs
            .iter()
            .position(|&r| r == rung)
            .ok_or_else(|| Error::param(format!("rung {rung} is not part of the plan")))
    }

    pub fn coupling(&self, rung: usize) -> Result<f64> {
        Ok(self.couplings[self.position(rung)?])
    }
}

/// The protocol as piecewise-constant stages: each entry is either a
/// diagonal idle Hamiltonian or the sum of the beamsplitters still active,
/// with its duration. Every non-plan coupling is off. A plan interaction
/// adds `U/2 n(n-1)` on the plan sites to every stage.
pub fn protocol_stages<B: OccupationBasis + ?Sized>(
    plan: &MeasurementPlan,
    basis: &B,
) -> Result<Vec<(SparseOperator, f64)>> {
    plan.validate(basis.n_sites())?;
    let onsite = match plan.interaction {
        Some(u) if u != 0.0 => {
            let diag: Vec<f64> = (0..basis.len())
                .map(|k| {
                    let occ = basis.occupations(k);
                    plan.rungs
                        .iter()
                        .flat_map(|&r| [r, r + 1])
                        .map(|s| 0.5 * u * occ[s] as f64 * (occ[s] as f64 - 1.0))
                        .sum()
                })
                .collect();
            SparseOperator::diagonal(&diag)
        }
        _ => SparseOperator::zeros(basis.len()),
    };
    let mut stages = Vec::new();
    if let Some(idle) = plan.idle {
        let mut h = onsite.clone();
        for &r in &plan.rungs {
            h = h.add(&assemble_pair(&PairHamiltonianSpec::idle(r, idle.delta)?, basis)?)?;
        }
        stages.push((h, idle.t_idle));
    }
    let mut order: Vec<usize> = (0..plan.rungs.len()).collect();
    order.sort_by(|&a, &b| plan.t_bs[a].total_cmp(&plan.t_bs[b]));
    let mut elapsed = 0.0;
    for (n, &k) in order.iter().enumerate() {
        let dt = plan.t_bs[k] - elapsed;
        if dt > 0.0 {
            let mut h = onsite.clone();
            for &m in &order[n..] {
                let bs = PairHamiltonianSpec::beamsplitter(plan.rungs[m], plan.couplings[m])?;
                h = h.add(&assemble_pair(&bs, basis)?)?;
            }
            stages.push((h, dt));
            elapsed = plan.t_bs[k];
        }
    }
    Ok(stages)
}

/// Rotates the plan's observables onto site populations.
pub fn apply_protocol<B: OccupationBasis>(state: &StateVector<B>, plan: &MeasurementPlan) -> Result<StateVector<B>> {
    let basis: &Arc<B> = state.basis();
    let mut out = state.clone();
    for (h, t) in protocol_stages(plan, &**basis)? {
        out = match h.as_diagonal() {
            Some(d) => evolve_diagonal(&out, &d.iter().map(|x| x.re).collect::<Vec<_>>(), t),
            None => krylov_evolve(&out, &h, t, KrylovOptions::default())?,
        };
    }
    Ok(out)
}
