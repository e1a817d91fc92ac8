use serde::{Deserialize, Serialize};

use crate::fock::OccupationBasis;
use crate::operator::{annihilation_operator, SparseOperator};
use crate::{Error, Result};

/// Per-site energy relaxation and Ramsey dephasing times, in seconds.
/// Infinite times switch the channel off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub t1: Vec<f64>,
    pub t2r: Vec<f64>,
}

impl NoiseModel {
    pub fn new(t1: Vec<f64>, t2r: Vec<f64>) -> Result<Self> {
        let m = NoiseModel { t1, t2r };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(n_sites: usize, t1: f64, t2r: f64) -> Result<Self> {
        NoiseModel::new(vec![t1; n_sites], vec![t2r; n_sites])
    }

    /// No dissipation at all.
    pub fn noiseless(n_sites: usize) -> Self {
        NoiseModel { t1: vec![f64::INFINITY; n_sites], t2r: vec![f64::INFINITY; n_sites] }
    }

    pub fn n_sites(&self) -> usize {
        self.t1.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.t1.len() != self.t2r.len() {
            return Err(Error::NoiseModel("t1 and t2r need one entry per site".into()));
        }
        for (j, (&t1, &t2)) in self.t1.iter().zip(&self.t2r).enumerate() {
            if !(t1 > 0.0) || !(t2 > 0.0) {
                return Err(Error::NoiseModel(format!("site {j}: T1 and T2R must be positive")));
            }
            if self.gamma_phi(j) < 0.0 {
                return Err(Error::NoiseModel(format!(
                    "site {j}: T2R = {t2:e} s exceeds 2 T1 = {:e} s",
                    2.0 * t1
                )));
            }
        }
        Ok(())
    }

    /// `γ₁ = 1/T1`.
    pub fn gamma1(&self, site: usize) -> f64 {
        1.0 / self.t1[site]
    }

    /// `γ_φ = 1/T2R - 1/(2 T1)`.
    pub fn gamma_phi(&self, site: usize) -> f64 {
        1.0 / self.t2r[site] - 0.5 / self.t1[site]
    }

    pub fn is_noiseless(&self) -> bool {
        (0..self.n_sites()).all(|j| self.gamma1(j) == 0.0 && self.gamma_phi(j) == 0.0)
    }

    /// Jump operators `√γ₁ a_j` and `√(2γ_φ) n_j`, omitting channels with
    /// zero rate.
    pub fn jump_operators<B: OccupationBasis + ?Sized>(&self, basis: &B) -> Result<Vec<JumpOperator>> {
        self.validate()?;
        if basis.n_sites() != self.n_sites() {
            return Err(Error::Dimension { expected: self.n_sites(), got: basis.n_sites() });
        }
        let mut out = Vec::new();
        for j in 0..self.n_sites() {
            let g1 = self.gamma1(j);
            if g1 > 0.0 {
                out.push(JumpOperator::Lowering { site: j, op: annihilation_operator(basis, j).scaled(g1.sqrt()) });
            }
            let gp = self.gamma_phi(j);
            if gp > 0.0 {
                let diag = (0..basis.len())
                    .map(|k| (2.0 * gp).sqrt() * basis.occupations(k)[j] as f64)
                    .collect();
                out.push(JumpOperator::Dephasing { site: j, diag });
            }
        }
        Ok(out)
    }
}

/// A Lindblad jump operator in the basis it was built for.
#[derive(Debug, Clone)]
pub enum JumpOperator {
    /// `√γ₁ a_j`.
    Lowering { site: usize, op: SparseOperator },
    /// `√(2γ_φ) n_j`, stored by its diagonal.
    Dephasing { site: usize, diag: Vec<f64> },
}

impl JumpOperator {
    /// Diagonal of `L†L`.
    pub fn ldag_l(&self, dim: usize) -> Vec<f64> {
        match self {
            JumpOperator::Lowering { op, .. } => {
                let mut d = vec![0.0; dim];
                for (_, c, v) in op.triplets() {
                    d[c] += v.norm_sqr();
                }
                d
            }
            JumpOperator::Dephasing { diag, .. } => diag.iter().map(|x| x * x).collect(),
        }
    }

    pub fn site(&self) -> usize {
        match self {
            JumpOperator::Lowering { site, .. } | JumpOperator::Dephasing { site, .. } => *site,
        }
    }

    pub fn apply(&self, x: &[crate::Complex64]) -> Vec<crate::Complex64> {
        match self {
            JumpOperator::Lowering { op, .. } => op.mul_vec(x),
            JumpOperator::Dephasing { diag, .. } => x.iter().zip(diag).map(|(a, d)| a * d).collect(),
        }
    }
}
