use std::sync::Arc;

use nalgebra::DMatrix;

use crate::fock::{MultiSectorBasis, OccupationBasis, StateVector};
use crate::observables::QuantumState;
use crate::operator::SparseOperator;
use crate::{Complex64, Error, Result, C0};

/// Dense density matrix over a multi-sector basis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Arc<MultiSectorBasis>,
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(basis: Arc<MultiSectorBasis>, rho: DMatrix<Complex64>) -> Result<Self> {
        if rho.nrows() != basis.len() || rho.ncols() != basis.len() {
            return Err(Error::Dimension { expected: basis.len(), got: rho.nrows() });
        }
        Ok(DensityMatrix { basis, rho })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &StateVector<MultiSectorBasis>) -> Self {
        let a = state.amplitudes();
        let rho = DMatrix::from_fn(a.len(), a.len(), |r, c| a[r] * a[c].conj());
        DensityMatrix { basis: state.basis().clone(), rho }
    }

    /// Equal-weight mixture of the given pure states.
    pub fn mixture(states: &[StateVector<MultiSectorBasis>]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::param("empty ensemble"))?;
        let dim = first.len();
        let mut rho = DMatrix::from_element(dim, dim, C0);
        for s in states {
            let a = s.amplitudes();
            let w = 1.0 / (states.len() as f64 * s.norm().powi(2));
            for c in 0..dim {
                if a[c] == C0 {
                    continue;
                }
                let ac = a[c].conj() * w;
                for r in 0..dim {
                    rho[(r, c)] += a[r] * ac;
                }
            }
        }
        DensityMatrix::new(first.basis().clone(), rho)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn basis_ref(&self) -> &Arc<MultiSectorBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.rho[(r, c)] - self.rho[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks trace, Hermiticity and positivity.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::TraceDrift { drift: (tr - 1.0).norm() });
        }
        let h = self.hermitian_deviation();
        if h > 1e-10 {
            return Err(Error::NotHermitian(h));
        }
        let m = self.min_eigenvalue();
        if m < -1e-8 {
            return Err(Error::param(format!("density matrix has negative eigenvalue {m:e}")));
        }
        Ok(())
    }

    /// Diagonal `ρ_kk`.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.rho[(k, k)].re).collect()
    }

    pub fn populations(&self) -> Vec<f64> {
        let n = self.basis.n_sites();
        let mut pops = vec![0.0; n];
        for k in 0..self.dim() {
            let p = self.rho[(k, k)].re;
            for (site, &occ) in self.basis.occupations(k).iter().enumerate() {
                pops[site] += p * occ as f64;
            }
        }
        pops
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, state: &StateVector<MultiSectorBasis>) -> Result<f64> {
        let a = state.amplitudes();
        if a.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: a.len() });
        }
        let mut acc = C0;
        for r in 0..a.len() {
            for c in 0..a.len() {
                acc += a[r].conj() * self.rho[(r, c)] * a[c];
            }
        }
        Ok(acc.re)
    }

    /// `Tr(O ρ)`.
    pub fn trace_with(&self, op: &SparseOperator) -> Result<Complex64> {
        op.check_dim(self.dim())?;
        Ok(op.triplets().map(|(r, c, v)| v * self.rho[(c, r)]).sum())
    }
}

impl QuantumState for DensityMatrix {
    type Basis = MultiSectorBasis;

    fn basis(&self) -> &Arc<MultiSectorBasis> {
        &self.basis
    }

    fn expect(&self, op: &SparseOperator) -> Result<Complex64> {
        self.trace_with(op)
    }

    fn expect_product(&self, a: &SparseOperator, b: &SparseOperator) -> Result<Complex64> {
        self.trace_with(&a.matmul(b)?)
    }
}
