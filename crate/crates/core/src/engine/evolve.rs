use nalgebra::DMatrix;

use super::eigen::dense_spectrum;
use super::krylov::{expm_krylov, KrylovOptions};
use crate::fock::{OccupationBasis, StateVector};
use crate::operator::SparseOperator;
use crate::{Complex64, Error, Result, C0};

/// Largest dimension for which [`evolve`] diagonalizes densely.
pub const DENSE_EVOLVE_LIMIT: usize = 500;

/// Cached eigendecomposition of a Hermitian operator for repeated
/// `exp(-i t H)` applications.
#[derive(Debug, Clone)]
pub struct Propagator {
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(op: &SparseOperator) -> Result<Self> {
        let (values, vectors) = dense_spectrum(op)?;
        Ok(Propagator { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn apply(&self, amps: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.values.len();
        let mut coeffs = vec![C0; n];
        for (c, coeff) in coeffs.iter_mut().enumerate() {
            let col = self.vectors.column(c);
            let proj: Complex64 = col.iter().zip(amps).map(|(v, a)| v.conj() * a).sum();
            *coeff = proj * Complex64::from_polar(1.0, -self.values[c] * t);
        }
        let mut out = vec![C0; n];
        for (c, coeff) in coeffs.iter().enumerate() {
            if *coeff == C0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.vectors.column(c).iter()) {
                *o += v * coeff;
            }
        }
        out
    }

    pub fn evolve<B: OccupationBasis>(&self, state: &StateVector<B>, t: f64) -> Result<StateVector<B>> {
        if state.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: state.len() });
        }
        state.with_amplitudes(self.apply(state.amplitudes(), t))
    }
}

/// `exp(-i t H) |ψ⟩`: dense diagonalization for small operators, adaptive
/// Krylov stepping otherwise.
pub fn evolve<B: OccupationBasis>(state: &StateVector<B>, h: &SparseOperator, t: f64) -> Result<StateVector<B>> {
    h.check_dim(state.len())?;
    if t == 0.0 {
        return Ok(state.clone());
    }
    if let Some(diag) = h.as_diagonal() {
        let d: Vec<f64> = diag.iter().map(|x| x.re).collect();
        return Ok(evolve_diagonal(state, &d, t));
    }
    if h.dim() <= DENSE_EVOLVE_LIMIT {
        Propagator::new(h)?.evolve(state, t)
    } else {
        krylov_evolve(state, h, t, KrylovOptions::default())
    }
}

pub fn krylov_evolve<B: OccupationBasis>(
    state: &StateVector<B>,
    h: &SparseOperator,
    t: f64,
    opts: KrylovOptions,
) -> Result<StateVector<B>> {
    h.check_dim(state.len())?;
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(h.hermitian_deviation()));
    }
    let out = expm_krylov(|x, y| h.apply(x, y), state.amplitudes(), t, h.norm_bound(), opts)?;
    state.with_amplitudes(out)
}

/// Exact evolution under a diagonal Hamiltonian.
pub fn evolve_diagonal<B: OccupationBasis>(state: &StateVector<B>, diag: &[f64], t: f64) -> StateVector<B> {
    let amps = state
        .amplitudes()
        .iter()
        .zip(diag)
        .map(|(a, e)| a * Complex64::from_polar(1.0, -e * t))
        .collect();
    state.with_amplitudes(amps).expect("same dimension")
}
