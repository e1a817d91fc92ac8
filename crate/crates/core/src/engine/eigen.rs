use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::fock::{FockBasis, LatticeSpec, OccupationBasis, StateVector};
use crate::hamiltonian::{apply_staggered_gauge, assemble, negate_map};
use crate::operator::SparseOperator;
use crate::{Complex64, Error, Result, C0};

/// Largest dimension handled by the dense solver under [`Solver::Auto`].
pub const DENSE_LIMIT: usize = 2000;

/// Relative gap below which the lowest level counts as degenerate.
const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Residual target relative to the operator norm bound.
    pub tol: f64,
    pub restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { max_iter: 400, tol: 1e-11, restarts: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Solver {
    /// Dense for `dim <= DENSE_LIMIT`, Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos(LanczosOptions),
}

/// Lowest (or, from [`top_state`], highest) eigenpair.
///
/// When the gap to the next level is below `1e-8 ‖H‖` the level is flagged
/// `degenerate` and `manifold` holds an orthonormal basis of the degenerate
/// subspace (dense solver only). For real Hamiltonians the returned `state`
/// is then a real, time-reversal-even member of that subspace.
#[derive(Debug, Clone)]
pub struct Eigenstate<B: OccupationBasis = FockBasis> {
    pub energy: f64,
    pub state: StateVector<B>,
    pub gap: Option<f64>,
    pub degenerate: bool,
    pub manifold: Vec<StateVector<B>>,
    pub residual: f64,
}

fn check_hermitian(op: &SparseOperator) -> Result<()> {
    if op.is_hermitian() {
        return Ok(());
    }
    let dev = op.hermitian_deviation();
    if dev > 1e-14 * op.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Full spectrum (ascending) and eigenvectors (columns) of a Hermitian
/// operator by dense diagonalization.
pub fn dense_spectrum(op: &SparseOperator) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    check_hermitian(op)?;
    let n = op.dim();
    let (values, vectors) = if op.is_real() {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (r, c, v) in op.triplets() {
            m[(r, c)] = v.re;
        }
        let eig = m.symmetric_eigen();
        (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = op.to_dense().symmetric_eigen();
        (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok((sorted_values, sorted_vectors))
}

pub fn eigenvalues(op: &SparseOperator) -> Result<Vec<f64>> {
    dense_spectrum(op).map(|(v, _)| v)
}

pub fn ground_state<B: OccupationBasis>(op: &SparseOperator, basis: &Arc<B>) -> Result<Eigenstate<B>> {
    ground_state_with(op, basis, Solver::Auto)
}

pub fn ground_state_with<B: OccupationBasis>(
    op: &SparseOperator,
    basis: &Arc<B>,
    solver: Solver,
) -> Result<Eigenstate<B>> {
    op.check_dim(basis.len())?;
    check_hermitian(op)?;
    match solver {
        Solver::Dense => dense_ground(op, basis),
        Solver::Lanczos(opts) => lanczos_ground(op, basis, opts),
        Solver::Auto if op.dim() <= DENSE_LIMIT => dense_ground(op, basis),
        Solver::Auto => lanczos_ground(op, basis, LanczosOptions::default()),
    }
}

fn residual(op: &SparseOperator, amps: &[Complex64], energy: f64) -> f64 {
    op.mul_vec(amps)
        .iter()
        .zip(amps)
        .map(|(h, a)| (h - a * energy).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn column_state<B: OccupationBasis>(basis: &Arc<B>, vectors: &DMatrix<Complex64>, col: usize) -> StateVector<B> {
    let amps = vectors.column(col).iter().copied().collect();
    let mut s = StateVector::new(basis.clone(), amps).expect("dimension matches");
    s.fix_phase();
    s
}

fn dense_ground<B: OccupationBasis>(op: &SparseOperator, basis: &Arc<B>) -> Result<Eigenstate<B>> {
    let (values, vectors) = dense_spectrum(op)?;
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let e0 = values[0];
    let n_deg = values.iter().take_while(|&&v| v - e0 < DEGENERACY_TOL * scale).count();
    let gap = values.get(n_deg.max(1)).map(|v| v - e0);
    let degenerate = n_deg > 1;
    let manifold: Vec<_> = if degenerate {
        (0..n_deg).map(|c| column_state(basis, &vectors, c)).collect()
    } else {
        Vec::new()
    };
    let mut state = column_state(basis, &vectors, 0);
    if degenerate && op.is_real() {
        state = time_reversal_even(&state);
    }
    let res = residual(op, state.amplitudes(), e0);
    Ok(Eigenstate { energy: e0, state, gap, degenerate, manifold, residual: res })
}

/// Real part (or imaginary part, when the real part vanishes) of a state,
/// normalized. For a real Hamiltonian it maps any eigenvector onto a real
/// eigenvector of the same level.
fn time_reversal_even<B: OccupationBasis>(state: &StateVector<B>) -> StateVector<B> {
    let re: Vec<Complex64> = state.amplitudes().iter().map(|a| Complex64::new(a.re, 0.0)).collect();
    let im: Vec<Complex64> = state.amplitudes().iter().map(|a| Complex64::new(a.im, 0.0)).collect();
    let norm = |v: &[Complex64]| v.iter().map(|a| a.norm_sqr()).sum::<f64>();
    let pick = if norm(&re) >= norm(&im) { re } else { im };
    let mut s = state.with_amplitudes(pick).expect("same dimension");
    s.normalize().expect("nonzero");
    s.fix_phase();
    s
}

/// Deterministic, dense start vector.
fn start_vector(dim: usize) -> Vec<Complex64> {
    let golden = 0.618_033_988_749_894_9;
    let mut v: Vec<Complex64> = (0..dim)
        .map(|i| {
            let x = ((i as f64 + 1.0) * golden).fract() - 0.5;
            let y = ((i as f64 + 1.0) * golden * golden).fract() - 0.5;
            Complex64::new(x, 0.3 * y)
        })
        .collect();
    normalize(&mut v);
    v
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn vnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = vnorm(v);
    v.iter_mut().for_each(|x| *x /= n);
    n
}

/// Full (twice-iterated Gram-Schmidt) reorthogonalization against `basis`.
pub(crate) fn reorthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn lanczos_ground<B: OccupationBasis>(
    op: &SparseOperator,
    basis: &Arc<B>,
    opts: LanczosOptions,
) -> Result<Eigenstate<B>> {
    let dim = op.dim();
    let hnorm = op.norm_bound().max(f64::MIN_POSITIVE);
    let target = opts.tol * hnorm;
    let mut start = start_vector(dim);
    let mut last_residual = f64::INFINITY;
    let mut total_iter = 0;
    for _ in 0..=opts.restarts {
        let (theta, gap, vec, iters) = lanczos_pass(op, &start, opts.max_iter.min(dim), target);
        total_iter += iters;
        let res = residual(op, &vec, theta);
        last_residual = res;
        if res <= target {
            let mut state = StateVector::new(basis.clone(), vec)?;
            state.fix_phase();
            let degenerate = gap.is_some_and(|g| g < DEGENERACY_TOL * hnorm);
            return Ok(Eigenstate { energy: theta, state, gap, degenerate, manifold: Vec::new(), residual: res });
        }
        start = vec;
    }
    Err(Error::NoConvergence { iterations: total_iter, residual: last_residual })
}

/// One Lanczos run from `start`; returns the lowest Ritz value, the gap to
/// the next Ritz value, the Ritz vector and the number of iterations used.
fn lanczos_pass(
    op: &SparseOperator,
    start: &[Complex64],
    max_iter: usize,
    target: f64,
) -> (f64, Option<f64>, Vec<Complex64>, usize) {
    let dim = op.dim();
    let mut q: Vec<Vec<Complex64>> = vec![start.to_vec()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![C0; dim];
    let mut ritz = (0.0, None, DVector::<f64>::zeros(0));
    for k in 0..max_iter.max(1) {
        op.apply(&q[k], &mut w);
        let a = dot(&q[k], &w).re;
        alpha.push(a);
        reorthogonalize(&mut w, &q);
        let b = vnorm(&w);
        let m = alpha.len();
        let check = m % 5 == 0 || m == max_iter || b < 1e-14 * (a.abs() + 1.0);
        if check {
            ritz = tridiagonal_lowest(&alpha, &beta);
            let est = b * ritz.2[m - 1].abs();
            if est <= 0.1 * target || b < 1e-14 * (a.abs() + 1.0) {
                break;
            }
        }
        if m == max_iter {
            break;
        }
        beta.push(b);
        q.push(w.iter().map(|x| x / b).collect());
    }
    let m = alpha.len();
    if ritz.2.len() != m {
        ritz = tridiagonal_lowest(&alpha, &beta[..m - 1]);
    }
    let mut vec = vec![C0; dim];
    for (k, qk) in q.iter().take(m).enumerate() {
        let c = ritz.2[k];
        vec.iter_mut().zip(qk).for_each(|(v, x)| *v += x * c);
    }
    normalize(&mut vec);
    (ritz.0, ritz.1, vec, m)
}

fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Option<f64>, DVector<f64>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lowest = eig.eigenvalues[order[0]];
    let gap = order.get(1).map(|&k| eig.eigenvalues[k] - lowest);
    (lowest, gap, eig.eigenvectors.column(order[0]).into_owned())
}

/// Highest eigenstate of `H(spec)`, obtained as the ground state of the
/// sign-flipped parameters and mapped back through the staggered gauge.
pub fn top_state(spec: &LatticeSpec, basis: &Arc<FockBasis>) -> Result<Eigenstate> {
    top_state_with(spec, basis, Solver::Auto)
}

pub fn top_state_with(spec: &LatticeSpec, basis: &Arc<FockBasis>, solver: Solver) -> Result<Eigenstate> {
    let flipped = assemble(&negate_map(spec), &**basis)?;
    let gs = ground_state_with(&flipped, basis, solver)?;
    let map = |s: &StateVector| {
        let mut m = apply_staggered_gauge(s);
        m.fix_phase();
        m
    };
    Ok(Eigenstate {
        energy: -gs.energy,
        state: map(&gs.state),
        gap: gs.gap,
        degenerate: gs.degenerate,
        manifold: gs.manifold.iter().map(map).collect(),
        residual: gs.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::LatticeSpec;
    use crate::hamiltonian::assemble;
    use std::f64::consts::PI;

    fn spec3(flux: f64) -> LatticeSpec {
        LatticeSpec::uniform(3, 1.0, 1.0, 0.0, flux, 1).unwrap()
    }

    #[test]
    fn two_site_ground_state() {
        let spec = LatticeSpec::uniform(2, 1.0, 1.0, 0.0, 0.0, 1).unwrap();
        let basis = Arc::new(FockBasis::build(2, 1, 1).unwrap());
        let h = assemble(&spec, &*basis).unwrap();
        let gs = ground_state(&h, &basis).unwrap();
        assert!((gs.energy + 1.0).abs() < 1e-14);
        let a = gs.state.amplitudes();
        assert!((a[0].re - 0.5f64.sqrt()).abs() < 1e-14 && (a[1].re - 0.5f64.sqrt()).abs() < 1e-14);
        assert!(!gs.degenerate);
        let top = top_state(&spec, &basis).unwrap();
        assert!((top.energy - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_spectra() {
        let basis = Arc::new(FockBasis::build(3, 1, 1).unwrap());
        let e0 = eigenvalues(&assemble(&spec3(0.0), &*basis).unwrap()).unwrap();
        let epi = eigenvalues(&assemble(&spec3(PI), &*basis).unwrap()).unwrap();
        for (a, b) in e0.iter().zip([-1.0, -1.0, 2.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        for (a, b) in epi.iter().zip([-2.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        // φ = 0 has a doubly degenerate lowest level.
        let gs = ground_state(&assemble(&spec3(0.0), &*basis).unwrap(), &basis).unwrap();
        assert!(gs.degenerate);
        assert_eq!(gs.manifold.len(), 2);
        assert!(gs.state.amplitudes().iter().all(|a| a.im == 0.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let op = SparseOperator::from_triplets(2, [(0, 1, Complex64::new(1.0, 0.0))]).unwrap();
        let basis = Arc::new(FockBasis::build(2, 1, 1).unwrap());
        assert!(matches!(ground_state(&op, &basis), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn lanczos_matches_dense() {
        let spec = LatticeSpec::uniform(8, 1.0, 1.22, 0.0, PI, 1).unwrap();
        let basis = Arc::new(FockBasis::build(8, 4, 1).unwrap());
        let h = assemble(&spec, &*basis).unwrap();
        let dense = ground_state_with(&h, &basis, Solver::Dense).unwrap();
        let lz = ground_state_with(&h, &basis, Solver::Lanczos(LanczosOptions::default())).unwrap();
        assert!((dense.energy - lz.energy).abs() < 1e-10);
        let overlap = dense.state.inner(&lz.state).unwrap().norm();
        assert!((overlap - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lanczos_reports_non_convergence() {
        let spec = LatticeSpec::uniform(8, 1.0, 1.22, 0.0, 0.0, 2).unwrap();
        let basis = Arc::new(FockBasis::build(8, 4, 2).unwrap());
        let h = assemble(&spec, &*basis).unwrap();
        let opts = LanczosOptions { max_iter: 3, tol: 1e-14, restarts: 0 };
        assert!(matches!(
            ground_state_with(&h, &basis, Solver::Lanczos(opts)),
            Err(Error::NoConvergence { .. })
        ));
    }
}
