//! Sparse complex operators in compressed-row form.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;

use crate::fock::{hop_element, OccupationBasis, StateVector};
use crate::{Complex64, Error, Result, C0};

/// Square sparse operator on a basis of dimension `dim`.
///
/// Explicit zeros are never stored. `hermitian` is set by constructors that
/// guarantee `A[r,c] == conj(A[c,r])` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    hermitian: bool,
}

/// Accumulates `(row, col, value)` triplets; duplicates are summed.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    dim: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl TripletBuilder {
    pub fn new(dim: usize) -> Self {
        TripletBuilder { dim, entries: BTreeMap::new() }
    }

    pub fn add(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(row < self.dim && col < self.dim);
        *self.entries.entry((row, col)).or_insert(C0) += value;
    }

    pub fn build(self, hermitian: bool) -> SparseOperator {
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals = Vec::with_capacity(self.entries.len());
        for ((r, c), v) in self.entries {
            if v == C0 {
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..self.dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseOperator { dim: self.dim, row_ptr, cols, vals, hermitian }
    }
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        TripletBuilder::new(dim).build(true)
    }

    pub fn identity(dim: usize) -> Self {
        SparseOperator::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut b = TripletBuilder::new(values.len());
        for (k, &v) in values.iter().enumerate() {
            b.add(k, k, Complex64::new(v, 0.0));
        }
        b.build(true)
    }

    /// Operator from triplets; the Hermitian flag is derived from an exact
    /// entrywise check.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Result<Self> {
        let mut b = TripletBuilder::new(dim);
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::param(format!("triplet ({r}, {c}) outside dimension {dim}")));
            }
            b.add(r, c, v);
        }
        let mut op = b.build(false);
        op.hermitian = op.hermitian_deviation() == 0.0;
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Iterates stored entries row by row.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(p) => self.vals[span.start + p],
            Err(_) => C0,
        }
    }

    /// Largest `|A[r,c] - conj(A[c,r])|`.
    pub fn hermitian_deviation(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// True when every stored entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum; an upper bound on the spectral norm of a
    /// Hermitian operator.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yr = acc;
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![C0; self.dim];
        self.apply(x, &mut y);
        y
    }

    pub fn apply_state<B: OccupationBasis>(&self, state: &StateVector<B>) -> Result<StateVector<B>> {
        self.check_dim(state.len())?;
        state.with_amplitudes(self.mul_vec(state.amplitudes()))
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation<B: OccupationBasis>(&self, state: &StateVector<B>) -> Result<Complex64> {
        self.check_dim(state.len())?;
        let amps = state.amplitudes();
        let mut acc = C0;
        for (r, a) in amps.iter().enumerate() {
            let mut row = C0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += self.vals[k] * amps[self.cols[k]];
            }
            acc += a.conj() * row;
        }
        Ok(acc)
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::Dimension { expected: self.dim, got });
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> SparseOperator {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + other`.
    pub fn add(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.combine(other, 1.0)
    }

    /// `self - other`.
    pub fn sub(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &SparseOperator, sign: f64) -> Result<SparseOperator> {
        other.check_dim(self.dim)?;
        let mut b = TripletBuilder::new(self.dim);
        for (r, c, v) in self.triplets() {
            b.add(r, c, v);
        }
        for (r, c, v) in other.triplets() {
            b.add(r, c, v * sign);
        }
        Ok(b.build(self.hermitian && other.hermitian))
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &SparseOperator) -> Result<SparseOperator> {
        other.check_dim(self.dim)?;
        let mut b = TripletBuilder::new(self.dim);
        for (r, k, a) in self.triplets() {
            for (c, v) in other.row(k) {
                b.add(r, c, a * v);
            }
        }
        let mut op = b.build(false);
        op.hermitian = op.hermitian_deviation() == 0.0;
        Ok(op)
    }

    pub fn adjoint(&self) -> SparseOperator {
        let mut b = TripletBuilder::new(self.dim);
        for (r, c, v) in self.triplets() {
            b.add(c, r, v.conj());
        }
        b.build(self.hermitian)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, C0);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Diagonal entries, if the operator is diagonal.
    pub fn as_diagonal(&self) -> Option<Vec<Complex64>> {
        let mut d = vec![C0; self.dim];
        for (r, c, v) in self.triplets() {
            if r != c {
                return None;
            }
            d[r] = v;
        }
        Some(d)
    }

    /// Writes one `row col re im` line per stored entry.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r} {c} {:e} {:e}", v.re, v.im)?;
        }
        Ok(())
    }

    /// Parses the output of [`SparseOperator::write_triplets`].
    pub fn read_triplets(dim: usize, text: &str) -> Result<SparseOperator> {
        let mut trips = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Format(format!("line {}: expected `row col re im`", lineno + 1));
            if fields.len() != 4 {
                return Err(bad());
            }
            let r = fields[0].parse().map_err(|_| bad())?;
            let c = fields[1].parse().map_err(|_| bad())?;
            let re: f64 = fields[2].parse().map_err(|_| bad())?;
            let im: f64 = fields[3].parse().map_err(|_| bad())?;
            trips.push((r, c, Complex64::new(re, im)));
        }
        SparseOperator::from_triplets(dim, trips)
    }
}

/// `amplitude · a†_i a_j` on any occupation basis.
pub fn hop_operator<B: OccupationBasis + ?Sized>(basis: &B, i: usize, j: usize, amplitude: Complex64) -> SparseOperator {
    let mut b = TripletBuilder::new(basis.len());
    let mut buf = vec![0u8; basis.n_sites()];
    for k in 0..basis.len() {
        if let Some((target, elem)) = hop_element(basis, k, i, j, &mut buf) {
            b.add(target, k, amplitude * elem);
        }
    }
    b.build(false)
}

/// Hermitian pair `amplitude · a†_i a_j + conj(amplitude) · a†_j a_i`.
pub fn hop_pair_operator<B: OccupationBasis + ?Sized>(
    basis: &B,
    i: usize,
    j: usize,
    amplitude: Complex64,
) -> SparseOperator {
    let mut b = TripletBuilder::new(basis.len());
    add_hop_pair(&mut b, basis, i, j, amplitude);
    b.build(true)
}

/// Adds `amplitude · a†_i a_j + h.c.` so that mirrored entries are exact
/// conjugates of each other.
pub(crate) fn add_hop_pair<B: OccupationBasis + ?Sized>(
    b: &mut TripletBuilder,
    basis: &B,
    i: usize,
    j: usize,
    amplitude: Complex64,
) {
    let mut buf = vec![0u8; basis.n_sites()];
    for k in 0..basis.len() {
        if let Some((target, elem)) = hop_element(basis, k, i, j, &mut buf) {
            let v = amplitude * elem;
            b.add(target, k, v);
            b.add(k, target, v.conj());
        }
    }
}

/// Number operator `n_site`.
pub fn number_operator<B: OccupationBasis + ?Sized>(basis: &B, site: usize) -> SparseOperator {
    let diag: Vec<f64> = (0..basis.len()).map(|k| basis.occupations(k)[site] as f64).collect();
    SparseOperator::diagonal(&diag)
}

/// Total number operator.
pub fn total_number_operator<B: OccupationBasis + ?Sized>(basis: &B) -> SparseOperator {
    let diag: Vec<f64> = (0..basis.len())
        .map(|k| basis.occupations(k).iter().map(|&n| n as f64).sum())
        .collect();
    SparseOperator::diagonal(&diag)
}

/// Annihilation operator `a_site`; maps the `N`-boson block onto the
/// `N - 1` block, so it is only useful on multi-sector bases.
pub fn annihilation_operator<B: OccupationBasis + ?Sized>(basis: &B, site: usize) -> SparseOperator {
    let mut b = TripletBuilder::new(basis.len());
    let mut buf = vec![0u8; basis.n_sites()];
    for k in 0..basis.len() {
        let occ = basis.occupations(k);
        if occ[site] == 0 {
            continue;
        }
        buf.copy_from_slice(occ);
        buf[site] -= 1;
        if let Some(target) = basis.index_of(&buf) {
            b.add(target, k, Complex64::new((occ[site] as f64).sqrt(), 0.0));
        }
    }
    b.build(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockBasis;
    use std::sync::Arc;

    #[test]
    fn identity_expectation_is_one() {
        let b = Arc::new(FockBasis::build(3, 2, 2).unwrap());
        let s = StateVector::superposition(
            b.clone(),
            &[(&[2, 0, 0], Complex64::new(0.3, 0.1)), (&[0, 1, 1], Complex64::new(-0.2, 0.7))],
        )
        .unwrap();
        let id = SparseOperator::identity(b.len());
        assert!((id.expectation(&s).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn number_expectation() {
        let b = Arc::new(FockBasis::build(2, 1, 1).unwrap());
        let s = StateVector::basis_state(b.clone(), &[1, 0]).unwrap();
        assert_eq!(number_operator(&*b, 0).expectation(&s).unwrap().re, 1.0);
        assert_eq!(number_operator(&*b, 1).expectation(&s).unwrap().re, 0.0);
    }

    #[test]
    fn hop_adjoint_relation() {
        let b = FockBasis::build(3, 3, 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let fwd = hop_operator(&b, i, j, Complex64::new(1.0, 0.0));
                let back = hop_operator(&b, j, i, Complex64::new(1.0, 0.0));
                assert_eq!(fwd.adjoint(), back);
            }
        }
    }

    #[test]
    fn hop_pair_is_exactly_hermitian() {
        let b = FockBasis::build(4, 2, 2).unwrap();
        let op = hop_pair_operator(&b, 0, 2, Complex64::from_polar(1.3, 0.7));
        assert!(op.is_hermitian());
        assert_eq!(op.hermitian_deviation(), 0.0);
    }

    #[test]
    fn triplet_text_round_trip() {
        let b = FockBasis::build(3, 2, 2).unwrap();
        let op = hop_pair_operator(&b, 0, 1, Complex64::new(0.5, -0.25));
        let mut buf = Vec::new();
        op.write_triplets(&mut buf).unwrap();
        let back = SparseOperator::read_triplets(op.dim(), std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, op);
        assert!(SparseOperator::read_triplets(2, "0 1 x 0").is_err());
    }

    #[test]
    fn dimension_checks() {
        let b = Arc::new(FockBasis::build(2, 1, 1).unwrap());
        let s = StateVector::basis_state(b, &[1, 0]).unwrap();
        assert!(SparseOperator::identity(3).expectation(&s).is_err());
    }
}
