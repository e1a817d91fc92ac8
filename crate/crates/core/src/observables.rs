//! Exact (infinite-shot) observables.
//!
//! Rungs are 0-based: rung `j` is the link between sites `j` and `j + 1`.
//! All functions take any [`QuantumState`], so the same code serves pure
//! states and density matrices.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fock::{LatticeSpec, OccupationBasis, StateVector};
use crate::hamiltonian::{bond_operator, current_operator};
use crate::operator::{hop_operator, SparseOperator};
use crate::{Complex64, Error, Result, C0, C1};

/// Anything that can return expectation values of operators on its basis.
pub trait QuantumState {
    type Basis: OccupationBasis;

    fn basis(&self) -> &Arc<Self::Basis>;

    /// `⟨A⟩`.
    fn expect(&self, op: &SparseOperator) -> Result<Complex64>;

    /// `⟨A B⟩`.
    fn expect_product(&self, a: &SparseOperator, b: &SparseOperator) -> Result<Complex64>;
}

impl<B: OccupationBasis> QuantumState for StateVector<B> {
    type Basis = B;

    fn basis(&self) -> &Arc<B> {
        StateVector::basis(self)
    }

    fn expect(&self, op: &SparseOperator) -> Result<Complex64> {
        op.expectation(self)
    }

    fn expect_product(&self, a: &SparseOperator, b: &SparseOperator) -> Result<Complex64> {
        a.check_dim(self.len())?;
        b.check_dim(self.len())?;
        let bpsi = b.mul_vec(self.amplitudes());
        let apsi = a.adjoint().mul_vec(self.amplitudes());
        Ok(apsi.iter().zip(&bpsi).map(|(x, y)| x.conj() * y).sum())
    }
}

fn check_rung(rung: usize, n_sites: usize) -> Result<()> {
    if rung + 1 >= n_sites {
        return Err(Error::param(format!("rung {rung} out of range for {n_sites} sites")));
    }
    Ok(())
}

/// `ρ¹_{ij} = ⟨a†_i a_j⟩`.
pub fn one_body_matrix<S: QuantumState>(state: &S) -> Result<DMatrix<Complex64>> {
    let basis = &**state.basis();
    let n = basis.n_sites();
    let mut m = DMatrix::from_element(n, n, C0);
    for i in 0..n {
        let pops: Complex64 = state.expect(&crate::operator::number_operator(basis, i))?;
        m[(i, i)] = Complex64::new(pops.re, 0.0);
        for j in i + 1..n {
            let v = state.expect(&hop_operator(basis, i, j, C1))?;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    Ok(m)
}

/// `⟨𝒥_j⟩` from the current operator.
pub fn rung_current<S: QuantumState>(state: &S, rung: usize, spec: &LatticeSpec) -> Result<f64> {
    let op = current_operator(rung, spec, &**state.basis())?;
    Ok(state.expect(&op)?.re)
}

/// `⟨𝒥_j⟩ = 2 J_j Im⟨a†_{j+1} a_j⟩` evaluated from the one-body matrix.
pub fn rung_current_from_coherence(one_body: &DMatrix<Complex64>, rung: usize, spec: &LatticeSpec) -> Result<f64> {
    check_rung(rung, one_body.nrows())?;
    Ok(2.0 * spec.j_rung[rung] * one_body[(rung + 1, rung)].im)
}

/// Whether rungs `i` and `j` can be read out simultaneously.
pub fn measurable_pair(i: usize, j: usize) -> bool {
    i.abs_diff(j) >= 2
}

/// All simultaneously measurable rung pairs `(i, j)` with `i < j`.
pub fn measurable_pairs(n_rungs: usize) -> Vec<(usize, usize)> {
    (0..n_rungs)
        .flat_map(|i| (i + 2..n_rungs).map(move |j| (i, j)))
        .collect()
}

/// `G(i, j) = ⟨𝒥_i 𝒥_j⟩ - ⟨𝒥_i⟩⟨𝒥_j⟩` for rungs sharing no site.
pub fn current_correlation<S: QuantumState>(state: &S, i: usize, j: usize, spec: &LatticeSpec) -> Result<f64> {
    if !measurable_pair(i, j) {
        return Err(Error::NonMeasurablePair(i, j));
    }
    let basis = &**state.basis();
    let ji = current_operator(i, spec, basis)?;
    let jj = current_operator(j, spec, basis)?;
    let joint = state.expect_product(&ji, &jj)?.re;
    Ok(joint - state.expect(&ji)?.re * state.expect(&jj)?.re)
}

/// Every measurable `G(i, j)` with `i < j`.
pub fn correlation_map<S: QuantumState>(state: &S, spec: &LatticeSpec) -> Result<BTreeMap<(usize, usize), f64>> {
    measurable_pairs(spec.n_rungs())
        .into_iter()
        .map(|(i, j)| Ok(((i, j), current_correlation(state, i, j, spec)?)))
        .collect()
}

/// `𝒞 = Σ_{d ≥ 2} 1/(R - d) Σ_j G(j, j + d)` for `R` rungs: the sum over
/// distances of the mean correlation at each distance.
pub fn chiral_order_from_map(g: &BTreeMap<(usize, usize), f64>, n_rungs: usize) -> f64 {
    (2..n_rungs)
        .map(|d| {
            let sum: f64 = (0..n_rungs - d).filter_map(|j| g.get(&(j, j + d))).sum();
            sum / (n_rungs - d) as f64
        })
        .sum()
}

pub fn chiral_order<S: QuantumState>(state: &S, spec: &LatticeSpec) -> Result<f64> {
    if spec.n_sites < 4 {
        return Err(Error::param("chiral order needs at least 4 sites"));
    }
    Ok(chiral_order_from_map(&correlation_map(state, spec)?, spec.n_rungs()))
}

/// `𝒪_j = 2 Re⟨a†_j a_{j+1}⟩`.
pub fn bond_kinetic<S: QuantumState>(state: &S, rung: usize) -> Result<f64> {
    let op = bond_operator(rung, &**state.basis())?;
    Ok(state.expect(&op)?.re)
}

/// Staggered sum `Σ_j (-1)^{j+1} 𝒪_j` over 0-based rungs, so the first
/// rung enters with a minus sign.
pub fn bond_order_from_bonds(bonds: &[f64]) -> f64 {
    bonds
        .iter()
        .enumerate()
        .map(|(j, o)| if j % 2 == 0 { -o } else { *o })
        .sum()
}

pub fn bond_order<S: QuantumState>(state: &S) -> Result<f64> {
    let n = state.basis().n_sites();
    if n < 2 {
        return Err(Error::param("bond order needs at least 2 sites"));
    }
    let bonds = (0..n - 1).map(|j| bond_kinetic(state, j)).collect::<Result<Vec<_>>>()?;
    Ok(bond_order_from_bonds(&bonds))
}

/// Projections of a two-fold degenerate real manifold onto the states of
/// definite chirality `(|a⟩ ± i|b⟩)/√2`. The first returned state has the
/// positive current on rung `rung`.
pub fn chiral_sectors<B: OccupationBasis>(
    manifold: &[StateVector<B>],
    rung: usize,
    spec: &LatticeSpec,
) -> Result<(StateVector<B>, StateVector<B>)> {
    if manifold.len() != 2 {
        return Err(Error::param(format!("chiral sectors need a 2-dimensional manifold, got {}", manifold.len())));
    }
    let (a, b) = (&manifold[0], &manifold[1]);
    let combine = |s: f64| -> Result<StateVector<B>> {
        let amps = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x + Complex64::new(0.0, s) * y) / 2f64.sqrt())
            .collect();
        let mut v = a.with_amplitudes(amps)?;
        v.normalize()?;
        Ok(v)
    };
    let (p, m) = (combine(1.0)?, combine(-1.0)?);
    if rung_current(&p, rung, spec)? >= rung_current(&m, rung, spec)? {
        Ok((p, m))
    } else {
        Ok((m, p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportSource {
    Exact,
    Shots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub rung_i: usize,
    pub rung_j: usize,
    pub value: f64,
    pub stderr: Option<f64>,
}

/// Standard errors attached to shot-based reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ReportErrors {
    pub currents: Option<Vec<f64>>,
    pub chiral_c: Option<f64>,
    pub bond_o: Option<Vec<f64>>,
    pub bond_order: Option<f64>,
}

/// All observables of one state. Currents are in units of the mean rung
/// coupling and correlations in units of its square; the one-body matrix
/// is dimensionless and stored as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub source: ReportSource,
    pub units: String,
    pub one_body: Vec<Vec<[f64; 2]>>,
    pub currents: Vec<f64>,
    pub g_matrix: Vec<CorrelationEntry>,
    pub chiral_c: f64,
    pub bond_o: Vec<f64>,
    pub bond_order: f64,
    pub errors: Option<ReportErrors>,
}

pub const REPORT_UNITS: &str = "currents in J, correlations in J^2, J = mean rung coupling";

impl ObservableReport {
    pub fn exact<S: QuantumState>(state: &S, spec: &LatticeSpec) -> Result<Self> {
        let basis = state.basis();
        if basis.n_sites() != spec.n_sites {
            return Err(Error::Dimension { expected: spec.n_sites, got: basis.n_sites() });
        }
        let jbar = spec.mean_rung();
        let ob = one_body_matrix(state)?;
        let currents = (0..spec.n_rungs())
            .map(|r| rung_current(state, r, spec).map(|c| c / jbar))
            .collect::<Result<Vec<_>>>()?;
        let g = correlation_map(state, spec)?;
        let chiral_c = chiral_order_from_map(&g, spec.n_rungs()) / (jbar * jbar);
        let g_matrix = g
            .iter()
            .map(|(&(i, j), &v)| CorrelationEntry { rung_i: i, rung_j: j, value: v / (jbar * jbar), stderr: None })
            .collect();
        let bond_o = (0..spec.n_rungs()).map(|r| bond_kinetic(state, r)).collect::<Result<Vec<_>>>()?;
        Ok(ObservableReport {
            source: ReportSource::Exact,
            units: REPORT_UNITS.to_string(),
            one_body: (0..ob.nrows())
                .map(|i| (0..ob.ncols()).map(|j| [ob[(i, j)].re, ob[(i, j)].im]).collect())
                .collect(),
            currents,
            g_matrix,
            chiral_c,
            bond_order: bond_order_from_bonds(&bond_o),
            bond_o,
            errors: None,
        })
    }

    /// `G(i, j)` in report units, symmetric in its arguments.
    pub fn g(&self, i: usize, j: usize) -> Option<f64> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.g_matrix.iter().find(|e| e.rung_i == a && e.rung_j == b).map(|e| e.value)
    }

    /// G entries as CSV with 1-based rung labels.
    pub fn g_csv(&self) -> String {
        let mut out = String::from("rung_i,rung_j,value,stderr\n");
        for e in &self.g_matrix {
            let se = e.stderr.map(|s| format!("{s:.12e}")).unwrap_or_default();
            out.push_str(&format!("{},{},{:.12e},{}\n", e.rung_i + 1, e.rung_j + 1, e.value, se));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::top_state;
    use crate::fock::FockBasis;

    fn pair() -> (Arc<FockBasis>, LatticeSpec) {
        (Arc::new(FockBasis::build(2, 1, 1).unwrap()), LatticeSpec::new(vec![0.0; 2], vec![0.0; 2], vec![1.0], vec![], 0.0, 1).unwrap())
    }

    fn sup(basis: &Arc<FockBasis>, phase: Complex64) -> StateVector {
        StateVector::superposition(basis.clone(), &[(&[1, 0], C1), (&[0, 1], phase)]).unwrap()
    }

    #[test]
    fn product_state_one_body() {
        let (basis, _) = pair();
        let s = StateVector::basis_state(basis, &[1, 0]).unwrap();
        let m = one_body_matrix(&s).unwrap();
        assert_eq!(m[(0, 0)], C1);
        assert_eq!(m[(1, 1)], C0);
        assert_eq!(m[(0, 1)], C0);
    }

    #[test]
    fn symmetric_superposition() {
        let (basis, spec) = pair();
        let s = sup(&basis, C1);
        let m = one_body_matrix(&s).unwrap();
        assert!((m[(0, 1)].re - 0.5).abs() < 1e-15);
        assert!((bond_kinetic(&s, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!(rung_current(&s, 0, &spec).unwrap().abs() < 1e-15);
    }

    #[test]
    fn twisted_superposition_carries_current() {
        let (basis, spec) = pair();
        let s = sup(&basis, Complex64::new(0.0, 1.0));
        assert!((rung_current(&s, 0, &spec).unwrap() + 1.0).abs() < 1e-15);
        let ob = one_body_matrix(&s).unwrap();
        assert!((rung_current_from_coherence(&ob, 0, &spec).unwrap() + 1.0).abs() < 1e-15);
        assert!(bond_kinetic(&s, 0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn fifteen_pairs_on_eight_sites() {
        assert_eq!(measurable_pairs(7).len(), 15);
        assert!(!measurable_pair(3, 4));
        assert!(measurable_pair(4, 2));
    }

    #[test]
    fn overlapping_pair_is_rejected() {
        let spec = LatticeSpec::uniform(4, 1.0, 1.0, 0.0, 0.0, 1).unwrap();
        let basis = Arc::new(FockBasis::build(4, 2, 1).unwrap());
        let s = StateVector::basis_state(basis, &[1, 0, 1, 0]).unwrap();
        let err = current_correlation(&s, 1, 2, &spec).unwrap_err();
        assert!(err.to_string().contains("non-measurable pair"));
    }

    #[test]
    fn product_state_has_no_correlations() {
        let spec = LatticeSpec::uniform(8, 1.0, 1.22, 0.0, std::f64::consts::PI, 1).unwrap();
        let basis = Arc::new(FockBasis::build(8, 4, 1).unwrap());
        let s = StateVector::basis_state(basis, &[1, 0, 0, 1, 1, 0, 0, 1]).unwrap();
        assert_eq!(chiral_order(&s, &spec).unwrap(), 0.0);
        assert!(correlation_map(&s, &spec).unwrap().values().all(|g| *g == 0.0));
    }

    #[test]
    fn report_is_consistent() {
        let spec = LatticeSpec::from_ratio(8, 1.0, -1.22, 0.0, 1).unwrap();
        let basis = Arc::new(FockBasis::build(8, 4, 1).unwrap());
        let s = top_state(&spec, &basis).unwrap().state;
        let r = ObservableReport::exact(&s, &spec).unwrap();
        let trace: f64 = (0..8).map(|i| r.one_body[i][i][0]).sum();
        assert!((trace - 4.0).abs() < 1e-12);
        assert_eq!(r.g_matrix.len(), 15);
        assert!(r.currents.iter().all(|c| c.abs() < 1e-10));
        assert!(r.chiral_c > 0.0);
        assert_eq!(r.g(6, 0), r.g(0, 6));
        assert_eq!(r.g_csv().lines().count(), 16);
    }

    #[test]
    fn staggered_sign_convention() {
        assert_eq!(bond_order_from_bonds(&[1.0, 2.0, 4.0]), -1.0 + 2.0 - 4.0);
    }

    #[test]
    fn chiral_sectors_carry_opposite_currents() {
        let (basis, spec) = pair();
        let a = StateVector::basis_state(basis.clone(), &[1, 0]).unwrap();
        let b = StateVector::basis_state(basis, &[0, 1]).unwrap();
        let (p, m) = chiral_sectors(&[a, b], 0, &spec).unwrap();
        assert!((rung_current(&p, 0, &spec).unwrap() - 1.0).abs() < 1e-14);
        assert!((rung_current(&m, 0, &spec).unwrap() + 1.0).abs() < 1e-14);
    }
}
