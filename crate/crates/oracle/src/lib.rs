//! Brute-force reference implementation.
//!
//! Shares only the parameter type [`LatticeSpec`] and the golden-file
//! records with the main crate. States are enumerated by mixed-radix
//! counting, operators are dense matrices built from explicit boson
//! matrix elements, spectra come from cyclic Jacobi rotations, and
//! time-dependent evolution uses classical RK4 on the continuous
//! Hamiltonian.

use std::collections::HashMap;
use std::f64::consts::PI;

use fluxladder::fock::LatticeSpec;
use num_complex::Complex64 as C;

pub mod golden;

const Z: C = C::new(0.0, 0.0);

/// Occupation tuples with a fixed total, in mixed-radix counting order.
#[derive(Debug, Clone)]
pub struct Space {
    pub n_sites: usize,
    pub n_max: u8,
    pub states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl Space {
    pub fn new(n_sites: usize, total: usize, n_max: u8) -> Self {
        Self::with_totals(n_sites, &[total], n_max)
    }

    /// All tuples whose total lies in `totals`.
    pub fn with_totals(n_sites: usize, totals: &[usize], n_max: u8) -> Self {
        let radix = n_max as usize + 1;
        let count = radix.pow(n_sites as u32);
        let mut states = Vec::new();
        for mut code in 0..count {
            let mut occ = vec![0u8; n_sites];
            for o in occ.iter_mut() {
                *o = (code % radix) as u8;
                code /= radix;
            }
            let sum: usize = occ.iter().map(|&n| n as usize).sum();
            if totals.contains(&sum) {
                states.push(occ);
            }
        }
        let index = states.iter().enumerate().map(|(k, s)| (s.clone(), k)).collect();
        Space { n_sites, n_max, states, index }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn find(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Dense matrix of `a†_i a_j`.
    pub fn hop(&self, i: usize, j: usize) -> Mat {
        let mut m = Mat::zeros(self.dim());
        for (k, s) in self.states.iter().enumerate() {
            if s[j] == 0 || s[i] == self.n_max {
                continue;
            }
            let mut t = s.clone();
            let factor = ((s[j] as f64) * (s[i] as f64 + 1.0)).sqrt();
            t[j] -= 1;
            t[i] += 1;
            if let Some(r) = self.find(&t) {
                m.data[r][k] += C::new(factor, 0.0);
            }
        }
        m
    }

    /// Dense matrix of `a_j` (needs the neighbouring sector present).
    pub fn lower(&self, j: usize) -> Mat {
        let mut m = Mat::zeros(self.dim());
        for (k, s) in self.states.iter().enumerate() {
            if s[j] == 0 {
                continue;
            }
            let mut t = s.clone();
            t[j] -= 1;
            if let Some(r) = self.find(&t) {
                m.data[r][k] += C::new((s[j] as f64).sqrt(), 0.0);
            }
        }
        m
    }

    pub fn number(&self, j: usize) -> Mat {
        let mut m = Mat::zeros(self.dim());
        for (k, s) in self.states.iter().enumerate() {
            m.data[k][k] = C::new(s[j] as f64, 0.0);
        }
        m
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub data: Vec<Vec<C>>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat { data: vec![vec![Z; n]; n] }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn add_scaled(&mut self, other: &Mat, s: C) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }

    pub fn dagger(&self) -> Mat {
        let n = self.dim();
        let mut m = Mat::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m.data[c][r] = self.data[r][c].conj();
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        let n = self.dim();
        let mut m = Mat::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r][k];
                if a == Z {
                    continue;
                }
                for c in 0..n {
                    m.data[r][c] += a * other.data[k][c];
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        self.data.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn expect(&self, v: &[C]) -> C {
        v.iter().zip(self.apply(v)).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Ladder Hamiltonian with rungs `-J (a†_j a_{j+1} + h.c.)` and legs
/// `J̃ (e^{iφ} a†_j a_{j+2} + h.c.)`.
pub fn hamiltonian(spec: &LatticeSpec, space: &Space) -> Mat {
    let mut h = Mat::zeros(space.dim());
    for (k, s) in space.states.iter().enumerate() {
        let e: f64 = s
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                let n = n as f64;
                spec.omega[j] * n + 0.5 * spec.u[j] * n * (n - 1.0)
            })
            .sum();
        h.data[k][k] += C::new(e, 0.0);
    }
    let phase = C::from_polar(1.0, spec.flux);
    for j in 0..spec.n_sites - 1 {
        let t = space.hop(j, j + 1);
        h.add_scaled(&t, C::new(-spec.j_rung[j], 0.0));
        h.add_scaled(&t.dagger(), C::new(-spec.j_rung[j], 0.0));
    }
    for j in 0..spec.n_sites - 2 {
        let t = space.hop(j, j + 2);
        h.add_scaled(&t, phase * spec.j_leg[j]);
        h.add_scaled(&t.dagger(), phase.conj() * spec.j_leg[j]);
    }
    h
}

/// Eigenpairs of a real symmetric matrix by cyclic Jacobi rotations,
/// ascending; eigenvectors are the columns of the returned matrix.
pub fn jacobi(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q))).map(|(p, q)| a[p][q] * a[p][q]).sum();
        let scale: f64 = (0..n).map(|p| a[p][p] * a[p][p]).sum::<f64>() + off;
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let vals = order.iter().map(|&k| a[k][k]).collect();
    let vecs = (0..n).map(|r| order.iter().map(|&k| v[r][k]).collect()).collect();
    (vals, vecs)
}

/// Eigenpairs of a Hermitian matrix, ascending, eigenvectors as a list.
/// Real matrices are diagonalized directly; complex ones through the real
/// embedding `[[A, -B], [B, A]]`, whose spectrum repeats each eigenvalue.
pub fn hermitian_eigen(h: &Mat) -> (Vec<f64>, Vec<Vec<C>>) {
    let n = h.dim();
    let scale = h.data.iter().flatten().fold(0.0f64, |m, x| m.max(x.norm()));
    // e^{iπ} leaves a rounding-level imaginary part
    let real = h.data.iter().flatten().all(|x| x.im.abs() <= 1e-15 * scale);
    if real {
        let (vals, vecs) = jacobi(h.data.iter().map(|r| r.iter().map(|x| x.re).collect()).collect());
        let cols = (0..n).map(|k| (0..n).map(|r| C::new(vecs[r][k], 0.0)).collect()).collect();
        return (vals, cols);
    }
    let mut big = vec![vec![0.0; 2 * n]; 2 * n];
    for r in 0..n {
        for c in 0..n {
            let x = h.data[r][c];
            big[r][c] = x.re;
            big[r + n][c + n] = x.re;
            big[r][c + n] = -x.im;
            big[r + n][c] = x.im;
        }
    }
    let (vals, vecs) = jacobi(big);
    // keep one vector per pair: orthogonalize complex candidates greedily
    let mut out_vals = Vec::with_capacity(n);
    let mut out_vecs: Vec<Vec<C>> = Vec::with_capacity(n);
    for k in 0..2 * n {
        let mut cand: Vec<C> = (0..n).map(|r| C::new(vecs[r][k], vecs[r + n][k])).collect();
        for prev in &out_vecs {
            let ov: C = prev.iter().zip(&cand).map(|(a, b)| a.conj() * b).sum();
            cand.iter_mut().zip(prev).for_each(|(x, p)| *x -= ov * p);
        }
        let norm = cand.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.5 {
            cand.iter_mut().for_each(|x| *x /= norm);
            out_vals.push(vals[k]);
            out_vecs.push(cand);
        }
        if out_vecs.len() == n {
            break;
        }
    }
    (out_vals, out_vecs)
}

/// Highest eigenpair of the ladder Hamiltonian, found directly.
pub fn top_state(spec: &LatticeSpec, space: &Space) -> (f64, Vec<C>) {
    let (vals, vecs) = hermitian_eigen(&hamiltonian(spec, space));
    let k = vals.len() - 1;
    (vals[k], vecs[k].clone())
}

pub fn ground_state(spec: &LatticeSpec, space: &Space) -> (f64, Vec<C>) {
    let (vals, vecs) = hermitian_eigen(&hamiltonian(spec, space));
    (vals[0], vecs[0].clone())
}

/// Observables of one state, computed from explicit dense operators.
#[derive(Debug, Clone)]
pub struct Observables {
    /// `⟨a†_i a_j⟩`.
    pub one_body: Vec<Vec<C>>,
    pub currents: Vec<f64>,
    /// `G` over rung pairs `(i, j)`, `j ≥ i + 2`, in lexicographic order.
    pub correlations: Vec<((usize, usize), f64)>,
    pub chiral: f64,
    pub bonds: Vec<f64>,
    pub bond_order: f64,
}

pub fn current_matrix(space: &Space, rung: usize, j: f64) -> Mat {
    let t = space.hop(rung, rung + 1);
    let mut m = Mat::zeros(space.dim());
    m.add_scaled(&t, C::new(0.0, j));
    m.add_scaled(&t.dagger(), C::new(0.0, -j));
    m
}

pub fn observables(spec: &LatticeSpec, space: &Space, psi: &[C]) -> Observables {
    let n = spec.n_sites;
    let one_body = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { space.number(i).expect(psi) } else { space.hop(i, j).expect(psi) })
                .collect()
        })
        .collect();
    let rungs = n - 1;
    let cur: Vec<Mat> = (0..rungs).map(|r| current_matrix(space, r, spec.j_rung[r])).collect();
    let currents: Vec<f64> = cur.iter().map(|m| m.expect(psi).re).collect();
    let mut correlations = Vec::new();
    for i in 0..rungs {
        for j in i + 2..rungs {
            let joint = cur[i].mul(&cur[j]).expect(psi).re;
            correlations.push(((i, j), joint - currents[i] * currents[j]));
        }
    }
    let mut chiral = 0.0;
    for d in 2..rungs {
        let at_d: Vec<f64> = correlations.iter().filter(|((i, j), _)| j - i == d).map(|(_, g)| *g).collect();
        chiral += at_d.iter().sum::<f64>() / (rungs - d) as f64;
    }
    let bonds: Vec<f64> = (0..rungs).map(|r| 2.0 * space.hop(r, r + 1).expect(psi).re).collect();
    // 1-based label l = r + 1 carries (-1)^l
    let bond_order = bonds.iter().enumerate().map(|(r, o)| if (r + 1) % 2 == 1 { -o } else { *o }).sum();
    Observables { one_body, currents, correlations, chiral, bonds, bond_order }
}

/// Piecewise-linear detuning schedule sampled continuously in time.
#[derive(Debug, Clone)]
pub struct LinearRamp {
    /// `(duration, start detunings, end detunings)` per segment.
    pub segments: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl LinearRamp {
    fn detunings(&self, t: f64) -> Vec<f64> {
        let mut t0 = 0.0;
        for (i, (d, a, b)) in self.segments.iter().enumerate() {
            if t <= t0 + d || i + 1 == self.segments.len() {
                let s = ((t - t0) / d).clamp(0.0, 1.0);
                return a.iter().zip(b).map(|(x, y)| x + (y - x) * s).collect();
            }
            t0 += d;
        }
        unreachable!("ramp has at least one segment")
    }
}

/// Classical RK4 integration of `i dψ/dt = (H₀ + Σ_j δ_j(t) n_j) ψ` with
/// `steps_per_ns` steps per nanosecond in every segment.
pub fn rk4_ramp(spec: &LatticeSpec, space: &Space, initial: &[u8], ramp: &LinearRamp, steps_per_ns: f64) -> Vec<C> {
    let h0 = sparse(&hamiltonian(spec, space));
    let mut psi = vec![Z; space.dim()];
    psi[space.find(initial).expect("initial state in space")] = C::new(1.0, 0.0);
    let rhs = |t: f64, v: &[C]| -> Vec<C> {
        let det = ramp.detunings(t);
        let mut out = vec![Z; v.len()];
        for &(r, c, x) in &h0 {
            out[r] += x * v[c];
        }
        for (k, s) in space.states.iter().enumerate() {
            let d: f64 = s.iter().zip(&det).map(|(&n, dj)| n as f64 * dj).sum();
            out[k] += v[k] * d;
        }
        out.iter().map(|x| C::new(x.im, -x.re)).collect()
    };
    let mut t = 0.0;
    for (d, _, _) in &ramp.segments {
        let n = (d * 1e9 * steps_per_ns).ceil().max(1.0) as usize;
        let h = d / n as f64;
        for _ in 0..n {
            let k1 = rhs(t, &psi);
            let y2: Vec<C> = psi.iter().zip(&k1).map(|(p, k)| p + k * (h / 2.0)).collect();
            let k2 = rhs(t + h / 2.0, &y2);
            let y3: Vec<C> = psi.iter().zip(&k2).map(|(p, k)| p + k * (h / 2.0)).collect();
            let k3 = rhs(t + h / 2.0, &y3);
            let y4: Vec<C> = psi.iter().zip(&k3).map(|(p, k)| p + k * h).collect();
            let k4 = rhs(t + h, &y4);
            for i in 0..psi.len() {
                psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            }
            t += h;
        }
    }
    psi
}

fn sparse(m: &Mat) -> Vec<(usize, usize, C)> {
    let mut out = Vec::new();
    for (r, row) in m.data.iter().enumerate() {
        for (c, &x) in row.iter().enumerate() {
            if x != Z {
                out.push((r, c, x));
            }
        }
    }
    out
}

/// Reference master-equation integration by fixed-step RK4 on the dense
/// density matrix, with jump operators `√γ₁ a_j` and `√(2γ_φ) n_j`.
pub fn rk4_lindblad(h: &Mat, jumps: &[Mat], rho0: &Mat, t: f64, steps: usize) -> Mat {
    let ldl: Vec<Mat> = jumps.iter().map(|l| l.dagger().mul(l)).collect();
    let ldag: Vec<Mat> = jumps.iter().map(Mat::dagger).collect();
    let rhs = |rho: &Mat| -> Mat {
        let mut out = Mat::zeros(rho.dim());
        let hr = h.mul(rho);
        let rh = rho.mul(h);
        out.add_scaled(&hr, C::new(0.0, -1.0));
        out.add_scaled(&rh, C::new(0.0, 1.0));
        for ((l, ld), lk) in jumps.iter().zip(&ldag).zip(&ldl) {
            out.add_scaled(&l.mul(rho).mul(ld), C::new(1.0, 0.0));
            out.add_scaled(&lk.mul(rho), C::new(-0.5, 0.0));
            out.add_scaled(&rho.mul(lk), C::new(-0.5, 0.0));
        }
        out
    };
    let dt = t / steps as f64;
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = rhs(&rho);
        let mut y = rho.clone();
        y.add_scaled(&k1, C::new(dt / 2.0, 0.0));
        let k2 = rhs(&y);
        let mut y = rho.clone();
        y.add_scaled(&k2, C::new(dt / 2.0, 0.0));
        let k3 = rhs(&y);
        let mut y = rho.clone();
        y.add_scaled(&k3, C::new(dt, 0.0));
        let k4 = rhs(&y);
        rho.add_scaled(&k1, C::new(dt / 6.0, 0.0));
        rho.add_scaled(&k2, C::new(dt / 3.0, 0.0));
        rho.add_scaled(&k3, C::new(dt / 3.0, 0.0));
        rho.add_scaled(&k4, C::new(dt / 6.0, 0.0));
    }
    rho
}

/// `|⟨a|b⟩|²` for normalized vectors in the same space.
pub fn overlap_sqr(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C>().norm_sqr()
}

/// Angular frequency of `f` MHz.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_known_matrix() {
        let (vals, vecs) = jacobi(vec![vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]]);
        let s = 2f64.sqrt();
        for (v, e) in vals.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((v - e).abs() < 1e-13);
        }
        assert!((vecs[0][0].abs() - 0.5).abs() < 1e-12);
        assert!(vecs[1][1].abs() < 1e-12);
    }

    #[test]
    fn complex_embedding_recovers_spectrum() {
        let mut h = Mat::zeros(2);
        h.data[0][1] = C::new(0.0, 1.0);
        h.data[1][0] = C::new(0.0, -1.0);
        let (vals, vecs) = hermitian_eigen(&h);
        assert!((vals[0] + 1.0).abs() < 1e-13 && (vals[1] - 1.0).abs() < 1e-13);
        let hv = h.apply(&vecs[1]);
        assert!(hv.iter().zip(&vecs[1]).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn space_counts_and_hops() {
        let s = Space::new(4, 2, 1);
        assert_eq!(s.dim(), 6);
        assert_eq!(Space::new(8, 4, 2).dim(), 266);
        let t = s.hop(0, 1);
        let k = s.find(&[0, 1, 1, 0]).unwrap();
        let r = s.find(&[1, 0, 1, 0]).unwrap();
        assert_eq!(t.data[r][k], C::new(1.0, 0.0));
    }

    #[test]
    fn two_site_beamsplitter_levels() {
        let spec = LatticeSpec::uniform(3, 1.0, 0.5, 0.0, 0.0, 1).unwrap();
        let space = Space::new(3, 1, 1);
        let (vals, _) = hermitian_eigen(&hamiltonian(&spec, &space));
        let trace: f64 = vals.iter().sum();
        assert!(trace.abs() < 1e-12);
    }
}
