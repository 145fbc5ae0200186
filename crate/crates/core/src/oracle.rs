//! Brute-force ground truth.
//!
//! The full Hamiltonian on 2 qubits + 2N bath spins is built as an explicit
//! dense matrix, diagonalized, and the initial product state
//! ρ_qubits ⊗ ρ_B(0) is evolved exactly and traced over both baths.
//!
//! Site order is qubit 1, qubit 2, bath 1 sites, bath 2 sites; site 0 is the
//! most significant bit of a basis index, and a set bit means |+⟩ (σz = +1).
//! With that order the qubit block index is `index >> 2N`, matching the
//! {|−−⟩, |−+⟩, |+−⟩, |++⟩} order used everywhere else.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{
    concurrence, evolve, ln_partition_function, BathType, CouplingScaling, ModelParams, TwoQubitState,
};
use crate::error::{Error, Result};

/// Largest full-system dimension the oracle will build (N = 5).
pub const MAX_DIMENSION: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// Image of basis bit `bit` (1 = |+⟩) as (amplitude, flipped).
    fn act(self, bit: bool) -> (Complex64, bool) {
        match self {
            Pauli::Z => (Complex64::new(if bit { 1.0 } else { -1.0 }, 0.0), false),
            Pauli::X => (Complex64::new(1.0, 0.0), true),
            // σy|−⟩ = −i|+⟩, σy|+⟩ = i|−⟩
            Pauli::Y => (Complex64::new(0.0, if bit { 1.0 } else { -1.0 }), true),
        }
    }

    /// 2×2 matrix in the (|−⟩, |+⟩) basis.
    pub fn matrix(self) -> Matrix2<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::X => Matrix2::new(z, one, one, z),
            Pauli::Y => Matrix2::new(z, i, -i, z),
            Pauli::Z => Matrix2::new(-one, z, z, one),
        }
    }
}

/// A coefficient times a product of single-site Pauli operators.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub factors: Vec<(usize, Pauli)>,
}

/// Every term of the full Hamiltonian, nothing dropped:
/// λ(σx¹σx² + σy¹σy²) + δσz¹σz² + γ_s(σz¹Jz + σz²𝒥z) + μ(σz¹ + σz²) + H_B.
pub fn hamiltonian_terms(params: &ModelParams) -> Vec<PauliTerm> {
    let n = params.n_bath as usize;
    let gs = params.coupling();
    let term = |coefficient: f64, factors: Vec<(usize, Pauli)>| PauliTerm { coefficient, factors };
    let mut terms = vec![
        term(params.lambda, vec![(0, Pauli::X), (1, Pauli::X)]),
        term(params.lambda, vec![(0, Pauli::Y), (1, Pauli::Y)]),
        term(params.delta, vec![(0, Pauli::Z), (1, Pauli::Z)]),
        term(params.mu, vec![(0, Pauli::Z)]),
        term(params.mu, vec![(1, Pauli::Z)]),
    ];
    let bath2_sign = match params.bath {
        BathType::DeltaZ => -1.0,
        BathType::SigmaZ => 1.0,
    };
    for s in 0..n {
        let b1 = 2 + s;
        let b2 = 2 + n + s;
        // Jz = ½ Σ σz
        terms.push(term(gs / 2.0, vec![(0, Pauli::Z), (b1, Pauli::Z)]));
        terms.push(term(gs / 2.0, vec![(1, Pauli::Z), (b2, Pauli::Z)]));
        terms.push(term(params.h / 2.0, vec![(b1, Pauli::Z)]));
        terms.push(term(bath2_sign * params.h / 2.0, vec![(b2, Pauli::Z)]));
    }
    terms.retain(|t| t.coefficient != 0.0);
    terms
}

/// Dense matrix of a sum of Pauli terms on `sites` spins.
pub fn assemble(terms: &[PauliTerm], sites: usize) -> DMatrix<Complex64> {
    let dim = 1usize << sites;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        for t in terms {
            let mut row = col;
            let mut amp = Complex64::new(t.coefficient, 0.0);
            for &(site, op) in &t.factors {
                let shift = sites - 1 - site;
                let bit = (col >> shift) & 1 == 1;
                let (a, flip) = op.act(bit);
                amp *= a;
                if flip {
                    row ^= 1 << shift;
                }
            }
            h[(row, col)] += amp;
        }
    }
    h
}

/// Exact model on the full Hilbert space.
pub struct FullSystem {
    params: ModelParams,
    dimension: usize,
    hamiltonian: DMatrix<Complex64>,
    bath_weights: DVector<f64>,
    spectrum: OnceLock<(DVector<f64>, DMatrix<Complex64>)>,
}

impl FullSystem {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn hamiltonian(&self) -> &DMatrix<Complex64> {
        &self.hamiltonian
    }

    /// Diagonal of ρ_B(0) over the 2^{2N} bath product states.
    pub fn bath_weights(&self) -> &DVector<f64> {
        &self.bath_weights
    }

    fn bath_dim(&self) -> usize {
        self.dimension / 4
    }

    /// Eigenvalues and eigenvectors (columns), computed on first use.
    pub fn spectrum(&self) -> &(DVector<f64>, DMatrix<Complex64>) {
        self.spectrum.get_or_init(|| {
            let eig = self.hamiltonian.clone().symmetric_eigen();
            (eig.eigenvalues, eig.eigenvectors)
        })
    }

    /// e^{−iHt}
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let (values, vectors) = self.spectrum();
        let mut scaled = vectors.clone();
        for (j, &e) in values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -e * t);
            for v in scaled.column_mut(j).iter_mut() {
                *v *= phase;
            }
        }
        scaled * vectors.adjoint()
    }

    /// Tr_B[U (ρ_q ⊗ ρ_B) U†] for a given propagator.
    fn reduced_state(&self, u: &DMatrix<Complex64>, rho_q: &Matrix4<Complex64>) -> TwoQubitState {
        let nb = self.bath_dim();
        let dim = self.dimension;
        // A = U (ρ_q ⊗ W), built column by column from the sparse product state.
        let mut a = DMatrix::<Complex64>::zeros(dim, dim);
        for b in 0..4 {
            for k in 0..nb {
                let w = self.bath_weights[k];
                if w == 0.0 {
                    continue;
                }
                let col = b * nb + k;
                for ap in 0..4 {
                    let coeff = rho_q[(ap, b)] * w;
                    if coeff == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let src = ap * nb + k;
                    for r in 0..dim {
                        a[(r, col)] += u[(r, src)] * coeff;
                    }
                }
            }
        }
        // only the bath-diagonal blocks of A U† survive the partial trace
        let mut out = Matrix4::<Complex64>::zeros();
        for qa in 0..4 {
            for qb in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..nb {
                    let ra = qa * nb + k;
                    let rb = qb * nb + k;
                    for j in 0..dim {
                        acc += a[(ra, j)] * u[(rb, j)].conj();
                    }
                }
                out[(qa, qb)] = acc;
            }
        }
        TwoQubitState::from_matrix_unchecked(out)
    }
}

/// Builds the full Hamiltonian and the thermal bath state.
pub fn build_full(params: &ModelParams) -> Result<FullSystem> {
    params.validate()?;
    let n = params.n_bath as usize;
    let sites = 2 + 2 * n;
    let dimension = 1usize.checked_shl(sites as u32).unwrap_or(usize::MAX);
    if n > 5 || dimension > MAX_DIMENSION {
        return Err(Error::DimensionCap { dim: dimension, cap: MAX_DIMENSION });
    }
    let hamiltonian = assemble(&hamiltonian_terms(params), sites);

    let nb = 1usize << (2 * n);
    let hb = params.h_beta();
    let ln_z = ln_partition_function(params);
    let bath_weights = DVector::from_fn(nb, |k, _| {
        let up1 = (k >> n).count_ones() as f64;
        let up2 = (k & ((1 << n) - 1)).count_ones() as f64;
        let jz = up1 - n as f64 / 2.0;
        let jz2 = up2 - n as f64 / 2.0;
        let energy = match params.bath {
            BathType::DeltaZ => jz - jz2,
            BathType::SigmaZ => jz + jz2,
        };
        (-hb * energy - ln_z).exp()
    });
    let total: f64 = bath_weights.sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Numerical(format!("bath weights sum to {total}")));
    }
    Ok(FullSystem { params: *params, dimension, hamiltonian, bath_weights, spectrum: OnceLock::new() })
}

/// Exact reduced state of the qubits at time t.
pub fn exact_evolve(sys: &FullSystem, rho_qubits0: &TwoQubitState, t: f64) -> Result<TwoQubitState> {
    rho_qubits0.validate()?;
    let u = sys.propagator(t);
    Ok(sys.reduced_state(&u, rho_qubits0.matrix()))
}

/// [`exact_evolve`] for several initial states and times; one propagator per time.
/// Result is indexed `[state][time]`.
pub fn exact_evolve_many(sys: &FullSystem, states: &[TwoQubitState], times: &[f64]) -> Result<Vec<Vec<TwoQubitState>>> {
    for s in states {
        s.validate()?;
    }
    let mut out: Vec<Vec<TwoQubitState>> = vec![Vec::with_capacity(times.len()); states.len()];
    for &t in times {
        let u = sys.propagator(t);
        for (slot, s) in out.iter_mut().zip(states) {
            slot.push(sys.reduced_state(&u, s.matrix()));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareMode {
    /// Complex elements must agree.
    PhaseAware,
    /// Only element magnitudes must agree.
    Magnitude,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeComparison {
    pub index: usize,
    pub max_element_deviation: f64,
    /// (row, column) of the largest deviation.
    pub worst_element: (usize, usize),
    pub concurrence_deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub tol: f64,
    pub mode: CompareMode,
    pub entries: Vec<TimeComparison>,
    pub max_element_deviation: f64,
    pub max_concurrence_deviation: f64,
    /// Index of the first failing entry, if any.
    pub first_failure: Option<usize>,
    pub pass: bool,
}

pub fn compare_report(
    analytic: &[TwoQubitState],
    exact: &[TwoQubitState],
    tol: f64,
    mode: CompareMode,
) -> Result<CompareReport> {
    if analytic.len() != exact.len() {
        return Err(Error::LengthMismatch(analytic.len(), exact.len()));
    }
    let entries: Vec<TimeComparison> = analytic
        .iter()
        .zip(exact)
        .enumerate()
        .map(|(index, (a, e))| {
            let mut worst = (0.0, (0, 0));
            for i in 0..4 {
                for j in 0..4 {
                    let (x, y) = (a.get(i, j), e.get(i, j));
                    let dev = match mode {
                        CompareMode::PhaseAware => (x - y).norm(),
                        CompareMode::Magnitude => (x.norm() - y.norm()).abs(),
                    };
                    if dev > worst.0 || dev.is_nan() {
                        worst = (dev, (i, j));
                    }
                }
            }
            let concurrence_deviation = (concurrence(a) - concurrence(e)).abs();
            let pass = worst.0 <= tol && concurrence_deviation <= tol;
            TimeComparison {
                index,
                max_element_deviation: worst.0,
                worst_element: worst.1,
                concurrence_deviation,
                pass,
            }
        })
        .collect();
    let max_element_deviation = entries.iter().map(|e| e.max_element_deviation).fold(0.0, f64::max);
    let max_concurrence_deviation = entries.iter().map(|e| e.concurrence_deviation).fold(0.0, f64::max);
    let first_failure = entries.iter().position(|e| !e.pass);
    Ok(CompareReport {
        tol,
        mode,
        entries,
        max_element_deviation,
        max_concurrence_deviation,
        first_failure,
        pass: first_failure.is_none(),
    })
}

/// Random parameters for oracle runs. δ is zero unless `with_delta`.
pub fn random_params<R: Rng>(rng: &mut R, n_bath: u32, bath: BathType, with_delta: bool) -> ModelParams {
    ModelParams {
        lambda: rng.random_range(-2.0..2.0),
        delta: if with_delta { rng.random_range(-2.0..2.0) } else { 0.0 },
        gamma: rng.random_range(-3.0..3.0),
        mu: rng.random_range(-1.5..1.5),
        h: rng.random_range(-1.5..1.5),
        beta: rng.random_range(0.0..2.0),
        n_bath,
        bath,
        scaling: if rng.random_bool(0.5) { CouplingScaling::SqrtN } else { CouplingScaling::LinearN },
    }
}

fn random_psd_block<R: Rng>(rng: &mut R) -> Matrix2<Complex64> {
    let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let m = Matrix2::new(c(), c(), c(), c());
    m * m.adjoint()
}

/// A random block-form (X) density matrix.
pub fn random_block_state<R: Rng>(rng: &mut R) -> TwoQubitState {
    let outer = random_psd_block(rng);
    let inner = random_psd_block(rng);
    let norm = (outer.trace() + inner.trace()).re;
    let mut m = Matrix4::<Complex64>::zeros();
    for (i, a) in [0usize, 3].into_iter().enumerate() {
        for (j, b) in [0usize, 3].into_iter().enumerate() {
            m[(a, b)] = outer[(i, j)] / norm;
        }
    }
    for (i, a) in [1usize, 2].into_iter().enumerate() {
        for (j, b) in [1usize, 2].into_iter().enumerate() {
            m[(a, b)] = inner[(i, j)] / norm;
        }
    }
    TwoQubitState::from_matrix_unchecked(m)
}

/// Times used by the standard oracle comparison.
pub const ORACLE_TIMES: [f64; 3] = [0.3, 1.1, 2.7];

#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheckConfig {
    pub n_bath: u32,
    pub seed: u64,
    pub draws: usize,
    pub tol: f64,
    pub times: Vec<f64>,
    pub baths: Vec<BathType>,
    pub with_delta: bool,
}

impl OracleCheckConfig {
    pub fn new(n_bath: u32, seed: u64, tol: f64) -> Self {
        OracleCheckConfig {
            n_bath,
            seed,
            draws: 20,
            tol,
            times: ORACLE_TIMES.to_vec(),
            baths: vec![BathType::DeltaZ, BathType::SigmaZ],
            with_delta: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRun {
    pub params: ModelParams,
    /// Which initial state: "random-x", "bell-inner" or "bell-outer".
    pub state: &'static str,
    pub report: CompareReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheckReport {
    pub runs: Vec<OracleRun>,
    pub max_element_deviation: f64,
    pub max_concurrence_deviation: f64,
    pub pass: bool,
}

impl OracleCheckReport {
    /// Run with the largest element deviation.
    pub fn worst(&self) -> Option<&OracleRun> {
        self.runs.iter().max_by(|a, b| a.report.max_element_deviation.total_cmp(&b.report.max_element_deviation))
    }
}

/// Compares [`evolve`] to [`exact_evolve`] on one parameter set for a random
/// X state and both Bell states.
pub fn check_params<R: Rng>(params: &ModelParams, rng: &mut R, times: &[f64], tol: f64) -> Result<Vec<OracleRun>> {
    let sys = build_full(params)?;
    let states = vec![random_block_state(rng), TwoQubitState::bell_inner(), TwoQubitState::bell_outer()];
    let labels = ["random-x", "bell-inner", "bell-outer"];
    let exact = exact_evolve_many(&sys, &states, times)?;
    let mut runs = Vec::new();
    for ((state, label), exact) in states.iter().zip(labels).zip(exact) {
        let analytic = evolve(params, state, times)?;
        let report = compare_report(&analytic, &exact, tol, CompareMode::PhaseAware)?;
        runs.push(OracleRun { params: *params, state: label, report });
    }
    Ok(runs)
}

/// Random-parameter comparison of the closed-form dynamics against the oracle.
pub fn run_oracle_check(cfg: &OracleCheckConfig) -> Result<OracleCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut runs = Vec::new();
    for &bath in &cfg.baths {
        for _ in 0..cfg.draws {
            let params = random_params(&mut rng, cfg.n_bath, bath, cfg.with_delta);
            runs.extend(check_params(&params, &mut rng, &cfg.times, cfg.tol)?);
        }
    }
    Ok(summarize(runs))
}

/// Single fixed-parameter comparison.
pub fn run_fixed_check(params: &ModelParams, seed: u64, times: &[f64], tol: f64) -> Result<OracleCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(summarize(check_params(params, &mut rng, times, tol)?))
}

fn summarize(runs: Vec<OracleRun>) -> OracleCheckReport {
    let max_element_deviation = runs.iter().map(|r| r.report.max_element_deviation).fold(0.0, f64::max);
    let max_concurrence_deviation = runs.iter().map(|r| r.report.max_concurrence_deviation).fold(0.0, f64::max);
    let pass = runs.iter().all(|r| r.report.pass);
    OracleCheckReport { runs, max_element_deviation, max_concurrence_deviation, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Places `op` on `site` of `sites` by explicit Kronecker products.
    fn kron_site(op: Matrix2<Complex64>, site: usize, sites: usize) -> DMatrix<Complex64> {
        let mut acc = DMatrix::<Complex64>::identity(1, 1);
        for s in 0..sites {
            let factor =
                if s == site { DMatrix::from_iterator(2, 2, op.iter().copied()) } else { DMatrix::identity(2, 2) };
            acc = acc.kronecker(&factor);
        }
        acc
    }

    #[test]
    fn pauli_action_matches_matrices() {
        for op in [Pauli::X, Pauli::Y, Pauli::Z] {
            let term = PauliTerm { coefficient: 1.0, factors: vec![(0, op)] };
            let m = assemble(&[term], 1);
            let want = op.matrix();
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(m[(i, j)], want[(i, j)], "{op:?}");
                }
            }
        }
    }

    #[test]
    fn hamiltonian_matches_kronecker_construction() {
        let params = ModelParams {
            lambda: 0.7,
            delta: -0.4,
            gamma: 1.3,
            mu: 0.25,
            h: 0.6,
            beta: 1.0,
            n_bath: 1,
            bath: BathType::DeltaZ,
            scaling: CouplingScaling::SqrtN,
        };
        for bath in [BathType::DeltaZ, BathType::SigmaZ] {
            let p = ModelParams { bath, ..params };
            let sys = build_full(&p).unwrap();
            let s = |op: Pauli, site: usize| kron_site(op.matrix(), site, 4);
            let sign = if bath == BathType::DeltaZ { -1.0 } else { 1.0 };
            let want = (&s(Pauli::X, 0) * &s(Pauli::X, 1) + &s(Pauli::Y, 0) * &s(Pauli::Y, 1)) * c(0.7)
                + &s(Pauli::Z, 0) * &s(Pauli::Z, 1) * c(-0.4)
                + (&s(Pauli::Z, 0) * &s(Pauli::Z, 2) + &s(Pauli::Z, 1) * &s(Pauli::Z, 3)) * c(1.3 / 2.0)
                + (&s(Pauli::Z, 0) + &s(Pauli::Z, 1)) * c(0.25)
                + (&s(Pauli::Z, 2) + &s(Pauli::Z, 3) * c(sign)) * c(0.3);
            assert!((sys.hamiltonian() - want).norm() < 1e-14);
        }
    }

    #[test]
    fn build_examples() {
        let zero = build_full(&ModelParams::default()).unwrap();
        assert_eq!(zero.dimension(), 16);
        assert_eq!(zero.hamiltonian().norm(), 0.0);

        let xy = build_full(&ModelParams { lambda: 1.0, ..Default::default() }).unwrap();
        let h = xy.hamiltonian();
        let nonzero: Vec<(usize, usize)> =
            (0..16).flat_map(|i| (0..16).map(move |j| (i, j))).filter(|&(i, j)| h[(i, j)].norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 8);
        for (i, j) in nonzero {
            assert_eq!(h[(i, j)], c(2.0));
            // |−+⟩ ⊗ bath ↔ |+−⟩ ⊗ bath
            let (qi, qj) = (i >> 2, j >> 2);
            assert!(matches!((qi, qj), (1, 2) | (2, 1)));
            assert_eq!(i & 3, j & 3);
        }

        assert!(matches!(
            build_full(&ModelParams { n_bath: 6, ..Default::default() }),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn block_structure_of_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = random_params(&mut rng, 2, BathType::DeltaZ, true);
        let sys = build_full(&params).unwrap();
        let h = sys.hamiltonian();
        assert!((h - h.adjoint()).norm() < 1e-12);
        // projector onto the {|−−⟩, |++⟩} sector commutes with H
        let nb = sys.dimension() / 4;
        let proj = DMatrix::<Complex64>::from_fn(sys.dimension(), sys.dimension(), |i, j| {
            if i == j && matches!(i / nb, 0 | 3) {
                c(1.0)
            } else {
                c(0.0)
            }
        });
        assert!((h * &proj - &proj * h).norm() < 1e-12);
    }

    #[test]
    fn thermal_weights() {
        let p = ModelParams { h: 0.8, beta: 1.5, n_bath: 2, ..Default::default() };
        let sys = build_full(&p).unwrap();
        assert!((sys.bath_weights().sum() - 1.0).abs() < 1e-14);
        assert!(sys.bath_weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn exact_evolve_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = random_params(&mut rng, 1, BathType::SigmaZ, true);
        let sys = build_full(&params).unwrap();
        let rho0 = random_block_state(&mut rng);
        let out = exact_evolve(&sys, &rho0, 0.0).unwrap();
        assert!((out.matrix() - rho0.matrix()).norm() < 1e-13);

        let frozen = build_full(&ModelParams { h: 0.9, beta: 1.0, n_bath: 2, ..Default::default() }).unwrap();
        let bell = TwoQubitState::bell_inner();
        let out = exact_evolve(&frozen, &bell, 3.7).unwrap();
        assert!((out.matrix() - bell.matrix()).norm() < 1e-13);
    }

    #[test]
    fn exact_evolve_preserves_state_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=2 {
            let params = random_params(&mut rng, n, BathType::DeltaZ, true);
            let sys = build_full(&params).unwrap();
            let rho0 = random_block_state(&mut rng);
            for t in [0.4, 2.2] {
                let out = exact_evolve(&sys, &rho0, t).unwrap();
                out.validate().unwrap();
                assert!(out.block_deviation() < 1e-12);
                assert!((out.get(0, 0) - rho0.get(0, 0)).norm() < 1e-12);
                assert!((out.get(3, 3) - rho0.get(3, 3)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn compare_report_examples() {
        let a = vec![TwoQubitState::bell_inner(); 3];
        let r = compare_report(&a, &a, 1e-10, CompareMode::PhaseAware).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_element_deviation, 0.0);

        let mut shifted = a.clone();
        let mut m = *a[1].matrix();
        m[(1, 2)] += c(2e-10);
        m[(2, 1)] += c(2e-10);
        shifted[1] = TwoQubitState::from_matrix_unchecked(m);
        let r = compare_report(&a, &shifted, 1e-10, CompareMode::PhaseAware).unwrap();
        assert!(!r.pass);
        assert_eq!(r.first_failure, Some(1));
        assert!(matches!(r.entries[1].worst_element, (1, 2) | (2, 1)));

        let mut phased = *a[0].matrix();
        phased[(1, 2)] *= Complex64::from_polar(1.0, 0.4);
        phased[(2, 1)] = phased[(1, 2)].conj();
        let phased = vec![TwoQubitState::from_matrix_unchecked(phased)];
        assert!(!compare_report(&a[..1], &phased, 1e-10, CompareMode::PhaseAware).unwrap().pass);
        assert!(compare_report(&a[..1], &phased, 1e-10, CompareMode::Magnitude).unwrap().pass);

        assert!(matches!(
            compare_report(&a, &a[..2], 1e-10, CompareMode::PhaseAware),
            Err(Error::LengthMismatch(3, 2))
        ));
    }

    #[test]
    fn dynamics_matches_oracle_small() {
        let params = ModelParams { lambda: 2.0, gamma: 1.0, h: 1.0, beta: 1.0, n_bath: 2, ..Default::default() };
        let sys = build_full(&params).unwrap();
        let bell = TwoQubitState::bell_inner();
        let exact = exact_evolve(&sys, &bell, 1.3).unwrap();
        let analytic = evolve(&params, &bell, &[1.3]).unwrap();
        let r = compare_report(&analytic, &[exact], 1e-10, CompareMode::PhaseAware).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn delta_drops_out_for_block_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = random_params(&mut rng, 2, BathType::SigmaZ, true);
        assert!(params.delta != 0.0);
        let runs = check_params(&params, &mut rng, &ORACLE_TIMES, 1e-10).unwrap();
        assert!(runs.iter().all(|r| r.report.pass));
    }
}
