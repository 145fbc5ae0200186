//! Finite-N dynamics of two qubits Ising-coupled to two equal-size spin baths.
//!
//! Basis order for the qubits is {|−−⟩, |−+⟩, |+−⟩, |++⟩} (indices 0..4),
//! with σz|−⟩ = −|−⟩. The Hamiltonian splits into a diagonal block on
//! {|−−⟩, |++⟩} driven by Σz = Jz + 𝒥z and an XY-mixed block on
//! {|−+⟩, |+−⟩} driven by Δz = Jz − 𝒥z. Block-form initial states evolve in
//! each block independently.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::collective::{binomial, collective_trace};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BathType {
    /// H_B = h (Jz − 𝒥z)
    #[default]
    DeltaZ,
    /// H_B = h (Jz + 𝒥z)
    SigmaZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CouplingScaling {
    /// γ / √N
    #[default]
    SqrtN,
    /// γ / N
    LinearN,
}

/// Couplings, fields, temperature and bath size of the model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// XY coupling between the qubits.
    pub lambda: f64,
    /// Ising zz coupling between the qubits.
    pub delta: f64,
    /// Qubit–bath coupling before rescaling.
    pub gamma: f64,
    /// Field on the qubits.
    pub mu: f64,
    /// Field on the baths.
    pub h: f64,
    /// Inverse bath temperature.
    pub beta: f64,
    /// Spins per bath.
    pub n_bath: u32,
    pub bath: BathType,
    pub scaling: CouplingScaling,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            lambda: 0.0,
            delta: 0.0,
            gamma: 0.0,
            mu: 0.0,
            h: 0.0,
            beta: 0.0,
            n_bath: 1,
            bath: BathType::DeltaZ,
            scaling: CouplingScaling::SqrtN,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_bath == 0 {
            return Err(Error::Domain("n_bath must be at least 1".into()));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::Domain(format!("beta must be finite and ≥ 0, got {}", self.beta)));
        }
        for (name, v) in
            [("lambda", self.lambda), ("delta", self.delta), ("gamma", self.gamma), ("mu", self.mu), ("h", self.h)]
        {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// h·β, the only combination of field and temperature that enters the
    /// thermal weights.
    pub fn h_beta(&self) -> f64 {
        self.h * self.beta
    }

    /// The rescaled coupling γ/√N or γ/N.
    pub fn coupling(&self) -> f64 {
        let n = self.n_bath as f64;
        match self.scaling {
            CouplingScaling::SqrtN => self.gamma / n.sqrt(),
            CouplingScaling::LinearN => self.gamma / n,
        }
    }

    fn require_bath(&self, bath: BathType, what: &str) -> Result<()> {
        self.validate()?;
        if self.bath != bath {
            return Err(Error::Precondition(format!("{what} requires bath type {bath:?}, got {:?}", self.bath)));
        }
        Ok(())
    }
}

/// ln(2 cosh x) without overflow.
pub(crate) fn ln_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// ln of the thermal partition function [2 cosh(hβ/2)]^{2N} of both baths.
pub fn ln_partition_function(params: &ModelParams) -> f64 {
    2.0 * params.n_bath as f64 * ln_two_cosh(params.h_beta() / 2.0)
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    match binomial(n as u64, k as i64).to_f64() {
        Some(v) if v.is_finite() => v.ln(),
        _ => (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum(),
    }
}

/// Tolerance on Σ weights − 1 before a distribution is rejected as broken.
const NORMALIZATION_TOL: f64 = 1e-10;

/// Thermal distribution of the Δz eigenvalue d = m1 − m2 over the two baths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaDistribution {
    entries: Vec<(HalfInt, f64)>,
}

impl DeltaDistribution {
    /// (d, weight) pairs in increasing d, from −N to N.
    pub fn entries(&self) -> &[(HalfInt, f64)] {
        &self.entries
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn weight(&self, d: HalfInt) -> f64 {
        self.entries.iter().find(|e| e.0 == d).map_or(0.0, |e| e.1)
    }
}

/// Aggregates the product-basis thermal state of both baths onto the
/// eigenvalues of Δz.
///
/// Each bath pair (k1, k2) of up-spin counts carries C(N, k1) C(N, k2)
/// e^{−hβ E}/Z where E is the bath energy in units of h: m1 − m2 for the
/// Δz bath and m1 + m2 for the Σz bath. Weights are formed in log space.
pub fn delta_distribution(params: &ModelParams) -> Result<DeltaDistribution> {
    params.validate()?;
    let n = params.n_bath;
    let hb = params.h_beta();
    let ln_z = ln_partition_function(params);
    let ln_c: Vec<f64> = (0..=n).map(|k| ln_binomial(n, k)).collect();
    let half_n = n as f64 / 2.0;

    let mut weights = vec![0.0f64; 2 * n as usize + 1];
    for k1 in 0..=n {
        let m1 = k1 as f64 - half_n;
        for k2 in 0..=n {
            let m2 = k2 as f64 - half_n;
            let energy = match params.bath {
                BathType::DeltaZ => m1 - m2,
                BathType::SigmaZ => m1 + m2,
            };
            let idx = (k1 as i64 - k2 as i64 + n as i64) as usize;
            weights[idx] += (ln_c[k1 as usize] + ln_c[k2 as usize] - hb * energy - ln_z).exp();
        }
    }
    let entries: Vec<(HalfInt, f64)> =
        weights.into_iter().enumerate().map(|(idx, w)| (HalfInt::from_int(idx as i64 - n as i64), w)).collect();
    let total: f64 = entries.iter().map(|e| e.1).sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Numerical(format!("thermal weights sum to {total}, expected 1")));
    }
    // remove the last few ulps of rounding so that t = 0 reproduces ρ(0)
    let entries = entries.into_iter().map(|(d, w)| (d, w / total)).collect();
    Ok(DeltaDistribution { entries })
}

/// ρ14(t)/ρ14(0) for the Δz bath, from the closed form
/// e^{4iμt} [1 + (cos²(γ_s t) − 1)/cosh²(hβ/2)]^N.
pub fn rho14_ratio(params: &ModelParams, t: f64) -> Result<Complex64> {
    params.require_bath(BathType::DeltaZ, "rho14_ratio")?;
    let x = params.coupling() * t;
    let ch = (params.h_beta() / 2.0).cosh();
    let base = 1.0 - x.sin().powi(2) / (ch * ch);
    let magnitude = powu_real(base, params.n_bath);
    Ok(Complex64::from_polar(magnitude, 4.0 * params.mu * t))
}

fn powu_real(base: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(n) => base.powi(n),
        Err(_) => base.powf(n as f64),
    }
}

/// Largest bath for which the collective double sum is evaluated.
pub const DOUBLE_SUM_MAX_N: u32 = 60;

/// ρ14(t)/ρ14(0) for the Δz bath from the double sum over both baths'
/// collective bases,
///
/// Z⁻¹ Σ ν(N, j1) ν(N, j2) exp{2it[2μ + γ_s(m1 + m2)] − hβ(m1 − m2)}.
pub fn rho14_double_sum(params: &ModelParams, t: f64) -> Result<Complex64> {
    params.require_bath(BathType::DeltaZ, "rho14_double_sum")?;
    if params.n_bath > DOUBLE_SUM_MAX_N {
        return Err(Error::Precondition(format!(
            "rho14_double_sum supports N ≤ {DOUBLE_SUM_MAX_N}, got {}",
            params.n_bath
        )));
    }
    let n = params.n_bath;
    let hb = params.h_beta();
    let ln_z = ln_partition_function(params);
    let gs = params.coupling();
    let mu = params.mu;
    Ok(collective_trace(n, |_, m1| {
        let m1 = m1.to_f64();
        collective_trace(n, |_, m2| {
            let m2 = m2.to_f64();
            let phase = 2.0 * t * (2.0 * mu + gs * (m1 + m2));
            Complex64::from_polar((-hb * (m1 - m2) - ln_z).exp(), phase)
        })
    }))
}

/// ρ14(t)/ρ14(0) for the Σz bath:
/// e^{4iμt} [cos(γ_s t) − i sin(γ_s t) tanh(hβ/2)]^{2N}.
pub fn rho14_sigma_bath(params: &ModelParams, t: f64) -> Result<Complex64> {
    params.require_bath(BathType::SigmaZ, "rho14_sigma_bath")?;
    let x = params.coupling() * t;
    let base = Complex64::new(x.cos(), -x.sin() * (params.h_beta() / 2.0).tanh());
    let power = base.powu(2 * params.n_bath);
    Ok(power * Complex64::from_polar(1.0, 4.0 * params.mu * t))
}

/// ρ14(t)/ρ14(0) for whichever bath the parameters select.
pub fn outer_coherence_ratio(params: &ModelParams, t: f64) -> Result<Complex64> {
    match params.bath {
        BathType::DeltaZ => rho14_ratio(params, t),
        BathType::SigmaZ => rho14_sigma_bath(params, t),
    }
}

/// Returns (sin(tΩ)/Ω, cos(tΩ)) with the Ω → 0 limit (t, 1).
fn sinc_cos(omega: f64, t: f64) -> (f64, f64) {
    if omega == 0.0 {
        (t, 1.0)
    } else {
        ((t * omega).sin() / omega, (t * omega).cos())
    }
}

/// Elements (U22, U23, U33) of the XY-block propagator with Δz replaced by
/// its eigenvalue `d`, Ω = √(4λ² + γ_s² d²).
pub fn u2_elements(params: &ModelParams, d: f64, t: f64) -> (Complex64, Complex64, Complex64) {
    let a = params.coupling() * d;
    let b = 2.0 * params.lambda;
    let (s, c) = sinc_cos(a.hypot(b), t);
    let u22 = Complex64::new(c, a * s);
    let u23 = Complex64::new(0.0, -b * s);
    let u33 = Complex64::new(c, -a * s);
    (u22, u23, u33)
}

fn f_and_g_on(dist: &DeltaDistribution, params: &ModelParams, t: f64) -> (Complex64, f64) {
    let gs = params.coupling();
    let b = 2.0 * params.lambda;
    let mut f = Complex64::new(0.0, 0.0);
    let mut g = 0.0;
    for &(d, w) in dist.entries() {
        let a = gs * d.to_f64();
        let (s, c) = sinc_cos(a.hypot(b), t);
        g += w * 2.0 * b * a * s * s;
        f += w * Complex64::new(2.0 * a * a * s * s, -2.0 * a * s * c);
    }
    (f, g)
}

/// The thermal traces f(t) and g(t) that govern the XY block:
/// g = ⟨4λγ_s Δz sin²(tΩ)/Ω²⟩, f = ⟨2γ_s²Δz² sin²(tΩ)/Ω² − iγ_s Δz sin(2tΩ)/Ω⟩.
pub fn f_and_g(params: &ModelParams, t: f64) -> Result<(Complex64, f64)> {
    params.require_bath(BathType::DeltaZ, "f_and_g")?;
    let dist = delta_distribution(params)?;
    Ok(f_and_g_on(&dist, params, t))
}

/// Like [`f_and_g`] for a whole time grid, sharing one distribution.
pub fn f_and_g_series(params: &ModelParams, times: &[f64]) -> Result<Vec<(Complex64, f64)>> {
    params.require_bath(BathType::DeltaZ, "f_and_g")?;
    let dist = delta_distribution(params)?;
    Ok(times.iter().map(|&t| f_and_g_on(&dist, params, t)).collect())
}

/// Density-matrix element positions that may be nonzero for block-form states.
pub const BLOCK_PATTERN: [(usize, usize); 8] = [(0, 0), (0, 3), (3, 0), (3, 3), (1, 1), (1, 2), (2, 1), (2, 2)];

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;
const BLOCK_TOL: f64 = 1e-12;

/// Two-qubit density matrix in the basis {|−−⟩, |−+⟩, |+−⟩, |++⟩}.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<Complex64>,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self> {
        let state = TwoQubitState { rho };
        state.validate()?;
        Ok(state)
    }

    pub fn from_matrix_unchecked(rho: Matrix4<Complex64>) -> Self {
        TwoQubitState { rho }
    }

    /// |ψ⟩⟨ψ| for a normalized (or normalizable) amplitude vector.
    /// Validated state from row-major entries.
    pub fn from_rows(rows: [[Complex64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    pub fn from_pure(psi: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let rho = Matrix4::from_fn(|i, j| psi[i] * psi[j].conj() / (norm * norm));
        Ok(TwoQubitState { rho })
    }

    /// (|−−⟩ + |++⟩)/√2
    pub fn bell_outer() -> Self {
        Self::equal_pair(0, 3)
    }

    /// (|−+⟩ + |+−⟩)/√2
    pub fn bell_inner() -> Self {
        Self::equal_pair(1, 2)
    }

    /// (|a⟩ + |b⟩)/√2 with entries set to exactly 1/2.
    fn equal_pair(a: usize, b: usize) -> Self {
        let half = Complex64::new(0.5, 0.0);
        let mut m = Matrix4::zeros();
        for i in [a, b] {
            for j in [a, b] {
                m[(i, j)] = half;
            }
        }
        TwoQubitState { rho: m }
    }

    /// Projector onto basis state `index` (0 = |−−⟩ … 3 = |++⟩).
    pub fn basis(index: usize) -> Self {
        let rho = Matrix4::from_fn(|i, j| {
            if i == index && j == index {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        TwoQubitState { rho }
    }

    pub fn maximally_mixed() -> Self {
        TwoQubitState { rho: Matrix4::identity() * Complex64::new(0.25, 0.0) }
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    /// Element (i, j), 0-based.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rho[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} ≠ 1")));
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:.3e}")));
        }
        Ok(())
    }

    /// Largest magnitude outside [`BLOCK_PATTERN`].
    pub fn block_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if !BLOCK_PATTERN.contains(&(i, j)) {
                    worst = worst.max(self.rho[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn is_block_form(&self) -> bool {
        self.block_deviation() <= BLOCK_TOL
    }
}

/// Evolves a block-form two-qubit state.
///
/// The {|−−⟩, |++⟩} block keeps its populations and multiplies ρ14 by the
/// coherence ratio of the selected bath. The {|−+⟩, |+−⟩} block is
/// conjugated by the propagator for each Δz eigenvalue and averaged over the
/// thermal Δz distribution. δ and the bath Hamiltonian act as multiples of
/// the identity inside each block and drop out.
pub fn evolve(params: &ModelParams, rho0: &TwoQubitState, times: &[f64]) -> Result<Vec<TwoQubitState>> {
    params.validate()?;
    rho0.validate()?;
    if !rho0.is_block_form() {
        return Err(Error::NotBlockForm(rho0.block_deviation()));
    }
    let dist = delta_distribution(params)?;
    let r = rho0.matrix();
    let inner0 = Matrix2::new(r[(1, 1)], r[(1, 2)], r[(2, 1)], r[(2, 2)]);

    times
        .iter()
        .map(|&t| {
            let ratio = outer_coherence_ratio(params, t)?;
            let mut out = Matrix4::<Complex64>::zeros();
            out[(0, 0)] = r[(0, 0)];
            out[(3, 3)] = r[(3, 3)];
            out[(0, 3)] = r[(0, 3)] * ratio;
            out[(3, 0)] = out[(0, 3)].conj();

            let mut inner = Matrix2::<Complex64>::zeros();
            for &(d, w) in dist.entries() {
                if w == 0.0 {
                    continue;
                }
                let (u22, u23, u33) = u2_elements(params, d.to_f64(), t);
                let u = Matrix2::new(u22, u23, u23, u33);
                inner += (u * inner0 * u.adjoint()) * Complex64::new(w, 0.0);
            }
            out[(1, 1)] = inner[(0, 0)];
            out[(1, 2)] = inner[(0, 1)];
            out[(2, 1)] = inner[(1, 0)];
            out[(2, 2)] = inner[(1, 1)];
            Ok(TwoQubitState::from_matrix_unchecked(out))
        })
        .collect()
}

/// Wootters concurrence max{0, 2 max √λ_i − Σ √λ_i}, λ_i the eigenvalues of
/// ρ (σy⊗σy) ρ* (σy⊗σy).
///
/// For block-form (X) states the √λ_i are √(ρ11ρ44) ± |ρ14| and
/// √(ρ22ρ33) ± |ρ23|, used directly. Other states go through the Hermitian
/// matrix √ρ ρ̃ √ρ, which has the same spectrum.
pub fn concurrence(rho: &TwoQubitState) -> f64 {
    let roots: [f64; 4] = if rho.is_block_form() {
        let m = rho.matrix();
        let outer = (m[(0, 0)].re * m[(3, 3)].re).max(0.0).sqrt();
        let inner = (m[(1, 1)].re * m[(2, 2)].re).max(0.0).sqrt();
        let c14 = m[(0, 3)].norm();
        let c23 = m[(1, 2)].norm();
        [outer + c14, (outer - c14).abs(), inner + c23, (inner - c23).abs()]
    } else {
        wootters_roots(rho.matrix())
    };
    let max = roots.iter().copied().fold(0.0, f64::max);
    let sum: f64 = roots.iter().sum();
    (2.0 * max - sum).clamp(0.0, 1.0)
}

fn spin_flip() -> Matrix4<Complex64> {
    // σy ⊗ σy is real: −1 at the outer anti-diagonal corners, +1 on the inner pair.
    let mut yy = Matrix4::<Complex64>::zeros();
    yy[(0, 3)] = Complex64::new(-1.0, 0.0);
    yy[(3, 0)] = Complex64::new(-1.0, 0.0);
    yy[(1, 2)] = Complex64::new(1.0, 0.0);
    yy[(2, 1)] = Complex64::new(1.0, 0.0);
    yy
}

fn wootters_roots(rho: &Matrix4<Complex64>) -> [f64; 4] {
    let herm = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let sqrt_diag = Matrix4::from_diagonal(&eig.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0)));
    let sqrt_rho = eig.eigenvectors * sqrt_diag * eig.eigenvectors.adjoint();
    let yy = spin_flip();
    let tilde = yy * herm.map(|z| z.conj()) * yy;
    let m = sqrt_rho * tilde * sqrt_rho;
    let m = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let ev = m.symmetric_eigenvalues();
    [0, 1, 2, 3].map(|i| {
        let v = ev[i];
        if v < 0.0 && v > -POSITIVITY_TOL {
            0.0
        } else {
            v.max(0.0).sqrt()
        }
    })
}

/// Gaussian decoherence time cosh(hβ/2)/|γ| of |ρ14|; infinite when γ = 0 or
/// under γ/N scaling, where the coherence survives the N → ∞ limit.
pub fn decoherence_time(params: &ModelParams) -> f64 {
    if params.gamma == 0.0 {
        return f64::INFINITY;
    }
    match params.scaling {
        CouplingScaling::SqrtN => (params.h_beta() / 2.0).cosh() / params.gamma.abs(),
        CouplingScaling::LinearN => f64::INFINITY,
    }
}
