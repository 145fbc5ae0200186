//! Thermodynamic-limit (N → ∞) formulas.
//!
//! With γ/√N scaling, Δz/√(2N) becomes a Gaussian variable and f(t) turns into
//! an integral against e^{−u²}, evaluated here by Gauss–Hermite quadrature.
//! The long-time value of that integral has a closed form in the scaled
//! complementary error function.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::dynamics::{BathType, CouplingScaling, ModelParams};
use crate::error::{Error, Result};

/// exp{−γ²t²/cosh²(hβ/2)}, the N → ∞ envelope of |ρ14(t)/ρ14(0)|.
pub fn gaussian_envelope(params: &ModelParams, t: f64) -> Result<f64> {
    params.validate()?;
    if params.bath != BathType::DeltaZ || params.scaling != CouplingScaling::SqrtN {
        return Err(Error::Precondition("gaussian_envelope needs the Δz bath with γ/√N scaling".into()));
    }
    let ch = (params.h_beta() / 2.0).cosh();
    let x = params.gamma * t / ch;
    Ok((-x * x).exp())
}

/// N → ∞ limit of ρ14(t)/ρ14(0) for the Σz bath with γ/N scaling:
/// exp{it[4μ − 2γ tanh(hβ/2)]}. Unit magnitude: no decoherence.
pub fn coherent_phase(params: &ModelParams, t: f64) -> Result<Complex64> {
    params.validate()?;
    if params.bath != BathType::SigmaZ || params.scaling != CouplingScaling::LinearN {
        return Err(Error::Precondition("coherent_phase needs the Σz bath with γ/N scaling".into()));
    }
    let rate = 4.0 * params.mu - 2.0 * params.gamma * (params.h_beta() / 2.0).tanh();
    Ok(Complex64::from_polar(1.0, rate * t))
}

/// Gauss–Hermite nodes and weights for the weight e^{−u²} on ℝ.
#[derive(Debug, Clone)]
pub struct GaussHermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermiteRule {
    /// Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix with
    /// off-diagonal √(k/2); weights are √π times the squared first components
    /// of the normalized eigenvectors.
    pub fn compute(n: usize) -> Self {
        let mut diag = vec![0.0; n];
        let mut off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
        off.push(0.0);
        let mut first = vec![0.0; n];
        if n > 0 {
            first[0] = 1.0;
        }
        tridiagonal_ql(&mut diag, &mut off, &mut first);

        let mut pairs: Vec<(f64, f64)> = diag.into_iter().zip(first).map(|(x, z)| (x, PI.sqrt() * z * z)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // The rule is symmetric; average mirrored pairs to remove rounding asymmetry.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[i].1 + pairs[j].1);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        let (nodes, weights) = pairs.into_iter().unzip();
        GaussHermiteRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_i g(u_i) ≈ ∫ e^{−u²} g(u) du.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * g(u)).sum()
    }
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// `diag` is overwritten with eigenvalues, `off[i]` couples i and i+1 (the
/// last entry is ignored), and `first` carries the first row of the
/// accumulated eigenvector matrix.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) {
    let n = diag.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations <= 60, "tridiagonal QL failed to converge");

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let zf = first[i + 1];
                first[i + 1] = s * first[i] + c * zf;
                first[i] = c * first[i] - s * zf;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

/// Shared, immutable rule for `n` nodes.
pub fn gauss_hermite(n: usize) -> Arc<GaussHermiteRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermiteRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return Arc::clone(rule);
    }
    // computed outside the lock; a racing thread may build the same table
    let rule = Arc::new(GaussHermiteRule::compute(n));
    Arc::clone(cache.lock().unwrap().entry(n).or_insert(rule))
}

/// Smallest node count accepted by [`QuadratureSpec`].
pub const MIN_NODES: usize = 16;
/// Successive doublings must agree to this before a value is accepted.
pub const CONVERGENCE_TOL: f64 = 1e-9;
const MAX_NODES: usize = 1 << 16;

/// Starting node count for the Hermite-type rule (weight e^{−u²} on ℝ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    node_count: usize,
}

impl QuadratureSpec {
    pub fn new(node_count: usize) -> Result<Self> {
        if node_count < MIN_NODES {
            return Err(Error::Domain(format!("node_count must be ≥ {MIN_NODES}, got {node_count}")));
        }
        Ok(QuadratureSpec { node_count })
    }

    /// max(64, ⌈12(1 + |γ|t)⌉): more nodes as the integrand oscillates faster.
    pub fn for_time(gamma: f64, t: f64) -> Self {
        let scaled = (12.0 * (1.0 + (gamma * t).abs())).ceil();
        let n = if scaled.is_finite() { (scaled as usize).max(64) } else { MAX_NODES };
        QuadratureSpec { node_count: n.min(MAX_NODES) }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }
}

/// Result of a converged quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOutcome {
    pub value: f64,
    /// Node count of the accepted value.
    pub node_count: usize,
    /// |value(n) − value(n/2)| at acceptance.
    pub last_change: f64,
}

fn f_infinite_n_fixed(lambda: f64, gamma: f64, t: f64, n: usize) -> f64 {
    let rule = gauss_hermite(n);
    let four_lambda_sq = 4.0 * lambda * lambda;
    let gamma_sq = gamma * gamma;
    let integral = rule.integrate(|u| {
        let omega = (four_lambda_sq + gamma_sq * u * u).sqrt();
        let sinc = if omega == 0.0 { t } else { (t * omega).sin() / omega };
        u * u * sinc * sinc
    });
    2.0 * gamma_sq / PI.sqrt() * integral
}

/// f(t) at infinite temperature in the N → ∞ limit,
///
/// 4γ²√(2/π) ∫ x² e^{−2x²} sin²(t√(4λ² + 2γ²x²)) / (4λ² + 2γ²x²) dx,
///
/// rewritten with u = √2 x as (2γ²/√π) ∫ e^{−u²} u² sin²(tΩ)/Ω² du,
/// Ω² = 4λ² + γ²u². The node count is doubled from `quad` until successive
/// values agree to [`CONVERGENCE_TOL`].
pub fn f_infinite_n_detailed(lambda: f64, gamma: f64, t: f64, quad: QuadratureSpec) -> Result<QuadratureOutcome> {
    if !(lambda.is_finite() && gamma.is_finite() && t.is_finite()) {
        return Err(Error::Domain("non-finite argument to f_infinite_n".into()));
    }
    if gamma == 0.0 || t == 0.0 {
        return Ok(QuadratureOutcome { value: 0.0, node_count: quad.node_count, last_change: 0.0 });
    }
    let mut n = quad.node_count;
    let mut prev = f_infinite_n_fixed(lambda, gamma, t, n);
    while n < MAX_NODES {
        n *= 2;
        let value = f_infinite_n_fixed(lambda, gamma, t, n);
        let change = (value - prev).abs();
        if change <= CONVERGENCE_TOL {
            return Ok(QuadratureOutcome { value, node_count: n, last_change: change });
        }
        prev = value;
    }
    Err(Error::Numerical(format!("f_infinite_n did not converge by {n} nodes at t = {t}")))
}

pub fn f_infinite_n(lambda: f64, gamma: f64, t: f64, quad: QuadratureSpec) -> Result<f64> {
    f_infinite_n_detailed(lambda, gamma, t, quad).map(|o| o.value)
}

/// C(∞) = 2√π (λ/γ) e^{4λ²/γ²} erfc(2λ/γ), evaluated as √π x erfcx(x),
/// x = 2|λ|/|γ|.
pub fn c_infinity(lambda: f64, gamma: f64) -> Result<f64> {
    if gamma == 0.0 || !gamma.is_finite() || !lambda.is_finite() {
        return Err(Error::Domain(format!("c_infinity needs finite nonzero γ, got γ = {gamma}")));
    }
    let x = 2.0 * lambda.abs() / gamma.abs();
    Ok((PI.sqrt() * x * erfcx(x)).clamp(0.0, 1.0))
}

/// lim_{t→∞} f(t) = 1 − C(∞).
pub fn f_asymptote(lambda: f64, gamma: f64) -> Result<f64> {
    c_infinity(lambda, gamma).map(|c| 1.0 - c)
}

const SERIES_CUTOFF: f64 = 2.0;

/// Scaled complementary error function e^{x²} erfc(x).
///
/// For 0 ≤ x < 2 it uses e^{x²} − (2/√π) Σ_n 2ⁿ x^{2n+1}/(2n+1)!!, whose terms
/// are all positive; beyond that the Laplace continued fraction
/// erfcx(x) = (1/√π) / (x + (1/2)/(x + 1/(x + (3/2)/(x + …)))) via modified
/// Lentz. Negative arguments use erfcx(−x) = 2e^{x²} − erfcx(x).
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < SERIES_CUTOFF {
        erfcx_series(x)
    } else {
        erfcx_continued_fraction(x)
    }
}

fn erfcx_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > 1e-17 * sum {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
    }
    x2.exp() - 2.0 / PI.sqrt() * sum
}

fn erfcx_continued_fraction(x: f64) -> f64 {
    if x > 1e8 {
        // tail terms of the fraction are below rounding
        return 1.0 / (PI.sqrt() * x);
    }
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..10_000 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (PI.sqrt() * f)
}
