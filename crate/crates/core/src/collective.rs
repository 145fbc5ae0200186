//! Exact combinatorics of N spin-1/2 particles: binomials, the multiplicity
//! ν(N, j) of each total-spin block, traces over the collective basis and the
//! sum identities that ν satisfies.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::halfint::HalfInt;

/// A state count. Always exact.
pub type BigCount = BigUint;

/// Default number of memoized Pascal rows.
pub const DEFAULT_PASCAL_CAP: usize = 512;

/// Pascal's triangle, built once up to `cap` rows and immutable afterwards.
/// Requests beyond the cap are computed directly and not stored.
#[derive(Debug, Clone)]
pub struct PascalTable {
    rows: Vec<Vec<BigUint>>,
}

impl PascalTable {
    pub fn with_cap(cap: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(cap + 1);
        rows.push(vec![BigUint::one()]);
        for n in 1..=cap {
            let prev = &rows[n - 1];
            // Only the left half is stored; C(n, k) = C(n, n - k).
            let half = n / 2;
            let mut row = Vec::with_capacity(half + 1);
            for k in 0..=half {
                let left = if k == 0 { BigUint::zero() } else { sym_get(prev, n - 1, k - 1).clone() };
                row.push(left + sym_get(prev, n - 1, k));
            }
            rows.push(row);
        }
        PascalTable { rows }
    }

    pub fn cap(&self) -> usize {
        self.rows.len() - 1
    }

    /// C(n, k), zero when `k < 0` or `k > n`.
    pub fn binomial(&self, n: u64, k: i64) -> BigUint {
        if k < 0 || k as u64 > n {
            return BigUint::zero();
        }
        let k = k as u64;
        if (n as usize) <= self.cap() {
            return sym_get(&self.rows[n as usize], n as usize, k as usize).clone();
        }
        binomial_direct(n, k)
    }
}

fn sym_get(row: &[BigUint], n: usize, k: usize) -> &BigUint {
    &row[k.min(n - k)]
}

fn binomial_direct(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn default_table() -> &'static PascalTable {
    static TABLE: OnceLock<PascalTable> = OnceLock::new();
    TABLE.get_or_init(|| PascalTable::with_cap(DEFAULT_PASCAL_CAP))
}

/// Binomial coefficient C(n, k); zero outside `0 ≤ k ≤ n`.
pub fn binomial(n: u64, k: i64) -> BigCount {
    default_table().binomial(n, k)
}

/// `N/2 - j` as an integer, or an error if `j` is not an allowed total spin.
fn lowering_steps(n: u32, j: HalfInt) -> Result<i64> {
    let diff = n as i64 - j.twice();
    if j.twice() < 0 || diff < 0 || diff % 2 != 0 {
        return Err(Error::InvalidJ { n, j });
    }
    Ok(diff / 2)
}

/// Number of spin-`j` blocks in the N-fold product of spin-1/2 spaces:
/// ν(N, j) = C(N, N/2 - j) - C(N, N/2 - j - 1).
pub fn multiplicity(n: u32, j: HalfInt) -> Result<BigCount> {
    if n == 0 {
        return Err(Error::InvalidJ { n, j });
    }
    let k = lowering_steps(n, j)?;
    let n64 = n as u64;
    Ok(binomial(n64, k) - binomial(n64, k - 1))
}

/// κ, κ+1, …, N/2 with κ = 0 for even N and 1/2 for odd N.
pub fn allowed_j(n: u32) -> Vec<HalfInt> {
    let top = n as i64;
    (top % 2..=top).step_by(2).map(HalfInt::from_twice).collect()
}

/// m = -j, -j+1, …, j.
pub fn m_values(j: HalfInt) -> impl Iterator<Item = HalfInt> {
    (-j.twice()..=j.twice()).step_by(2).map(HalfInt::from_twice)
}

/// Compensated (Kahan) accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: Complex64,
    carry: Complex64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: Complex64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> Complex64 {
        self.sum
    }
}

impl FromIterator<Complex64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Trace of an operator that is diagonal in the collective |j, m⟩ basis:
/// Σ_j ν(N, j) Σ_m G(j, m).
pub fn collective_trace<G>(n: u32, mut g: G) -> Complex64
where
    G: FnMut(HalfInt, HalfInt) -> Complex64,
{
    let mut acc = KahanSum::new();
    for j in allowed_j(n) {
        let nu = multiplicity(n, j).expect("allowed_j yields valid j").to_f64().unwrap_or(f64::INFINITY);
        for m in m_values(j) {
            acc.add(g(j, m) * nu);
        }
    }
    acc.value()
}

/// Trace of a function of J_z over the 2^N product basis:
/// Σ_k C(N, k) g(k - N/2).
pub fn computational_trace<G>(n: u32, mut g: G) -> Complex64
where
    G: FnMut(HalfInt) -> Complex64,
{
    let mut acc = KahanSum::new();
    for k in 0..=n as i64 {
        let weight = binomial(n as u64, k).to_f64().unwrap_or(f64::INFINITY);
        let m = HalfInt::from_twice(2 * k - n as i64);
        acc.add(g(m) * weight);
    }
    acc.value()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    #[serde(serialize_with = "crate::serialize_biguint")]
    pub lhs: BigCount,
    #[serde(serialize_with = "crate::serialize_biguint")]
    pub rhs: BigCount,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &'static str, lhs: BigCount, rhs: BigCount) -> Self {
        let pass = lhs == rhs;
        IdentityCheck { name, lhs, rhs, pass }
    }
}

/// The four multiplicity identities, evaluated exactly for one N.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub n: u32,
    /// Σ_J ν(N, J) = C(N, N/2 - κ)
    pub block_count: IdentityCheck,
    /// Σ_J (2J + 1) ν(N, J) = 2^N
    pub dimension: IdentityCheck,
    /// Σ_j ν(N, j)² = (2N)! / ((N + 1)(N!)²)
    pub sum_of_squares: IdentityCheck,
    /// Every ν(N, j) is positive (lhs = number of positive ν, rhs = number of j).
    pub positivity: IdentityCheck,
}

impl IdentityReport {
    pub fn checks(&self) -> [&IdentityCheck; 4] {
        [&self.block_count, &self.dimension, &self.sum_of_squares, &self.positivity]
    }

    pub fn all_pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn identity_report(n: u32) -> Result<IdentityReport> {
    if n == 0 {
        return Err(Error::Domain("identity_report needs N ≥ 1".into()));
    }
    let js = allowed_j(n);
    let nus: Vec<BigCount> = js.iter().map(|&j| multiplicity(n, j)).collect::<Result<_>>()?;

    let kappa_twice = (n % 2) as i64;
    let block_lhs: BigCount = nus.iter().sum();
    let block_rhs = binomial(n as u64, (n as i64 - kappa_twice) / 2);

    let dim_lhs: BigCount = js.iter().zip(&nus).map(|(j, nu)| nu * BigUint::from((j.twice() + 1) as u64)).sum();
    let dim_rhs = BigUint::one() << n as usize;

    let sq_lhs: BigCount = nus.iter().map(|nu| nu * nu).sum();
    let n_fact = factorial(n as u64);
    let denom = BigUint::from(n as u64 + 1) * &n_fact * &n_fact;
    let (sq_rhs, rem) = factorial(2 * n as u64).div_rem(&denom);
    if !rem.is_zero() {
        return Err(Error::Numerical(format!("(2N)!/((N+1)(N!)^2) not integral for N = {n}")));
    }

    let positive = nus.iter().filter(|nu| !nu.is_zero()).count();

    Ok(IdentityReport {
        n,
        block_count: IdentityCheck::new("sum of multiplicities", block_lhs, block_rhs),
        dimension: IdentityCheck::new("sum of block dimensions", dim_lhs, dim_rhs),
        sum_of_squares: IdentityCheck::new("sum of squared multiplicities", sq_lhs, sq_rhs),
        positivity: IdentityCheck::new("all multiplicities positive", BigUint::from(positive), BigUint::from(js.len())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(4, -1), BigUint::zero());
        assert_eq!(binomial(4, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
    }

    #[test]
    fn binomial_60_30_against_pascal_recurrence() {
        // independent u128 Pascal recurrence
        let mut row = vec![1u128];
        for _ in 0..60 {
            let mut next = vec![1u128; row.len() + 1];
            for k in 1..row.len() {
                next[k] = row[k - 1] + row[k];
            }
            row = next;
        }
        assert_eq!(row[30], 118_264_581_564_861_424);
        assert_eq!(binomial(60, 30), BigUint::from(row[30]));
        assert_eq!(binomial(60, 30).to_string().len(), 18);
    }

    #[test]
    fn beyond_cap_matches_table() {
        let small = PascalTable::with_cap(10);
        let big = PascalTable::with_cap(40);
        for n in 0..=40u64 {
            for k in -1..=(n as i64 + 1) {
                assert_eq!(small.binomial(n, k), big.binomial(n, k), "C({n},{k})");
            }
        }
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(1, h(1)).unwrap(), BigUint::from(1u32));
        assert_eq!(multiplicity(4, h(2)).unwrap(), BigUint::from(3u32));
        assert_eq!(multiplicity(4, h(0)).unwrap(), BigUint::from(2u32));
        assert_eq!(multiplicity(4, h(4)).unwrap(), BigUint::from(1u32));
        assert_eq!(multiplicity(3, h(1)).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn multiplicity_rejects_invalid_j() {
        assert!(matches!(multiplicity(4, h(1)), Err(Error::InvalidJ { .. })));
        assert!(matches!(multiplicity(3, h(5)), Err(Error::InvalidJ { .. })));
        assert!(matches!(multiplicity(3, h(-1)), Err(Error::InvalidJ { .. })));
        assert!(multiplicity(0, h(0)).is_err());
    }

    #[test]
    fn allowed_j_examples() {
        assert_eq!(allowed_j(2), vec![h(0), h(2)]);
        assert_eq!(allowed_j(3), vec![h(1), h(3)]);
        assert_eq!(allowed_j(5), vec![h(1), h(3), h(5)]);
    }

    #[test]
    fn multiplicity_matches_bratteli_paths() {
        // ν(N, j) = ν(N-1, j-1/2) + ν(N-1, j+1/2), built as its own table of
        // path counts indexed by twice_j.
        let mut paths: Vec<u128> = vec![0, 1]; // N = 1: one path to j = 1/2
        for n in 1..=60u32 {
            for (tj, &count) in paths.iter().enumerate() {
                let expected = multiplicity(n, h(tj as i64));
                if (n as usize + tj).is_multiple_of(2) {
                    assert_eq!(expected.unwrap(), BigUint::from(count), "N={n} 2j={tj}");
                } else {
                    assert_eq!(count, 0);
                }
            }
            let mut next = vec![0u128; paths.len() + 1];
            for (tj, &count) in paths.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                next[tj + 1] += count;
                if tj > 0 {
                    next[tj - 1] += count;
                }
            }
            paths = next;
        }
    }

    #[test]
    fn stretched_multiplicity_is_one() {
        for n in 1..=200 {
            assert_eq!(multiplicity(n, h(n as i64)).unwrap(), BigUint::one());
        }
    }

    #[test]
    fn trace_examples() {
        assert_eq!(collective_trace(2, |_, _| c(1.0)), c(4.0));
        assert_eq!(collective_trace(3, |_, m| c(m.to_f64())), c(0.0));
        assert_eq!(collective_trace(4, |_, m| c(m.to_f64().powi(2))), c(16.0));
        assert_eq!(computational_trace(2, |_| c(1.0)), c(4.0));
        assert_eq!(computational_trace(2, |m| c(m.to_f64().powi(2))), c(2.0));
        assert_eq!(computational_trace(4, |m| c(m.to_f64().powi(2))), c(16.0));
    }

    #[test]
    fn computational_trace_matches_basis_enumeration() {
        for n in 1..=10u32 {
            let brute: f64 = (0u32..1 << n)
                .map(|bits| {
                    let m = bits.count_ones() as f64 - n as f64 / 2.0;
                    m.powi(4) - 0.5 * m
                })
                .sum();
            let got = computational_trace(n, |m| c(m.to_f64().powi(4) - 0.5 * m.to_f64()));
            assert!((got.re - brute).abs() <= 1e-12 * brute.abs().max(1.0));
        }
    }

    #[test]
    fn identity_examples() {
        let r4 = identity_report(4).unwrap();
        assert!(r4.all_pass());
        assert_eq!(r4.block_count.lhs, BigUint::from(6u32));
        assert_eq!(r4.dimension.lhs, BigUint::from(16u32));
        assert_eq!(r4.sum_of_squares.lhs, BigUint::from(14u32));
        let r3 = identity_report(3).unwrap();
        assert!(r3.all_pass());
        assert_eq!(r3.block_count.rhs, BigUint::from(3u32));
        assert_eq!(r3.dimension.rhs, BigUint::from(8u32));
    }

    #[test]
    fn identity_report_1_to_60() {
        for n in 1..=60 {
            assert!(identity_report(n).unwrap().all_pass(), "N = {n}");
        }
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(c(1.0));
        for _ in 0..1000 {
            acc.add(c(1e-16));
        }
        assert!((acc.value().re - (1.0 + 1e-13)).abs() < 1e-16);
    }

    proptest! {
        #[test]
        fn traces_agree_on_polynomials(
            n in 1u32..=30,
            coeffs in proptest::collection::vec(-3.0f64..3.0, 7),
        ) {
            let poly = |m: HalfInt| {
                let x = m.to_f64();
                c(coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a))
            };
            let a = collective_trace(n, |_, m| poly(m));
            let b = computational_trace(n, poly);
            let scale: f64 = computational_trace(n, |m| {
                let x = m.to_f64().abs();
                c(coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a.abs()))
            }).re;
            prop_assert!((a - b).norm() <= 1e-12 * scale.max(1.0));
        }
    }
}
