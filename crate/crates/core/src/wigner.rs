//! Exact Wigner 3j symbols and the two-part decomposition law for ν(N1+N2, J).
//!
//! Symbols are evaluated with the Racah single-sum formula over exact big
//! integers. A 3j value is always of the form `s √(p/q)` with rational `p/q`,
//! which [`RootRational`] stores exactly.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::collective::{allowed_j, m_values, multiplicity, BigCount};
use crate::error::{Error, Result};
use crate::halfint::{is_valid_pair, HalfInt};

/// Signed square root of a nonnegative rational: `sign · √radicand`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootRational {
    sign: i8,
    radicand: BigRational,
}

impl RootRational {
    pub fn zero() -> Self {
        RootRational { sign: 0, radicand: BigRational::zero() }
    }

    /// `sign · √radicand`. The sign is ignored (forced to 0) when the radicand is zero.
    pub fn new(sign: i8, radicand: BigRational) -> Result<Self> {
        if radicand.is_negative() {
            return Err(Error::Domain(format!("negative radicand {radicand}")));
        }
        if radicand.is_zero() || sign == 0 {
            return Ok(Self::zero());
        }
        Ok(RootRational { sign: sign.signum(), radicand })
    }

    /// Builds `√(p/q)` with the given sign; `q` must be nonzero.
    pub fn from_parts(sign: i8, p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        Self::new(sign, BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// The exact square `sign² · radicand`.
    pub fn square(&self) -> BigRational {
        self.radicand.clone()
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let r = self.radicand.to_f64().unwrap_or(f64::NAN);
        self.sign as f64 * r.sqrt()
    }
}

impl Default for RootRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for RootRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}√({})", if s < 0 { "-" } else { "" }, self.radicand),
        }
    }
}

impl Serialize for RootRational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Arguments of a 3j symbol `(j1 j2 j3; m1 m2 m3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ThreeJArgs {
    pub j1: HalfInt,
    pub j2: HalfInt,
    pub j3: HalfInt,
    pub m1: HalfInt,
    pub m2: HalfInt,
    pub m3: HalfInt,
}

impl ThreeJArgs {
    pub fn new(j1: HalfInt, j2: HalfInt, j3: HalfInt, m1: HalfInt, m2: HalfInt, m3: HalfInt) -> Self {
        ThreeJArgs { j1, j2, j3, m1, m2, m3 }
    }

    /// Convenience constructor from twice-values.
    pub fn from_twice(tj: [i64; 3], tm: [i64; 3]) -> Self {
        let h = HalfInt::from_twice;
        Self::new(h(tj[0]), h(tj[1]), h(tj[2]), h(tm[0]), h(tm[1]), h(tm[2]))
    }

    fn pairs(&self) -> [(HalfInt, HalfInt); 3] {
        [(self.j1, self.m1), (self.j2, self.m2), (self.j3, self.m3)]
    }

    pub fn triangle_ok(&self) -> bool {
        let (a, b, c) = (self.j1.twice(), self.j2.twice(), self.j3.twice());
        c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0
    }

    pub fn selection_ok(&self) -> bool {
        self.m1 + self.m2 + self.m3 == HalfInt::ZERO
            && self.pairs().iter().all(|&(j, m)| is_valid_pair(j, m))
            && self.triangle_ok()
    }
}

/// Memoized factorials, built once up to the cap and immutable afterwards.
struct FactorialTable {
    values: Vec<BigUint>,
}

const FACTORIAL_CAP: usize = 256;

impl FactorialTable {
    fn with_cap(cap: usize) -> Self {
        let mut values = Vec::with_capacity(cap + 1);
        values.push(BigUint::one());
        for k in 1..=cap {
            let next = &values[k - 1] * BigUint::from(k);
            values.push(next);
        }
        FactorialTable { values }
    }

    /// `n!` for `n ≥ 0`; `None` for negative `n` (treated as an infinite factorial).
    fn get(&self, n: i64) -> Option<BigInt> {
        if n < 0 {
            return None;
        }
        let n = n as usize;
        if let Some(v) = self.values.get(n) {
            return Some(BigInt::from(v.clone()));
        }
        let mut acc = self.values.last().cloned().unwrap_or_else(BigUint::one);
        for k in self.values.len()..=n {
            acc *= BigUint::from(k);
        }
        Some(BigInt::from(acc))
    }
}

fn factorials() -> &'static FactorialTable {
    static TABLE: OnceLock<FactorialTable> = OnceLock::new();
    TABLE.get_or_init(|| FactorialTable::with_cap(FACTORIAL_CAP))
}

/// Factorial of a half-integer combination that must be integral.
fn fact_twice(twice: i64) -> Option<BigInt> {
    debug_assert!(twice % 2 == 0);
    factorials().get(twice / 2)
}

fn check_pair(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice() < 0 || (j.twice() - m.twice()) % 2 != 0 {
        return Err(Error::InvalidQuantumNumber(format!("(j, m) = ({j}, {m})")));
    }
    Ok(())
}

/// Exact Wigner 3j symbol. Returns exact zero whenever a selection rule fails.
///
/// Malformed labels (negative `j`, or `j - m` not integral) are an error;
/// `|m| > j` is a legitimate vanishing symbol.
pub fn wigner3j(args: &ThreeJArgs) -> Result<RootRational> {
    for (j, m) in args.pairs() {
        check_pair(j, m)?;
    }
    if !args.selection_ok() {
        return Ok(RootRational::zero());
    }
    let [j1, j2, j3, m1, m2, m3] = [args.j1, args.j2, args.j3, args.m1, args.m2, args.m3].map(HalfInt::twice);

    // Squared prefactor: Δ(j1 j2 j3) · Π (j_i ± m_i)!
    let f = |t: i64| fact_twice(t).expect("selection rules guarantee nonnegative arguments");
    let triangle_num = f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3);
    let triangle_den = f(j1 + j2 + j3 + 2);
    let projections = f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3);
    let prefactor_sq = BigRational::new(triangle_num * projections, triangle_den);

    // Racah alternating sum; every term whose factorial arguments go negative
    // is zero, which bounds k on both sides.
    let k_min = [0, j2 - j3 - m1, j1 - j3 + m2].into_iter().max().unwrap() / 2;
    let k_max = [j1 + j2 - j3, j1 - m1, j2 + m2].into_iter().min().unwrap() / 2;
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let tk = 2 * k;
        let denominators = [tk, j3 - j2 + tk + m1, j3 - j1 + tk - m2, j1 + j2 - j3 - tk, j1 - tk - m1, j2 - tk + m2];
        let mut denom = BigInt::one();
        let mut infinite = false;
        for t in denominators {
            match fact_twice(t) {
                Some(v) => denom *= v,
                None => {
                    infinite = true;
                    break;
                }
            }
        }
        if infinite {
            continue;
        }
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(RootRational::zero());
    }

    let phase_exp = (j1 - j2 - m3) / 2;
    let phase: i8 = if phase_exp.rem_euclid(2) == 0 { 1 } else { -1 };
    let sum_sign: i8 = match sum.cmp(&BigRational::zero()) {
        Ordering::Less => -1,
        _ => 1,
    };
    let radicand = prefactor_sq * &sum * &sum;
    RootRational::new(phase * sum_sign, radicand)
}

/// Closed form of the `j3 = m3 = 0` symbol:
/// (-1)^{j1-m1} / √(2 j1 + 1) when `j1 = j2`, `m2 = -m1`; zero otherwise.
pub fn wigner3j_zero(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt) -> Result<RootRational> {
    check_pair(j1, m1)?;
    check_pair(j2, m2)?;
    if j1 != j2 || m2 != -m1 || m1.twice().abs() > j1.twice() {
        return Ok(RootRational::zero());
    }
    let exponent = (j1 - m1).as_integer().expect("j - m is integral for a valid pair");
    let sign = if exponent.rem_euclid(2) == 0 { 1 } else { -1 };
    RootRational::from_parts(sign, 1, (j1.twice() + 1) as u64)
}

fn biguint_to_rational(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

/// Right-hand side of the decomposition law
///
/// ν(N1+N2, J) = Σ_{j1 m1 j2 m2} ν(N1, j1) ν(N2, j2) (-1)^{2(j1-j2+J)} (2J+1)
///              × (j1 j2 J; m1 m2 -J)²,   with m1 + m2 = J,
///
/// evaluated in exact rational arithmetic.
pub fn decomposition_rhs(n1: u32, n2: u32, big_j: HalfInt) -> Result<BigRational> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Domain("bath sizes must be positive".into()));
    }
    if !allowed_j(n1 + n2).contains(&big_j) {
        return Err(Error::InvalidJ { n: n1 + n2, j: big_j });
    }
    let dim = BigRational::from_integer(BigInt::from(big_j.twice() + 1));
    let mut total = BigRational::zero();
    for j1 in allowed_j(n1) {
        let nu1 = biguint_to_rational(&multiplicity(n1, j1)?);
        for j2 in allowed_j(n2) {
            let nu2 = biguint_to_rational(&multiplicity(n2, j2)?);
            let phase_twice_exp = 2 * (j1.twice() - j2.twice() + big_j.twice());
            // (-1)^{2(j1 - j2 + J)} with 2(j1 - j2 + J) = phase_twice_exp / 2
            let positive = (phase_twice_exp / 2).rem_euclid(2) == 0;
            for m1 in m_values(j1) {
                let m2 = big_j - m1;
                if !is_valid_pair(j2, m2) {
                    continue;
                }
                let symbol = wigner3j(&ThreeJArgs::new(j1, j2, big_j, m1, m2, -big_j))?;
                if symbol.is_zero() {
                    continue;
                }
                let term = &nu1 * &nu2 * &dim * symbol.square();
                if positive {
                    total += term;
                } else {
                    total -= term;
                }
            }
        }
    }
    Ok(total)
}

/// Σ_j ν(N1, j) ν(N2, j) over the common range of j; equals ν(N1+N2, 0).
pub fn zero_j_sum(n1: u32, n2: u32) -> BigCount {
    let js2 = allowed_j(n2);
    allowed_j(n1)
        .into_iter()
        .filter(|j| js2.contains(j))
        .map(|j| multiplicity(n1, j).unwrap() * multiplicity(n2, j).unwrap())
        .sum()
}

/// The stretched-J identity: (-1)^{N1+N2} (N1+N2+1) Σ (-1)^{2(j1-j2)} ν ν
/// (j1 j2 J; m1 m2 -J)² at J = (N1+N2)/2. Equal to 1.
pub fn stretched_identity(n1: u32, n2: u32) -> Result<BigRational> {
    let top = HalfInt::from_twice((n1 + n2) as i64);
    let mut total = BigRational::zero();
    for j1 in allowed_j(n1) {
        let nu1 = biguint_to_rational(&multiplicity(n1, j1)?);
        for j2 in allowed_j(n2) {
            let nu2 = biguint_to_rational(&multiplicity(n2, j2)?);
            let positive = (j1.twice() - j2.twice()).rem_euclid(2) == 0;
            for m1 in m_values(j1) {
                let m2 = top - m1;
                if !is_valid_pair(j2, m2) {
                    continue;
                }
                let sq = wigner3j(&ThreeJArgs::new(j1, j2, top, m1, m2, -top))?.square();
                let term = &nu1 * &nu2 * sq;
                if positive {
                    total += term;
                } else {
                    total -= term;
                }
            }
        }
    }
    let sign = if (n1 + n2).is_multiple_of(2) { 1 } else { -1 };
    Ok(total * BigRational::from_integer(BigInt::from(sign * (n1 + n2 + 1) as i64)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionRow {
    pub j: HalfInt,
    #[serde(serialize_with = "crate::serialize_display")]
    pub rhs: BigRational,
    #[serde(serialize_with = "crate::serialize_biguint")]
    pub multiplicity: BigCount,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub n1: u32,
    pub n2: u32,
    pub rows: Vec<DecompositionRow>,
    /// Value of [`stretched_identity`] and whether it equals 1.
    #[serde(serialize_with = "crate::serialize_display")]
    pub stretched_value: BigRational,
    pub stretched_pass: bool,
    /// For even N1+N2: Σ_j ν(N1, j) ν(N2, j) and whether the J = 0 row equals it.
    #[serde(serialize_with = "crate::serialize_opt_biguint")]
    pub zero_j_sum: Option<BigCount>,
    pub zero_j_pass: Option<bool>,
}

impl DecompositionReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.stretched_pass && self.zero_j_pass.unwrap_or(true)
    }
}

/// Checks the decomposition law against ν(N1+N2, J) for every allowed J.
pub fn verify_decomposition(n1: u32, n2: u32) -> Result<DecompositionReport> {
    let n = n1 + n2;
    let mut rows = Vec::new();
    for j in allowed_j(n) {
        let rhs = decomposition_rhs(n1, n2, j)?;
        let nu = multiplicity(n, j)?;
        let pass = rhs.is_integer() && rhs == biguint_to_rational(&nu);
        rows.push(DecompositionRow { j, rhs, multiplicity: nu, pass });
    }
    let stretched_value = stretched_identity(n1, n2)?;
    let stretched_pass = stretched_value.is_one();
    let (zero_j_sum, zero_j_pass) = if n.is_multiple_of(2) {
        let s = zero_j_sum(n1, n2);
        let row_ok =
            rows.iter().find(|r| r.j == HalfInt::ZERO).map(|r| r.rhs == biguint_to_rational(&s)).unwrap_or(false);
        (Some(s), Some(row_ok))
    } else {
        (None, None)
    };
    Ok(DecompositionReport { n1, n2, rows, stretched_value, stretched_pass, zero_j_sum, zero_j_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    fn rr(sign: i8, p: u64, q: u64) -> RootRational {
        RootRational::from_parts(sign, p, q).unwrap()
    }

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn root_rational_invariants() {
        assert_eq!(RootRational::from_parts(1, 0, 5).unwrap().sign(), 0);
        assert!(RootRational::new(1, BigRational::new((-1).into(), 2.into())).is_err());
        let x = rr(-1, 1, 3);
        assert_eq!(x.square(), BigRational::new(1.into(), 3.into()));
        let expected = -(1.0f64 / 3.0).sqrt();
        assert!(((x.to_f64() - expected) / expected).abs() <= 1e-15);
        assert_eq!(x.to_string(), "-√(1/3)");
        assert_eq!(rr(1, 2, 4), rr(1, 1, 2));
    }

    #[test]
    fn zero_j_examples() {
        assert_eq!(wigner3j(&ThreeJArgs::from_twice([1, 1, 0], [1, -1, 0])).unwrap(), rr(1, 1, 2));
        assert_eq!(wigner3j(&ThreeJArgs::from_twice([2, 2, 0], [2, -2, 0])).unwrap(), rr(1, 1, 3));
        assert_eq!(wigner3j_zero(h(1), h(1), h(1), h(-1)).unwrap(), rr(1, 1, 2));
        assert_eq!(wigner3j_zero(h(2), h(0), h(2), h(0)).unwrap(), rr(-1, 1, 3));
        assert!(wigner3j_zero(h(2), h(2), h(1), h(-1)).unwrap().is_zero());
    }

    /// Clebsch–Gordan coefficients for two spin-1/2, built from the lowering
    /// operator acting on |1/2 1/2⟩|1/2 1/2⟩, converted to 3j via
    /// (j1 j2 J; m1 m2 -M) = (-1)^{j1-j2+M} ⟨j1 m1 j2 m2|J M⟩ / √(2J+1).
    #[test]
    fn two_spin_half_against_clebsch_gordan() {
        // triplet: |1,1⟩ = ↑↑, |1,0⟩ = (↑↓ + ↓↑)/√2, |1,-1⟩ = ↓↓ ; singlet (↑↓ - ↓↑)/√2
        // (j1 - j2 + M) = M for equal j's.
        // (2j, 2m, sign, p, q) for sign·√(p/q)
        type Case = ([i64; 3], [i64; 3], i8, u64, u64);
        let cases: [Case; 6] = [
            // 3j(1/2 1/2 1; 1/2 1/2 -1): CG = 1, M = 1 → (-1)^1 / √3
            ([1, 1, 2], [1, 1, -2], -1, 1, 3),
            // M = 0 triplet, CG = 1/√2 → +1/√6
            ([1, 1, 2], [1, -1, 0], 1, 1, 6),
            ([1, 1, 2], [-1, 1, 0], 1, 1, 6),
            // M = -1: CG = 1, (-1)^{-1} → -1/√3
            ([1, 1, 2], [-1, -1, 2], -1, 1, 3),
            // singlet, CG(↑↓) = +1/√2 → +1/√2 ; CG(↓↑) = -1/√2 → -1/√2
            ([1, 1, 0], [1, -1, 0], 1, 1, 2),
            ([1, 1, 0], [-1, 1, 0], -1, 1, 2),
        ];
        for (tj, tm, s, p, q) in cases {
            assert_eq!(wigner3j(&ThreeJArgs::from_twice(tj, tm)).unwrap(), rr(s, p, q), "{tj:?} {tm:?}");
        }
    }

    #[test]
    fn tabulated_values() {
        // (1 1 1; 1 -1 0) = 1/√6, (2 1 1; 0 0 0) = √(2/15), (3/2 1 1/2; 1/2 -1 1/2) = 1/√12 · ...
        assert_eq!(wigner3j(&ThreeJArgs::from_twice([2, 2, 2], [2, -2, 0])).unwrap(), rr(1, 1, 6));
        assert_eq!(wigner3j(&ThreeJArgs::from_twice([4, 2, 2], [0, 0, 0])).unwrap(), rr(1, 2, 15));
        assert!(wigner3j(&ThreeJArgs::from_twice([2, 2, 2], [0, 0, 0])).unwrap().is_zero());
        // (1 1 2; 1 1 -2) = 1/√5
        assert_eq!(wigner3j(&ThreeJArgs::from_twice([2, 2, 4], [2, 2, -4])).unwrap(), rr(1, 1, 5));
    }

    #[test]
    fn selection_rules_give_zero() {
        // m sum nonzero
        assert!(wigner3j(&ThreeJArgs::from_twice([2, 2, 2], [2, 0, 0])).unwrap().is_zero());
        // triangle failure
        assert!(wigner3j(&ThreeJArgs::from_twice([1, 1, 4], [1, 1, -2])).unwrap().is_zero());
        // |m| > j
        assert!(wigner3j(&ThreeJArgs::from_twice([2, 2, 0], [4, -4, 0])).unwrap().is_zero());
    }

    #[test]
    fn malformed_labels_are_errors() {
        assert!(wigner3j(&ThreeJArgs::from_twice([1, 1, 0], [0, 0, 0])).is_err());
        assert!(wigner3j(&ThreeJArgs::from_twice([-2, 2, 0], [0, 0, 0])).is_err());
        assert!(wigner3j_zero(h(2), h(1), h(2), h(-1)).is_err());
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(decomposition_rhs(1, 1, h(2)).unwrap(), int(1));
        assert_eq!(decomposition_rhs(1, 1, h(0)).unwrap(), int(1));
        assert_eq!(decomposition_rhs(2, 2, h(0)).unwrap(), int(2));
        assert!(decomposition_rhs(1, 1, h(1)).is_err());
    }

    #[test]
    fn verify_decomposition_examples() {
        let r = verify_decomposition(1, 1).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.rows.len(), 2);

        let r = verify_decomposition(2, 3).unwrap();
        assert!(r.all_pass());
        let values: Vec<u32> = r.rows.iter().map(|row| row.multiplicity.to_u32().unwrap()).collect();
        assert_eq!(values, vec![5, 4, 1]);
        assert_eq!(r.zero_j_sum, None);

        let r = verify_decomposition(4, 4).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.rows[0].rhs, int(14));
        assert_eq!(r.zero_j_sum, Some(BigUint::from(14u32)));
    }

    #[test]
    fn zero_matches_general_symbol() {
        for tj1 in 0..=7 {
            for tj2 in 0..=7 {
                for tm1 in (-tj1..=tj1).step_by(2) {
                    for tm2 in (-tj2..=tj2).step_by(2) {
                        let general = wigner3j(&ThreeJArgs::from_twice([tj1, tj2, 0], [tm1, tm2, 0])).unwrap();
                        let special = wigner3j_zero(h(tj1), h(tm1), h(tj2), h(tm2)).unwrap();
                        assert_eq!(general, special, "j1={tj1}/2 j2={tj2}/2 m1={tm1}/2 m2={tm2}/2");
                    }
                }
            }
        }
    }
}
