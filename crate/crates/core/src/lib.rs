//! Collective-spin trace machinery and exact dynamics of two qubits coupled
//! to separate spin baths.
//!
//! - [`collective`]: binomials, multiplicities ν(N, j), collective traces.
//! - [`wigner`]: exact 3j symbols and the two-part multiplicity decomposition.
//! - [`dynamics`]: finite-N evolution of the two-qubit density matrix.
//! - [`limits`]: thermodynamic-limit formulas and their quadratures.
//! - [`oracle`]: brute-force full-Hilbert-space evolution used as ground truth.
//! - [`series`]: tabular output and figure data.

pub mod collective;
pub mod dynamics;
pub mod error;
pub mod halfint;
pub mod limits;
pub mod oracle;
pub mod series;
pub mod wigner;

pub use error::{Error, Result};
pub use halfint::HalfInt;

use num_bigint::BigUint;

pub(crate) fn serialize_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub(crate) fn serialize_opt_biguint<S: serde::Serializer>(
    v: &Option<BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

pub(crate) fn serialize_display<T: std::fmt::Display, S: serde::Serializer>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}
