//! Permutation-group kernels for deciding and certifying factorizations `G = HK`.
//!
//! Conventions used throughout the crate:
//!
//! * points are 0-based internally and 1-based in cycle notation;
//! * products apply the left operand first, so `compose(p, q)` maps `i` to `q(p(i))`
//!   and groups act on the right (`K x` is a right coset);
//! * all group orders are exact [`BigCount`]s.

pub mod catalog;
pub mod chain;
mod error;
pub mod factorize;
pub mod gf;
pub mod perm;
pub mod recognize;
pub mod report;

pub use chain::StabilizerChain;
pub use error::{Error, Result};
pub use perm::Permutation;

/// Exact non-negative integer used for every order and index.
pub type BigCount = num_bigint::BigUint;

/// Serde helpers writing [`BigCount`] as a decimal string.
pub mod decimal {
    use super::BigCount;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigCount, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigCount, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("not a decimal integer: {s:?}")))
    }

    pub mod option {
        use super::BigCount;
        use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(x: &Option<BigCount>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(x) => s.serialize_some(&x.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigCount>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| s.parse().map_err(|_| D::Error::custom(format!("not a decimal integer: {s:?}"))))
                .transpose()
        }
    }
}
