//! Exact computation of stable commutator length (scl) on free groups and on
//! the rational-power fragment of free A-groups, for subgroups A of the
//! rationals.
//!
//! Everything is carried out in exact rational arithmetic. The numerical core
//! is an exact simplex solver ([`ratlp`]); scl on a free group is the optimal
//! value of a linear program over surface pieces ([`scl`]); lower bounds come
//! from Brooks counting quasimorphisms via Bavard duality ([`qm`]); rational
//! powers, rational extensions of free groups, completion towers and the
//! non-orientable surface group embeddings live in [`completions`].

pub mod chains;
pub mod completions;
pub mod qm;
pub mod ratlp;
pub mod scl;
pub mod wordmaps;
pub mod words;

#[cfg(test)]
pub(crate) mod testutil;

use num_bigint::BigInt;
pub use num_rational::BigRational as Rat;

/// Build a rational from an integer pair. Handy in tests and table code.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse a rational written as `p` or `p/q` (lowest terms not required).
pub fn parse_rational(text: &str) -> Result<Rat, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty rational".to_string());
    }
    s.parse::<Rat>().map_err(|e| format!("bad rational `{s}`: {e}"))
}
