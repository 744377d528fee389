//! Shared generators for the module test suites.

use rand::rngs::StdRng;
use rand::Rng;

use crate::chains::{Chain, HChain};
use crate::words::{Alphabet, Letter, Word};
use crate::{rat, Rat};

pub(crate) fn random_reduced_word(alphabet: &Alphabet, len: usize, rng: &mut StdRng) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let g = alphabet.gens()[rng.random_range(0..alphabet.len())];
        let l = Letter::new(g, rng.random_bool(0.5));
        if letters.last().is_some_and(|last| *last == l.inverse()) {
            continue;
        }
        letters.push(l);
    }
    Word::from_letters(letters)
}

/// A nonempty cyclically reduced word with zero exponent sums.
pub(crate) fn random_commutator_subgroup_word(
    alphabet: &Alphabet,
    max_len: usize,
    rng: &mut StdRng,
) -> Word {
    loop {
        let len = 2 * rng.random_range(1..=max_len.max(2) / 2);
        let w = random_reduced_word(alphabet, len, rng);
        let (c, _) = w.cyclic_reduce();
        if c.is_empty() {
            continue;
        }
        let word = c.to_word();
        if word.exponent_sums().is_empty() {
            return word;
        }
    }
}

/// A boundary chain: a few random terms plus single-generator corrections
/// that kill the homology class.
pub(crate) fn random_boundary_chain(
    alphabet: &Alphabet,
    max_terms: usize,
    max_len: usize,
    rng: &mut StdRng,
) -> HChain {
    let coeffs = [rat(1, 1), rat(-1, 1), rat(2, 1), rat(1, 2), rat(-1, 2), rat(1, 3)];
    loop {
        let mut chain = Chain::zero();
        for _ in 0..rng.random_range(1..=max_terms.saturating_sub(alphabet.len()).max(1)) {
            let w = random_reduced_word(alphabet, rng.random_range(1..=max_len), rng);
            let q = coeffs[rng.random_range(0..coeffs.len())].clone();
            chain.add_term(&w, &q);
        }
        let h = chain.normalize();
        let class = h.homology_class(alphabet);
        for (idx, g) in alphabet.gens().iter().enumerate() {
            let excess: Rat = class[idx].clone();
            chain.add_term(&Word::generator(*g), &-excess);
        }
        let h = chain.normalize();
        debug_assert!(h.is_boundary());
        if !h.is_zero() {
            return h;
        }
    }
}
