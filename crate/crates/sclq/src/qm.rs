//! Brooks counting quasimorphisms with certified defect bounds.
//!
//! For a reduced nonempty word `u`, the counting function sends a reduced
//! word `w` to the number of (overlapping) occurrences of `u` in `w` minus
//! the occurrences of `u^-1`. Its homogenization is computed exactly as
//! occurrences per period in the bi-infinite periodic word of the cyclic
//! reduction. Pairing the homogenization against chains gives certified
//! lower bounds for scl: `scl(c) >= phi(c) / (2 D(phi))`.
//!
//! The shipped defect bound is `D <= 6(|u| - 1)`: the raw counting function
//! has defect at most `3(|u| - 1)` (at most `|u| - 1` signed occurrences
//! cross each of the three junctions of the tripod cancellation `g h`, while
//! occurrences inside the cancelled segment cancel between `u` and `u^-1`),
//! and homogenizing at most doubles the defect. The proof is written out in
//! `docs/counting_defect.md`.

use num_traits::Zero;
use thiserror::Error;

use crate::chains::HChain;
use crate::completions::FragmentElement;
use crate::words::{CyclicWord, Letter, Word};
use crate::{rat, Rat};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum QmError {
    #[error("a counting quasimorphism needs a nonempty base word")]
    EmptyBaseWord,
    #[error("single letters are homomorphisms: the Bavard bound needs positive defect")]
    ZeroDefect,
    #[error("chain is not a boundary; homomorphisms do not vanish on it")]
    NonBoundaryChain,
}

/// Counting quasimorphism datum: occurrences of `u` minus occurrences of `u^-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingQm {
    base: Word,
}

/// Certified upper bound for the defect of the homogenized counting function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectBound(pub Rat);

impl CountingQm {
    pub fn new(base: Word) -> Result<CountingQm, QmError> {
        if base.is_identity() {
            return Err(QmError::EmptyBaseWord);
        }
        Ok(CountingQm { base })
    }

    pub fn base(&self) -> &Word {
        &self.base
    }

    /// Raw signed count of occurrences in a reduced word (overlapping).
    pub fn evaluate(&self, w: &Word) -> i64 {
        count_occurrences(w.letters(), self.base.letters())
            - count_occurrences(w.letters(), self.base.inverse().letters())
    }

    /// Exact homogenization `lim evaluate(w^n)/n`: occurrences per period in
    /// the periodic word of the cyclic reduction, seam crossings included
    /// once per period.
    pub fn homogenized_value(&self, w: &Word) -> Rat {
        let (cyc, _) = w.cyclic_reduce();
        self.homogenized_on_cyclic(&cyc)
    }

    pub fn homogenized_on_cyclic(&self, cyc: &CyclicWord) -> Rat {
        let plus = count_periodic(cyc.letters(), self.base.letters());
        let minus = count_periodic(cyc.letters(), self.base.inverse().letters());
        rat(plus - minus, 1)
    }

    /// Pairing with a normalized chain; depends only on the homogenized class.
    pub fn evaluate_chain(&self, h: &HChain) -> Rat {
        let mut total = Rat::zero();
        for (cyc, coeff) in h.terms() {
            total += coeff * self.homogenized_on_cyclic(cyc);
        }
        total
    }

    /// `6(|u| - 1)`; zero exactly for single letters, which are homomorphisms.
    pub fn defect_bound(&self) -> DefectBound {
        DefectBound(rat(6 * (self.base.len() as i64 - 1), 1))
    }

    /// Extension to rational powers by homogeneity: `phi(g^q) = q phi(g)`.
    pub fn extend_to_fragment(&self, e: &FragmentElement) -> Rat {
        match e.base() {
            None => Rat::zero(),
            Some(base) => e.exponent() * self.homogenized_value(base),
        }
    }
}

/// Bavard-duality lower bound `phi(h) / (2 D(phi))` for `scl(h)`.
pub fn bavard_lower_bound(q: &CountingQm, h: &HChain) -> Result<Rat, QmError> {
    if !h.is_boundary() {
        return Err(QmError::NonBoundaryChain);
    }
    let DefectBound(d) = q.defect_bound();
    if d.is_zero() {
        return Err(QmError::ZeroDefect);
    }
    Ok(q.evaluate_chain(h) / (Rat::from_integer(2.into()) * d))
}

/// Rank over the rationals of the evaluation matrix `family x chains`; a
/// lower bound for the dimension of quasimorphisms modulo homomorphisms,
/// because homomorphisms vanish on boundary chains.
pub fn independence_rank(family: &[CountingQm], chains: &[HChain]) -> Result<usize, QmError> {
    for h in chains {
        if !h.is_boundary() {
            return Err(QmError::NonBoundaryChain);
        }
    }
    let mut matrix: Vec<Vec<Rat>> = family
        .iter()
        .map(|q| chains.iter().map(|h| q.evaluate_chain(h)).collect())
        .collect();
    Ok(rank(&mut matrix))
}

fn rank(matrix: &mut [Vec<Rat>]) -> usize {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|r| !matrix[*r][col].is_zero()) else { continue };
        matrix.swap(rank, pivot);
        let scale = matrix[rank][col].clone();
        for c in col..cols {
            matrix[rank][c] = &matrix[rank][c] / &scale;
        }
        for r in 0..rows {
            if r == rank || matrix[r][col].is_zero() {
                continue;
            }
            let factor = matrix[r][col].clone();
            for c in col..cols {
                let delta = &factor * &matrix[rank][c];
                matrix[r][c] -= delta;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Occurrences of `pattern` in the fixed word `text` (overlapping).
fn count_occurrences(text: &[Letter], pattern: &[Letter]) -> i64 {
    if pattern.is_empty() || pattern.len() > text.len() {
        return 0;
    }
    let mut count = 0;
    for start in 0..=(text.len() - pattern.len()) {
        if text[start..start + pattern.len()] == *pattern {
            count += 1;
        }
    }
    count
}

/// Occurrence starts per period of the bi-infinite periodic word with the
/// given period letters.
fn count_periodic(period: &[Letter], pattern: &[Letter]) -> i64 {
    let n = period.len();
    if n == 0 || pattern.is_empty() {
        return 0;
    }
    let mut count = 0;
    for start in 0..n {
        if pattern.iter().enumerate().all(|(j, l)| period[(start + j) % n] == *l) {
            count += 1;
        }
    }
    count
}

/// The family `u_k = a b^k a`, whose evaluation matrix against
/// [`standard_demo_chains`] is the identity.
pub fn standard_demo_family(size: usize) -> Vec<CountingQm> {
    let a = Word::from_letters([letter('a', false)]);
    let b = Word::from_letters([letter('b', false)]);
    (1..=size)
        .map(|k| CountingQm::new(a.mul(&b.pow(k as i64)).mul(&a)).expect("nonempty"))
        .collect()
}

/// Boundary chains `c_j = (a b^j a) - 2a - j b`.
pub fn standard_demo_chains(size: usize) -> Vec<HChain> {
    let a = Word::from_letters([letter('a', false)]);
    let b = Word::from_letters([letter('b', false)]);
    (1..=size)
        .map(|j| {
            let mut chain = crate::chains::Chain::zero();
            chain.add_term(&a.mul(&b.pow(j as i64)).mul(&a), &rat(1, 1));
            chain.add_term(&a, &rat(-2, 1));
            chain.add_term(&b, &rat(-(j as i64), 1));
            chain.normalize()
        })
        .collect()
}

fn letter(c: char, inv: bool) -> Letter {
    Letter::new(crate::words::Gen::new(c).unwrap(), inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::parse_chain;
    use crate::scl::{scl, SclValue};
    use crate::testutil::{random_boundary_chain, random_reduced_word};
    use crate::words::{parse_word, Alphabet};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ab() -> Alphabet {
        Alphabet::new("ab").unwrap()
    }

    fn qm(text: &str) -> CountingQm {
        CountingQm::new(parse_word(text, &ab()).unwrap()).unwrap()
    }

    fn w(text: &str) -> Word {
        parse_word(text, &ab()).unwrap()
    }

    fn h(text: &str) -> HChain {
        parse_chain(text, &ab()).unwrap().normalize()
    }

    #[test]
    fn raw_counts() {
        assert_eq!(qm("ab").evaluate(&w("abab")), 2);
        assert_eq!(qm("a").evaluate(&w("a^3")), 3);
        assert_eq!(qm("ab").evaluate(&w("[a,b]")), 1);
        assert_eq!(qm("ab").evaluate(&w("b^-1a^-1")), -1);
    }

    #[test]
    fn homogenized_values() {
        assert_eq!(qm("ab").homogenized_value(&w("ab")), rat(1, 1));
        assert_eq!(qm("a").homogenized_value(&w("b")), rat(0, 1));
        assert_eq!(qm("ab").homogenized_value(&w("[a,b]")), rat(1, 1));
        // Pattern longer than the period wraps around the seam repeatedly.
        assert_eq!(qm("a^3").homogenized_value(&w("a")), rat(1, 1));
    }

    /// Independent oracle: count starts in the middle copy of an explicit
    /// repetition of the period.
    fn periodic_count_oracle(q: &CountingQm, word: &Word) -> i64 {
        let (c, _) = word.cyclic_reduce();
        let n = c.len();
        if n == 0 {
            return 0;
        }
        let mut repeated: Vec<Letter> = Vec::new();
        let reps = 2 + q.base().len().div_ceil(n);
        for _ in 0..reps {
            repeated.extend_from_slice(c.letters());
        }
        let mut count = 0i64;
        for (pattern, sign) in [(q.base().clone(), 1i64), (q.base().inverse(), -1)] {
            for start in n..2 * n {
                if repeated.len() >= start + pattern.len()
                    && repeated[start..start + pattern.len()] == *pattern.letters()
                {
                    count += sign;
                }
            }
        }
        count
    }

    #[test]
    fn homogenization_matches_repetition_oracle() {
        let mut rng = StdRng::seed_from_u64(301);
        let alphabet = ab();
        for _ in 0..150 {
            let u = random_reduced_word(&alphabet, rng.random_range(1..4), &mut rng);
            if u.is_identity() {
                continue;
            }
            let q = CountingQm::new(u).unwrap();
            let word = random_reduced_word(&alphabet, rng.random_range(1..8), &mut rng);
            if CyclicWord::of(&word).is_empty() {
                continue;
            }
            assert_eq!(q.homogenized_value(&word), rat(periodic_count_oracle(&q, &word), 1));
        }
    }

    #[test]
    fn homogeneity_and_conjugacy_invariance() {
        let mut rng = StdRng::seed_from_u64(307);
        let alphabet = ab();
        for _ in 0..100 {
            let base = random_reduced_word(&alphabet, rng.random_range(1..4), &mut rng);
            let Ok(q) = CountingQm::new(base) else { continue };
            let word = random_reduced_word(&alphabet, rng.random_range(1..6), &mut rng);
            let g = random_reduced_word(&alphabet, rng.random_range(0..5), &mut rng);
            assert_eq!(q.homogenized_value(&word.conjugate_by(&g)), q.homogenized_value(&word));
            for k in 1..=3i64 {
                assert_eq!(
                    q.homogenized_value(&word.pow(k)),
                    q.homogenized_value(&word) * rat(k, 1)
                );
            }
        }
    }

    #[test]
    fn chain_evaluation() {
        assert_eq!(qm("ab").evaluate_chain(&h("[a,b]")), rat(1, 1));
        assert_eq!(qm("ab").evaluate_chain(&h("b[a,b]b^-1 - [a,b]")), rat(0, 1));
        assert_eq!(qm("ab").evaluate_chain(&h("1/2*[a,b]")), rat(1, 2));
    }

    #[test]
    fn defect_bounds() {
        assert_eq!(qm("a").defect_bound().0, rat(0, 1));
        assert_eq!(qm("ab").defect_bound().0, rat(6, 1));
        assert_eq!(qm("aba").defect_bound().0, rat(12, 1));
    }

    #[test]
    fn sampled_raw_defect_soundness() {
        let mut rng = StdRng::seed_from_u64(311);
        let alphabet = ab();
        for _ in 0..200 {
            let base = random_reduced_word(&alphabet, rng.random_range(1..5), &mut rng);
            let Ok(q) = CountingQm::new(base) else { continue };
            let g = random_reduced_word(&alphabet, rng.random_range(0..9), &mut rng);
            let hh = random_reduced_word(&alphabet, rng.random_range(0..9), &mut rng);
            let defect = (q.evaluate(&g) + q.evaluate(&hh) - q.evaluate(&g.mul(&hh))).abs();
            assert!(defect <= 3 * (q.base().len() as i64 - 1));
        }
    }

    #[test]
    fn bavard_bound_examples() {
        assert_eq!(bavard_lower_bound(&qm("ab"), &h("[a,b]")).unwrap(), rat(1, 12));
        assert_eq!(
            bavard_lower_bound(&qm("ab"), &h("b[a,b]b^-1 - [a,b]")).unwrap(),
            rat(0, 1)
        );
        assert_eq!(bavard_lower_bound(&qm("ab"), &h("-1*[a,b]")).unwrap(), rat(-1, 12));
        assert_eq!(bavard_lower_bound(&qm("ab"), &h("a")), Err(QmError::NonBoundaryChain));
        assert_eq!(bavard_lower_bound(&qm("a"), &h("[a,b]")), Err(QmError::ZeroDefect));
    }

    #[test]
    fn bavard_bounds_never_exceed_scl() {
        let mut rng = StdRng::seed_from_u64(313);
        let alphabet = ab();
        let qms: Vec<CountingQm> =
            ["ab", "ab^-1", "aab", "ba", "a^2", "bab"].iter().map(|u| qm(u)).collect();
        for _ in 0..8 {
            let chain = random_boundary_chain(&alphabet, 4, 3, &mut rng);
            let SclValue::Finite(value) = scl(&chain) else { panic!("boundary chain") };
            for q in &qms {
                let bound = bavard_lower_bound(q, &chain).unwrap();
                assert!(bound <= value, "Bavard bound {bound} exceeds scl {value}");
            }
        }
    }

    #[test]
    fn fragment_extension_by_homogeneity() {
        let half = FragmentElement::new(&w("[a,b]"), rat(1, 2)).unwrap();
        assert_eq!(qm("ab").extend_to_fragment(&half), rat(1, 2));
        assert_eq!(qm("ab").extend_to_fragment(&FragmentElement::identity()), rat(0, 1));
        let cubed = FragmentElement::new(&w("ab"), rat(3, 1)).unwrap();
        assert_eq!(qm("ab").extend_to_fragment(&cubed), rat(3, 1));
        assert_eq!(
            qm("ab").extend_to_fragment(&cubed),
            qm("ab").homogenized_value(&w("(ab)^3"))
        );
    }

    #[test]
    fn standard_family_evaluation_matrix_is_identity() {
        let family = standard_demo_family(5);
        let chains = standard_demo_chains(5);
        for (i, q) in family.iter().enumerate() {
            for (j, c) in chains.iter().enumerate() {
                let want = if i == j { rat(1, 1) } else { rat(0, 1) };
                assert_eq!(q.evaluate_chain(c), want, "entry ({i}, {j})");
            }
        }
        assert_eq!(independence_rank(&family, &chains).unwrap(), 5);
    }

    #[test]
    fn rank_edge_cases() {
        let chains = standard_demo_chains(3);
        assert_eq!(independence_rank(&[], &chains).unwrap(), 0);
        let mut family = standard_demo_family(3);
        family.push(family[0].clone());
        assert_eq!(independence_rank(&family, &chains).unwrap(), 3);
        assert_eq!(
            independence_rank(&standard_demo_family(2), &[h("a")]),
            Err(QmError::NonBoundaryChain)
        );
    }
}
