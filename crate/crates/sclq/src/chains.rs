//! Chains on a free group and their conjugation-invariant normal form.
//!
//! A [`Chain`] is a finite rational combination of group elements. Modding out
//! by `g^n - n*g` and `h g h^-1 - g` gives the homogenized chain space; its
//! normal form [`HChain`] keeps one primitive cyclic word per class, with the
//! inverse class folded in with a negated coefficient. scl and quasimorphism
//! evaluation both factor through this normal form.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::words::{parse_word_expression, Alphabet, Cursor, CyclicWord, Gen, ParseError, Word};
use crate::Rat;

/// A finite rational combination of words (group elements).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Chain {
    terms: BTreeMap<Word, Rat>,
}

impl Chain {
    pub fn zero() -> Chain {
        Chain::default()
    }

    pub fn from_word(w: &Word) -> Chain {
        let mut c = Chain::zero();
        c.add_term(w, &Rat::from_integer(1.into()));
        c
    }

    pub fn add_term(&mut self, w: &Word, coeff: &Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(w.clone()).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(w);
        }
    }

    pub fn add(&self, other: &Chain) -> Chain {
        let mut out = self.clone();
        for (w, q) in &other.terms {
            out.add_term(w, q);
        }
        out
    }

    pub fn scale(&self, q: &Rat) -> Chain {
        let mut out = Chain::zero();
        for (w, c) in &self.terms {
            out.add_term(w, &(c * q));
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Image in the homogenized chain space: every term is cyclically reduced,
    /// replaced by its primitive root (multiplying the coefficient by the
    /// extracted exponent), terms on the identity are dropped, and of the two
    /// mutually inverse classes only the lexicographically smaller one is
    /// stored, the other entering with a negated coefficient.
    pub fn normalize(&self) -> HChain {
        let mut out = HChain::default();
        for (w, q) in &self.terms {
            let (cyc, _) = w.cyclic_reduce();
            if cyc.is_empty() {
                continue;
            }
            let (root, exp) = cyc.primitive_root().expect("nonempty cyclic word");
            out.add_class(&root, &(q * Rat::from_integer(exp.into())));
        }
        out
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms.iter().map(|(w, q)| (w.to_string(), q)))
    }
}

/// Normal form of a chain in the homogenized chain space: a rational
/// combination of primitive cyclic words, one per inverse pair of classes.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct HChain {
    terms: BTreeMap<CyclicWord, Rat>,
}

impl HChain {
    pub fn zero() -> HChain {
        HChain::default()
    }

    /// Add `coeff` times the class of a primitive cyclic word, folding the
    /// inverse pair onto its canonical representative.
    pub fn add_class(&mut self, root: &CyclicWord, coeff: &Rat) {
        if coeff.is_zero() || root.is_empty() {
            return;
        }
        debug_assert!(root.is_primitive());
        let inv = root.inverse();
        debug_assert_ne!(*root, inv, "free groups have no element conjugate to its inverse");
        let (key, signed) = if inv < *root { (inv, -coeff.clone()) } else { (root.clone(), coeff.clone()) };
        let entry = self.terms.entry(key.clone()).or_insert_with(Rat::zero);
        *entry += signed;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CyclicWord, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &CyclicWord) -> Rat {
        self.terms.get(key).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &HChain) -> HChain {
        let mut out = self.clone();
        for (c, q) in &other.terms {
            out.add_class(c, q);
        }
        out
    }

    pub fn scale(&self, q: &Rat) -> HChain {
        let mut out = HChain::zero();
        for (c, coeff) in &self.terms {
            out.add_class(c, &(coeff * q));
        }
        out
    }

    /// Reinterpret the normal form as a plain chain (on representatives).
    pub fn as_chain(&self) -> Chain {
        let mut c = Chain::zero();
        for (cyc, q) in &self.terms {
            c.add_term(&cyc.to_word(), q);
        }
        c
    }

    /// Rational exponent sums over all terms; empty iff the chain is a boundary.
    pub fn exponent_sums(&self) -> BTreeMap<Gen, Rat> {
        let mut sums: BTreeMap<Gen, Rat> = BTreeMap::new();
        for (cyc, q) in &self.terms {
            for (g, e) in cyc.to_word().exponent_sums() {
                let entry = sums.entry(g).or_insert_with(Rat::zero);
                *entry += q * Rat::from_integer(e.into());
            }
        }
        sums.retain(|_, v| !v.is_zero());
        sums
    }

    /// Image in first homology, as a vector indexed by the alphabet.
    pub fn homology_class(&self, alphabet: &Alphabet) -> Vec<Rat> {
        let sums = self.exponent_sums();
        alphabet
            .gens()
            .iter()
            .map(|g| sums.get(g).cloned().unwrap_or_else(Rat::zero))
            .collect()
    }

    /// True iff the homology class vanishes; scl is finite exactly here.
    pub fn is_boundary(&self) -> bool {
        self.exponent_sums().is_empty()
    }
}

impl fmt::Display for HChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms.iter().map(|(w, q)| (w.to_string(), q)))
    }
}

fn write_terms<'a, I>(f: &mut fmt::Formatter<'_>, terms: I) -> fmt::Result
where
    I: Iterator<Item = (String, &'a Rat)>,
{
    let mut first = true;
    for (word, q) in terms {
        let neg = q.is_negative();
        let abs = q.abs();
        if first {
            if neg {
                write!(f, "-")?;
            }
            first = false;
        } else if neg {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        if abs == Rat::from_integer(1.into()) {
            write!(f, "{word}")?;
        } else {
            write!(f, "{abs}*{word}")?;
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// Parse `signed-term (('+'|'-') signed-term)*` where
/// `signed-term := [rational '*'] word-expression`.
pub fn parse_chain(text: &str, alphabet: &Alphabet) -> Result<Chain, ParseError> {
    let mut cur = Cursor::new(text);
    let mut chain = Chain::zero();
    let mut first = true;
    loop {
        let sign = if first {
            match cur.peek() {
                Some(b'-') => {
                    cur.bump();
                    -1i64
                }
                Some(b'+') => {
                    cur.bump();
                    1
                }
                _ => 1,
            }
        } else {
            match cur.peek() {
                None => break,
                Some(b'+') => {
                    cur.bump();
                    1
                }
                Some(b'-') => {
                    cur.bump();
                    -1
                }
                Some(c) => {
                    return Err(ParseError {
                        pos: cur.pos,
                        msg: format!("expected `+`, `-` or end of chain, found `{}`", c as char),
                    })
                }
            }
        };
        first = false;
        let coeff = parse_coefficient(&mut cur)?;
        let word = parse_word_expression(&mut cur, alphabet)?;
        chain.add_term(&word, &(coeff * Rat::from_integer(sign.into())));
    }
    Ok(chain)
}

/// Parse the optional `rational '*'` coefficient prefix of a term.
pub(crate) fn parse_coefficient(cur: &mut Cursor<'_>) -> Result<Rat, ParseError> {
    let leading_minus = cur.peek() == Some(b'-');
    let starts_number = match cur.peek() {
        Some(c) if c.is_ascii_digit() => true,
        Some(b'-') => true,
        _ => false,
    };
    if !starts_number {
        return Ok(Rat::from_integer(1.into()));
    }
    let save = cur.pos;
    if leading_minus {
        cur.bump();
        if !cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(ParseError { pos: cur.pos, msg: "expected digits after `-`".into() });
        }
        cur.pos = save;
    }
    let q = parse_rational_at(cur)?;
    cur.expect(b'*')?;
    Ok(q)
}

/// Parse `int ['/' int]` at the cursor.
pub(crate) fn parse_rational_at(cur: &mut Cursor<'_>) -> Result<Rat, ParseError> {
    let numer = cur.parse_int()?;
    if cur.peek() == Some(b'/') {
        cur.bump();
        let pos = cur.pos;
        let denom = cur.parse_int()?;
        if denom == 0 {
            return Err(ParseError { pos, msg: "zero denominator".into() });
        }
        Ok(Rat::new(numer.into(), denom.into()))
    } else {
        Ok(Rat::from_integer(numer.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_reduced_word;
    use crate::words::parse_word;
    use crate::{rat, Rat};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ab() -> Alphabet {
        Alphabet::new("ab").unwrap()
    }

    fn w(text: &str) -> Word {
        parse_word(text, &ab()).unwrap()
    }

    fn chain(text: &str) -> Chain {
        parse_chain(text, &ab()).unwrap()
    }

    #[test]
    fn conjugation_relation_collapses() {
        assert!(chain("b a b^-1 - a").normalize().is_zero());
    }

    #[test]
    fn powers_collapse_to_multiples() {
        let h = chain("(ab)^3").normalize();
        let expected = chain("3*(ab)").normalize();
        assert_eq!(h, expected);
        assert_eq!(h.coefficient(&CyclicWord::of(&w("ab"))), rat(3, 1));
    }

    #[test]
    fn inverse_folds_with_negative_sign() {
        assert!(chain("a^-1 + a").normalize().is_zero());
        let h = chain("a^-1").normalize();
        assert_eq!(h.coefficient(&CyclicWord::of(&w("a"))), rat(-1, 1));
    }

    #[test]
    fn homology_class_examples() {
        let alphabet = ab();
        assert_eq!(
            chain("[a,b]").normalize().homology_class(&alphabet),
            vec![rat(0, 1), rat(0, 1)]
        );
        assert_eq!(
            chain("1/2*a").normalize().homology_class(&alphabet),
            vec![rat(1, 2), rat(0, 1)]
        );
        assert_eq!(
            chain("3*ab - 3*a - 3*b").normalize().homology_class(&alphabet),
            vec![rat(0, 1), rat(0, 1)]
        );
    }

    #[test]
    fn boundary_detection() {
        assert!(chain("[a,b]").normalize().is_boundary());
        assert!(!chain("a").normalize().is_boundary());
        assert!(chain("1/3*[a,b]").normalize().is_boundary());
    }

    #[test]
    fn normalize_is_idempotent() {
        let mut rng = StdRng::seed_from_u64(31);
        let alphabet = ab();
        for _ in 0..100 {
            let mut c = Chain::zero();
            for _ in 0..rng.random_range(1..5) {
                let word = random_reduced_word(&alphabet, rng.random_range(1..8), &mut rng);
                c.add_term(&word, &rat(rng.random_range(-3..=3), rng.random_range(1..=3)));
            }
            let h = c.normalize();
            assert_eq!(h.as_chain().normalize(), h);
        }
    }

    #[test]
    fn normalize_is_linear() {
        let mut rng = StdRng::seed_from_u64(37);
        let alphabet = ab();
        for _ in 0..100 {
            let mut c1 = Chain::zero();
            let mut c2 = Chain::zero();
            for _ in 0..3 {
                c1.add_term(
                    &random_reduced_word(&alphabet, rng.random_range(1..7), &mut rng),
                    &rat(rng.random_range(-3..=3), 1),
                );
                c2.add_term(
                    &random_reduced_word(&alphabet, rng.random_range(1..7), &mut rng),
                    &rat(rng.random_range(-3..=3), 2),
                );
            }
            let q = rat(rng.random_range(-2..=2), rng.random_range(1..=3));
            let lhs = c1.scale(&q).add(&c2).normalize();
            let rhs = c1.normalize().scale(&q).add(&c2.normalize());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn power_and_conjugation_relations() {
        let mut rng = StdRng::seed_from_u64(41);
        let alphabet = ab();
        for _ in 0..100 {
            let g = random_reduced_word(&alphabet, rng.random_range(1..6), &mut rng);
            let h = random_reduced_word(&alphabet, rng.random_range(0..5), &mut rng);
            let n = loop {
                let n = rng.random_range(-3..=3i64);
                if n != 0 {
                    break n;
                }
            };
            let pow = Chain::from_word(&g.pow(n)).normalize();
            let scaled = Chain::from_word(&g).normalize().scale(&rat(n, 1));
            assert_eq!(pow, scaled);
            let conj = Chain::from_word(&g.conjugate_by(&h)).normalize();
            assert_eq!(conj, Chain::from_word(&g).normalize());
        }
    }

    #[test]
    fn homology_factors_through_normal_form() {
        let mut rng = StdRng::seed_from_u64(43);
        let alphabet = ab();
        for _ in 0..100 {
            let mut c = Chain::zero();
            let mut direct = vec![Rat::from_integer(0.into()); alphabet.len()];
            for _ in 0..rng.random_range(1..5) {
                let word = random_reduced_word(&alphabet, rng.random_range(0..8), &mut rng);
                let q = rat(rng.random_range(-3..=3), rng.random_range(1..=2));
                for (idx, e) in word.abelianization(&alphabet).unwrap().iter().enumerate() {
                    direct[idx] += &q * Rat::from_integer((*e).into());
                }
                c.add_term(&word, &q);
            }
            assert_eq!(c.normalize().homology_class(&alphabet), direct);
        }
    }

    #[test]
    fn chain_parser_handles_signs_and_coefficients() {
        let c = chain("-2*a + 1/2*[a,b] - b");
        let h = c.normalize();
        assert_eq!(h.coefficient(&CyclicWord::of(&w("a"))), rat(-2, 1));
        assert_eq!(h.coefficient(&CyclicWord::of(&w("[a,b]"))), rat(1, 2));
        assert_eq!(h.coefficient(&CyclicWord::of(&w("b"))), rat(-1, 1));
        assert!(parse_chain("a + + b", &ab()).is_err());
        assert!(parse_chain("2a", &ab()).is_err());
        assert!(parse_chain("a^(1/2)", &ab()).is_err());
    }

    #[test]
    fn display_round_trips() {
        let c = chain("-2*a + 1/2*[a,b] - b + a^-2");
        let h = c.normalize();
        let reparsed = parse_chain(&h.to_string(), &ab()).unwrap().normalize();
        assert_eq!(reparsed, h);
        assert_eq!(Chain::zero().to_string(), "0");
    }
}
