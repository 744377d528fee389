//! Word maps over a variable alphabet and their surjectivity on groups with
//! unique roots.
//!
//! A word `w` in variables `x_1, ..., x_m` is classified by its exponent
//! vector: all exponents zero means `w` lies in the commutator subgroup of
//! the variable free group (no surjectivity guarantee); gcd one means the
//! word map is surjective on every group ("silly"); otherwise the word map
//! is surjective on groups where every element has all roots, witnessed by
//! plugging `h^(1/i_k)` into the first variable with nonzero exponent and
//! the identity elsewhere.
//!
//! The variable alphabet is `x, y, z, x1..x9` (with `x = x1`, `y = x2`,
//! `z = x3`), kept separate from the group alphabet of the other modules.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::completions::FragmentElement;
use crate::words::{Cursor, ParseError};
use crate::{rat, Rat};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum WordMapError {
    #[error(
        "word lies in the commutator subgroup of the variable free group: \
         no surjectivity guarantee"
    )]
    NoSurjectivityGuarantee,
}

/// A reduced word in the variables `x1..x9`, stored as `(index, inverted)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VarWord(Vec<(u8, bool)>);

impl VarWord {
    pub fn from_letters<I: IntoIterator<Item = (u8, bool)>>(letters: I) -> VarWord {
        let mut out: Vec<(u8, bool)> = Vec::new();
        for (var, inv) in letters {
            if out.last().is_some_and(|(v, i)| *v == var && *i != inv) {
                out.pop();
            } else {
                out.push((var, inv));
            }
        }
        VarWord(out)
    }

    pub fn letters(&self) -> &[(u8, bool)] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> VarWord {
        VarWord(self.0.iter().rev().map(|(v, i)| (*v, !i)).collect())
    }

    pub fn mul(&self, other: &VarWord) -> VarWord {
        VarWord::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn pow(&self, n: i64) -> VarWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = VarWord::default();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// Number of variable slots: one past the largest variable in use.
    pub fn variable_count(&self) -> usize {
        self.0.iter().map(|(v, _)| *v as usize + 1).max().unwrap_or(0)
    }

    /// Signed exponent sums, one entry per variable slot.
    pub fn exponents(&self) -> Vec<i64> {
        let mut out = vec![0i64; self.variable_count()];
        for (v, inv) in &self.0 {
            out[*v as usize] += if *inv { -1 } else { 1 };
        }
        out
    }
}

impl fmt::Display for VarWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (v, inv) in &self.0 {
            write!(f, "x{}", v + 1)?;
            if *inv {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

/// Parse a variable word: same grammar as group words, but over the variable
/// alphabet `x | y | z | x1..x9`.
pub fn parse_var_word(text: &str) -> Result<VarWord, ParseError> {
    let mut cur = Cursor::new(text);
    let w = parse_expr(&mut cur)?;
    if !cur.at_end() {
        let c = cur.peek().unwrap() as char;
        return Err(ParseError { pos: cur.pos, msg: format!("unexpected `{c}`") });
    }
    Ok(w)
}

fn parse_expr(cur: &mut Cursor<'_>) -> Result<VarWord, ParseError> {
    let mut out = VarWord::default();
    let mut any = false;
    loop {
        match cur.peek() {
            None | Some(b',') | Some(b')') | Some(b']') => break,
            Some(b'*') => {
                cur.bump();
                continue;
            }
            Some(_) => {}
        }
        let base = parse_base(cur)?;
        let factor = if cur.peek() == Some(b'^') {
            cur.bump();
            base.pow(cur.parse_int()?)
        } else {
            base
        };
        out = out.mul(&factor);
        any = true;
    }
    if !any {
        return Err(ParseError { pos: cur.pos, msg: "expected a variable word".into() });
    }
    Ok(out)
}

fn parse_base(cur: &mut Cursor<'_>) -> Result<VarWord, ParseError> {
    let pos = cur.pos;
    match cur.peek() {
        Some(b'(') => {
            cur.bump();
            let w = parse_expr(cur)?;
            cur.expect(b')')?;
            Ok(w)
        }
        Some(b'[') => {
            cur.bump();
            let x = parse_expr(cur)?;
            cur.expect(b',')?;
            let y = parse_expr(cur)?;
            cur.expect(b']')?;
            Ok(x.mul(&y).mul(&x.inverse()).mul(&y.inverse()))
        }
        Some(b'x') => {
            cur.bump();
            let idx = match cur.peek_raw() {
                Some(d) if d.is_ascii_digit() && d != b'0' => {
                    cur.bump();
                    d - b'1'
                }
                _ => 0,
            };
            Ok(VarWord::from_letters([(idx, false)]))
        }
        Some(b'y') => {
            cur.bump();
            Ok(VarWord::from_letters([(1, false)]))
        }
        Some(b'z') => {
            cur.bump();
            Ok(VarWord::from_letters([(2, false)]))
        }
        Some(c) => Err(ParseError {
            pos,
            msg: format!("unexpected `{}`; variables are x, y, z, x1..x9", c as char),
        }),
        None => Err(ParseError { pos, msg: "unexpected end of input".into() }),
    }
}

/// Outcome of the exponent-vector classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// All exponents vanish; the word map need not be surjective anywhere.
    InCommutatorSubgroup,
    /// The exponents have gcd one; the word map is surjective on every group.
    Silly,
    /// Some exponent is nonzero but the gcd exceeds one; the word map is
    /// surjective on groups with unique roots.
    NonSillyQSurjective,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::InCommutatorSubgroup => {
                write!(f, "in commutator subgroup; no surjectivity guarantee")
            }
            Classification::Silly => write!(f, "silly; surjective on every group"),
            Classification::NonSillyQSurjective => {
                write!(f, "non-silly; surjective on Q-groups")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordMapReport {
    pub exponents: Vec<i64>,
    pub classification: Classification,
    /// `(variable index, exponent)` of the first variable with nonzero
    /// exponent, when one exists.
    pub witness_recipe: Option<(usize, i64)>,
}

pub fn classify_word(w: &VarWord) -> WordMapReport {
    let exponents = w.exponents();
    let witness_recipe = exponents.iter().enumerate().find(|(_, e)| **e != 0).map(|(i, e)| (i, *e));
    let gcd = exponents.iter().fold(0i64, |acc, e| acc.gcd(e));
    let classification = if gcd == 0 {
        Classification::InCommutatorSubgroup
    } else if gcd == 1 {
        Classification::Silly
    } else {
        Classification::NonSillyQSurjective
    };
    WordMapReport { exponents, classification, witness_recipe }
}

/// A preimage tuple for `target` under the word map: `target^(1/i_k)` in the
/// first coordinate with nonzero exponent, the identity elsewhere. All other
/// variables cancel inside the commutator part of the word, so substitution
/// reduces to `target^(i_k / i_k)`.
pub fn surjectivity_witness(
    w: &VarWord,
    target: &FragmentElement,
) -> Result<Vec<FragmentElement>, WordMapError> {
    let report = classify_word(w);
    let Some((k, exp)) = report.witness_recipe else {
        return Err(WordMapError::NoSurjectivityGuarantee);
    };
    let mut tuple = vec![FragmentElement::identity(); w.variable_count()];
    let root = match target.base() {
        None => FragmentElement::identity(),
        Some(base) => FragmentElement::new(base, target.exponent() / rat(exp, 1))
            .expect("base is already canonical"),
    };
    tuple[k] = root;
    Ok(tuple)
}

/// Substitute the tuple into the word and reduce with the fragment power
/// rules: `(g^p)(g^q) = g^(p+q)` for a common base, integer powers expanded
/// back to words so that cross-base cancellation is honest free reduction.
/// True iff the result is exactly `target`.
pub fn verify_witness(w: &VarWord, tuple: &[FragmentElement], target: &FragmentElement) -> bool {
    let mut stack: Vec<FragmentElement> = Vec::new();
    for (var, inv) in w.letters() {
        let Some(e) = tuple.get(*var as usize) else { return false };
        let e = if *inv { e.inverse() } else { e.clone() };
        push_reduce(&mut stack, e);
    }
    match (&stack[..], target.is_identity()) {
        ([], true) => true,
        ([single], false) => single == target,
        _ => false,
    }
}

fn push_reduce(stack: &mut Vec<FragmentElement>, e: FragmentElement) {
    if e.is_identity() {
        return;
    }
    let mut current = e;
    while let Some(top) = stack.last() {
        if top.base() == current.base() {
            let merged_exp = top.exponent() + current.exponent();
            let base = top.base().expect("identity never stored").clone();
            stack.pop();
            if merged_exp.is_zero() {
                return;
            }
            current = FragmentElement::new(&base, Rat::one())
                .expect("canonical base")
                .with_exponent(merged_exp);
            continue;
        }
        // Integer powers multiply as honest words; this catches cross-base
        // cancellation such as (ab)(b^-1a^-1).
        if top.exponent().is_integer() && current.exponent().is_integer() {
            let top_word = expand_integer_power(top);
            let cur_word = expand_integer_power(&current);
            let product = top_word.mul(&cur_word);
            stack.pop();
            match FragmentElement::new(&product, Rat::one()) {
                Ok(merged) if merged.is_identity() => return,
                Ok(merged) => {
                    current = merged;
                    continue;
                }
                Err(_) => unreachable!("integer powers always canonicalize"),
            }
        }
        break;
    }
    stack.push(current);
}

fn expand_integer_power(e: &FragmentElement) -> crate::words::Word {
    let base = e.base().expect("identity handled by caller");
    let n = e.exponent().to_integer();
    // Desk-scale guard; witnesses in practice have tiny exponents.
    let n: i64 = i64::try_from(&n).unwrap_or(0);
    base.pow(n)
}

impl FragmentElement {
    /// Replace the exponent of an already-canonical element; only `wordmaps`
    /// needs this when re-merging powers of a shared base.
    fn with_exponent(&self, exponent: Rat) -> FragmentElement {
        match self.base() {
            None => FragmentElement::identity(),
            Some(base) => FragmentElement::new(base, exponent).expect("base stays canonical"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_reduced_word;
    use crate::words::Alphabet;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn frag(text: &str) -> FragmentElement {
        let alphabet = Alphabet::new("ab").unwrap();
        crate::completions::parse_fragment_element(text, &alphabet).unwrap()
    }

    #[test]
    fn parses_variable_words() {
        assert_eq!(parse_var_word("xy").unwrap().exponents(), vec![1, 1]);
        assert_eq!(parse_var_word("y^2").unwrap().exponents(), vec![0, 2]);
        assert_eq!(parse_var_word("x2^3 x1^-1").unwrap().exponents(), vec![-1, 3]);
        assert_eq!(parse_var_word("[x,y]").unwrap().exponents(), vec![0, 0]);
        assert_eq!(parse_var_word("x x^-1 y").unwrap(), parse_var_word("y").unwrap());
        assert!(parse_var_word("a").is_err());
        assert!(parse_var_word("x0").is_err());
    }

    #[test]
    fn classification_examples() {
        let y2 = classify_word(&parse_var_word("y^2").unwrap());
        assert_eq!(y2.exponents, vec![0, 2]);
        assert_eq!(y2.classification, Classification::NonSillyQSurjective);
        assert_eq!(y2.witness_recipe, Some((1, 2)));

        let xy = classify_word(&parse_var_word("xy").unwrap());
        assert_eq!(xy.classification, Classification::Silly);

        let comm = classify_word(&parse_var_word("[x,y]").unwrap());
        assert_eq!(comm.classification, Classification::InCommutatorSubgroup);
        assert_eq!(comm.witness_recipe, None);
    }

    #[test]
    fn classification_is_permutation_invariant() {
        // Rename x <-> y throughout: silliness only depends on the multiset.
        for (w1, w2) in [("x^2y^3", "y^2x^3"), ("x^4y^6", "y^4x^6"), ("xy", "yx")] {
            let c1 = classify_word(&parse_var_word(w1).unwrap()).classification;
            let c2 = classify_word(&parse_var_word(w2).unwrap()).classification;
            assert_eq!(c1, c2);
        }
    }

    #[test]
    fn witness_examples() {
        let y2 = parse_var_word("y^2").unwrap();
        let target = frag("[a,b]");
        let tuple = surjectivity_witness(&y2, &target).unwrap();
        assert!(tuple[0].is_identity());
        assert_eq!(tuple[1], frag("[a,b]^(1/2)"));
        assert!(verify_witness(&y2, &tuple, &target));

        let w = parse_var_word("x^2y^3").unwrap();
        let target = frag("a");
        let tuple = surjectivity_witness(&w, &target).unwrap();
        assert_eq!(tuple[0], frag("a^(1/2)"));
        assert!(tuple[1].is_identity());
        assert!(verify_witness(&w, &tuple, &target));

        assert_eq!(
            surjectivity_witness(&parse_var_word("[x,y]").unwrap(), &target),
            Err(WordMapError::NoSurjectivityGuarantee)
        );
    }

    #[test]
    fn verify_rejects_wrong_roots() {
        let y2 = parse_var_word("y^2").unwrap();
        let target = frag("[a,b]");
        let wrong = vec![FragmentElement::identity(), frag("[a,b]^(1/3)")];
        assert!(!verify_witness(&y2, &wrong, &target));
        let xy = parse_var_word("xy").unwrap();
        assert!(verify_witness(&xy, &[target.clone(), FragmentElement::identity()], &target));
    }

    #[test]
    fn exponents_match_group_word_abelianization() {
        // Cross-module consistency: translate variable words to group words
        // over {a, b} and compare exponent vectors.
        let mut rng = StdRng::seed_from_u64(501);
        let alphabet = Alphabet::new("ab").unwrap();
        for _ in 0..100 {
            let group_word = random_reduced_word(&alphabet, rng.random_range(0..9), &mut rng);
            let text: String = group_word
                .letters()
                .iter()
                .map(|l| {
                    let name = if l.gen.as_char() == 'a' { "x" } else { "y" };
                    if l.inv {
                        format!("{name}^-1")
                    } else {
                        name.to_string()
                    }
                })
                .collect();
            if text.is_empty() {
                continue;
            }
            let var_word = parse_var_word(&text).unwrap();
            let mut expected = group_word.abelianization(&alphabet).unwrap();
            while expected.len() > var_word.variable_count() {
                assert_eq!(expected.pop(), Some(0));
            }
            assert_eq!(var_word.exponents(), expected);
        }
    }

    #[test]
    fn random_witnesses_verify() {
        let mut rng = StdRng::seed_from_u64(503);
        let alphabet = Alphabet::new("ab").unwrap();
        let words = ["y^2", "x^3", "x^2y^4", "xy", "x2^2x1^2", "x^6 [x,y] y^9"];
        for text in words {
            let w = parse_var_word(text).unwrap();
            for _ in 0..10 {
                let base = random_reduced_word(&alphabet, rng.random_range(1..5), &mut rng);
                if base.is_identity() {
                    continue;
                }
                let target = FragmentElement::new(
                    &base,
                    crate::rat(rng.random_range(1..5), rng.random_range(1..5)),
                )
                .unwrap();
                let tuple = surjectivity_witness(&w, &target).unwrap();
                assert!(verify_witness(&w, &tuple, &target), "word {text}, target {target}");
            }
        }
    }
}
