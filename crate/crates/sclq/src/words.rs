//! Free-group word algebra: parsing, free reduction, cyclic words, conjugacy
//! normal forms, abelianization and primitive roots.
//!
//! Words are sequences of signed generators over a session alphabet of at most
//! 26 lowercase letters. The [`Word`] invariant is free reduction (no adjacent
//! inverse pair); the [`CyclicWord`] invariant is cyclic reduction plus a
//! canonical rotation, so cyclic words can be used directly as map keys for
//! conjugacy classes.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// A generator symbol: one lowercase ASCII letter.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Gen(u8);

impl Gen {
    pub fn new(c: char) -> Option<Gen> {
        if c.is_ascii_lowercase() {
            Some(Gen(c as u8))
        } else {
            None
        }
    }

    pub fn as_char(self) -> char {
        self.0 as char
    }
}

/// A single signed letter of a word. The derived order puts `a < a^-1 < b < b^-1 < ...`,
/// which is the order used for canonical rotations.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Letter {
    pub gen: Gen,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: Gen, inv: bool) -> Letter {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Letter {
        Letter { gen: self.gen, inv: !self.inv }
    }

    fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.inv != other.inv
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inv {
            write!(f, "{}^-1", self.gen.as_char())
        } else {
            write!(f, "{}", self.gen.as_char())
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("alphabet must be nonempty")]
    Empty,
    #[error("alphabet symbol `{0}` is not a lowercase ASCII letter")]
    BadSymbol(char),
}

/// The finite generator alphabet of a session, stored sorted and deduplicated.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Alphabet(Vec<Gen>);

impl Alphabet {
    pub fn new(symbols: &str) -> Result<Alphabet, AlphabetError> {
        let mut gens = Vec::new();
        for c in symbols.chars() {
            if c.is_whitespace() {
                continue;
            }
            let g = Gen::new(c).ok_or(AlphabetError::BadSymbol(c))?;
            gens.push(g);
        }
        gens.sort();
        gens.dedup();
        if gens.is_empty() {
            return Err(AlphabetError::Empty);
        }
        Ok(Alphabet(gens))
    }

    /// The first `n` letters `a, b, c, ...`.
    pub fn first_n(n: usize) -> Alphabet {
        assert!(n >= 1 && n <= 26, "alphabet size must be in 1..=26");
        Alphabet((0..n).map(|i| Gen(b'a' + i as u8)).collect())
    }

    pub fn contains(&self, g: Gen) -> bool {
        self.0.binary_search(&g).is_ok()
    }

    pub fn index_of(&self, g: Gen) -> Option<usize> {
        self.0.binary_search(&g).ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn gens(&self) -> &[Gen] {
        &self.0
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.0 {
            write!(f, "{}", g.as_char())?;
        }
        Ok(())
    }
}

/// A freely reduced word in the free group on the session alphabet.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    pub fn generator(g: Gen) -> Word {
        Word(vec![Letter::new(g, false)])
    }

    /// Freely reduce an arbitrary letter sequence.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last().is_some_and(|last| last.cancels(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.mul(self).mul(&g.inverse())
    }

    pub fn commutator(x: &Word, y: &Word) -> Word {
        x.mul(y).mul(&x.inverse()).mul(&y.inverse())
    }

    /// Signed exponent sum of each generator occurring in the word.
    pub fn exponent_sums(&self) -> BTreeMap<Gen, i64> {
        let mut sums = BTreeMap::new();
        for l in &self.0 {
            *sums.entry(l.gen).or_insert(0) += if l.inv { -1 } else { 1 };
        }
        sums.retain(|_, v| *v != 0);
        sums
    }

    /// Exponent-sum vector indexed by the alphabet.
    pub fn abelianization(&self, alphabet: &Alphabet) -> Result<Vec<i64>, UnknownGenerator> {
        let mut vec = vec![0i64; alphabet.len()];
        for l in &self.0 {
            let idx = alphabet
                .index_of(l.gen)
                .ok_or(UnknownGenerator { gen: l.gen.as_char() })?;
            vec[idx] += if l.inv { -1 } else { 1 };
        }
        Ok(vec)
    }

    /// Conjugacy normal form: `self = conjugator * cyclic * conjugator^-1`.
    pub fn cyclic_reduce(&self) -> (CyclicWord, Word) {
        let mut core: &[Letter] = &self.0;
        let mut prefix: Vec<Letter> = Vec::new();
        while core.len() >= 2 && core[0].cancels(core[core.len() - 1]) {
            prefix.push(core[0]);
            core = &core[1..core.len() - 1];
        }
        let rot = canonical_rotation(core);
        prefix.extend_from_slice(&core[..rot]);
        let mut letters = Vec::with_capacity(core.len());
        letters.extend_from_slice(&core[rot..]);
        letters.extend_from_slice(&core[..rot]);
        (CyclicWord(letters), Word::from_letters(prefix))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_grouped(f, &self.0)
    }
}

/// Index of the lexicographically least rotation of a letter sequence.
fn canonical_rotation(letters: &[Letter]) -> usize {
    let n = letters.len();
    if n <= 1 {
        return 0;
    }
    let mut best = 0;
    for cand in 1..n {
        for k in 0..n {
            let a = letters[(cand + k) % n];
            let b = letters[(best + k) % n];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    best = cand;
                    break;
                }
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    best
}

fn write_grouped(f: &mut fmt::Formatter<'_>, letters: &[Letter]) -> fmt::Result {
    if letters.is_empty() {
        return write!(f, "e");
    }
    let mut i = 0;
    while i < letters.len() {
        let l = letters[i];
        let mut run = 1;
        while i + run < letters.len() && letters[i + run] == l {
            run += 1;
        }
        let exp = if l.inv { -(run as i64) } else { run as i64 };
        if exp == 1 {
            write!(f, "{}", l.gen.as_char())?;
        } else {
            write!(f, "{}^{}", l.gen.as_char(), exp)?;
        }
        i += run;
    }
    Ok(())
}

/// A conjugacy class of a nontrivial (or trivial) cyclically reduced word,
/// stored as its lexicographically least rotation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CyclicWord(Vec<Letter>);

impl CyclicWord {
    /// Cyclic class of a word (conjugator discarded).
    pub fn of(w: &Word) -> CyclicWord {
        w.cyclic_reduce().0
    }

    pub(crate) fn from_canonical(letters: Vec<Letter>) -> CyclicWord {
        debug_assert_eq!(canonical_rotation(&letters), 0);
        CyclicWord(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The class of the inverse word.
    pub fn inverse(&self) -> CyclicWord {
        let inv: Vec<Letter> = self.0.iter().rev().map(|l| l.inverse()).collect();
        let rot = canonical_rotation(&inv);
        let mut letters = Vec::with_capacity(inv.len());
        letters.extend_from_slice(&inv[rot..]);
        letters.extend_from_slice(&inv[..rot]);
        CyclicWord(letters)
    }

    /// A representative [`Word`] for the class.
    pub fn to_word(&self) -> Word {
        Word(self.0.clone())
    }

    /// Maximal root: `self = root^exponent` with the exponent maximal.
    pub fn primitive_root(&self) -> Result<(CyclicWord, u32), EmptyCyclicWord> {
        let n = self.0.len();
        if n == 0 {
            return Err(EmptyCyclicWord);
        }
        for period in 1..=n {
            if n % period != 0 {
                continue;
            }
            if (period..n).all(|i| self.0[i] == self.0[i - period]) {
                let block = self.0[..period].to_vec();
                return Ok((CyclicWord::from_canonical(block), (n / period) as u32));
            }
        }
        unreachable!("period n always matches");
    }

    pub fn is_primitive(&self) -> bool {
        matches!(self.primitive_root(), Ok((_, 1)))
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_grouped(f, &self.0)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("unknown generator `{gen}`")]
pub struct UnknownGenerator {
    pub gen: char,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("the empty cyclic word has no primitive root")]
pub struct EmptyCyclicWord;

/// True iff the product of the commutators `[x_i, y_i]` freely reduces to `w`.
///
/// This is the cheap independent oracle for commutator-length upper bounds:
/// a witness list certifies `cl(w) <= pairs.len()`.
pub fn verify_commutator_identity(w: &Word, pairs: &[(Word, Word)]) -> bool {
    let mut prod = Word::identity();
    for (x, y) in pairs {
        prod = prod.mul(&Word::commutator(x, y));
    }
    prod == *w
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl ParseError {
    fn new(pos: usize, msg: impl Into<String>) -> ParseError {
        ParseError { pos, msg: msg.into() }
    }
}

/// Byte cursor shared by the word, chain and fragment grammars.
pub(crate) struct Cursor<'a> {
    bytes: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(text: &'a str) -> Cursor<'a> {
        Cursor { bytes: text.as_bytes(), pos: 0 }
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && (self.bytes[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    /// Peek without skipping whitespace first.
    pub(crate) fn peek_raw(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    pub(crate) fn bump(&mut self) -> Option<u8> {
        let b = self.bytes.get(self.pos).copied();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    pub(crate) fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == b => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(ParseError::new(
                self.pos,
                format!("expected `{}`, found `{}`", b as char, c as char),
            )),
            None => Err(ParseError::new(
                self.pos,
                format!("expected `{}`, found end of input", b as char),
            )),
        }
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    /// Parse a (possibly signed) decimal integer.
    pub(crate) fn parse_int(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek_raw() == Some(b'-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.peek_raw().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(ParseError::new(self.pos, "expected an integer"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|_| ParseError::new(start, "integer out of range"))
    }
}

/// Parse a word expression over `alphabet`.
///
/// Grammar: `word := factor+`; `factor := base ('^' int)?`;
/// `base := gen | '(' word ')' | '[' word ',' word ']'`. Whitespace is
/// ignored and `*` may separate factors. Uppercase letters are not inverses;
/// inversion is written `^-1`.
pub fn parse_word(text: &str, alphabet: &Alphabet) -> Result<Word, ParseError> {
    let mut cur = Cursor::new(text);
    let w = parse_word_expression(&mut cur, alphabet)?;
    if !cur.at_end() {
        let c = cur.peek().unwrap() as char;
        return Err(ParseError::new(cur.pos, format!("unexpected `{c}`")));
    }
    Ok(w)
}

/// Parse `factor+` until end of input or a top-level delimiter
/// (`+ - , ) ]` or a fragment exponent `^(`), which is left unconsumed.
pub(crate) fn parse_word_expression(
    cur: &mut Cursor<'_>,
    alphabet: &Alphabet,
) -> Result<Word, ParseError> {
    let mut out = Word::identity();
    let mut any = false;
    loop {
        match cur.peek() {
            None | Some(b'+') | Some(b'-') | Some(b',') | Some(b')') | Some(b']') => break,
            Some(b'*') => {
                cur.bump();
                continue;
            }
            Some(b'^') => break, // fragment exponent or stray caret; caller decides
            Some(_) => {}
        }
        let factor = parse_factor(cur, alphabet)?;
        out = out.mul(&factor);
        any = true;
    }
    if !any {
        return Err(ParseError::new(cur.pos, "expected a word"));
    }
    Ok(out)
}

fn parse_factor(cur: &mut Cursor<'_>, alphabet: &Alphabet) -> Result<Word, ParseError> {
    let base = parse_base(cur, alphabet)?;
    if cur.peek() == Some(b'^') {
        // `^(` introduces a rational exponent, which belongs to the fragment
        // grammar; leave it for the caller.
        let save = cur.pos;
        cur.bump();
        if cur.peek() == Some(b'(') {
            cur.pos = save;
            return Ok(base);
        }
        let exp = cur.parse_int()?;
        return Ok(base.pow(exp));
    }
    Ok(base)
}

fn parse_base(cur: &mut Cursor<'_>, alphabet: &Alphabet) -> Result<Word, ParseError> {
    let pos = cur.pos;
    match cur.peek() {
        Some(b'(') => {
            cur.bump();
            let w = parse_word_expression(cur, alphabet)?;
            cur.expect(b')')?;
            Ok(w)
        }
        Some(b'[') => {
            cur.bump();
            let x = parse_word_expression(cur, alphabet)?;
            cur.expect(b',')?;
            let y = parse_word_expression(cur, alphabet)?;
            cur.expect(b']')?;
            Ok(Word::commutator(&x, &y))
        }
        Some(c) if (c as char).is_ascii_lowercase() => {
            cur.bump();
            let g = Gen::new(c as char).unwrap();
            if !alphabet.contains(g) {
                return Err(ParseError::new(
                    pos,
                    format!("unknown generator `{}`", c as char),
                ));
            }
            Ok(Word::generator(g))
        }
        Some(c) => Err(ParseError::new(pos, format!("unexpected `{}`", c as char))),
        None => Err(ParseError::new(pos, "unexpected end of input")),
    }
}

/// Alphabet consisting of the letters that occur in an expression string.
/// Used by the CLI when no explicit alphabet is given.
pub fn inferred_alphabet(text: &str) -> Result<Alphabet, AlphabetError> {
    let letters: String = text.chars().filter(|c| c.is_ascii_lowercase()).collect();
    Alphabet::new(&letters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ab() -> Alphabet {
        Alphabet::new("ab").unwrap()
    }

    fn w(text: &str) -> Word {
        parse_word(text, &Alphabet::new("abcd").unwrap()).unwrap()
    }

    use crate::testutil::random_reduced_word;

    #[test]
    fn parses_commutator() {
        assert_eq!(w("[a,b]"), w("a b a^-1 b^-1"));
        assert_eq!(w("[a,b]").len(), 4);
    }

    #[test]
    fn parses_cancellation_to_identity() {
        assert!(w("a a^-1").is_identity());
        assert!(w("a*a^-1").is_identity());
    }

    #[test]
    fn parses_exponent_expansion() {
        assert_eq!(w("(ab)^3"), w("ababab"));
        assert_eq!(w("(ab)^-2"), w("b^-1a^-1b^-1a^-1"));
        assert_eq!(w("a^0"), Word::identity());
    }

    #[test]
    fn parse_reports_position() {
        let err = parse_word("ab)c", &ab()).unwrap_err();
        assert_eq!(err.pos, 2);
        let err = parse_word("axb", &ab()).unwrap_err();
        assert!(err.msg.contains("unknown generator `x`"));
        assert!(parse_word("", &ab()).is_err());
        assert!(parse_word("a^(1/2)", &ab()).is_err());
    }

    #[test]
    fn free_reduce_examples() {
        assert_eq!(w("a b b^-1 a"), w("a^2"));
        assert_eq!(Word::from_letters([]), Word::identity());
        assert_eq!(w("a^-1 a b"), w("b"));
    }

    #[test]
    fn free_reduce_idempotent_and_confluent() {
        let mut rng = StdRng::seed_from_u64(7);
        let alphabet = ab();
        for _ in 0..200 {
            let base = random_reduced_word(&alphabet, rng.random_range(0..10), &mut rng);
            // Insert cancelling garbage at random places, in two different
            // orders; all reduction paths must land on the same word.
            let mut noisy = base.letters().to_vec();
            for _ in 0..rng.random_range(0..5) {
                let g = alphabet.gens()[rng.random_range(0..alphabet.len())];
                let l = Letter::new(g, rng.random_bool(0.5));
                let at = rng.random_range(0..=noisy.len());
                noisy.insert(at, l.inverse());
                noisy.insert(at, l);
            }
            let reduced = Word::from_letters(noisy.iter().copied());
            assert_eq!(reduced, base);
            let again = Word::from_letters(reduced.letters().iter().copied());
            assert_eq!(again, reduced);
        }
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (c, conj) = w("b a b^-1").cyclic_reduce();
        assert_eq!(c.to_word(), w("a"));
        assert_eq!(conj, w("b"));

        let (c, conj) = w("[a,b]").cyclic_reduce();
        assert_eq!(c.to_word(), w("a b a^-1 b^-1"));
        assert!(conj.is_identity());

        // b^-1 a b b: one strip leaves `ab`, already canonical.
        let (c, conj) = w("b^-1 a b b").cyclic_reduce();
        assert_eq!(c.to_word(), w("ab"));
        assert_eq!(conj, w("b^-1"));
    }

    #[test]
    fn cyclic_reduce_reassembles_and_ignores_conjugation() {
        let mut rng = StdRng::seed_from_u64(11);
        let alphabet = ab();
        for _ in 0..200 {
            let word = random_reduced_word(&alphabet, rng.random_range(0..8), &mut rng);
            let (c, conj) = word.cyclic_reduce();
            assert_eq!(c.to_word().conjugate_by(&conj), word);
            let g = random_reduced_word(&alphabet, rng.random_range(0..6), &mut rng);
            assert_eq!(CyclicWord::of(&word.conjugate_by(&g)), c);
        }
    }

    #[test]
    fn primitive_root_examples() {
        let c = CyclicWord::of(&w("(ab)^3"));
        let (root, exp) = c.primitive_root().unwrap();
        assert_eq!((root.to_word(), exp), (w("ab"), 3));

        let (root, exp) = CyclicWord::of(&w("ab")).primitive_root().unwrap();
        assert_eq!((root.to_word(), exp), (w("ab"), 1));

        let (root, exp) = CyclicWord::of(&w("a^2b a^2 b")).primitive_root().unwrap();
        assert_eq!((root.to_word(), exp), (w("a^2b"), 2));

        assert!(CyclicWord::of(&Word::identity()).primitive_root().is_err());
    }

    #[test]
    fn primitive_root_of_root_is_trivial() {
        let mut rng = StdRng::seed_from_u64(13);
        let alphabet = ab();
        for _ in 0..200 {
            let word = random_reduced_word(&alphabet, rng.random_range(1..7), &mut rng);
            let c = CyclicWord::of(&word);
            if c.is_empty() {
                continue;
            }
            let (root, exp) = c.primitive_root().unwrap();
            assert!(root.is_primitive());
            assert_eq!(root.len() * exp as usize, c.len());
        }
    }

    #[test]
    fn abelianization_examples() {
        let alphabet = ab();
        assert_eq!(w("[a,b]").abelianization(&alphabet).unwrap(), vec![0, 0]);
        assert_eq!(w("a^2 b").abelianization(&alphabet).unwrap(), vec![2, 1]);
        let xy = Alphabet::new("xy").unwrap();
        let y2 = parse_word("y^2", &xy).unwrap();
        assert_eq!(y2.abelianization(&xy).unwrap(), vec![0, 2]);
    }

    #[test]
    fn abelianization_is_a_homomorphism() {
        let mut rng = StdRng::seed_from_u64(17);
        let alphabet = ab();
        for _ in 0..200 {
            let v = random_reduced_word(&alphabet, rng.random_range(0..8), &mut rng);
            let u = random_reduced_word(&alphabet, rng.random_range(0..8), &mut rng);
            let sum: Vec<i64> = v
                .abelianization(&alphabet)
                .unwrap()
                .iter()
                .zip(u.abelianization(&alphabet).unwrap())
                .map(|(a, b)| a + b)
                .collect();
            assert_eq!(v.mul(&u).abelianization(&alphabet).unwrap(), sum);
        }
    }

    #[test]
    fn commutator_identity_examples() {
        assert!(verify_commutator_identity(&w("[a,b]"), &[(w("a"), w("b"))]));
        assert!(!verify_commutator_identity(&w("[a,b]"), &[(w("b"), w("a"))]));
        assert!(verify_commutator_identity(&Word::identity(), &[]));
    }

    #[test]
    fn display_round_trips_through_parser() {
        let mut rng = StdRng::seed_from_u64(23);
        let alphabet = ab();
        for _ in 0..100 {
            let word = random_reduced_word(&alphabet, rng.random_range(1..10), &mut rng);
            assert_eq!(parse_word(&word.to_string(), &alphabet).unwrap(), word);
        }
        assert_eq!(Word::identity().to_string(), "e");
    }
}
