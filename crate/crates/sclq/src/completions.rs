//! Rational extensions of free groups, the rational-power fragment of free
//! A-groups, completion towers, and the non-orientable surface group
//! embeddings.
//!
//! For a subgroup `A` of the rationals and a cyclic subgroup `Z = <z>` of a
//! free group `F`, the amalgam `F *_{z = a} A` extends `z` by the divisible
//! arithmetic of `A`. Two facts drive every computation here:
//!
//! * the embedding `F -> F *_Z A` preserves scl of chains supported on `F`
//!   (splitting a chain across the amalgam forces the transfer term to
//!   vanish, because every nonzero homogenized chain on `A` has infinite
//!   scl);
//! * rational powers collapse in the homogenized chain space, `g^q ~ q g`,
//!   so scl of any chain of rational powers of free-group elements reduces
//!   to a free-group computation.
//!
//! The *fragment* wraps the second fact as a data type: [`FragmentElement`]
//! is a formal power `g^q` with primitive base. Chains of fragment elements
//! are the computable slice of the free A-group; mixed amalgam words stay
//! out of scope and are rejected explicitly.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::chains::{parse_coefficient, parse_rational_at, HChain};
use crate::scl::{scl_with, SclOptions, SclValue};
use crate::words::{
    parse_word_expression, Alphabet, Cursor, CyclicWord, Letter, ParseError, Word,
};
use crate::{rat, Rat};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CompletionsError {
    #[error("exponent {exponent} is not admissible in the ring {ring}")]
    InadmissibleExponent { exponent: String, ring: String },
    #[error("value {value} does not lie in the ring {ring}")]
    ValueNotInRing { value: String, ring: String },
    #[error("the amalgamated value must be nonzero")]
    ZeroAmalgamatedValue,
    #[error("the amalgamated word must be nontrivial")]
    EmptyAmalgamatedWord,
    #[error("bad ring syntax `{0}`; expected Q, Z, Z[1/m], (p/q)Z or (p/q)Z[1/m]")]
    BadRingSyntax(String),
    #[error("surface parameter m = {0} out of range (1 <= m <= 12)")]
    SurfaceSizeOutOfRange(u32),
    #[error("element outside the computable fragment: {0}")]
    OutsideComputableFragment(String),
    #[error("tower needs at least one stage")]
    EmptyTower,
}

// ---------------------------------------------------------------------------
// Subgroups of the rationals
// ---------------------------------------------------------------------------

/// A subgroup of the rationals with decidable membership: either all of `Q`
/// or the subgroup generated by `{ q0 / m^k : k >= 0 }`. With `m = 1` this
/// is the cyclic group `q0 Z`; with `q0 = 1` it is `Z[1/m]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RationalSubgroup {
    FullQ,
    Scaled { base: Rat, denominator: u32 },
}

impl RationalSubgroup {
    pub fn integers() -> RationalSubgroup {
        RationalSubgroup::Scaled { base: Rat::one(), denominator: 1 }
    }

    pub fn inverted_factorials(n: u32) -> RationalSubgroup {
        let mut m = 1u32;
        for k in 2..=n.max(1) {
            m = m.checked_mul(k).expect("factorial fits in u32 at desk scale");
        }
        RationalSubgroup::Scaled { base: Rat::one(), denominator: m }
    }

    /// The natural generator used when identifying a cyclic subgroup with a
    /// subgroup of this group: `1` for `Q`, the base otherwise.
    pub fn generator(&self) -> Rat {
        match self {
            RationalSubgroup::FullQ => Rat::one(),
            RationalSubgroup::Scaled { base, .. } => base.clone(),
        }
    }

    /// Exact membership test.
    pub fn contains(&self, q: &Rat) -> bool {
        match self {
            RationalSubgroup::FullQ => true,
            RationalSubgroup::Scaled { base, denominator } => {
                let scaled = q / base;
                let mut d = scaled.denom().clone();
                let m = BigInt::from(*denominator);
                loop {
                    if d.is_one() {
                        return true;
                    }
                    let g = d.gcd(&m);
                    if g.is_one() {
                        return false;
                    }
                    d /= g;
                }
            }
        }
    }
}

impl fmt::Display for RationalSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalSubgroup::FullQ => write!(f, "Q"),
            RationalSubgroup::Scaled { base, denominator } => {
                if !base.is_one() {
                    write!(f, "({base})")?;
                }
                write!(f, "Z")?;
                if *denominator != 1 {
                    write!(f, "[1/{denominator}]")?;
                }
                Ok(())
            }
        }
    }
}

/// Parse `Q`, `Z`, `Z[1/m]`, `(p/q)Z` or `(p/q)Z[1/m]`.
pub fn parse_ring(text: &str) -> Result<RationalSubgroup, CompletionsError> {
    let bad = || CompletionsError::BadRingSyntax(text.to_string());
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s == "Q" {
        return Ok(RationalSubgroup::FullQ);
    }
    let (base, rest) = if let Some(stripped) = s.strip_prefix('(') {
        let close = stripped.find(')').ok_or_else(bad)?;
        let base = crate::parse_rational(&stripped[..close]).map_err(|_| bad())?;
        (base, &stripped[close + 1..])
    } else {
        (Rat::one(), s.as_str())
    };
    if base.is_zero() || base.is_negative() {
        return Err(bad());
    }
    let rest = rest.strip_prefix('Z').ok_or_else(bad)?;
    let denominator = if rest.is_empty() {
        1u32
    } else {
        let inner = rest.strip_prefix("[1/").and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let m: u32 = inner.parse().map_err(|_| bad())?;
        if m == 0 {
            return Err(bad());
        }
        m
    };
    Ok(RationalSubgroup::Scaled { base, denominator })
}

// ---------------------------------------------------------------------------
// Rational extensions
// ---------------------------------------------------------------------------

/// The amalgam of the free base group with a subgroup `A <= Q` along
/// `z = value`. The root extension `<F, t | t^p = z>` is the special case
/// `A = (1/p)Z`, `value = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalExtension {
    pub amalgamated: CyclicWord,
    pub value: Rat,
    pub ring: RationalSubgroup,
    malnormal: bool,
}

impl RationalExtension {
    pub fn new(
        amalgamated: CyclicWord,
        value: Rat,
        ring: RationalSubgroup,
    ) -> Result<RationalExtension, CompletionsError> {
        if amalgamated.is_empty() {
            return Err(CompletionsError::EmptyAmalgamatedWord);
        }
        if value.is_zero() {
            return Err(CompletionsError::ZeroAmalgamatedValue);
        }
        if !ring.contains(&value) {
            return Err(CompletionsError::ValueNotInRing {
                value: value.to_string(),
                ring: ring.to_string(),
            });
        }
        let malnormal = amalgamated.is_primitive();
        Ok(RationalExtension { amalgamated, value, ring, malnormal })
    }

    /// Why the malnormality decision holds; see `docs/malnormality.md`.
    pub fn malnormality_justification(&self) -> String {
        if self.malnormal {
            format!(
                "⟨{}⟩ is malnormal: the word is not a proper power, so it generates \
                 its own centraliser and maximal cyclic subgroups of free groups are malnormal",
                self.amalgamated
            )
        } else {
            let (root, exp) = self.amalgamated.primitive_root().expect("nonempty");
            format!(
                "⟨{}⟩ is not malnormal: the word is the proper power ({root})^{exp}, \
                 so the root conjugates it to itself from outside the subgroup",
                self.amalgamated
            )
        }
    }
}

/// Malnormality of the cyclic edge subgroup, decided by primitivity of the
/// amalgamated word.
pub fn is_malnormal_extension(ext: &RationalExtension) -> bool {
    ext.malnormal
}

/// scl in the extension of a split chain `c1 + c2`: `c1` lives on the free
/// base, `c2` on the amalgamated copy of `A` given as `(coefficient, value)`
/// pairs. Every nonzero homogenized chain on `A` has infinite scl, so the
/// amalgam splitting collapses to the single transfer `d = (v / a) z`, where
/// `v` is the total value of `c2`:
/// `scl_E(c1 + c2) = scl_F(c1 + (v / a) z)`.
/// With `c2 = 0` this is the isometry of the base embedding.
pub fn scl_extension_split(
    ext: &RationalExtension,
    c1: &HChain,
    c2: &[(Rat, Rat)],
) -> Result<SclValue, CompletionsError> {
    scl_extension_split_with(ext, c1, c2, &SclOptions::default())
}

pub fn scl_extension_split_with(
    ext: &RationalExtension,
    c1: &HChain,
    c2: &[(Rat, Rat)],
    opts: &SclOptions,
) -> Result<SclValue, CompletionsError> {
    let mut total = Rat::zero();
    for (coeff, value) in c2 {
        if !ext.ring.contains(value) {
            return Err(CompletionsError::ValueNotInRing {
                value: value.to_string(),
                ring: ext.ring.to_string(),
            });
        }
        total += coeff * value;
    }
    let transfer = total / &ext.value;
    let mut chain = c1.clone();
    let (root, exp) = ext.amalgamated.primitive_root().expect("nonempty amalgamated word");
    chain.add_class(&root, &(transfer * rat(exp as i64, 1)));
    Ok(scl_with(&chain, opts))
}

// ---------------------------------------------------------------------------
// The rational-power fragment
// ---------------------------------------------------------------------------

/// A formal rational power `g^q` with primitive base, the computable
/// fragment of a free A-group. `(u^n)^q` is canonicalized to `u^(n q)`; the
/// identity is the empty power.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentElement {
    base: Option<Word>,
    exponent: Rat,
}

impl FragmentElement {
    pub fn identity() -> FragmentElement {
        FragmentElement { base: None, exponent: Rat::zero() }
    }

    /// Canonical form of `g^q`: the primitive root of `g` as base, with the
    /// extracted power folded into the exponent.
    pub fn new(g: &Word, exponent: Rat) -> Result<FragmentElement, CompletionsError> {
        if g.is_identity() || exponent.is_zero() {
            return Ok(FragmentElement::identity());
        }
        let (cyc, conj) = g.cyclic_reduce();
        let (root, power) = cyc.primitive_root().expect("nonempty after the identity check");
        let base = root.to_word().conjugate_by(&conj);
        Ok(FragmentElement { base: Some(base), exponent: exponent * rat(power as i64, 1) })
    }

    pub fn is_identity(&self) -> bool {
        self.base.is_none()
    }

    pub fn base(&self) -> Option<&Word> {
        self.base.as_ref()
    }

    pub fn exponent(&self) -> &Rat {
        &self.exponent
    }

    pub fn inverse(&self) -> FragmentElement {
        FragmentElement { base: self.base.clone(), exponent: -self.exponent.clone() }
    }

    /// Image in the homogenized chain space of the free group: `q` times the
    /// class of the base.
    pub fn chain_class(&self) -> HChain {
        let mut h = HChain::zero();
        if let Some(base) = &self.base {
            let (cyc, _) = base.cyclic_reduce();
            let (root, power) = cyc.primitive_root().expect("nonempty base");
            debug_assert_eq!(power, 1);
            h.add_class(&root, &self.exponent);
        }
        h
    }
}

impl fmt::Display for FragmentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.base {
            None => write!(f, "e"),
            Some(base) => write!(f, "({base})^({})", self.exponent),
        }
    }
}

/// A rational combination of fragment elements.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FragmentChain {
    pub terms: Vec<(Rat, FragmentElement)>,
}

impl FragmentChain {
    pub fn single(e: FragmentElement) -> FragmentChain {
        FragmentChain { terms: vec![(Rat::one(), e)] }
    }

    /// Image in the homogenized chain space of the free group.
    pub fn chain_class(&self) -> HChain {
        let mut h = HChain::zero();
        for (coeff, e) in &self.terms {
            h = h.add(&e.chain_class().scale(coeff));
        }
        h
    }
}

/// Parse `signed-term (('+'|'-') signed-term)*` where each term is
/// `[rational '*'] word-expression ['^(' rational ')']`.
pub fn parse_fragment_chain(text: &str, alphabet: &Alphabet) -> Result<FragmentChain, ParseError> {
    let mut cur = Cursor::new(text);
    let mut out = FragmentChain::default();
    let mut first = true;
    loop {
        let sign = match cur.peek() {
            None if !first => break,
            Some(b'+') if !first => {
                cur.bump();
                1i64
            }
            Some(b'-') if !first => {
                cur.bump();
                -1
            }
            Some(b'-') if first => {
                cur.bump();
                -1
            }
            Some(b'+') if first => {
                cur.bump();
                1
            }
            Some(_) if first => 1,
            Some(c) => {
                return Err(ParseError {
                    pos: cur.pos,
                    msg: format!("expected `+`, `-` or end of chain, found `{}`", c as char),
                })
            }
            None => {
                return Err(ParseError { pos: cur.pos, msg: "expected a fragment chain".into() })
            }
        };
        first = false;
        let coeff = parse_coefficient(&mut cur)?;
        let element = parse_fragment_element_at(&mut cur, alphabet)?;
        out.terms.push((coeff * rat(sign, 1), element));
    }
    Ok(out)
}

/// Parse a single fragment element `word-expression ['^(' rational ')']`.
pub fn parse_fragment_element(
    text: &str,
    alphabet: &Alphabet,
) -> Result<FragmentElement, ParseError> {
    let mut cur = Cursor::new(text);
    let e = parse_fragment_element_at(&mut cur, alphabet)?;
    if !cur.at_end() {
        let c = cur.peek().unwrap() as char;
        return Err(ParseError { pos: cur.pos, msg: format!("unexpected `{c}`") });
    }
    Ok(e)
}

fn parse_fragment_element_at(
    cur: &mut Cursor<'_>,
    alphabet: &Alphabet,
) -> Result<FragmentElement, ParseError> {
    let word = parse_word_expression(cur, alphabet)?;
    let exponent = if cur.peek() == Some(b'^') {
        cur.bump();
        cur.expect(b'(')?;
        let q = parse_rational_at(cur)?;
        cur.expect(b')')?;
        q
    } else {
        Rat::one()
    };
    FragmentElement::new(&word, exponent)
        .map_err(|e| ParseError { pos: cur.pos, msg: e.to_string() })
}

/// scl of a fragment chain over the ring `A`, through the collapse
/// `g^q ~ q g` in the homogenized chain space and the isometric embedding of
/// the free group into its A-completion.
pub fn scl_fragment(
    chain: &FragmentChain,
    ring: &RationalSubgroup,
) -> Result<SclValue, CompletionsError> {
    scl_fragment_with(chain, ring, &SclOptions::default())
}

pub fn scl_fragment_with(
    chain: &FragmentChain,
    ring: &RationalSubgroup,
    opts: &SclOptions,
) -> Result<SclValue, CompletionsError> {
    for (_, e) in &chain.terms {
        if !e.is_identity() && !ring.contains(e.exponent()) {
            return Err(CompletionsError::InadmissibleExponent {
                exponent: e.exponent().to_string(),
                ring: ring.to_string(),
            });
        }
    }
    Ok(scl_with(&chain.chain_class(), opts))
}

/// Positivity report for an element of the A-completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PositivityCertificate {
    /// The identity element: scl 0.
    Zero,
    /// Fragment element with its exact scl (infinite when no power of the
    /// element is a product of commutators).
    PositiveWithValue(SclValue),
    /// Declared non-fragment element: positivity holds by the structure
    /// theory, without a computed value.
    PositiveByTheorem { reasons: Vec<String> },
}

/// An input to the positivity check: either a computable fragment element or
/// a declared non-fragment element of the completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PositivityInput {
    Fragment(FragmentElement),
    NonFragment { description: String },
}

pub fn positivity_certificate(
    input: &PositivityInput,
    ring: &RationalSubgroup,
) -> Result<PositivityCertificate, CompletionsError> {
    match input {
        PositivityInput::Fragment(e) => {
            if e.is_identity() {
                return Ok(PositivityCertificate::Zero);
            }
            let value = scl_fragment(&FragmentChain::single(e.clone()), ring)?;
            if let SclValue::Finite(v) = &value {
                debug_assert!(v.is_positive(), "nontrivial free-group classes have scl >= 1/2");
            }
            Ok(PositivityCertificate::PositiveWithValue(value))
        }
        PositivityInput::NonFragment { .. } => Ok(PositivityCertificate::PositiveByTheorem {
            reasons: vec![
                "nontrivial elements of free groups have scl at least 1/2 (Duncan-Howie gap)"
                    .to_string(),
                "malnormal rational extensions preserve positivity of scl: elements not \
                 conjugate into a vertex group are chiral loxodromics of an acylindrical \
                 action on the splitting tree"
                    .to_string(),
                "positivity passes to the completion tower as a directed union of \
                 malnormal rational extensions"
                    .to_string(),
            ],
        }),
    }
}

// ---------------------------------------------------------------------------
// Completion towers
// ---------------------------------------------------------------------------

/// A finite prefix of the completion tower over a free base group: the first
/// stage extends one centraliser representative per conjugacy class (up to
/// inversion); later stages extend centralisers of the previous stage and
/// are recorded symbolically.
#[derive(Clone, Debug)]
pub struct Tower {
    pub alphabet: Alphabet,
    pub ring: RationalSubgroup,
    pub base_extensions: Vec<RationalExtension>,
    pub symbolic_stages: u32,
}

/// Representatives of centralisers of the free base: primitive cyclic words
/// of length at most `max_len`, one per conjugacy class up to inversion.
pub fn centraliser_representatives(alphabet: &Alphabet, max_len: usize) -> Vec<CyclicWord> {
    let mut letters = Vec::new();
    for g in alphabet.gens() {
        letters.push(Letter::new(*g, false));
        letters.push(Letter::new(*g, true));
    }
    let mut reps: Vec<CyclicWord> = Vec::new();
    let mut stack: Vec<Letter> = Vec::new();
    enumerate_words(&letters, max_len, &mut stack, &mut |word| {
        let w = Word::from_letters(word.iter().copied());
        if w.len() != word.len() {
            return; // not reduced as written
        }
        let (cyc, conj) = w.cyclic_reduce();
        if !conj.is_identity() || cyc.len() != word.len() {
            return; // not cyclically reduced
        }
        if cyc.to_word() != w {
            return; // not the canonical rotation: avoid duplicates
        }
        if !cyc.is_primitive() {
            return;
        }
        let inv = cyc.inverse();
        if inv < cyc {
            return; // the inverse class is the representative
        }
        reps.push(cyc);
    });
    reps.sort();
    reps.dedup();
    reps
}

fn enumerate_words(letters: &[Letter], max_len: usize, stack: &mut Vec<Letter>, f: &mut impl FnMut(&[Letter])) {
    if !stack.is_empty() {
        f(stack);
    }
    if stack.len() == max_len {
        return;
    }
    for l in letters {
        stack.push(*l);
        enumerate_words(letters, max_len, stack, f);
        stack.pop();
    }
}

/// First tower stage over the free base: one malnormal rational extension per
/// centraliser representative of length at most `max_len`; `stages - 1`
/// further stages are kept symbolic.
pub fn build_tower_stage(
    alphabet: &Alphabet,
    max_len: usize,
    ring: &RationalSubgroup,
    stages: u32,
) -> Result<Tower, CompletionsError> {
    if stages == 0 {
        return Err(CompletionsError::EmptyTower);
    }
    let value = ring.generator();
    let base_extensions = centraliser_representatives(alphabet, max_len)
        .into_iter()
        .map(|z| RationalExtension::new(z, value.clone(), ring.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Tower {
        alphabet: alphabet.clone(),
        ring: ring.clone(),
        base_extensions,
        symbolic_stages: stages - 1,
    })
}

/// The chain of root extensions `E_n = F *_{z = 1} Z[1/n!]`; each stage is a
/// rational extension of the previous one and their union is `F *_{z=1} Q`.
pub fn factorial_tower(
    z: &CyclicWord,
    stages: u32,
) -> Result<Vec<RationalExtension>, CompletionsError> {
    if stages == 0 {
        return Err(CompletionsError::EmptyTower);
    }
    (1..=stages)
        .map(|n| RationalExtension::new(z.clone(), Rat::one(), RationalSubgroup::inverted_factorials(n)))
        .collect()
}

/// Per-stage scl of a base-supported chain along a tower, plus the infimum
/// over stages. Each stage embeds the previous one isometrically, so on base
/// chains the trace is constant and the infimum is the stage-0 value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerTrace {
    pub per_stage: Vec<SclValue>,
    pub infimum: SclValue,
}

pub fn tower_scl_trace(
    stages: &[RationalExtension],
    h: &HChain,
) -> Result<TowerTrace, CompletionsError> {
    if stages.is_empty() {
        return Err(CompletionsError::EmptyTower);
    }
    let mut per_stage = Vec::with_capacity(stages.len());
    for ext in stages {
        per_stage.push(scl_extension_split(ext, h, &[])?);
    }
    let infimum = per_stage
        .iter()
        .fold(SclValue::Infinite, |acc, v| match (&acc, v) {
            (SclValue::Infinite, _) => v.clone(),
            (_, SclValue::Infinite) => acc,
            (SclValue::Finite(a), SclValue::Finite(b)) => {
                if b < a {
                    v.clone()
                } else {
                    acc
                }
            }
        });
    Ok(TowerTrace { per_stage, infimum })
}

impl Tower {
    /// Trace across the materialized stage and the symbolic ones. Symbolic
    /// stages carry the same value: base chains embed isometrically at every
    /// stage of the completion.
    pub fn scl_trace(&self, h: &HChain) -> Result<TowerTrace, CompletionsError> {
        let base_value = scl_with(h, &SclOptions::default());
        let mut per_stage = vec![base_value];
        if let Some(ext) = self.base_extensions.first() {
            per_stage.push(scl_extension_split(ext, h, &[])?);
        }
        for _ in 0..self.symbolic_stages {
            per_stage.push(per_stage.last().expect("nonempty").clone());
        }
        let infimum = per_stage[0].clone();
        Ok(TowerTrace { per_stage, infimum })
    }
}

// ---------------------------------------------------------------------------
// Non-orientable surface groups
// ---------------------------------------------------------------------------

/// The fundamental group of the closed non-orientable surface with demigenus
/// `2m + 1`, presented as a square-root extension of the free group of rank
/// `2m`: `< a_1, b_1, ..., a_m, b_m, t | t^2 = [a_1,b_1]...[a_m,b_m] >`.
#[derive(Clone, Debug)]
pub struct SurfaceGroup {
    pub pairs: u32,
    pub alphabet: Alphabet,
    pub relator_root: Word,
    pub presentation: String,
    pub euler_characteristic: i64,
    pub demigenus: u32,
    pub double_cover_generators: Vec<String>,
    pub embedding: FragmentElement,
}

pub fn surface_group(m: u32) -> Result<SurfaceGroup, CompletionsError> {
    if m < 1 || m > 12 {
        return Err(CompletionsError::SurfaceSizeOutOfRange(m));
    }
    let alphabet = Alphabet::first_n(2 * m as usize);
    let gens = alphabet.gens();
    let mut relator = Word::identity();
    let mut relator_text = String::new();
    let mut names = Vec::new();
    let mut double_cover = Vec::new();
    for i in 0..m as usize {
        let a = Word::generator(gens[2 * i]);
        let b = Word::generator(gens[2 * i + 1]);
        relator = relator.mul(&Word::commutator(&a, &b));
        relator_text.push_str(&format!("[a{0},b{0}]", i + 1));
        names.push(format!("a{}", i + 1));
        names.push(format!("b{}", i + 1));
        double_cover.push(format!("a{}", i + 1));
        double_cover.push(format!("b{}", i + 1));
    }
    for i in 0..m as usize {
        double_cover.push(format!("t a{} t^-1", i + 1));
        double_cover.push(format!("t b{} t^-1", i + 1));
    }
    let presentation = format!("< {}, t | t^2 = {} >", names.join(", "), relator_text);
    // The orientable double cover has genus 2m, so chi = (2 - 4m)/2 = 1 - 2m
    // and the demigenus is 2 - chi = 2m + 1.
    let euler_characteristic = 1 - 2 * m as i64;
    let demigenus = 2 * m + 1;
    let embedding = FragmentElement::new(&relator, rat(1, 2))?;
    Ok(SurfaceGroup {
        pairs: m,
        alphabet,
        relator_root: relator,
        presentation,
        euler_characteristic,
        demigenus,
        double_cover_generators: double_cover,
        embedding,
    })
}

/// The fragment of the surface group where scl is computable through the
/// embedding `t -> z^(1/2)`: words of the underlying free group and powers
/// of the root `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceElement {
    BaseWord(Word),
    RootPower(i64),
}

/// Parse `t`, `t^j`, or a word over the surface's free generators.
pub fn parse_surface_element(
    text: &str,
    surface: &SurfaceGroup,
) -> Result<SurfaceElement, CompletionsError> {
    let trimmed: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if trimmed == "t" {
        return Ok(SurfaceElement::RootPower(1));
    }
    if let Some(exp) = trimmed.strip_prefix("t^") {
        if let Ok(j) = exp.parse::<i64>() {
            return Ok(SurfaceElement::RootPower(j));
        }
    }
    match crate::words::parse_word(text, &surface.alphabet) {
        Ok(word) => Ok(SurfaceElement::BaseWord(word)),
        Err(e) => Err(CompletionsError::OutsideComputableFragment(format!(
            "`{text}` is neither a power of t nor a word in the base generators ({e}); \
             mixed words in t and base letters have no computable scl here"
        ))),
    }
}

/// scl in the surface group, through the isometric embedding into the
/// rational completion of the base free group: `t^j` maps to `z^(j/2)`.
pub fn scl_surface(surface: &SurfaceGroup, element: &SurfaceElement) -> Result<SclValue, CompletionsError> {
    let fragment = match element {
        SurfaceElement::BaseWord(w) => FragmentElement::new(w, Rat::one())?,
        SurfaceElement::RootPower(j) => {
            FragmentElement::new(&surface.relator_root, rat(*j, 2))?
        }
    };
    scl_fragment(&FragmentChain::single(fragment), &RationalSubgroup::FullQ)
}
