//! Exact scl on free groups via a linear program over surface pieces.
//!
//! An admissible surface bounding an integral chain can be cut into
//! rectangles (bands pairing a letter occurrence with an occurrence of its
//! inverse) and polygons mapping to the wedge point. Encoding the pieces
//! combinatorially turns scl into an exact rational LP:
//!
//! * a *position* is one letter occurrence in one cyclic word of the chain;
//! * an *arc* is an ordered pair of positions carrying mutually inverse
//!   letters (one side of a rectangle);
//! * a *polygon type* is a simple cycle in the turn graph, whose vertices are
//!   arcs and whose edges `a -> b` require `b` to start at the successor
//!   position of the end of `a`.
//!
//! Variables are polygon weights. Reverse-arc balance rows glue both sides of
//! every rectangle, coverage rows make the boundary wrap each cyclic word as
//! often as its coefficient, and the objective `sum w(P) (|P| - 2) / 4` is
//! `-chi/2` of the assembled surface per unit of the chain. Closed walks
//! decompose into simple cycles without raising the objective, so restricting
//! to simple cycles loses nothing; candidate polygons are generated lazily by
//! a minimum-weight cycle search under reduced costs. See `docs/scl_lp.md`
//! for the correctness notes.
//!
//! Cyclically reduced input forbids length-1 cycles, so the objective is
//! nonnegative and the program bounded. Rational coefficients are handled by
//! clearing denominators: `scl(c) = scl(M c) / M`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::chains::HChain;
use crate::ratlp::{self, LinearProgram, LpSolution, PivotRule, SparseCol};
use crate::words::{verify_commutator_identity, CyclicWord, Word};
use crate::{rat, Rat};

/// scl is a nonnegative rational on boundaries and infinite elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SclValue {
    Finite(Rat),
    Infinite,
}

impl SclValue {
    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            SclValue::Finite(q) => Some(q),
            SclValue::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SclValue::Finite(_))
    }

    /// Multiply a finite value by a nonnegative rational; infinity absorbs.
    pub fn scale(&self, q: &Rat) -> SclValue {
        match self {
            SclValue::Finite(v) => SclValue::Finite(v * q),
            SclValue::Infinite => SclValue::Infinite,
        }
    }
}

impl fmt::Display for SclValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SclValue::Finite(q) => write!(f, "{q}"),
            SclValue::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SclError {
    #[error("chain is not a boundary, scl is infinite")]
    NonBoundary,
    #[error("word has nonzero abelianization, so no power is a product of commutators")]
    NotInCommutatorSubgroup,
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// Tuning knobs for the column generation loop.
#[derive(Clone, Debug)]
pub struct SclOptions {
    /// Enumerate all simple cycles of length up to this bound as seed columns.
    pub seed_cycle_len: usize,
    /// Cap on the number of seed columns.
    pub max_seed_columns: usize,
    /// Cap on columns added per pricing round.
    pub pricing_batch: usize,
    /// Entering rule handed to the simplex solver.
    pub pivot_rule: PivotRule,
}

impl Default for SclOptions {
    fn default() -> SclOptions {
        SclOptions {
            seed_cycle_len: 4,
            max_seed_columns: 2000,
            pricing_batch: 25,
            pivot_rule: PivotRule::Bland,
        }
    }
}

/// Exact scl of a normalized chain in the free group on the session alphabet.
pub fn scl(h: &HChain) -> SclValue {
    scl_with(h, &SclOptions::default())
}

pub fn scl_with(h: &HChain, opts: &SclOptions) -> SclValue {
    match solve(h, opts) {
        Ok(Some(solved)) => SclValue::Finite(solved.value),
        Ok(None) => SclValue::Finite(Rat::zero()),
        Err(SclError::NonBoundary) => SclValue::Infinite,
        Err(e) => panic!("scl solver failed: {e}"),
    }
}

/// Exact scl together with a self-contained primal/dual certificate.
pub fn scl_certificate(h: &HChain) -> Result<SclCertificate, SclError> {
    scl_certificate_with(h, &SclOptions::default())
}

pub fn scl_certificate_with(h: &HChain, opts: &SclOptions) -> Result<SclCertificate, SclError> {
    match solve(h, opts)? {
        Some(solved) => Ok(solved.into_certificate()),
        None => Ok(SclCertificate::empty()),
    }
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

/// One letter occurrence: `(word index, letter index)` in the integral chain.
pub type Position = (usize, usize);

/// Clear denominators and signs: an integral chain of primitive cyclic words
/// with positive coverage, together with the scaling factor `M`.
fn integral_form(h: &HChain) -> (Vec<(CyclicWord, BigInt)>, BigInt) {
    let mut scale = BigInt::one();
    for (_, q) in h.terms() {
        scale = scale.lcm(q.denom());
    }
    let mut words: BTreeMap<CyclicWord, BigInt> = BTreeMap::new();
    for (w, q) in h.terms() {
        let n = (q * Rat::from_integer(scale.clone())).to_integer();
        if n.is_negative() {
            *words.entry(w.inverse()).or_insert_with(BigInt::zero) += -n;
        } else {
            *words.entry(w.clone()).or_insert_with(BigInt::zero) += n;
        }
    }
    words.retain(|_, n| !n.is_zero());
    (words.into_iter().collect(), scale)
}

struct Encoding {
    words: Vec<(CyclicWord, BigInt)>,
    scale: BigInt,
    /// Flattened positions of every word.
    positions: Vec<Position>,
    /// Arcs `(p, q)` with `letter(p) = letter(q)^-1`, sorted.
    arcs: Vec<(usize, usize)>,
    /// Balance row (and sign) of each arc; the canonical orientation of a
    /// rectangle is the smaller arc index of the pair.
    arc_pair_row: Vec<usize>,
    arc_sign: Vec<i8>,
    /// Arcs starting at each position, ascending.
    arcs_at: Vec<Vec<usize>>,
    /// Successor position around each cyclic word.
    succ: Vec<usize>,
    n_pairs: usize,
}

impl Encoding {
    fn build(words: Vec<(CyclicWord, BigInt)>, scale: BigInt) -> Encoding {
        let mut positions = Vec::new();
        let mut succ = Vec::new();
        let mut letters = Vec::new();
        for (w_idx, (w, _)) in words.iter().enumerate() {
            let base = positions.len();
            let len = w.len();
            for (i, l) in w.letters().iter().enumerate() {
                positions.push((w_idx, i));
                letters.push(*l);
                succ.push(base + (i + 1) % len);
            }
        }
        let n_pos = positions.len();
        let mut arcs = Vec::new();
        for p in 0..n_pos {
            for q in 0..n_pos {
                if p != q && letters[p] == letters[q].inverse() {
                    arcs.push((p, q));
                }
            }
        }
        arcs.sort_unstable();
        let arc_index: BTreeMap<(usize, usize), usize> =
            arcs.iter().enumerate().map(|(i, a)| (*a, i)).collect();
        let mut arc_pair_row = vec![0usize; arcs.len()];
        let mut arc_sign = vec![0i8; arcs.len()];
        let mut n_pairs = 0;
        for (a, (p, q)) in arcs.iter().enumerate() {
            let rev = arc_index[&(*q, *p)];
            if a < rev {
                arc_pair_row[a] = n_pairs;
                arc_pair_row[rev] = n_pairs;
                arc_sign[a] = 1;
                arc_sign[rev] = -1;
                n_pairs += 1;
            }
        }
        let mut arcs_at = vec![Vec::new(); n_pos];
        for (i, (p, _)) in arcs.iter().enumerate() {
            arcs_at[*p].push(i);
        }
        Encoding {
            words,
            scale,
            positions,
            arcs,
            arc_pair_row,
            arc_sign,
            arcs_at,
            succ,
            n_pairs,
        }
    }

    fn num_rows(&self) -> usize {
        self.positions.len() + self.n_pairs
    }

    fn rhs(&self) -> Vec<Rat> {
        let mut rhs: Vec<Rat> = self
            .positions
            .iter()
            .map(|(w, _)| Rat::from_integer(self.words[*w].1.clone()))
            .collect();
        rhs.extend(std::iter::repeat_n(Rat::zero(), self.n_pairs));
        rhs
    }

    /// Turn-graph successors of an arc.
    fn turn_successors(&self, a: usize) -> &[usize] {
        let (_, q) = self.arcs[a];
        &self.arcs_at[self.succ[q]]
    }

    /// Objective coefficient and constraint column of a polygon type.
    fn column_for(&self, cycle: &[usize]) -> (Rat, SparseCol) {
        let cost = rat(cycle.len() as i64 - 2, 4);
        let mut entries: BTreeMap<usize, Rat> = BTreeMap::new();
        for a in cycle {
            let (p, _) = self.arcs[*a];
            *entries.entry(p).or_insert_with(Rat::zero) += Rat::one();
            let row = self.positions.len() + self.arc_pair_row[*a];
            *entries.entry(row).or_insert_with(Rat::zero) +=
                Rat::from_integer(self.arc_sign[*a].into());
        }
        entries.retain(|_, v| !v.is_zero());
        (cost, entries.into_iter().collect())
    }

    /// All simple cycles of length at most `max_len`, canonical rotation
    /// (minimal arc first), capped at `cap`.
    fn seed_cycles(&self, max_len: usize, cap: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.arcs.len() {
            if out.len() >= cap {
                break;
            }
            stack.clear();
            stack.push(start);
            self.seed_dfs(start, max_len, cap, &mut stack, &mut out);
        }
        out
    }

    fn seed_dfs(
        &self,
        start: usize,
        max_len: usize,
        cap: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let last = *stack.last().unwrap();
        for next in self.turn_successors(last) {
            if out.len() >= cap {
                return;
            }
            if *next == start {
                if stack.len() >= 2 {
                    out.push(stack.clone());
                }
                continue;
            }
            if *next > start && stack.len() < max_len && !stack.contains(next) {
                stack.push(*next);
                self.seed_dfs(start, max_len, cap, stack, out);
                stack.pop();
            }
        }
    }

    /// Per-arc weight; the reduced cost of a polygon is
    /// `sum_{a in P} omega(a) - 1/2` when `include_cost` is set, and the
    /// Farkas violation is `-sum omega(a)` when it is not.
    fn arc_weights(&self, duals: &[Rat], include_cost: bool) -> Vec<Rat> {
        (0..self.arcs.len())
            .map(|a| {
                let (p, _) = self.arcs[a];
                let mut w = if include_cost { rat(1, 4) } else { Rat::zero() };
                w -= &duals[p];
                let row = self.positions.len() + self.arc_pair_row[a];
                let signed = &duals[row] * Rat::from_integer(self.arc_sign[a].into());
                w -= signed;
                w
            })
            .collect()
    }

    /// Simple cycles with total vertex weight strictly below `threshold`,
    /// deterministically ordered, at most `cap` of them. An empty result
    /// proves that no simple cycle goes below the threshold: the search is a
    /// Bellman-Ford negative-cycle sweep plus an exact all-pairs scan, and
    /// any closed walk below the threshold contains a simple cycle below it.
    fn cycles_below(&self, omega: &[Rat], threshold: &Rat, cap: usize) -> Vec<Vec<usize>> {
        let n = self.arcs.len();
        if n == 0 {
            return Vec::new();
        }
        let mut found: BTreeSet<(Rat, Vec<usize>)> = BTreeSet::new();

        // Bellman-Ford sweep from a virtual source into every vertex. A cycle
        // in the predecessor graph always has negative total weight; if no
        // pass changes anything there is no negative cycle at all.
        let mut dist: Vec<Rat> = omega.to_vec();
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut quiescent = false;
        for _pass in 0..(n + 3) {
            let mut changed: Vec<usize> = Vec::new();
            for a in 0..n {
                for b in self.turn_successors(a) {
                    let cand = &dist[a] + &omega[*b];
                    if cand < dist[*b] {
                        dist[*b] = cand;
                        pred[*b] = Some(a);
                        changed.push(*b);
                    }
                }
            }
            if changed.is_empty() {
                quiescent = true;
                break;
            }
            for x in changed {
                if let Some(cycle) = pred_cycle_through(x, &pred) {
                    let total: Rat = cycle.iter().map(|a| omega[*a].clone()).sum();
                    debug_assert!(total.is_negative());
                    if total < *threshold {
                        found.insert((total, canonical_cycle(&cycle)));
                    }
                }
            }
            if !found.is_empty() {
                break;
            }
        }
        if !quiescent && found.is_empty() {
            // A negative cycle exists but never surfaced in the predecessor
            // graph. Fall back to an exact bounded-walk dynamic program.
            found.extend(self.negative_cycle_by_dp(omega, threshold));
        }

        if quiescent {
            debug_assert!(found.is_empty());
            // No negative cycle: exact all-pairs minimum-weight cycle scan.
            let mut dist: Vec<Vec<Option<Rat>>> = vec![vec![None; n]; n];
            let mut next: Vec<Vec<usize>> = vec![vec![usize::MAX; n]; n];
            for a in 0..n {
                for b in self.turn_successors(a) {
                    let w = omega[*b].clone();
                    if dist[a][*b].as_ref().is_none_or(|d| w < *d) {
                        dist[a][*b] = Some(w);
                        next[a][*b] = *b;
                    }
                }
            }
            for k in 0..n {
                for i in 0..n {
                    let Some(dik) = dist[i][k].clone() else { continue };
                    for j in 0..n {
                        let Some(dkj) = dist[k][j].as_ref() else { continue };
                        let cand = &dik + dkj;
                        if dist[i][j].as_ref().is_none_or(|d| cand < *d) {
                            dist[i][j] = Some(cand);
                            next[i][j] = next[i][k];
                        }
                    }
                }
            }
            for v in 0..n {
                let Some(dvv) = dist[v][v].clone() else { continue };
                if dvv >= *threshold {
                    continue;
                }
                let mut walk = vec![v];
                let mut u = next[v][v];
                while u != v {
                    walk.push(u);
                    u = next[u][v];
                }
                for cycle in decompose_walk(&walk) {
                    let total: Rat = cycle.iter().map(|a| omega[*a].clone()).sum();
                    if total < *threshold {
                        found.insert((total, canonical_cycle(&cycle)));
                    }
                }
            }
        }

        let mut out: Vec<Vec<usize>> = Vec::new();
        for (_, cycle) in found {
            if !out.contains(&cycle) {
                out.push(cycle);
            }
            if out.len() >= cap {
                break;
            }
        }
        out
    }

    /// Exhaustive fallback: shortest closed walks of up to `n` edges from
    /// each start vertex. Only consulted if the predecessor sweep stalls.
    fn negative_cycle_by_dp(&self, omega: &[Rat], threshold: &Rat) -> Vec<(Rat, Vec<usize>)> {
        let n = self.arcs.len();
        for v in 0..n {
            let mut best: Vec<Option<(Rat, Vec<usize>)>> = vec![None; n];
            best[v] = Some((omega[v].clone(), vec![v]));
            for _ in 0..n {
                let mut next_best = best.clone();
                for a in 0..n {
                    let Some((da, walk)) = best[a].clone() else { continue };
                    for b in self.turn_successors(a) {
                        let cand = &da + &omega[*b];
                        if next_best[*b].as_ref().is_none_or(|(d, _)| cand < *d) {
                            let mut w2 = walk.clone();
                            w2.push(*b);
                            next_best[*b] = Some((cand, w2));
                        }
                    }
                }
                best = next_best;
                if let Some((d, walk)) = &best[v] {
                    if walk.len() > 1 && d < threshold {
                        let closed = &walk[..walk.len() - 1];
                        return decompose_walk(closed)
                            .into_iter()
                            .filter_map(|cycle| {
                                let total: Rat = cycle.iter().map(|a| omega[*a].clone()).sum();
                                (total < *threshold)
                                    .then(|| (total, canonical_cycle(&cycle)))
                            })
                            .collect();
                    }
                }
            }
        }
        Vec::new()
    }
}

/// Walk the predecessor pointers from `x`; a revisited vertex closes a cycle.
fn pred_cycle_through(x: usize, pred: &[Option<usize>]) -> Option<Vec<usize>> {
    let mut seen: Vec<usize> = Vec::new();
    let mut v = x;
    loop {
        if let Some(at) = seen.iter().position(|u| *u == v) {
            let mut cycle = seen[at..].to_vec();
            cycle.reverse(); // predecessor order is reversed edge order
            return Some(cycle);
        }
        seen.push(v);
        v = pred[v]?;
    }
}

/// Split a closed walk into simple cycles (each vertex at most once per cycle).
fn decompose_walk(walk: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for v in walk {
        if let Some(at) = stack.iter().position(|u| u == v) {
            out.push(stack.split_off(at));
        }
        stack.push(*v);
    }
    if !stack.is_empty() {
        out.push(stack);
    }
    out
}

fn canonical_cycle(cycle: &[usize]) -> Vec<usize> {
    let min_at = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, v)| **v)
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut out = Vec::with_capacity(cycle.len());
    out.extend_from_slice(&cycle[min_at..]);
    out.extend_from_slice(&cycle[..min_at]);
    out
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

struct Solved {
    value: Rat,
    encoding: Encoding,
    cycles: Vec<Vec<usize>>,
    primal: Vec<Rat>,
    duals: Vec<Rat>,
}

/// Column generation to proven optimality; `Ok(None)` for the zero chain.
fn solve(h: &HChain, opts: &SclOptions) -> Result<Option<Solved>, SclError> {
    if h.is_zero() {
        return Ok(None);
    }
    if !h.is_boundary() {
        return Err(SclError::NonBoundary);
    }
    let (words, scale) = integral_form(h);
    let enc = Encoding::build(words, scale);
    let mut cycles = enc.seed_cycles(opts.seed_cycle_len, opts.max_seed_columns);
    let rhs = enc.rhs();
    loop {
        let mut objective = Vec::with_capacity(cycles.len());
        let mut columns = Vec::with_capacity(cycles.len());
        for cycle in &cycles {
            let (cost, col) = enc.column_for(cycle);
            objective.push(cost);
            columns.push(col);
        }
        let lp = LinearProgram::new(objective, columns, rhs.clone())
            .map_err(|e| SclError::Internal(e.to_string()))?;
        let sol = ratlp::solve_with(&lp, opts.pivot_rule)
            .map_err(|e| SclError::Internal(e.to_string()))?;
        match sol {
            LpSolution::Infeasible { farkas } => {
                // Farkas pricing: a column resolving the infeasibility has
                // `y^T a_P > 0`, i.e. total arc weight below zero.
                let omega = enc.arc_weights(&farkas, false);
                let new = enc.cycles_below(&omega, &Rat::zero(), opts.pricing_batch);
                if new.is_empty() {
                    return Err(SclError::Internal(
                        "restricted program infeasible with no violated column; \
                         boundary chains always admit a surface"
                            .to_string(),
                    ));
                }
                cycles.extend(new);
            }
            LpSolution::Optimal { value, primal, dual } => {
                let omega = enc.arc_weights(&dual, true);
                let new = enc.cycles_below(&omega, &rat(1, 2), opts.pricing_batch);
                if new.is_empty() {
                    let scl_value = value / Rat::from_integer(enc.scale.clone());
                    return Ok(Some(Solved {
                        value: scl_value,
                        encoding: enc,
                        cycles,
                        primal,
                        duals: dual,
                    }));
                }
                cycles.extend(new);
            }
            LpSolution::Unbounded { .. } => {
                return Err(SclError::Internal(
                    "polygon costs are nonnegative, the program cannot be unbounded".to_string(),
                ))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

/// A polygon of the optimal solution: its arcs as position pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificatePolygon {
    pub arcs: Vec<(Position, Position)>,
    pub weight: Rat,
}

/// Self-verifying optimum description: the integral chain, the polygon
/// weights, and the dual potentials that price every polygon type out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SclCertificate {
    pub value: SclValue,
    pub scaling: BigInt,
    pub words: Vec<(CyclicWord, BigInt)>,
    pub polygons: Vec<CertificatePolygon>,
    pub position_duals: Vec<(Position, Rat)>,
    pub balance_duals: Vec<((Position, Position), Rat)>,
}

impl SclCertificate {
    fn empty() -> SclCertificate {
        SclCertificate {
            value: SclValue::Finite(Rat::zero()),
            scaling: BigInt::one(),
            words: Vec::new(),
            polygons: Vec::new(),
            position_duals: Vec::new(),
            balance_duals: Vec::new(),
        }
    }

    /// Re-check the certificate from scratch against the chain it claims to
    /// describe: primal feasibility, both objective values, and dual
    /// feasibility over every polygon type via a fresh minimum-cycle scan.
    pub fn verify(&self, h: &HChain) -> Result<(), String> {
        let SclValue::Finite(value) = &self.value else {
            return Err("certificates only exist for boundary chains".to_string());
        };
        let (words, scale) = integral_form(h);
        if words != self.words || scale != self.scaling {
            return Err("integral form does not match the chain".to_string());
        }
        if h.is_zero() {
            return if value.is_zero() && self.polygons.is_empty() {
                Ok(())
            } else {
                Err("zero chain must have value 0 and empty support".to_string())
            };
        }
        let enc = Encoding::build(words, scale);
        let pos_index: BTreeMap<Position, usize> =
            enc.positions.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let arc_index: BTreeMap<(usize, usize), usize> =
            enc.arcs.iter().enumerate().map(|(i, a)| (*a, i)).collect();

        // Primal side.
        let mut coverage = vec![Rat::zero(); enc.positions.len()];
        let mut balance = vec![Rat::zero(); enc.n_pairs];
        let mut objective = Rat::zero();
        for poly in &self.polygons {
            if poly.weight.is_negative() {
                return Err("negative polygon weight".to_string());
            }
            let cycle = cycle_indices(poly, &pos_index, &arc_index, &enc)?;
            objective += &poly.weight * rat(cycle.len() as i64 - 2, 4);
            for a in cycle {
                let (p, _) = enc.arcs[a];
                coverage[p] += &poly.weight;
                balance[enc.arc_pair_row[a]] +=
                    &poly.weight * Rat::from_integer(enc.arc_sign[a].into());
            }
        }
        let rhs = enc.rhs();
        for (p, want) in rhs.iter().take(enc.positions.len()).enumerate() {
            if coverage[p] != *want {
                return Err(format!("coverage violated at position {p}"));
            }
        }
        if balance.iter().any(|b| !b.is_zero()) {
            return Err("reverse-arc balance violated".to_string());
        }
        let scaled = value * Rat::from_integer(enc.scale.clone());
        if objective != scaled {
            return Err("primal objective does not match the claimed value".to_string());
        }

        // Dual side.
        let mut duals = vec![Rat::zero(); enc.num_rows()];
        for (pos, y) in &self.position_duals {
            let i = *pos_index.get(pos).ok_or("unknown position in duals")?;
            duals[i] = y.clone();
        }
        for ((from, to), y) in &self.balance_duals {
            let p = *pos_index.get(from).ok_or("unknown position in balance duals")?;
            let q = *pos_index.get(to).ok_or("unknown position in balance duals")?;
            let a = *arc_index.get(&(p, q)).ok_or("unknown arc in balance duals")?;
            duals[enc.positions.len() + enc.arc_pair_row[a]] = y.clone();
        }
        let dual_value: Rat = duals.iter().zip(&rhs).map(|(y, b)| y * b).sum();
        if dual_value != scaled {
            return Err("dual objective does not match the claimed value".to_string());
        }
        let omega = enc.arc_weights(&duals, true);
        if !enc.cycles_below(&omega, &rat(1, 2), 1).is_empty() {
            return Err("dual potentials admit an improving polygon".to_string());
        }
        // Complementary slackness: supported polygons are priced exactly.
        for poly in &self.polygons {
            if poly.weight.is_zero() {
                continue;
            }
            let cycle = cycle_indices(poly, &pos_index, &arc_index, &enc)?;
            let total: Rat = cycle.iter().map(|a| omega[*a].clone()).sum();
            if total != rat(1, 2) {
                return Err("supported polygon has nonzero reduced cost".to_string());
            }
        }
        Ok(())
    }

    /// JSON rendering with rationals as `p/q` strings.
    pub fn to_json(&self) -> serde_json::Value {
        let pos = |p: &Position| serde_json::json!([p.0, p.1]);
        serde_json::json!({
            "value": self.value.to_string(),
            "scaling": self.scaling.to_string(),
            "words": self.words.iter().map(|(w, n)| {
                serde_json::json!({"word": w.to_string(), "coverage": n.to_string()})
            }).collect::<Vec<_>>(),
            "polygons": self.polygons.iter().map(|poly| {
                serde_json::json!({
                    "arcs": poly.arcs.iter()
                        .map(|(a, b)| serde_json::json!([pos(a), pos(b)]))
                        .collect::<Vec<_>>(),
                    "weight": poly.weight.to_string(),
                })
            }).collect::<Vec<_>>(),
            "duals": self.position_duals.iter().map(|(p, y)| {
                serde_json::json!({"position": pos(p), "potential": y.to_string()})
            }).collect::<Vec<_>>(),
            "balance_duals": self.balance_duals.iter().map(|((a, b), y)| {
                serde_json::json!({"arc": [pos(a), pos(b)], "potential": y.to_string()})
            }).collect::<Vec<_>>(),
        })
    }
}

/// Resolve a certificate polygon back to arc indices and check that it is a
/// simple cycle of the turn graph.
fn cycle_indices(
    poly: &CertificatePolygon,
    pos_index: &BTreeMap<Position, usize>,
    arc_index: &BTreeMap<(usize, usize), usize>,
    enc: &Encoding,
) -> Result<Vec<usize>, String> {
    let mut cycle = Vec::with_capacity(poly.arcs.len());
    for (from, to) in &poly.arcs {
        let p = *pos_index.get(from).ok_or("unknown position in polygon")?;
        let q = *pos_index.get(to).ok_or("unknown position in polygon")?;
        cycle.push(*arc_index.get(&(p, q)).ok_or("polygon uses a non-arc")?);
    }
    if cycle.len() < 2 {
        return Err("polygon with fewer than two sides".to_string());
    }
    let mut sorted = cycle.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != cycle.len() {
        return Err("polygon repeats an arc".to_string());
    }
    for i in 0..cycle.len() {
        let a = cycle[i];
        let b = cycle[(i + 1) % cycle.len()];
        let (_, q) = enc.arcs[a];
        if enc.arcs[b].0 != enc.succ[q] {
            return Err("polygon arcs do not form a turn cycle".to_string());
        }
    }
    Ok(cycle)
}

impl Solved {
    fn into_certificate(self) -> SclCertificate {
        let enc = &self.encoding;
        let mut polygons = Vec::new();
        for (cycle, weight) in self.cycles.iter().zip(&self.primal) {
            if weight.is_zero() {
                continue;
            }
            let arcs = cycle
                .iter()
                .map(|a| {
                    let (p, q) = enc.arcs[*a];
                    (enc.positions[p], enc.positions[q])
                })
                .collect();
            polygons.push(CertificatePolygon { arcs, weight: weight.clone() });
        }
        let position_duals = enc
            .positions
            .iter()
            .enumerate()
            .map(|(i, p)| (*p, self.duals[i].clone()))
            .collect();
        let mut balance_duals = Vec::new();
        for (a, (p, q)) in enc.arcs.iter().enumerate() {
            if enc.arc_sign[a] == 1 {
                let y = self.duals[enc.positions.len() + enc.arc_pair_row[a]].clone();
                balance_duals.push(((enc.positions[*p], enc.positions[*q]), y));
            }
        }
        SclCertificate {
            value: SclValue::Finite(self.value),
            scaling: enc.scale.clone(),
            words: enc.words.clone(),
            polygons,
            position_duals,
            balance_duals,
        }
    }
}

// ---------------------------------------------------------------------------
// Commutator length upper bounds
// ---------------------------------------------------------------------------

/// Witness pair for `w = [x, y]`, if `w` is a single commutator.
///
/// A cyclically reduced word is a commutator exactly when some rotation
/// splits without cancellation as `u v z u^-1 v^-1 z^-1` with possibly empty
/// pieces (Wicks form); then `u v z u^-1 v^-1 z^-1 = [u v, z u^-1]`. The scan
/// over rotations and piece lengths is exhaustive, so `None` certifies that
/// `w` is not a commutator.
pub fn commutator_witness(w: &Word) -> Option<(Word, Word)> {
    if w.is_identity() {
        return Some((Word::identity(), Word::identity()));
    }
    if !w.exponent_sums().is_empty() {
        return None;
    }
    let (cyc, conj) = w.cyclic_reduce();
    let n = cyc.len();
    if n % 2 != 0 {
        return None;
    }
    let letters = cyc.letters();
    let at = |i: usize| letters[i % n];
    let half = n / 2;
    for rot in 0..n {
        for l1 in 0..=half {
            'split: for l2 in 0..=(half - l1) {
                let l3 = half - l1 - l2;
                for i in 0..l1 {
                    if at(rot + half + i) != at(rot + l1 - 1 - i).inverse() {
                        continue 'split;
                    }
                }
                for i in 0..l2 {
                    if at(rot + half + l1 + i) != at(rot + l1 + l2 - 1 - i).inverse() {
                        continue 'split;
                    }
                }
                for i in 0..l3 {
                    if at(rot + half + l1 + l2 + i) != at(rot + half - 1 - i).inverse() {
                        continue 'split;
                    }
                }
                let piece =
                    |from: usize, len: usize| Word::from_letters((0..len).map(|i| at(rot + from + i)));
                let u = piece(0, l1);
                let v = piece(l1, l2);
                let z = piece(l1 + l2, l3);
                let g = conj.mul(&Word::from_letters(letters[..rot].iter().copied()));
                let x = u.mul(&v).conjugate_by(&g);
                let y = z.mul(&u.inverse()).conjugate_by(&g);
                debug_assert!(verify_commutator_identity(w, &[(x.clone(), y.clone())]));
                return Some((x, y));
            }
        }
    }
    None
}

/// Outcome of the bounded commutator-length search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClBound {
    /// `cl(w) <= count`, certified by the witness list.
    Bound { count: u32, witnesses: Vec<(Word, Word)> },
    /// Budget exhausted before a certificate was found.
    Unknown,
}

/// Certified upper bound for the commutator length of `w` by bounded search:
/// rotations of the cyclic reduction are split into a commutator prefix
/// (decided exactly by the Wicks-form scan) and a shorter remainder. The
/// budget counts Wicks scans; when it runs out the answer is [`ClBound::Unknown`].
pub fn cl_upper_bound(w: &Word, budget: u32) -> Result<ClBound, SclError> {
    if !w.exponent_sums().is_empty() {
        return Err(SclError::NotInCommutatorSubgroup);
    }
    let mut budget = budget;
    match cl_search(w, &mut budget, 0) {
        Some((count, witnesses)) => {
            debug_assert!(verify_commutator_identity(w, &witnesses));
            Ok(ClBound::Bound { count, witnesses })
        }
        None => Ok(ClBound::Unknown),
    }
}

fn cl_search(w: &Word, budget: &mut u32, depth: u32) -> Option<(u32, Vec<(Word, Word)>)> {
    if w.is_identity() {
        return Some((0, Vec::new()));
    }
    if *budget == 0 || depth > 16 {
        return None;
    }
    *budget -= 1;
    if let Some(pair) = commutator_witness(w) {
        return Some((1, vec![pair]));
    }
    let (cyc, conj) = w.cyclic_reduce();
    let n = cyc.len();
    let letters = cyc.letters();
    let mut best: Option<(u32, Vec<(Word, Word)>)> = None;
    for rot in 0..n {
        for split in (4..n).step_by(2) {
            let prefix = Word::from_letters((0..split).map(|i| letters[(rot + i) % n]));
            if !prefix.exponent_sums().is_empty() {
                continue;
            }
            if *budget == 0 {
                return best;
            }
            *budget -= 1;
            let Some(pair) = commutator_witness(&prefix) else { continue };
            let rest = Word::from_letters((split..n).map(|i| letters[(rot + i) % n]));
            if let Some((count, rest_witnesses)) = cl_search(&rest, budget, depth + 1) {
                let total = count + 1;
                if best.as_ref().is_none_or(|(b, _)| total < *b) {
                    let g = conj.mul(&Word::from_letters(letters[..rot].iter().copied()));
                    let mut witnesses = vec![pair];
                    witnesses.extend(rest_witnesses);
                    let conjugated: Vec<(Word, Word)> = witnesses
                        .into_iter()
                        .map(|(x, y)| (x.conjugate_by(&g), y.conjugate_by(&g)))
                        .collect();
                    best = Some((total, conjugated));
                }
            }
        }
    }
    best
}
