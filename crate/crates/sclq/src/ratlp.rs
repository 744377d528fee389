//! Exact rational linear programming.
//!
//! Programs are in equality standard form: minimize `c^T x` subject to
//! `A x = b`, `x >= 0`, everything a rational number. The solver is a dense
//! revised simplex over exact rationals with Bland's rule for anti-cycling,
//! so every answer comes with an exact certificate: optimal solutions carry
//! dual values with zero gap, infeasible programs a Farkas vector, unbounded
//! programs an improving ray.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::Rat;

/// A sparse column: `(row, coefficient)` pairs sorted by row, no zeros.
pub type SparseCol = Vec<(usize, Rat)>;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// `min c^T x  s.t.  A x = b, x >= 0` with `A` stored column-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    objective: Vec<Rat>,
    columns: Vec<SparseCol>,
    rhs: Vec<Rat>,
}

impl LinearProgram {
    pub fn new(
        objective: Vec<Rat>,
        columns: Vec<SparseCol>,
        rhs: Vec<Rat>,
    ) -> Result<LinearProgram, LpError> {
        if objective.len() != columns.len() {
            return Err(LpError::DimensionMismatch(format!(
                "{} objective entries for {} columns",
                objective.len(),
                columns.len()
            )));
        }
        let m = rhs.len();
        for (j, col) in columns.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for (row, coeff) in col {
                if *row >= m {
                    return Err(LpError::DimensionMismatch(format!(
                        "column {j} touches row {row} but there are only {m} rows"
                    )));
                }
                if prev.is_some_and(|p| p >= *row) {
                    return Err(LpError::DimensionMismatch(format!(
                        "column {j} is not sorted by row"
                    )));
                }
                if coeff.is_zero() {
                    return Err(LpError::DimensionMismatch(format!(
                        "column {j} stores an explicit zero"
                    )));
                }
                prev = Some(*row);
            }
        }
        Ok(LinearProgram { objective, columns, rhs })
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn objective(&self) -> &[Rat] {
        &self.objective
    }

    pub fn columns(&self) -> &[SparseCol] {
        &self.columns
    }

    pub fn rhs(&self) -> &[Rat] {
        &self.rhs
    }

    /// Extend the program with extra `(cost, column)` pairs. A primal
    /// solution of the old program, padded with zeros, stays feasible.
    pub fn add_columns(&self, extra: &[(Rat, SparseCol)]) -> Result<LinearProgram, LpError> {
        let mut objective = self.objective.clone();
        let mut columns = self.columns.clone();
        for (cost, col) in extra {
            objective.push(cost.clone());
            columns.push(col.clone());
        }
        LinearProgram::new(objective, columns, self.rhs.clone())
    }
}

/// Entering-variable selection. All rules fall back to Bland's rule after a
/// run of degenerate pivots, so termination is guaranteed for each of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Smallest eligible index; never cycles.
    #[default]
    Bland,
    /// Most negative reduced cost, ties to the smallest index.
    Dantzig,
    /// Pseudorandom choice among eligible columns, reproducible per seed.
    Seeded(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpSolution {
    Optimal { value: Rat, primal: Vec<Rat>, dual: Vec<Rat> },
    /// `farkas^T A <= 0` componentwise while `farkas^T b > 0`.
    Infeasible { farkas: Vec<Rat> },
    /// `A ray = 0`, `ray >= 0`, `c^T ray < 0`.
    Unbounded { ray: Vec<Rat> },
}

impl LpSolution {
    pub fn value(&self) -> Option<&Rat> {
        match self {
            LpSolution::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn primal(&self) -> Option<&[Rat]> {
        match self {
            LpSolution::Optimal { primal, .. } => Some(primal),
            _ => None,
        }
    }

    pub fn dual(&self) -> Option<&[Rat]> {
        match self {
            LpSolution::Optimal { dual, .. } => Some(dual),
            _ => None,
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with(lp, PivotRule::Bland)
}

pub fn solve_with(lp: &LinearProgram, rule: PivotRule) -> Result<LpSolution, LpError> {
    // Re-validate: the constructor checks this too, but fields can be cloned
    // around and the solver must never index out of bounds.
    let checked = LinearProgram::new(lp.objective.clone(), lp.columns.clone(), lp.rhs.clone())?;
    Ok(Simplex::new(&checked, rule).run())
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    rule: PivotRule,
    m: usize,
    /// Rows multiplied by -1 so that the right-hand side is nonnegative.
    flipped: Vec<bool>,
    binv: Vec<Vec<Rat>>,
    /// Basic variable per row; indices >= num_cols denote artificials.
    basis: Vec<usize>,
    x_basic: Vec<Rat>,
    /// Rows kept after redundancy elimination (indices into the original rows).
    live_rows: Vec<usize>,
    degenerate_streak: usize,
    pivots: u64,
}

enum PhaseOutcome {
    Optimal,
    Unbounded { entering: usize, direction: Vec<Rat> },
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, rule: PivotRule) -> Simplex<'a> {
        let m = lp.num_rows();
        let flipped: Vec<bool> = lp.rhs.iter().map(|b| b.is_negative()).collect();
        let rhs: Vec<Rat> =
            lp.rhs.iter().zip(&flipped).map(|(b, f)| if *f { -b.clone() } else { b.clone() }).collect();
        let binv = identity(m);
        let basis: Vec<usize> = (0..m).map(|i| lp.num_cols() + i).collect();
        let x_basic = rhs;
        Simplex {
            lp,
            rule,
            m,
            flipped,
            binv,
            basis,
            x_basic,
            live_rows: (0..m).collect(),
            degenerate_streak: 0,
            pivots: 0,
        }
    }

    /// Column entries with the row sign flips applied, restricted to live rows.
    fn column(&self, j: usize) -> Vec<(usize, Rat)> {
        let n = self.lp.num_cols();
        if j >= n {
            // Artificial for original row `j - n`; dead once its row is dropped.
            let orig = j - n;
            return match self.live_rows.iter().position(|r| *r == orig) {
                Some(i) => vec![(i, Rat::one())],
                None => Vec::new(),
            };
        }
        let mut out = Vec::new();
        for (row, coeff) in &self.lp.columns[j] {
            if let Some(i) = self.live_rows.iter().position(|r| r == row) {
                let c = if self.flipped[*row] { -coeff.clone() } else { coeff.clone() };
                out.push((i, c));
            }
        }
        out
    }

    fn run(mut self) -> LpSolution {
        // Phase 1: minimize the sum of artificials from the identity basis.
        let n = self.lp.num_cols();
        let phase1_cost = |j: usize| if j >= n { Rat::one() } else { Rat::zero() };
        match self.optimize(&phase1_cost, true) {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded { .. } => {
                unreachable!("phase 1 objective is bounded below by zero")
            }
        }
        let infeasibility: Rat =
            self.basis.iter().zip(&self.x_basic).filter(|(j, _)| **j >= n).map(|(_, x)| x.clone()).sum();
        if !infeasibility.is_zero() {
            let y = self.duals(&phase1_cost);
            return LpSolution::Infeasible { farkas: self.unflip(&y) };
        }
        self.purge_artificials();

        // Phase 2 on the original objective.
        let objective = self.lp.objective.clone();
        let cost = move |j: usize| objective[j].clone();
        match self.optimize(&cost, false) {
            PhaseOutcome::Optimal => {
                let mut primal = vec![Rat::zero(); n];
                for (i, j) in self.basis.iter().enumerate() {
                    primal[*j] = self.x_basic[i].clone();
                }
                let value: Rat =
                    primal.iter().zip(&self.lp.objective).map(|(x, c)| x * c).sum();
                let dual = self.unflip(&self.duals(&cost));
                LpSolution::Optimal { value, primal, dual }
            }
            PhaseOutcome::Unbounded { entering, direction } => {
                let mut ray = vec![Rat::zero(); n];
                ray[entering] = Rat::one();
                for (i, j) in self.basis.iter().enumerate() {
                    if !direction[i].is_zero() {
                        ray[*j] = -direction[i].clone();
                    }
                }
                LpSolution::Unbounded { ray }
            }
        }
    }

    /// Bland-safeguarded simplex loop for one phase.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> Rat, allow_artificial: bool) -> PhaseOutcome {
        loop {
            let y = self.duals(cost);
            let entering = match self.pick_entering(cost, &y, allow_artificial) {
                Some(j) => j,
                None => return PhaseOutcome::Optimal,
            };
            let direction = self.apply_binv(&self.column(entering));
            let Some(leaving) = self.pick_leaving(&direction) else {
                return PhaseOutcome::Unbounded { entering, direction };
            };
            self.pivot(entering, leaving, &direction);
        }
    }

    /// `y = c_B^T B^-1` over the live rows.
    fn duals(&self, cost: &dyn Fn(usize) -> Rat) -> Vec<Rat> {
        let k = self.live_rows.len();
        let mut y = vec![Rat::zero(); k];
        for (i, j) in self.basis.iter().enumerate() {
            let c = cost(*j);
            if c.is_zero() {
                continue;
            }
            for (col, yv) in y.iter_mut().enumerate() {
                *yv += &c * &self.binv[i][col];
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: &dyn Fn(usize) -> Rat, y: &[Rat]) -> Rat {
        let mut rc = cost(j);
        for (row, coeff) in self.column(j) {
            rc -= &y[row] * &coeff;
        }
        rc
    }

    fn pick_entering(
        &mut self,
        cost: &dyn Fn(usize) -> Rat,
        y: &[Rat],
        allow_artificial: bool,
    ) -> Option<usize> {
        let n = self.lp.num_cols();
        let total = if allow_artificial { n + self.m } else { n };
        let bland = matches!(self.rule, PivotRule::Bland)
            || self.degenerate_streak > 4 * (self.m + n);
        let mut eligible: Vec<(usize, Rat)> = Vec::new();
        for j in 0..total {
            if self.basis.contains(&j) {
                continue;
            }
            let rc = self.reduced_cost(j, cost, y);
            if rc.is_negative() {
                if bland {
                    return Some(j);
                }
                eligible.push((j, rc));
            }
        }
        if eligible.is_empty() {
            return None;
        }
        match self.rule {
            PivotRule::Bland => unreachable!(),
            PivotRule::Dantzig => {
                let mut best = 0;
                for k in 1..eligible.len() {
                    if eligible[k].1 < eligible[best].1 {
                        best = k;
                    }
                }
                Some(eligible[best].0)
            }
            PivotRule::Seeded(seed) => {
                let h = splitmix(seed ^ self.pivots.wrapping_mul(0x9e3779b97f4a7c15));
                Some(eligible[(h % eligible.len() as u64) as usize].0)
            }
        }
    }

    fn pick_leaving(&self, direction: &[Rat]) -> Option<usize> {
        let mut best: Option<(usize, Rat)> = None;
        for (i, d) in direction.iter().enumerate() {
            if !d.is_positive() {
                continue;
            }
            let ratio = &self.x_basic[i] / d;
            match &best {
                None => best = Some((i, ratio)),
                Some((bi, br)) => {
                    // Bland tie-break: smallest basic variable index.
                    if ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]) {
                        best = Some((i, ratio));
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, entering: usize, leaving: usize, direction: &[Rat]) {
        let k = self.live_rows.len();
        let theta = &self.x_basic[leaving] / &direction[leaving];
        if theta.is_zero() {
            self.degenerate_streak += 1;
        } else {
            self.degenerate_streak = 0;
        }
        self.pivots += 1;

        let pivot_val = direction[leaving].clone();
        for col in 0..k {
            self.binv[leaving][col] = &self.binv[leaving][col] / &pivot_val;
        }
        for i in 0..k {
            if i == leaving || direction[i].is_zero() {
                continue;
            }
            for col in 0..k {
                let delta = &direction[i] * &self.binv[leaving][col];
                self.binv[i][col] -= delta;
            }
            let dx = &direction[i] * &theta;
            self.x_basic[i] -= dx;
        }
        self.x_basic[leaving] = theta;
        self.basis[leaving] = entering;
    }

    /// `B^-1 a` for a sparse column over live rows.
    fn apply_binv(&self, col: &[(usize, Rat)]) -> Vec<Rat> {
        let k = self.live_rows.len();
        let mut out = vec![Rat::zero(); k];
        for (i, row) in out.iter_mut().enumerate() {
            for (r, coeff) in col {
                *row += &self.binv[i][*r] * coeff;
            }
        }
        out
    }

    /// Pivot leftover artificials out of the phase-1 basis; rows where that is
    /// impossible are linearly dependent and get dropped.
    fn purge_artificials(&mut self) {
        let n = self.lp.num_cols();
        loop {
            let Some(row) = self.basis.iter().position(|j| *j >= n) else { break };
            debug_assert!(self.x_basic[row].is_zero());
            let mut replaced = false;
            for j in 0..n {
                if self.basis.contains(&j) {
                    continue;
                }
                let direction = self.apply_binv(&self.column(j));
                if !direction[row].is_zero() {
                    self.pivot(j, row, &direction);
                    replaced = true;
                    break;
                }
            }
            if !replaced {
                self.drop_row(row);
            }
        }
    }

    fn drop_row(&mut self, row: usize) {
        self.live_rows.remove(row);
        self.basis.remove(row);
        self.x_basic.remove(row);
        let k = self.live_rows.len();
        // Reinvert the remaining basis from scratch; dropping a dependent row
        // keeps the restricted basis square and invertible.
        let mut basis_mat = vec![vec![Rat::zero(); k]; k];
        for (col_idx, j) in self.basis.clone().iter().enumerate() {
            for (i, coeff) in self.column(*j) {
                basis_mat[i][col_idx] = coeff;
            }
        }
        self.binv = invert(basis_mat).expect("restricted basis stays invertible");
        let rhs: Vec<Rat> = self
            .live_rows
            .iter()
            .map(|r| if self.flipped[*r] { -self.lp.rhs[*r].clone() } else { self.lp.rhs[*r].clone() })
            .collect();
        self.x_basic = (0..k)
            .map(|i| (0..k).map(|c| &self.binv[i][c] * &rhs[c]).sum())
            .collect();
    }

    /// Duals indexed by original rows, with the sign flips undone and dropped
    /// rows reported as zero.
    fn unflip(&self, y: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.m];
        for (i, row) in self.live_rows.iter().enumerate() {
            out[*row] = if self.flipped[*row] { -y[i].clone() } else { y[i].clone() };
        }
        out
    }
}

fn identity(m: usize) -> Vec<Vec<Rat>> {
    let mut out = vec![vec![Rat::zero(); m]; m];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = Rat::one();
    }
    out
}

/// Gauss-Jordan inverse of a square rational matrix.
fn invert(mut mat: Vec<Vec<Rat>>) -> Option<Vec<Vec<Rat>>> {
    let k = mat.len();
    let mut inv = identity(k);
    for col in 0..k {
        let pivot_row = (col..k).find(|r| !mat[*r][col].is_zero())?;
        mat.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = mat[col][col].clone();
        for c in 0..k {
            mat[col][c] = &mat[col][c] / &pivot;
            inv[col][c] = &inv[col][c] / &pivot;
        }
        for r in 0..k {
            if r == col || mat[r][col].is_zero() {
                continue;
            }
            let factor = mat[r][col].clone();
            for c in 0..k {
                let dm = &factor * &mat[col][c];
                mat[r][c] -= dm;
                let di = &factor * &inv[col][c];
                inv[r][c] -= di;
            }
        }
    }
    Some(inv)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// Plain-text dump format, consumed by the `lp` CLI subcommand.
// ---------------------------------------------------------------------------

/// Render as the debug dump format:
///
/// ```text
/// minimize
/// 1 0 3/2
/// subject-to
/// 1 -1 0 = 3
/// ```
pub fn write_debug_dump(lp: &LinearProgram) -> String {
    let mut out = String::from("minimize\n");
    let cells: Vec<String> = lp.objective.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "{}", cells.join(" "));
    out.push_str("subject-to\n");
    for i in 0..lp.num_rows() {
        let mut row = vec![Rat::zero(); lp.num_cols()];
        for (j, col) in lp.columns.iter().enumerate() {
            for (r, coeff) in col {
                if *r == i {
                    row[j] = coeff.clone();
                }
            }
        }
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "{} = {}", cells.join(" "), lp.rhs[i]);
    }
    out
}

pub fn parse_debug_dump(text: &str) -> Result<LinearProgram, String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    if lines.next() != Some("minimize") {
        return Err("expected `minimize` header".to_string());
    }
    let obj_line = lines.next().ok_or("missing objective row")?;
    let objective: Vec<Rat> = parse_cells(obj_line)?;
    if lines.next() != Some("subject-to") {
        return Err("expected `subject-to` header".to_string());
    }
    let n = objective.len();
    let mut columns: Vec<SparseCol> = vec![Vec::new(); n];
    let mut rhs = Vec::new();
    for (i, line) in lines.enumerate() {
        let (lhs, rhs_text) =
            line.split_once('=').ok_or_else(|| format!("row {i}: missing `=`"))?;
        let coeffs = parse_cells(lhs)?;
        if coeffs.len() != n {
            return Err(format!("row {i}: {} coefficients for {} columns", coeffs.len(), n));
        }
        for (j, c) in coeffs.into_iter().enumerate() {
            if !c.is_zero() {
                columns[j].push((i, c));
            }
        }
        rhs.push(crate::parse_rational(rhs_text)?);
    }
    LinearProgram::new(objective, columns, rhs).map_err(|e| e.to_string())
}

fn parse_cells(line: &str) -> Result<Vec<Rat>, String> {
    line.split_whitespace().map(crate::parse_rational).collect()
}
