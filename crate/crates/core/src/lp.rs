//! Two-phase dense simplex for linear programs with bounded variables, plus
//! a small branch-and-bound layer for binary variables.
//!
//! The solver works on the computational form `A x + s = b` with one slack
//! per row (`<=` rows get `s >= 0`, `>=` rows get `s <= 0`, `=` rows get
//! `s = 0`) and explicit lower/upper bounds on every column. Phase 1 starts
//! from signed artificial columns so the initial basis inverse is diagonal,
//! and minimizes total infeasibility; phase 2 freezes the artificials at
//! zero and minimizes the real objective. Nonbasic variables rest at a
//! finite bound (free variables at zero) and may flip bound-to-bound
//! without a basis change.
//!
//! Anti-cycling: Dantzig pricing switches to Bland's rule after
//! `3 * (rows + cols)` consecutive degenerate pivots.
//!
//! Infinite bounds are written as `f64::INFINITY` markers; no big-M
//! constants ever enter the tableau.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum number of binary variables [`solve_milp`] accepts.
pub const MAX_BINARIES: usize = 25;
/// Branch-and-bound depth cap (one level per fixed binary).
pub const MAX_BB_DEPTH: usize = 25;
/// Node budget for branch-and-bound; generous for 25 binaries at desk scale.
const MAX_BB_NODES: usize = 1_000_000;
/// A variable counts as integral when within this distance of 0 or 1.
const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("problem dimensions inconsistent: {0}")]
    DimensionMismatch(String),
    #[error("invalid bounds for variable {var}: lower {lower} > upper {upper}")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("variable {0} is flagged binary but its bounds exceed [0,1]")]
    BinaryBoundsExceeded(usize),
    #[error("coefficient or bound is NaN ({0})")]
    NotANumber(String),
    #[error("solve_lp cannot handle binary flags; use solve_milp")]
    BinaryNotAllowed,
    #[error("instance has {0} binary variables, the cap is {MAX_BINARIES}")]
    TooManyBinaries(usize),
    #[error("anti-cycling failed to terminate the simplex")]
    CycleDetected,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "min")]
    Minimize,
    #[serde(rename = "max")]
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self { coeffs, relation, rhs }
    }
}

/// A linear program over `vars` variables.
///
/// Bounds default to `[0, +inf)`; `f64::NEG_INFINITY` / `f64::INFINITY`
/// mark unbounded directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub binary: Vec<bool>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            binary: vec![false; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn set_binary(&mut self, var: usize) {
        self.binary[var] = true;
        self.lower[var] = self.lower[var].max(0.0);
        self.upper[var] = self.upper[var].min(1.0);
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        for (name, len) in [
            ("lower", self.lower.len()),
            ("upper", self.upper.len()),
            ("binary", self.binary.len()),
        ] {
            if len != n {
                return Err(LpError::DimensionMismatch(format!(
                    "{name} has length {len}, expected {n}"
                )));
            }
        }
        if self.objective.iter().any(|c| c.is_nan()) {
            return Err(LpError::NotANumber("objective".into()));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::DimensionMismatch(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(LpError::NotANumber(format!("constraint {i}")));
            }
        }
        for j in 0..n {
            let (lo, up) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || up.is_nan() {
                return Err(LpError::NotANumber(format!("bounds of variable {j}")));
            }
            if lo > up {
                return Err(LpError::InvalidBounds { var: j, lower: lo, upper: up });
            }
            if self.binary[j] && (lo < 0.0 || up > 1.0) {
                return Err(LpError::BinaryBoundsExceeded(j));
            }
        }
        Ok(())
    }

    /// Maximum residual of constraints and bounds at `x`, for feasibility checks.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.constraints {
            let lhs = dot(&row.coeffs, x);
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        worst
    }

    /// Magnitude reference for feasibility tolerances: the largest absolute
    /// coefficient, right-hand side, or finite bound (at least 1).
    pub fn scale(&self) -> f64 {
        let mut s = 1.0f64;
        for row in &self.constraints {
            s = s.max(row.rhs.abs());
            for &c in &row.coeffs {
                s = s.max(c.abs());
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value in the problem's own sense; meaningful only when Optimal.
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, iterations: usize) -> Self {
        Self { status, objective: f64::NAN, x: Vec::new(), iterations }
    }
}

pub fn solve_lp(p: &LinearProgram) -> Result<LpSolution, LpError> {
    p.validate()?;
    if p.binary.iter().any(|&b| b) {
        return Err(LpError::BinaryNotAllowed);
    }
    Simplex::new(p).solve()
}

/// Best-first branch-and-bound over the binary variables.
pub fn solve_milp(p: &LinearProgram) -> Result<LpSolution, LpError> {
    p.validate()?;
    let binaries: Vec<usize> =
        (0..p.num_vars()).filter(|&j| p.binary[j]).collect();
    if binaries.len() > MAX_BINARIES {
        return Err(LpError::TooManyBinaries(binaries.len()));
    }
    let mut relaxed = p.clone();
    relaxed.binary = vec![false; p.num_vars()];

    let root = Simplex::new(&relaxed).solve()?;
    let mut iterations = root.iterations;
    match root.status {
        LpStatus::Infeasible => return Ok(LpSolution::non_optimal(LpStatus::Infeasible, iterations)),
        // An unbounded relaxation recedes along continuous directions that no
        // binary fixing removes, so the mixed problem is unbounded or infeasible;
        // reported as Unbounded at this desk scale.
        LpStatus::Unbounded => return Ok(LpSolution::non_optimal(LpStatus::Unbounded, iterations)),
        LpStatus::Optimal => {}
    }
    if binaries.is_empty() {
        return Ok(root);
    }

    // Internally minimize: flip the sign for maximization problems.
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    struct Node {
        bound: f64,
        depth: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        x: Vec<f64>,
    }
    // Min-heap on the node bound; FIFO tie-break keeps the search deterministic.
    let mut heap = std::collections::BinaryHeap::new();
    let mut counter = 0usize;
    struct Entry(f64, usize, Node);
    impl PartialEq for Entry {
        fn eq(&self, other: &Self) -> bool {
            self.0 == other.0 && self.1 == other.1
        }
    }
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // Reversed: BinaryHeap is a max-heap, we want the smallest bound.
            other
                .0
                .total_cmp(&self.0)
                .then_with(|| other.1.cmp(&self.1))
        }
    }

    heap.push(Entry(
        sign * root.objective,
        counter,
        Node { bound: sign * root.objective, depth: 0, lower: relaxed.lower.clone(), upper: relaxed.upper.clone(), x: root.x },
    ));

    let mut incumbent: Option<LpSolution> = None;
    let mut incumbent_value = f64::INFINITY;
    let scale = p.scale();
    let mut nodes = 0usize;

    while let Some(Entry(_, _, node)) = heap.pop() {
        nodes += 1;
        if nodes > MAX_BB_NODES {
            return Err(LpError::Numerical("branch-and-bound node budget exceeded".into()));
        }
        if node.bound >= incumbent_value - 1e-9 * scale {
            continue;
        }
        // Most-fractional binary: the one farthest from an integer point.
        let mut branch_var = None;
        let mut best_score = INTEGRALITY_TOL;
        for &j in &binaries {
            let frac = (node.x[j] - node.x[j].round()).abs();
            if frac > best_score {
                best_score = frac;
                branch_var = Some(j);
            }
        }
        let Some(jb) = branch_var else {
            // Integer-feasible: re-solve with the binaries pinned to their
            // rounded values so the reported solution is exactly feasible.
            let mut fixed = relaxed.clone();
            for &j in &binaries {
                let v = node.x[j].round();
                fixed.lower[j] = v;
                fixed.upper[j] = v;
            }
            let sol = Simplex::new(&fixed).solve()?;
            iterations += sol.iterations;
            if sol.status == LpStatus::Optimal && sign * sol.objective < incumbent_value {
                incumbent_value = sign * sol.objective;
                incumbent = Some(sol);
            }
            continue;
        };
        if node.depth >= MAX_BB_DEPTH {
            return Err(LpError::Numerical("branch depth cap exceeded".into()));
        }
        for fix in [0.0f64, 1.0] {
            let mut child = relaxed.clone();
            child.lower = node.lower.clone();
            child.upper = node.upper.clone();
            child.lower[jb] = fix.max(node.lower[jb]);
            child.upper[jb] = fix.min(node.upper[jb]);
            if child.lower[jb] > child.upper[jb] {
                continue;
            }
            let sol = Simplex::new(&child).solve()?;
            iterations += sol.iterations;
            if sol.status != LpStatus::Optimal {
                continue;
            }
            let bound = sign * sol.objective;
            if bound >= incumbent_value - 1e-9 * scale {
                continue;
            }
            counter += 1;
            heap.push(Entry(
                bound,
                counter,
                Node { bound, depth: node.depth + 1, lower: child.lower, upper: child.upper, x: sol.x },
            ));
        }
    }

    match incumbent {
        Some(mut sol) => {
            sol.iterations = iterations;
            Ok(sol)
        }
        None => Ok(LpSolution::non_optimal(LpStatus::Infeasible, iterations)),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Internal bounded-variable simplex over the computational form.
struct Simplex {
    n_struct: usize,
    rows: usize,
    /// Total columns: structural + slack + artificial.
    cols: usize,
    tableau: Vec<Vec<f64>>,
    /// Basis-inverse image of the right-hand side (updated by pivots).
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Nonbasic resting values; meaningful for nonbasic columns only.
    value: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    cost: Vec<f64>,
    /// Original-sense sign: internal objective is `sign * user objective`.
    sign: f64,
    user_objective: Vec<f64>,
    scale: f64,
    iterations: usize,
    last_step_degenerate: bool,
    /// Kept for the final feasibility audit of the reported solution.
    problem: LinearProgram,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Simplex {
    fn new(p: &LinearProgram) -> Self {
        let n = p.num_vars();
        let m = p.constraints.len();
        let cols = n + 2 * m;
        let sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };

        let mut lower = Vec::with_capacity(cols);
        let mut upper = Vec::with_capacity(cols);
        lower.extend_from_slice(&p.lower);
        upper.extend_from_slice(&p.upper);
        for row in &p.constraints {
            // Slack bounds encode the relation.
            let (lo, up) = match row.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(up);
        }
        lower.extend(std::iter::repeat(0.0).take(m));
        upper.extend(std::iter::repeat(f64::INFINITY).take(m));

        // Nonbasic resting point: finite bound nearest zero, or zero if free.
        let mut value = vec![0.0; cols];
        for j in 0..n + m {
            value[j] = match (lower[j].is_finite(), upper[j].is_finite()) {
                (true, true) => {
                    if lower[j].abs() <= upper[j].abs() {
                        lower[j]
                    } else {
                        upper[j]
                    }
                }
                (true, false) => lower[j],
                (false, true) => upper[j],
                (false, false) => 0.0,
            };
        }

        // Residuals decide the artificial column signs so that the initial
        // basis matrix is diag(+-1) and the artificials start feasible.
        let mut tableau = vec![vec![0.0; cols]; m];
        let mut rhs = vec![0.0; m];
        let mut basis = Vec::with_capacity(m);
        let mut in_basis = vec![false; cols];
        for i in 0..m {
            let row = &p.constraints[i];
            let mut resid = row.rhs;
            for j in 0..n {
                resid -= row.coeffs[j] * value[j];
            }
            resid -= value[n + i];
            let sigma = if resid >= 0.0 { 1.0 } else { -1.0 };
            for j in 0..n {
                tableau[i][j] = sigma * row.coeffs[j];
            }
            tableau[i][n + i] = sigma;
            tableau[i][n + m + i] = 1.0;
            rhs[i] = sigma * row.rhs;
            basis.push(n + m + i);
            in_basis[n + m + i] = true;
        }

        let mut user_objective = vec![0.0; cols];
        for j in 0..n {
            user_objective[j] = p.objective[j];
        }

        Self {
            n_struct: n,
            rows: m,
            cols,
            tableau,
            rhs,
            lower,
            upper,
            value,
            basis,
            in_basis,
            cost: vec![0.0; cols],
            sign,
            user_objective,
            scale: p.scale(),
            iterations: 0,
            last_step_degenerate: false,
            problem: p.clone(),
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_struct + self.rows
    }

    /// Current basic variable values from the pivoted right-hand side and the
    /// nonbasic resting values; recomputed from scratch to avoid drift.
    fn basic_values(&self) -> Vec<f64> {
        let mut xb = self.rhs.clone();
        for j in 0..self.cols {
            if self.in_basis[j] || self.value[j] == 0.0 {
                continue;
            }
            let v = self.value[j];
            for i in 0..self.rows {
                xb[i] -= self.tableau[i][j] * v;
            }
        }
        xb
    }

    fn reduced_costs(&self) -> Vec<f64> {
        let mut d = self.cost.clone();
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = self.cost[bj];
            if cb == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                d[j] -= cb * self.tableau[i][j];
            }
        }
        d
    }

    fn solve(mut self) -> Result<LpSolution, LpError> {
        // Phase 1: minimize the total artificial mass.
        for j in 0..self.cols {
            self.cost[j] = if self.is_artificial(j) { 1.0 } else { 0.0 };
        }
        let status = self.optimize(true)?;
        if matches!(status, LpStatus::Unbounded) {
            return Err(LpError::Numerical("phase 1 reported unbounded".into()));
        }
        let xb = self.basic_values();
        let infeasibility: f64 = self
            .basis
            .iter()
            .enumerate()
            .filter(|&(_, &j)| self.is_artificial(j))
            .map(|(i, _)| xb[i].abs())
            .sum();
        if infeasibility > 1e-7 * self.scale {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible, self.iterations));
        }

        self.evict_artificials();
        for j in 0..self.cols {
            if self.is_artificial(j) {
                // Freeze: a leftover basic artificial marks a redundant row and
                // must stay pinned at zero through phase 2.
                self.lower[j] = 0.0;
                self.upper[j] = 0.0;
                if !self.in_basis[j] {
                    self.value[j] = 0.0;
                }
            }
            self.cost[j] = self.sign * self.user_objective[j];
        }

        let status = self.optimize(false)?;
        if matches!(status, LpStatus::Unbounded) {
            return Ok(LpSolution::non_optimal(LpStatus::Unbounded, self.iterations));
        }

        let xb = self.basic_values();
        let mut full = self.value.clone();
        for (i, &bj) in self.basis.iter().enumerate() {
            full[bj] = xb[i];
        }
        let x: Vec<f64> = full[..self.n_struct].to_vec();
        if self.problem.violation(&x) > 1e-6 * self.scale {
            return Err(LpError::Numerical(format!(
                "reported optimum violates feasibility by {:e}",
                self.problem.violation(&x)
            )));
        }
        let objective = dot(&self.user_objective[..self.n_struct], &x);
        Ok(LpSolution { status: LpStatus::Optimal, objective, x, iterations: self.iterations })
    }

    /// Pivot basic artificials out wherever a non-artificial column can take
    /// their place; rows with no such column are redundant.
    fn evict_artificials(&mut self) {
        for i in 0..self.rows {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            let replacement = (0..self.n_struct + self.rows)
                .find(|&j| !self.in_basis[j] && self.tableau[i][j].abs() > 1e-7);
            if let Some(j) = replacement {
                self.pivot(i, j);
            }
        }
    }

    fn optimize(&mut self, phase_one: bool) -> Result<LpStatus, LpError> {
        let max_iters = 2000 + 500 * (self.rows + self.cols);
        let bland_after = 3 * (self.rows + self.cols);
        let mut degenerate_streak = 0usize;
        let tol_d = 1e-9 * self.cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));

        loop {
            if self.iterations > max_iters {
                return Err(LpError::CycleDetected);
            }
            if phase_one {
                // Early exit once feasible: all artificial mass gone.
                let xb = self.basic_values();
                let mass: f64 = self
                    .basis
                    .iter()
                    .enumerate()
                    .filter(|&(_, &j)| self.is_artificial(j))
                    .map(|(i, _)| xb[i].abs())
                    .sum();
                let nb_mass: f64 = (0..self.cols)
                    .filter(|&j| self.is_artificial(j) && !self.in_basis[j])
                    .map(|j| self.value[j].abs())
                    .sum();
                if mass + nb_mass <= 1e-10 * self.scale {
                    return Ok(LpStatus::Optimal);
                }
            }
            let bland = degenerate_streak > bland_after;
            match self.step(phase_one, bland, tol_d)? {
                Step::Optimal => return Ok(LpStatus::Optimal),
                Step::Unbounded => return Ok(LpStatus::Unbounded),
                Step::Moved => {}
            }
            self.iterations += 1;
            if self.last_step_degenerate {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.tableau[row][col];
        let inv = 1.0 / piv;
        for j in 0..self.cols {
            self.tableau[row][j] *= inv;
        }
        self.rhs[row] *= inv;
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let factor = self.tableau[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                self.tableau[i][j] -= factor * self.tableau[row][j];
            }
            self.rhs[i] -= factor * self.rhs[row];
        }
        let leaving = self.basis[row];
        self.in_basis[leaving] = false;
        self.basis[row] = col;
        self.in_basis[col] = true;
    }

    fn step(&mut self, phase_one: bool, bland: bool, tol_d: f64) -> Result<Step, LpError> {
        let d = self.reduced_costs();

        // Entering column and movement direction.
        let mut entering: Option<(usize, f64, f64)> = None; // (col, dir, score)
        for j in 0..self.cols {
            if self.in_basis[j] {
                continue;
            }
            if !phase_one && self.is_artificial(j) {
                continue;
            }
            if self.lower[j] == self.upper[j] {
                continue;
            }
            let at_lower = self.value[j] == self.lower[j] && self.lower[j].is_finite();
            let at_upper = self.value[j] == self.upper[j] && self.upper[j].is_finite();
            let dir = if at_lower && at_upper {
                continue;
            } else if at_lower {
                if d[j] < -tol_d {
                    1.0
                } else {
                    continue;
                }
            } else if at_upper {
                if d[j] > tol_d {
                    -1.0
                } else {
                    continue;
                }
            } else {
                // Free variable resting at zero.
                if d[j] < -tol_d {
                    1.0
                } else if d[j] > tol_d {
                    -1.0
                } else {
                    continue;
                }
            };
            if bland {
                entering = Some((j, dir, 0.0));
                break;
            }
            let score = d[j].abs();
            if entering.map_or(true, |(_, _, s)| score > s) {
                entering = Some((j, dir, score));
            }
        }
        let Some((e, dir, _)) = entering else {
            self.last_step_degenerate = false;
            return Ok(Step::Optimal);
        };

        // Ratio test: the entering variable moves by t*dir from its resting
        // value; basic variable i changes by -dir*t*T[i][e].
        let xb = self.basic_values();
        let span = self.upper[e] - self.lower[e]; // may be infinite
        let mut t_best = if span.is_finite() { span } else { f64::INFINITY };
        let mut blocking: Option<(usize, bool)> = None; // (row, leaves_at_lower)

        for i in 0..self.rows {
            let g = dir * self.tableau[i][e];
            if g.abs() <= 1e-11 {
                continue;
            }
            let bi = self.basis[i];
            let (limit, at_lower) = if g > 0.0 {
                if self.lower[bi].is_finite() {
                    ((xb[i] - self.lower[bi]) / g, true)
                } else {
                    continue;
                }
            } else if self.upper[bi].is_finite() {
                ((self.upper[bi] - xb[i]) / (-g), false)
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let replace = match blocking {
                None => limit < t_best - 1e-12,
                Some((r, _)) => {
                    if bland {
                        // Anti-cycling: smallest leaving variable index on ties.
                        limit < t_best - 1e-12
                            || (limit <= t_best + 1e-12 && bi < self.basis[r])
                    } else {
                        limit < t_best - 1e-12
                            || (limit <= t_best + 1e-12
                                && self.tableau[i][e].abs() > self.tableau[r][e].abs())
                    }
                }
            };
            if replace {
                t_best = limit.min(if span.is_finite() { span } else { f64::INFINITY });
                blocking = Some((i, at_lower));
            }
        }

        if t_best.is_infinite() {
            self.last_step_degenerate = false;
            return Ok(Step::Unbounded);
        }
        self.last_step_degenerate = t_best <= 1e-12;

        match blocking {
            Some((row, leaves_at_lower)) if span.is_infinite() || t_best < span - 1e-12 => {
                let leaving = self.basis[row];
                let new_value = self.value[e] + dir * t_best;
                self.pivot(row, e);
                self.value[leaving] =
                    if leaves_at_lower { self.lower[leaving] } else { self.upper[leaving] };
                // value[] only matters for nonbasic columns; basic_values()
                // reads basic values off the pivoted tableau.
                self.value[e] = new_value;
                Ok(Step::Moved)
            }
            _ => {
                // Bound-to-bound flip, no basis change. Snap exactly so the
                // at_lower/at_upper classification stays byte-exact.
                self.value[e] = if dir > 0.0 { self.upper[e] } else { self.lower[e] };
                Ok(Step::Moved)
            }
        }
    }
}
