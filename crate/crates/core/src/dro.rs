//! Distributionally robust optimization over discrete scenario sets:
//! `min_x sup_{p in P} sum_k p_k f(x, s_k)` with linear (`f = s'x`) or
//! convex-quadratic (`f = x'Qx`) scenario objectives.
//!
//! Two solvers are provided. [`solve_box_dual`] reformulates the box-
//! ambiguity inner supremum by LP duality into one linear (or mixed-binary)
//! program over `(x, z, lambda, mu)`. [`solve_cutting_plane`] is an outer
//! approximation that alternates a master LP (epigraph variable `t` plus
//! accumulated cuts) with the exact worst-case oracle of the `ambiguity`
//! module, and works for every ambiguity variant and both objective kinds;
//! binaries are handled by branch-and-bound around the continuous routine
//! with a shared cut pool (cuts fix a distribution, so they stay valid under
//! any bound fixing).
//!
//! [`reduce_and_solve`] runs the full pipeline: cluster the scenarios,
//! project the ambiguity set, solve the original and reduced problems with
//! the same routine, evaluate the reduced minimizer under the original
//! ambiguity, and verify the `alpha * beta` approximation certificate.

use crate::ambiguity::{
    project, worst_case_expectation, AggregationMatrix, AmbiguityError, AmbiguitySet,
};
use crate::clustering::{
    hyperrect_partition, kmeans_partition, optimal_partition, ClusterError, Partition,
};
use crate::lp::{
    solve_lp, solve_milp, LinearProgram, LpError, LpStatus, Relation, Sense, MAX_BINARIES,
};
use crate::matrix_clustering::{
    frobenius_kmeans, optimal_matrix_partition, MatrixClusterError, MatrixPartition,
};
use crate::scenarios::{MatrixScenarioSet, ScenarioError, ScenarioSet};
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

/// Oracle/master iteration cap for the cutting-plane loop.
pub const MAX_CUT_ITERATIONS: usize = 500;
/// Node cap for the binary branch-and-bound around the cutting plane.
pub const MAX_CUT_BB_NODES: usize = 100_000;

const INT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DroError {
    #[error("ambiguity variant {found} not supported here (need {expected})")]
    AmbiguityMismatch { expected: &'static str, found: &'static str },
    #[error("objective kind not supported here: {0}")]
    ObjectiveMismatch(&'static str),
    #[error("instance is inconsistent: {0}")]
    InvalidInstance(String),
    #[error("candidate x violates the feasible set by {violation:e}")]
    InfeasibleX { violation: f64 },
    #[error("feasible set is empty")]
    Infeasible,
    #[error("problem is unbounded below")]
    Unbounded,
    #[error("cutting plane hit the {iterations}-iteration cap with gap {gap:e} at value {value}")]
    IterationLimit { iterations: usize, gap: f64, value: f64 },
    #[error("branch and bound hit the {nodes}-node cap (incumbent {incumbent:?})")]
    NodeLimit { nodes: usize, incumbent: Option<f64> },
    #[error("reduction method unavailable: {0}")]
    MethodUnavailable(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Ambiguity(#[from] AmbiguityError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    MatrixCluster(#[from] MatrixClusterError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Scenario-indexed objective: linear costs or quadratic forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DroObjective {
    Linear { scenarios: ScenarioSet },
    Quadratic { scenarios: MatrixScenarioSet },
}

impl DroObjective {
    pub fn n_scenarios(&self) -> usize {
        match self {
            DroObjective::Linear { scenarios } => scenarios.len(),
            DroObjective::Quadratic { scenarios } => scenarios.len(),
        }
    }

    /// Decision-vector dimension the objective expects.
    pub fn n_vars(&self) -> usize {
        match self {
            DroObjective::Linear { scenarios } => scenarios.dim(),
            DroObjective::Quadratic { scenarios } => scenarios.dim(),
        }
    }

    /// `f(x, s_k)` for every scenario.
    pub fn values_at(&self, x: &[f64]) -> Vec<f64> {
        match self {
            DroObjective::Linear { scenarios } => (0..scenarios.len())
                .map(|k| scenarios.scenario(k).iter().zip(x).map(|(&s, &xi)| s * xi).sum())
                .collect(),
            DroObjective::Quadratic { scenarios } => (0..scenarios.len())
                .map(|k| {
                    let q = scenarios.scenario(k);
                    let qx = q.matvec(x).expect("dimension checked at construction");
                    x.iter().zip(&qx).map(|(&a, &b)| a * b).sum()
                })
                .collect(),
        }
    }
}

/// Polyhedral feasible set with optional binary flags, always inside the
/// nonnegative orthant (required for the monotonicity the reduction
/// guarantee relies on).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSet {
    pub n: usize,
    #[serde(default)]
    pub constraints: Vec<crate::lp::Constraint>,
    #[serde(default)]
    pub lower: Vec<f64>,
    #[serde(default)]
    pub upper: Vec<f64>,
    #[serde(default)]
    pub binary: Vec<bool>,
}

impl FeasibleSet {
    /// Free nonnegative variables.
    pub fn nonneg(n: usize) -> Self {
        Self {
            n,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            binary: vec![false; n],
        }
    }

    /// All variables pinned to the given point.
    pub fn fixed(x: Vec<f64>) -> Self {
        let n = x.len();
        Self {
            n,
            constraints: Vec::new(),
            lower: x.clone(),
            upper: x,
            binary: vec![false; n],
        }
    }

    /// The probability simplex `{x >= 0, sum x = 1}`.
    pub fn simplex(n: usize) -> Self {
        let mut set = Self::nonneg(n);
        for j in 0..n {
            set.upper[j] = 1.0;
        }
        set.constraints.push(crate::lp::Constraint::new(vec![1.0; n], Relation::Eq, 1.0));
        set
    }

    /// Markowitz feasible set: portfolio weights on the simplex with an
    /// expected-return floor `mu' w >= r_target`.
    pub fn markowitz(mu: Vec<f64>, r_target: f64) -> Self {
        let mut set = Self::simplex(mu.len());
        set.constraints.push(crate::lp::Constraint::new(mu, Relation::Ge, r_target));
        set
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(crate::lp::Constraint::new(coeffs, relation, rhs));
    }

    pub fn set_binary(&mut self, var: usize) {
        self.binary[var] = true;
        self.lower[var] = 0.0;
        self.upper[var] = 1.0;
    }

    /// Expands bound/flag vectors omitted from a sparse document to their
    /// defaults: lower 0, upper unbounded, nothing binary.
    pub fn fill_defaults(&mut self) {
        if self.lower.is_empty() {
            self.lower = vec![0.0; self.n];
        }
        if self.upper.is_empty() {
            self.upper = vec![f64::INFINITY; self.n];
        }
        if self.binary.is_empty() {
            self.binary = vec![false; self.n];
        }
    }

    fn validate(&self) -> Result<(), DroError> {
        if self.lower.len() != self.n || self.upper.len() != self.n || self.binary.len() != self.n
        {
            return Err(DroError::InvalidInstance(format!(
                "bound/flag lengths disagree with n = {}",
                self.n
            )));
        }
        for j in 0..self.n {
            if self.lower[j] < 0.0 {
                return Err(DroError::InvalidInstance(format!(
                    "variable {j} admits negative values (lower bound {}); the guarantee needs X inside the nonnegative orthant",
                    self.lower[j]
                )));
            }
        }
        for c in &self.constraints {
            if c.coeffs.len() != self.n {
                return Err(DroError::InvalidInstance(format!(
                    "constraint has {} coefficients for {} variables",
                    c.coeffs.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Worst constraint/bound violation of `x`, same convention as the LP
    /// module.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let probe = self.to_lp(vec![0.0; self.n], Sense::Minimize, 0);
        probe.violation(x)
    }

    fn scale(&self) -> f64 {
        self.to_lp(vec![0.0; self.n], Sense::Minimize, 0).scale()
    }

    /// Embeds the feasible set into a fresh LP whose variable vector is the
    /// decision vector followed by `extra` auxiliary columns; the embedded
    /// constraint rows are zero-padded to the full width, and the auxiliary
    /// columns start at the default bounds `[0, inf)`.
    fn to_lp(&self, objective: Vec<f64>, sense: Sense, extra: usize) -> LinearProgram {
        let total = self.n + extra;
        debug_assert_eq!(objective.len(), total);
        let mut lp = LinearProgram::new(sense, objective);
        for c in &self.constraints {
            let mut coeffs = vec![0.0; total];
            coeffs[..self.n].copy_from_slice(&c.coeffs);
            lp.add_constraint(coeffs, c.relation, c.rhs);
        }
        for j in 0..self.n {
            lp.set_bounds(j, self.lower[j], self.upper[j]);
            if self.binary[j] {
                lp.set_binary(j);
            }
        }
        lp
    }
}

/// A full DRO instance: scenario objective, feasible set, ambiguity set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DroInstanceData")]
pub struct DroInstance {
    pub objective: DroObjective,
    pub feasible: FeasibleSet,
    pub ambiguity: AmbiguitySet,
}

#[derive(Deserialize)]
struct DroInstanceData {
    objective: DroObjective,
    feasible: FeasibleSet,
    ambiguity: AmbiguitySet,
}

impl TryFrom<DroInstanceData> for DroInstance {
    type Error = DroError;

    fn try_from(d: DroInstanceData) -> Result<Self, DroError> {
        DroInstance::new(d.objective, d.feasible, d.ambiguity)
    }
}

impl DroInstance {
    pub fn new(
        objective: DroObjective,
        mut feasible: FeasibleSet,
        ambiguity: AmbiguitySet,
    ) -> Result<Self, DroError> {
        feasible.fill_defaults();
        feasible.validate()?;
        if objective.n_vars() != feasible.n {
            return Err(DroError::InvalidInstance(format!(
                "objective expects {} variables, feasible set has {}",
                objective.n_vars(),
                feasible.n
            )));
        }
        if ambiguity.n_atoms() != objective.n_scenarios() {
            return Err(DroError::InvalidInstance(format!(
                "ambiguity has {} atoms for {} scenarios",
                ambiguity.n_atoms(),
                objective.n_scenarios()
            )));
        }
        Ok(Self { objective, feasible, ambiguity })
    }
}

/// Solver output; `x` is feasible within 1e-7 of the instance scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub wall_time_s: f64,
    pub method: String,
    pub iterations: usize,
}

/// Solves a linear-objective instance with box (or simplex) ambiguity by
/// dualizing the inner supremum:
///
/// ```text
/// min  z - l'lambda + u'mu
/// s.t. z - lambda_k + mu_k >= s_k' x   for every scenario k
///      x in X, lambda >= 0, mu >= 0, z free
/// ```
///
/// A simplex ambiguity set is the box `[0, 1]` on every atom, so it is
/// accepted and converted. Binary flags in `X` route the whole reformulation
/// through branch-and-bound.
pub fn solve_box_dual(instance: &DroInstance) -> Result<DroSolution, DroError> {
    let start = Instant::now();
    let DroObjective::Linear { scenarios } = &instance.objective else {
        return Err(DroError::ObjectiveMismatch("box dual needs a linear objective"));
    };
    let (l, u): (Vec<f64>, Vec<f64>) = match &instance.ambiguity {
        AmbiguitySet::Box { l, u } => (l.clone(), u.clone()),
        AmbiguitySet::Simplex { n } => (vec![0.0; *n], vec![1.0; *n]),
        AmbiguitySet::Ellipsoid { .. } => {
            return Err(DroError::AmbiguityMismatch { expected: "box or simplex", found: "ellipsoid" })
        }
    };

    let n = instance.feasible.n;
    let big_n = scenarios.len();
    // Variables: x (n) | z (1) | lambda (big_n) | mu (big_n).
    let mut objective = vec![0.0; n + 1 + 2 * big_n];
    objective[n] = 1.0;
    for k in 0..big_n {
        objective[n + 1 + k] = -l[k];
        objective[n + 1 + big_n + k] = u[k];
    }
    let mut lp = instance.feasible.to_lp(objective, Sense::Minimize, 1 + 2 * big_n);
    for k in 0..big_n {
        let mut coeffs = vec![0.0; n + 1 + 2 * big_n];
        let s = scenarios.scenario(k);
        for j in 0..n {
            coeffs[j] = -s[j];
        }
        coeffs[n] = 1.0;
        coeffs[n + 1 + k] = -1.0;
        coeffs[n + 1 + big_n + k] = 1.0;
        lp.add_constraint(coeffs, Relation::Ge, 0.0);
    }
    // z is free; lambda and mu keep the default [0, inf).
    lp.set_bounds(n, f64::NEG_INFINITY, f64::INFINITY);

    let has_binary = instance.feasible.binary.iter().any(|&b| b);
    let sol = if has_binary { solve_milp(&lp)? } else { solve_lp(&lp)? };
    match sol.status {
        LpStatus::Optimal => Ok(DroSolution {
            x: sol.x[..n].to_vec(),
            objective: sol.objective,
            wall_time_s: start.elapsed().as_secs_f64(),
            method: "box-dual".into(),
            iterations: sol.iterations,
        }),
        LpStatus::Infeasible => Err(DroError::Infeasible),
        LpStatus::Unbounded => Err(DroError::Unbounded),
    }
}

/// One stored cut: a distribution from the oracle plus, for quadratic
/// objectives, the iterate it was linearized at. Cuts are valid for every
/// `x` because the distribution is fixed and feasible.
#[derive(Debug, Clone)]
struct Cut {
    /// Linear coefficients on `x` in `t >= offset + grad' x`.
    grad: Vec<f64>,
    offset: f64,
}

fn make_cut(objective: &DroObjective, p: &[f64], x_bar: &[f64]) -> Cut {
    match objective {
        // sum_k p_k s_k' x is linear: the cut is exact.
        DroObjective::Linear { scenarios } => {
            let n = scenarios.dim();
            let mut grad = vec![0.0; n];
            for k in 0..scenarios.len() {
                let s = scenarios.scenario(k);
                for j in 0..n {
                    grad[j] += p[k] * s[j];
                }
            }
            Cut { grad, offset: 0.0 }
        }
        // Gradient cut at x_bar: sum_k p_k [x'Q_k x] >= offset + grad' x with
        // grad = 2 sum_k p_k Q_k x_bar; valid by convexity.
        DroObjective::Quadratic { scenarios } => {
            let n = scenarios.dim();
            let mut grad = vec![0.0; n];
            let mut value = 0.0;
            for k in 0..scenarios.len() {
                if p[k] == 0.0 {
                    continue;
                }
                let q = scenarios.scenario(k);
                let qx = q.matvec(x_bar).expect("dimensions fixed");
                value += p[k] * x_bar.iter().zip(&qx).map(|(&a, &b)| a * b).sum::<f64>();
                for j in 0..n {
                    grad[j] += 2.0 * p[k] * qx[j];
                }
            }
            let g_dot_x: f64 = grad.iter().zip(x_bar).map(|(&g, &x)| g * x).sum();
            Cut { grad, offset: value - g_dot_x }
        }
    }
}

/// Kelley loop over a fixed feasible set (bounds already pinned by the
/// branch-and-bound wrapper when present). The cut pool is shared across
/// calls. Returns the best iterate, its oracle value, and oracle call count.
fn kelley(
    instance: &DroInstance,
    bounds: Option<(&[f64], &[f64])>,
    pool: &mut Vec<Cut>,
    relax_binaries: bool,
) -> Result<(Vec<f64>, f64, usize), DroError> {
    let n = instance.feasible.n;

    let build_master = |pool: &[Cut]| -> LinearProgram {
        // Variables: x (n) | t (epigraph). The worst case is nonnegative
        // (positive costs over a nonnegative domain, or PSD forms), so t >= 0.
        let mut objective = vec![0.0; n + 1];
        objective[n] = 1.0;
        let mut lp = instance.feasible.to_lp(objective, Sense::Minimize, 1);
        if relax_binaries {
            lp.binary = vec![false; n + 1];
        }
        if let Some((lo, hi)) = bounds {
            for j in 0..n {
                lp.set_bounds(j, lo[j], hi[j]);
            }
        }
        for cut in pool {
            let mut coeffs: Vec<f64> = cut.grad.iter().map(|&g| -g).collect();
            coeffs.push(1.0);
            lp.add_constraint(coeffs, Relation::Ge, cut.offset);
        }
        lp
    };

    // Initial iterate: any feasible point (cuts need a distribution from the
    // oracle, and the oracle needs a point).
    let mut x = if pool.is_empty() {
        let probe = build_master(&[]);
        // With no cuts t sits at its lower bound 0; only feasibility of x
        // matters here.
        let sol = solve_lp(&probe)?;
        match sol.status {
            LpStatus::Optimal => sol.x[..n].to_vec(),
            LpStatus::Infeasible => return Err(DroError::Infeasible),
            LpStatus::Unbounded => return Err(DroError::Unbounded),
        }
    } else {
        let sol = solve_lp(&build_master(pool))?;
        match sol.status {
            LpStatus::Optimal => sol.x[..n].to_vec(),
            LpStatus::Infeasible => return Err(DroError::Infeasible),
            LpStatus::Unbounded => return Err(DroError::Unbounded),
        }
    };

    let mut best_value = f64::INFINITY;
    let mut best_x = x.clone();
    for iter in 1..=MAX_CUT_ITERATIONS {
        let values = instance.objective.values_at(&x);
        let (oracle_value, p_star) = worst_case_expectation(&instance.ambiguity, &values)?;
        if oracle_value < best_value {
            best_value = oracle_value;
            best_x = x.clone();
        }
        pool.push(make_cut(&instance.objective, &p_star, &x));

        let sol = solve_lp(&build_master(pool))?;
        let master_value = match sol.status {
            LpStatus::Optimal => sol.objective,
            LpStatus::Infeasible => return Err(DroError::Infeasible),
            LpStatus::Unbounded => return Err(DroError::Unbounded),
        };
        // Master minimizes a relaxation: master_value <= optimum <= best_value.
        let gap = best_value - master_value;
        if gap <= 1e-6 * best_value.abs().max(1.0) {
            return Ok((best_x, best_value, iter));
        }
        x = sol.x[..n].to_vec();
    }
    Err(DroError::IterationLimit {
        iterations: MAX_CUT_ITERATIONS,
        gap: best_value
            - solve_lp(&build_master(pool)).map(|s| s.objective).unwrap_or(f64::NEG_INFINITY),
        value: best_value,
    })
}

/// Outer-approximation solver for any ambiguity variant and both objective
/// kinds. Binary variables are branched on around the continuous loop; the
/// cut pool is shared across the whole tree.
pub fn solve_cutting_plane(instance: &DroInstance) -> Result<DroSolution, DroError> {
    let start = Instant::now();
    let n = instance.feasible.n;
    let binaries: Vec<usize> =
        (0..n).filter(|&j| instance.feasible.binary[j]).collect();
    if binaries.len() > MAX_BINARIES {
        return Err(DroError::Lp(LpError::TooManyBinaries(binaries.len())));
    }

    let mut pool: Vec<Cut> = Vec::new();
    if binaries.is_empty() {
        let (x, value, iterations) = kelley(instance, None, &mut pool, false)?;
        return Ok(DroSolution {
            x,
            objective: value,
            wall_time_s: start.elapsed().as_secs_f64(),
            method: "cutting-plane".into(),
            iterations,
        });
    }

    // Depth-first branch-and-bound on the binary variables. Relaxation
    // values are valid lower bounds only up to the Kelley gap tolerance,
    // which the pruning slack absorbs.
    struct Tree<'a> {
        instance: &'a DroInstance,
        binaries: &'a [usize],
        pool: Vec<Cut>,
        incumbent: Option<(f64, Vec<f64>)>,
        nodes: usize,
        oracle_calls: usize,
    }

    impl Tree<'_> {
        fn explore(&mut self, lo: &mut Vec<f64>, hi: &mut Vec<f64>) -> Result<(), DroError> {
            self.nodes += 1;
            if self.nodes > MAX_CUT_BB_NODES {
                return Err(DroError::NodeLimit {
                    nodes: self.nodes,
                    incumbent: self.incumbent.as_ref().map(|(v, _)| *v),
                });
            }
            let relaxed = match kelley(self.instance, Some((lo, hi)), &mut self.pool, true) {
                Ok(r) => r,
                Err(DroError::Infeasible) => return Ok(()),
                Err(e) => return Err(e),
            };
            let (x, value, iters) = relaxed;
            self.oracle_calls += iters;
            let slack = 1e-6 * value.abs().max(1.0);
            if let Some((best, _)) = &self.incumbent {
                if value >= *best - slack {
                    return Ok(());
                }
            }
            let frac = self
                .binaries
                .iter()
                .copied()
                .filter(|&j| lo[j] != hi[j])
                .map(|j| (j, (x[j] - x[j].round()).abs()))
                .filter(|&(_, f)| f > INT_TOL)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match frac {
                None => {
                    // Integral relaxation: pin the binaries and take the
                    // exact worst case at the rounded point.
                    let mut x_int = x.clone();
                    for &j in self.binaries {
                        x_int[j] = x_int[j].round();
                    }
                    let viol = self.instance.feasible.violation(&x_int);
                    if viol > 1e-7 * self.instance.feasible.scale() {
                        return Ok(());
                    }
                    let values = self.instance.objective.values_at(&x_int);
                    let (exact, _) = worst_case_expectation(&self.instance.ambiguity, &values)?;
                    self.oracle_calls += 1;
                    if self.incumbent.as_ref().map_or(true, |(best, _)| exact < *best) {
                        self.incumbent = Some((exact, x_int));
                    }
                    Ok(())
                }
                Some((j, _)) => {
                    // Explore the branch nearest the relaxation first.
                    let first = x[j].round().clamp(0.0, 1.0);
                    for &fix in &[first, 1.0 - first] {
                        let (old_lo, old_hi) = (lo[j], hi[j]);
                        lo[j] = fix;
                        hi[j] = fix;
                        self.explore(lo, hi)?;
                        lo[j] = old_lo;
                        hi[j] = old_hi;
                    }
                    Ok(())
                }
            }
        }
    }

    let mut tree = Tree {
        instance,
        binaries: &binaries,
        pool: Vec::new(),
        incumbent: None,
        nodes: 0,
        oracle_calls: 0,
    };
    let mut lo = instance.feasible.lower.clone();
    let mut hi = instance.feasible.upper.clone();
    tree.explore(&mut lo, &mut hi)?;
    match tree.incumbent {
        Some((value, x)) => Ok(DroSolution {
            x,
            objective: value,
            wall_time_s: start.elapsed().as_secs_f64(),
            method: "cutting-plane".into(),
            iterations: tree.oracle_calls,
        }),
        None => Err(DroError::Infeasible),
    }
}

/// Picks the solver for an instance: box dual for linear objectives with
/// polytopal ambiguity, cutting plane otherwise. Both problems of a
/// reduction run go through this same choice.
pub fn solve(instance: &DroInstance) -> Result<DroSolution, DroError> {
    match (&instance.objective, &instance.ambiguity) {
        (DroObjective::Linear { .. }, AmbiguitySet::Box { .. })
        | (DroObjective::Linear { .. }, AmbiguitySet::Simplex { .. }) => solve_box_dual(instance),
        _ => solve_cutting_plane(instance),
    }
}

/// Worst-case expected objective of a fixed decision under the instance's
/// ambiguity set. Errors if `x` is infeasible beyond 1e-7 of scale.
pub fn evaluate_solution(instance: &DroInstance, x: &[f64]) -> Result<f64, DroError> {
    if x.len() != instance.feasible.n {
        return Err(DroError::InvalidInstance(format!(
            "candidate has {} entries for {} variables",
            x.len(),
            instance.feasible.n
        )));
    }
    let viol = instance.feasible.violation(x);
    if viol > 1e-7 * instance.feasible.scale() {
        return Err(DroError::InfeasibleX { violation: viol });
    }
    let values = instance.objective.values_at(x);
    let (value, _) = worst_case_expectation(&instance.ambiguity, &values)?;
    Ok(value)
}

/// How the scenario set is reduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum ReductionMethod {
    /// Exact guarantee-optimal partition (branch-and-bound / enumeration).
    Opt,
    /// Seeded k-means with certified guarantees.
    Kmeans { seed: u64, max_iter: usize },
    /// Geometric axis splitting of the bounding box (vector scenarios only).
    Hyperrect { splits: Vec<usize> },
}

impl ReductionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ReductionMethod::Opt => "opt",
            ReductionMethod::Kmeans { .. } => "kmeans",
            ReductionMethod::Hyperrect { .. } => "hyperrect",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ReductionMethod::Kmeans { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Either partition flavor, as produced by one reduction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyPartition {
    Vector(Partition),
    Matrix(MatrixPartition),
}

impl AnyPartition {
    pub fn k(&self) -> usize {
        match self {
            AnyPartition::Vector(p) => p.k,
            AnyPartition::Matrix(p) => p.k,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        match self {
            AnyPartition::Vector(p) => &p.assignment,
            AnyPartition::Matrix(p) => &p.assignment,
        }
    }

    /// Globally valid certified pair: for matrix partitions the per-cluster
    /// pairs are combined as (max alpha_j, max beta_j), which certifies every
    /// cluster simultaneously.
    pub fn certified_pair(&self) -> (f64, f64) {
        match self {
            AnyPartition::Vector(p) => (p.alpha, p.beta),
            AnyPartition::Matrix(p) => (
                p.alpha.iter().copied().fold(1.0f64, f64::max),
                p.beta.iter().copied().fold(1.0f64, f64::max),
            ),
        }
    }
}

/// Metrics of one reduction run, in the shape reports expect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Reduced optimum / original optimum.
    pub af: f64,
    /// Reduced solve time / original solve time (clustering excluded).
    pub tf: f64,
    /// |S| / K.
    pub srf: f64,
    pub alpha: f64,
    pub beta: f64,
    /// alpha * beta, the certified approximation factor.
    pub guarantee: f64,
    pub original_objective: f64,
    pub reduced_objective: f64,
    /// Worst case of the reduced minimizer under the original ambiguity.
    pub evaluated_upper: f64,
    /// `evaluated_upper <= guarantee * original_objective + 1e-6 * scale`.
    pub certificate_ok: bool,
    pub clustering_time_s: f64,
    pub original_solve_time_s: f64,
    pub reduced_solve_time_s: f64,
    pub method: String,
    pub k: usize,
    pub n_scenarios: usize,
    pub seed: Option<u64>,
}

/// Full reduction pipeline output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionRun {
    pub report: MetricsReport,
    pub original: DroSolution,
    pub reduced: DroSolution,
    pub partition: AnyPartition,
}

fn reduce_objective(
    objective: &DroObjective,
    method: &ReductionMethod,
    k: usize,
) -> Result<(AnyPartition, DroObjective, f64), DroError> {
    let start = Instant::now();
    match objective {
        DroObjective::Linear { scenarios } => {
            let partition = match method {
                ReductionMethod::Opt => optimal_partition(scenarios, k)?,
                ReductionMethod::Kmeans { seed, max_iter } => {
                    kmeans_partition(scenarios, k, *seed, *max_iter)?
                }
                ReductionMethod::Hyperrect { splits } => {
                    let red = hyperrect_partition(scenarios, splits)?;
                    if red.partition.k != k {
                        return Err(DroError::MethodUnavailable(format!(
                            "hyperrect splitting produced {} occupied cells, not K = {k}; pass the realized K",
                            red.partition.k
                        )));
                    }
                    red.partition
                }
            };
            let reduced = ScenarioSet::new(partition.representatives.clone(), None)?;
            Ok((
                AnyPartition::Vector(partition),
                DroObjective::Linear { scenarios: reduced },
                start.elapsed().as_secs_f64(),
            ))
        }
        DroObjective::Quadratic { scenarios } => {
            let partition = match method {
                ReductionMethod::Opt => optimal_matrix_partition(scenarios, k)?,
                ReductionMethod::Kmeans { seed, max_iter } => {
                    frobenius_kmeans(scenarios, k, *seed, *max_iter)?
                }
                ReductionMethod::Hyperrect { .. } => {
                    return Err(DroError::MethodUnavailable(
                        "hyperrect splitting is defined for vector scenarios only".into(),
                    ))
                }
            };
            let reduced = MatrixScenarioSet::new(partition.representatives.clone())?;
            Ok((
                AnyPartition::Matrix(partition),
                DroObjective::Quadratic { scenarios: reduced },
                start.elapsed().as_secs_f64(),
            ))
        }
    }
}

/// Clusters the scenarios, projects the ambiguity set, solves the original
/// and the reduced instance with the same routine, and verifies the
/// certified bound: the reduced minimizer's worst case under the original
/// ambiguity is at most `alpha * beta * original optimum + 1e-6 * scale`.
pub fn reduce_and_solve(
    instance: &DroInstance,
    method: &ReductionMethod,
    k: usize,
) -> Result<ReductionRun, DroError> {
    reduce_and_solve_with(instance, method, k, None)
}

/// [`reduce_and_solve`] with an optional cached solution of the original
/// problem (harnesses sweeping K over one instance solve it once); when
/// given, its recorded wall time enters TF unchanged.
pub fn reduce_and_solve_with(
    instance: &DroInstance,
    method: &ReductionMethod,
    k: usize,
    original: Option<DroSolution>,
) -> Result<ReductionRun, DroError> {
    let (partition, reduced_objective, clustering_time_s) =
        reduce_objective(&instance.objective, method, k)?;
    let realized_k = partition.k();
    let aggregation = AggregationMatrix::from_assignment(partition.assignment(), realized_k)?;
    let reduced_ambiguity = project(&instance.ambiguity, &aggregation)?;
    let reduced_instance = DroInstance::new(
        reduced_objective,
        instance.feasible.clone(),
        reduced_ambiguity,
    )?;

    let original = match original {
        Some(sol) => sol,
        None => solve(instance)?,
    };
    let reduced = solve(&reduced_instance)?;
    let evaluated_upper = evaluate_solution(instance, &reduced.x)?;

    let (alpha, beta) = partition.certified_pair();
    let guarantee = alpha * beta;
    let scale = original.objective.abs().max(1.0);
    let certificate_ok = evaluated_upper <= guarantee * original.objective + 1e-6 * scale;
    let n_scenarios = instance.objective.n_scenarios();

    let report = MetricsReport {
        af: reduced.objective / original.objective,
        tf: reduced.wall_time_s / original.wall_time_s,
        srf: n_scenarios as f64 / realized_k as f64,
        alpha,
        beta,
        guarantee,
        original_objective: original.objective,
        reduced_objective: reduced.objective,
        evaluated_upper,
        certificate_ok,
        clustering_time_s,
        original_solve_time_s: original.wall_time_s,
        reduced_solve_time_s: reduced.wall_time_s,
        method: method.name().into(),
        k: realized_k,
        n_scenarios,
        seed: method.seed(),
    };
    Ok(ReductionRun { report, original, reduced, partition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use proptest::prelude::*;

    fn linear_instance(
        rows: Vec<Vec<f64>>,
        feasible: FeasibleSet,
        ambiguity: AmbiguitySet,
    ) -> DroInstance {
        DroInstance::new(
            DroObjective::Linear { scenarios: ScenarioSet::new(rows, None).unwrap() },
            feasible,
            ambiguity,
        )
        .unwrap()
    }

    #[test]
    fn box_dual_singleton_is_plain_lp() {
        let mut feasible = FeasibleSet::nonneg(2);
        feasible.add_constraint(vec![1.0, 1.0], Relation::Ge, 1.0);
        let instance = linear_instance(
            vec![vec![2.0, 3.0]],
            feasible,
            AmbiguitySet::box_set(vec![1.0], vec![1.0]).unwrap(),
        );
        let sol = solve_box_dual(&instance).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn box_dual_simplex_picks_worst_scenario() {
        let instance = linear_instance(
            vec![vec![1.0], vec![3.0]],
            FeasibleSet::fixed(vec![1.0]),
            AmbiguitySet::simplex(2).unwrap(),
        );
        let sol = solve_box_dual(&instance).unwrap();
        assert!((sol.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn box_dual_matches_oracle_example() {
        let instance = linear_instance(
            vec![vec![1.0], vec![2.0]],
            FeasibleSet::fixed(vec![1.0]),
            AmbiguitySet::box_set(vec![0.2, 0.2], vec![0.8, 0.8]).unwrap(),
        );
        let sol = solve_box_dual(&instance).unwrap();
        assert!((sol.objective - 1.8).abs() < 1e-9);
    }

    #[test]
    fn box_dual_rejects_ellipsoid() {
        let instance = DroInstance::new(
            DroObjective::Linear {
                scenarios: ScenarioSet::new(vec![vec![1.0], vec![2.0]], None).unwrap(),
            },
            FeasibleSet::fixed(vec![1.0]),
            AmbiguitySet::ellipsoid(
                vec![0.5, 0.5],
                DenseMatrix::identity(2).scaled(0.01),
                0.1,
            )
            .unwrap(),
        )
        .unwrap();
        assert!(matches!(
            solve_box_dual(&instance),
            Err(DroError::AmbiguityMismatch { .. })
        ));
    }

    #[test]
    fn cutting_plane_agrees_with_dual_on_fixed_example() {
        let mut feasible = FeasibleSet::nonneg(2);
        feasible.add_constraint(vec![1.0, 1.0], Relation::Ge, 1.0);
        for j in 0..2 {
            feasible.upper[j] = 5.0;
        }
        let instance = linear_instance(
            vec![vec![2.0, 1.0], vec![1.0, 3.0]],
            feasible,
            AmbiguitySet::box_set(vec![0.1, 0.1], vec![0.9, 0.9]).unwrap(),
        );
        let dual = solve_box_dual(&instance).unwrap();
        let cut = solve_cutting_plane(&instance).unwrap();
        assert!((dual.objective - cut.objective).abs() <= 1e-6 * dual.objective.max(1.0));
    }

    #[test]
    fn cutting_plane_quadratic_symmetric_portfolio() {
        let scenarios = MatrixScenarioSet::new(vec![
            DenseMatrix::diag(&[1.0, 4.0]),
            DenseMatrix::diag(&[4.0, 1.0]),
        ])
        .unwrap();
        let instance = DroInstance::new(
            DroObjective::Quadratic { scenarios },
            FeasibleSet::simplex(2),
            AmbiguitySet::simplex(2).unwrap(),
        )
        .unwrap();
        let sol = solve_cutting_plane(&instance).unwrap();
        assert!((sol.objective - 1.25).abs() < 1e-5, "value {}", sol.objective);
        assert!((sol.x[0] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn cutting_plane_singleton_reduces_to_stochastic() {
        let instance = linear_instance(
            vec![vec![1.0], vec![2.0]],
            FeasibleSet::fixed(vec![1.0]),
            AmbiguitySet::box_set(vec![0.3, 0.7], vec![0.3, 0.7]).unwrap(),
        );
        let sol = solve_cutting_plane(&instance).unwrap();
        assert!((sol.objective - (0.3 + 1.4)).abs() < 1e-7);
    }

    #[test]
    fn cutting_plane_ellipsoid_linear() {
        let instance = DroInstance::new(
            DroObjective::Linear {
                scenarios: ScenarioSet::new(vec![vec![1.0], vec![2.0]], None).unwrap(),
            },
            FeasibleSet::fixed(vec![1.0]),
            AmbiguitySet::ellipsoid(
                vec![0.5, 0.5],
                DenseMatrix::identity(2).scaled(0.01),
                1.0,
            )
            .unwrap(),
        )
        .unwrap();
        let sol = solve_cutting_plane(&instance).unwrap();
        // Worst case of f = (1, 2) over the ellipsoid, computed in closed form.
        let (expect, _) = worst_case_expectation(&instance.ambiguity, &[1.0, 2.0]).unwrap();
        assert!((sol.objective - expect).abs() <= 1e-6 * expect.max(1.0));
    }

    #[test]
    fn binary_cutting_plane_matches_dual_milp() {
        // Pick one of three projects (binary), each with scenario-dependent
        // costs; coverage constraint forces at least two.
        let rows = vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0], vec![2.0, 3.0, 1.5]];
        let mut feasible = FeasibleSet::nonneg(3);
        for j in 0..3 {
            feasible.set_binary(j);
        }
        feasible.add_constraint(vec![1.0, 1.0, 1.0], Relation::Ge, 2.0);
        let instance = linear_instance(
            rows,
            feasible,
            AmbiguitySet::box_set(vec![0.1, 0.1, 0.1], vec![0.8, 0.8, 0.8]).unwrap(),
        );
        let dual = solve_box_dual(&instance).unwrap();
        let cut = solve_cutting_plane(&instance).unwrap();
        assert!(
            (dual.objective - cut.objective).abs() <= 1e-6 * dual.objective.max(1.0),
            "dual {} vs cutting {}",
            dual.objective,
            cut.objective
        );
        for j in 0..3 {
            assert!((cut.x[j] - cut.x[j].round()).abs() < 1e-9);
        }
    }

    #[test]
    fn evaluate_examples() {
        let simplex = linear_instance(
            vec![vec![1.0], vec![3.0]],
            FeasibleSet::fixed(vec![1.0]),
            AmbiguitySet::simplex(2).unwrap(),
        );
        assert_eq!(evaluate_solution(&simplex, &[1.0]).unwrap(), 3.0);

        let point = linear_instance(
            vec![vec![1.0], vec![3.0]],
            FeasibleSet::fixed(vec![1.0]),
            AmbiguitySet::box_set(vec![0.25, 0.75], vec![0.25, 0.75]).unwrap(),
        );
        let v = evaluate_solution(&point, &[1.0]).unwrap();
        assert!((v - 2.5).abs() < 1e-9);
    }

    #[test]
    fn evaluate_rejects_infeasible_x() {
        let instance = linear_instance(
            vec![vec![1.0]],
            FeasibleSet::fixed(vec![1.0]),
            AmbiguitySet::simplex(1).unwrap(),
        );
        assert!(matches!(
            evaluate_solution(&instance, &[2.0]),
            Err(DroError::InfeasibleX { .. })
        ));
    }

    fn demand_instance(rows: Vec<Vec<f64>>, samples: usize) -> DroInstance {
        // Covering problem: meet unit demand, costs vary per scenario.
        let n = rows[0].len();
        let len = rows.len();
        let mut feasible = FeasibleSet::nonneg(n);
        feasible.add_constraint(vec![1.0; n], Relation::Ge, 1.0);
        for j in 0..n {
            feasible.upper[j] = 10.0;
        }
        let p_hat = vec![1.0 / len as f64; len];
        let ambiguity = crate::ambiguity::from_samples(&p_hat, samples, 0.1).unwrap();
        linear_instance(rows, feasible, ambiguity)
    }

    #[test]
    fn reduce_no_reduction_is_exact() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![1.5, 1.5], vec![3.0, 1.0]];
        let instance = demand_instance(rows, 50);
        let run = reduce_and_solve(&instance, &ReductionMethod::Opt, 4).unwrap();
        assert!((run.report.af - 1.0).abs() < 1e-9);
        assert_eq!(run.report.srf, 1.0);
        assert!(run.report.certificate_ok);
    }

    #[test]
    fn reduce_identical_scenarios_guarantee_one() {
        let rows = vec![vec![2.0, 3.0]; 5];
        let instance = demand_instance(rows, 30);
        let run = reduce_and_solve(&instance, &ReductionMethod::Opt, 1).unwrap();
        assert!((run.report.guarantee - 1.0).abs() < 1e-12);
        assert!((run.report.af - 1.0).abs() < 1e-9);
        assert_eq!(run.report.srf, 5.0);
    }

    #[test]
    fn reduce_srf_is_exact_ratio() {
        let rows: Vec<Vec<f64>> =
            (0..6).map(|i| vec![1.0 + i as f64 * 0.3, 2.0 - i as f64 * 0.1]).collect();
        let instance = demand_instance(rows, 40);
        let run = reduce_and_solve(
            &instance,
            &ReductionMethod::Kmeans { seed: 1, max_iter: 100 },
            3,
        )
        .unwrap();
        assert_eq!(run.report.srf, 2.0);
        assert_eq!(run.report.k, 3);
        assert!(run.report.certificate_ok);
    }

    #[test]
    fn reduce_quadratic_pipeline() {
        let scenarios = MatrixScenarioSet::new(vec![
            DenseMatrix::diag(&[1.0, 2.0]),
            DenseMatrix::diag(&[1.1, 2.1]),
            DenseMatrix::diag(&[4.0, 3.0]),
        ])
        .unwrap();
        let instance = DroInstance::new(
            DroObjective::Quadratic { scenarios },
            FeasibleSet::simplex(2),
            AmbiguitySet::simplex(3).unwrap(),
        )
        .unwrap();
        let run = reduce_and_solve(&instance, &ReductionMethod::Opt, 2).unwrap();
        assert!(run.report.certificate_ok, "report: {:?}", run.report);
        assert!(run.report.guarantee >= 1.0);
    }

    #[test]
    fn instance_json_round_trip() {
        let instance = demand_instance(vec![vec![1.0, 2.0], vec![2.0, 1.0]], 25);
        let json = serde_json::to_string(&instance).unwrap();
        let back: DroInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, instance);
    }

    /// A hand-written document may omit bounds and binary flags; they
    /// default to the nonnegative orthant.
    #[test]
    fn sparse_instance_document_fills_defaults() {
        let instance: DroInstance = serde_json::from_str(
            r#"{
                "objective": {"kind": "linear",
                              "scenarios": {"scenarios": [[1, 2], [2, 1]]}},
                "feasible": {"n": 2,
                             "constraints": [{"coeffs": [1, 1],
                                              "relation": ">=", "rhs": 1}]},
                "ambiguity": {"variant": "simplex", "n": 2}
            }"#,
        )
        .unwrap();
        assert_eq!(instance.feasible.lower, vec![0.0, 0.0]);
        assert_eq!(instance.feasible.upper, vec![f64::INFINITY, f64::INFINITY]);
        assert_eq!(instance.feasible.binary, vec![false, false]);
        let solution = solve(&instance).unwrap();
        assert!((solution.objective - 1.5).abs() <= 1e-9, "{}", solution.objective);

        let bare: DroInstance = serde_json::from_str(
            r#"{
                "objective": {"kind": "linear",
                              "scenarios": {"scenarios": [[1, 2], [2, 1]]}},
                "feasible": {"n": 2},
                "ambiguity": {"variant": "simplex", "n": 2}
            }"#,
        )
        .unwrap();
        assert!(bare.feasible.constraints.is_empty());
        let trivial = solve(&bare).unwrap();
        assert!(trivial.objective.abs() <= 1e-12);
    }

    fn random_box_instance(
        max_vars: usize,
        max_scen: usize,
    ) -> impl Strategy<Value = DroInstance> {
        (2..=max_vars, 2..=max_scen).prop_flat_map(|(n, ns)| {
            (
                proptest::collection::vec(proptest::collection::vec(0.2..4.0f64, n), ns),
                proptest::collection::vec(0.05..1.0f64, ns),
                0.0..0.4f64,
            )
                .prop_map(move |(rows, raw_p, width)| {
                    let total: f64 = raw_p.iter().sum();
                    let l: Vec<f64> =
                        raw_p.iter().map(|v| (v / total - width / 2.0).max(0.0)).collect();
                    let u: Vec<f64> =
                        raw_p.iter().map(|v| (v / total + width / 2.0).min(1.0)).collect();
                    let mut feasible = FeasibleSet::nonneg(n);
                    feasible.add_constraint(vec![1.0; n], Relation::Ge, 1.0);
                    for j in 0..n {
                        feasible.upper[j] = 5.0;
                    }
                    linear_instance(rows, feasible, AmbiguitySet::box_set(l, u).unwrap())
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn cross_solver_agreement(instance in random_box_instance(4, 6)) {
            let dual = solve_box_dual(&instance).unwrap();
            let cut = solve_cutting_plane(&instance).unwrap();
            prop_assert!(
                (dual.objective - cut.objective).abs() <= 1e-6 * dual.objective.abs().max(1.0),
                "dual {} vs cutting {}", dual.objective, cut.objective
            );
        }

        #[test]
        fn certificate_holds_on_random_reductions(
            instance in random_box_instance(3, 8),
            k in 1usize..=3,
            seed in any::<u64>(),
        ) {
            prop_assume!(k <= instance.objective.n_scenarios());
            for method in [
                ReductionMethod::Opt,
                ReductionMethod::Kmeans { seed, max_iter: 50 },
            ] {
                let run = reduce_and_solve(&instance, &method, k).unwrap();
                prop_assert!(
                    run.report.certificate_ok,
                    "method {:?}: evaluated {} > {} * {} + tol",
                    method, run.report.evaluated_upper, run.report.guarantee,
                    run.report.original_objective
                );
                // Sandwich from the componentwise ratios: each scenario value
                // sits within [rep/alpha, beta*rep], so the optima satisfy
                // 1/alpha <= AF <= beta.
                prop_assert!(
                    run.report.af >= 1.0 / run.report.alpha - 1e-7
                        && run.report.af <= run.report.beta + 1e-7,
                    "af {} outside [{}, {}]",
                    run.report.af, 1.0 / run.report.alpha, run.report.beta
                );
            }
        }

        #[test]
        fn enlarging_box_never_decreases_value(
            instance in random_box_instance(3, 5),
            widen in 0.01..0.3f64,
        ) {
            let AmbiguitySet::Box { l, u } = instance.ambiguity.clone() else { panic!() };
            let wider = AmbiguitySet::box_set(
                l.iter().map(|&v| (v - widen).max(0.0)).collect(),
                u.iter().map(|&v| (v + widen).min(1.0)).collect(),
            ).unwrap();
            let bigger = DroInstance::new(
                instance.objective.clone(),
                instance.feasible.clone(),
                wider,
            ).unwrap();
            let base = solve_box_dual(&instance).unwrap();
            let wide = solve_box_dual(&bigger).unwrap();
            prop_assert!(wide.objective >= base.objective - 1e-7 * base.objective.abs().max(1.0));
        }

        #[test]
        fn simplex_ambiguity_is_robust_min_max(instance in random_box_instance(3, 5)) {
            let robust = DroInstance::new(
                instance.objective.clone(),
                instance.feasible.clone(),
                AmbiguitySet::simplex(instance.objective.n_scenarios()).unwrap(),
            ).unwrap();
            let sol = solve_box_dual(&robust).unwrap();
            let per_scenario = robust.objective.values_at(&sol.x);
            let max_val = per_scenario.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((sol.objective - max_val).abs() <= 1e-6 * max_val.abs().max(1.0));
        }

        /// Two-asset quadratic instances: the cutting plane matches a grid
        /// search over the simplex at resolution 1e-3.
        #[test]
        fn quadratic_matches_grid_search(
            d1 in 0.5..4.0f64,
            d2 in 0.5..4.0f64,
            d3 in 0.5..4.0f64,
            d4 in 0.5..4.0f64,
            off in -0.3..0.3f64,
        ) {
            let q1 = {
                let mut q = DenseMatrix::diag(&[d1, d2]);
                q[(0, 1)] = off;
                q[(1, 0)] = off;
                q
            };
            let q2 = DenseMatrix::diag(&[d3, d4]);
            // Keep q1 PD: diagonal dominance.
            prop_assume!(d1 > off.abs() + 0.05 && d2 > off.abs() + 0.05);
            let scenarios = MatrixScenarioSet::new(vec![q1.clone(), q2.clone()]).unwrap();
            let instance = DroInstance::new(
                DroObjective::Quadratic { scenarios },
                FeasibleSet::simplex(2),
                AmbiguitySet::simplex(2).unwrap(),
            ).unwrap();
            let sol = solve_cutting_plane(&instance).unwrap();

            let value_at = |w0: f64| {
                let w = [w0, 1.0 - w0];
                let v1 = {
                    let qx = q1.matvec(&w).unwrap();
                    w.iter().zip(&qx).map(|(&a, &b)| a * b).sum::<f64>()
                };
                let v2 = {
                    let qx = q2.matvec(&w).unwrap();
                    w.iter().zip(&qx).map(|(&a, &b)| a * b).sum::<f64>()
                };
                v1.max(v2)
            };
            // Coarse pass, then refine around the argmin: the optimum can
            // sit at a kink of the max, where grid error is first order
            // in the step.
            let steps = 1000;
            let mut grid_best = f64::INFINITY;
            let mut best_w = 0.0;
            for i in 0..=steps {
                let w0 = i as f64 / steps as f64;
                let v = value_at(w0);
                if v < grid_best {
                    grid_best = v;
                    best_w = w0;
                }
            }
            let coarse = 1.0 / steps as f64;
            for i in 0..=2000 {
                let w0 = (best_w - coarse + i as f64 * coarse / 1000.0).clamp(0.0, 1.0);
                grid_best = grid_best.min(value_at(w0));
            }
            prop_assert!((sol.objective - grid_best).abs() <= 1e-3 * grid_best.max(1.0));
        }
    }
}
