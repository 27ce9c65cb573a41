//! Ambiguity sets over scenario probabilities: the full probability simplex,
//! box sets intersected with the simplex, and ellipsoids centered on it.
//!
//! The module builds box sets from empirical distributions (normal-
//! approximation confidence intervals), projects any variant onto a reduced
//! atom space through a 0/1 aggregation matrix, and answers worst-case
//! expectation queries: closed form for the simplex and the ellipsoid, an LP
//! for the box. Projection is exact as a set for every variant: clusters
//! control disjoint probability coordinates, so a reduced vector satisfies
//! the projected description exactly when it lifts to a feasible original
//! vector (individual projected bounds may still be slack once the
//! total-mass constraint binds).

use crate::linalg::{cholesky, solve_spd, sym_eigen, DenseMatrix, LinalgError};
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, Relation, Sense};
use crate::stats::std_normal_quantile;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AmbiguityError {
    #[error("delta must lie in (0,1), got {0}")]
    InvalidDelta(f64),
    #[error("not a probability vector: {0}")]
    InvalidDistribution(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid box bounds: {0}")]
    InvalidBox(String),
    #[error("box is empty on the probability simplex (sum l = {sum_l}, sum u = {sum_u})")]
    InfeasibleBox { sum_l: f64, sum_u: f64 },
    #[error("invalid ellipsoid: {0}")]
    InvalidEllipsoid(String),
    #[error("aggregated covariance is rank deficient: {0}")]
    RankDeficient(LinalgError),
    #[error("ellipsoid worst case leaves [0,1] at atom {index} (value {value}); the closed form assumes the ellipsoid lies inside the simplex")]
    BoundsViolated { index: usize, value: f64 },
    #[error("invalid aggregation: {0}")]
    InvalidAggregation(String),
    #[error("operation not supported for this variant: {0}")]
    UnsupportedVariant(&'static str),
    #[error("worst-case LP failed: {0}")]
    Lp(#[from] LpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

const FEAS_TOL: f64 = 1e-9;

/// An ambiguity set of probability vectors over `n` atoms; every variant is
/// implicitly intersected with the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", try_from = "AmbiguityData")]
pub enum AmbiguitySet {
    Simplex { n: usize },
    Box { l: Vec<f64>, u: Vec<f64> },
    Ellipsoid { p0: Vec<f64>, sigma: DenseMatrix, r: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
enum AmbiguityData {
    Simplex { n: usize },
    Box { l: Vec<f64>, u: Vec<f64> },
    Ellipsoid { p0: Vec<f64>, sigma: DenseMatrix, r: f64 },
}

impl TryFrom<AmbiguityData> for AmbiguitySet {
    type Error = AmbiguityError;

    fn try_from(data: AmbiguityData) -> Result<Self, AmbiguityError> {
        match data {
            AmbiguityData::Simplex { n } => AmbiguitySet::simplex(n),
            AmbiguityData::Box { l, u } => AmbiguitySet::box_set(l, u),
            AmbiguityData::Ellipsoid { p0, sigma, r } => AmbiguitySet::ellipsoid(p0, sigma, r),
        }
    }
}

impl AmbiguitySet {
    pub fn simplex(n: usize) -> Result<Self, AmbiguityError> {
        if n == 0 {
            return Err(AmbiguityError::DimensionMismatch("zero atoms".into()));
        }
        Ok(AmbiguitySet::Simplex { n })
    }

    /// Box `{p : l <= p <= u}` intersected with the simplex. Requires
    /// `0 <= l <= u <= 1` and nonemptiness `sum(l) <= 1 <= sum(u)`.
    pub fn box_set(l: Vec<f64>, u: Vec<f64>) -> Result<Self, AmbiguityError> {
        if l.is_empty() || l.len() != u.len() {
            return Err(AmbiguityError::DimensionMismatch(format!(
                "bound lengths {} vs {}",
                l.len(),
                u.len()
            )));
        }
        for i in 0..l.len() {
            if !l[i].is_finite() || !u[i].is_finite() {
                return Err(AmbiguityError::InvalidBox(format!("atom {i}: non-finite bound")));
            }
            if l[i] < -FEAS_TOL || u[i] > 1.0 + FEAS_TOL || l[i] > u[i] + FEAS_TOL {
                return Err(AmbiguityError::InvalidBox(format!(
                    "atom {i}: need 0 <= {} <= {} <= 1",
                    l[i], u[i]
                )));
            }
        }
        let sum_l: f64 = l.iter().sum();
        let sum_u: f64 = u.iter().sum();
        if sum_l > 1.0 + FEAS_TOL || sum_u < 1.0 - FEAS_TOL {
            return Err(AmbiguityError::InfeasibleBox { sum_l, sum_u });
        }
        Ok(AmbiguitySet::Box { l, u })
    }

    /// Ellipsoid `{p : (p-p0)' Sigma^-1 (p-p0) <= r^2}` with center on the
    /// simplex and SPD covariance.
    pub fn ellipsoid(p0: Vec<f64>, sigma: DenseMatrix, r: f64) -> Result<Self, AmbiguityError> {
        let n = p0.len();
        if n == 0 || sigma.rows() != n || sigma.cols() != n {
            return Err(AmbiguityError::DimensionMismatch(format!(
                "center has {n} atoms, covariance is {}x{}",
                sigma.rows(),
                sigma.cols()
            )));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(AmbiguityError::InvalidEllipsoid(format!("radius {r} must be positive")));
        }
        let mass: f64 = p0.iter().sum();
        if (mass - 1.0).abs() > FEAS_TOL {
            return Err(AmbiguityError::InvalidEllipsoid(format!(
                "center mass {mass} != 1"
            )));
        }
        cholesky(&sigma)
            .map_err(|e| AmbiguityError::InvalidEllipsoid(format!("covariance not SPD: {e}")))?;
        Ok(AmbiguitySet::Ellipsoid { p0, sigma, r })
    }

    pub fn n_atoms(&self) -> usize {
        match self {
            AmbiguitySet::Simplex { n } => *n,
            AmbiguitySet::Box { l, .. } => l.len(),
            AmbiguitySet::Ellipsoid { p0, .. } => p0.len(),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            AmbiguitySet::Simplex { .. } => "simplex",
            AmbiguitySet::Box { .. } => "box",
            AmbiguitySet::Ellipsoid { .. } => "ellipsoid",
        }
    }
}

/// Confidence box around an empirical distribution: per-atom half-width
/// `z_{1-delta/2} / (2 sqrt(nsamp))`, clipped into `[0,1]`. With no samples
/// the entire simplex is returned.
pub fn from_samples(
    p_hat: &[f64],
    nsamp: usize,
    delta: f64,
) -> Result<AmbiguitySet, AmbiguityError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AmbiguityError::InvalidDelta(delta));
    }
    if p_hat.is_empty() {
        return Err(AmbiguityError::InvalidDistribution("no atoms".into()));
    }
    let mass: f64 = p_hat.iter().sum();
    if p_hat.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) || (mass - 1.0).abs() > FEAS_TOL {
        return Err(AmbiguityError::InvalidDistribution(format!(
            "entries must be nonnegative with total mass 1 (mass = {mass})"
        )));
    }
    if nsamp == 0 {
        return AmbiguitySet::simplex(p_hat.len());
    }
    let half_width = std_normal_quantile(1.0 - delta / 2.0) / (2.0 * (nsamp as f64).sqrt());
    let l: Vec<f64> = p_hat.iter().map(|&p| (p - half_width).max(0.0)).collect();
    let u: Vec<f64> = p_hat.iter().map(|&p| (p + half_width).min(1.0)).collect();
    AmbiguitySet::box_set(l, u)
}

/// 0/1 aggregation of `n` atoms into `k` clusters: exactly one 1 per column,
/// no empty row. Stored as the cluster index of each atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AggregationData")]
pub struct AggregationMatrix {
    #[serde(rename = "K")]
    k: usize,
    cluster_of: Vec<usize>,
}

#[derive(Deserialize)]
struct AggregationData {
    #[serde(rename = "K")]
    k: usize,
    cluster_of: Vec<usize>,
}

impl TryFrom<AggregationData> for AggregationMatrix {
    type Error = AmbiguityError;

    fn try_from(data: AggregationData) -> Result<Self, AmbiguityError> {
        AggregationMatrix::from_assignment(&data.cluster_of, data.k)
    }
}

impl AggregationMatrix {
    pub fn from_assignment(assignment: &[usize], k: usize) -> Result<Self, AmbiguityError> {
        if assignment.is_empty() || k == 0 || k > assignment.len() {
            return Err(AmbiguityError::InvalidAggregation(format!(
                "{} atoms into {k} clusters",
                assignment.len()
            )));
        }
        let mut seen = vec![false; k];
        for (i, &j) in assignment.iter().enumerate() {
            if j >= k {
                return Err(AmbiguityError::InvalidAggregation(format!(
                    "atom {i} assigned to cluster {j} >= K = {k}"
                )));
            }
            seen[j] = true;
        }
        if let Some(j) = seen.iter().position(|&s| !s) {
            return Err(AmbiguityError::InvalidAggregation(format!("cluster {j} is empty")));
        }
        Ok(Self { k, cluster_of: assignment.to_vec() })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn cluster_of(&self, atom: usize) -> usize {
        self.cluster_of[atom]
    }

    /// `A p`: per-cluster sums.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        for (i, &j) in self.cluster_of.iter().enumerate() {
            out[j] += p[i];
        }
        out
    }

    /// The explicit K x N 0/1 matrix.
    pub fn matrix(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.k, self.n());
        for (i, &j) in self.cluster_of.iter().enumerate() {
            a[(j, i)] = 1.0;
        }
        a
    }

    /// `A M A^T` without materializing `A`.
    fn conjugate(&self, m: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.k, self.k);
        for r in 0..self.n() {
            for c in 0..self.n() {
                out[(self.cluster_of[r], self.cluster_of[c])] += m[(r, c)];
            }
        }
        out
    }
}

/// Projects an ambiguity set onto the reduced atoms: simplex stays a simplex,
/// a box maps to `[A l, A u]` (clipped into `[0,1]`), an ellipsoid to
/// `(A p0, A Sigma A^T, r)`.
pub fn project(
    set: &AmbiguitySet,
    a: &AggregationMatrix,
) -> Result<AmbiguitySet, AmbiguityError> {
    if set.n_atoms() != a.n() {
        return Err(AmbiguityError::DimensionMismatch(format!(
            "set has {} atoms, aggregation expects {}",
            set.n_atoms(),
            a.n()
        )));
    }
    match set {
        AmbiguitySet::Simplex { .. } => AmbiguitySet::simplex(a.k()),
        AmbiguitySet::Box { l, u } => {
            let lt: Vec<f64> = a.apply(l).into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
            let ut: Vec<f64> = a.apply(u).into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
            AmbiguitySet::box_set(lt, ut)
        }
        AmbiguitySet::Ellipsoid { p0, sigma, r } => {
            let pt = a.apply(p0);
            let st = a.conjugate(sigma);
            cholesky(&st).map_err(AmbiguityError::RankDeficient)?;
            AmbiguitySet::ellipsoid(pt, st, *r)
        }
    }
}

/// `sup { f' p : p in set }` together with an attaining `p`.
///
/// Simplex: unit mass on the best atom. Box: an LP over the box-simplex
/// intersection. Ellipsoid: the closed form on the mass-one hyperplane,
/// `value = f'p0 + r sqrt(f' S f)` with `S = Sigma -
/// Sigma 1 1' Sigma / (1' Sigma 1)`; errors if the maximizer leaves
/// `[0,1]^n` by more than 1e-9 instead of silently clipping.
pub fn worst_case_expectation(
    set: &AmbiguitySet,
    values: &[f64],
) -> Result<(f64, Vec<f64>), AmbiguityError> {
    let n = set.n_atoms();
    if values.len() != n {
        return Err(AmbiguityError::DimensionMismatch(format!(
            "{} values for {n} atoms",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AmbiguityError::InvalidDistribution("non-finite objective value".into()));
    }
    match set {
        AmbiguitySet::Simplex { .. } => {
            let mut best = 0usize;
            for i in 1..n {
                if values[i] > values[best] {
                    best = i;
                }
            }
            let mut p = vec![0.0; n];
            p[best] = 1.0;
            Ok((values[best], p))
        }
        AmbiguitySet::Box { l, u } => {
            let sum_l: f64 = l.iter().sum();
            let sum_u: f64 = u.iter().sum();
            if sum_l > 1.0 + FEAS_TOL || sum_u < 1.0 - FEAS_TOL {
                return Err(AmbiguityError::InfeasibleBox { sum_l, sum_u });
            }
            let mut lp = LinearProgram::new(Sense::Maximize, values.to_vec());
            lp.add_constraint(vec![1.0; n], Relation::Eq, 1.0);
            for i in 0..n {
                lp.set_bounds(i, l[i], u[i]);
            }
            let sol = solve_lp(&lp)?;
            match sol.status {
                LpStatus::Optimal => Ok((sol.objective, sol.x)),
                LpStatus::Infeasible => Err(AmbiguityError::InfeasibleBox { sum_l, sum_u }),
                LpStatus::Unbounded => {
                    Err(AmbiguityError::Lp(LpError::Numerical("bounded LP reported unbounded".into())))
                }
            }
        }
        AmbiguitySet::Ellipsoid { p0, sigma, r } => {
            // Restrict the covariance to the mass-one hyperplane.
            let ones = vec![1.0; n];
            let s_ones = sigma.matvec(&ones)?;
            let total: f64 = s_ones.iter().sum();
            let mut s_hat = sigma.clone();
            for i in 0..n {
                for j in 0..n {
                    s_hat[(i, j)] -= s_ones[i] * s_ones[j] / total;
                }
            }
            let g = s_hat.matvec(values)?;
            let quad: f64 = values.iter().zip(&g).map(|(&f, &gi)| f * gi).sum();
            let base: f64 = values.iter().zip(p0).map(|(&f, &p)| f * p).sum();
            let f_sigma_f: f64 = {
                let sf = sigma.matvec(values)?;
                values.iter().zip(&sf).map(|(&f, &s)| f * s).sum()
            };
            if quad <= 1e-14 * f_sigma_f.max(1.0) {
                return Ok((base, p0.clone()));
            }
            let root = quad.sqrt();
            let p: Vec<f64> =
                p0.iter().zip(&g).map(|(&c, &gi)| c + r * gi / root).collect();
            for (i, &v) in p.iter().enumerate() {
                if !(-FEAS_TOL..=1.0 + FEAS_TOL).contains(&v) {
                    return Err(AmbiguityError::BoundsViolated { index: i, value: v });
                }
            }
            Ok((base + r * root, p))
        }
    }
}

/// Worst case of reduced values over the exact image `{A p : p in set}`,
/// formulated as one LP with both the original `p` and the reduced mass
/// vector as variables. Supports the polytopal variants (simplex, box); the
/// ellipsoid image is handled in closed form by [`project`] +
/// [`worst_case_expectation`].
///
/// This is the reference oracle for projection exactness: its value must
/// match the worst case over the projected description.
pub fn worst_case_lifted(
    set: &AmbiguitySet,
    a: &AggregationMatrix,
    reduced_values: &[f64],
) -> Result<(f64, Vec<f64>), AmbiguityError> {
    let n = set.n_atoms();
    if n != a.n() {
        return Err(AmbiguityError::DimensionMismatch(format!(
            "set has {n} atoms, aggregation expects {}",
            a.n()
        )));
    }
    let k = a.k();
    if reduced_values.len() != k {
        return Err(AmbiguityError::DimensionMismatch(format!(
            "{} values for {k} clusters",
            reduced_values.len()
        )));
    }
    let (l, u): (Vec<f64>, Vec<f64>) = match set {
        AmbiguitySet::Simplex { .. } => (vec![0.0; n], vec![1.0; n]),
        AmbiguitySet::Box { l, u } => (l.clone(), u.clone()),
        AmbiguitySet::Ellipsoid { .. } => {
            return Err(AmbiguityError::UnsupportedVariant(
                "lifted LP needs a polytopal set; use project + worst_case_expectation",
            ))
        }
    };
    // Variables: p (n atoms) then q = A p (k cluster masses).
    let mut objective = vec![0.0; n];
    objective.extend_from_slice(reduced_values);
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    lp.add_constraint(
        (0..n + k).map(|j| if j < n { 1.0 } else { 0.0 }).collect(),
        Relation::Eq,
        1.0,
    );
    for j in 0..k {
        let mut coeffs = vec![0.0; n + k];
        for i in 0..n {
            if a.cluster_of(i) == j {
                coeffs[i] = 1.0;
            }
        }
        coeffs[n + j] = -1.0;
        lp.add_constraint(coeffs, Relation::Eq, 0.0);
    }
    for i in 0..n {
        lp.set_bounds(i, l[i], u[i]);
    }
    for j in 0..k {
        lp.set_bounds(n + j, 0.0, 1.0);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.x[..n].to_vec())),
        LpStatus::Infeasible => {
            let sum_l: f64 = l.iter().sum();
            let sum_u: f64 = u.iter().sum();
            Err(AmbiguityError::InfeasibleBox { sum_l, sum_u })
        }
        LpStatus::Unbounded => {
            Err(AmbiguityError::Lp(LpError::Numerical("bounded LP reported unbounded".into())))
        }
    }
}

/// Square root factor `Sigma^(1/2)` (symmetric), used by sampling-based
/// membership tests.
pub fn spd_sqrt(sigma: &DenseMatrix) -> Result<DenseMatrix, AmbiguityError> {
    let (vals, vecs) = sym_eigen(sigma)?;
    let n = sigma.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for (idx, &lambda) in vals.iter().enumerate() {
        if lambda < 0.0 {
            return Err(AmbiguityError::InvalidEllipsoid(format!(
                "negative eigenvalue {lambda:e} in covariance"
            )));
        }
        let s = lambda.sqrt();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += s * vecs[(i, idx)] * vecs[(j, idx)];
            }
        }
    }
    Ok(out)
}

/// Squared Mahalanobis distance `(p - p0)' Sigma^-1 (p - p0)`.
pub fn mahalanobis2(
    p: &[f64],
    p0: &[f64],
    sigma: &DenseMatrix,
) -> Result<f64, AmbiguityError> {
    let d: Vec<f64> = p.iter().zip(p0).map(|(&a, &b)| a - b).collect();
    let x = solve_spd(sigma, &d)?;
    Ok(d.iter().zip(&x).map(|(&a, &b)| a * b).sum())
}
