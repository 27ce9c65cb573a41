//! Cluster positive-definite matrix scenarios with guarantees certified in
//! the PSD order: `Q_i ⪯ alpha_j * rep_j` and `rep_j ⪯ beta_j * Q_i` for
//! every member of cluster `j`.
//!
//! Certificates come from the eigenvalue sufficient condition
//! `lambda_max(A) <= lambda_min(B)  implies  A ⪯ B`, so the per-cluster pair
//!
//! ```text
//! alpha_j = max_i lambda_max(Q_i) / lambda_min(rep_j)
//! beta_j  = lambda_max(rep_j) / min_i lambda_min(Q_i)
//! ```
//!
//! is always valid (an upper bound; it need not be tight). The exact
//! small-scale search [`optimal_matrix_partition`] restricts representatives
//! to scaled identities `c_j * I` with `c_j = min_i lambda_min(Q_i)`; free
//! PSD representative matrices would need a general SDP solver and are out
//! of scope. [`frobenius_kmeans`] clusters in Frobenius geometry with
//! entrywise-mean representatives and certifies them the same way.

use crate::linalg::{sym_eigen, DenseMatrix, LinalgError};
use crate::scenarios::MatrixScenarioSet;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exhaustive partition search is limited to this many matrix scenarios.
pub const MAX_EXACT_MATRIX_SCENARIOS: usize = 12;

#[derive(Debug, Error)]
pub enum MatrixClusterError {
    #[error("cluster count {k} invalid for {n} scenarios (need 1 <= K <= n)")]
    InvalidK { k: usize, n: usize },
    #[error("exact search supports at most {MAX_EXACT_MATRIX_SCENARIOS} scenarios, got {0}")]
    TooManyScenarios(usize),
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("assignment length {found} does not match scenario count {expected}")]
    AssignmentMismatch { expected: usize, found: usize },
    #[error("representative is numerically singular (lambda_min = {lambda_min:e})")]
    SingularRepresentative { lambda_min: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `A ⪯ B` in the PSD order, tested as
/// `lambda_min(B - A) >= -tol * max(1, ||B - A||_F)`.
pub fn psd_leq(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> Result<bool, MatrixClusterError> {
    let diff = b.sub(a)?;
    let (vals, _) = sym_eigen(&diff)?;
    Ok(vals[0] >= -tol * diff.frobenius_norm().max(1.0))
}

/// Eigenvalue data backing one cluster's certified pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigCertificate {
    /// `max_i lambda_max(Q_i)` over the cluster members.
    pub members_lambda_max: f64,
    /// `min_i lambda_min(Q_i)` over the cluster members.
    pub members_lambda_min: f64,
    pub rep_lambda_min: f64,
    pub rep_lambda_max: f64,
}

impl EigCertificate {
    fn pair(&self) -> (f64, f64) {
        (
            self.members_lambda_max / self.rep_lambda_min,
            self.rep_lambda_max / self.members_lambda_min,
        )
    }
}

/// A matrix clustering with per-cluster certified pairs. The overall
/// guarantee is `max_j alpha_j * beta_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixPartition {
    #[serde(rename = "K")]
    pub k: usize,
    pub assignment: Vec<usize>,
    pub representatives: Vec<DenseMatrix>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub guarantee: f64,
    pub method: String,
    pub seed: Option<u64>,
    pub certificates: Vec<EigCertificate>,
}

impl MatrixPartition {
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &j) in self.assignment.iter().enumerate() {
            out[j].push(i);
        }
        out
    }

    /// Checks the PSD-order certificate for every member:
    /// `Q_i ⪯ alpha_j * rep_j` and `rep_j ⪯ beta_j * Q_i`, at tolerance `tol`.
    pub fn certified(&self, set: &MatrixScenarioSet, tol: f64) -> Result<bool, MatrixClusterError> {
        for (i, &j) in self.assignment.iter().enumerate() {
            let q = set.scenario(i);
            let rep = &self.representatives[j];
            if !psd_leq(q, &rep.scaled(self.alpha[j]), tol)? {
                return Ok(false);
            }
            if !psd_leq(rep, &q.scaled(self.beta[j]), tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn rep_range(rep: &DenseMatrix) -> Result<(f64, f64), MatrixClusterError> {
    let (vals, _) = sym_eigen(rep)?;
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    if lo <= 1e-12 * hi.max(1.0) {
        return Err(MatrixClusterError::SingularRepresentative { lambda_min: lo });
    }
    Ok((lo, hi))
}

fn pair_from_ranges(member_ranges: &[(f64, f64)], rep: (f64, f64)) -> EigCertificate {
    let members_lambda_max = member_ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let members_lambda_min = member_ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    EigCertificate {
        members_lambda_max,
        members_lambda_min,
        rep_lambda_min: rep.0,
        rep_lambda_max: rep.1,
    }
}

/// Certified pair for one cluster against a representative, from the
/// eigenvalue sufficient condition. `alpha * rep` dominates every member
/// because `lambda_max(Q_i) <= alpha * lambda_min(rep)`, and symmetrically
/// for `beta`.
pub fn eig_guarantee(
    cluster: &[&DenseMatrix],
    rep: &DenseMatrix,
) -> Result<(f64, f64), MatrixClusterError> {
    let mut ranges = Vec::with_capacity(cluster.len());
    for q in cluster {
        let (vals, _) = sym_eigen(q)?;
        ranges.push((vals[0], vals[vals.len() - 1]));
    }
    let rep = rep_range(rep)?;
    Ok(pair_from_ranges(&ranges, rep).pair())
}

fn check_assignment(
    set: &MatrixScenarioSet,
    assignment: &[usize],
    k: usize,
) -> Result<Vec<Vec<usize>>, MatrixClusterError> {
    if assignment.len() != set.len() {
        return Err(MatrixClusterError::AssignmentMismatch {
            expected: set.len(),
            found: assignment.len(),
        });
    }
    let mut clusters = vec![Vec::new(); k];
    for (i, &j) in assignment.iter().enumerate() {
        if j >= k {
            return Err(MatrixClusterError::InvalidK { k, n: set.len() });
        }
        clusters[j].push(i);
    }
    if let Some(j) = clusters.iter().position(Vec::is_empty) {
        return Err(MatrixClusterError::EmptyCluster(j));
    }
    Ok(clusters)
}

fn assemble(
    set: &MatrixScenarioSet,
    assignment: Vec<usize>,
    representatives: Vec<DenseMatrix>,
    method: &str,
    seed: Option<u64>,
) -> Result<MatrixPartition, MatrixClusterError> {
    let k = representatives.len();
    let clusters = check_assignment(set, &assignment, k)?;
    let mut alpha = Vec::with_capacity(k);
    let mut beta = Vec::with_capacity(k);
    let mut certificates = Vec::with_capacity(k);
    let mut guarantee = 1.0f64;
    for (j, members) in clusters.iter().enumerate() {
        let ranges: Vec<(f64, f64)> = members.iter().map(|&i| set.eig_range(i)).collect();
        let cert = pair_from_ranges(&ranges, rep_range(&representatives[j])?);
        let (a, b) = cert.pair();
        guarantee = guarantee.max(a * b);
        alpha.push(a);
        beta.push(b);
        certificates.push(cert);
    }
    Ok(MatrixPartition {
        k,
        assignment,
        representatives,
        alpha,
        beta,
        guarantee,
        method: method.into(),
        seed,
        certificates,
    })
}

/// Exact minimizer of `max_j alpha_j * beta_j` over all `K`-partitions, with
/// representatives restricted to scaled identities `c_j * I`,
/// `c_j = min_i lambda_min(Q_i)`. Under that choice `beta_j = 1` and the
/// cluster guarantee reduces to `max_i lambda_max(Q_i) / min_i lambda_min(Q_i)`,
/// so the search is a pure assignment problem solved by depth-first
/// enumeration with a monotone bound.
pub fn optimal_matrix_partition(
    set: &MatrixScenarioSet,
    k: usize,
) -> Result<MatrixPartition, MatrixClusterError> {
    let n = set.len();
    if k == 0 || k > n {
        return Err(MatrixClusterError::InvalidK { k, n });
    }
    if n > MAX_EXACT_MATRIX_SCENARIOS {
        return Err(MatrixClusterError::TooManyScenarios(n));
    }

    // Widest spectra first: large kappa = lambda_max/lambda_min drives the
    // bound up early, which is where pruning helps.
    let mut order: Vec<usize> = (0..n).collect();
    let kappa = |i: usize| {
        let (lo, hi) = set.eig_range(i);
        hi / lo
    };
    order.sort_by(|&a, &b| kappa(b).partial_cmp(&kappa(a)).unwrap().then(a.cmp(&b)));

    struct Search<'a> {
        set: &'a MatrixScenarioSet,
        order: &'a [usize],
        k: usize,
        lo: Vec<f64>,
        hi: Vec<f64>,
        assignment: Vec<usize>,
        best_cost: f64,
        best_assignment: Vec<usize>,
    }

    impl Search<'_> {
        fn dfs(&mut self, pos: usize, used: usize, cost: f64) {
            if pos == self.order.len() {
                if used == self.k && cost < self.best_cost {
                    self.best_cost = cost;
                    self.best_assignment = self.assignment.clone();
                }
                return;
            }
            if self.order.len() - pos < self.k - used {
                return;
            }
            let i = self.order[pos];
            let (qlo, qhi) = self.set.eig_range(i);
            for j in 0..(used + 1).min(self.k) {
                let (old_lo, old_hi) = (self.lo[j], self.hi[j]);
                let fresh = j == used;
                let (new_lo, new_hi) = if fresh {
                    (qlo, qhi)
                } else {
                    (old_lo.min(qlo), old_hi.max(qhi))
                };
                let node_cost = cost.max(new_hi / new_lo);
                if node_cost < self.best_cost {
                    self.lo[j] = new_lo;
                    self.hi[j] = new_hi;
                    self.assignment[i] = j;
                    self.dfs(pos + 1, used + fresh as usize, node_cost);
                    self.lo[j] = old_lo;
                    self.hi[j] = old_hi;
                }
            }
        }
    }

    let mut search = Search {
        set,
        order: &order,
        k,
        lo: vec![0.0; k],
        hi: vec![0.0; k],
        assignment: vec![0; n],
        best_cost: f64::INFINITY,
        best_assignment: Vec::new(),
    };
    search.dfs(0, 0, 1.0);

    // Relabel by first appearance in scenario order, then build c_j * I reps.
    let mut relabel = vec![usize::MAX; k];
    let mut next = 0usize;
    let mut assignment = vec![0usize; n];
    for i in 0..n {
        let raw = search.best_assignment[i];
        if relabel[raw] == usize::MAX {
            relabel[raw] = next;
            next += 1;
        }
        assignment[i] = relabel[raw];
    }
    let mut c = vec![f64::INFINITY; k];
    for (i, &j) in assignment.iter().enumerate() {
        c[j] = c[j].min(set.eig_range(i).0);
    }
    let representatives: Vec<DenseMatrix> =
        c.iter().map(|&cj| DenseMatrix::identity(set.dim()).scaled(cj)).collect();
    assemble(set, assignment, representatives, "opt", None)
}

/// Lloyd's algorithm in Frobenius geometry: centroids are entrywise means
/// (symmetric positive definite as convex combinations of the members), and
/// the final clusters are certified through the eigenvalue bound.
pub fn frobenius_kmeans(
    set: &MatrixScenarioSet,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<MatrixPartition, MatrixClusterError> {
    let n = set.len();
    if k == 0 || k > n {
        return Err(MatrixClusterError::InvalidK { k, n });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + (rand::Rng::random_range(&mut rng, 0..(n - i) as u64)) as usize;
        idx.swap(i, j);
    }
    let mut centers: Vec<DenseMatrix> = idx[..k].iter().map(|&i| set.scenario(i).clone()).collect();

    let dist2 = |a: &DenseMatrix, b: &DenseMatrix| -> f64 {
        let d = a.sub(b).expect("same shape by construction");
        let f = d.frobenius_norm();
        f * f
    };

    let mean_of = |members: &[usize]| -> DenseMatrix {
        let mut acc = DenseMatrix::zeros(set.dim(), set.dim());
        for &i in members {
            acc = acc.add(set.scenario(i)).expect("same shape");
        }
        acc.scaled(1.0 / members.len() as f64)
    };

    let mut assignment = vec![0usize; n];
    for _ in 0..max_iter.max(1) {
        let mut next = vec![0usize; n];
        for i in 0..n {
            let q = set.scenario(i);
            let mut best = 0usize;
            let mut best_d = dist2(q, &centers[0]);
            for (j, ctr) in centers.iter().enumerate().skip(1) {
                let d = dist2(q, ctr);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            next[i] = best;
        }
        let mut counts = vec![0usize; k];
        for &j in &next {
            counts[j] += 1;
        }
        // Same repair rule as the vector module: fill each empty cluster by
        // stealing the member farthest from its own center.
        for empty in 0..k {
            if counts[empty] > 0 {
                continue;
            }
            let mut donor: Option<(usize, f64)> = None;
            for i in 0..n {
                if counts[next[i]] <= 1 {
                    continue;
                }
                let d = dist2(set.scenario(i), &centers[next[i]]);
                if donor.map_or(true, |(_, dd)| d > dd) {
                    donor = Some((i, d));
                }
            }
            let (steal, _) = donor.expect("k <= n guarantees a donor");
            counts[next[steal]] -= 1;
            next[steal] = empty;
            counts[empty] = 1;
        }
        let fixpoint = next == assignment;
        assignment = next;
        let mut clusters = vec![Vec::new(); k];
        for (i, &j) in assignment.iter().enumerate() {
            clusters[j].push(i);
        }
        centers = clusters.iter().map(|members| mean_of(members)).collect();
        if fixpoint {
            break;
        }
    }

    let mut relabel = vec![usize::MAX; k];
    let mut next_id = 0usize;
    for a in &mut assignment {
        if relabel[*a] == usize::MAX {
            relabel[*a] = next_id;
            next_id += 1;
        }
        *a = relabel[*a];
    }
    let mut clusters = vec![Vec::new(); k];
    for (i, &j) in assignment.iter().enumerate() {
        clusters[j].push(i);
    }
    let representatives: Vec<DenseMatrix> =
        clusters.iter().map(|members| mean_of(members)).collect();
    assemble(set, assignment, representatives, "frobenius-kmeans", Some(seed))
}

/// Big-M constants for the assignment MISDP: `lambda_cap[i] = lambda_max(Q_i)`
/// deactivates the upper coupling, `spread[i] = max_i' lambda_max(Q_i') -
/// lambda_min(Q_i)` the lower one. The big-M terms enter the matrix
/// inequalities as scalars times the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisdpBigM {
    pub lambda_cap: Vec<f64>,
    pub spread: Vec<f64>,
}

pub fn misdp_big_m(set: &MatrixScenarioSet) -> MisdpBigM {
    let global_max = (0..set.len()).map(|i| set.eig_range(i).1).fold(f64::NEG_INFINITY, f64::max);
    let lambda_cap: Vec<f64> = (0..set.len()).map(|i| set.eig_range(i).1).collect();
    let spread: Vec<f64> = (0..set.len()).map(|i| global_max - set.eig_range(i).0).collect();
    MisdpBigM { lambda_cap, spread }
}

/// Renders the matrix clustering assignment MISDP as text for external
/// solvers: binary assignment `z[i][j]`, PSD representative variables
/// `R[j]`, and big-M deactivation with the constants of [`misdp_big_m`]
/// entering as scalar multiples of the identity.
pub fn emit_misdp(set: &MatrixScenarioSet, k: usize) -> String {
    use std::fmt::Write;
    let big_m = misdp_big_m(set);
    let n = set.len();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ Matrix clustering assignment MISDP: {n} scenarios of size {d}x{d}, K = {k}",
        d = set.dim()
    );
    let _ = writeln!(out, "minimize t");
    let _ = writeln!(out, "subject to");
    for i in 0..n {
        let vars: Vec<String> = (0..k).map(|j| format!("z[{i}][{j}]")).collect();
        let _ = writeln!(out, "  {} = 1", vars.join(" + "));
    }
    for j in 0..k {
        let vars: Vec<String> = (0..n).map(|i| format!("z[{i}][{j}]")).collect();
        let _ = writeln!(out, "  {} >= 1", vars.join(" + "));
    }
    for i in 0..n {
        for j in 0..k {
            let _ = writeln!(
                out,
                "  Q[{i}] <= t * R[{j}] + {} * (1 - z[{i}][{j}]) * Id   (psd order)",
                big_m.lambda_cap[i]
            );
            let _ = writeln!(
                out,
                "  R[{j}] <= Q[{i}] + {} * (1 - z[{i}][{j}]) * Id   (psd order)",
                big_m.spread[i]
            );
        }
    }
    let _ = writeln!(out, "  t >= 1, R[j] psd, z binary");
    out
}
