//! Python bindings for the scenario-reduction library: scenario sets,
//! ambiguity sets, clustering with certified guarantees, and the
//! reduce-and-solve pipeline.
//!
//! Wrappers hold owned copies of the core types; everything crossing the
//! boundary is plain lists, floats, and small frozen objects.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use scenred::ambiguity::{self, AggregationMatrix, AmbiguitySet};
use scenred::clustering::{self, Partition};
use scenred::dro::{self, DroInstance, DroObjective, DroSolution, FeasibleSet, ReductionMethod};
use scenred::linalg::DenseMatrix;
use scenred::lp::Relation;
use scenred::matrix_clustering::{self, MatrixPartition};
use scenred::scenarios::{generate_perturbed, MatrixScenarioSet, PerturbationSpec, ScenarioSet};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_relation(s: &str) -> PyResult<Relation> {
    match s {
        "<=" => Ok(Relation::Le),
        "=" => Ok(Relation::Eq),
        ">=" => Ok(Relation::Ge),
        other => Err(PyValueError::new_err(format!(
            "unknown relation {other:?}, expected \"<=\", \"=\", or \">=\""
        ))),
    }
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(rows).map_err(err)
}

// -------------------------------------------------------------------------
// scenario sets

#[pyclass(name = "ScenarioSet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyScenarioSet {
    inner: ScenarioSet,
}

#[pymethods]
impl PyScenarioSet {
    #[new]
    #[pyo3(signature = (scenarios, labels=None))]
    fn new(scenarios: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> PyResult<Self> {
        Ok(Self { inner: ScenarioSet::new(scenarios, labels).map_err(err)? })
    }

    /// Base vector perturbed componentwise by up to `s_inc` in both
    /// directions; deterministic in `seed`.
    #[staticmethod]
    fn perturbed(base: Vec<f64>, s_inc: f64, count: usize, seed: u64) -> PyResult<Self> {
        let spec = PerturbationSpec { base, s_inc, count, seed };
        Ok(Self { inner: generate_perturbed(&spec).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn scenario(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!("scenario index {i} out of range")));
        }
        Ok(self.inner.scenario(i).to_vec())
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.scenarios().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("ScenarioSet(len={}, dim={})", self.inner.len(), self.inner.dim())
    }
}

#[pyclass(name = "MatrixScenarioSet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMatrixScenarioSet {
    inner: MatrixScenarioSet,
}

#[pymethods]
impl PyMatrixScenarioSet {
    #[new]
    fn new(matrices: Vec<Vec<Vec<f64>>>) -> PyResult<Self> {
        let mats: Vec<DenseMatrix> =
            matrices.into_iter().map(matrix_from_rows).collect::<PyResult<_>>()?;
        Ok(Self { inner: MatrixScenarioSet::new(mats).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn matrix(&self, i: usize) -> PyResult<Vec<Vec<f64>>> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!("matrix index {i} out of range")));
        }
        Ok(self.inner.scenario(i).to_rows())
    }

    fn __repr__(&self) -> String {
        format!("MatrixScenarioSet(len={}, dim={})", self.inner.len(), self.inner.dim())
    }
}

// -------------------------------------------------------------------------
// ambiguity sets

#[pyclass(name = "AmbiguitySet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyAmbiguitySet {
    inner: AmbiguitySet,
}

#[pymethods]
impl PyAmbiguitySet {
    /// Whole probability simplex on `n` atoms.
    #[staticmethod]
    fn simplex(n: usize) -> PyResult<Self> {
        Ok(Self { inner: AmbiguitySet::simplex(n).map_err(err)? })
    }

    /// Componentwise bounds `l <= p <= u` intersected with the simplex.
    #[staticmethod]
    #[pyo3(name = "box")]
    fn box_set(l: Vec<f64>, u: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: AmbiguitySet::box_set(l, u).map_err(err)? })
    }

    /// `(p - p0)' inv(sigma) (p - p0) <= r^2` intersected with the mass
    /// constraint; `sigma` must be symmetric positive definite.
    #[staticmethod]
    fn ellipsoid(p0: Vec<f64>, sigma: Vec<Vec<f64>>, r: f64) -> PyResult<Self> {
        let sigma = matrix_from_rows(sigma)?;
        Ok(Self { inner: AmbiguitySet::ellipsoid(p0, sigma, r).map_err(err)? })
    }

    /// Simultaneous confidence box around an empirical distribution
    /// (`n_samples` observations, miscoverage `delta`).
    #[staticmethod]
    fn from_samples(p_hat: Vec<f64>, n_samples: usize, delta: f64) -> PyResult<Self> {
        Ok(Self { inner: ambiguity::from_samples(&p_hat, n_samples, delta).map_err(err)? })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.variant_name()
    }

    #[getter]
    fn n_atoms(&self) -> usize {
        self.inner.n_atoms()
    }

    /// `(l, u)` for a box set; error otherwise.
    fn bounds(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        match &self.inner {
            AmbiguitySet::Box { l, u } => Ok((l.clone(), u.clone())),
            other => Err(PyValueError::new_err(format!(
                "bounds() requires a box set, found {}",
                other.variant_name()
            ))),
        }
    }

    /// `(p0, sigma, r)` for an ellipsoid set; error otherwise.
    fn ellipsoid_params(&self) -> PyResult<(Vec<f64>, Vec<Vec<f64>>, f64)> {
        match &self.inner {
            AmbiguitySet::Ellipsoid { p0, sigma, r } => Ok((p0.clone(), sigma.to_rows(), *r)),
            other => Err(PyValueError::new_err(format!(
                "ellipsoid_params() requires an ellipsoid set, found {}",
                other.variant_name()
            ))),
        }
    }

    /// `max { f'p : p in set }` with a maximizer attaining it.
    fn worst_case(&self, f: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        ambiguity::worst_case_expectation(&self.inner, &f).map_err(err)
    }

    /// Pushforward through the cluster-summing map of `assignment` into
    /// `k` clusters; contains the image of every member distribution.
    fn aggregate(&self, assignment: Vec<usize>, k: usize) -> PyResult<Self> {
        let agg = AggregationMatrix::from_assignment(&assignment, k).map_err(err)?;
        Ok(Self { inner: ambiguity::project(&self.inner, &agg).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("AmbiguitySet(kind={:?}, n_atoms={})", self.inner.variant_name(), self.inner.n_atoms())
    }
}

// -------------------------------------------------------------------------
// clustering

#[pyclass(name = "Partition", frozen)]
struct PyPartition {
    inner: Partition,
}

#[pymethods]
impl PyPartition {
    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn assignment(&self) -> Vec<usize> {
        self.inner.assignment.clone()
    }

    #[getter]
    fn representatives(&self) -> Vec<Vec<f64>> {
        self.inner.representatives.clone()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    /// Certified approximation factor `alpha * beta`.
    #[getter]
    fn guarantee(&self) -> f64 {
        self.inner.guarantee()
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.method.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Partition(k={}, guarantee={}, method={:?})",
            self.inner.k,
            self.inner.guarantee(),
            self.inner.method
        )
    }
}

#[pyclass(name = "MatrixPartition", frozen)]
struct PyMatrixPartition {
    inner: MatrixPartition,
}

#[pymethods]
impl PyMatrixPartition {
    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn assignment(&self) -> Vec<usize> {
        self.inner.assignment.clone()
    }

    #[getter]
    fn representatives(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.representatives.iter().map(DenseMatrix::to_rows).collect()
    }

    /// Per-cluster scaling factors in the positive-semidefinite order.
    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha.clone()
    }

    #[getter]
    fn beta(&self) -> Vec<f64> {
        self.inner.beta.clone()
    }

    #[getter]
    fn guarantee(&self) -> f64 {
        self.inner.guarantee
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.method.clone()
    }

    /// Re-verifies the PSD sandwich for every cluster at tolerance `tol`.
    #[pyo3(signature = (scenarios, tol=1e-9))]
    fn certified(&self, scenarios: PyRef<PyMatrixScenarioSet>, tol: f64) -> PyResult<bool> {
        self.inner.certified(&scenarios.inner, tol).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "MatrixPartition(k={}, guarantee={}, method={:?})",
            self.inner.k, self.inner.guarantee, self.inner.method
        )
    }
}

/// Guarantee-optimal partition into `k` clusters (exact search).
#[pyfunction]
fn optimal_partition(scenarios: PyRef<PyScenarioSet>, k: usize) -> PyResult<PyPartition> {
    Ok(PyPartition { inner: clustering::optimal_partition(&scenarios.inner, k).map_err(err)? })
}

/// Seeded k-means in log space with certified guarantees.
#[pyfunction]
#[pyo3(signature = (scenarios, k, seed=0, max_iter=100))]
fn kmeans_partition(
    scenarios: PyRef<PyScenarioSet>,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> PyResult<PyPartition> {
    Ok(PyPartition {
        inner: clustering::kmeans_partition(&scenarios.inner, k, seed, max_iter).map_err(err)?,
    })
}

/// Geometric axis splitting; returns `(partition, a_priori_bound,
/// breakpoints)`.
#[pyfunction]
fn hyperrect_partition(
    scenarios: PyRef<PyScenarioSet>,
    splits: Vec<usize>,
) -> PyResult<(PyPartition, f64, Vec<Vec<f64>>)> {
    let reduction = clustering::hyperrect_partition(&scenarios.inner, &splits).map_err(err)?;
    Ok((PyPartition { inner: reduction.partition }, reduction.bound, reduction.breakpoints))
}

/// A-priori guarantee of geometric splitting on the box `[lo, hi]`:
/// `max_i (hi_i / lo_i)^(1 / splits_i)`.
#[pyfunction]
fn hyperrect_bound(lo: Vec<f64>, hi: Vec<f64>, splits: Vec<usize>) -> PyResult<f64> {
    clustering::hyperrect_bound(&lo, &hi, &splits).map_err(err)
}

/// Interior geometric breakpoints per axis (`splits_i - 1` values each).
#[pyfunction]
fn hyperrect_breakpoints(
    lo: Vec<f64>,
    hi: Vec<f64>,
    splits: Vec<usize>,
) -> PyResult<Vec<Vec<f64>>> {
    clustering::hyperrect_breakpoints(&lo, &hi, &splits).map_err(err)
}

/// `(alpha, beta)` certified for an explicit assignment and representative
/// choice.
#[pyfunction]
fn guarantee_of(
    scenarios: PyRef<PyScenarioSet>,
    assignment: Vec<usize>,
    representatives: Vec<Vec<f64>>,
) -> PyResult<(f64, f64)> {
    clustering::guarantee_of(&scenarios.inner, &assignment, &representatives).map_err(err)
}

/// Guarantee-optimal partition of SPD matrix scenarios (exact search).
#[pyfunction]
fn optimal_matrix_partition(
    scenarios: PyRef<PyMatrixScenarioSet>,
    k: usize,
) -> PyResult<PyMatrixPartition> {
    Ok(PyMatrixPartition {
        inner: matrix_clustering::optimal_matrix_partition(&scenarios.inner, k).map_err(err)?,
    })
}

/// Frobenius k-means on matrix scenarios with eigenvalue-certified
/// guarantees.
#[pyfunction]
#[pyo3(signature = (scenarios, k, seed=0, max_iter=100))]
fn frobenius_kmeans(
    scenarios: PyRef<PyMatrixScenarioSet>,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> PyResult<PyMatrixPartition> {
    Ok(PyMatrixPartition {
        inner: matrix_clustering::frobenius_kmeans(&scenarios.inner, k, seed, max_iter)
            .map_err(err)?,
    })
}

// -------------------------------------------------------------------------
// robust optimization

#[pyclass(name = "FeasibleSet", skip_from_py_object)]
#[derive(Clone)]
struct PyFeasibleSet {
    inner: FeasibleSet,
}

#[pymethods]
impl PyFeasibleSet {
    /// Nonnegative orthant on `n` variables (upper bounds open).
    #[new]
    fn new(n: usize) -> Self {
        Self { inner: FeasibleSet::nonneg(n) }
    }

    /// Decision simplex: `x >= 0`, `sum x = 1`.
    #[staticmethod]
    fn simplex(n: usize) -> Self {
        Self { inner: FeasibleSet::simplex(n) }
    }

    /// Portfolio set: simplex plus a minimum expected return `mu'x >= r`.
    #[staticmethod]
    fn markowitz(mu: Vec<f64>, r_target: f64) -> Self {
        Self { inner: FeasibleSet::markowitz(mu, r_target) }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    /// Adds `coeffs' x <relation> rhs`; relation is `"<="`, `"="`, or
    /// `">="`.
    fn add_constraint(&mut self, coeffs: Vec<f64>, relation: &str, rhs: f64) -> PyResult<()> {
        if coeffs.len() != self.inner.n {
            return Err(PyValueError::new_err(format!(
                "constraint has {} coefficients for {} variables",
                coeffs.len(),
                self.inner.n
            )));
        }
        self.inner.add_constraint(coeffs, parse_relation(relation)?, rhs);
        Ok(())
    }

    /// Variable bounds; lower must stay nonnegative.
    fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> PyResult<()> {
        if var >= self.inner.n {
            return Err(PyValueError::new_err(format!("variable index {var} out of range")));
        }
        if !(0.0..=upper).contains(&lower) {
            return Err(PyValueError::new_err(format!(
                "bounds [{lower}, {upper}] must satisfy 0 <= lower <= upper"
            )));
        }
        self.inner.lower[var] = lower;
        self.inner.upper[var] = upper;
        Ok(())
    }

    fn set_binary(&mut self, var: usize) -> PyResult<()> {
        if var >= self.inner.n {
            return Err(PyValueError::new_err(format!("variable index {var} out of range")));
        }
        self.inner.set_binary(var);
        Ok(())
    }

    fn __repr__(&self) -> String {
        format!(
            "FeasibleSet(n={}, constraints={}, binaries={})",
            self.inner.n,
            self.inner.constraints.len(),
            self.inner.binary.iter().filter(|&&b| b).count()
        )
    }
}

#[pyclass(name = "Solution", frozen)]
struct PySolution {
    #[pyo3(get)]
    x: Vec<f64>,
    #[pyo3(get)]
    objective: f64,
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    wall_time_s: f64,
}

impl From<DroSolution> for PySolution {
    fn from(s: DroSolution) -> Self {
        Self {
            x: s.x,
            objective: s.objective,
            method: s.method,
            iterations: s.iterations,
            wall_time_s: s.wall_time_s,
        }
    }
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!("Solution(objective={}, method={:?})", self.objective, self.method)
    }
}

#[pyclass(name = "Instance", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: DroInstance,
}

#[pymethods]
impl PyInstance {
    /// `min_x sup_P E[s'x]` over vector scenarios.
    #[staticmethod]
    fn linear(
        scenarios: PyRef<PyScenarioSet>,
        feasible: PyRef<PyFeasibleSet>,
        ambiguity: PyRef<PyAmbiguitySet>,
    ) -> PyResult<Self> {
        let objective = DroObjective::Linear { scenarios: scenarios.inner.clone() };
        Ok(Self {
            inner: DroInstance::new(objective, feasible.inner.clone(), ambiguity.inner.clone())
                .map_err(err)?,
        })
    }

    /// `min_x sup_P E[x'Qx]` over SPD matrix scenarios.
    #[staticmethod]
    fn quadratic(
        scenarios: PyRef<PyMatrixScenarioSet>,
        feasible: PyRef<PyFeasibleSet>,
        ambiguity: PyRef<PyAmbiguitySet>,
    ) -> PyResult<Self> {
        let objective = DroObjective::Quadratic { scenarios: scenarios.inner.clone() };
        Ok(Self {
            inner: DroInstance::new(objective, feasible.inner.clone(), ambiguity.inner.clone())
                .map_err(err)?,
        })
    }

    #[getter]
    fn n_vars(&self) -> usize {
        self.inner.objective.n_vars()
    }

    #[getter]
    fn n_scenarios(&self) -> usize {
        self.inner.objective.n_scenarios()
    }

    /// Solves the instance; `method` is `"auto"`, `"dual"`, or
    /// `"cutting"`.
    #[pyo3(signature = (method="auto"))]
    fn solve(&self, method: &str) -> PyResult<PySolution> {
        let solution = match method {
            "auto" => dro::solve(&self.inner),
            "dual" => dro::solve_box_dual(&self.inner),
            "cutting" => dro::solve_cutting_plane(&self.inner),
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown solver {other:?}, expected \"auto\", \"dual\", or \"cutting\""
                )))
            }
        }
        .map_err(err)?;
        Ok(solution.into())
    }

    /// Worst-case expected objective of a fixed feasible `x`.
    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        dro::evaluate_solution(&self.inner, &x).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n_vars={}, n_scenarios={}, ambiguity={:?})",
            self.inner.objective.n_vars(),
            self.inner.objective.n_scenarios(),
            self.inner.ambiguity.variant_name()
        )
    }
}

#[pyclass(name = "Metrics", frozen)]
struct PyMetrics {
    #[pyo3(get)]
    af: f64,
    #[pyo3(get)]
    tf: f64,
    #[pyo3(get)]
    srf: f64,
    #[pyo3(get)]
    alpha: f64,
    #[pyo3(get)]
    beta: f64,
    #[pyo3(get)]
    guarantee: f64,
    #[pyo3(get)]
    original_objective: f64,
    #[pyo3(get)]
    reduced_objective: f64,
    #[pyo3(get)]
    evaluated_upper: f64,
    #[pyo3(get)]
    certificate_ok: bool,
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    k: usize,
    #[pyo3(get)]
    n_scenarios: usize,
    #[pyo3(get)]
    assignment: Vec<usize>,
    #[pyo3(get)]
    x: Vec<f64>,
}

#[pymethods]
impl PyMetrics {
    fn __repr__(&self) -> String {
        format!(
            "Metrics(k={}, af={}, guarantee={}, certificate_ok={})",
            self.k, self.af, self.guarantee, self.certificate_ok
        )
    }
}

/// Clusters the instance's scenarios to `k` representatives, solves both
/// problems, and certifies the reduced minimizer against the original.
/// `method` is `"opt"`, `"kmeans"`, or `"hyperrect"` (which needs
/// `splits` multiplying to `k`).
#[pyfunction]
#[pyo3(signature = (instance, method, k, seed=0, max_iter=100, splits=None))]
fn reduce_and_solve(
    instance: PyRef<PyInstance>,
    method: &str,
    k: usize,
    seed: u64,
    max_iter: usize,
    splits: Option<Vec<usize>>,
) -> PyResult<PyMetrics> {
    let method = match method {
        "opt" => ReductionMethod::Opt,
        "kmeans" => ReductionMethod::Kmeans { seed, max_iter },
        "hyperrect" => ReductionMethod::Hyperrect {
            splits: splits.ok_or_else(|| {
                PyValueError::new_err("hyperrect reduction needs splits=[r_1, ..., r_m]")
            })?,
        },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method {other:?}, expected \"opt\", \"kmeans\", or \"hyperrect\""
            )))
        }
    };
    let run = dro::reduce_and_solve(&instance.inner, &method, k).map_err(err)?;
    let r = run.report;
    Ok(PyMetrics {
        af: r.af,
        tf: r.tf,
        srf: r.srf,
        alpha: r.alpha,
        beta: r.beta,
        guarantee: r.guarantee,
        original_objective: r.original_objective,
        reduced_objective: r.reduced_objective,
        evaluated_upper: r.evaluated_upper,
        certificate_ok: r.certificate_ok,
        method: r.method,
        k: r.k,
        n_scenarios: r.n_scenarios,
        assignment: run.partition.assignment().to_vec(),
        x: run.reduced.x,
    })
}

#[pymodule]
fn scenred_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenarioSet>()?;
    m.add_class::<PyMatrixScenarioSet>()?;
    m.add_class::<PyAmbiguitySet>()?;
    m.add_class::<PyPartition>()?;
    m.add_class::<PyMatrixPartition>()?;
    m.add_class::<PyFeasibleSet>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PyMetrics>()?;
    m.add_function(wrap_pyfunction!(optimal_partition, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans_partition, m)?)?;
    m.add_function(wrap_pyfunction!(hyperrect_partition, m)?)?;
    m.add_function(wrap_pyfunction!(hyperrect_bound, m)?)?;
    m.add_function(wrap_pyfunction!(hyperrect_breakpoints, m)?)?;
    m.add_function(wrap_pyfunction!(guarantee_of, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_matrix_partition, m)?)?;
    m.add_function(wrap_pyfunction!(frobenius_kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_and_solve, m)?)?;
    Ok(())
}
