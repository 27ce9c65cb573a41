//! Vector and matrix scenario sets: validation, synthetic generation, and
//! file I/O.
//!
//! Every guarantee downstream leans on strict positivity of vector scenarios
//! (and positive definiteness of matrix scenarios), so both are enforced at
//! construction and again when loading from files; non-positive inputs are a
//! hard error, never auto-shifted.

use crate::linalg::{sym_eigen, DenseMatrix, LinalgError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

/// Identifier of the RNG scheme recorded in reports: a ChaCha12 stream
/// seeded from a 64-bit integer, drawing scenario-major, component-minor,
/// with componentwise-independent perturbations.
pub const RNG_ALGORITHM: &str = "chacha12-seed64-componentwise";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario set must contain at least one scenario")]
    Empty,
    #[error("scenario {scenario} has dimension {found}, expected {expected}")]
    DimensionMismatch { scenario: usize, expected: usize, found: usize },
    #[error("scenario {scenario}, component {component} is {value}, but every component must be strictly positive")]
    NotPositive { scenario: usize, component: usize, value: f64 },
    #[error("labels count {labels} does not match scenario count {scenarios}")]
    LabelMismatch { labels: usize, scenarios: usize },
    #[error("invalid perturbation spec: {0}")]
    InvalidSpec(String),
    #[error("matrix scenario {scenario}: {source}")]
    InvalidMatrix { scenario: usize, source: LinalgError },
    #[error("matrix scenario {scenario} is not positive definite enough: lambda_min {lambda_min:e} vs lambda_max {lambda_max:e}")]
    NotPositiveDefinite { scenario: usize, lambda_min: f64, lambda_max: f64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("unsupported file format for {path} (expected .csv or .json)")]
    UnsupportedFormat { path: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Returns the first strictly-positive violation in raw scenario data, if any.
pub fn validate(rows: &[Vec<f64>]) -> Result<(), ScenarioError> {
    for (i, row) in rows.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ScenarioError::NotPositive { scenario: i, component: k, value: v });
            }
        }
    }
    Ok(())
}

/// A finite collection of strictly positive vectors, all of dimension `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioSetData")]
pub struct ScenarioSet {
    m: usize,
    scenarios: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

/// Raw serde image of a [`ScenarioSet`]; validated on conversion. The
/// dimension `m` is optional in documents and cross-checked when present.
#[derive(Deserialize)]
struct ScenarioSetData {
    #[serde(default)]
    m: Option<usize>,
    scenarios: Vec<Vec<f64>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

impl TryFrom<ScenarioSetData> for ScenarioSet {
    type Error = ScenarioError;

    fn try_from(data: ScenarioSetData) -> Result<Self, ScenarioError> {
        let set = ScenarioSet::new(data.scenarios, data.labels)?;
        if let Some(m) = data.m {
            if set.dim() != m {
                return Err(ScenarioError::DimensionMismatch {
                    scenario: 0,
                    expected: m,
                    found: set.dim(),
                });
            }
        }
        Ok(set)
    }
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self, ScenarioError> {
        if scenarios.is_empty() {
            return Err(ScenarioError::Empty);
        }
        let m = scenarios[0].len();
        if m == 0 {
            return Err(ScenarioError::DimensionMismatch { scenario: 0, expected: 1, found: 0 });
        }
        for (i, s) in scenarios.iter().enumerate() {
            if s.len() != m {
                return Err(ScenarioError::DimensionMismatch {
                    scenario: i,
                    expected: m,
                    found: s.len(),
                });
            }
        }
        validate(&scenarios)?;
        if let Some(ref l) = labels {
            if l.len() != scenarios.len() {
                return Err(ScenarioError::LabelMismatch {
                    labels: l.len(),
                    scenarios: scenarios.len(),
                });
            }
        }
        Ok(Self { m, scenarios, labels })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scenario(&self, i: usize) -> &[f64] {
        &self.scenarios[i]
    }

    pub fn scenarios(&self) -> &[Vec<f64>] {
        &self.scenarios
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Componentwise minimum over all scenarios.
    pub fn componentwise_min(&self) -> Vec<f64> {
        let mut lo = self.scenarios[0].clone();
        for s in &self.scenarios[1..] {
            for (l, &v) in lo.iter_mut().zip(s) {
                if v < *l {
                    *l = v;
                }
            }
        }
        lo
    }

    /// Componentwise maximum over all scenarios.
    pub fn componentwise_max(&self) -> Vec<f64> {
        let mut hi = self.scenarios[0].clone();
        for s in &self.scenarios[1..] {
            for (h, &v) in hi.iter_mut().zip(s) {
                if v > *h {
                    *h = v;
                }
            }
        }
        hi
    }

    pub fn save_csv<W: Write>(&self, out: W) -> Result<(), ScenarioError> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = (0..self.m).map(|k| format!("s_{k}")).collect();
        w.write_record(&header).map_err(csv_err)?;
        for s in &self.scenarios {
            // `{}` prints the shortest decimal that round-trips, so
            // save -> load is the identity.
            let rec: Vec<String> = s.iter().map(|v| format!("{v}")).collect();
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_csv<R: std::io::Read>(input: R) -> Result<Self, ScenarioError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(csv_err)?.clone();
        let m = header.len();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record.map_err(csv_err)?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != m {
                return Err(ScenarioError::Parse {
                    line,
                    message: format!("row has {} fields, header has {m}", record.len()),
                });
            }
            let mut row = Vec::with_capacity(m);
            for field in record.iter() {
                let v: f64 = field.trim().parse().map_err(|e| ScenarioError::Parse {
                    line,
                    message: format!("bad number {field:?}: {e}"),
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        Self::new(rows, None)
    }

    pub fn save_json<W: Write>(&self, out: W) -> Result<(), ScenarioError> {
        serde_json::to_writer_pretty(out, self).map_err(json_err)
    }

    pub fn load_json<R: std::io::Read>(input: R) -> Result<Self, ScenarioError> {
        serde_json::from_reader(input).map_err(json_err)
    }

    /// Loads from a path; the extension selects the format.
    pub fn load_path(path: &Path) -> Result<Self, ScenarioError> {
        let file = std::fs::File::open(path)?;
        match extension(path) {
            Some("csv") => Self::load_csv(file),
            Some("json") => Self::load_json(file),
            _ => Err(ScenarioError::UnsupportedFormat { path: path.display().to_string() }),
        }
    }

    pub fn save_path(&self, path: &Path) -> Result<(), ScenarioError> {
        let file = std::fs::File::create(path)?;
        match extension(path) {
            Some("csv") => self.save_csv(file),
            Some("json") => self.save_json(file),
            _ => Err(ScenarioError::UnsupportedFormat { path: path.display().to_string() }),
        }
    }
}

fn extension(path: &Path) -> Option<&str> {
    path.extension().and_then(|e| e.to_str())
}

fn csv_err(e: csv::Error) -> ScenarioError {
    let line = match e.position() {
        Some(p) => p.line(),
        None => 0,
    };
    ScenarioError::Parse { line, message: e.to_string() }
}

fn json_err(e: serde_json::Error) -> ScenarioError {
    ScenarioError::Parse { line: e.line() as u64, message: e.to_string() }
}

/// A finite collection of symmetric positive-definite matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MatrixScenarioSetData")]
pub struct MatrixScenarioSet {
    n: usize,
    scenarios: Vec<DenseMatrix>,
    /// Cached (lambda_min, lambda_max) per scenario; derived at construction.
    #[serde(skip)]
    eig_ranges: Vec<(f64, f64)>,
}

impl PartialEq for MatrixScenarioSet {
    /// The eigenvalue cache is derived data and excluded from equality.
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.scenarios == other.scenarios
    }
}

#[derive(Deserialize)]
struct MatrixScenarioSetData {
    n: usize,
    scenarios: Vec<DenseMatrix>,
}

impl TryFrom<MatrixScenarioSetData> for MatrixScenarioSet {
    type Error = ScenarioError;

    fn try_from(data: MatrixScenarioSetData) -> Result<Self, ScenarioError> {
        let set = MatrixScenarioSet::new(data.scenarios)?;
        if set.dim() != data.n {
            return Err(ScenarioError::InvalidMatrix {
                scenario: 0,
                source: LinalgError::DimensionMismatch(format!(
                    "header says {}x{n}, matrices are {m}x{m}",
                    data.n,
                    n = data.n,
                    m = set.dim()
                )),
            });
        }
        Ok(set)
    }
}

impl MatrixScenarioSet {
    pub fn new(scenarios: Vec<DenseMatrix>) -> Result<Self, ScenarioError> {
        if scenarios.is_empty() {
            return Err(ScenarioError::Empty);
        }
        let n = scenarios[0].rows();
        let mut eig_ranges = Vec::with_capacity(scenarios.len());
        for (i, q) in scenarios.iter().enumerate() {
            if q.rows() != n || q.cols() != n {
                return Err(ScenarioError::InvalidMatrix {
                    scenario: i,
                    source: LinalgError::DimensionMismatch(format!(
                        "expected {n}x{n}, got {}x{}",
                        q.rows(),
                        q.cols()
                    )),
                });
            }
            let (vals, _) = sym_eigen(q)
                .map_err(|source| ScenarioError::InvalidMatrix { scenario: i, source })?;
            let (lo, hi) = (vals[0], vals[vals.len() - 1]);
            if lo <= 1e-12 * hi.max(0.0) {
                return Err(ScenarioError::NotPositiveDefinite {
                    scenario: i,
                    lambda_min: lo,
                    lambda_max: hi,
                });
            }
            eig_ranges.push((lo, hi));
        }
        Ok(Self { n, scenarios, eig_ranges })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scenario(&self, i: usize) -> &DenseMatrix {
        &self.scenarios[i]
    }

    pub fn scenarios(&self) -> &[DenseMatrix] {
        &self.scenarios
    }

    /// `(lambda_min, lambda_max)` of scenario `i`, cached at construction.
    pub fn eig_range(&self, i: usize) -> (f64, f64) {
        self.eig_ranges[i]
    }

    pub fn save_json<W: Write>(&self, out: W) -> Result<(), ScenarioError> {
        serde_json::to_writer_pretty(out, self).map_err(json_err)
    }

    pub fn load_json<R: std::io::Read>(input: R) -> Result<Self, ScenarioError> {
        serde_json::from_reader(input).map_err(json_err)
    }

    pub fn load_path(path: &Path) -> Result<Self, ScenarioError> {
        let file = std::fs::File::open(path)?;
        match extension(path) {
            Some("json") => Self::load_json(file),
            _ => Err(ScenarioError::UnsupportedFormat { path: path.display().to_string() }),
        }
    }

    pub fn save_path(&self, path: &Path) -> Result<(), ScenarioError> {
        let file = std::fs::File::create(path)?;
        match extension(path) {
            Some("json") => self.save_json(file),
            _ => Err(ScenarioError::UnsupportedFormat { path: path.display().to_string() }),
        }
    }
}

/// Componentwise-uniform perturbation around a strictly positive base vector.
///
/// Each generated scenario draws component `k` uniformly from
/// `[(1 - s_inc) * base_k, (1 + s_inc) * base_k]`. `s_inc = 0` degenerates to
/// copies of the base; `s_inc < 1` keeps everything strictly positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub base: Vec<f64>,
    pub s_inc: f64,
    pub count: usize,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.base.is_empty() {
            return Err(ScenarioError::InvalidSpec("base vector is empty".into()));
        }
        if let Err(e) = validate(std::slice::from_ref(&self.base)) {
            return Err(ScenarioError::InvalidSpec(format!("base vector: {e}")));
        }
        if !(0.0..1.0).contains(&self.s_inc) {
            return Err(ScenarioError::InvalidSpec(format!(
                "s_inc must lie in [0, 1), got {}",
                self.s_inc
            )));
        }
        if self.count == 0 {
            return Err(ScenarioError::InvalidSpec("count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Generates a scenario set from a perturbation spec; deterministic per seed.
pub fn generate_perturbed(spec: &PerturbationSpec) -> Result<ScenarioSet, ScenarioError> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let row: Vec<f64> = spec
            .base
            .iter()
            .map(|&s| {
                let lo = (1.0 - spec.s_inc) * s;
                let hi = (1.0 + spec.s_inc) * s;
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..=hi)
                }
            })
            .collect();
        rows.push(row);
    }
    ScenarioSet::new(rows, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_reports_first_violation() {
        assert!(validate(&[vec![1.0, 2.0], vec![3.0, 4.0]]).is_ok());
        match validate(&[vec![1.0, 0.0]]) {
            Err(ScenarioError::NotPositive { scenario: 0, component: 1, .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
        match validate(&[vec![-1.0, 2.0]]) {
            Err(ScenarioError::NotPositive { scenario: 0, component: 0, .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn zero_increment_copies_base() {
        let spec = PerturbationSpec { base: vec![2.0, 7.0], s_inc: 0.0, count: 3, seed: 1 };
        let set = generate_perturbed(&spec).unwrap();
        for i in 0..3 {
            assert_eq!(set.scenario(i), &[2.0, 7.0]);
        }
    }

    #[test]
    fn perturbation_stays_in_interval() {
        let spec = PerturbationSpec { base: vec![10.0], s_inc: 0.5, count: 200, seed: 42 };
        let set = generate_perturbed(&spec).unwrap();
        for i in 0..set.len() {
            let v = set.scenario(i)[0];
            assert!((5.0..=15.0).contains(&v), "{v} outside [5,15]");
        }
    }

    #[test]
    fn same_seed_same_set() {
        let spec = PerturbationSpec { base: vec![1.0, 2.0, 3.0], s_inc: 0.75, count: 20, seed: 7 };
        assert_eq!(generate_perturbed(&spec).unwrap(), generate_perturbed(&spec).unwrap());
        let other = PerturbationSpec { seed: 8, ..spec.clone() };
        assert_ne!(generate_perturbed(&spec).unwrap(), generate_perturbed(&other).unwrap());
    }

    #[test]
    fn csv_roundtrip() {
        let set = ScenarioSet::new(
            vec![vec![1.5, 2.25], vec![0.1, 1e-7], vec![3.0, 123456.789]],
            None,
        )
        .unwrap();
        let mut buf = Vec::new();
        set.save_csv(&mut buf).unwrap();
        let back = ScenarioSet::load_csv(buf.as_slice()).unwrap();
        assert_eq!(set, back);
    }

    #[test]
    fn csv_field_count_mismatch() {
        let data = "s_0,s_1\n1.0,2.0\n3.0\n";
        match ScenarioSet::load_csv(data.as_bytes()) {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn json_roundtrip_with_labels() {
        let set = ScenarioSet::new(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            Some(vec!["a".into(), "b".into()]),
        )
        .unwrap();
        let mut buf = Vec::new();
        set.save_json(&mut buf).unwrap();
        let back = ScenarioSet::load_json(buf.as_slice()).unwrap();
        assert_eq!(set, back);
    }

    #[test]
    fn matrix_set_rejects_asymmetric_and_semidefinite() {
        let asym = DenseMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            MatrixScenarioSet::new(vec![asym]),
            Err(ScenarioError::InvalidMatrix { .. })
        ));
        let singular = DenseMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            MatrixScenarioSet::new(vec![singular]),
            Err(ScenarioError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn matrix_json_roundtrip() {
        let set = MatrixScenarioSet::new(vec![
            DenseMatrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap(),
            DenseMatrix::identity(2),
        ])
        .unwrap();
        let mut buf = Vec::new();
        set.save_json(&mut buf).unwrap();
        let back = MatrixScenarioSet::load_json(buf.as_slice()).unwrap();
        assert_eq!(set.scenarios(), back.scenarios());
        assert_eq!(set.eig_range(0), back.eig_range(0));
    }

    proptest! {
        #[test]
        fn generated_sets_always_validate(
            base in proptest::collection::vec(0.01..100.0f64, 1..5),
            s_inc in 0.0..0.99f64,
            count in 1usize..30,
            seed in any::<u64>(),
        ) {
            let spec = PerturbationSpec { base: base.clone(), s_inc, count, seed };
            let set = generate_perturbed(&spec).unwrap();
            prop_assert_eq!(set.len(), count);
            prop_assert!(validate(set.scenarios()).is_ok());
            for i in 0..set.len() {
                for (k, &v) in set.scenario(i).iter().enumerate() {
                    prop_assert!(v >= (1.0 - s_inc) * base[k] - 1e-12);
                    prop_assert!(v <= (1.0 + s_inc) * base[k] + 1e-12);
                }
            }
        }
    }
}
