//! Python bindings. Field elements are plain ints (base-p digits of the
//! polynomial representation), matrices are lists of rows.

use num_bigint::BigUint;
use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use myopic_core::adversary::{self, AdversaryPower};
use myopic_core::codebook::{self, DecodeOutcome, SamplingMode};
use myopic_core::gf::Gf;
use myopic_core::harness::{self, ExperimentConfig};
use myopic_core::matrix::Matrix;
use myopic_core::network;
use myopic_core::secrecy;
use myopic_core::subspace::{self, Subspace as CoreSubspace};
use myopic_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for myopic_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn matrix(field: &Gf, cols: usize, rows: &[Vec<u32>]) -> PyResult<Matrix> {
    Matrix::from_rows(field, cols, rows).py()
}

/// A finite field GF(p^e).
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Field {
    inner: Gf,
}

#[pymethods]
impl Field {
    #[new]
    #[pyo3(signature = (p, e = 1))]
    fn new(p: u32, e: u32) -> PyResult<Self> {
        Ok(Self {
            inner: Gf::new(p, e).py()?,
        })
    }

    #[staticmethod]
    fn of_order(q: u32) -> PyResult<Self> {
        Ok(Self {
            inner: Gf::of_order(q).py()?,
        })
    }

    #[getter]
    fn p(&self) -> u32 {
        self.inner.p()
    }

    #[getter]
    fn e(&self) -> u32 {
        self.inner.e()
    }

    #[getter]
    fn q(&self) -> u32 {
        self.inner.q()
    }

    /// Modulus coefficients, constant term first.
    #[getter]
    fn poly(&self) -> Vec<u32> {
        self.inner.poly().to_vec()
    }

    fn check(&self, a: u32) -> PyResult<u32> {
        self.inner.element(a).map(|x| x.value()).py()
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.inner.add(self.check(a)?, self.check(b)?))
    }

    fn sub(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.inner.sub(self.check(a)?, self.check(b)?))
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.inner.mul(self.check(a)?, self.check(b)?))
    }

    fn inv(&self, a: u32) -> PyResult<u32> {
        self.inner.inv(self.check(a)?).py()
    }

    fn div(&self, a: u32, b: u32) -> PyResult<u32> {
        self.inner.div(self.check(a)?, self.check(b)?).py()
    }

    fn pow(&self, a: u32, k: u64) -> PyResult<u32> {
        Ok(self.inner.pow(self.check(a)?, k))
    }

    fn rank(&self, rows: Vec<Vec<u32>>) -> PyResult<usize> {
        let cols = rows.first().map_or(0, Vec::len);
        Ok(matrix(&self.inner, cols, &rows)?.rank())
    }

    fn rref(&self, rows: Vec<Vec<u32>>) -> PyResult<Vec<Vec<u32>>> {
        let cols = rows.first().map_or(0, Vec::len);
        Ok(matrix(&self.inner, cols, &rows)?.rref().basis.to_rows())
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Row space of a matrix, kept in reduced echelon form.
#[pyclass(frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct Subspace {
    inner: CoreSubspace,
}

#[pymethods]
impl Subspace {
    #[new]
    fn new(field: &Field, n: usize, rows: Vec<Vec<u32>>) -> PyResult<Self> {
        Ok(Self {
            inner: CoreSubspace::from_matrix(&matrix(&field.inner, n, &rows)?),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn ambient(&self) -> usize {
        self.inner.ambient()
    }

    fn basis(&self) -> Vec<Vec<u32>> {
        self.inner.basis().to_rows()
    }

    fn contains(&self, v: Vec<u32>) -> bool {
        self.inner.contains_vector(&v)
    }

    fn intersection_dim(&self, other: &Subspace) -> PyResult<usize> {
        self.inner.intersection_dim(&other.inner).py()
    }

    fn distance(&self, other: &Subspace) -> PyResult<usize> {
        subspace::injection_distance(&self.inner, &other.inner).py()
    }

    fn __repr__(&self) -> String {
        format!(
            "Subspace(dim={}, n={})",
            self.inner.dim(),
            self.inner.ambient()
        )
    }
}

#[pyfunction]
fn injection_distance(a: &Subspace, b: &Subspace) -> PyResult<usize> {
    a.distance(b)
}

/// Number of k-dimensional subspaces of F_q^n.
#[pyfunction]
fn gaussian_coeff(n: usize, k: usize, q: u64) -> PyResult<BigUint> {
    subspace::gaussian_coeff(n, k, q).py()
}

/// Every k-dimensional subspace of F_q^n, in a fixed order.
#[pyfunction]
fn grassmannian(field: &Field, n: usize, k: usize) -> PyResult<Vec<Subspace>> {
    Ok(subspace::grassmannian(&field.inner, n, k)
        .py()?
        .into_iter()
        .map(|inner| Subspace { inner })
        .collect())
}

/// A constant-dimension subspace codebook with a minimum-distance decoder.
#[pyclass(frozen)]
struct Codebook {
    inner: codebook::Codebook,
}

#[pymethods]
impl Codebook {
    #[staticmethod]
    #[pyo3(signature = (field, n, c, m, distinct = false, seed = 0))]
    fn random(
        field: &Field,
        n: usize,
        c: usize,
        m: usize,
        distinct: bool,
        seed: u64,
    ) -> PyResult<Self> {
        let mode = if distinct {
            SamplingMode::Distinct
        } else {
            SamplingMode::Replacement
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            inner: codebook::Codebook::build_random(&field.inner, n, c, m, mode, &mut rng).py()?,
        })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self {
            inner: codebook::Codebook::from_json(s).py()?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.inner.rate()
    }

    #[getter]
    fn collisions(&self) -> usize {
        self.inner.collisions()
    }

    fn encode(&self, m: usize) -> PyResult<Vec<Vec<u32>>> {
        if m >= self.inner.len() {
            return Err(PyIndexError::new_err(format!("message {m} out of range")));
        }
        Ok(self.inner.encode(m).py()?.to_rows())
    }

    fn codeword(&self, m: usize) -> PyResult<Subspace> {
        self.inner
            .codewords()
            .get(m)
            .map(|s| Subspace { inner: s.clone() })
            .ok_or_else(|| PyIndexError::new_err(format!("message {m} out of range")))
    }

    /// Returns the decoded index, or None when no codeword or several are closest.
    fn decode(&self, y: &Subspace, radius: usize) -> PyResult<Option<usize>> {
        Ok(match self.inner.decode(&y.inner, radius).py()? {
            DecodeOutcome::Unique(i) => Some(i),
            DecodeOutcome::Ambiguous | DecodeOutcome::NoneWithinRadius => None,
        })
    }

    fn decode_verdict(&self, y: &Subspace, radius: usize) -> PyResult<String> {
        Ok(match self.inner.decode(&y.inner, radius).py()? {
            DecodeOutcome::Unique(_) => "unique",
            DecodeOutcome::Ambiguous => "ambiguous",
            DecodeOutcome::NoneWithinRadius => "none_within_radius",
        }
        .to_string())
    }

    fn list_decode(&self, y: &Subspace, radius: usize) -> PyResult<Vec<usize>> {
        self.inner.list_decode(&y.inner, radius).py()
    }
}

/// A directed acyclic network with one source and one sink.
#[pyclass(frozen)]
struct Topology {
    inner: network::Topology,
}

#[pymethods]
impl Topology {
    #[new]
    fn new(nodes: usize, edges: Vec<(usize, usize)>, source: usize, sink: usize) -> PyResult<Self> {
        Ok(Self {
            inner: network::Topology::new(nodes, edges, source, sink).py()?,
        })
    }

    /// `parallel:C`, `butterfly` or `diamond`.
    #[staticmethod]
    fn named(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: network::Topology::named(name).py()?,
        })
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.inner.nodes()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    #[getter]
    fn source(&self) -> usize {
        self.inner.source()
    }

    #[getter]
    fn sink(&self) -> usize {
        self.inner.sink()
    }

    fn min_cut(&self) -> usize {
        self.inner.min_cut()
    }

    fn min_cut_edges(&self) -> Vec<usize> {
        self.inner.min_cut_edges()
    }

    fn inert_edges(&self) -> Vec<usize> {
        self.inner.inert_edges().to_vec()
    }
}

#[pyfunction]
fn min_cut(topology: &Topology) -> usize {
    topology.min_cut()
}

#[pyfunction]
#[pyo3(signature = (c, z_ro = 0, z_wo = 0, z_rw = 0))]
fn classify_regime(c: usize, z_ro: usize, z_wo: usize, z_rw: usize) -> String {
    adversary::classify_regime(c, &AdversaryPower::new(z_ro, z_wo, z_rw)).to_string()
}

#[pyfunction]
#[pyo3(signature = (c, z_ro = 0, z_wo = 0, z_rw = 0))]
fn capacity(c: usize, z_ro: usize, z_wo: usize, z_rw: usize) -> usize {
    adversary::capacity(c, &AdversaryPower::new(z_ro, z_wo, z_rw))
}

#[pyfunction]
#[pyo3(signature = (c, z_ro = 0, z_wo = 0, z_rw = 0))]
fn secrecy_capacity(c: usize, z_ro: usize, z_wo: usize, z_rw: usize) -> usize {
    adversary::secrecy_capacity(c, &AdversaryPower::new(z_ro, z_wo, z_rw))
}

/// Rows of (C, z_ro, z_wo, z_rw, regime, capacity, secrecy_capacity).
#[pyfunction]
fn capacity_table(
    c_values: Vec<usize>,
    powers: Vec<(usize, usize, usize)>,
) -> Vec<(usize, usize, usize, usize, String, usize, usize)> {
    let powers: Vec<AdversaryPower> = powers
        .into_iter()
        .map(|(a, b, c)| AdversaryPower::new(a, b, c))
        .collect();
    harness::capacity_table(c_values, &powers)
        .into_iter()
        .map(|r| {
            (
                r.c,
                r.z_ro,
                r.z_wo,
                r.z_rw,
                r.regime.to_string(),
                r.capacity,
                r.secrecy_capacity,
            )
        })
        .collect()
}

/// Exact probability that a uniform codeword matches a fixed z_r-row observation.
#[pyfunction]
fn compatible_probability(n: usize, c: usize, z_r: usize, q: u32) -> PyResult<(BigUint, BigUint)> {
    let p = adversary::compatible_probability(n, c, z_r, q).py()?;
    let (num, den) = (p.numer(), p.denom());
    Ok((num.magnitude().clone(), den.magnitude().clone()))
}

/// Runs an experiment from a JSON config and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (config_json, trials = None, seed = None))]
fn run_experiment(
    py: Python<'_>,
    config_json: &str,
    trials: Option<usize>,
    seed: Option<u64>,
) -> PyResult<String> {
    let mut cfg = ExperimentConfig::from_json(config_json).py()?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = py.detach(|| harness::run_trials(&cfg)).py()?;
    serde_json::to_string(&out.report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Vandermonde coset code over GF(p^ell) for wiretap secrecy.
#[pyclass(frozen)]
struct CosetCode {
    inner: secrecy::CosetCode,
}

#[pymethods]
impl CosetCode {
    #[new]
    fn new(p: u32, ell: u32, length: usize, z_r: usize) -> PyResult<Self> {
        Ok(Self {
            inner: secrecy::CosetCode::new(p, ell, length, z_r).py()?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn secret_len(&self) -> usize {
        self.inner.secret_len()
    }

    #[getter]
    fn z_r(&self) -> usize {
        self.inner.z_r()
    }

    #[getter]
    fn symbol_field(&self) -> Field {
        Field {
            inner: self.inner.symbol_field().clone(),
        }
    }

    fn parity_check(&self) -> Vec<Vec<u32>> {
        self.inner.parity_check().to_rows()
    }

    #[pyo3(signature = (message, seed = 0))]
    fn encode(&self, message: Vec<u32>, seed: u64) -> PyResult<Vec<u32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.inner.secret_encode(&message, &mut rng).py()
    }

    fn decode(&self, word: Vec<u32>) -> PyResult<Vec<u32>> {
        self.inner.secret_decode(&word).py()
    }

    /// Entropies in units of log |symbol field| for an eavesdropper on `observed` coordinates.
    fn leakage<'py>(&self, py: Python<'py>, observed: Vec<usize>) -> PyResult<Bound<'py, PyDict>> {
        let l = self.inner.leakage(&observed).py()?;
        let d = PyDict::new(py);
        d.set_item("h_m", l.h_m)?;
        d.set_item("h_m_given_z", l.h_m_given_z)?;
        d.set_item("perfect", l.perfect)?;
        Ok(d)
    }

    fn secure_against_all(&self, k: usize) -> PyResult<bool> {
        self.inner.secure_against_all(k).py()
    }
}

#[pymodule]
fn myopic_netcode(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", harness::VERSION)?;
    m.add_class::<Field>()?;
    m.add_class::<Subspace>()?;
    m.add_class::<Codebook>()?;
    m.add_class::<Topology>()?;
    m.add_class::<CosetCode>()?;
    m.add_function(wrap_pyfunction!(injection_distance, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(grassmannian, m)?)?;
    m.add_function(wrap_pyfunction!(min_cut, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(secrecy_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_table, m)?)?;
    m.add_function(wrap_pyfunction!(compatible_probability, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
