//! Python bindings: datasets, graph construction, the full pipeline and the
//! agreement metrics.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use kgraph::embedding::{self as emb, PatternGraph};
use kgraph::graph_clustering::{extract_features_with, FeatureMode};
use kgraph::pipeline::{self, RunConfig, RunOutput};
use kgraph::{metrics, synthetic, KGraphError};

fn to_py(e: KGraphError) -> PyErr {
    match e.root() {
        KGraphError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Dataset", module = "pykgraph", frozen)]
struct PyDataset {
    inner: kgraph::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (series, labels=None, name="data"))]
    fn new(series: Vec<Vec<f64>>, labels: Option<Vec<i64>>, name: &str) -> PyResult<Self> {
        let inner = kgraph::Dataset::new(name, series, labels).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Loads a UCR file or a dataset directory with TRAIN/TEST splits.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = kgraph::load(path).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn labels(&self) -> Option<Vec<i64>> {
        self.inner.labels().map(<[i64]>::to_vec)
    }

    #[getter]
    fn lengths(&self) -> Vec<usize> {
        self.inner.lengths()
    }

    fn series(&self, index: usize) -> PyResult<Vec<f64>> {
        self.inner
            .series()
            .get(index)
            .map(|s| s.values().to_vec())
            .ok_or_else(|| PyValueError::new_err(format!("no series {index}")))
    }

    fn n_classes(&self) -> Option<usize> {
        self.inner.n_classes()
    }

    fn write_ucr(&self, path: PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        self.inner
            .write_ucr_tsv(std::io::BufWriter::new(file))
            .map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(name={:?}, series={})", self.inner.name(), self.inner.len())
    }
}

#[pyclass(name = "Graph", module = "pykgraph", frozen)]
struct PyGraph {
    inner: PatternGraph,
}

#[pymethods]
impl PyGraph {
    #[getter]
    fn length(&self) -> usize {
        self.inner.length()
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.n_edges()
    }

    /// `(src, dst, weight)` for every edge.
    #[getter]
    fn edges(&self) -> Vec<(usize, usize, u64)> {
        self.inner.edges().iter().map(|e| (e.src, e.dst, e.weight)).collect()
    }

    /// `(id, angular_bin, radius, member_count)` for every node.
    #[getter]
    fn nodes(&self) -> Vec<(usize, usize, f64, usize)> {
        self.inner
            .nodes()
            .iter()
            .map(|n| (n.id, n.angular_bin, n.radius, n.member_count))
            .collect()
    }

    #[getter]
    fn paths(&self) -> Vec<Vec<usize>> {
        self.inner.paths().to_vec()
    }

    fn prototype(&self, node: usize) -> PyResult<Vec<f64>> {
        self.inner
            .nodes()
            .get(node)
            .map(|n| n.prototype.clone())
            .ok_or_else(|| PyValueError::new_err(format!("no node {node}")))
    }

    /// Column names and raw integer rows of the per-series feature matrix.
    #[pyo3(signature = (mode="transitions"))]
    fn features(&self, mode: &str) -> PyResult<(Vec<String>, Vec<Vec<u64>>)> {
        let f = extract_features_with(&self.inner, feature_mode(mode)?);
        let columns = f.columns().iter().map(ToString::to_string).collect();
        let rows = (0..f.n_rows())
            .map(|i| (0..f.n_cols()).map(|c| f.get(i, c)).collect())
            .collect();
        Ok((columns, rows))
    }

    #[pyo3(signature = (include_paths=true))]
    fn to_json(&self, include_paths: bool) -> PyResult<String> {
        self.inner.to_json(include_paths).map_err(to_py)
    }

    fn to_dot(&self) -> String {
        self.inner.to_dot()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(length={}, nodes={}, edges={})",
            self.inner.length(),
            self.inner.n_nodes(),
            self.inner.n_edges()
        )
    }
}

#[pyclass(name = "RunResult", module = "pykgraph", frozen)]
struct PyRunResult {
    inner: RunOutput,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.inner.labels.labels().to_vec()
    }

    #[getter]
    fn selected_length(&self) -> usize {
        self.inner.report.selected_length
    }

    /// Lengths that produced a graph, in canonical order.
    #[getter]
    fn lengths(&self) -> Vec<usize> {
        self.inner.runs.iter().map(|r| r.length).collect()
    }

    /// `(length, replicate, w_c, w_e)` per built length.
    #[getter]
    fn scores(&self) -> Vec<(usize, usize, f64, f64)> {
        self.inner
            .report
            .lengths
            .iter()
            .map(|s| (s.length, s.replicate, s.w_c, s.w_e))
            .collect()
    }

    /// `{"ri", "ari", "ami", "nmi"}` when the dataset carries labels.
    #[getter]
    fn metrics(&self) -> Option<Vec<(&'static str, f64)>> {
        self.inner
            .metrics
            .map(|m| vec![("ri", m.ri), ("ari", m.ari), ("ami", m.ami), ("nmi", m.nmi)])
    }

    fn report_json(&self) -> PyResult<String> {
        self.inner.report.to_json().map_err(to_py)
    }

    fn consensus(&self) -> Vec<Vec<f64>> {
        let mc = &self.inner.consensus;
        (0..mc.n()).map(|i| (0..mc.n()).map(|j| mc.get(i, j)).collect()).collect()
    }

    fn selected_graph(&self) -> PyGraph {
        PyGraph {
            inner: self.inner.selected_run().graph.clone(),
        }
    }
}

#[pyfunction]
#[pyo3(signature = (dataset, length, smpl=10, seed=0))]
fn build_graph(py: Python<'_>, dataset: &PyDataset, length: usize, smpl: usize, seed: u64) -> PyResult<PyGraph> {
    let inner = py
        .detach(|| emb::build_graph(&dataset.inner, length, smpl, seed))
        .map_err(to_py)?;
    Ok(PyGraph { inner })
}

#[pyfunction]
#[pyo3(signature = (
    dataset, k, m_lengths=30, smpl=10, rml=0.4, seed=0, workers=0,
    lengths=None, znorm=false, lambda_=None, gamma=None, features="transitions"
))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    dataset: &PyDataset,
    k: usize,
    m_lengths: usize,
    smpl: usize,
    rml: f64,
    seed: u64,
    workers: usize,
    lengths: Option<Vec<usize>>,
    znorm: bool,
    lambda_: Option<f64>,
    gamma: Option<f64>,
    features: &str,
) -> PyResult<PyRunResult> {
    let config = RunConfig {
        m_lengths,
        smpl,
        rml,
        seed,
        workers,
        lengths,
        znorm,
        lambda: lambda_,
        gamma,
        features: feature_mode(features)?,
        ..RunConfig::new(k)
    };
    let inner = py
        .detach(|| pipeline::run(&dataset.inner, &config))
        .map_err(to_py)?;
    Ok(PyRunResult { inner })
}

fn feature_mode(name: &str) -> PyResult<FeatureMode> {
    match name {
        "transitions" => Ok(FeatureMode::Transitions),
        "occupancy" => Ok(FeatureMode::Occupancy),
        other => Err(PyValueError::new_err(format!(
            "unknown feature mode {other:?}, expected \"transitions\" or \"occupancy\""
        ))),
    }
}

#[pyfunction]
fn rand_index(a: Vec<i64>, b: Vec<i64>) -> PyResult<f64> {
    metrics::rand_index(&a, &b).map_err(to_py)
}

#[pyfunction]
fn adjusted_rand_index(a: Vec<i64>, b: Vec<i64>) -> PyResult<f64> {
    metrics::adjusted_rand_index(&a, &b).map_err(to_py)
}

#[pyfunction]
fn normalized_mutual_info(a: Vec<i64>, b: Vec<i64>) -> PyResult<f64> {
    metrics::nmi(&a, &b).map_err(to_py)
}

#[pyfunction]
fn adjusted_mutual_info(a: Vec<i64>, b: Vec<i64>) -> PyResult<f64> {
    metrics::ami(&a, &b).map_err(to_py)
}

#[pyfunction]
fn noise_ratio(values: Vec<f64>) -> PyResult<f64> {
    kgraph::dataset::noise_ratio(&values).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n_per_class=30, length=128, seed=0))]
fn cbf(n_per_class: usize, length: usize, seed: u64) -> PyResult<PyDataset> {
    let inner = synthetic::cbf(n_per_class, length, seed).map_err(to_py)?;
    Ok(PyDataset { inner })
}

#[pyfunction]
#[pyo3(signature = (n_per_class=30, length=60, seed=0))]
fn synthetic_control(n_per_class: usize, length: usize, seed: u64) -> PyResult<PyDataset> {
    let inner = synthetic::synthetic_control(n_per_class, length, seed).map_err(to_py)?;
    Ok(PyDataset { inner })
}

#[pymodule]
fn pykgraph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(build_graph, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(rand_index, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_rand_index, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_mutual_info, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_mutual_info, m)?)?;
    m.add_function(wrap_pyfunction!(noise_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(cbf, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_control, m)?)?;
    Ok(())
}
