//! End-to-end clustering run: sample lengths, embed and cluster per length,
//! reach a consensus, then explain it.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::consensus::{consensus_matrix, spectral_clustering_with, ConsensusMatrix};
use crate::dataset::{self, Dataset, MIN_SERIES_LEN};
use crate::embedding::{build_graph_with, derive_seed, sample_lengths, EmbeddingParams, PatternGraph};
use crate::error::{KGraphError, Result, Stage};
use crate::graph_clustering::{cluster_graph_with, extract_features_with, FeatureMode, Partition};
use crate::interpretability::{
    cluster_graphoids, consistency, exemplar_nodes, interpretability_factor, node_stats, select_length,
    GraphoidReport, LengthScore,
};
use crate::linalg::EigenSolver;
use crate::metrics::Scores;

const STREAM_EMBEDDING: u64 = 0;
const STREAM_CLUSTERING: u64 = 1;
const STREAM_CONSENSUS: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    /// Number of subsequence lengths to draw.
    pub m_lengths: usize,
    /// One in `smpl` subsequences trains the projection.
    pub smpl: usize,
    /// Longest admissible length as a fraction of the shortest series.
    pub rml: f64,
    pub seed: u64,
    /// Worker threads for the per-length stage; 0 uses all cores.
    pub workers: usize,
    /// Fixed lengths, replacing the random draw.
    pub lengths: Option<Vec<usize>>,
    /// Z-normalize every series before embedding.
    pub znorm: bool,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub embedding: EmbeddingParams,
    pub features: FeatureMode,
    pub eigen_solver: EigenSolver,
}

impl RunConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            m_lengths: 30,
            smpl: 10,
            rml: 0.4,
            seed: 0,
            workers: 0,
            lengths: None,
            znorm: false,
            lambda: None,
            gamma: None,
            embedding: EmbeddingParams::default(),
            features: FeatureMode::default(),
            eigen_solver: EigenSolver::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(KGraphError::InvalidConfig("k must be at least 1".into()));
        }
        if !(self.rml > 0.0 && self.rml <= 1.0) {
            return Err(KGraphError::InvalidConfig(format!("rml {} outside (0, 1]", self.rml)));
        }
        if self.smpl == 0 {
            return Err(KGraphError::InvalidConfig("smpl must be at least 1".into()));
        }
        if self.m_lengths == 0 && self.lengths.is_none() {
            return Err(KGraphError::InvalidConfig("M must be at least 1".into()));
        }
        if matches!(&self.lengths, Some(l) if l.is_empty()) {
            return Err(KGraphError::InvalidConfig("length list is empty".into()));
        }
        for t in [self.lambda, self.gamma].into_iter().flatten() {
            if !(0.0..=1.0).contains(&t) {
                return Err(KGraphError::InvalidThreshold(t));
            }
        }
        Ok(())
    }
}

/// Wall-clock time per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub load: Duration,
    pub length_sampling: Duration,
    pub embedding: Duration,
    pub graph_clustering: Duration,
    pub consensus: Duration,
    pub interpretability: Duration,
    pub total: Duration,
}

impl StageTimings {
    pub fn stage_sum(&self) -> Duration {
        self.load
            + self.length_sampling
            + self.embedding
            + self.graph_clustering
            + self.consensus
            + self.interpretability
    }
}

/// Graph and partition for one drawn length.
#[derive(Debug, Clone)]
pub struct LengthRun {
    pub length: usize,
    pub replicate: usize,
    pub graph: PatternGraph,
    pub partition: Partition,
    pub score: LengthScore,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedLength {
    pub length: usize,
    pub replicate: usize,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dataset_name: String,
    /// Drawn (or fixed) lengths in canonical order, including failed ones.
    pub lengths: Vec<usize>,
    pub runs: Vec<LengthRun>,
    pub failed: Vec<FailedLength>,
    pub consensus: ConsensusMatrix,
    pub labels: Partition,
    /// Index into `runs` of the selected length.
    pub selected: usize,
    pub report: GraphoidReport,
    pub metrics: Option<Scores>,
    pub timings: StageTimings,
    /// Feature counting the per-length clusterings used.
    pub feature_mode: FeatureMode,
}

impl RunOutput {
    pub fn selected_run(&self) -> &LengthRun {
        &self.runs[self.selected]
    }

    pub fn mean_nodes(&self) -> f64 {
        self.runs.iter().map(|r| r.graph.n_nodes() as f64).sum::<f64>() / self.runs.len() as f64
    }

    pub fn mean_edges(&self) -> f64 {
        self.runs.iter().map(|r| r.graph.n_edges() as f64).sum::<f64>() / self.runs.len() as f64
    }

    /// Writes `labels.txt` and `report.json`, plus the requested exports.
    /// Returns the paths written.
    pub fn write_artifacts(&self, out_dir: &Path, exports: &Exports) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        fs::create_dir_all(out_dir).map_err(|e| KGraphError::io(out_dir, e).at(Stage::Export))?;
        let write = |name: &str, contents: &[u8], written: &mut Vec<PathBuf>| -> Result<()> {
            let path = out_dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| KGraphError::io(parent, e).at(Stage::Export))?;
            }
            fs::write(&path, contents).map_err(|e| KGraphError::io(&path, e).at(Stage::Export))?;
            written.push(path);
            Ok(())
        };

        let labels: String = self.labels.labels().iter().map(|l| format!("{l}\n")).collect();
        write("labels.txt", labels.as_bytes(), &mut written)?;
        write("report.json", self.report.to_json()?.as_bytes(), &mut written)?;
        if exports.consensus {
            let mut buf = Vec::new();
            self.consensus.write_csv(&mut buf).map_err(|e| KGraphError::io(out_dir, e))?;
            write("consensus.csv", &buf, &mut written)?;
        }
        for run in &self.runs {
            let stem = format!("length_{}_{}", run.length, run.replicate);
            if exports.graphs {
                write(
                    &format!("graphs/{stem}.json"),
                    run.graph.to_json(true)?.as_bytes(),
                    &mut written,
                )?;
            }
            if exports.features {
                let mut buf = Vec::new();
                extract_features_with(&run.graph, self.feature_mode)
                    .write_csv(&mut buf)
                    .map_err(|e| KGraphError::io(out_dir, e))?;
                write(&format!("features/{stem}.csv"), &buf, &mut written)?;
            }
        }
        Ok(written)
    }
}

/// Optional artifacts beyond labels and report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Exports {
    pub graphs: bool,
    pub consensus: bool,
    pub features: bool,
}

/// Loads a UCR file or directory and runs on it.
pub fn run_path(path: impl AsRef<Path>, config: &RunConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let dataset = dataset::load(path).map_err(|e| e.at(Stage::Load))?;
    let load = start.elapsed();
    let mut out = run(&dataset, config)?;
    out.timings.load = load;
    out.timings.total += load;
    Ok(out)
}

pub fn run(dataset: &Dataset, config: &RunConfig) -> Result<RunOutput> {
    let start = Instant::now();
    config.validate()?;
    let normalized;
    let data = if config.znorm {
        normalized = dataset.z_normalized();
        &normalized
    } else {
        dataset
    };
    let mut timings = StageTimings::default();

    let lengths = timed(&mut timings.length_sampling, || resolve_lengths(data, config))
        .map_err(|e| e.at(Stage::LengthSampling))?;
    let jobs = with_replicates(&lengths);

    let pool = timed(&mut timings.embedding, || {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
    })
    .map_err(|e| KGraphError::InvalidConfig(format!("worker pool: {e}")))?;

    let built: Vec<(usize, usize, Result<PatternGraph>)> = timed(&mut timings.embedding, || {
        pool.install(|| {
            jobs.par_iter()
                .map(|&(length, replicate)| {
                    let seed = derive_seed(config.seed, length, replicate, STREAM_EMBEDDING);
                    let graph = build_graph_with(data, length, config.smpl, seed, &config.embedding);
                    (length, replicate, graph)
                })
                .collect()
        })
    });

    let mut graphs = Vec::new();
    let mut failed = Vec::new();
    let mut first_error = None;
    for (length, replicate, graph) in built {
        match graph {
            Ok(g) => graphs.push((replicate, g)),
            Err(e) => {
                log::warn!("skipping length {length} (replicate {replicate}): {e}");
                failed.push(FailedLength {
                    length,
                    replicate,
                    error: e.to_string(),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    // Nothing built: the cause is more useful than the count.
    if let (true, Some(e)) = (graphs.is_empty(), first_error) {
        return Err(e.at(Stage::Embedding));
    }
    if 2 * failed.len() > jobs.len() {
        return Err(KGraphError::TooManyFailedLengths {
            failed: failed.len(),
            total: jobs.len(),
        }
        .at(Stage::Embedding));
    }

    let partitions: Vec<Partition> = timed(&mut timings.graph_clustering, || {
        pool.install(|| {
            graphs
                .par_iter()
                .map(|(replicate, g)| {
                    let seed = derive_seed(config.seed, g.length(), *replicate, STREAM_CLUSTERING);
                    cluster_graph_with(g, config.k, seed, config.features)
                })
                .collect::<Result<Vec<_>>>()
        })
    })
    .map_err(|e| e.at(Stage::GraphClustering))?;

    let (consensus, labels) = timed(&mut timings.consensus, || -> Result<_> {
        let mc = consensus_matrix(&partitions)?;
        let seed = derive_seed(config.seed, 0, 0, STREAM_CONSENSUS);
        let labels = spectral_clustering_with(&mc, config.k, seed, config.eigen_solver)?;
        Ok((mc, labels))
    })
    .map_err(|e| e.at(Stage::Consensus))?;

    let (runs, selected, report) = timed(&mut timings.interpretability, || {
        explain(data, config, graphs, partitions, &labels, &failed)
    })
    .map_err(|e| e.at(Stage::Interpretability))?;

    let metrics = timed(&mut timings.interpretability, || {
        dataset
            .labels()
            .map(|truth| Scores::compute(truth, labels.labels()))
            .transpose()
    })?;
    let report = GraphoidReport { metrics, ..report };
    timings.total = start.elapsed();

    Ok(RunOutput {
        dataset_name: dataset.name().to_string(),
        lengths,
        runs,
        failed,
        consensus,
        labels,
        selected,
        report,
        metrics,
        timings,
        feature_mode: config.features,
    })
}

fn explain(
    data: &Dataset,
    config: &RunConfig,
    graphs: Vec<(usize, PatternGraph)>,
    partitions: Vec<Partition>,
    labels: &Partition,
    failed: &[FailedLength],
) -> Result<(Vec<LengthRun>, usize, GraphoidReport)> {
    // Spectral clustering may leave a cluster empty; statistics are computed
    // over the nonempty ones, relabelled densely.
    let final_dense = dense_partition(labels)?;
    let runs = graphs
        .into_par_iter()
        .zip(partitions)
        .map(|((replicate, graph), partition)| {
            let stats = node_stats(&graph, &final_dense)?;
            let score = LengthScore {
                length: graph.length(),
                replicate,
                w_c: consistency(labels, &partition)?,
                w_e: interpretability_factor(&stats)?,
            };
            Ok(LengthRun {
                length: graph.length(),
                replicate,
                graph,
                partition,
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let scores: Vec<LengthScore> = runs.iter().map(|r| r.score).collect();
    let selected = select_length(&scores).expect("at least one length succeeded");
    let chosen = &runs[selected];
    let stats = node_stats(&chosen.graph, &final_dense)?;
    let clusters = exemplar_nodes(&chosen.graph, &stats)?;
    let graphoids = if config.lambda.is_some() || config.gamma.is_some() {
        Some(cluster_graphoids(&stats, config.lambda, config.gamma)?)
    } else {
        None
    };
    let report = GraphoidReport {
        dataset: data.name().to_string(),
        k: config.k,
        selected_length: chosen.length,
        selected_replicate: chosen.replicate,
        lengths: scores,
        failed_lengths: failed.iter().map(|f| f.length).collect(),
        clusters,
        lambda: config.lambda,
        gamma: config.gamma,
        graphoids,
        metrics: None,
    };
    Ok((runs, selected, report))
}

fn dense_partition(p: &Partition) -> Result<Partition> {
    let sizes = p.cluster_sizes();
    if sizes.iter().all(|&s| s > 0) {
        return Ok(p.clone());
    }
    let mut remap = vec![usize::MAX; p.k()];
    let mut next = 0;
    for (c, &s) in sizes.iter().enumerate() {
        if s > 0 {
            remap[c] = next;
            next += 1;
        }
    }
    log::warn!("final partition has {} empty clusters", p.k() - next);
    Partition::new(p.labels().iter().map(|&l| remap[l]).collect(), next, None)
}

fn resolve_lengths(data: &Dataset, config: &RunConfig) -> Result<Vec<usize>> {
    match &config.lengths {
        Some(fixed) => {
            let max = data.min_len();
            if let Some(&bad) = fixed.iter().find(|&&l| l < MIN_SERIES_LEN || l > max) {
                return Err(KGraphError::LengthOutOfRange { length: bad, max });
            }
            let mut sorted = fixed.clone();
            sorted.sort_unstable();
            Ok(sorted)
        }
        None => sample_lengths(data, config.m_lengths, config.rml, config.seed),
    }
}

/// Pairs each length with its occurrence index among equal lengths.
fn with_replicates(lengths: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(lengths.len());
    for &l in lengths {
        let replicate = out.last().filter(|(prev, _)| *prev == l).map_or(0, |(_, r)| r + 1);
        out.push((l, replicate));
    }
    out
}

fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot += start.elapsed();
    out
}
