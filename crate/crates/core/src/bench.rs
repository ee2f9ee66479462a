//! Batch runs over datasets and seeds, summarized as CSV rows.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use crate::dataset::{self, Dataset};
use crate::error::{KGraphError, Stage};
use crate::pipeline::{run, RunConfig, StageTimings};

#[derive(Debug, Clone)]
pub enum BenchSource {
    Path(PathBuf),
    Loaded(Dataset),
}

impl BenchSource {
    fn name(&self) -> String {
        match self {
            BenchSource::Path(p) => p
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("dataset")
                .to_string(),
            BenchSource::Loaded(d) => d.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub seed: u64,
    pub status: String,
    pub error: String,
    pub n_series: usize,
    pub k: usize,
    pub ari: Option<f64>,
    pub ri: Option<f64>,
    pub ami: Option<f64>,
    pub nmi: Option<f64>,
    pub noise_ratio: Option<f64>,
    pub selected_length: Option<usize>,
    pub mean_nodes: Option<f64>,
    pub mean_edges: Option<f64>,
    pub load_s: f64,
    pub length_sampling_s: f64,
    pub embedding_s: f64,
    pub graph_clustering_s: f64,
    pub consensus_s: f64,
    pub interpretability_s: f64,
    pub total_s: f64,
}

pub const CSV_HEADER: &str = "dataset,seed,status,error,n_series,k,ari,ri,ami,nmi,noise_ratio,\
selected_length,mean_nodes,mean_edges,load_s,length_sampling_s,embedding_s,graph_clustering_s,\
consensus_s,interpretability_s,total_s";

impl BenchRow {
    pub fn to_csv(&self) -> String {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|v| v.to_string()).unwrap_or_default()
        }
        let error = self.error.replace(['"', ',', '\n'], " ");
        [
            self.dataset.clone(),
            self.seed.to_string(),
            self.status.clone(),
            error,
            self.n_series.to_string(),
            self.k.to_string(),
            opt(self.ari),
            opt(self.ri),
            opt(self.ami),
            opt(self.nmi),
            opt(self.noise_ratio),
            opt(self.selected_length),
            opt(self.mean_nodes),
            opt(self.mean_edges),
            self.load_s.to_string(),
            self.length_sampling_s.to_string(),
            self.embedding_s.to_string(),
            self.graph_clustering_s.to_string(),
            self.consensus_s.to_string(),
            self.interpretability_s.to_string(),
            self.total_s.to_string(),
        ]
        .join(",")
    }

    fn set_timings(&mut self, t: &StageTimings) {
        self.load_s = t.load.as_secs_f64();
        self.length_sampling_s = t.length_sampling.as_secs_f64();
        self.embedding_s = t.embedding.as_secs_f64();
        self.graph_clustering_s = t.graph_clustering.as_secs_f64();
        self.consensus_s = t.consensus.as_secs_f64();
        self.interpretability_s = t.interpretability.as_secs_f64();
        self.total_s = t.total.as_secs_f64();
    }
}

/// Mean noise ratio over the non-constant series of a dataset.
pub fn dataset_noise_ratio(ds: &Dataset) -> Option<f64> {
    let ratios: Vec<f64> = ds.series().iter().filter_map(|s| s.noise_ratio().ok()).collect();
    (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64)
}

/// One row per `(source, seed)`. `k` defaults to the dataset's class count.
/// Failures become rows with status `error`; the batch carries on.
pub fn bench(sources: &[BenchSource], seeds: &[u64], base: &RunConfig, k: Option<usize>) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for source in sources {
        let load_start = Instant::now();
        let loaded = match source {
            BenchSource::Path(p) => dataset::load(p).map_err(|e| e.at(Stage::Load).to_string()),
            BenchSource::Loaded(d) => Ok(d.clone()),
        };
        let load = load_start.elapsed();
        for &seed in seeds {
            let mut row = BenchRow {
                dataset: source.name(),
                seed,
                ..BenchRow::default()
            };
            let result = loaded.as_ref().map_err(String::clone).and_then(|ds| {
                row.dataset = ds.name().to_string();
                row.n_series = ds.len();
                row.noise_ratio = dataset_noise_ratio(ds);
                let k = k.or(ds.n_classes()).ok_or_else(|| {
                    KGraphError::InvalidConfig("k not given and dataset has no labels".into()).to_string()
                })?;
                row.k = k;
                run(ds, &RunConfig { k, seed, ..base.clone() }).map_err(|e| e.to_string())
            });
            match result {
                Ok(out) => {
                    let mut timings = out.timings;
                    timings.load = load;
                    timings.total += load;
                    row.status = "ok".into();
                    if let Some(m) = out.metrics {
                        row.ari = Some(m.ari);
                        row.ri = Some(m.ri);
                        row.ami = Some(m.ami);
                        row.nmi = Some(m.nmi);
                    }
                    row.selected_length = Some(out.report.selected_length);
                    row.mean_nodes = Some(out.mean_nodes());
                    row.mean_edges = Some(out.mean_edges());
                    row.set_timings(&timings);
                }
                Err(e) => {
                    log::warn!("{} seed {seed}: {e}", row.dataset);
                    row.status = "error".into();
                    row.error = e;
                }
            }
            rows.push(row);
        }
    }
    rows
}

pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    Ok(())
}
