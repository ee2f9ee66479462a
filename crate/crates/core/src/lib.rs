//! Time-series clustering through subsequence transition graphs.
//!
//! A dataset is embedded into one directed graph per subsequence length,
//! each graph yields a partition from per-series node/edge features, and the
//! partitions are merged by spectral clustering of their co-clustering
//! frequencies. The graph that best agrees with the final partition is then
//! used to explain every cluster through its most representative and
//! exclusive nodes.
//!
//! ```no_run
//! use kgraph::pipeline::{run_path, RunConfig};
//!
//! let out = run_path("data/Trace", &RunConfig::new(4)).unwrap();
//! println!("{:?}", out.labels.labels());
//! println!("{}", out.report.to_json().unwrap());
//! ```

pub mod bench;
pub mod consensus;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod graph_clustering;
pub mod interpretability;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod synthetic;

pub use dataset::{load, load_ucr_tsv, Dataset, TimeSeries};
pub use embedding::{build_graph, PatternGraph};
pub use error::{KGraphError, Result, Stage};
pub use graph_clustering::Partition;
pub use pipeline::{run, run_path, RunConfig, RunOutput};
