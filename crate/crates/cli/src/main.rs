use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kgraph::bench::{self, BenchSource};
use kgraph::graph_clustering::FeatureMode;
use kgraph::pipeline::{self, Exports, RunConfig};
use kgraph::{dataset, synthetic};

#[derive(Parser)]
#[command(name = "kgraph", version, about = "Interpretable time-series clustering with subsequence graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one dataset and write labels, report and optional exports.
    Run(RunArgs),
    /// Run several datasets and seeds, one CSV row each.
    Bench(BenchArgs),
    /// Write a synthetic labelled dataset in UCR layout.
    Synth(SynthArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Number of clusters; defaults to the number of distinct labels.
    #[arg(long)]
    k: Option<usize>,
    /// Number of subsequence lengths to draw.
    #[arg(long, default_value_t = 30)]
    m_lengths: usize,
    /// Sample one subsequence in `smpl` to fit the projection.
    #[arg(long, default_value_t = 10)]
    smpl: usize,
    /// Longest length as a fraction of the shortest series.
    #[arg(long, default_value_t = 0.4)]
    rml: f64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Comma-separated lengths used instead of a random draw.
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<usize>>,
    /// Z-normalize each series before embedding.
    #[arg(long)]
    znorm: bool,
    /// How paths are counted into features: `transitions` merges repeated
    /// visits to the same node, `occupancy` counts every subsequence.
    #[arg(long, value_enum, default_value_t = Features::Transitions)]
    features: Features,
}

#[derive(Clone, Copy, ValueEnum)]
enum Features {
    Transitions,
    Occupancy,
}

impl PipelineArgs {
    fn config(&self, k: usize, seed: u64) -> RunConfig {
        RunConfig {
            m_lengths: self.m_lengths,
            smpl: self.smpl,
            rml: self.rml,
            seed,
            workers: self.workers,
            lengths: self.lengths.clone(),
            znorm: self.znorm,
            features: match self.features {
                Features::Transitions => FeatureMode::Transitions,
                Features::Occupancy => FeatureMode::Occupancy,
            },
            ..RunConfig::new(k)
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// UCR file, or a directory holding `<Name>_TRAIN.tsv` and `<Name>_TEST.tsv`.
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exclusivity threshold for the reported lambda-graphoids.
    #[arg(long)]
    lambda: Option<f64>,
    /// Representativity threshold for the reported gamma-graphoids.
    #[arg(long)]
    gamma: Option<f64>,
    /// Write every graph as JSON, paths included.
    #[arg(long)]
    export_graph: bool,
    /// Write the consensus matrix as CSV.
    #[arg(long)]
    export_consensus: bool,
    /// Write the raw feature matrix of every length as CSV.
    #[arg(long)]
    export_features: bool,
    #[arg(long, default_value = "kgraph-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset path; repeat for several.
    #[arg(long = "dataset", required = true)]
    datasets: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Cbf,
    Control,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SynthKind::Cbf)]
    kind: SynthKind,
    #[arg(long, default_value_t = 30)]
    n_per_class: usize,
    #[arg(long, default_value_t = 128)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Bench(args) => bench(args),
        Command::Synth(args) => synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let data = dataset::load(&args.dataset)?;
    let k = match args.pipeline.k.or(data.n_classes()) {
        Some(k) => k,
        None => bail!("--k is required for unlabelled data"),
    };
    let config = RunConfig {
        lambda: args.lambda,
        gamma: args.gamma,
        ..args.pipeline.config(k, args.seed)
    };
    let out = pipeline::run(&data, &config)?;
    let exports = Exports {
        graphs: args.export_graph,
        consensus: args.export_consensus,
        features: args.export_features,
    };
    out.write_artifacts(&args.out_dir, &exports)?;

    let mut stdout = io::stdout().lock();
    writeln!(stdout, "dataset: {} ({} series, k = {k})", out.dataset_name, data.len())?;
    writeln!(
        stdout,
        "lengths: {} built, {} failed; selected length {}",
        out.runs.len(),
        out.failed.len(),
        out.report.selected_length
    )?;
    if let Some(m) = out.metrics {
        writeln!(
            stdout,
            "ARI {:.4}  RI {:.4}  AMI {:.4}  NMI {:.4}",
            m.ari, m.ri, m.ami, m.nmi
        )?;
    }
    writeln!(stdout, "outputs written to {}", args.out_dir.display())?;
    Ok(())
}

fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let sources: Vec<BenchSource> = args.datasets.into_iter().map(BenchSource::Path).collect();
    let base = args.pipeline.config(1, 0);
    let rows = bench::bench(&sources, &args.seeds, &base, args.pipeline.k);
    match args.output {
        Some(path) => {
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            bench::write_csv(&rows, BufWriter::new(file))?;
        }
        None => bench::write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn synth(args: SynthArgs) -> anyhow::Result<()> {
    let data = match args.kind {
        SynthKind::Cbf => synthetic::cbf(args.n_per_class, args.length, args.seed)?,
        SynthKind::Control => synthetic::synthetic_control(args.n_per_class, args.length, args.seed)?,
    };
    let file = File::create(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    let mut out = BufWriter::new(file);
    data.write_ucr_tsv(&mut out)?;
    out.flush()?;
    Ok(())
}
