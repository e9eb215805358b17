//! Command-line driver: dataset generation, sweep training, evaluation and
//! report aggregation. Each command returns a one-line `key=value` summary.

mod config;
mod report;
mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Cell, ExperimentConfig};
pub use report::{
    aggregate_csv, coverage_panel, find_reports, group_reports, histogram_panel, metrics_panel, report, zipf_panel,
    Group, ReportSummary, Stat, AGGREGATE_FILE, COVERAGE_PANEL, HISTOGRAM_PANEL, METRICS_PANEL, ZIPF_PANEL,
};
pub use sweep::{
    eval_sweep, find_cells, gen_data, train_sweep, EvalSummary, GenDataSummary, TrainSummary, CELL_FILE,
    CORPUS_FILE, LISTENER_FILE, LOG_FILE, REPORT_FILE, SPEAKER_FILE,
};

use crate::error::Result;
use crate::game::EncoderKind;

#[derive(Debug, Parser)]
#[command(name = "kgec", version, about = "Emergent communication over scene knowledge graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a procedural scene-graph dataset.
    GenData(GenDataArgs),
    /// Train every (vocab, encoder, seed) cell of the sweep.
    Train(TrainArgs),
    /// Evaluate trained cells on the held-out split and compute metrics.
    Eval(EvalArgs),
    /// Aggregate cell reports across seeds and emit plot data.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Flat JSON experiment config; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scenes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Concept catalog JSON (built-in catalog when absent).
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Node feature width including the 2 centroid dims.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub vocab_sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub encoders: Option<Vec<EncoderKind>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub master_seed: Option<u64>,
    #[arg(long)]
    pub message_len: Option<usize>,
    #[arg(long)]
    pub n_distractors: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub eval_fraction: Option<f64>,
    #[arg(long)]
    pub eval_rounds: Option<usize>,
    #[arg(long)]
    pub gcn_hidden: Option<usize>,
    #[arg(long)]
    pub embed: Option<usize>,
    #[arg(long)]
    pub gru_hidden: Option<usize>,
    #[arg(long)]
    pub token_dim: Option<usize>,
    /// Cells trained concurrently (defaults to the number of CPUs).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory holding one subdirectory per trained cell.
    #[arg(long)]
    pub checkpoints: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Defaults to the checkpoint directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Random rounds instead of one round per held-out scene.
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory holding `<cell>/report.json` files.
    #[arg(long)]
    pub reports: PathBuf,
    /// Defaults to the reports directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn base_config(path: &Option<PathBuf>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

impl GenDataArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = base_config(&self.config)?;
        set(&mut c.n_scenes, self.scenes);
        set(&mut c.data_seed, self.seed);
        if self.catalog.is_some() {
            c.catalog = self.catalog.clone();
        }
        set(&mut c.d, self.d);
        set(&mut c.k, self.k);
        set(&mut c.noise_sigma, self.noise_sigma);
        Ok(c)
    }
}

impl TrainArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = base_config(&self.config)?;
        set(&mut c.vocab_sizes, self.vocab_sizes.clone());
        set(&mut c.encoders, self.encoders.clone());
        set(&mut c.seeds, self.seeds.clone());
        set(&mut c.master_seed, self.master_seed);
        set(&mut c.message_len, self.message_len);
        set(&mut c.n_distractors, self.n_distractors);
        set(&mut c.batch_size, self.batch_size);
        set(&mut c.epochs, self.epochs);
        set(&mut c.learning_rate, self.learning_rate);
        set(&mut c.tau, self.tau);
        set(&mut c.eval_fraction, self.eval_fraction);
        if self.eval_rounds.is_some() {
            c.eval_rounds = self.eval_rounds;
        }
        set(&mut c.gcn_hidden, self.gcn_hidden);
        set(&mut c.embed, self.embed);
        set(&mut c.gru_hidden, self.gru_hidden);
        set(&mut c.token_dim, self.token_dim);
        Ok(c)
    }
}

fn jobs(flag: Option<usize>) -> usize {
    flag.filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Run one command; the returned line goes to standard output.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::GenData(args) => {
            let s = gen_data(&args.resolve()?, &args.out)?;
            Ok(format!("scenes={} seed={} out={}", s.scenes, s.seed, s.path.display()))
        }
        Command::Train(args) => {
            let s = train_sweep(&args.resolve()?, &args.data, &args.out, jobs(args.jobs))?;
            Ok(format!(
                "cells={} trained={} skipped={} out={}",
                s.cells,
                s.trained,
                s.skipped,
                args.out.display()
            ))
        }
        Command::Eval(args) => {
            let out = args.out.clone().unwrap_or_else(|| args.checkpoints.clone());
            let s = eval_sweep(&args.checkpoints, &args.data, &out, args.rounds, jobs(args.jobs))?;
            Ok(format!("cells={} mean_accuracy={} out={}", s.cells, s.mean_accuracy, out.display()))
        }
        Command::Report(args) => {
            let out = args.out.clone().unwrap_or_else(|| args.reports.clone());
            let s = report(&args.reports, &out)?;
            Ok(format!("reports={} groups={} out={}", s.reports, s.groups, out.display()))
        }
    }
}
