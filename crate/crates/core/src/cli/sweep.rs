use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Cell, ExperimentConfig};
use crate::codec;
use crate::error::{Error, Result};
use crate::game::{evaluate, log_to_csv, train, Checkpoint};
use crate::metrics::MetricsReport;
use crate::scenegen::{generate_dataset, Dataset, DatasetHeader};
use crate::seed;

pub const CELL_FILE: &str = "cell.json";
pub const SPEAKER_FILE: &str = "speaker.json";
pub const LISTENER_FILE: &str = "listener.json";
pub const LOG_FILE: &str = "train_log.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CORPUS_FILE: &str = "corpus.jsonl";

pub struct GenDataSummary {
    pub scenes: usize,
    pub seed: u64,
    pub path: PathBuf,
}

pub fn gen_data(config: &ExperimentConfig, out: &Path) -> Result<GenDataSummary> {
    let catalog = config.load_catalog()?;
    let ds = generate_dataset(config.n_scenes, &catalog, config.d, config.k, config.noise_sigma, config.data_seed)?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    ds.save(out)?;
    Ok(GenDataSummary {
        scenes: ds.len(),
        seed: config.data_seed,
        path: out.to_path_buf(),
    })
}

/// Make the dataset fields of `config` describe the dataset actually used.
fn adopt_dataset(config: &mut ExperimentConfig, ds: &Dataset) {
    config.n_scenes = ds.len();
    config.d = ds.header.d;
    config.k = ds.header.k;
    config.noise_sigma = ds.header.noise_sigma;
    config.data_seed = ds.header.seed;
}

fn dataset_echo(header: &DatasetHeader) -> serde_json::Value {
    serde_json::json!({
        "format": header.format,
        "version": header.version,
        "catalog": header.catalog,
    })
}

fn cell_echo(config: &ExperimentConfig, cell: &Cell, ds: &Dataset) -> serde_json::Value {
    let mut echo = config.echo(Some(cell));
    echo["dataset"] = dataset_echo(&ds.header);
    echo
}

fn run_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

pub struct TrainSummary {
    pub cells: usize,
    pub trained: usize,
    pub skipped: usize,
}

/// Train every cell of the grid into `out/<cell name>/`. A cell whose
/// `cell.json` already exists with the same configuration is skipped;
/// `cell.json` is written last, so interrupted cells are retrained.
pub fn train_sweep(config: &ExperimentConfig, data: &Path, out: &Path, jobs: usize) -> Result<TrainSummary> {
    let ds = Dataset::load(data)?;
    let mut config = config.clone();
    adopt_dataset(&mut config, &ds);
    config.validate()?;
    let (train_graphs, _) = ds.split(config.eval_fraction, config.split_seed())?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let cells = config.cells();
    let outcomes = run_pool(jobs, || {
        cells
            .par_iter()
            .map(|cell| {
                let dir = out.join(cell.name());
                let echo = cell_echo(&config, cell, &ds);
                if cell_complete(&dir, &echo)? {
                    eprintln!("skip {}", cell.name());
                    return Ok(false);
                }
                train_cell(&config, cell, &train_graphs, &dir, &echo).map_err(|e| e.in_cell(cell.name()))?;
                Ok(true)
            })
            .collect::<Vec<Result<bool>>>()
    })?;
    let mut trained = 0;
    for outcome in outcomes {
        trained += usize::from(outcome?);
    }
    Ok(TrainSummary {
        cells: cells.len(),
        trained,
        skipped: cells.len() - trained,
    })
}

fn cell_complete(dir: &Path, echo: &serde_json::Value) -> Result<bool> {
    let path = dir.join(CELL_FILE);
    if !path.is_file() {
        return Ok(false);
    }
    let previous: serde_json::Value = codec::read_json(&path)?;
    if &previous != echo {
        return Err(Error::Incompatible(format!(
            "{} was produced by a different configuration; use a fresh output directory",
            path.display()
        )));
    }
    Ok(true)
}

fn train_cell(
    config: &ExperimentConfig,
    cell: &Cell,
    graphs: &[crate::scenegen::SceneGraph],
    dir: &Path,
    echo: &serde_json::Value,
) -> Result<()> {
    let outcome = train(graphs, &config.train_config(cell))?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Checkpoint::of_speaker(&outcome.speaker).save(&dir.join(SPEAKER_FILE))?;
    Checkpoint::of_listener(&outcome.listener).save(&dir.join(LISTENER_FILE))?;
    codec::write_atomic(&dir.join(LOG_FILE), log_to_csv(&outcome.log).as_bytes())?;
    codec::write_json_pretty(&dir.join(CELL_FILE), echo)?;
    if let Some(last) = outcome.log.last() {
        eprintln!(
            "trained {} epochs={} loss={:.4} train_accuracy={:.4}",
            cell.name(),
            last.epoch,
            last.mean_loss,
            last.train_accuracy
        );
    } else {
        eprintln!("trained {} epochs=0", cell.name());
    }
    Ok(())
}

/// Cell directories under `root` (those holding a `cell.json`), by name.
pub fn find_cells(root: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(root).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Missing(root.to_path_buf()),
        _ => Error::io(root, e),
    })?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let path = entry.path();
        if path.join(CELL_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

pub struct EvalSummary {
    pub cells: usize,
    pub mean_accuracy: f64,
}

/// Evaluate every trained cell under `checkpoints` on the held-out split and
/// write `report.json` and `corpus.jsonl` to `out/<cell name>/`.
pub fn eval_sweep(
    checkpoints: &Path,
    data: &Path,
    out: &Path,
    rounds: Option<usize>,
    jobs: usize,
) -> Result<EvalSummary> {
    let cell_dirs = find_cells(checkpoints)?;
    if cell_dirs.is_empty() {
        return Err(Error::Missing(checkpoints.join(format!("*/{CELL_FILE}"))));
    }
    let ds = Dataset::load(data)?;
    let accuracies = run_pool(jobs, || {
        cell_dirs
            .par_iter()
            .map(|dir| {
                let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                eval_cell(dir, &ds, &out.join(&name), rounds).map_err(|e| e.in_cell(name))
            })
            .collect::<Vec<Result<f64>>>()
    })?
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(EvalSummary {
        cells: accuracies.len(),
        mean_accuracy: accuracies.iter().sum::<f64>() / accuracies.len() as f64,
    })
}

fn eval_cell(dir: &Path, ds: &Dataset, out: &Path, rounds: Option<usize>) -> Result<f64> {
    let mut echo: serde_json::Value = codec::read_json(&dir.join(CELL_FILE))?;
    let cell: Cell = serde_json::from_value(echo["cell"].clone())
        .map_err(|e| Error::Incompatible(format!("cell record: {e}")))?;
    let mut config = config_from_echo(&echo)?;
    if echo["dataset"] != dataset_echo(&ds.header)
        || (config.n_scenes, config.d, config.k, config.data_seed) != (ds.len(), ds.header.d, ds.header.k, ds.header.seed)
        || config.noise_sigma != ds.header.noise_sigma
    {
        return Err(Error::Incompatible("dataset differs from the one the cell was trained on".into()));
    }
    if rounds.is_some() {
        config.eval_rounds = rounds;
        echo["eval_rounds"] = serde_json::to_value(rounds)?;
    }

    let speaker = Checkpoint::load(&dir.join(SPEAKER_FILE))?.into_speaker()?;
    let listener = Checkpoint::load(&dir.join(LISTENER_FILE))?.into_listener()?;
    let (_, eval_graphs) = ds.split(config.eval_fraction, config.split_seed())?;
    let mut rng = seed::rng_from(&[config.cell_seed(&cell), seed::label("eval")]);
    let evaluation = evaluate(&speaker, &listener, &eval_graphs, config.n_distractors, config.eval_rounds, &mut rng)?;
    let report = MetricsReport::compute(evaluation.accuracy, &evaluation.corpus, echo)?;
    report.check()?;

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    evaluation.corpus.save(&out.join(CORPUS_FILE))?;
    codec::write_json_pretty(&out.join(REPORT_FILE), &report)?;
    eprintln!(
        "evaluated {} accuracy={:.4} ci={:.4} topsim={}",
        cell.name(),
        report.accuracy,
        report.ci,
        report.topsim.map_or("n/a".to_string(), |t| format!("{t:.4}"))
    );
    Ok(report.accuracy)
}

fn config_from_echo(echo: &serde_json::Value) -> Result<ExperimentConfig> {
    let mut fields = echo
        .as_object()
        .cloned()
        .ok_or_else(|| Error::Incompatible("cell record is not a JSON object".into()))?;
    fields.remove("cell");
    fields.remove("dataset");
    serde_json::from_value(serde_json::Value::Object(fields))
        .map_err(|e| Error::Incompatible(format!("cell configuration: {e}")))
}
