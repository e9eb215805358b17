use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::sweep::REPORT_FILE;
use crate::codec;
use crate::error::{Error, Result};
use crate::game::EncoderKind;
use crate::metrics::{zipf_from_histogram, MetricsReport};

pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const ZIPF_PANEL: &str = "panel_zipf.csv";
pub const COVERAGE_PANEL: &str = "panel_coverage.csv";
pub const HISTOGRAM_PANEL: &str = "panel_histogram.csv";
pub const METRICS_PANEL: &str = "panel_metrics_vs_vocab.csv";

/// Mean and sample standard deviation; a single value has deviation 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n == 1 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Some(Stat { n, mean, std })
    }
}

/// Reports sharing a (vocabulary size, encoder) pair.
#[derive(Clone, Debug)]
pub struct Group {
    pub vocab: usize,
    pub encoder: EncoderKind,
    pub reports: Vec<MetricsReport>,
}

impl Group {
    pub fn label(&self) -> String {
        format!("V{}_{}", self.vocab, self.encoder)
    }

    fn stat(&self, f: impl Fn(&MetricsReport) -> Option<f64>) -> Option<Stat> {
        Stat::of(&self.reports.iter().filter_map(f).collect::<Vec<_>>())
    }

    pub fn accuracy(&self) -> Stat {
        self.stat(|r| Some(r.accuracy)).expect("groups are non-empty")
    }

    /// Over the reports where TopSim is defined.
    pub fn topsim(&self) -> Option<Stat> {
        self.stat(|r| r.topsim)
    }

    pub fn ci(&self) -> Stat {
        self.stat(|r| Some(r.ci)).expect("groups are non-empty")
    }

    pub fn coverage90(&self) -> Stat {
        self.stat(|r| Some(r.coverage90 as f64)).expect("groups are non-empty")
    }

    /// Token counts pooled over seeds.
    pub fn pooled_histogram(&self) -> Vec<usize> {
        let width = self.reports.iter().map(|r| r.histogram.len()).max().unwrap_or(0);
        let mut total = vec![0; width];
        for r in &self.reports {
            for (t, &c) in r.histogram.iter().enumerate() {
                total[t] += c;
            }
        }
        total
    }
}

/// Every `*/report.json` under `root`, sorted by path.
pub fn find_reports(root: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(root).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Missing(root.to_path_buf()),
        _ => Error::io(root, e),
    })?;
    let mut found = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(root, e))?.path().join(REPORT_FILE);
        if path.is_file() {
            found.push(path);
        }
    }
    found.sort();
    Ok(found)
}

pub fn group_reports(reports: Vec<MetricsReport>) -> Result<Vec<Group>> {
    let mut groups: BTreeMap<(usize, EncoderKind), Vec<MetricsReport>> = BTreeMap::new();
    for r in reports {
        let encoder: EncoderKind = r.config["cell"]["encoder"]
            .as_str()
            .ok_or_else(|| Error::Incompatible("report lacks a cell encoder".into()))?
            .parse()?;
        groups.entry((r.vocab_size, encoder)).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((vocab, encoder), reports)| Group {
            vocab,
            encoder,
            reports,
        })
        .collect())
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn aggregate_csv(groups: &[Group]) -> String {
    let mut out = String::from(
        "vocab,encoder,n,accuracy_mean,accuracy_std,topsim_n,topsim_mean,topsim_std,ci_mean,ci_std,coverage90_mean,coverage90_std\n",
    );
    for g in groups {
        let (acc, ci, cov) = (g.accuracy(), g.ci(), g.coverage90());
        let ts = g.topsim();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            g.vocab,
            g.encoder,
            acc.n,
            acc.mean,
            acc.std,
            ts.map_or(0, |s| s.n),
            opt(ts.map(|s| s.mean)),
            opt(ts.map(|s| s.std)),
            ci.mean,
            ci.std,
            cov.mean,
            cov.std
        )
        .expect("string write");
    }
    out
}

const PANEL_HEADER: &str = "panel,x,y\n";

/// log10 rank against log10 count, pooled over seeds.
pub fn zipf_panel(groups: &[Group]) -> String {
    let mut out = String::from(PANEL_HEADER);
    for g in groups {
        for (rank, count) in zipf_from_histogram(&g.pooled_histogram()) {
            writeln!(out, "{},{},{}", g.label(), (rank as f64).log10(), (count as f64).log10()).expect("string write");
        }
    }
    out
}

/// Cumulative token share against rank.
pub fn coverage_panel(groups: &[Group]) -> String {
    let mut out = String::from(PANEL_HEADER);
    for g in groups {
        let zipf = zipf_from_histogram(&g.pooled_histogram());
        let total: usize = zipf.iter().map(|&(_, c)| c).sum();
        let mut acc = 0;
        for (rank, count) in zipf {
            acc += count;
            writeln!(out, "{},{},{}", g.label(), rank, acc as f64 / total as f64).expect("string write");
        }
    }
    out
}

pub fn histogram_panel(groups: &[Group]) -> String {
    let mut out = String::from(PANEL_HEADER);
    for g in groups {
        for (token, count) in g.pooled_histogram().into_iter().enumerate() {
            writeln!(out, "{},{},{}", g.label(), token, count).expect("string write");
        }
    }
    out
}

/// Mean of each metric against vocabulary size, one panel per metric and
/// encoder.
pub fn metrics_panel(groups: &[Group]) -> String {
    let mut out = String::from(PANEL_HEADER);
    for metric in ["accuracy", "topsim", "ci", "coverage90"] {
        for g in groups {
            let stat = match metric {
                "accuracy" => Some(g.accuracy()),
                "topsim" => g.topsim(),
                "ci" => Some(g.ci()),
                _ => Some(g.coverage90()),
            };
            if let Some(s) = stat {
                writeln!(out, "{metric}_{},{},{}", g.encoder, g.vocab, s.mean).expect("string write");
            }
        }
    }
    out
}

pub struct ReportSummary {
    pub reports: usize,
    pub groups: usize,
}

pub fn report(reports_dir: &Path, out: &Path) -> Result<ReportSummary> {
    let paths = find_reports(reports_dir)?;
    if paths.is_empty() {
        return Err(Error::Missing(reports_dir.join(format!("*/{REPORT_FILE}"))));
    }
    let reports = paths
        .iter()
        .map(|p| codec::read_json::<MetricsReport>(p))
        .collect::<Result<Vec<_>>>()?;
    let n = reports.len();
    let groups = group_reports(reports)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for (name, text) in [
        (AGGREGATE_FILE, aggregate_csv(&groups)),
        (ZIPF_PANEL, zipf_panel(&groups)),
        (COVERAGE_PANEL, coverage_panel(&groups)),
        (HISTOGRAM_PANEL, histogram_panel(&groups)),
        (METRICS_PANEL, metrics_panel(&groups)),
    ] {
        codec::write_atomic(&out.join(name), text.as_bytes())?;
    }
    Ok(ReportSummary {
        reports: n,
        groups: groups.len(),
    })
}
