use serde::{Deserialize, Serialize};

use super::ci::context_independence;
use super::corpus::MessageCorpus;
use super::tokens::{coverage_from_zipf, token_histogram, zipf_from_histogram};
use super::topsim::topsim;
use crate::error::{Error, Result};

pub const COVERAGE_THRESHOLD: f64 = 0.9;

/// All measures for one experiment cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    /// `None` when the distance structure is degenerate (e.g. every message
    /// identical); `topsim_note` then says why.
    pub topsim: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topsim_note: Option<String>,
    pub ci: f64,
    pub zipf: Vec<(usize, usize)>,
    pub coverage90: usize,
    pub histogram: Vec<usize>,
    pub n_records: usize,
    pub message_len: usize,
    pub vocab_size: usize,
    /// Echo of the configuration that produced this report.
    pub config: serde_json::Value,
}

impl MetricsReport {
    pub fn compute(accuracy: f64, corpus: &MessageCorpus, config: serde_json::Value) -> Result<Self> {
        let (topsim, topsim_note) = match topsim(corpus) {
            Ok(v) => (Some(v), None),
            Err(Error::UndefinedCorrelation(why)) => (None, Some(why)),
            Err(e) => return Err(e),
        };
        let histogram = token_histogram(corpus);
        let zipf = zipf_from_histogram(&histogram);
        let coverage90 = coverage_from_zipf(&zipf, COVERAGE_THRESHOLD)?;
        let report = MetricsReport {
            accuracy,
            topsim,
            topsim_note,
            ci: context_independence(corpus),
            zipf,
            coverage90,
            histogram,
            n_records: corpus.len(),
            message_len: corpus.message_len(),
            vocab_size: corpus.vocab_size(),
            config,
        };
        report.check()?;
        Ok(report)
    }

    /// Range and conservation invariants.
    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.accuracy) {
            return Err(Error::numerical(format!("accuracy {} outside [0, 1]", self.accuracy)));
        }
        if let Some(t) = self.topsim {
            if !(-1.0..=1.0).contains(&t) {
                return Err(Error::numerical(format!("topsim {t} outside [-1, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.ci) {
            return Err(Error::numerical(format!("ci {} outside [0, 1]", self.ci)));
        }
        let hist_total: usize = self.histogram.iter().sum();
        let zipf_total: usize = self.zipf.iter().map(|&(_, c)| c).sum();
        if hist_total != self.n_records * self.message_len || zipf_total != hist_total {
            return Err(Error::numerical("token counts are not conserved"));
        }
        Ok(())
    }
}
