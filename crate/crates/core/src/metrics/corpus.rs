use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::{self, JsonLines};
use crate::error::{Error, Result};
use crate::scenegen::ConceptTuple;

/// One evaluation round: the target's concept slots and the hard message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    /// Slot values in a fixed order (for scenes: food, drink, tool1, tool2,
    /// tool3, dir1, dir2).
    pub tuple: Vec<String>,
    pub tokens: Vec<usize>,
}

impl CorpusRecord {
    pub fn new(tuple: &ConceptTuple, tokens: Vec<usize>) -> Self {
        CorpusRecord {
            tuple: tuple.slot_strings(),
            tokens,
        }
    }
}

/// Messages harvested at evaluation, the input to every metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageCorpus {
    vocab_size: usize,
    records: Vec<CorpusRecord>,
}

impl MessageCorpus {
    pub fn new(vocab_size: usize) -> Self {
        MessageCorpus {
            vocab_size,
            records: Vec::new(),
        }
    }

    /// Validates every record: equal message lengths, equal slot counts,
    /// token ids below `vocab_size`.
    pub fn from_records(vocab_size: usize, records: Vec<CorpusRecord>) -> Result<Self> {
        let mut corpus = MessageCorpus::new(vocab_size);
        for r in records {
            corpus.push(r)?;
        }
        Ok(corpus)
    }

    pub fn push(&mut self, record: CorpusRecord) -> Result<()> {
        if let Some(first) = self.records.first() {
            if first.tokens.len() != record.tokens.len() {
                return Err(Error::structural(format!(
                    "message length {} differs from corpus length {}",
                    record.tokens.len(),
                    first.tokens.len()
                )));
            }
            if first.tuple.len() != record.tuple.len() {
                return Err(Error::structural("records have different concept slot counts"));
            }
        }
        if let Some(&bad) = record.tokens.iter().find(|&&t| t >= self.vocab_size) {
            return Err(Error::structural(format!(
                "token {bad} outside vocabulary of {}",
                self.vocab_size
            )));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn records(&self) -> &[CorpusRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Message length `L` (0 for an empty corpus).
    pub fn message_len(&self) -> usize {
        self.records.first().map_or(0, |r| r.tokens.len())
    }

    /// Same corpus with every token id mapped through `perm`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let records = self
            .records
            .iter()
            .map(|r| CorpusRecord {
                tuple: r.tuple.clone(),
                tokens: r.tokens.iter().map(|&t| perm[t]).collect(),
            })
            .collect();
        MessageCorpus::from_records(self.vocab_size, records)
    }

    pub fn write_to<W: Write>(&self, out: W) -> std::io::Result<W> {
        let mut lines = JsonLines::new(out);
        for r in &self.records {
            lines.push(r)?;
        }
        lines.finish()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.write_to(Vec::new()).expect("in-memory write");
        codec::write_atomic(path, &bytes)
    }

    pub fn read_from<R: Read>(vocab_size: usize, src: R) -> Result<Self> {
        let records = codec::read_lines(src)
            .map(|line| {
                let line = line.map_err(|e| Error::io("<corpus>", e))?;
                Ok(serde_json::from_str(&line)?)
            })
            .collect::<Result<Vec<CorpusRecord>>>()?;
        MessageCorpus::from_records(vocab_size, records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(tuple: &[&str], tokens: &[usize]) -> CorpusRecord {
        CorpusRecord {
            tuple: tuple.iter().map(|s| s.to_string()).collect(),
            tokens: tokens.to_vec(),
        }
    }

    #[test]
    fn rejects_inconsistent_records() {
        let mut c = MessageCorpus::new(3);
        c.push(rec(&["a"], &[0, 1])).unwrap();
        assert!(c.push(rec(&["a"], &[0])).is_err());
        assert!(c.push(rec(&["a", "b"], &[0, 1])).is_err());
        assert!(c.push(rec(&["a"], &[0, 3])).is_err());
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn jsonl_round_trip() {
        let c = MessageCorpus::from_records(5, vec![rec(&["x", "y"], &[4, 0, 1]), rec(&["z", "y"], &[2, 2, 2])]).unwrap();
        let bytes = c.write_to(Vec::new()).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), r#"{"tuple":["x","y"],"tokens":[4,0,1]}"#);
        assert_eq!(MessageCorpus::read_from(5, bytes.as_slice()).unwrap(), c);
    }
}
