use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{argmax, Matrix};

/// Vocabulary size `|V|` and fixed message length `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub size: usize,
    pub length: usize,
}

impl Vocabulary {
    pub fn new(size: usize, length: usize) -> Result<Self> {
        let v = Vocabulary { size, length };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::config(format!("vocabulary needs at least 2 tokens, got {}", self.size)));
        }
        if self.length < 1 {
            return Err(Error::config("message length must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageMode {
    /// Relaxed Gumbel-Softmax rows.
    Soft,
    /// One-hot rows.
    Hard,
}

/// `L × |V|` matrix of per-position token distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct Message {
    rows: Matrix,
    mode: MessageMode,
}

impl Message {
    pub(crate) fn new(rows: Matrix, mode: MessageMode) -> Self {
        Message { rows, mode }
    }

    pub fn from_tokens(tokens: &[usize], vocab_size: usize) -> Result<Self> {
        let mut rows = Matrix::zeros(tokens.len(), vocab_size);
        for (pos, &t) in tokens.iter().enumerate() {
            if t >= vocab_size {
                return Err(Error::structural(format!("token {t} outside vocabulary of {vocab_size}")));
            }
            rows[(pos, t)] = 1.0;
        }
        Ok(Message::new(rows, MessageMode::Hard))
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn mode(&self) -> MessageMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.rows.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.rows() == 0
    }

    pub fn vocab_size(&self) -> usize {
        self.rows.cols()
    }

    /// Most probable token per position (exact token ids for hard messages).
    pub fn tokens(&self) -> Vec<usize> {
        (0..self.len()).map(|r| argmax(self.rows.row(r))).collect()
    }
}
