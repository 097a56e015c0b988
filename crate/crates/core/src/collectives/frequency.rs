use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;

use super::{Label, LabelSet, CHUNK};
use crate::error::{Error, Result};

/// Mergeable label counts `n_N(α)` with total `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    label_set: Arc<LabelSet>,
    counts: Vec<u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn empty(label_set: Arc<LabelSet>) -> Self {
        let counts = vec![0; label_set.len()];
        Self {
            label_set,
            counts,
            total: 0,
        }
    }

    /// Chunk-parallel count; chunks are merged with the commutative
    /// [`merge`](Self::merge), so the result does not depend on scheduling.
    pub fn count_slice(label_set: Arc<LabelSet>, labels: &[Label]) -> Self {
        let m = label_set.len();
        let counts = labels
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut c = vec![0u64; m];
                for l in chunk {
                    c[l.index()] += 1;
                }
                c
            })
            .reduce(
                || vec![0u64; m],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        Self {
            label_set,
            counts,
            total: labels.len() as u64,
        }
    }

    pub fn push(&mut self, label: Label) {
        self.counts[label.index()] += 1;
        self.total += 1;
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.label_set != other.label_set {
            return Err(Error::LabelSetMismatch);
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            label_set: self.label_set.clone(),
            counts,
            total: self.total + other.total,
        })
    }

    pub fn label_set(&self) -> &Arc<LabelSet> {
        &self.label_set
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, label: Label) -> u64 {
        self.counts[label.index()]
    }

    pub fn count_of(&self, name: &str) -> Result<u64> {
        Ok(self.count(self.label_set.get(name)?))
    }

    /// `ν_N(α)`; zero on an empty table.
    pub fn frequency(&self, label: Label) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.counts[label.index()] as f64 / self.total as f64
        }
    }

    pub fn frequency_exact(&self, label: Label) -> Result<Ratio<u64>> {
        if self.total == 0 {
            return Err(Error::EmptyPrefix);
        }
        Ok(Ratio::new(self.counts[label.index()], self.total))
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.label_set.labels().map(|l| self.frequency(l)).collect()
    }

    /// `label,count,frequency` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,count,frequency\n");
        for l in self.label_set.labels() {
            let _ = writeln!(
                out,
                "{},{},{}",
                self.label_set.name(l),
                self.count(l),
                self.frequency(l)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "label,count,frequency" => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header `label,count,frequency`, got {other:?}"
                )))
            }
        }
        let mut names = Vec::new();
        let mut counts = Vec::new();
        for line in lines {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("bad row `{line}`")));
            }
            names.push(cols[0].to_string());
            counts.push(
                cols[1]
                    .trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("count in `{line}`: {e}")))?,
            );
        }
        let label_set = Arc::new(LabelSet::new(names)?);
        let total = counts.iter().sum();
        Ok(Self {
            label_set,
            counts,
            total,
        })
    }
}
