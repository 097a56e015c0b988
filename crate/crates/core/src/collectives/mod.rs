//! Label sequences, relative frequencies and the statistical-stabilization
//! audit.
//!
//! A [`Collective`] is the realized finite prefix of a label sequence
//! `x = (α₁, α₂, …)`. It may carry a [`Generator`] — a pure function of
//! `(seed, index)` — so that longer prefixes can be produced on demand,
//! chunk by chunk and in any order, with bit-identical results.
//!
//! Probabilities are never primitive here: they are read off a sequence as
//! relative frequencies `ν_N(α) = n_N(α) / N`, and a finite checkpoint
//! schedule decides whether those frequencies have settled.

mod frequency;
mod generators;
mod stabilization;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub use frequency::FrequencyTable;
pub use generators::{Categorical, Constant, FnGenerator, Generator, Oscillating, Periodic};
pub use stabilization::{
    stabilization_audit, Checkpoint, LabelProbability, Schedule, StabilizationStatus,
    StabilizationVerdict, Tolerance, Witness,
};

/// Chunk length used when materializing or counting in parallel.
pub(crate) const CHUNK: usize = 1 << 14;

/// Index of a label inside its [`LabelSet`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u32);

impl Label {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Finite ordered set of distinct symbolic labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet {
    names: Vec<String>,
    index: HashMap<String, Label>,
}

impl LabelSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::EmptyLabelSet);
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() || name.contains([',', '\n', '\r']) {
                return Err(Error::InvalidLabel(name.clone()));
            }
            if index.insert(name.clone(), Label(i as u32)).is_some() {
                return Err(Error::DuplicateLabel(name.clone()));
            }
        }
        Ok(Self { names, index })
    }

    /// `{1, …, m}` as decimal labels.
    pub fn numeric(m: usize) -> Result<Self> {
        Self::new((1..=m).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Result<Label> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn name(&self, label: Label) -> &str {
        &self.names[label.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.names.len() as u32).map(Label)
    }

    pub fn contains(&self, label: Label) -> bool {
        label.index() < self.names.len()
    }

    /// Resolves a subset given by name, rejecting unknown names.
    pub fn subset(&self, names: &[&str]) -> Result<Vec<Label>> {
        names.iter().map(|n| self.get(n)).collect()
    }
}

#[derive(Clone)]
struct Source {
    generator: Arc<dyn Generator>,
    seed: u64,
}

/// Realized prefix of a label sequence, optionally backed by a generator.
#[derive(Clone)]
pub struct Collective {
    label_set: Arc<LabelSet>,
    prefix: Arc<Vec<Label>>,
    source: Option<Source>,
}

impl fmt::Debug for Collective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Collective")
            .field("labels", &self.label_set.names)
            .field("len", &self.prefix.len())
            .field("generated", &self.source.is_some())
            .finish()
    }
}

impl PartialEq for Collective {
    fn eq(&self, other: &Self) -> bool {
        self.label_set == other.label_set && self.prefix == other.prefix
    }
}

impl Collective {
    pub fn from_labels(label_set: Arc<LabelSet>, prefix: Vec<Label>) -> Result<Self> {
        if let Some(bad) = prefix.iter().find(|l| !label_set.contains(**l)) {
            return Err(Error::UnknownLabel(format!("#{}", bad.0)));
        }
        Ok(Self {
            label_set,
            prefix: Arc::new(prefix),
            source: None,
        })
    }

    pub fn from_names(label_set: Arc<LabelSet>, names: &[&str]) -> Result<Self> {
        let prefix = label_set.subset(names)?;
        Self::from_labels(label_set, prefix)
    }

    /// Convenience for hand-written sequences: `"a,b,a"` with the label set
    /// taken in order of first appearance.
    pub fn parse_inline(text: &str) -> Result<Self> {
        let names: Vec<&str> = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        let mut distinct: Vec<&str> = Vec::new();
        for n in &names {
            if !distinct.contains(n) {
                distinct.push(n);
            }
        }
        let set = Arc::new(LabelSet::new(distinct.iter().copied())?);
        Self::from_names(set, &names)
    }

    /// Materializes the first `n` labels of `generator` under `seed`.
    pub fn generate(
        label_set: Arc<LabelSet>,
        generator: Arc<dyn Generator>,
        seed: u64,
        n: u64,
    ) -> Result<Self> {
        let prefix = materialize(&*generator, seed, 0, n as usize);
        let mut c = Self::from_labels(label_set, prefix)?;
        c.source = Some(Source { generator, seed });
        Ok(c)
    }

    pub fn label_set(&self) -> &Arc<LabelSet> {
        &self.label_set
    }

    pub fn labels(&self) -> &[Label] {
        &self.prefix
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn is_generated(&self) -> bool {
        self.source.is_some()
    }

    pub fn seed(&self) -> Option<u64> {
        self.source.as_ref().map(|s| s.seed)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.prefix.iter().map(|l| self.label_set.name(*l))
    }

    /// Returns a collective with at least `n` realized labels, generating the
    /// missing tail when a generator is attached.
    pub fn extended_to(&self, n: u64) -> Result<Self> {
        let have = self.prefix.len();
        if n as usize <= have {
            return Ok(self.clone());
        }
        let Some(source) = &self.source else {
            return Err(Error::PrefixTooShort {
                requested: n,
                available: have as u64,
            });
        };
        let tail = materialize(
            &*source.generator,
            source.seed,
            have as u64,
            n as usize - have,
        );
        if let Some(bad) = tail.iter().find(|l| !self.label_set.contains(**l)) {
            return Err(Error::UnknownLabel(format!("#{}", bad.0)));
        }
        let mut prefix = Vec::with_capacity(n as usize);
        prefix.extend_from_slice(&self.prefix);
        prefix.extend(tail);
        Ok(Self {
            label_set: self.label_set.clone(),
            prefix: Arc::new(prefix),
            source: self.source.clone(),
        })
    }

    /// First `n` labels (no generator attached to the result).
    pub fn truncated(&self, n: usize) -> Result<Self> {
        self.check_len(n as u64)?;
        Ok(Self {
            label_set: self.label_set.clone(),
            prefix: Arc::new(self.prefix[..n].to_vec()),
            source: None,
        })
    }

    pub(crate) fn check_len(&self, n: u64) -> Result<()> {
        if n as usize > self.prefix.len() {
            return Err(Error::PrefixTooShort {
                requested: n,
                available: self.prefix.len() as u64,
            });
        }
        Ok(())
    }
}

pub(crate) fn materialize(
    generator: &dyn Generator,
    seed: u64,
    start: u64,
    n: usize,
) -> Vec<Label> {
    let mut out = vec![Label(0); n];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(i, chunk)| {
            generator.fill(seed, start + (i * CHUNK) as u64, chunk);
        });
    out
}

/// `ν_N(α ∈ B)` for the first `n` labels.
pub fn relative_frequency(c: &Collective, subset: &[&str], n: u64) -> Result<f64> {
    let r = relative_frequency_exact(c, subset, n)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// Exact rational form of [`relative_frequency`]; additive over disjoint
/// subsets without rounding.
pub fn relative_frequency_exact(c: &Collective, subset: &[&str], n: u64) -> Result<Ratio<u64>> {
    let labels = c.label_set.subset(subset)?;
    if n == 0 {
        return Err(Error::EmptyPrefix);
    }
    let table = frequency_table(c, n)?;
    let mut seen = vec![false; c.label_set.len()];
    let mut hits = 0;
    for l in labels {
        if !std::mem::replace(&mut seen[l.index()], true) {
            hits += table.count(l);
        }
    }
    Ok(Ratio::new(hits, n))
}

/// Counts of the first `n` labels.
pub fn frequency_table(c: &Collective, n: u64) -> Result<FrequencyTable> {
    c.check_len(n)?;
    Ok(FrequencyTable::count_slice(
        c.label_set.clone(),
        &c.prefix[..n as usize],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_set_rejects_duplicates_and_empty() {
        assert_eq!(
            LabelSet::new(Vec::<String>::new()),
            Err(Error::EmptyLabelSet)
        );
        assert_eq!(
            LabelSet::new(["a", "b", "a"]),
            Err(Error::DuplicateLabel("a".into()))
        );
        assert!(matches!(
            LabelSet::new(["a,b"]),
            Err(Error::InvalidLabel(_))
        ));
        assert_eq!(LabelSet::numeric(3).unwrap().names(), ["1", "2", "3"]);
    }

    #[test]
    fn alternation_has_half_frequency() {
        let c = Collective::parse_inline("a,b,a,b,a,b").unwrap();
        assert_eq!(relative_frequency(&c, &["a"], 6).unwrap(), 0.5);
        assert_eq!(relative_frequency(&c, &["a", "b"], 6).unwrap(), 1.0);
    }

    #[test]
    fn relative_frequency_errors() {
        let c = Collective::parse_inline("a,b").unwrap();
        assert_eq!(relative_frequency(&c, &["a"], 0), Err(Error::EmptyPrefix));
        assert_eq!(
            relative_frequency(&c, &["z"], 2),
            Err(Error::UnknownLabel("z".into()))
        );
        assert!(matches!(
            relative_frequency(&c, &["a"], 3),
            Err(Error::PrefixTooShort { .. })
        ));
    }

    #[test]
    fn frequency_table_small_cases() {
        let c = Collective::parse_inline("a,a,b").unwrap();
        let t = frequency_table(&c, 3).unwrap();
        assert_eq!(t.count_of("a").unwrap(), 2);
        assert_eq!(t.count_of("b").unwrap(), 1);
        assert_eq!(t.total(), 3);
        let empty = frequency_table(&c, 0).unwrap();
        assert_eq!(empty.total(), 0);
        assert!(empty.counts().iter().all(|&k| k == 0));
    }

    #[test]
    fn extension_matches_direct_generation() {
        let set = Arc::new(LabelSet::new(["a", "b", "c"]).unwrap());
        let g: Arc<dyn Generator> = Arc::new(Categorical::uniform(3));
        let short = Collective::generate(set.clone(), g.clone(), 9, 1000).unwrap();
        let long = Collective::generate(set, g, 9, 50_000).unwrap();
        let ext = short.extended_to(50_000).unwrap();
        assert_eq!(ext, long);
        assert!(Collective::parse_inline("a")
            .unwrap()
            .extended_to(2)
            .is_err());
    }
}
