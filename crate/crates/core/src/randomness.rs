//! Place selections and the randomness audit.
//!
//! A place selection decides whether to keep position `j` by looking only at
//! `j` and the labels strictly before it. Admissibility is enforced by the
//! rule's signature: it is handed `&labels[..j]`, never the label at `j`.
//!
//! The audit fixes a finite family of selections and checks that every
//! selected subsequence of sufficient length stabilizes to the frequencies of
//! the mother sequence.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::collectives::{
    stabilization_audit, Collective, Label, LabelSet, Schedule, StabilizationVerdict, Tolerance,
};
use crate::error::{Error, Result};

type Rule = dyn Fn(usize, &[Label]) -> bool + Send + Sync;

/// Default minimum subsequence length for a meaningful verdict.
pub const DEFAULT_MIN_LENGTH: usize = 1000;

/// A named admissible selection rule. Positions are 1-based, matching the
/// usual notation; the rule sees `(j, past)` with `past.len() == j − 1`.
#[derive(Clone)]
pub struct PlaceSelection {
    name: String,
    rule: Arc<Rule>,
}

impl fmt::Debug for PlaceSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("PlaceSelection").field(&self.name).finish()
    }
}

impl PlaceSelection {
    pub fn new<F>(name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(usize, &[Label]) -> bool + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            rule: Arc::new(rule),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn select_all() -> Self {
        Self::new("all", |_, _| true)
    }

    /// Positions `offset, offset + step, offset + 2·step, …`.
    pub fn arithmetic(step: usize, offset: usize) -> Self {
        assert!(step >= 1 && offset >= 1, "step and offset are 1-based");
        Self::new(
            format!("arithmetic(step={step},offset={offset})"),
            move |j, _| j >= offset && (j - offset).is_multiple_of(step),
        )
    }

    /// Positions immediately following an occurrence of `word`.
    pub fn after_word(label_set: &LabelSet, word: &[&str]) -> Result<Self> {
        let pattern = label_set.subset(word)?;
        let name = format!("after_word({})", word.join(" "));
        Ok(Self::new(name, move |_, past| past.ends_with(&pattern)))
    }

    /// Every position after the first `n`.
    pub fn skip_first(n: usize) -> Self {
        Self::new(format!("skip_first({n})"), move |j, _| j > n)
    }

    /// `(j, past)` decision; `past` is exactly the labels before position `j`.
    pub fn decide(&self, j: usize, past: &[Label]) -> bool {
        debug_assert_eq!(past.len() + 1, j);
        (self.rule)(j, past)
    }

    /// 1-based positions selected within the first `n` labels.
    pub fn positions(&self, labels: &[Label], n: usize) -> Vec<usize> {
        (1..=n)
            .filter(|&j| self.decide(j, &labels[..j - 1]))
            .collect()
    }
}

/// Selection described by kind + parameters, as written in config files:
/// `arithmetic(step=2,offset=1)`, `after_word(word=a)`, `skip_first(n=100)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SelectionSpec {
    Arithmetic { step: usize, offset: usize },
    AfterWord { word: Vec<String> },
    SkipFirst { n: usize },
}

impl SelectionSpec {
    pub fn build(&self, label_set: &LabelSet) -> Result<PlaceSelection> {
        Ok(match self {
            SelectionSpec::Arithmetic { step, offset } => {
                PlaceSelection::arithmetic(*step, *offset)
            }
            SelectionSpec::AfterWord { word } => {
                let w: Vec<&str> = word.iter().map(String::as_str).collect();
                PlaceSelection::after_word(label_set, &w)?
            }
            SelectionSpec::SkipFirst { n } => PlaceSelection::skip_first(*n),
        })
    }

    /// The three built-ins: even positions, after the first label, skip 100.
    pub fn builtin_family(first_label: &str) -> Vec<SelectionSpec> {
        vec![
            SelectionSpec::Arithmetic { step: 2, offset: 2 },
            SelectionSpec::AfterWord {
                word: vec![first_label.to_string()],
            },
            SelectionSpec::SkipFirst { n: 100 },
        ]
    }

    /// Parses a `;`-separated family.
    pub fn parse_family(s: &str) -> Result<Vec<SelectionSpec>> {
        s.split(';')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for SelectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionSpec::Arithmetic { step, offset } => {
                write!(f, "arithmetic(step={step},offset={offset})")
            }
            SelectionSpec::AfterWord { word } => write!(f, "after_word(word={})", word.join(" ")),
            SelectionSpec::SkipFirst { n } => write!(f, "skip_first(n={n})"),
        }
    }
}

impl FromStr for SelectionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad selection `{s}`"));
        let s = s.trim();
        let (kind, rest) = s.split_once('(').ok_or_else(bad)?;
        let body = rest.strip_suffix(')').ok_or_else(bad)?;
        let mut params = std::collections::BTreeMap::new();
        for kv in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            params.insert(k.trim(), v.trim().trim_matches('"'));
        }
        let num = |key: &str| -> Result<usize> {
            params
                .get(key)
                .ok_or_else(|| Error::Parse(format!("selection `{s}` is missing `{key}`")))?
                .parse()
                .map_err(|_| {
                    Error::Parse(format!(
                        "selection `{s}`: `{key}` is not a positive integer"
                    ))
                })
        };
        let spec = match kind.trim() {
            "arithmetic" => SelectionSpec::Arithmetic {
                step: num("step")?,
                offset: num("offset")?,
            },
            "after_word" => SelectionSpec::AfterWord {
                word: params
                    .get("word")
                    .ok_or_else(bad)?
                    .split_whitespace()
                    .map(String::from)
                    .collect(),
            },
            "skip_first" => SelectionSpec::SkipFirst { n: num("n")? },
            other => return Err(Error::Parse(format!("unknown selection kind `{other}`"))),
        };
        match &spec {
            SelectionSpec::Arithmetic { step, offset } if *step == 0 || *offset == 0 => Err(bad()),
            SelectionSpec::AfterWord { word } if word.is_empty() => Err(bad()),
            _ => Ok(spec),
        }
    }
}

/// Subsequence of the first `n` labels at the positions `s` selects.
pub fn apply_selection(c: &Collective, s: &PlaceSelection, n: usize) -> Result<Collective> {
    c.check_len(n as u64)?;
    let labels = c.labels();
    let picked: Vec<Label> = s
        .positions(labels, n)
        .into_iter()
        .map(|j| labels[j - 1])
        .collect();
    if picked.is_empty() {
        return Err(Error::EmptySelection(s.name().to_string()));
    }
    Collective::from_labels(c.label_set().clone(), picked)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SelectionOutcome {
    Pass,
    Fail,
    InsufficientData,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionReport {
    pub name: String,
    pub selected_length: usize,
    pub outcome: SelectionOutcome,
    pub stabilization: Option<StabilizationVerdict>,
    /// `max_α |ν_sub(α) − ν_mother(α)|` at the final checkpoints.
    pub max_deviation: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RandomnessStatus {
    RandomnessPass,
    RandomnessFail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomnessVerdict {
    pub status: RandomnessStatus,
    pub mother: StabilizationVerdict,
    pub per_selection: Vec<SelectionReport>,
}

impl RandomnessVerdict {
    pub fn passed(&self) -> bool {
        self.status == RandomnessStatus::RandomnessPass
    }
}

#[derive(Clone, Debug)]
pub struct RandomnessConfig {
    pub schedule: Schedule,
    pub tolerance: Tolerance,
    pub min_length: usize,
}

impl Default for RandomnessConfig {
    fn default() -> Self {
        Self {
            schedule: Schedule::default(),
            tolerance: Tolerance::default(),
            min_length: DEFAULT_MIN_LENGTH,
        }
    }
}

/// Audits the realized prefix (extended to the schedule's last checkpoint if
/// generator-backed) against every selection in `family`.
pub fn randomness_audit(
    c: &Collective,
    family: &[PlaceSelection],
    config: &RandomnessConfig,
) -> Result<RandomnessVerdict> {
    let c = c.extended_to(config.schedule.last())?;
    let mother = stabilization_audit(&c, &config.schedule, config.tolerance)?;
    let mother_freq = mother.final_frequencies().to_vec();
    let n = c.len();

    let per_selection = family
        .par_iter()
        .map(|s| audit_one(&c, s, n, &mother, &mother_freq, config))
        .collect::<Result<Vec<_>>>()?;

    let status = if per_selection
        .iter()
        .any(|r| r.outcome == SelectionOutcome::Fail)
    {
        RandomnessStatus::RandomnessFail
    } else {
        RandomnessStatus::RandomnessPass
    };
    Ok(RandomnessVerdict {
        status,
        mother,
        per_selection,
    })
}

fn audit_one(
    c: &Collective,
    s: &PlaceSelection,
    n: usize,
    mother: &StabilizationVerdict,
    mother_freq: &[f64],
    config: &RandomnessConfig,
) -> Result<SelectionReport> {
    let insufficient = |len| SelectionReport {
        name: s.name().to_string(),
        selected_length: len,
        outcome: SelectionOutcome::InsufficientData,
        stabilization: None,
        max_deviation: None,
        tolerance: None,
    };
    let sub = match apply_selection(c, s, n) {
        Ok(sub) => sub,
        Err(Error::EmptySelection(_)) => return Ok(insufficient(0)),
        Err(e) => return Err(e),
    };
    let len = sub.len();
    let schedule = match config.schedule.truncated_to(len as u64) {
        Some(sch) if len >= config.min_length => sch,
        _ => return Ok(insufficient(len)),
    };
    let verdict = stabilization_audit(&sub, &schedule, config.tolerance)?;
    let final_n = schedule.last();
    let tau = config.tolerance.at(final_n);
    let dev = verdict
        .final_frequencies()
        .iter()
        .zip(mother_freq)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let fail = if verdict.is_stabilized() {
        dev > tau
    } else {
        mother.is_stabilized()
    };
    Ok(SelectionReport {
        name: s.name().to_string(),
        selected_length: len,
        outcome: if fail {
            SelectionOutcome::Fail
        } else {
            SelectionOutcome::Pass
        },
        stabilization: Some(verdict),
        max_deviation: Some(dev),
        tolerance: Some(tau),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collectives::{Categorical, Constant, Generator, Periodic};

    fn names(c: &Collective) -> Vec<&str> {
        c.names().collect()
    }

    #[test]
    fn even_positions() {
        let c = Collective::parse_inline("a,b,a,b").unwrap();
        let s = PlaceSelection::arithmetic(2, 2);
        assert_eq!(names(&apply_selection(&c, &s, 4).unwrap()), ["b", "b"]);
    }

    #[test]
    fn after_a_is_hand_checkable() {
        let c = Collective::parse_inline("a,a,b,a,b").unwrap();
        let s = PlaceSelection::after_word(c.label_set(), &["a"]).unwrap();
        assert_eq!(s.positions(c.labels(), 5), [2, 3, 5]);
        assert_eq!(names(&apply_selection(&c, &s, 5).unwrap()), ["a", "b", "b"]);
    }

    #[test]
    fn empty_selection_is_flagged() {
        let c = Collective::parse_inline("b,b,b").unwrap();
        let set = Arc::new(LabelSet::new(["a", "b"]).unwrap());
        let c = Collective::from_labels(set.clone(), c.labels().iter().map(|_| Label(1)).collect())
            .unwrap();
        let s = PlaceSelection::after_word(&set, &["a"]).unwrap();
        assert!(matches!(
            apply_selection(&c, &s, 3),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn rule_never_sees_current_label() {
        let c = Collective::parse_inline("a,b,c,a,b,c").unwrap();
        let s = PlaceSelection::new("probe", |j, past| {
            assert_eq!(past.len(), j - 1);
            true
        });
        assert_eq!(apply_selection(&c, &s, 6).unwrap(), c);
    }

    #[test]
    fn spec_strings() {
        let fam = SelectionSpec::parse_family(
            "arithmetic(step=2,offset=1); after_word(word=a); skip_first(n=100)",
        )
        .unwrap();
        assert_eq!(fam[0], SelectionSpec::Arithmetic { step: 2, offset: 1 });
        assert_eq!(
            fam[1],
            SelectionSpec::AfterWord {
                word: vec!["a".into()]
            }
        );
        assert_eq!(fam[2], SelectionSpec::SkipFirst { n: 100 });
        for f in &fam {
            assert_eq!(&f.to_string().parse::<SelectionSpec>().unwrap(), f);
        }
        assert!("arithmetic(step=0,offset=1)"
            .parse::<SelectionSpec>()
            .is_err());
        assert!("random(p=1)".parse::<SelectionSpec>().is_err());
        assert!("skip_first(k=3)".parse::<SelectionSpec>().is_err());
    }

    #[test]
    fn iid_after_a_keeps_half() {
        let set = Arc::new(LabelSet::new(["a", "b"]).unwrap());
        let g: Arc<dyn Generator> = Arc::new(Categorical::uniform(2));
        let c = Collective::generate(set.clone(), g, 11, 100_000).unwrap();
        let s = PlaceSelection::after_word(&set, &["a"]).unwrap();
        let sub = apply_selection(&c, &s, 100_000).unwrap();
        // direct count over the mother sequence
        let labels = c.labels();
        let (mut n, mut a) = (0usize, 0usize);
        for j in 1..labels.len() {
            if labels[j - 1] == Label(0) {
                n += 1;
                a += (labels[j] == Label(0)) as usize;
            }
        }
        assert_eq!(sub.len(), n);
        let nu = a as f64 / n as f64;
        let direct = sub.labels().iter().filter(|l| **l == Label(0)).count();
        assert_eq!(direct, a);
        assert!((nu - 0.5).abs() <= 5.0 / (n as f64).sqrt());
    }

    fn periodic_ab() -> Collective {
        let set = Arc::new(LabelSet::new(["a", "b"]).unwrap());
        Collective::generate(set, Arc::new(Periodic(vec![Label(0), Label(1)])), 0, 0).unwrap()
    }

    #[test]
    fn periodic_fails_two_phase_family_for_every_tau_below_half() {
        let family = [
            PlaceSelection::arithmetic(2, 1),
            PlaceSelection::arithmetic(2, 2),
        ];
        for tau in [0.0, 0.1, 0.25, 0.4999] {
            let cfg = RandomnessConfig {
                tolerance: Tolerance::Constant(tau),
                ..Default::default()
            };
            let v = randomness_audit(&periodic_ab(), &family, &cfg).unwrap();
            assert!(!v.passed(), "tau {tau}");
            for r in &v.per_selection {
                assert_eq!(r.max_deviation, Some(0.5));
                assert_eq!(r.outcome, SelectionOutcome::Fail);
            }
        }
        let cfg = RandomnessConfig {
            tolerance: Tolerance::Constant(0.5),
            ..Default::default()
        };
        assert!(randomness_audit(&periodic_ab(), &family, &cfg)
            .unwrap()
            .passed());
    }

    #[test]
    fn constant_passes_any_family() {
        let set = Arc::new(LabelSet::new(["a", "b"]).unwrap());
        let c = Collective::generate(set.clone(), Arc::new(Constant(Label(0))), 0, 0).unwrap();
        let family: Vec<PlaceSelection> = SelectionSpec::builtin_family("a")
            .iter()
            .map(|s| s.build(&set).unwrap())
            .chain([
                PlaceSelection::arithmetic(3, 2),
                PlaceSelection::after_word(&set, &["b"]).unwrap(),
            ])
            .collect();
        let v = randomness_audit(&c, &family, &RandomnessConfig::default()).unwrap();
        assert!(v.passed());
        // after "b" never fires on a constant-a sequence
        assert_eq!(
            v.per_selection[4].outcome,
            SelectionOutcome::InsufficientData
        );
    }

    #[test]
    fn iid_uniform_passes_builtins() {
        let set = Arc::new(LabelSet::new(["a", "b"]).unwrap());
        let g: Arc<dyn Generator> = Arc::new(Categorical::uniform(2));
        let c = Collective::generate(set.clone(), g, 3, 0).unwrap();
        let family: Vec<_> = SelectionSpec::builtin_family("a")
            .iter()
            .map(|s| s.build(&set).unwrap())
            .collect();
        let v = randomness_audit(&c, &family, &RandomnessConfig::default()).unwrap();
        assert!(v.passed(), "{:?}", v.per_selection);
        assert!(v
            .per_selection
            .iter()
            .all(|r| r.outcome == SelectionOutcome::Pass));
    }
}
