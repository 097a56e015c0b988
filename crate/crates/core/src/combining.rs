//! The calculus of collectives: pairing two sequences position by position,
//! reading off conditional frequencies `ν_N(b/a; z) = n_N(b/a; z) / n_N(a; z)`,
//! and deciding combinability and independence.
//!
//! Pairing makes no probabilistic claim. The pair becomes a collective only
//! if every derived subsequence `y(a)` (the `y`-labels at positions where
//! `x = a`) stabilizes.

use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::collectives::{
    stabilization_audit, Collective, Label, LabelProbability, LabelSet, Schedule,
    StabilizationVerdict, Tolerance,
};
use crate::error::{Error, Result};
use crate::randomness::DEFAULT_MIN_LENGTH;

/// `z = (z_j)`, `z_j = (x_j, y_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedCollective {
    x_labels: Arc<LabelSet>,
    y_labels: Arc<LabelSet>,
    pairs: Vec<(Label, Label)>,
}

impl PairedCollective {
    pub fn x_labels(&self) -> &Arc<LabelSet> {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &Arc<LabelSet> {
        &self.y_labels
    }

    pub fn pairs(&self) -> &[(Label, Label)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn x(&self) -> Collective {
        Collective::from_labels(
            self.x_labels.clone(),
            self.pairs.iter().map(|p| p.0).collect(),
        )
        .expect("components are validated at pairing")
    }

    pub fn y(&self) -> Collective {
        Collective::from_labels(
            self.y_labels.clone(),
            self.pairs.iter().map(|p| p.1).collect(),
        )
        .expect("components are validated at pairing")
    }

    /// The same pairs read in the `(y, x)` direction.
    pub fn swapped(&self) -> Self {
        Self {
            x_labels: self.y_labels.clone(),
            y_labels: self.x_labels.clone(),
            pairs: self.pairs.iter().map(|&(a, b)| (b, a)).collect(),
        }
    }
}

pub fn pair(x: &Collective, y: &Collective) -> Result<PairedCollective> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    Ok(PairedCollective {
        x_labels: x.label_set().clone(),
        y_labels: y.label_set().clone(),
        pairs: x
            .labels()
            .iter()
            .copied()
            .zip(y.labels().iter().copied())
            .collect(),
    })
}

/// `y(a)`: the `y`-components at positions where `x_j = a`, order preserved.
pub fn derived_subsequence(z: &PairedCollective, a: &str) -> Result<Collective> {
    let a_label = z.x_labels.get(a)?;
    let ys: Vec<Label> = z
        .pairs
        .iter()
        .filter(|p| p.0 == a_label)
        .map(|p| p.1)
        .collect();
    if ys.is_empty() {
        return Err(Error::EmptySelection(format!("y({a})")));
    }
    Collective::from_labels(z.y_labels.clone(), ys)
}

/// Joint counts `n_N(a, b)` over the first `N` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointTable {
    x_labels: Arc<LabelSet>,
    y_labels: Arc<LabelSet>,
    counts: Vec<u64>,
    total: u64,
}

impl JointTable {
    fn idx(&self, a: Label, b: Label) -> usize {
        a.index() * self.y_labels.len() + b.index()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, a: Label, b: Label) -> u64 {
        self.counts[self.idx(a, b)]
    }

    /// `n_N(a; z)`.
    pub fn count_x(&self, a: Label) -> u64 {
        self.y_labels.labels().map(|b| self.count(a, b)).sum()
    }

    pub fn count_y(&self, b: Label) -> u64 {
        self.x_labels.labels().map(|a| self.count(a, b)).sum()
    }

    /// `ν_N(a, b; z)` as an exact ratio.
    pub fn joint_exact(&self, a: Label, b: Label) -> Result<Ratio<u64>> {
        if self.total == 0 {
            return Err(Error::EmptyPrefix);
        }
        Ok(Ratio::new(self.count(a, b), self.total))
    }

    /// `ν_N(a; x)` as an exact ratio.
    pub fn marginal_x_exact(&self, a: Label) -> Result<Ratio<u64>> {
        if self.total == 0 {
            return Err(Error::EmptyPrefix);
        }
        Ok(Ratio::new(self.count_x(a), self.total))
    }

    /// `ν_N(b/a; z)` as an exact ratio.
    pub fn conditional_exact(&self, b: Label, a: Label) -> Result<Ratio<u64>> {
        let na = self.count_x(a);
        if na == 0 {
            return Err(Error::ConditionUndefined(self.x_labels.name(a).to_string()));
        }
        Ok(Ratio::new(self.count(a, b), na))
    }

    pub fn joint(&self, a: Label, b: Label) -> f64 {
        self.count(a, b) as f64 / self.total as f64
    }

    pub fn conditional(&self, b: Label, a: Label) -> Option<f64> {
        let na = self.count_x(a);
        (na > 0).then(|| self.count(a, b) as f64 / na as f64)
    }

    /// Rows `a,b,count,p` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,count,p\n");
        for a in self.x_labels.labels() {
            for b in self.y_labels.labels() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    self.x_labels.name(a),
                    self.y_labels.name(b),
                    self.count(a, b),
                    if self.total == 0 {
                        0.0
                    } else {
                        self.joint(a, b)
                    }
                );
            }
        }
        out
    }
}

pub fn joint_table(z: &PairedCollective, n: usize) -> Result<JointTable> {
    if n > z.len() {
        return Err(Error::PrefixTooShort {
            requested: n as u64,
            available: z.len() as u64,
        });
    }
    let my = z.y_labels.len();
    let cells = z.x_labels.len() * my;
    let counts = z.pairs[..n]
        .par_chunks(crate::collectives::CHUNK)
        .map(|chunk| {
            let mut c = vec![0u64; cells];
            for (a, b) in chunk {
                c[a.index() * my + b.index()] += 1;
            }
            c
        })
        .reduce(
            || vec![0u64; cells],
            |mut acc, c| {
                acc.iter_mut().zip(c).for_each(|(x, y)| *x += y);
                acc
            },
        );
    Ok(JointTable {
        x_labels: z.x_labels.clone(),
        y_labels: z.y_labels.clone(),
        counts,
        total: n as u64,
    })
}

/// `ν_N(b/a; z)` over the first `n` pairs.
pub fn conditional_frequency(z: &PairedCollective, b: &str, a: &str, n: usize) -> Result<f64> {
    let (a, b) = (z.x_labels.get(a)?, z.y_labels.get(b)?);
    let r = joint_table(z, n)?.conditional_exact(b, a)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

#[derive(Clone, Debug)]
pub struct CombiningConfig {
    pub schedule: Schedule,
    pub tolerance: Tolerance,
    /// `y(a)` is audited only when `n(a)` reaches this length.
    pub min_length: usize,
}

impl Default for CombiningConfig {
    fn default() -> Self {
        Self {
            schedule: Schedule::default(),
            tolerance: Tolerance::default(),
            min_length: DEFAULT_MIN_LENGTH,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CombinabilityStatus {
    Combinable,
    NotCombinable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalReport {
    pub a: String,
    pub n_a: u64,
    /// `None` when `n(a)` is below the minimum length.
    pub verdict: Option<StabilizationVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointEntry {
    pub a: String,
    pub b: String,
    pub count: u64,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombinabilityVerdict {
    pub status: CombinabilityStatus,
    pub x_verdict: StabilizationVerdict,
    pub conditional: Vec<ConditionalReport>,
    pub marginal_x: Vec<LabelProbability>,
    /// `p(a, b; z)`, present when combinable.
    pub joint: Option<Vec<JointEntry>>,
    /// `max |p(a,b;z) − p(a;x)·p(b/a;z)|`, present when combinable.
    pub product_rule_residual: Option<f64>,
    pub joint_tolerance: f64,
    /// `"x"` or the label `a` whose `y(a)` failed to stabilize.
    pub witness: Option<String>,
}

impl CombinabilityVerdict {
    pub fn is_combinable(&self) -> bool {
        self.status == CombinabilityStatus::Combinable
    }
}

fn schedule_for(schedule: &Schedule, len: usize) -> Option<Schedule> {
    schedule.truncated_to(len as u64)
}

pub fn combinability_audit(
    z: &PairedCollective,
    config: &CombiningConfig,
) -> Result<CombinabilityVerdict> {
    let n = z.len();
    let x_schedule = schedule_for(&config.schedule, n).ok_or_else(|| {
        Error::BadSchedule(format!(
            "fewer than two checkpoints fit in {n} pairs ({})",
            config.schedule
        ))
    })?;
    let x_verdict = stabilization_audit(&z.x(), &x_schedule, config.tolerance)?;
    let table = joint_table(z, n)?;

    let conditional = z
        .x_labels
        .labels()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&a| {
            let name = z.x_labels.name(a).to_string();
            let n_a = table.count_x(a);
            let schedule = schedule_for(&config.schedule, n_a as usize);
            let verdict = match schedule {
                Some(s) if n_a as usize >= config.min_length => {
                    let ya = derived_subsequence(z, &name)?;
                    Some(stabilization_audit(&ya, &s, config.tolerance)?)
                }
                _ => None,
            };
            Ok(ConditionalReport {
                a: name,
                n_a,
                verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let witness = if !x_verdict.is_stabilized() {
        Some("x".to_string())
    } else {
        conditional
            .iter()
            .find(|r| r.verdict.as_ref().is_some_and(|v| !v.is_stabilized()))
            .map(|r| r.a.clone())
    };

    let marginal_x = z
        .x_labels
        .labels()
        .map(|a| LabelProbability {
            label: z.x_labels.name(a).to_string(),
            p: table.count_x(a) as f64 / n as f64,
        })
        .collect();
    let joint_tolerance = config.tolerance.at(n as u64);

    let (status, joint, residual) = if witness.is_some() {
        (CombinabilityStatus::NotCombinable, None, None)
    } else {
        let mut entries = Vec::new();
        let mut residual = 0.0f64;
        for a in z.x_labels.labels() {
            let pa = table.count_x(a) as f64 / n as f64;
            for b in z.y_labels.labels() {
                let pab = table.joint(a, b);
                if let Some(pba) = table.conditional(b, a) {
                    residual = residual.max((pab - pa * pba).abs());
                }
                entries.push(JointEntry {
                    a: z.x_labels.name(a).to_string(),
                    b: z.y_labels.name(b).to_string(),
                    count: table.count(a, b),
                    p: pab,
                });
            }
        }
        let status = if residual <= joint_tolerance {
            CombinabilityStatus::Combinable
        } else {
            CombinabilityStatus::NotCombinable
        };
        (status, Some(entries), Some(residual))
    };

    Ok(CombinabilityVerdict {
        status,
        x_verdict,
        conditional,
        marginal_x,
        joint,
        product_rule_residual: residual,
        joint_tolerance,
        witness,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IndependenceStatus {
    Independent,
    Dependent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceVerdict {
    pub status: IndependenceStatus,
    /// `max_{a,b} |ν(b/a; z) − ν(b; y)|` over labels `a` that occur.
    pub max_deviation: f64,
    pub tolerance: f64,
    /// `max_{a,b} |p(a,b) − p(a)·p(b)|`.
    pub factorization_deviation: f64,
}

impl IndependenceVerdict {
    pub fn is_independent(&self) -> bool {
        self.status == IndependenceStatus::Independent
    }
}

/// Independent iff every `y(a)` distribution agrees with `y`'s within
/// `τ(min_a n(a))`.
pub fn independence_audit(
    z: &PairedCollective,
    config: &CombiningConfig,
) -> Result<IndependenceVerdict> {
    if !combinability_audit(z, config)?.is_combinable() {
        return Err(Error::NotCombinable);
    }
    Ok(independence_from_table(
        &joint_table(z, z.len())?,
        config.tolerance,
    ))
}

pub(crate) fn independence_from_table(
    table: &JointTable,
    tolerance: Tolerance,
) -> IndependenceVerdict {
    let n = table.total as f64;
    let mut max_dev = 0.0f64;
    let mut fact_dev = 0.0f64;
    let mut min_na = u64::MAX;
    for a in table.x_labels.labels() {
        let na = table.count_x(a);
        for b in table.y_labels.labels() {
            let pb = table.count_y(b) as f64 / n;
            if let Some(pba) = table.conditional(b, a) {
                max_dev = max_dev.max((pba - pb).abs());
            }
            fact_dev = fact_dev.max((table.joint(a, b) - (na as f64 / n) * pb).abs());
        }
        if na > 0 {
            min_na = min_na.min(na);
        }
    }
    let tau = tolerance.at(min_na);
    IndependenceVerdict {
        status: if max_dev <= tau {
            IndependenceStatus::Independent
        } else {
            IndependenceStatus::Dependent
        },
        max_deviation: max_dev,
        tolerance: tau,
        factorization_deviation: fact_dev,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collectives::{Categorical, FnGenerator, Generator, Oscillating};

    fn inline(s: &str) -> Collective {
        Collective::parse_inline(s).unwrap()
    }

    fn uniform(labels: &[&str], seed: u64, n: u64) -> Collective {
        let set = Arc::new(LabelSet::new(labels.iter().copied()).unwrap());
        let g: Arc<dyn Generator> = Arc::new(Categorical::uniform(labels.len()));
        Collective::generate(set, g, seed, n).unwrap()
    }

    #[test]
    fn pairing_positionwise() {
        let z = pair(&inline("a,b"), &inline("u,v")).unwrap();
        let named: Vec<(&str, &str)> = z
            .pairs()
            .iter()
            .map(|(a, b)| (z.x_labels().name(*a), z.y_labels().name(*b)))
            .collect();
        assert_eq!(named, [("a", "u"), ("b", "v")]);
        let zz = pair(&inline("a,b"), &inline("a,b")).unwrap();
        assert_eq!(zz.pairs(), [(Label(0), Label(0)), (Label(1), Label(1))]);
        assert_eq!(
            pair(&inline("a,a,a,a,a"), &inline("a,a,a,a,a,a")),
            Err(Error::LengthMismatch(5, 6))
        );
    }

    #[test]
    fn derived_subsequence_small() {
        let z = pair(&inline("a,b,a"), &inline("u,v,w")).unwrap();
        let ya = derived_subsequence(&z, "a").unwrap();
        assert_eq!(ya.names().collect::<Vec<_>>(), ["u", "w"]);

        let x =
            Collective::from_names(Arc::new(LabelSet::new(["a", "b"]).unwrap()), &["b"]).unwrap();
        let z = pair(&x, &inline("v")).unwrap();
        assert!(matches!(
            derived_subsequence(&z, "a"),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn derived_subsequence_of_independent_streams() {
        let x = uniform(&["a", "b"], 101, 100_000);
        let y = uniform(&["u", "v"], 202, 100_000);
        let z = pair(&x, &y).unwrap();
        let ya = derived_subsequence(&z, "a").unwrap();
        // direct count over the same streams
        let n_a = x.labels().iter().filter(|l| **l == Label(0)).count();
        let n_au = x
            .labels()
            .iter()
            .zip(y.labels())
            .filter(|(a, b)| **a == Label(0) && **b == Label(0))
            .count();
        assert_eq!(ya.len(), n_a);
        let nu_ya = ya.labels().iter().filter(|l| **l == Label(0)).count() as f64 / n_a as f64;
        assert_eq!(nu_ya, n_au as f64 / n_a as f64);
        let nu_y = y.labels().iter().filter(|l| **l == Label(0)).count() as f64 / 1e5;
        assert!((nu_ya - nu_y).abs() <= 5.0 / (n_a as f64).sqrt());
    }

    #[test]
    fn conditional_frequency_small() {
        let z = pair(&inline("a,a,a"), &inline("u,u,v")).unwrap();
        assert!((conditional_frequency(&z, "u", "a", 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let x =
            Collective::from_names(Arc::new(LabelSet::new(["a", "b"]).unwrap()), &["a"]).unwrap();
        let z = pair(&x, &inline("u")).unwrap();
        assert_eq!(
            conditional_frequency(&z, "u", "b", 1),
            Err(Error::ConditionUndefined("b".into()))
        );
    }

    #[test]
    fn functional_dependence_gives_certainty() {
        let x = uniform(&["a", "b", "c"], 4, 5000);
        let map = ["p", "q", "r"];
        let names: Vec<&str> = x.labels().iter().map(|l| map[l.index()]).collect();
        let y = Collective::from_names(Arc::new(LabelSet::new(map).unwrap()), &names).unwrap();
        let z = pair(&x, &y).unwrap();
        for (a, b) in [("a", "p"), ("b", "q"), ("c", "r")] {
            assert_eq!(conditional_frequency(&z, b, a, 5000).unwrap(), 1.0);
        }
    }

    #[test]
    fn exact_decomposition_and_normalization() {
        let z = pair(
            &uniform(&["a", "b", "c"], 1, 3000),
            &uniform(&["u", "v"], 2, 3000),
        )
        .unwrap();
        for n in [1usize, 2, 17, 999, 3000] {
            let t = joint_table(&z, n).unwrap();
            let mut grand = Ratio::new(0u64, 1);
            for a in z.x_labels().labels() {
                let mut row = Ratio::new(0u64, 1);
                for b in z.y_labels().labels() {
                    grand += t.joint_exact(a, b).unwrap();
                    if let Ok(c) = t.conditional_exact(b, a) {
                        row += c;
                        assert_eq!(
                            t.joint_exact(a, b).unwrap(),
                            c * t.marginal_x_exact(a).unwrap()
                        );
                    }
                }
                if t.count_x(a) > 0 {
                    assert_eq!(row, Ratio::from_integer(1));
                }
            }
            assert_eq!(grand, Ratio::from_integer(1));
        }
    }

    #[test]
    fn relabeling_is_combinable_and_dependent() {
        let x = uniform(&["a", "b"], 8, 100_000);
        let names: Vec<&str> = x
            .names()
            .map(|n| if n == "a" { "u" } else { "v" })
            .collect();
        let y =
            Collective::from_names(Arc::new(LabelSet::new(["u", "v"]).unwrap()), &names).unwrap();
        let z = pair(&x, &y).unwrap();
        let v = combinability_audit(&z, &CombiningConfig::default()).unwrap();
        assert!(v.is_combinable());
        assert_eq!(v.product_rule_residual, Some(0.0));
        let joint = v.joint.unwrap();
        assert_eq!(joint.iter().filter(|e| e.count > 0).count(), 2);
        assert!(joint
            .iter()
            .all(|e| (e.a == "a") == (e.b == "u") || e.count == 0));

        let ind = independence_audit(&z, &CombiningConfig::default()).unwrap();
        assert_eq!(ind.status, IndependenceStatus::Dependent);
        assert!((ind.max_deviation - 0.5).abs() < 0.01);
    }

    #[test]
    fn oscillating_feed_is_not_combinable() {
        let set_x = Arc::new(LabelSet::new(["a", "b"]).unwrap());
        let set_y = Arc::new(LabelSet::new(["u", "v"]).unwrap());
        let x = uniform(&["a", "b"], 5, 300_000);
        // y(a) from an i.i.d. stream, y(b) from the oscillating generator
        let iid = Categorical::uniform(2);
        let osc = Oscillating::new(2);
        let mut seen_b = 0u64;
        let ys: Vec<Label> = x
            .labels()
            .iter()
            .enumerate()
            .map(|(j, l)| {
                if *l == Label(0) {
                    iid.label_at(55, j as u64)
                } else {
                    seen_b += 1;
                    osc.label_at(0, seen_b - 1)
                }
            })
            .collect();
        let y = Collective::from_labels(set_y.clone(), ys).unwrap();
        let z = pair(
            &Collective::from_labels(set_x, x.labels().to_vec()).unwrap(),
            &y,
        )
        .unwrap();
        let cfg = CombiningConfig::default();
        let v = combinability_audit(&z, &cfg).unwrap();
        assert_eq!(v.status, CombinabilityStatus::NotCombinable);
        assert_eq!(v.witness.as_deref(), Some("b"));

        // oracle: the explicit subsequence audited on its own
        let yb = derived_subsequence(&z, "b").unwrap();
        let direct = Collective::generate(set_y, Arc::new(osc), 0, yb.len() as u64).unwrap();
        assert_eq!(yb, direct);
        let s = cfg.schedule.truncated_to(yb.len() as u64).unwrap();
        assert!(!stabilization_audit(&direct, &s, cfg.tolerance)
            .unwrap()
            .is_stabilized());
        assert!(matches!(
            independence_audit(&z, &cfg),
            Err(Error::NotCombinable)
        ));
    }

    #[test]
    fn independent_streams_combine_with_product_table() {
        let z = pair(
            &uniform(&["a", "b"], 31, 100_000),
            &uniform(&["u", "v", "w"], 32, 100_000),
        )
        .unwrap();
        let cfg = CombiningConfig::default();
        let v = combinability_audit(&z, &cfg).unwrap();
        assert!(v.is_combinable());
        let t = joint_table(&z, z.len()).unwrap();
        let bound = 5.0 / (1e5f64).sqrt();
        for a in z.x_labels().labels() {
            for b in z.y_labels().labels() {
                let prod = t.count_x(a) as f64 / 1e5 * (t.count_y(b) as f64 / 1e5);
                assert!((t.joint(a, b) - prod).abs() <= bound);
            }
        }
        let ind = independence_audit(&z, &cfg).unwrap();
        assert!(ind.is_independent());
        assert!(ind.max_deviation <= 5.0 / (50_000f64 * 0.98).sqrt());

        // (y → x) direction agrees
        assert!(combinability_audit(&z.swapped(), &cfg)
            .unwrap()
            .is_combinable());
    }

    #[test]
    fn constant_y_is_independent() {
        let x = uniform(&["a", "b"], 3, 4000);
        let set = Arc::new(LabelSet::new(["u", "v"]).unwrap());
        let y = Collective::generate(set, Arc::new(FnGenerator(|_, _| Label(0))), 0, 4000).unwrap();
        let z = pair(&x, &y).unwrap();
        let cfg = CombiningConfig {
            schedule: Schedule::geometric(500, 3).unwrap(),
            ..Default::default()
        };
        let v = independence_audit(&z, &cfg).unwrap();
        assert!(v.is_independent());
        assert_eq!(v.max_deviation, 0.0);
    }

    #[test]
    fn joint_csv_header() {
        let z = pair(&inline("a,b,a"), &inline("u,u,v")).unwrap();
        let csv = joint_table(&z, 3).unwrap().to_csv();
        assert!(csv.starts_with("a,b,count,p\na,u,1,"));
        assert_eq!(csv.lines().count(), 5);
    }
}
