use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{Collective, FrequencyTable};
use crate::error::{Error, Result};

/// Strictly increasing checkpoint lengths `N₁ < … < N_K`, `K ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Schedule(Vec<u64>);

impl Schedule {
    pub fn new(checkpoints: Vec<u64>) -> Result<Self> {
        if checkpoints.len() < 2 {
            return Err(Error::BadSchedule(format!(
                "need at least 2 checkpoints, got {}",
                checkpoints.len()
            )));
        }
        if checkpoints[0] == 0 {
            return Err(Error::BadSchedule("checkpoints must be positive".into()));
        }
        if let Some(w) = checkpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::BadSchedule(format!(
                "not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Self(checkpoints))
    }

    /// `N_k = n0 · 2^k` for `k = 0..count`.
    pub fn geometric(n0: u64, count: u32) -> Result<Self> {
        Self::new((0..count).map(|k| n0 << k).collect())
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.0
    }

    pub fn last(&self) -> u64 {
        *self.0.last().unwrap()
    }

    /// Checkpoints not exceeding `n`, if at least two remain.
    pub fn truncated_to(&self, n: u64) -> Option<Self> {
        let kept: Vec<u64> = self.0.iter().copied().filter(|&k| k <= n).collect();
        Self::new(kept).ok()
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Self::geometric(1000, 8).unwrap()
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Accepts `geometric:N0:K` or an explicit comma-separated list.
impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("geometric:") {
            let (n0, k) = rest
                .split_once(':')
                .ok_or_else(|| Error::BadSchedule(format!("expected geometric:N0:K, got `{s}`")))?;
            let n0 = n0
                .trim()
                .parse()
                .map_err(|_| Error::BadSchedule(format!("bad N0 in `{s}`")))?;
            let k = k
                .trim()
                .parse()
                .map_err(|_| Error::BadSchedule(format!("bad K in `{s}`")))?;
            return Self::geometric(n0, k);
        }
        let v = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::BadSchedule(format!("bad checkpoint `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(v)
    }
}

/// Tolerance function `τ(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Tolerance {
    /// `c / √N`
    InverseSqrt(f64),
    Constant(f64),
}

impl Tolerance {
    pub fn at(&self, n: u64) -> f64 {
        match *self {
            Tolerance::InverseSqrt(c) => c / (n as f64).sqrt(),
            Tolerance::Constant(t) => t,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::InverseSqrt(5.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StabilizationStatus {
    Stabilized,
    NotStabilized,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelProbability {
    pub label: String,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Checkpoint {
    pub n: u64,
    pub frequencies: Vec<f64>,
}

/// The label and checkpoint pair that broke stabilization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub label: String,
    /// `ν_{N_k}` of the witness label at every checkpoint.
    pub frequencies: Vec<f64>,
    pub between: (u64, u64),
    pub deviation: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilizationVerdict {
    pub status: StabilizationStatus,
    pub probabilities: Option<Vec<LabelProbability>>,
    pub witness: Option<Witness>,
    pub checkpoints: Vec<Checkpoint>,
}

impl StabilizationVerdict {
    pub fn is_stabilized(&self) -> bool {
        self.status == StabilizationStatus::Stabilized
    }

    /// Frequencies at the last checkpoint, in label order.
    pub fn final_frequencies(&self) -> &[f64] {
        &self.checkpoints.last().unwrap().frequencies
    }
}

/// Stabilized iff `|ν_{N_k}(α) − ν_{N_{k+1}}(α)| ≤ τ(N_k)` for every label
/// and every consecutive checkpoint pair. Generator-backed collectives are
/// extended to `N_K` as needed.
pub fn stabilization_audit(
    c: &Collective,
    schedule: &Schedule,
    tolerance: Tolerance,
) -> Result<StabilizationVerdict> {
    let c = c.extended_to(schedule.last())?;
    let set = c.label_set().clone();
    let labels = c.labels();

    let mut running = FrequencyTable::empty(set.clone());
    let mut from = 0usize;
    let mut checkpoints = Vec::with_capacity(schedule.0.len());
    for &n in &schedule.0 {
        let seg = FrequencyTable::count_slice(set.clone(), &labels[from..n as usize]);
        running = running.merge(&seg)?;
        from = n as usize;
        checkpoints.push(Checkpoint {
            n,
            frequencies: running.frequencies(),
        });
    }

    let mut witness = None;
    'pairs: for w in checkpoints.windows(2) {
        let tau = tolerance.at(w[0].n);
        for l in set.labels() {
            let dev = (w[0].frequencies[l.index()] - w[1].frequencies[l.index()]).abs();
            if dev > tau {
                witness = Some(Witness {
                    label: set.name(l).to_string(),
                    frequencies: checkpoints
                        .iter()
                        .map(|cp| cp.frequencies[l.index()])
                        .collect(),
                    between: (w[0].n, w[1].n),
                    deviation: dev,
                    tolerance: tau,
                });
                break 'pairs;
            }
        }
    }

    let (status, probabilities) = match witness {
        Some(_) => (StabilizationStatus::NotStabilized, None),
        None => {
            let last = checkpoints.last().unwrap();
            let probs = set
                .labels()
                .map(|l| LabelProbability {
                    label: set.name(l).to_string(),
                    p: last.frequencies[l.index()],
                })
                .collect();
            (StabilizationStatus::Stabilized, Some(probs))
        }
    };
    Ok(StabilizationVerdict {
        status,
        probabilities,
        witness,
        checkpoints,
    })
}
