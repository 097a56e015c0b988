use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use super::{Basis, Constraint, Pattern};
use crate::collectives::{Categorical, Collective, Label, LabelSet};
use crate::error::{Error, Result};

/// Normalization and parity tolerance.
pub const NORM_EPSILON: f64 = 1e-12;

/// Pure three-qubit state, amplitude index `4·s₁ + 2·s₂ + s₃`.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleState {
    amplitudes: [Complex64; 8],
}

impl TripleState {
    /// Not checked here; every measurement checks normalization.
    pub fn new(amplitudes: [Complex64; 8]) -> Self {
        Self { amplitudes }
    }

    /// `(|000⟩ + i|111⟩)/√2`.
    pub fn default_ghz() -> Self {
        let mut a = [Complex64::new(0.0, 0.0); 8];
        a[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        a[7] = Complex64::new(0.0, FRAC_1_SQRT_2);
        Self::new(a)
    }

    /// `|000⟩`.
    pub fn product_000() -> Self {
        let mut a = [Complex64::new(0.0, 0.0); 8];
        a[0] = Complex64::new(1.0, 0.0);
        Self::new(a)
    }

    pub fn amplitudes(&self) -> &[Complex64; 8] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_EPSILON {
            Err(Error::NotNormalized(n))
        } else {
            Ok(())
        }
    }
}

impl Default for TripleState {
    fn default() -> Self {
        Self::default_ghz()
    }
}

/// Phase triple `(φ₁, φ₂, φ₃)` in radians.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Setting {
    pub phases: [f64; 3],
}

impl Setting {
    pub const S1: Setting = Setting::new([FRAC_PI_2, 0.0, 0.0]);
    pub const S2: Setting = Setting::new([0.0, FRAC_PI_2, 0.0]);
    pub const S3: Setting = Setting::new([0.0, 0.0, FRAC_PI_2]);
    pub const S4: Setting = Setting::new([FRAC_PI_2, FRAC_PI_2, FRAC_PI_2]);
    pub const CANONICAL: [Setting; 4] = [Self::S1, Self::S2, Self::S3, Self::S4];

    pub const fn new(phases: [f64; 3]) -> Self {
        Self { phases }
    }

    /// The x/y pattern if every phase is `0` or `π/2` (within `1e-12`).
    pub fn pattern(&self) -> Result<Pattern> {
        let basis = |phi: f64| {
            if phi.abs() <= NORM_EPSILON {
                Some(Basis::X)
            } else if (phi - FRAC_PI_2).abs() <= NORM_EPSILON {
                Some(Basis::Y)
            } else {
                None
            }
        };
        match self.phases.map(basis) {
            [Some(a), Some(b), Some(c)] => Ok([a, b, c]),
            _ => Err(Error::NonCanonicalSetting(self.phases)),
        }
    }

    /// "Product of outcomes at this setting equals `sign`".
    pub fn constraint(&self, sign: i8) -> Result<Constraint> {
        Ok(Constraint::new(self.pattern()?, sign))
    }
}

/// `(π/2,0,0)`; phases other than `0` and `π/2` print as plain radians.
impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |phi: f64| {
            if phi.abs() <= NORM_EPSILON {
                "0".to_string()
            } else if (phi - FRAC_PI_2).abs() <= NORM_EPSILON {
                "π/2".to_string()
            } else {
                phi.to_string()
            }
        };
        let [a, b, c] = self.phases.map(show);
        write!(f, "({a},{b},{c})")
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    /// Three comma-separated radians; `pi/2` and `pi` are accepted.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| -> Result<f64> {
            let t = t.trim();
            match t {
                "pi/2" | "π/2" => Ok(FRAC_PI_2),
                "pi" | "π" => Ok(std::f64::consts::PI),
                _ => t
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad phase `{t}`"))),
            }
        };
        let parts: Vec<f64> = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(',')
            .map(parse)
            .collect::<Result<_>>()?;
        let phases: [f64; 3] = parts
            .try_into()
            .map_err(|_| Error::Parse(format!("setting `{s}` needs three phases")))?;
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parse(format!(
                "setting `{s}` has a non-finite phase"
            )));
        }
        Ok(Setting::new(phases))
    }
}

/// `(a, b, c)`, each ±1. Index bit `2−j` set means photon `j` gave `−1`, so
/// index order is `+++, ++-, …, ---`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct OutcomeTriple(pub [i8; 3]);

impl OutcomeTriple {
    pub fn from_index(i: usize) -> Self {
        assert!(i < 8);
        Self(std::array::from_fn(|j| {
            if i >> (2 - j) & 1 == 1 {
                -1
            } else {
                1
            }
        }))
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .fold(0, |acc, v| (acc << 1) | usize::from(*v == -1))
    }

    pub fn product(&self) -> i8 {
        self.0.iter().product()
    }

    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|v| if *v == 1 { '+' } else { '-' })
            .collect()
    }

    pub fn parse(label: &str) -> Result<Self> {
        let v: Vec<i8> = label
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::UnknownLabel(label.to_string())),
            })
            .collect::<Result<_>>()?;
        v.try_into()
            .map(Self)
            .map_err(|_| Error::UnknownLabel(label.to_string()))
    }
}

/// The eight outcome labels in index order.
pub fn outcome_labels() -> Arc<LabelSet> {
    static SET: OnceLock<Arc<LabelSet>> = OnceLock::new();
    SET.get_or_init(|| {
        Arc::new(LabelSet::new((0..8).map(|i| OutcomeTriple::from_index(i).label())).unwrap())
    })
    .clone()
}

/// `⟨ψ| σ(φ₁)⊗σ(φ₂)⊗σ(φ₃) |ψ⟩`, using `σ(φ)|0⟩ = e^{iφ}|1⟩` and
/// `σ(φ)|1⟩ = e^{−iφ}|0⟩`.
pub fn correlation(state: &TripleState, s: &Setting) -> Result<f64> {
    state.check()?;
    let psi = &state.amplitudes;
    let mut acc = Complex64::new(0.0, 0.0);
    for (idx, amp) in psi.iter().enumerate() {
        // σ flips every bit and picks up e^{±iφ}
        let phase: f64 = (0..3)
            .map(|j| {
                let bit = idx >> (2 - j) & 1;
                if bit == 0 {
                    s.phases[j]
                } else {
                    -s.phases[j]
                }
            })
            .sum();
        acc += psi[idx ^ 7].conj() * Complex64::from_polar(1.0, phase) * amp;
    }
    Ok(acc.re)
}

/// Born probabilities of the eight outcomes in index order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub setting: Setting,
    pub probabilities: [f64; 8],
}

impl OutcomeDistribution {
    pub fn probability(&self, o: OutcomeTriple) -> f64 {
        self.probabilities[o.index()]
    }

    /// Total mass on outcomes whose product is `sign`.
    pub fn parity_mass(&self, sign: i8) -> f64 {
        (0..8)
            .filter(|&i| OutcomeTriple::from_index(i).product() == sign)
            .map(|i| self.probabilities[i])
            .sum()
    }

    /// `Σ (abc)·p`.
    pub fn mean_product(&self) -> f64 {
        (0..8)
            .map(|i| f64::from(OutcomeTriple::from_index(i).product()) * self.probabilities[i])
            .sum()
    }

    /// `P(photon j gives value)`.
    pub fn marginal(&self, photon: usize, value: i8) -> f64 {
        (0..8)
            .filter(|&i| OutcomeTriple::from_index(i).0[photon] == value)
            .map(|i| self.probabilities[i])
            .sum()
    }
}

/// `σ(φ)` eigenvector for outcome `s`: `(|0⟩ + s·e^{iφ}|1⟩)/√2`.
fn eigenvector(phi: f64, s: i8) -> [Complex64; 2] {
    [
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::from_polar(FRAC_1_SQRT_2 * f64::from(s), phi),
    ]
}

pub fn outcome_distribution(state: &TripleState, s: &Setting) -> Result<OutcomeDistribution> {
    state.check()?;
    let mut probabilities = [0.0; 8];
    for (o, p) in probabilities.iter_mut().enumerate() {
        let out = OutcomeTriple::from_index(o);
        let e: [[Complex64; 2]; 3] = std::array::from_fn(|j| eigenvector(s.phases[j], out.0[j]));
        let mut amp = Complex64::new(0.0, 0.0);
        for (idx, a) in state.amplitudes.iter().enumerate() {
            let bra = e[0][idx >> 2 & 1].conj() * e[1][idx >> 1 & 1].conj() * e[2][idx & 1].conj();
            amp += bra * a;
        }
        *p = amp.norm_sqr();
    }
    Ok(OutcomeDistribution {
        setting: *s,
        probabilities,
    })
}

/// `N` i.i.d. outcome triples over [`outcome_labels`], inverse CDF in
/// index order.
pub fn sample_setting_collective(
    state: &TripleState,
    s: &Setting,
    n: u64,
    seed: u64,
) -> Result<Collective> {
    let dist = outcome_distribution(state, s)?;
    Collective::generate(
        outcome_labels(),
        Arc::new(Categorical::new(&dist.probabilities)),
        seed,
        n,
    )
}

/// One photon's `+`/`−` stream out of a sampled outcome collective.
pub fn photon_stream(c: &Collective, photon: usize) -> Result<Collective> {
    assert!(photon < 3, "photon index is 0, 1 or 2");
    let set = Arc::new(LabelSet::new(["+", "-"])?);
    let labels = c
        .labels()
        .iter()
        .map(|l| Label(l.0 >> (2 - photon) & 1))
        .collect();
    Collective::from_labels(set, labels)
}

/// Empirical `Σ (abc)/N` of an outcome collective.
pub fn mean_product(c: &Collective) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    let s: i64 = c
        .labels()
        .iter()
        .map(|l| i64::from(OutcomeTriple::from_index(l.index()).product()))
        .sum();
    s as f64 / c.len() as f64
}
