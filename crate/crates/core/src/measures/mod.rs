//! Finite probability measures over hidden-variable configurations.
//!
//! On a finite space the measure-theoretic notions reduce to support
//! arithmetic: `P ≪ Q` iff `supp P ⊆ supp Q`, equivalence iff the supports
//! coincide, singularity iff they are disjoint. Masses are exact rationals
//! by default; `f64` masses are accepted with a zero threshold of `1e-12`.
//!
//! Infinite-dimensional spaces (where equivalence/singularity dichotomies
//! for Gaussian families live) are out of scope.

mod csv;
mod scheme;

use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Sub};
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use csv::{measure_from_csv, measure_to_csv, tables_from_csv, tables_to_csv};
pub use scheme::{
    build_singular_resolution, ghz_pointwise_identity, induced_space, induced_tables,
    kolmogorov_contradiction, product_event, ContradictionReport, IdentityReport, ObservableTable,
    ResolutionReport, SingularResolution,
};

/// Exact masses.
pub type Rational = Ratio<i128>;

/// Zero threshold for `f64` masses.
pub const F64_EPSILON: f64 = 1e-12;

/// Scalar a measure can be built from.
pub trait Mass:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
{
    fn is_null(&self) -> bool;
    fn is_unit(&self) -> bool;
    fn to_f64(&self) -> f64;
    fn render(&self) -> String;
    fn parse(s: &str) -> Result<Self>;
    fn serialize_mass<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error>;
}

impl Mass for Rational {
    fn is_null(&self) -> bool {
        self.is_zero()
    }

    fn is_unit(&self) -> bool {
        self.is_one()
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn parse(s: &str) -> Result<Self> {
        s.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational mass `{s}`")))
    }

    fn serialize_mass<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Mass for f64 {
    fn is_null(&self) -> bool {
        self.abs() < F64_EPSILON
    }

    fn is_unit(&self) -> bool {
        (self - 1.0).abs() <= F64_EPSILON
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn parse(s: &str) -> Result<Self> {
        s.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad mass `{s}`")))
    }

    fn serialize_mass<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(*self)
    }
}

pub(crate) fn ser_mass<M: Mass, S: Serializer>(m: &M, s: S) -> Result<S::Ok, S::Error> {
    m.serialize_mass(s)
}

pub(crate) fn ser_masses<M: Mass, S: Serializer>(ms: &[M], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct One<'a, M>(&'a M);
    impl<M: Mass> Serialize for One<'_, M> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            self.0.serialize_mass(s)
        }
    }
    let mut seq = s.serialize_seq(Some(ms.len()))?;
    for m in ms {
        seq.serialize_element(&One(m))?;
    }
    seq.end()
}

/// Configuration `ω = (λ, λ¹, λ², λ³)`: source variable plus one hidden
/// variable per measuring device.
pub type Configuration = [u32; 4];

/// Finite ordered set of distinct configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiddenSpace {
    atoms: Vec<Configuration>,
}

impl HiddenSpace {
    pub fn new(atoms: Vec<Configuration>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure(
                "hidden space must not be empty".into(),
            ));
        }
        let mut sorted = atoms.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMeasure("duplicate configuration".into()));
        }
        Ok(Self { atoms })
    }

    /// `Λ × Λ¹ × Λ² × Λ³` with the given cardinalities.
    pub fn product(sizes: [u32; 4]) -> Result<Self> {
        let mut atoms = Vec::new();
        for l in 0..sizes[0] {
            for d1 in 0..sizes[1] {
                for d2 in 0..sizes[2] {
                    for d3 in 0..sizes[3] {
                        atoms.push([l, d1, d2, d3]);
                    }
                }
            }
        }
        Self::new(atoms)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Configuration] {
        &self.atoms
    }

    /// `λ:λ¹:λ²:λ³`
    pub fn atom_id(&self, i: usize) -> String {
        let [a, b, c, d] = self.atoms[i];
        format!("{a}:{b}:{c}:{d}")
    }

    pub fn parse_atom_id(id: &str) -> Result<Configuration> {
        let parts: Vec<u32> = id
            .trim()
            .split(':')
            .map(|p| {
                p.parse()
                    .map_err(|_| Error::Parse(format!("bad atom id `{id}`")))
            })
            .collect::<Result<_>>()?;
        parts
            .try_into()
            .map_err(|_| Error::Parse(format!("atom id `{id}` needs four components")))
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        let cfg = Self::parse_atom_id(id)?;
        self.atoms
            .iter()
            .position(|a| *a == cfg)
            .ok_or_else(|| Error::Parse(format!("atom `{id}` is not in the space")))
    }
}

/// Set of atom indices.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct EventSet(Vec<usize>);

impl EventSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn full(space: &HiddenSpace) -> Self {
        Self((0..space.len()).collect())
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self(
            mask.iter()
                .enumerate()
                .filter(|(_, m)| **m)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.0.binary_search(&atom).is_ok()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .copied()
                .filter(|a| other.contains(*a))
                .collect(),
        )
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn complement(&self, space: &HiddenSpace) -> Self {
        Self((0..space.len()).filter(|a| !self.contains(*a)).collect())
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.iter().all(|a| other.contains(*a))
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection(other).is_empty()
    }

    fn check(&self, space: &HiddenSpace) -> Result<()> {
        match self.0.last() {
            Some(&a) if a >= space.len() => Err(Error::UnknownAtom(a)),
            _ => Ok(()),
        }
    }
}

/// Probability table over a [`HiddenSpace`].
#[derive(Clone, PartialEq)]
pub struct FiniteMeasure<M = Rational> {
    space: Arc<HiddenSpace>,
    mass: Vec<M>,
}

impl<M: Mass> Debug for FiniteMeasure<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.mass.iter().map(Mass::render).collect();
        f.debug_struct("FiniteMeasure").field("mass", &m).finish()
    }
}

impl<M: Mass> FiniteMeasure<M> {
    /// Masses must be non-negative and sum to one.
    pub fn new(space: Arc<HiddenSpace>, mass: Vec<M>) -> Result<Self> {
        if mass.len() != space.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} masses for {} atoms",
                mass.len(),
                space.len()
            )));
        }
        if let Some(i) = mass.iter().position(|m| *m < M::zero()) {
            return Err(Error::InvalidMeasure(format!("negative mass at atom {i}")));
        }
        let total = mass.iter().cloned().fold(M::zero(), |a, b| a + b);
        if !total.is_unit() {
            return Err(Error::InvalidMeasure(format!(
                "masses sum to {}",
                total.render()
            )));
        }
        Ok(Self { space, mass })
    }

    /// Point mass at `atom`.
    pub fn point(space: Arc<HiddenSpace>, atom: usize) -> Result<Self> {
        if atom >= space.len() {
            return Err(Error::UnknownAtom(atom));
        }
        let mut mass = vec![M::zero(); space.len()];
        mass[atom] = M::one();
        Self::new(space, mass)
    }

    /// Uniform on the atoms of `event` (which must be non-empty).
    pub fn uniform_on(space: Arc<HiddenSpace>, event: &EventSet) -> Result<Self> {
        event.check(&space)?;
        if event.is_empty() {
            return Err(Error::InvalidMeasure("uniform on an empty event".into()));
        }
        let k = (0..event.len()).fold(M::zero(), |a, _| a + M::one());
        let w = M::one() / k;
        let mut mass = vec![M::zero(); space.len()];
        for &a in event.members() {
            mass[a] = w.clone();
        }
        Self::new(space, mass)
    }

    pub fn uniform(space: Arc<HiddenSpace>) -> Result<Self> {
        let all = EventSet::full(&space);
        Self::uniform_on(space, &all)
    }

    pub fn space(&self) -> &Arc<HiddenSpace> {
        &self.space
    }

    pub fn masses(&self) -> &[M] {
        &self.mass
    }

    pub fn mass(&self, atom: usize) -> &M {
        &self.mass[atom]
    }

    pub fn support(&self) -> EventSet {
        EventSet(
            (0..self.mass.len())
                .filter(|&i| !self.mass[i].is_null())
                .collect(),
        )
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// `P(E) = Σ_{ω∈E} mass(ω)`.
pub fn event_probability<M: Mass>(p: &FiniteMeasure<M>, e: &EventSet) -> Result<M> {
    e.check(&p.space)?;
    Ok(e.members()
        .iter()
        .fold(M::zero(), |acc, &a| acc + p.mass[a].clone()))
}

/// `P ≪ Q`: every `Q`-null atom is `P`-null.
pub fn is_absolutely_continuous<M: Mass>(
    p: &FiniteMeasure<M>,
    q: &FiniteMeasure<M>,
) -> Result<bool> {
    p.same_space(q)?;
    Ok(p.support().is_subset(&q.support()))
}

/// `P(E) = 0 ⇔ Q(E) = 0` for every event.
pub fn is_equivalent<M: Mass>(p: &FiniteMeasure<M>, q: &FiniteMeasure<M>) -> Result<bool> {
    Ok(is_absolutely_continuous(p, q)? && is_absolutely_continuous(q, p)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Singularity {
    pub singular: bool,
    /// `supp Q`: the candidate event with `Q(E) = 1`.
    pub witness: EventSet,
}

/// `P ⊥ Q` in the one-sided form: some `E` has `Q(E) = 1` and `P(E) = 0`.
/// On a finite space `E = supp Q` is the only candidate that matters.
pub fn is_singular<M: Mass>(p: &FiniteMeasure<M>, q: &FiniteMeasure<M>) -> Result<Singularity> {
    p.same_space(q)?;
    let e = q.support();
    let singular = event_probability(q, &e)?.is_unit() && event_probability(p, &e)?.is_null();
    Ok(Singularity {
        singular,
        witness: e,
    })
}

/// `dP/dQ` on a finite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Density<M = Rational> {
    values: Vec<M>,
}

impl<M: Mass> Density<M> {
    pub fn values(&self) -> &[M] {
        &self.values
    }

    /// `Σ_{ω∈E} f(ω)·Q(ω)`.
    pub fn integrate(&self, q: &FiniteMeasure<M>, e: &EventSet) -> Result<M> {
        e.check(&q.space)?;
        Ok(e.members().iter().fold(M::zero(), |acc, &a| {
            acc + self.values[a].clone() * q.mass[a].clone()
        }))
    }
}

/// `f(ω) = P(ω)/Q(ω)` on `supp Q`, zero elsewhere.
pub fn radon_nikodym<M: Mass>(p: &FiniteMeasure<M>, q: &FiniteMeasure<M>) -> Result<Density<M>> {
    p.same_space(q)?;
    let values = p
        .mass
        .iter()
        .zip(&q.mass)
        .enumerate()
        .map(|(i, (pm, qm))| {
            if qm.is_null() {
                if pm.is_null() {
                    Ok(M::zero())
                } else {
                    Err(Error::NoDensity(i))
                }
            } else {
                Ok(pm.clone() / qm.clone())
            }
        })
        .collect::<Result<_>>()?;
    Ok(Density { values })
}
