//! Deterministic local assignments and their exhaustive search.
//!
//! A strategy fixes the ±1 outcome of every photon for both phase choices
//! (`φ = 0`, the x-type observable, and `φ = π/2`, the y-type observable):
//! six values, 64 strategies in all. A constraint asks that the product of
//! the three outcomes selected by a setting pattern equal a given sign.

use std::fmt;

use serde::{Serialize, Serializer};

/// Which observable a photon's device measures.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Basis {
    /// `φ = 0`
    X,
    /// `φ = π/2`
    Y,
}

impl Basis {
    pub fn phase(self) -> f64 {
        match self {
            Basis::X => 0.0,
            Basis::Y => std::f64::consts::FRAC_PI_2,
        }
    }
}

/// Per-photon bases of one setting, e.g. `(Y, X, X)` for `(π/2, 0, 0)`.
pub type Pattern = [Basis; 3];

/// The four GHZ settings `(π/2,0,0)`, `(0,π/2,0)`, `(0,0,π/2)`,
/// `(π/2,π/2,π/2)`.
pub const CANONICAL_PATTERNS: [Pattern; 4] = [
    [Basis::Y, Basis::X, Basis::X],
    [Basis::X, Basis::Y, Basis::X],
    [Basis::X, Basis::X, Basis::Y],
    [Basis::Y, Basis::Y, Basis::Y],
];

/// Certain product values of the four canonical settings.
pub const CANONICAL_SIGNS: [i8; 4] = [1, 1, 1, -1];

/// Six ±1 values `A_x, A_y, B_x, B_y, C_x, C_y`.
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct LhvStrategy {
    values: [[i8; 2]; 3],
}

impl LhvStrategy {
    pub const COUNT: usize = 64;

    /// `values[photon][basis]`, each ±1.
    pub fn new(values: [[i8; 2]; 3]) -> Self {
        assert!(
            values.iter().flatten().all(|v| *v == 1 || *v == -1),
            "strategy values must be ±1"
        );
        Self { values }
    }

    /// Bit `2·photon + basis` set means −1.
    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT);
        let mut values = [[1i8; 2]; 3];
        for (p, pv) in values.iter_mut().enumerate() {
            for (b, v) in pv.iter_mut().enumerate() {
                if index >> (2 * p + b) & 1 == 1 {
                    *v = -1;
                }
            }
        }
        Self { values }
    }

    pub fn index(&self) -> usize {
        let mut i = 0;
        for (p, pv) in self.values.iter().enumerate() {
            for (b, v) in pv.iter().enumerate() {
                if *v == -1 {
                    i |= 1 << (2 * p + b);
                }
            }
        }
        i
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (0..Self::COUNT).map(Self::from_index)
    }

    pub fn value(&self, photon: usize, basis: Basis) -> i8 {
        self.values[photon][basis as usize]
    }

    pub fn outcomes(&self, pattern: &Pattern) -> [i8; 3] {
        [
            self.value(0, pattern[0]),
            self.value(1, pattern[1]),
            self.value(2, pattern[2]),
        ]
    }

    pub fn product(&self, pattern: &Pattern) -> i8 {
        self.outcomes(pattern).iter().product()
    }
}

impl fmt::Debug for LhvStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LhvStrategy({self})")
    }
}

/// `Ax Ay Bx By Cx Cy` as signs, e.g. `+-++-+`.
impl fmt::Display for LhvStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in self.values.iter().flatten() {
            f.write_str(if *v == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl Serialize for LhvStrategy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LhvStrategy", 6)?;
        st.serialize_field("A_x", &self.values[0][0])?;
        st.serialize_field("A_y", &self.values[0][1])?;
        st.serialize_field("B_x", &self.values[1][0])?;
        st.serialize_field("B_y", &self.values[1][1])?;
        st.serialize_field("C_x", &self.values[2][0])?;
        st.serialize_field("C_y", &self.values[2][1])?;
        st.end()
    }
}

/// "The product of outcomes under `pattern` equals `sign`".
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub pattern: Pattern,
    pub sign: i8,
}

impl Constraint {
    pub fn new(pattern: Pattern, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1, "sign must be ±1");
        Self { pattern, sign }
    }

    pub fn holds(&self, s: &LhvStrategy) -> bool {
        s.product(&self.pattern) == self.sign
    }

    /// The four probability-one GHZ constraints `(+1, +1, +1, −1)`.
    pub fn ghz() -> Vec<Constraint> {
        Self::canonical_with_signs(CANONICAL_SIGNS)
    }

    pub fn canonical_with_signs(signs: [i8; 4]) -> Vec<Constraint> {
        CANONICAL_PATTERNS
            .iter()
            .zip(signs)
            .map(|(p, s)| Constraint::new(*p, s))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub satisfying_count: usize,
    pub total: usize,
    pub constraint_count: usize,
    pub max_satisfiable: usize,
    /// A strategy meeting `max_satisfiable` constraints (lowest index).
    pub witness: Option<LhvStrategy>,
}

impl FeasibilityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Exhausts all 64 strategies.
pub fn lhv_enumerate(constraints: &[Constraint]) -> FeasibilityReport {
    let mut satisfying = 0;
    let mut best: Option<(usize, LhvStrategy)> = None;
    for s in LhvStrategy::all() {
        let met = constraints.iter().filter(|c| c.holds(&s)).count();
        if met == constraints.len() {
            satisfying += 1;
        }
        if best.is_none_or(|(m, _)| met > m) {
            best = Some((met, s));
        }
    }
    let (max_satisfiable, witness) = best.expect("64 strategies");
    FeasibilityReport {
        satisfying_count: satisfying,
        total: LhvStrategy::COUNT,
        constraint_count: constraints.len(),
        max_satisfiable,
        witness: Some(witness),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintSupport {
    pub constraint: Constraint,
    pub satisfying: usize,
}

/// Whether one distribution over strategies can give every constraint
/// probability one. That holds iff the satisfying sets intersect; any point
/// mass on the intersection is a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InfeasibilityProof {
    pub per_constraint: Vec<ConstraintSupport>,
    /// Strategy indices satisfying every constraint.
    pub intersection: Vec<usize>,
    pub feasible: bool,
    pub witness: Option<LhvStrategy>,
}

pub fn joint_feasibility(constraints: &[Constraint]) -> InfeasibilityProof {
    let sets: Vec<u64> = constraints
        .iter()
        .map(|c| {
            LhvStrategy::all()
                .filter(|s| c.holds(s))
                .fold(0u64, |acc, s| acc | 1 << s.index())
        })
        .collect();
    let meet = sets.iter().fold(u64::MAX, |acc, s| acc & s);
    let intersection: Vec<usize> = (0..LhvStrategy::COUNT)
        .filter(|i| meet >> i & 1 == 1)
        .collect();
    InfeasibilityProof {
        per_constraint: constraints
            .iter()
            .zip(&sets)
            .map(|(c, s)| ConstraintSupport {
                constraint: *c,
                satisfying: s.count_ones() as usize,
            })
            .collect(),
        feasible: !intersection.is_empty(),
        witness: intersection.first().map(|&i| LhvStrategy::from_index(i)),
        intersection,
    }
}
