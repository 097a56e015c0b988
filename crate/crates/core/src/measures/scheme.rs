//! The GHZ scheme on a hidden-variable space: observable tables, the parity
//! identity, the single-measure contradiction and its singular resolution.

use std::sync::Arc;

use serde::Serialize;

use super::{
    event_probability, is_singular, ser_mass, ser_masses, EventSet, FiniteMeasure, HiddenSpace,
    Mass, Rational,
};
use crate::error::{Error, Result};
use crate::ghz::{LhvStrategy, CANONICAL_PATTERNS};

/// Outcomes `(A, B, C)` of one setting (1..=4) on every atom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObservableTable {
    setting: u8,
    values: Vec<[i8; 3]>,
}

impl ObservableTable {
    pub fn new(setting: u8, values: Vec<[i8; 3]>) -> Result<Self> {
        if !(1..=4).contains(&setting) {
            return Err(Error::InvalidMeasure(format!(
                "setting {setting} is not in 1..=4"
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|t| t.iter().any(|v| *v != 1 && *v != -1))
        {
            return Err(Error::InvalidMeasure(format!("non-±1 outcome at atom {i}")));
        }
        Ok(Self { setting, values })
    }

    /// Same triple on every atom.
    pub fn constant(setting: u8, triple: [i8; 3], atoms: usize) -> Result<Self> {
        Self::new(setting, vec![triple; atoms])
    }

    pub fn setting(&self) -> u8 {
        self.setting
    }

    pub fn values(&self) -> &[[i8; 3]] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn product(&self, atom: usize) -> i8 {
        self.values[atom].iter().product()
    }
}

/// `{ω : A(ω)·B(ω)·C(ω) = sign}`.
pub fn product_event(t: &ObservableTable, sign: i8) -> EventSet {
    EventSet::new((0..t.len()).filter(|&a| t.product(a) == sign).collect())
}

/// The four tables a per-atom strategy induces through the canonical
/// setting patterns.
pub fn induced_tables(strategies: &[LhvStrategy]) -> [ObservableTable; 4] {
    std::array::from_fn(|i| ObservableTable {
        setting: i as u8 + 1,
        values: strategies
            .iter()
            .map(|s| s.outcomes(&CANONICAL_PATTERNS[i]))
            .collect(),
    })
}

/// The 64-atom space with one atom per strategy. Photon `j`'s device
/// variable `λʲ ∈ 0..4` encodes its two outcome bits; the source variable
/// is trivial.
pub fn induced_space() -> (Arc<HiddenSpace>, [ObservableTable; 4]) {
    let atoms = (0..LhvStrategy::COUNT as u32)
        .map(|k| [0, k & 3, (k >> 2) & 3, (k >> 4) & 3])
        .collect();
    let space = HiddenSpace::new(atoms).expect("distinct atoms");
    let strategies: Vec<_> = LhvStrategy::all().collect();
    (Arc::new(space), induced_tables(&strategies))
}

/// Recovers the six per-photon values of each atom, failing if the tables
/// disagree about a shared value.
fn recover(tables: &[ObservableTable; 4]) -> Result<Vec<LhvStrategy>> {
    for (i, t) in tables.iter().enumerate() {
        if t.setting as usize != i + 1 {
            return Err(Error::StructureViolation(format!(
                "table {} carries setting {}",
                i + 1,
                t.setting
            )));
        }
    }
    let n = tables[0].len();
    if tables.iter().any(|t| t.len() != n) {
        return Err(Error::StructureViolation(
            "tables cover different atoms".into(),
        ));
    }
    let mut out = Vec::with_capacity(n);
    for atom in 0..n {
        let mut vals = [[0i8; 2]; 3];
        for (t, pattern) in tables.iter().zip(CANONICAL_PATTERNS) {
            for (photon, basis) in pattern.iter().enumerate() {
                let v = t.values[atom][photon];
                let slot = &mut vals[photon][*basis as usize];
                if *slot != 0 && *slot != v {
                    return Err(Error::StructureViolation(format!(
                        "atom {atom}: photon {} {:?}-value differs between settings",
                        photon + 1,
                        basis
                    )));
                }
                *slot = v;
            }
        }
        out.push(LhvStrategy::new(vals));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub atoms: usize,
    /// Atoms where `product₁·product₂·product₃ ≠ product₄`.
    pub violations: Vec<usize>,
    /// `Ω₁⁺ ∩ Ω₂⁺ ∩ Ω₃⁺`.
    pub sigma_plus: EventSet,
    pub omega4_plus: EventSet,
    pub inclusion_holds: bool,
}

/// Checks `(A_yB_xC_x)(A_xB_yC_x)(A_xB_xC_y) = A_yB_yC_y` on every atom.
pub fn ghz_pointwise_identity(tables: &[ObservableTable; 4]) -> Result<IdentityReport> {
    recover(tables)?;
    let n = tables[0].len();
    let violations = (0..n)
        .filter(|&a| {
            tables[0].product(a) * tables[1].product(a) * tables[2].product(a)
                != tables[3].product(a)
        })
        .collect();
    let sigma_plus = sigma_plus(tables);
    let omega4_plus = product_event(&tables[3], 1);
    Ok(IdentityReport {
        atoms: n,
        violations,
        inclusion_holds: sigma_plus.is_subset(&omega4_plus),
        sigma_plus,
        omega4_plus,
    })
}

fn sigma_plus(tables: &[ObservableTable; 4]) -> EventSet {
    product_event(&tables[0], 1)
        .intersection(&product_event(&tables[1], 1))
        .intersection(&product_event(&tables[2], 1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "M: Mass"))]
pub struct ContradictionReport<M: Mass = Rational> {
    /// `P(Ω_i⁺)`, `i = 1..3`.
    #[serde(serialize_with = "ser_masses")]
    pub p_omega_plus: Vec<M>,
    #[serde(serialize_with = "ser_mass")]
    pub p_omega4_minus: M,
    #[serde(serialize_with = "ser_mass")]
    pub p_sigma_plus: M,
    /// `P(Ω_i⁺) = 1` for `i = 1..3`.
    pub k1_holds: bool,
    /// `P(Ω₄⁻) = 1`.
    pub k3_holds: bool,
    /// Whether this particular `P` meets all four constraints.
    pub satisfied_by_p: bool,
    /// `Σ⁺ ∩ Ω₄⁻ = ∅`.
    pub sigma_plus_disjoint_from_omega4_minus: bool,
    /// No measure on this space satisfies the constraints.
    pub globally_infeasible: bool,
}

pub fn kolmogorov_contradiction<M: Mass>(
    p: &FiniteMeasure<M>,
    tables: &[ObservableTable; 4],
) -> Result<ContradictionReport<M>> {
    let identity = ghz_pointwise_identity(tables)?;
    if identity.atoms != p.space().len() {
        return Err(Error::StructureViolation(format!(
            "tables cover {} atoms, space has {}",
            identity.atoms,
            p.space().len()
        )));
    }
    let p_omega_plus = (0..3)
        .map(|i| event_probability(p, &product_event(&tables[i], 1)))
        .collect::<Result<Vec<_>>>()?;
    let omega4_minus = product_event(&tables[3], -1);
    let p_omega4_minus = event_probability(p, &omega4_minus)?;
    let p_sigma_plus = event_probability(p, &identity.sigma_plus)?;
    let k1_holds = p_omega_plus.iter().all(Mass::is_unit);
    let k3_holds = p_omega4_minus.is_unit();
    let meet = identity.sigma_plus.intersection(&omega4_minus);
    Ok(ContradictionReport {
        p_omega_plus,
        p_omega4_minus,
        p_sigma_plus,
        k1_holds,
        k3_holds,
        satisfied_by_p: k1_holds && k3_holds,
        sigma_plus_disjoint_from_omega4_minus: meet.is_empty(),
        globally_infeasible: meet.is_empty(),
    })
}

/// Four measures on a shared four-atom space, one per setting.
#[derive(Clone, Debug)]
pub struct SingularResolution {
    pub space: Arc<HiddenSpace>,
    pub measures: [FiniteMeasure<Rational>; 4],
    pub tables: [ObservableTable; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolutionReport {
    /// `P_i(Ω_i⁺)`, `i = 1..3`.
    #[serde(serialize_with = "ser_masses")]
    pub p_i_omega_i_plus: Vec<Rational>,
    #[serde(serialize_with = "ser_mass")]
    pub p4_omega4_minus: Rational,
    #[serde(serialize_with = "ser_mass")]
    pub p4_omega4_plus: Rational,
    #[serde(serialize_with = "ser_mass")]
    pub p4_sigma_plus: Rational,
    /// `P₄(Ω_j⁺)`, `j = 1..3`.
    #[serde(serialize_with = "ser_masses")]
    pub p4_omega_j_plus: Vec<Rational>,
    /// `(i, j, P_i ⊥ P_j)` for `i < j`, 1-based.
    pub pairwise_singular: Vec<(usize, usize, bool)>,
    pub all_pairwise_singular: bool,
    /// `P_i(Ω_i⁺) = 1`, `i = 1..3`, and `P₄(Ω₄⁺) = 0`.
    pub c1_holds: bool,
    /// `P₄(Σ⁺) = 0`.
    pub c2_holds: bool,
}

/// Atoms `ω₁..ω₃` carry the all-`+1` assignment; `ω₄` has every x-type
/// value `+1` and every y-type value `−1`, so it sits in `Ω₄⁻` and violates
/// settings 1–3. `P_i` is the point mass at `ω_i`.
pub fn build_singular_resolution() -> SingularResolution {
    let space =
        Arc::new(HiddenSpace::new((0..4).map(|l| [l, 0, 0, 0]).collect()).expect("distinct atoms"));
    let plus = LhvStrategy::new([[1, 1]; 3]);
    let omega4 = LhvStrategy::new([[1, -1]; 3]);
    let tables = induced_tables(&[plus, plus, plus, omega4]);
    let measures =
        std::array::from_fn(|i| FiniteMeasure::point(space.clone(), i).expect("atom exists"));
    SingularResolution {
        space,
        measures,
        tables,
    }
}

impl SingularResolution {
    pub fn verify(&self) -> Result<ResolutionReport> {
        let t = &self.tables;
        let plus: Vec<EventSet> = t.iter().map(|t| product_event(t, 1)).collect();
        let p4 = &self.measures[3];
        let p_i_omega_i_plus = (0..3)
            .map(|i| event_probability(&self.measures[i], &plus[i]))
            .collect::<Result<Vec<_>>>()?;
        let p4_omega_j_plus = (0..3)
            .map(|j| event_probability(p4, &plus[j]))
            .collect::<Result<Vec<_>>>()?;
        let p4_omega4_minus = event_probability(p4, &product_event(&t[3], -1))?;
        let p4_omega4_plus = event_probability(p4, &plus[3])?;
        let p4_sigma_plus = event_probability(p4, &sigma_plus(t))?;
        let mut pairwise_singular = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                let s = is_singular(&self.measures[i], &self.measures[j])?.singular;
                pairwise_singular.push((i + 1, j + 1, s));
            }
        }
        Ok(ResolutionReport {
            c1_holds: p_i_omega_i_plus.iter().all(Mass::is_unit) && p4_omega4_plus.is_null(),
            c2_holds: p4_sigma_plus.is_null(),
            all_pairwise_singular: pairwise_singular.iter().all(|p| p.2),
            p_i_omega_i_plus,
            p4_omega4_minus,
            p4_omega4_plus,
            p4_sigma_plus,
            p4_omega_j_plus,
            pairwise_singular,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn single(strategy: LhvStrategy) -> [ObservableTable; 4] {
        induced_tables(&[strategy])
    }

    #[test]
    fn product_event_cases() {
        let t = ObservableTable::constant(1, [1, 1, 1], 5).unwrap();
        assert_eq!(product_event(&t, 1).len(), 5);
        let t = ObservableTable::new(2, vec![[1, 1, -1]]).unwrap();
        assert_eq!(product_event(&t, -1), EventSet::new(vec![0]));
        assert!(ObservableTable::new(5, vec![]).is_err());
        assert!(ObservableTable::new(1, vec![[1, 0, 1]]).is_err());
    }

    #[test]
    fn identity_small_cases() {
        let r = ghz_pointwise_identity(&single(LhvStrategy::new([[1, 1]; 3]))).unwrap();
        assert!(r.violations.is_empty());
        assert_eq!(r.sigma_plus, EventSet::new(vec![0]));
        assert!(r.inclusion_holds);

        let ay_neg = LhvStrategy::new([[1, -1], [1, 1], [1, 1]]);
        let t = single(ay_neg);
        let products: Vec<i8> = t.iter().map(|t| t.product(0)).collect();
        assert_eq!(products, [-1, 1, 1, -1]);
        let r = ghz_pointwise_identity(&t).unwrap();
        assert!(r.sigma_plus.is_empty());
        assert!(r.inclusion_holds);
    }

    #[test]
    fn identity_over_all_assignments() {
        let (_, tables) = induced_space();
        let r = ghz_pointwise_identity(&tables).unwrap();
        assert_eq!(r.atoms, 64);
        assert!(r.violations.is_empty());
        assert!(r.inclusion_holds);
        assert_eq!(r.sigma_plus.len(), 8);
    }

    #[test]
    fn mixed_tables_are_rejected() {
        let mut t = single(LhvStrategy::new([[1, 1]; 3]));
        t[3] = ObservableTable::new(4, vec![[-1, 1, 1]]).unwrap();
        assert!(matches!(
            ghz_pointwise_identity(&t),
            Err(Error::StructureViolation(_))
        ));
        let mut t = single(LhvStrategy::new([[1, 1]; 3]));
        t.swap(0, 1);
        assert!(ghz_pointwise_identity(&t).is_err());
    }

    #[test]
    fn contradiction_on_single_atom() {
        let tables = single(LhvStrategy::new([[1, 1]; 3]));
        let space = Arc::new(HiddenSpace::new(vec![[0, 0, 0, 0]]).unwrap());
        let p = FiniteMeasure::<Rational>::point(space, 0).unwrap();
        let r = kolmogorov_contradiction(&p, &tables).unwrap();
        assert!(r.k1_holds);
        assert!(!r.k3_holds);
        assert_eq!(r.p_omega4_minus, Rational::zero());
        assert!(r.globally_infeasible);
    }

    #[test]
    fn contradiction_under_uniform_measure() {
        let (space, tables) = induced_space();
        let p = FiniteMeasure::<Rational>::uniform(space).unwrap();
        let r = kolmogorov_contradiction(&p, &tables).unwrap();
        assert!(r.p_omega_plus.iter().all(|m| *m == Rational::new(1, 2)));
        assert!(!r.k1_holds);
        assert!(!r.satisfied_by_p);
        assert!(r.globally_infeasible);
    }

    #[test]
    fn k1_measures_force_sigma_plus() {
        let (space, tables) = induced_space();
        let sigma = sigma_plus(&tables);
        let p = FiniteMeasure::<Rational>::uniform_on(space, &sigma).unwrap();
        let r = kolmogorov_contradiction(&p, &tables).unwrap();
        assert!(r.k1_holds);
        assert!(r.p_sigma_plus.is_one());
        assert!(r.p_omega4_minus.is_zero());
        assert!(!r.k3_holds);
    }

    #[test]
    fn singular_resolution_holds() {
        let res = build_singular_resolution();
        let r = res.verify().unwrap();
        assert!(r.p_i_omega_i_plus.iter().all(|m| m.is_one()));
        assert!(r.p4_omega4_minus.is_one());
        assert!(r.p4_sigma_plus.is_zero());
        assert!(r.p4_omega_j_plus.iter().all(|m| m.is_zero()));
        assert_eq!(r.pairwise_singular.len(), 6);
        assert!(r.all_pairwise_singular);
        assert!(r.c1_holds && r.c2_holds);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["p4_sigma_plus"], "0");
    }
}
