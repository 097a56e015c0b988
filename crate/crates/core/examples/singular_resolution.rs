//! Four pairwise-singular measures, one per setting, with no paradox.
//! Also shows absolute continuity and densities between finite measures.
//!
//! cargo run --example singular_resolution

use std::sync::Arc;

use kollektiv::measures::{
    build_singular_resolution, is_absolutely_continuous, is_equivalent, is_singular,
    measure_to_csv, radon_nikodym, EventSet, FiniteMeasure, HiddenSpace, Rational,
};

fn main() -> kollektiv::Result<()> {
    let res = build_singular_resolution();
    let r = res.verify()?;
    println!("{}", serde_json::to_string_pretty(&r).unwrap());
    let s = is_singular(&res.measures[0], &res.measures[3])?;
    println!("P₁ ⊥ P₄ with witness {:?}", s.witness.members());

    let space = Arc::new(HiddenSpace::product([3, 1, 1, 1])?);
    let p = FiniteMeasure::new(
        space.clone(),
        vec![
            Rational::new(1, 2),
            Rational::new(1, 2),
            Rational::new(0, 1),
        ],
    )?;
    let q = FiniteMeasure::<Rational>::uniform(space)?;
    print!("{}", measure_to_csv(&p));
    println!(
        "P ≪ Q: {}, Q ≪ P: {}, equivalent: {}",
        is_absolutely_continuous(&p, &q)?,
        is_absolutely_continuous(&q, &p)?,
        is_equivalent(&p, &q)?
    );
    let f = radon_nikodym(&p, &q)?;
    println!(
        "dP/dQ = {:?}",
        f.values()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
    );
    let e = EventSet::new(vec![0, 2]);
    println!("∫_E f dQ = {}", f.integrate(&q, &e)?);
    println!("dQ/dP: {}", radon_nikodym(&q, &p).unwrap_err());
    Ok(())
}
