//! One probability space for all four settings cannot work.
//!
//! cargo run --example kolmogorov_paradox

use kollektiv::measures::{
    ghz_pointwise_identity, induced_space, kolmogorov_contradiction, product_event, FiniteMeasure,
    Rational,
};

fn main() -> kollektiv::Result<()> {
    let (space, tables) = induced_space();
    let id = ghz_pointwise_identity(&tables)?;
    println!(
        "{} atoms, {} violations of the parity identity, |Σ⁺| = {}, Σ⁺ ⊆ Ω₄⁺: {}",
        id.atoms,
        id.violations.len(),
        id.sigma_plus.len(),
        id.inclusion_holds
    );

    let uniform = FiniteMeasure::<Rational>::uniform(space.clone())?;
    let r = kolmogorov_contradiction(&uniform, &tables)?;
    println!(
        "uniform P: P(Ω_i⁺) = {:?}, P(Ω₄⁻) = {}",
        r.p_omega_plus
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>(),
        r.p_omega4_minus
    );

    // the best a single measure can do: sit on Σ⁺
    let on_sigma = FiniteMeasure::<Rational>::uniform_on(space.clone(), &id.sigma_plus)?;
    let r = kolmogorov_contradiction(&on_sigma, &tables)?;
    println!(
        "P on Σ⁺: first three hold = {}, P(Σ⁺) = {}, P(Ω₄⁻) = {}",
        r.k1_holds, r.p_sigma_plus, r.p_omega4_minus
    );
    // and the other way round
    let on_minus = FiniteMeasure::<Rational>::uniform_on(space, &product_event(&tables[3], -1))?;
    let r = kolmogorov_contradiction(&on_minus, &tables)?;
    println!(
        "P on Ω₄⁻: P(Ω_i⁺) = {:?}",
        r.p_omega_plus
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
    );
    println!("no measure satisfies all four: {}", r.globally_infeasible);
    Ok(())
}
