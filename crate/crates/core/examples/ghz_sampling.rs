//! Born-rule sampling of the three-photon state at a few settings.
//!
//! cargo run --example ghz_sampling

use kollektiv::ghz::{
    correlation, mean_product, outcome_distribution, sample_setting_collective, OutcomeTriple,
    Setting, TripleState,
};
use kollektiv::io::write_sequence;

fn main() -> kollektiv::Result<()> {
    let state = TripleState::default_ghz();
    let n = 100_000;
    for s in Setting::CANONICAL
        .iter()
        .chain(&[Setting::new([0.3, 0.5, 0.7])])
    {
        let corr = correlation(&state, s)?;
        let c = sample_setting_collective(&state, s, n, 42)?;
        println!("{s}: E = {corr:+.6}, sampled mean {:+.6}", mean_product(&c));
    }

    let d = outcome_distribution(&state, &Setting::S4)?;
    for (i, p) in d.probabilities.iter().enumerate() {
        println!("  {} {:.3e}", OutcomeTriple::from_index(i).label(), p);
    }
    println!(
        "wrong-parity mass at (π/2,π/2,π/2): {:.1e}",
        d.parity_mass(1)
    );

    let head = sample_setting_collective(&state, &Setting::S1, 6, 42)?;
    print!("first draws:\n{}", write_sequence(&head));
    Ok(())
}
