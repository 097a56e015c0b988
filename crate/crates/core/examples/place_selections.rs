//! Randomness audit over place selections.
//!
//! cargo run --example place_selections

use std::sync::Arc;

use kollektiv::collectives::{Categorical, Collective, LabelSet, Periodic};
use kollektiv::randomness::{randomness_audit, PlaceSelection, RandomnessConfig, SelectionSpec};

fn main() -> kollektiv::Result<()> {
    let labels = Arc::new(LabelSet::new(["a", "b"])?);
    let config = RandomnessConfig::default();

    let alternating = Collective::generate(
        labels.clone(),
        Arc::new(Periodic(labels.labels().collect())),
        0,
        1000,
    )?;
    let phases = [
        PlaceSelection::arithmetic(2, 1),
        PlaceSelection::arithmetic(2, 2),
    ];
    let v = randomness_audit(&alternating, &phases, &config)?;
    println!("a,b,a,b,… under odd/even selection: {:?}", v.status);
    for r in &v.per_selection {
        println!(
            "  {:<28} {:?} deviation {:?}",
            r.name, r.outcome, r.max_deviation
        );
    }

    let coin = Collective::generate(labels.clone(), Arc::new(Categorical::uniform(2)), 11, 1000)?;
    let family: Vec<_> = SelectionSpec::builtin_family("a")
        .iter()
        .map(|s| s.build(&labels))
        .collect::<Result<_, _>>()?;
    let v = randomness_audit(&coin, &family, &config)?;
    println!("fair coin under the built-in family: {:?}", v.status);
    for r in &v.per_selection {
        println!(
            "  {:<28} {:?} (length {})",
            r.name, r.outcome, r.selected_length
        );
    }

    // a rule that looks only at the past: pick the place after two equal labels
    let streak = PlaceSelection::new("after_streak", |_, past: &[_]| {
        past.len() >= 2 && past[past.len() - 1] == past[past.len() - 2]
    });
    let v = randomness_audit(&coin, &[streak], &config)?;
    println!("custom selection: {:?}", v.status);
    Ok(())
}
