//! Stabilization audit: an i.i.d. source settles, an oscillating one does not.
//!
//! cargo run --example stabilization

use std::sync::Arc;

use kollektiv::collectives::{
    relative_frequency, stabilization_audit, Categorical, Collective, LabelSet, Oscillating,
    Schedule, Tolerance,
};

fn main() -> kollektiv::Result<()> {
    let labels = Arc::new(LabelSet::new(["a", "b"])?);
    let schedule = Schedule::default();
    let tol = Tolerance::InverseSqrt(5.0);

    let coin = Collective::generate(
        labels.clone(),
        Arc::new(Categorical::bernoulli(0.25)),
        7,
        128_000,
    )?;
    let v = stabilization_audit(&coin, &schedule, tol)?;
    println!("bernoulli(0.25): {:?}", v.status);
    for p in v.probabilities.iter().flatten() {
        println!("  p({}) ≈ {:.4}", p.label, p.p);
    }
    println!("  ν_1000(a) = {}", relative_frequency(&coin, &["a"], 1000)?);

    let osc = Collective::generate(labels, Arc::new(Oscillating::new(3)), 0, 128_000)?;
    let v = stabilization_audit(&osc, &schedule, tol)?;
    println!("oscillating(3): {:?}", v.status);
    if let Some(w) = v.witness {
        println!(
            "  label {} moved {:.3} between N={} and N={} (allowed {:.4})",
            w.label, w.deviation, w.between.0, w.between.1, w.tolerance
        );
        println!(
            "  ν(a) at checkpoints: {:?}",
            w.frequencies
                .iter()
                .map(|f| (f * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        );
    }
    Ok(())
}
