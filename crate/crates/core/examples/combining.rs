//! Pairing two collectives: conditional frequencies, combinability and
//! independence.
//!
//! cargo run --example combining

use std::sync::Arc;

use kollektiv::collectives::{Categorical, Collective, LabelSet};
use kollektiv::combining::{
    combinability_audit, conditional_frequency, independence_audit, joint_table, pair,
    CombiningConfig,
};

fn main() -> kollektiv::Result<()> {
    let n = 100_000;
    let x = Collective::generate(
        Arc::new(LabelSet::numeric(2)?),
        Arc::new(Categorical::uniform(2)),
        1,
        n,
    )?;
    let y = Collective::generate(
        Arc::new(LabelSet::numeric(3)?),
        Arc::new(Categorical::uniform(3)),
        2,
        n,
    )?;
    let z = pair(&x, &y)?;
    let config = CombiningConfig::default();

    let v = combinability_audit(&z, &config)?;
    println!("independent streams: {:?}", v.status);
    println!(
        "  ν(3/1) = {:.4}",
        conditional_frequency(&z, "3", "1", n as usize)?
    );
    let table = joint_table(&z, n as usize)?;
    print!("{}", table.to_csv());
    let i = independence_audit(&z, &config)?;
    println!(
        "  {:?}: max |ν(b/a) − ν(b)| = {:.5} ≤ {:.5}",
        i.status, i.max_deviation, i.tolerance
    );

    // y copies x: combinable, strongly dependent
    let same = pair(&x, &x)?;
    let i = independence_audit(&same, &config)?;
    println!(
        "copied stream: {:?}, max deviation {:.3}",
        i.status, i.max_deviation
    );
    Ok(())
}
