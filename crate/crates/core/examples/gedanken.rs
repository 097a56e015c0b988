//! Four perfectly good per-setting collectives with no common master
//! sequence.
//!
//! cargo run --example gedanken

use kollektiv::ghz::{gedanken_audit, TripleState};

fn main() -> kollektiv::Result<()> {
    let r = gedanken_audit(&TripleState::default_ghz(), 10_000, 1)?;
    for s in &r.settings {
        let e = s.empirical.as_ref().unwrap();
        println!(
            "{}: certified {:?}, empirical mean {:+.3}, {} draws",
            s.setting, s.certified_sign, e.mean_product, e.n
        );
    }
    println!(
        "strategies compatible with all four: {}",
        r.certificate.intersection.len()
    );
    println!("not combinable: {}", r.non_combinable);

    let p = gedanken_audit(&TripleState::product_000(), 1_000, 1)?;
    println!("|000⟩: certificate triggered = {}", p.certificate_triggered);
    Ok(())
}
