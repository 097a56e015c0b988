//! Exhaustive search over the 64 local assignments.
//!
//! cargo run --example lhv_search

use kollektiv::ghz::{joint_feasibility, lhv_enumerate, Constraint};

fn main() {
    let ghz = Constraint::ghz();
    let report = lhv_enumerate(&ghz);
    println!("{}", report.to_json());

    let proof = joint_feasibility(&ghz);
    for c in &proof.per_constraint {
        println!(
            "{:?} = {:+}: {} strategies",
            c.constraint.pattern, c.constraint.sign, c.satisfying
        );
    }
    println!("common to all four: {:?}", proof.intersection);

    for skip in 0..4 {
        let three: Vec<_> = ghz
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, c)| *c)
            .collect();
        let p = joint_feasibility(&three);
        println!(
            "without constraint {}: witness {}",
            skip + 1,
            p.witness.unwrap()
        );
    }

    let flipped = lhv_enumerate(&Constraint::canonical_with_signs([1, 1, 1, 1]));
    println!(
        "with all signs +1: {} of 64 strategies work",
        flipped.satisfying_count
    );
}
