//! Driving the batch runner from code instead of the `kollektiv` binary.
//!
//! cargo run --example scenario_runner

use kollektiv::cli::{run, ExperimentConfig, Scenario};

fn main() {
    for scenario in Scenario::ALL {
        let config = ExperimentConfig {
            scenario,
            n: 20_000,
            ..Default::default()
        };
        match run(&config) {
            Ok(report) => println!(
                "{:<11} exit {} {}",
                scenario.name(),
                report.exit_code(),
                report.verdict.observed
            ),
            Err(e) => println!("{:<11} {e}", scenario.name()),
        }
    }
}
