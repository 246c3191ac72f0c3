//! Runs the acceptance battery and prints one line per criterion.

use std::process::ExitCode;

use spindle_core::battery::{self, BatteryOptions};

fn main() -> ExitCode {
    let outcomes = battery::run(&BatteryOptions::default());
    for o in &outcomes {
        println!("{o}");
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if outcomes.len() == 9 && passed == outcomes.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
