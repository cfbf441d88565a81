//! Deterministic screening sweep across the preset rate sets.
//!
//! Runs the rate-equation screen for both receiver variants over the full
//! standard input range and prints the erroneous inputs per configuration:
//!
//! ```text
//! cargo run --release -p chemrx-core --example screen_dev
//! ```

use std::time::Instant;

use chemrx_core::blocks::{rate_set, ChemSicalConfig, Variant};
use chemrx_core::eval::ode_screen;

fn main() {
    for variant in [Variant::Timed, Variant::AlwaysOn] {
        for set in 1..=5 {
            let config =
                ChemSicalConfig::reference(variant, 2).with_rates(rate_set(set).unwrap());
            let start = Instant::now();
            match ode_screen(&config, 0, 600) {
                Ok(report) => {
                    let w = &report.wrong_inputs;
                    let head: Vec<u32> = w.iter().take(12).copied().collect();
                    println!(
                        "{variant} set{set}: {} wrong of {} ({:.1}%) in {:.1}s  head={head:?}{}",
                        w.len(),
                        report.n_inputs(),
                        100.0 * report.error_fraction(),
                        start.elapsed().as_secs_f64(),
                        if w.len() > 12 { " ..." } else { "" },
                    );
                }
                Err(e) => println!("{variant} set{set}: FAILED: {e}"),
            }
        }
    }
}
