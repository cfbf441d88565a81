//! Deterministic per-input diagnostic: prints stage evidence and decisions
//! at the readout time for a handful of inputs.
//!
//! ```text
//! cargo run --release -p chemrx-core --example probe_dev -- <variant> <set> [inputs...]
//! ```

use chemrx_core::blocks::{build, rate_set, ChemSicalConfig, Variant};
use chemrx_core::eval::chem_decide;
use chemrx_core::sic::{sic_detect, ThresholdTree};
use chemrx_core::sim::{simulate_ode, time_grid, OdeOptions};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let variant = match args.first().map(String::as_str) {
        Some("always-on") => Variant::AlwaysOn,
        _ => Variant::Timed,
    };
    let set: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let inputs: Vec<u32> = if args.len() > 2 {
        args[2..].iter().filter_map(|s| s.parse().ok()).collect()
    } else {
        vec![100, 231, 232, 300, 318, 385, 386, 400, 500, 600]
    };

    let config = ChemSicalConfig::reference(variant, 2).with_rates(rate_set(set).unwrap());
    let built = build(&config, 0).unwrap();
    let tree = ThresholdTree::two_tx_reference();
    let grid = time_grid(0.0, config.t_dec, 2);

    println!("{variant} set{set} t_dec={}", config.t_dec);
    for n in inputs {
        let mut model = built.model.clone();
        model.set_initial(built.layout.input, f64::from(n));
        let (traj, _) = simulate_ode(&model, &grid, &OdeOptions::default()).unwrap();
        let state = traj.state_at(grid.len() - 1);
        let decision = chem_decide(&built.layout, state).unwrap();
        let truth = sic_detect(f64::from(n), &tree);
        let mut cols = String::new();
        for (i, st) in built.layout.stages.iter().enumerate() {
            let d1 = state[st.d1.index()];
            let d0 = state[st.d0.index()];
            let p = st.spent.map_or(0.0, |s| state[s.index()]);
            let b = state[st.blank.index()];
            let w = state[st.threshold.index()];
            cols.push_str(&format!(
                "  s{}: E1={:.1} (D1={:.1} P={:.1}) E0={:.1} B={:.1} W={:.1}",
                i + 1,
                d1 + p,
                d1,
                p,
                d0,
                b,
                w
            ));
        }
        println!(
            "n={n:<3} chem={decision:?} truth={truth:?} {}{cols}",
            if decision == truth { "ok   " } else { "WRONG" },
        );
    }
}

