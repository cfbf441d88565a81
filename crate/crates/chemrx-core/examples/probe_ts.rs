//! Time-series probe: one input, prints selected species over time (ODE).
//!
//! Usage: probe_ts <timed|always-on> <rate-set 1..5> <input>

use chemrx_core::blocks::{build, rate_set, ChemSicalConfig, Variant};
use chemrx_core::sim::{simulate_ode, time_grid, OdeOptions};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let variant = match args.first().map(String::as_str) {
        Some("always-on") => Variant::AlwaysOn,
        _ => Variant::Timed,
    };
    let set: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let input: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(300.0);

    let config = ChemSicalConfig::reference(variant, 2).with_rates(rate_set(set).unwrap());
    let built = build(&config, 0).unwrap();
    let mut model = built.model.clone();
    model.set_initial(built.layout.input, input);

    let names = [
        "S0", "X2_on", "X2_off", "W2", "D2_1", "D2_0", "B2", "P2", "X1_on", "X1_off", "D1_1",
        "D1_0", "P1", "W1",
    ];
    let ids: Vec<_> = names.iter().map(|n| (n, model.species_id(n))).collect();

    let grid = time_grid(0.0, config.t_dec, 147);
    let (traj, _) = simulate_ode(&model, &grid, &OdeOptions::default()).unwrap();

    print!("{:>8}", "t");
    for (n, id) in &ids {
        if id.is_some() {
            print!(" {:>9}", n);
        }
    }
    println!();
    for k in (0..grid.len()).step_by(2) {
        let st = traj.state_at(k);
        print!("{:>8.2}", grid[k]);
        for (_, id) in &ids {
            if let Some(id) = id {
                print!(" {:>9.2}", st[id.index()]);
            }
        }
        println!();
    }
}
