//! Solve circle instances for a range of sizes and print one line per size.
//!
//! `cargo run --release --example cp_sweep -- 3 8 10` solves n = 3..=8 with a
//! 10 second limit each.

use deconflict_core::{gen_cp, solve, CpConfig, SolverConfig};

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (lo, hi, limit) = match args.as_slice() {
        [lo, hi, limit, ..] => (*lo as usize, *hi as usize, *limit),
        [lo, hi] => (*lo as usize, *hi as usize, 10.0),
        _ => (3, 6, 10.0),
    };
    for n in lo..=hi {
        let inst = gen_cp(&CpConfig::with_n(n)).expect("valid circle instance");
        let cfg = SolverConfig {
            time_limit_s: limit,
            ..SolverConfig::default()
        };
        let res = solve(&inst, &cfg).expect("valid config");
        println!(
            "n={n:2} status={:<10} primal={:.6e} dual={:.6e} nodes={} time={:.2}s",
            res.status.as_str(),
            res.primal.unwrap_or(f64::NAN),
            res.dual,
            res.nodes,
            res.time_s
        );
    }
}
