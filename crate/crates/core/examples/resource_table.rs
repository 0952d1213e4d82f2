//! Quantum cost, classical cost and speedup for every method and input
//! model, plus qubit counts and a measured subnormalization.

use std::sync::Arc;

use exspar::bse::exciton_operator;
use exspar::estimator::{qubit_count, render_table, speedup, subnormalization, table, InputModel, Method, ScenarioConfig};
use exspar::model::ModelConfig;

fn main() -> exspar::Result<()> {
    let rows = table(3, 3, &[Method::Bse, Method::Lcc], &InputModel::ALL, false);
    println!("{}", render_table(&rows));

    let sc = ScenarioConfig::new(Method::Lcc, InputModel::Integrals, 3, 3);
    let s = speedup(&sc);
    println!("LCC from integrals: quantum {}, classical {}, ratio {}", s.quantum, s.classical, s.ratio);

    for l in [1_000, 100_000] {
        let q = qubit_count(l, 3);
        println!("L = {l}, m = 3: {} qubits packed, {} per-excitation", q.packed, q.per_excitation);
    }

    let ints = Arc::new(ModelConfig { n_sites: 8, ..ModelConfig::default() }.build_lattice()?);
    let sub = subnormalization(&exciton_operator(ints, 1)?)?;
    println!(
        "m = 1 chain of 8: alpha = {:.3} (s_max {} x max {:.3}), norm estimate {:.3}, bound holds: {}",
        sub.alpha, sub.s_max, sub.max_abs, sub.norm_estimate, sub.bound_holds
    );
    Ok(())
}
