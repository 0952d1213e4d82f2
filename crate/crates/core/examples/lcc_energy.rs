//! Linearized coupled-cluster correlation energies: convergence with the
//! excitation rank, and size extensivity over decoupled copies.

use std::sync::Arc;

use exspar::lcc::lcc_solve;
use exspar::model::ModelConfig;
use exspar::solvers::ConvergenceParams;

fn main() -> exspar::Result<()> {
    let p = ConvergenceParams::with_tol(1e-12);
    let base = ModelConfig {
        n_sites: 4,
        u: 0.8,
        t_hop: 0.2,
        lambda_cd: 0.5,
        lambda_dd: 0.3,
        ..ModelConfig::default()
    };

    let ints = Arc::new(base.build_lattice()?);
    for m in 2..=4 {
        let sol = lcc_solve(ints.clone(), m, &p)?.into_result()?;
        println!(
            "m = {m}: E_c = {:.15} (MP2 {:.15}), {} iterations",
            sol.report.e_c, sol.report.e_mp2, sol.report.iterations
        );
    }

    let one = lcc_solve(ints, 2, &p)?.into_result()?.report.e_c;
    for fragments in [2, 3] {
        let cfg = ModelConfig { fragments, ..base.clone() };
        let e = lcc_solve(Arc::new(cfg.build_lattice()?), 2, &p)?.into_result()?.report.e_c;
        println!("{fragments} fragments: E_c / single = {:.12}", e / one);
    }
    Ok(())
}
