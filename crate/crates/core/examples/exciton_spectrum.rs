//! Lowest exciton and biexciton energies from the sparse operator, checked
//! against dense diagonalization.

use std::sync::Arc;

use exspar::bse::{assemble_dense, exciton_operator};
use exspar::exbasis::SparseState;
use exspar::model::ModelConfig;
use exspar::solvers::{lowest_eigenpairs, ConvergenceParams};
use num_complex::Complex64;

fn main() -> exspar::Result<()> {
    let ints = Arc::new(
        ModelConfig {
            n_sites: 6,
            t_hop: 0.3,
            ..ModelConfig::default()
        }
        .build_lattice()?,
    );
    for m in 1..=2 {
        let h = exciton_operator(ints.clone(), m)?;
        let basis = h.basis();
        // a deterministic start vector with weight on every string
        let v0: SparseState = basis
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), Complex64::new(1.0 + 0.1 * (k % 7) as f64, 0.0)))
            .collect();
        let out = lowest_eigenpairs(&h, &v0, 3, &ConvergenceParams::with_tol(1e-10))?.into_result()?;

        let dense = assemble_dense(&ints, h.spec())?;
        let mut exact: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
        exact.sort_by(f64::total_cmp);
        println!("m = {m}: {} strings, s_max = {}, {} Lanczos steps", basis.len(), h.s_max(), out.iterations);
        for (k, e) in out.values.iter().enumerate() {
            println!("  E{k} = {e:.10}  dense {:.10}", exact[k]);
        }
    }
    Ok(())
}
