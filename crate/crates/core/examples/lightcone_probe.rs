//! Count how many strings repeated matvecs reach from one local exciton,
//! and fit the growth exponent.

use std::sync::Arc;

use exspar::bse::{exciton_operator, local_excitons};
use exspar::lightcone::{fit_volume_exponent, probe_with, within_lightcone};
use exspar::model::ModelConfig;

fn main() -> exspar::Result<()> {
    for (m, n_sites, d) in [(1, 61, 12), (2, 61, 10)] {
        let ints = Arc::new(ModelConfig { n_sites, ..ModelConfig::default() }.build_lattice()?);
        let h = exciton_operator(ints.clone(), m)?;
        let sites: Vec<usize> = (n_sites / 2..n_sites / 2 + m).collect();
        let mu0 = local_excitons(&ints, &sites)?;

        let mut inside = true;
        let trace = probe_with(&h, &ints, &mu0, d, 10_000_000, |k, x| {
            inside &= x.keys().all(|s| within_lightcone(&ints, &mu0, s, k as f64 * ints.r_c()));
        })?;
        let nnz: Vec<usize> = trace.points.iter().map(|p| p.nnz).collect();
        println!("m = {m}, D = 1: support {nnz:?}");
        println!(
            "  exponent {:.2} (volume law {}), within lightcone: {inside}, ops {} of at most {}",
            fit_volume_exponent(&trace)?,
            2 * m,
            trace.points.last().unwrap().cum_ops,
            trace.ops_upper_estimate()
        );
    }
    Ok(())
}
