//! Release an on-site exciton and follow how it spreads, with the
//! Chebyshev propagator.

use std::sync::Arc;

use exspar::bse::{exciton_operator, local_excitons};
use exspar::exbasis::SparseState;
use exspar::model::ModelConfig;
use exspar::solvers::{gershgorin, propagate, ConvergenceParams};

fn main() -> exspar::Result<()> {
    let ints = Arc::new(
        ModelConfig {
            n_sites: 15,
            t_hop: 0.3,
            ..ModelConfig::default()
        }
        .build_lattice()?,
    );
    let h = exciton_operator(ints.clone(), 1)?;
    let bounds = gershgorin(&h, h.basis().iter())?;
    println!("spectrum inside [{:.3}, {:.3}]", bounds.0, bounds.1);

    let centre = 7;
    let mut psi = SparseState::unit(local_excitons(&ints, &[centre])?);
    let p = ConvergenceParams::with_tol(1e-12);
    let dt = 2.0;
    println!("{:>5} {:>8} {:>12} {:>10}", "t", "support", "norm", "P(centre)");
    for step in 0..=5 {
        if step > 0 {
            psi = propagate(&h, &psi, dt, Some(bounds), &p)?.into_result()?.state;
        }
        let at_centre: f64 = psi
            .iter()
            .filter(|(s, _)| s.particles().all(|a| ints.site_of(a) == centre))
            .map(|(_, c)| c.norm_sqr())
            .sum();
        println!("{:>5.1} {:>8} {:>12.10} {:>10.4}", step as f64 * dt, psi.support(), psi.norm(), at_centre);
    }
    Ok(())
}
