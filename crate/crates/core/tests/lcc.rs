mod common;

use std::sync::Arc;

use common::{inner, max_abs_diff, FockOracle};
use exspar::lcc::{lcc_solve, liouvillian_operator, mp2_guess, rhs, Liouvillian};
use exspar::model::ModelConfig;
use exspar::solvers::ConvergenceParams;
use exspar::Error;

fn coupled(n_sites: usize) -> ModelConfig {
    ModelConfig { n_sites, t_hop: 0.2, u: 0.8, lambda_cd: 0.5, lambda_dd: 0.3, ..ModelConfig::default() }
}

#[test]
fn liouvillian_equals_the_commutator() {
    for (cfg, m) in [
        (coupled(4), 3),
        (ModelConfig { dim: 2, n_sites: 2, r_c: 1.5, t_hop: 0.1, ..ModelConfig::default() }, 2),
        (ModelConfig { n_sites: 5, r_c: 2.0, t_hop: 0.15, ..ModelConfig::default() }, 2),
    ] {
        let ints = Arc::new(cfg.build_lattice().unwrap());
        let (basis, a) = liouvillian_operator(ints.clone(), m).unwrap().assemble_dense().unwrap();
        let b = FockOracle::bare(&ints).commutator_block(&basis);
        assert!(max_abs_diff(&a, &b) < 1e-12, "m={m}: {}", max_abs_diff(&a, &b));
    }
}

#[test]
fn right_hand_side_is_the_projected_reference() {
    let ints = coupled(4).build_lattice().unwrap();
    let spec = ints.basis(3).unwrap();
    let oracle = FockOracle::bare(&ints);
    let h0 = oracle.apply_normal(&oracle.reference());
    for mu in spec.strings(1..=3) {
        let expected = -inner(&oracle.string_state(&mu), &h0);
        assert!((rhs(&ints, &spec, &mu).unwrap() - expected).abs() < 1e-14, "{mu}");
    }
}

#[test]
fn mp2_guess_uses_diagonal_denominators() {
    let ints = Arc::new(coupled(3).build_lattice().unwrap());
    let op = Liouvillian::new(ints.clone(), 2).unwrap();
    let guess = mp2_guess(&op).unwrap();
    assert!(!op.doubles().is_empty());
    for (kappa, v) in op.doubles() {
        let denom: f64 = kappa.holes().map(|i| ints.f(i, i)).sum::<f64>() - kappa.particles().map(|a| ints.f(a, a)).sum::<f64>();
        assert!((guess.amplitudes.get(kappa).re - v / denom).abs() < 1e-15);
    }
}

#[test]
fn no_interaction_means_no_correlation() {
    let cfg = ModelConfig { n_sites: 4, u: 0.0, lambda_cd: 0.0, lambda_dd: 0.0, ..ModelConfig::default() };
    let sol = lcc_solve(Arc::new(cfg.build_lattice().unwrap()), 2, &ConvergenceParams::default()).unwrap();
    assert_eq!(sol.report.e_c, 0.0);
    assert_eq!(sol.report.iterations, 1);
    assert!(sol.report.converged);
}

#[test]
fn capped_solve_is_flagged_not_discarded() {
    let p = ConvergenceParams { tol: 1e-14, max_iter: 2, ..ConvergenceParams::default() };
    let sol = lcc_solve(Arc::new(coupled(4).build_lattice().unwrap()), 2, &p).unwrap();
    assert!(!sol.report.converged);
    assert!(sol.report.e_c < 0.0);
    assert!(!sol.amplitudes.amplitudes.is_empty());
    assert!(matches!(sol.into_result(), Err(Error::NotConverged { .. })));
}

#[test]
fn correlation_energy_scales_with_fragment_count() {
    let p = ConvergenceParams::with_tol(1e-12);
    let e = |fragments: usize| {
        let ints = ModelConfig { fragments, ..coupled(3) }.build_lattice().unwrap();
        lcc_solve(Arc::new(ints), 3, &p).unwrap().into_result().unwrap().report.e_c
    };
    let (e1, e2) = (e(1), e(2));
    assert!((e2 - 2.0 * e1).abs() < 1e-10, "{e2} vs 2 × {e1}");
}

#[test]
fn amplitude_dump_lists_every_nonzero() {
    let sol = lcc_solve(Arc::new(coupled(3).build_lattice().unwrap()), 2, &ConvergenceParams::with_tol(1e-10)).unwrap();
    let dump = sol.amplitudes.dump();
    assert_eq!(dump.lines().count(), sol.amplitudes.amplitudes.support());
    let first = dump.lines().next().unwrap();
    assert!(first.starts_with("t 1 ") || first.starts_with("t 2 "), "{first}");
}
