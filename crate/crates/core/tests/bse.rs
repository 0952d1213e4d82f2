mod common;

use std::sync::Arc;

use common::{max_abs_diff, sorted_eigenvalues, FockOracle};
use exspar::bse::{assemble_dense, exciton_operator, exciton_row, local_excitons, sparsity_bound};
use exspar::model::{dump_integrals, parse_integrals, ModelConfig};

#[test]
fn biexciton_block_matches_screened_oracle_elementwise() {
    for cfg in [
        ModelConfig { n_sites: 3, t_hop: 0.3, lambda_cd: 0.4, lambda_dd: 0.2, ..ModelConfig::default() },
        ModelConfig { dim: 2, n_sites: 2, r_c: 1.5, t_hop: 0.2, ..ModelConfig::default() },
    ] {
        let ints = cfg.build_lattice().unwrap();
        for m in 2..=3.min(ints.n_sites()) {
            let spec = ints.basis(m).unwrap();
            let a = assemble_dense(&ints, &spec).unwrap();
            let b = FockOracle::screened(&ints).normal_block(&spec.strings_of_rank(m));
            assert!(max_abs_diff(&a, &b) < 1e-12, "m={m}: {}", max_abs_diff(&a, &b));
        }
    }
}

#[test]
fn screening_only_touches_direct_terms() {
    // at ε = 1 the screened and bare oracles coincide
    let ints = ModelConfig { n_sites: 3, eps_screen: 1.0, t_hop: 0.2, ..ModelConfig::default() }.build_lattice().unwrap();
    let spec = ints.basis(2).unwrap();
    let a = assemble_dense(&ints, &spec).unwrap();
    let bare = FockOracle::bare(&ints).normal_block(&spec.strings_of_rank(2));
    assert!(max_abs_diff(&a, &bare) < 1e-12);
}

#[test]
fn crystal_matches_its_tabulated_dump() {
    let crystal = ModelConfig { n_sites: 5, r_c: 2.0, t_hop: 0.2, lambda_cd: 0.3, ..ModelConfig::default() }
        .build_crystal()
        .unwrap();
    let table = parse_integrals(&dump_integrals(&crystal)).unwrap();
    for m in 1..=2 {
        let spec = crystal.basis(m).unwrap();
        let a = assemble_dense(&crystal, &spec).unwrap();
        let b = assemble_dense(&table, &spec).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-12, "m={m}");
    }
}

#[test]
fn crystal_spectrum_is_translation_invariant() {
    // every translate of an on-site exciton has the same diagonal element
    let ints = ModelConfig { n_sites: 6, t_hop: 0.3, ..ModelConfig::default() }.build_crystal().unwrap();
    let spec = ints.basis(1).unwrap();
    let diag: Vec<f64> = (0..6)
        .map(|k| {
            let mu = local_excitons(&ints, &[k]).unwrap();
            exciton_row(&ints, &spec, &mu).unwrap().into_iter().find(|(nu, _)| *nu == mu).unwrap().1
        })
        .collect();
    assert!(diag.iter().all(|d| (d - diag[0]).abs() < 1e-14), "{diag:?}");
}

#[test]
fn single_exciton_rows_respect_the_sparsity_bound() {
    let ints = Arc::new(ModelConfig { n_sites: 9, t_hop: 0.3, ..ModelConfig::default() }.build_lattice().unwrap());
    let h = exciton_operator(ints, 1).unwrap();
    h.scan().unwrap();
    assert_eq!(h.s_max(), sparsity_bound(1, 1, 1));
}

#[test]
fn free_excitons_sit_at_the_gap() {
    let cfg = ModelConfig { n_sites: 3, u: 0.0, lambda_cd: 0.0, lambda_dd: 0.0, t_hop: 0.0, eps_gap: 1.3, ..ModelConfig::default() };
    let ints = cfg.build_lattice().unwrap();
    let a = assemble_dense(&ints, &ints.basis(1).unwrap()).unwrap();
    assert!(sorted_eigenvalues(&a).iter().all(|&e| e == 1.3));
}
