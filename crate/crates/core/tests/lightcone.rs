use std::sync::Arc;

use exspar::bse::{exciton_operator, local_excitons};
use exspar::lcc::liouvillian_operator;
use exspar::lightcone::{fit_volume_exponent, probe, probe_with, within_lightcone, SparsityTrace, TracePoint};
use exspar::model::{IntegralSet, ModelConfig};
use exspar::Error;

fn lattice(dim: usize, n: usize, r_c: f64) -> Arc<IntegralSet> {
    Arc::new(ModelConfig { dim, n_sites: n, r_c, ..ModelConfig::default() }.build_lattice().unwrap())
}

#[test]
fn single_exciton_support_is_a_hexagonal_number() {
    let ints = lattice(1, 41, 1.0);
    let h = exciton_operator(ints.clone(), 1).unwrap();
    let trace = probe(&h, &ints, &local_excitons(&ints, &[20]).unwrap(), 8, 1_000_000).unwrap();
    for p in &trace.points {
        let d = p.iter;
        assert_eq!(p.nnz, 3 * d * d + 3 * d + 1, "d = {d}");
    }
}

#[test]
fn work_is_close_to_the_column_bound() {
    for (m, r_c) in [(1, 1.0), (2, 1.0), (1, 2.0)] {
        let ints = lattice(1, 41, r_c);
        let h = exciton_operator(ints.clone(), m).unwrap();
        let mu0 = local_excitons(&ints, &(20..20 + m).collect::<Vec<_>>()).unwrap();
        let trace = probe(&h, &ints, &mu0, 5, 1_000_000).unwrap();
        let ops = trace.points.last().unwrap().cum_ops;
        let est = trace.ops_upper_estimate();
        assert!(ops <= est && 4 * ops >= est, "m={m} R_c={r_c}: {ops} vs {est}");
    }
}

#[test]
fn longer_range_moves_stay_inside_the_cone() {
    let ints = lattice(2, 13, 2.0);
    let h = exciton_operator(ints.clone(), 1).unwrap();
    let mu0 = local_excitons(&ints, &[6 * 13 + 6]).unwrap();
    let mut tight = 0;
    probe_with(&h, &ints, &mu0, 3, 1_000_000, |k, x| {
        for s in x.keys() {
            assert!(within_lightcone(&ints, &mu0, s, k as f64 * ints.r_c()), "{s} after {k}");
            if k > 0 && !within_lightcone(&ints, &mu0, s, (k - 1) as f64 * ints.r_c()) {
                tight += 1;
            }
        }
    })
    .unwrap();
    assert!(tight > 0, "the cone bound is never approached");
}

#[test]
fn liouvillian_columns_spread_locally() {
    let ints = lattice(1, 21, 1.0);
    let h = liouvillian_operator(ints.clone(), 2).unwrap();
    let mu0 = local_excitons(&ints, &[10]).unwrap();
    let trace = probe(&h, &ints, &mu0, 3, 1_000_000).unwrap();
    let nnz: Vec<usize> = trace.points.iter().map(|p| p.nnz).collect();
    assert!(nnz.windows(2).all(|w| w[1] > w[0]), "{nnz:?}");
    assert!(nnz[3] < trace.basis_dim / 10);
}

#[test]
fn guard_aborts_cleanly() {
    let ints = lattice(2, 9, 1.0);
    let h = exciton_operator(ints.clone(), 2).unwrap();
    let mu0 = local_excitons(&ints, &[40, 41]).unwrap();
    let trace = probe(&h, &ints, &mu0, 10, 500).unwrap();
    assert!(trace.aborted);
    assert!(trace.points.len() < 11);
    assert!(matches!(trace.into_result(), Err(Error::Aborted { limit: 500, .. })));
}

#[test]
fn fit_recovers_a_planted_power() {
    let points = (0..=12)
        .map(|k| TracePoint { iter: k, nnz: (3.0 * (k as f64 + 0.5).powi(3)).round() as usize, cum_ops: 0, wall_ms: 0.0 })
        .collect();
    let trace = SparsityTrace {
        m: 1,
        dim: 1,
        r_c: 1.0,
        d: 12,
        origin: String::new(),
        basis_dim: 1 << 30,
        s_max: 1,
        points,
        max_support: usize::MAX,
        aborted: false,
    };
    assert!((fit_volume_exponent(&trace).unwrap() - 3.0).abs() < 0.01);
    let short = SparsityTrace { points: trace.points[..3].to_vec(), ..trace };
    assert!(fit_volume_exponent(&short).is_err());
}

#[test]
fn csv_columns() {
    let ints = lattice(1, 11, 1.0);
    let h = exciton_operator(ints.clone(), 1).unwrap();
    let trace = probe(&h, &ints, &local_excitons(&ints, &[5]).unwrap(), 2, 100).unwrap();
    assert_eq!(trace.to_csv().lines().next(), Some("iter,nnz,cum_ops,wall_ms"));
    let det = trace.to_csv_deterministic();
    let rows: Vec<Vec<&str>> = det.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["iter", "nnz", "cum_ops"]);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().skip(1).map(|r| r[1]).collect::<Vec<_>>(), ["1", "7", "19"]);
    assert!(rows.iter().all(|r| r.len() == 3));
}
