use std::sync::Arc;

use exspar::bse::exciton_operator;
use exspar::exbasis::{canonicalize, BasisSpec, ExcitationString, SparseState};
use exspar::model::ModelConfig;
use num_complex::Complex64;
use proptest::prelude::*;

fn parity(perm: &[usize]) -> i8 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] < perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn distinct(max: usize, len: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::sample::subsequence((0..max).collect::<Vec<_>>(), len).prop_shuffle()
}

fn string_of_rank(spec: BasisSpec, k: usize) -> impl Strategy<Value = ExcitationString> {
    (distinct(spec.n_occ, k), distinct(spec.n_virt, k)).prop_map(move |(h, p)| {
        let p: Vec<usize> = p.into_iter().map(|a| a + spec.n_occ).collect();
        canonicalize(&h, &p).unwrap().0
    })
}

fn string_in(spec: BasisSpec) -> impl Strategy<Value = ExcitationString> {
    (0..=spec.m).prop_flat_map(move |k| string_of_rank(spec, k))
}

fn state_in(spec: BasisSpec) -> impl Strategy<Value = SparseState> {
    proptest::collection::vec((string_in(spec), -1.0f64..1.0), 0..12).prop_map(SparseState::from_real)
}

/// States in the fixed-rank exciton sector.
fn sector_state() -> impl Strategy<Value = SparseState> {
    proptest::collection::vec((string_of_rank(spec(), 3), -1.0f64..1.0), 0..12).prop_map(SparseState::from_real)
}

fn close(a: &SparseState, b: &SparseState, tol: f64) -> bool {
    let mut d = a.clone();
    d.axpy(Complex64::new(-1.0, 0.0), b);
    d.norm() <= tol
}

fn spec() -> BasisSpec {
    BasisSpec::new(5, 5, 3, 1).unwrap()
}

proptest! {
    #[test]
    fn canonical_sign_is_permutation_parity(h in distinct(20, 4), p in distinct(20, 4)) {
        let (s, sign) = canonicalize(&h, &p).unwrap();
        let hl = s.hole_list();
        prop_assert!(hl.windows(2).all(|w| w[0] > w[1]));
        prop_assert!(s.particle_list().windows(2).all(|w| w[0] > w[1]));
        let rank = |xs: &[usize]| -> Vec<usize> { xs.iter().map(|x| xs.iter().filter(|y| *y > x).count()).collect() };
        let expected = parity(&rank(&h).iter().map(|r| 3 - r).collect::<Vec<_>>())
            * parity(&rank(&p).iter().map(|r| 3 - r).collect::<Vec<_>>());
        prop_assert_eq!(sign, expected);
    }

    #[test]
    fn repeated_indices_are_rejected(h in distinct(8, 2)) {
        prop_assert!(canonicalize(&[h[0], h[0]], &[1, 2]).is_err());
        prop_assert!(canonicalize(&h, &[3, 3]).is_err());
    }

    #[test]
    fn keys_round_trip(a in string_in(spec()), b in string_in(spec())) {
        let sp = spec();
        prop_assert_eq!(sp.decode(sp.encode(&a)).unwrap(), a.clone());
        prop_assert_eq!(sp.encode(&a) == sp.encode(&b), a == b);
    }

    #[test]
    fn state_algebra(x in state_in(spec()), y in state_in(spec()), c in -2.0f64..2.0) {
        let c = Complex64::new(c, 0.0);
        let mut s = x.clone();
        s.axpy(c, &y);
        let mut t = y.scaled(c);
        t.axpy(Complex64::new(1.0, 0.0), &x);
        prop_assert!(close(&s, &t, 1e-12));
        prop_assert!((x.dot(&x).re - x.norm_sqr()).abs() <= 1e-12);
        prop_assert!((x.dot(&y) - y.dot(&x).conj()).norm() <= 1e-12);
        prop_assert!(x.dot(&y).norm() <= x.norm() * y.norm() + 1e-12);
    }
}

fn small_model() -> Arc<exspar::model::IntegralSet> {
    let cfg = ModelConfig { n_sites: 5, lambda_cd: 0.4, lambda_dd: 0.2, u: 0.7, eps_screen: 2.5, ..ModelConfig::default() };
    Arc::new(cfg.build_lattice().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exciton_matvec_is_linear_and_symmetric(x in sector_state(), y in sector_state(), c in -2.0f64..2.0) {
        let h = exciton_operator(small_model(), 3).unwrap();
        let c = Complex64::new(c, 0.0);
        let mut xy = x.clone();
        xy.axpy(c, &y);
        let mut expected = h.apply(&x).unwrap();
        expected.axpy(c, &h.apply(&y).unwrap());
        prop_assert!(close(&h.apply(&xy).unwrap(), &expected, 1e-10));
        let lhs = x.dot(&h.apply(&y).unwrap());
        let rhs = h.apply(&x).unwrap().dot(&y);
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn exciton_rows_match_columns(mu in string_of_rank(spec(), 3)) {
        let h = exciton_operator(small_model(), 3).unwrap();
        for (nu, a) in h.row(&mu).unwrap() {
            let back = h.row(&nu).unwrap().into_iter().find(|(s, _)| *s == mu).map(|(_, v)| v);
            prop_assert_eq!(back, Some(a));
        }
    }
}
