use std::collections::BTreeMap;

use exspar::estimator::{
    classical_cost, qubit_count, quantum_cost, render_table, speedup, table, CostExpr, Exp, InputModel, Method,
    ScenarioConfig, Symbol,
};

fn scenario(method: Method, input: InputModel) -> ScenarioConfig {
    ScenarioConfig::new(method, input, 3, 3)
}

#[test]
fn rendering() {
    assert_eq!(CostExpr::one().to_string(), "1");
    assert_eq!(CostExpr::polylog_one().to_string(), "1 * polylog");
    assert_eq!(CostExpr::d_rc(2, 3).to_string(), "d^2 * Rc^3");
    let half = CostExpr::one().times(Symbol::D, Exp::new(19, 6));
    assert_eq!(half.to_string(), "d^(19/6)");
    assert_eq!(CostExpr::sym(Symbol::InvGamma, 1).to_string(), "(1/gamma)");
}

#[test]
fn lc_folding_round_trips() {
    let e = CostExpr::d_rc(7, 9).mul(&CostExpr::sym(Symbol::V, 1));
    let lc = e.lc_form();
    assert_eq!(lc.exponent(Symbol::Lc), Exp::from_integer(7));
    assert_eq!(lc.exponent(Symbol::Rc), Exp::from_integer(2));
    assert_eq!(lc.exponent(Symbol::D), Exp::from_integer(0));
    assert!(lc.same_monomial(&e));
    assert_eq!(lc.expand(), e);
    assert_eq!(e.div(&e), CostExpr::one());
    assert_eq!(e.pow(2), e.mul(&e));
}

#[test]
fn dominant_term_of_a_sum() {
    let a = CostExpr::d_rc(1, 3);
    let b = CostExpr::sym(Symbol::Lc, 2);
    assert!(!b.dominates(&a) && a.dominates(&CostExpr::one()));
    assert_eq!(CostExpr::dominant(&[CostExpr::polylog_one(), a.clone()]), a);
    assert_eq!(CostExpr::dominant(&[CostExpr::polylog_one(), CostExpr::one()]), CostExpr::polylog_one());
}

#[test]
fn eval_expands_lc() {
    let vals = BTreeMap::from([(Symbol::D, 2.0), (Symbol::Rc, 3.0)]);
    assert_eq!(CostExpr::sym(Symbol::Lc, 2).eval(&vals), 36.0);
    assert_eq!(CostExpr::d_rc(1, 2).eval(&vals), 18.0);
}

#[test]
fn speedup_ratios_for_three_dimensions() {
    let cases = [
        (Method::Bse, InputModel::Integrals, "Lc^12", (19.0 / 7.0, 21.0 / 9.0)),
        (Method::Bse, InputModel::Atomic, "Lc^15", (19.0 / 4.0, 21.0 / 6.0)),
        (Method::Bse, InputModel::Crystal, "Lc^18", (19.0, 7.0)),
    ];
    for (method, input, ratio, power) in cases {
        let s = speedup(&scenario(method, input));
        assert_eq!(s.ratio.to_string(), ratio, "{method:?} {input}");
        assert!((s.power_raw.0 - power.0).abs() < 1e-12 && (s.power_raw.1 - power.1).abs() < 1e-12);
    }
    let lcc = speedup(&scenario(Method::Lcc, InputModel::Integrals));
    assert_eq!(lcc.ratio.to_string(), "d^6 * Lc^12");
    assert!((lcc.power_table.0 - 19.0 / 6.0).abs() < 1e-12);
}

#[test]
fn overlap_and_com_factors() {
    let mut sc = scenario(Method::Bse, InputModel::Crystal);
    let base = quantum_cost(&sc);
    sc.include_overlap = true;
    assert_eq!(quantum_cost(&sc), base.mul(&CostExpr::sym(Symbol::InvGamma, 1)));
    let pinned = classical_cost(Method::Bse, 3, 3, false, false);
    let free = classical_cost(Method::Bse, 3, 3, false, true);
    assert_eq!(free, pinned.mul(&CostExpr::sym(Symbol::V, 1)));
    assert_eq!(classical_cost(Method::Lcc, 1, 1, true, false), CostExpr::d_rc(3, 3));
    assert_eq!(classical_cost(Method::Lcc, 1, 1, false, false).exponent(Symbol::V), Exp::from_integer(1));
}

#[test]
fn qubits() {
    let q = qubit_count(100_000, 3);
    assert_eq!((q.packed, q.per_excitation), (102, 99));
    assert_eq!(qubit_count(16, 1).packed, 8);
    assert_eq!(qubit_count(17, 1).packed, 10);
    assert_eq!(qubit_count(2, 2).packed, 4);
}

#[test]
fn rendered_table_has_one_line_per_row() {
    let rows = table(3, 3, &[Method::Bse, Method::Lcc], &InputModel::ALL, false);
    assert_eq!(rows.len(), 6);
    let text = render_table(&rows);
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().next().unwrap().starts_with("method"));
    assert!(text.contains("(19, 7)"));
}
