//! Six-term values against expectations computed by integrating the forward
//! master equation of the particle system.

use qtazrp::exact::{two_point_value, EvalOptions, LatticeParams, Q5Route};
use serde::Deserialize;

#[derive(Deserialize)]
struct Record {
    #[serde(flatten)]
    params: LatticeParams,
    value: f64,
}

fn records() -> Vec<Record> {
    serde_json::from_str(include_str!("data/forward_oracle.json")).expect("oracle data parses")
}

#[test]
fn matches_forward_master_equation() {
    let opts = EvalOptions::default();
    let mut routes = Vec::new();
    for r in records() {
        let got = two_point_value(&r.params, &opts).unwrap_or_else(|e| panic!("{:?}: {e}", r.params));
        let tol = 1e-11 * r.value.abs().max(1.0);
        assert!(
            (got.total - r.value).abs() <= tol,
            "{:?}: got {}, expected {}",
            r.params,
            got.total,
            r.value
        );
        routes.push(got.diagnostics.q5_route);
    }
    for route in [Q5Route::Contour, Q5Route::Factorised, Q5Route::DualChain] {
        assert!(routes.contains(&route), "no oracle case takes the {} route", route.as_str());
    }
}

#[test]
fn canonical_instance() {
    let p = LatticeParams { q: 0.5, n1: 1, n2: 1, x1: 0, x2: 1, y1: 2, y2: 3, t: 1.0 };
    let oracle = records().into_iter().find(|r| r.params == p).expect("canonical case present");
    assert!((oracle.value - 2.194_342_759_061_487_7).abs() < 1e-15);
    let got = two_point_value(&p, &EvalOptions::default()).unwrap().total;
    assert!((got - oracle.value).abs() < 1e-12);
}
