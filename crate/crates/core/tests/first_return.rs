mod common;

use common::*;
use sffm_core::catalog::example;
use sffm_core::first_return::*;
use sffm_core::matops::RiccatiOptions;
use sffm_core::return_ops::assemble;
use sffm_core::transient::{IntervalSet, TransientOptions};

fn opts() -> TransientOptions {
    TransientOptions::default()
}

#[test]
fn two_phase_first_return() {
    let (m, init) = example(5).unwrap();
    let ops = assemble(&m, init.lambda, &RiccatiOptions::default()).unwrap();
    let whole = mu_phi(&m, &init, &IntervalSet::whole(), &ops, &opts()).unwrap();
    assert!(close(&whole.values, &[0.4, 0.2], 1e-12));
    assert!(close(&(&init.density_mass() * &ops.phi_lambda), &[0.3, 0.2], 1e-12));
    for v in [0.0, 0.5, 1.0, 2.0] {
        let got = mu_phi(&m, &init, &IntervalSet::up_to(v).unwrap(), &ops, &opts()).unwrap();
        let e = (-v).exp();
        assert!(close(&got.values, &[0.4 - 0.3 * e, 0.2 - 0.2 * e], 1e-12), "v={v}");
        assert_eq!(got.xi_part.len(), 1);
        assert_eq!(got.psi_part[0], got.values[1]);
    }
    // The formula leaves mass 0.1 at X = 0 in the phase with c > 0, where the
    // process itself cannot put any; see the simulation tests.
    let zero = mu_phi(&m, &init, &IntervalSet::up_to(0.0).unwrap(), &ops, &opts()).unwrap();
    assert!(close(&zero.values, &[0.1, 0.0], 1e-12));
}

#[test]
fn four_phase_first_return() {
    let (m, init) = example(6).unwrap();
    let ops = assemble(&m, init.lambda, &RiccatiOptions::default()).unwrap();
    let order = m.partition().r_order();
    let r = mu_phi(&m, &init, &IntervalSet::up_to(0.0).unwrap(), &ops, &opts()).unwrap();
    let c = reorder(&r.const_part, &order);
    let d = reorder(&r.decay_part, &order);
    let want_c = [0.1387, 0.3137, 0.1939, 0.2861];
    let want_d = [0.1383, 0.1415, 0.1697, 0.1206];
    for j in 0..4 {
        assert!((c[j] - want_c[j]).abs() < 1e-4, "{c:?}");
        assert!((d[j] - want_d[j]).abs() < 1e-4, "{d:?}");
    }
    // Mass the formula assigns to X = 0, natural order.
    let at_zero = [0.0004, 0.0242, 0.1655, 0.1722];
    for j in 0..4 {
        assert!((r.values[j] - at_zero[j]).abs() < 2e-4, "{}", r.values);
    }
}

#[test]
fn alternating_visit_series_converges_to_first_return() {
    // A strongly drifting Y keeps the spectral radius of M below one.
    let mut p = sffm_core::catalog::tandem_params(1).unwrap();
    p.beta = 9.0;
    p.t_pm[(0, 0)] = 10.0;
    p.p_minus = vec![0.05];
    let (m, init) = sffm_core::model::build_tandem_model(&p).unwrap();
    let ops = assemble(&m, init.lambda, &RiccatiOptions::default()).unwrap();
    assert!(spectral_radius(&ops.m) < 1.0 && spectral_radius(&ops.m_lambda) < 1.0);
    for v in [0.0, 0.3, 1.0] {
        let set = IntervalSet::up_to(v).unwrap();
        let s = alternating_series(&m, &init, &set, &ops, 200);
        let exact = mu_phi(&m, &init, &set, &ops, &opts()).unwrap().values;
        assert!((s - exact).abs().max() < 1e-10, "v={v}");
    }
}

#[test]
fn first_visit_equals_first_return_mass() {
    // One step of M from μ, with the atom and density split, agrees with the
    // first-return formula once Φ replaces M.
    let (m, init) = example(5).unwrap();
    let ops = assemble(&m, init.lambda, &RiccatiOptions::default()).unwrap();
    let set = IntervalSet::up_to(1.0).unwrap();
    let v1 = visit_measure(&init, &set, 1, &ops);
    let e = (-1.0f64).exp();
    let want = init.total() * &ops.m - init.density_mass() * &ops.m_lambda * e;
    assert!((v1 - want).abs().max() < 1e-12);
    let v0 = visit_measure(&init, &set, 0, &ops);
    let want0 = &init.atom + init.density_mass() * (1.0 - e);
    assert!((v0 - want0).abs().max() < 1e-14);
}

#[test]
fn null_recurrent_is_refused() {
    let (m, init) = example(3).unwrap();
    let (m5, i5) = example(5).unwrap();
    let ops = assemble(&m5, i5.lambda, &RiccatiOptions::default()).unwrap();
    let err = mu_phi(&m, &init, &IntervalSet::whole(), &ops, &opts()).unwrap_err();
    assert_eq!(err.to_string(), "first-return formula requires non-null-recurrent X and Y");
}
