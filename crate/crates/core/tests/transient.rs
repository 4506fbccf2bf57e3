mod common;

use common::*;
use sffm_core::catalog::example;
use sffm_core::matops::Matrix;
use sffm_core::model::InitialDistribution;
use sffm_core::transient::*;
use sffm_core::Error;

fn opts() -> TransientOptions {
    TransientOptions::default()
}

fn strict() -> TransientOptions {
    TransientOptions { trust_certificate: false, ..Default::default() }
}

#[test]
fn weights_two_phase() {
    let (m, _) = example(1).unwrap();
    let t = WeightTable::new(&m, 8);
    assert!(max_diff(t.h(1, 2), &Matrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, -2.0])) < 1e-15);
    for n in 0..=8 {
        for k in 0..=n {
            assert!(max_diff(t.h(k, n), &h_by_words(&t.q, &t.c_prime, k, n)) < 1e-9);
        }
        assert!(t.sum_identity_error(n) <= 1e-10);
    }
}

#[test]
fn first_derivative_of_atom() {
    let (m, init) = example(1).unwrap();
    let d = dn_measure(&m, &init, 1, &IntervalSet::up_to(0.0).unwrap(), &strict()).unwrap();
    assert!(close(&d.values, &[0.0, 0.4], 1e-14), "{}", d.values);
    let d0 = dn_measure(&m, &init, 0, &IntervalSet::whole(), &strict()).unwrap();
    assert!(close(&d0.values, &[0.2, 0.8], 1e-14));
}

#[test]
fn boundary_checks_pass_for_tandem_models() {
    for k in 1..=6 {
        let (m, init) = example(k).unwrap();
        for c in check_boundary(&m, &init, 8) {
            assert!(c.passed, "example {k} order {}: {}", c.order, c.residual);
        }
    }
}

#[test]
fn perturbed_density_fails_at_order_zero() {
    let (m, init) = example(1).unwrap();
    let bad = InitialDistribution::new(&m, 1.0, row(&[0.25, 0.55]), init.atom.clone()).unwrap();
    let checks = check_boundary(&m, &bad, 3);
    assert!(!checks[0].passed);
    let err = mu_exp_dy(&m, &bad, 1.0, &IntervalSet::whole(), &opts()).unwrap_err();
    assert!(matches!(err, Error::Boundary { order: 0, .. }));
}

#[test]
fn boundary_values_follow_exponential_form() {
    let (m, init) = example(1).unwrap();
    let plus = &m.partition().plus_c;
    for n in 0..=6 {
        let b = boundary_rhs(&m, &init, n);
        assert!(b.agree);
        let want: Vec<f64> = plus.iter().map(|&j| (-init.lambda).powi(n as i32) * init.nu0[j]).collect();
        assert!(close(&b.recursive, &want, 1e-10), "n={n}: {}", b.recursive);
        assert!(close(&b.closed_form, &want, 1e-10));
    }
}

#[test]
fn first_boundary_recursion_by_hand() {
    // ν_+^{(1)}(0) = A(2) - A(1) F(1, 2).
    let (m, init) = example(4).unwrap();
    let w = BoundaryWeights::new(&m, &init, 2);
    let t = WeightTable::new(&m, 2);
    let plus = &m.partition().plus_c;
    let f12 = sffm_core::matops::submatrix(t.f(1, 2), plus, plus);
    let want = w.a(2) - w.a(1) * f12;
    let got = boundary_rhs(&m, &init, 1);
    assert!((got.recursive - want).abs().max() < 1e-14);
}

#[test]
fn closed_form_two_phase() {
    let (m, init) = example(1).unwrap();
    for y in [0.1, 1.0, 3.0] {
        let d = mass_decomposition(&m, &init, y, &opts()).unwrap();
        assert!((d.marginal.sum() - 1.0).abs() < 1e-13);
        // No mass at X = 0 in the phase with c > 0.
        assert!(d.at_zero[0].abs() < 1e-12, "{}", d.at_zero);
        let v = mu_exp_dy(&m, &init, y, &IntervalSet::up_to(1.0).unwrap(), &opts()).unwrap();
        let tail = (-1.0f64).exp();
        let want = &d.marginal - &d.above_zero * tail;
        assert!((v.values - want).abs().max() < 1e-14);
    }
}

#[test]
fn y_zero_is_initial_law() {
    let (m, init) = example(6).unwrap();
    for v in [0.0, 0.5, 3.0] {
        let got = mu_exp_dy(&m, &init, 0.0, &IntervalSet::up_to(v).unwrap(), &opts()).unwrap();
        let want = &init.atom + &init.nu0 * ((1.0 - (-init.lambda * v).exp()) / init.lambda);
        assert!((got.values - want).abs().max() < 1e-14);
    }
}

#[test]
fn series_matches_closed_form() {
    for k in [1, 6] {
        let (m, init) = example(k).unwrap();
        for y in [0.1, 0.5, 1.0] {
            for v in [0.5, 2.0] {
                let set = IntervalSet::up_to(v).unwrap();
                let closed = mu_exp_dy(&m, &init, y, &set, &opts()).unwrap().values;
                let series = series_mu_exp_dy(&m, &init, y, &set, 30);
                assert!((closed - series).abs().max() <= 1e-8, "example {k} y={y} v={v}");
            }
        }
    }
    let (m, init) = example(1).unwrap();
    let set = IntervalSet::up_to(1.0).unwrap();
    let closed = mu_exp_dy(&m, &init, 0.1, &set, &opts()).unwrap().values;
    assert!((closed - series_mu_exp_dy(&m, &init, 0.1, &set, 20)).abs().max() <= 1e-10);
}

#[test]
fn large_y_limits() {
    let (m, init) = example(5).unwrap();
    let third = 1.0 / 3.0;
    for (v, want) in [
        (0.0, [0.0, third]),
        (1.0, [third - (-1.0f64).exp() * third, 2.0 * third - (-1.0f64).exp() * third]),
        (f64::INFINITY, [third, 2.0 * third]),
    ] {
        let l = limit_y_infinity(&m, &init, &IntervalSet::up_to(v).unwrap(), &opts()).unwrap();
        assert!(close(&l.values, &want, 1e-9), "v={v}: {}", l.values);
    }

    let (m, init) = example(6).unwrap();
    let order = m.partition().r_order();
    let l = limit_y_infinity(&m, &init, &IntervalSet::whole(), &opts()).unwrap();
    let coef_const = reorder(&l.values, &order);
    let coef_decay = reorder(&l.density_part, &order);
    let want_const = [0.1333, 0.3333, 0.2000, 0.3333];
    let want_decay = [0.1333, 0.1667, 0.2000, 0.1667];
    for j in 0..4 {
        assert!((coef_const[j] - want_const[j]).abs() < 1e-4);
        assert!((coef_decay[j] - want_decay[j]).abs() < 1e-4);
    }
}

#[test]
fn negative_y_rejected() {
    let (m, init) = example(1).unwrap();
    assert!(mu_exp_dy(&m, &init, -1.0, &IntervalSet::whole(), &opts()).is_err());
    assert!(IntervalSet::up_to(-0.5).is_err());
}
