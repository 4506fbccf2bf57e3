#![allow(dead_code)]

use proptest::prelude::*;
use sffm_core::model::{build_tandem_model, TandemParams};
use sffm_core::{InitialDistribution, Matrix, RowVector, SffmModel};

pub fn row(v: &[f64]) -> RowVector {
    RowVector::from_row_slice(v)
}

pub fn close(a: &RowVector, b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

pub fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).abs().max()
}

/// Reorders a natural-order row vector into the given phase order.
pub fn reorder(v: &RowVector, order: &[usize]) -> Vec<f64> {
    order.iter().map(|&i| v[i]).collect()
}

/// `Σ over words w ∈ {Q, -C'}^m with k letters -C'` by enumerating all `2^m` words.
pub fn h_by_words(q: &Matrix, c_prime: &[f64], k: usize, m: usize) -> Matrix {
    let n = q.nrows();
    let neg_c = Matrix::from_fn(n, n, |i, j| if i == j { -c_prime[i] } else { 0.0 });
    let mut total = Matrix::zeros(n, n);
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut p = Matrix::identity(n, n);
        for bit in 0..m {
            p = if mask & (1 << bit) != 0 { p * &neg_c } else { p * q };
        }
        total += p;
    }
    total
}

/// Censors a generator by eliminating states one at a time from its jump
/// chain, then rebuilding rates from the original holding rates.
pub fn censor_by_jump_chain(t: &Matrix, zero: &[usize]) -> Matrix {
    let n = t.nrows();
    let mut p = Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { t[(i, j)] / -t[(i, i)] });
    let mut alive: Vec<usize> = (0..n).collect();
    for &z in zero {
        alive.retain(|&i| i != z);
        let stay = p[(z, z)];
        for &i in &alive {
            for &j in &alive {
                p[(i, j)] += p[(i, z)] * p[(z, j)] / (1.0 - stay);
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|i| !zero.contains(i)).collect();
    let m = keep.len();
    let mut out = Matrix::zeros(m, m);
    for (a, &i) in keep.iter().enumerate() {
        let q = -t[(i, i)];
        for (b, &j) in keep.iter().enumerate() {
            if a != b {
                out[(a, b)] = q * p[(i, j)];
            }
        }
        let s: f64 = out.row(a).sum();
        out[(a, a)] = -s;
    }
    out
}

/// A random tandem model with `np` phases of positive `c` and `nm` of
/// negative `c`.
pub fn tandem_strategy(max_phases: usize) -> impl Strategy<Value = TandemParams> {
    tandem_strategy_in(max_phases, 0.3..2.0, 0.3..2.0, 0.5..2.0)
}

/// As [`tandem_strategy`] with the ranges of `b`, `β` and `γ` given.
pub fn tandem_strategy_in(
    max_phases: usize,
    b: core::ops::Range<f64>,
    beta: core::ops::Range<f64>,
    gamma: core::ops::Range<f64>,
) -> impl Strategy<Value = TandemParams> {
    (1..max_phases, 1..max_phases)
        .prop_filter("size", move |(a, b)| a + b <= max_phases)
        .prop_flat_map(move |(np, nm)| {
            let n = np + nm;
            (
                b.clone(),
                beta.clone(),
                gamma.clone(),
                prop::collection::vec(0.1f64..1.0, np * nm),
                prop::collection::vec(0.1f64..1.0, nm * np),
                prop::collection::vec(0.5f64..2.0, n),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(0.0f64..1.0, nm),
                0.0f64..0.95,
                Just((np, nm)),
                prop::collection::vec(any::<bool>(), n),
            )
        })
        .prop_map(|(b, beta, gamma, wpm, wmp, abs_r, rs, pw, frac, (np, nm), cperm)| {
            let n = np + nm;
            let normalise = |w: &[f64], rows: usize, cols: usize, total: f64| {
                Matrix::from_fn(rows, cols, |i, j| {
                    let s: f64 = w[i * cols..(i + 1) * cols].iter().sum();
                    w[i * cols + j] / s * total
                })
            };
            // Scatter the c-signs over the phases.
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by_key(|&i| (cperm[i], i));
            let mut c_signs = vec![-1i8; n];
            for &i in idx.iter().take(np) {
                c_signs[i] = 1;
            }
            let mut r_signs: Vec<i8> = rs.iter().map(|&s| if s { 1 } else { -1 }).collect();
            // Keep both r-sign classes nonempty.
            if r_signs.iter().all(|&s| s == 1) {
                r_signs[0] = -1;
            }
            if r_signs.iter().all(|&s| s == -1) {
                r_signs[n - 1] = 1;
            }
            let lambda = beta / gamma;
            let bound = lambda * gamma / (b + lambda * gamma);
            let psum: f64 = pw.iter().sum::<f64>().max(1e-9);
            let p_minus = pw.iter().map(|x| x / psum * bound * frac).collect();
            TandemParams {
                b,
                beta,
                gamma,
                t_pm: normalise(&wpm, np, nm, b + beta),
                t_mp: normalise(&wmp, nm, np, b),
                abs_r,
                r_signs,
                c_signs,
                p_minus,
                nu_minus_weights: None,
            }
        })
}

pub fn build(p: &TandemParams) -> (SffmModel, InitialDistribution) {
    build_tandem_model(p).expect("valid tandem")
}

/// A random irreducible generator with strictly positive off-diagonal rates.
pub fn generator_strategy(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(0.05f64..3.0, n * n).prop_map(move |w| {
        let mut t = Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { w[i * n + j] });
        for i in 0..n {
            let s: f64 = t.row(i).sum();
            t[(i, i)] = -s;
        }
        t
    })
}

/// `count` values drawn from `strategy` with a fixed-seed runner.
pub fn sample<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).expect("strategy generates").current())
        .collect()
}
