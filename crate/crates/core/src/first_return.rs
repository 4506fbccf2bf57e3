//! Law of `(X, φ)` at the first return `θ` of `Y` to its starting level.
//!
//! For an initial law `ν(0) e^{-λx} dx + P δ_0` satisfying the boundary
//! conditions,
//!
//! `μΦ(A_v) = -e^{-λv} (ν(0)/λ) Φ_λ + (P + ν(0)/λ) Φ`.

use crate::matops::{matpow, subvector, Matrix, RowVector};
use crate::model::{stability, InitialDistribution, Recurrence, SffmModel};
use crate::return_ops::ReturnOperators;
use crate::transient::{check_boundary, IntervalSet, TransientOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FirstReturnMeasure {
    pub values: RowVector,
    /// `μ([0,∞)) Φ`.
    pub const_part: RowVector,
    /// `e^{-λv} (ν(0)/λ) Φ_λ`, subtracted from `const_part`.
    pub decay_part: RowVector,
    /// Entries on `S^-`, reached by returns from above.
    pub psi_part: RowVector,
    /// Entries on `S^+`, reached by returns from below.
    pub xi_part: RowVector,
}

fn require(model: &SffmModel, init: &InitialDistribution, opts: &TransientOptions) -> Result<()> {
    let s = stability(model)?;
    if s.x == Recurrence::Null || s.y == Recurrence::Null {
        return Err(Error::NullRecurrent);
    }
    if !(opts.trust_certificate && init.is_certified()) {
        if let Some(c) = check_boundary(model, init, opts.boundary_order)
            .into_iter()
            .find(|c| !c.passed)
        {
            return Err(Error::Boundary { order: c.order, residual: c.residual });
        }
    }
    Ok(())
}

/// `μΦ(A_v)`; `v = 0` gives the mass with `X(θ) = 0`.
pub fn mu_phi(
    model: &SffmModel,
    init: &InitialDistribution,
    set: &IntervalSet,
    ops: &ReturnOperators,
    opts: &TransientOptions,
) -> Result<FirstReturnMeasure> {
    require(model, init, opts)?;
    let const_part = init.total() * &ops.phi;
    let decay_part = init.density_mass() * &ops.phi_lambda * set.tail(init.lambda);
    let values = &const_part - &decay_part;
    let part = model.partition();
    Ok(FirstReturnMeasure {
        psi_part: subvector(&values, &part.minus_r),
        xi_part: subvector(&values, &part.plus_r),
        values,
        const_part,
        decay_part,
    })
}

/// `μ M^n (A_v)`: the law at the `n`-th return, without killing.
///
/// The density part moves with `M̂_λ`, the atom part with `M`, and mass
/// crosses from the first to the second through `M - M̂_λ`.
pub fn visit_measure(
    init: &InitialDistribution,
    set: &IntervalSet,
    n: usize,
    ops: &ReturnOperators,
) -> RowVector {
    let dm = init.density_mass();
    let share = 1.0 - set.tail(init.lambda);
    let mut out = &dm * matpow(&ops.m_lambda, n) * share;
    if n > 0 {
        let cross = &ops.m - &ops.m_lambda;
        let mut left = dm.clone();
        for k in 0..n {
            out += &left * &cross * matpow(&ops.m, n - 1 - k);
            left *= &ops.m_lambda;
        }
    }
    out + &init.atom * matpow(&ops.m, n)
}

/// `-Σ_{n=1}^{N} (-1)^n μ M^n (A_v)`, which tends to `μΦ(A_v)` when the
/// spectral radius of `M` is below one.
pub fn alternating_series(
    model: &SffmModel,
    init: &InitialDistribution,
    set: &IntervalSet,
    ops: &ReturnOperators,
    terms: usize,
) -> RowVector {
    let mut sum = RowVector::zeros(model.n());
    for n in 1..=terms {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        sum += visit_measure(init, set, n, ops) * sign;
    }
    sum
}

/// Spectral radius of `M`.
pub fn spectral_radius(m: &Matrix) -> f64 {
    m.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| libm::hypot(z.re, z.im))
        .fold(0.0, f64::max)
}
