//! Law of `(X, φ)` at the time `ω(y)` when `Ŷ = ∫|r|` first reaches `y`.
//!
//! The operator `D` acts on measures on `[0, ∞) × phases` and `μ e^{D y}` is the
//! law at `ω(y)` for an initial law `μ`. For initial laws of the form
//! `ν(0) e^{-λx} dx + P δ_0` satisfying the boundary conditions, the closed form
//! is
//!
//! `μ e^{Dy}(A_v) = -e^{-λv} (ν(0)/λ) e^{Q_λ y} + μ([0,∞)) e^{Q y}`,
//!
//! where `A_v = [0, v] × phases`. The power-series expansion in `D^n μ` is
//! provided as an independent check.

use alloc::vec;
use alloc::vec::Vec;

use crate::matops::{expm, max_abs, subvector, zero_eigen_projection, Matrix, RowVector};
use crate::model::{InitialDistribution, SffmModel};
use crate::{Error, Result};

/// `[0, v]` for finite `v`, or the whole half line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSet {
    upper: Option<f64>,
}

impl IntervalSet {
    pub fn up_to(v: f64) -> Result<Self> {
        if !(v >= 0.0) {
            return Err(Error::BadArgument { what: "v", value: v });
        }
        Ok(Self {
            upper: if v.is_finite() { Some(v) } else { None },
        })
    }

    pub fn whole() -> Self {
        Self { upper: None }
    }

    pub fn upper(&self) -> f64 {
        self.upper.unwrap_or(f64::INFINITY)
    }

    /// `e^{-λv}`, the share of an `Exp(λ)` density beyond `v`.
    pub fn tail(&self, lambda: f64) -> f64 {
        match self.upper {
            Some(v) => libm::exp(-lambda * v),
            None => 0.0,
        }
    }
}

/// A measure evaluated on `A_v`, split into the contribution of the initial
/// density on `(0, v]` and the remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientMeasure {
    pub values: RowVector,
    pub density_part: RowVector,
    pub atom_part: RowVector,
}

impl TransientMeasure {
    fn new(density_part: RowVector, atom_part: RowVector) -> Self {
        Self {
            values: &density_part + &atom_part,
            density_part,
            atom_part,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TransientOptions {
    /// Highest order at which boundary conditions are checked.
    pub boundary_order: usize,
    /// Skip the check for distributions certified by construction.
    pub trust_certificate: bool,
}

impl Default for TransientOptions {
    fn default() -> Self {
        Self {
            boundary_order: 5,
            trust_certificate: true,
        }
    }
}

/// The weights `h(k, m)`, sums of all products of `k` factors `-C'` and `m - k`
/// factors `Q`, and `f(k, m) = h(k, m) (-C')^{-m}`, for all `m ≤ order`.
#[derive(Debug, Clone)]
pub struct WeightTable {
    pub order: usize,
    h: Vec<Vec<Matrix>>,
    f: Vec<Vec<Matrix>>,
    pub q: Matrix,
    pub c_prime: Vec<f64>,
}

impl WeightTable {
    pub fn new(model: &SffmModel, order: usize) -> Self {
        let q = model.fluid_generator();
        let cp = model.c_prime();
        let n = model.n();
        let neg_c: Vec<f64> = cp.iter().map(|x| -x).collect();
        let mut h: Vec<Vec<Matrix>> = vec![vec![Matrix::identity(n, n)]];
        for m in 0..order {
            let prev = &h[m];
            let mut next = Vec::with_capacity(m + 2);
            for k in 0..=m + 1 {
                let mut x = if k <= m { &prev[k] * &q } else { Matrix::zeros(n, n) };
                if k >= 1 {
                    let mut y = prev[k - 1].clone();
                    scale_columns(&mut y, &neg_c);
                    x += y;
                }
                next.push(x);
            }
            h.push(next);
        }
        let f = h
            .iter()
            .enumerate()
            .map(|(m, row)| {
                let s: Vec<f64> = neg_c.iter().map(|x| libm::pow(*x, -(m as f64))).collect();
                row.iter()
                    .map(|hk| {
                        let mut x = hk.clone();
                        scale_columns(&mut x, &s);
                        x
                    })
                    .collect()
            })
            .collect();
        Self { order, h, f, q, c_prime: cp }
    }

    pub fn h(&self, k: usize, m: usize) -> &Matrix {
        &self.h[m][k]
    }

    pub fn f(&self, k: usize, m: usize) -> &Matrix {
        &self.f[m][k]
    }

    /// Relative error of `Σ_k h(k, m) = (Q - C')^m`.
    pub fn sum_identity_error(&self, m: usize) -> f64 {
        let n = self.q.nrows();
        let mut base = self.q.clone();
        for i in 0..n {
            base[(i, i)] -= self.c_prime[i];
        }
        let want = crate::matops::matpow(&base, m);
        let got = self.h[m].iter().fold(Matrix::zeros(n, n), |acc, x| acc + x);
        (got - &want).abs().max() / want.abs().max().max(1.0)
    }
}

fn scale_columns(x: &mut Matrix, s: &[f64]) {
    for (j, mut col) in x.column_iter_mut().enumerate() {
        col *= s[j];
    }
}

/// `ν^{(k)}(0) = (-λ)^k ν(0)`.
fn nu_derivative(init: &InitialDistribution, k: usize) -> RowVector {
    &init.nu0 * libm::pow(-init.lambda, k as f64)
}

/// `D^n P = P Q^n + Σ_{k=1}^n ν^{(k-1)}(0) h(k, n)`.
fn dn_atom(table: &WeightTable, init: &InitialDistribution, n: usize) -> (RowVector, f64) {
    let mut out = &init.atom * table.h(0, n);
    let mut scale = max_abs(&out);
    for k in 1..=n {
        let term = nu_derivative(init, k - 1) * table.h(k, n);
        scale = scale.max(max_abs(&term));
        out += term;
    }
    (out, scale)
}

/// `D^n ν(0) = Σ_k ν^{(k)}(0) h(k, n)`.
fn dn_density_at_zero(table: &WeightTable, init: &InitialDistribution, n: usize) -> (RowVector, f64) {
    let mut out = RowVector::zeros(init.nu0.len());
    let mut scale: f64 = 0.0;
    for k in 0..=n {
        let term = nu_derivative(init, k) * table.h(k, n);
        scale = scale.max(max_abs(&term));
        out += term;
    }
    (out, scale)
}

fn dn_from_table(
    table: &WeightTable,
    init: &InitialDistribution,
    n: usize,
    set: &IntervalSet,
) -> TransientMeasure {
    let share = (1.0 - set.tail(init.lambda)) / init.lambda;
    let mut density = RowVector::zeros(init.nu0.len());
    for k in 0..=n {
        density += nu_derivative(init, k) * table.h(k, n) * share;
    }
    let (atom, _) = dn_atom(table, init, n);
    TransientMeasure::new(density, atom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCheck {
    pub order: usize,
    /// `D^n ν_+(0)`.
    pub lhs: RowVector,
    /// `D^n P_- (|R_-|^{-1} T_{-+}) (|R_+|^{-1} C_+)^{-1}`.
    pub rhs: RowVector,
    pub residual: f64,
    pub passed: bool,
}

/// Boundary conditions at orders `0..=max_order`.
pub fn check_boundary(model: &SffmModel, init: &InitialDistribution, max_order: usize) -> Vec<BoundaryCheck> {
    let table = WeightTable::new(model, max_order);
    check_with_table(model, &table, init, max_order)
}

fn check_with_table(
    model: &SffmModel,
    table: &WeightTable,
    init: &InitialDistribution,
    max_order: usize,
) -> Vec<BoundaryCheck> {
    let part = model.partition();
    let (plus, minus) = (&part.plus_c, &part.minus_c);
    let q_mp = crate::matops::submatrix(&table.q, minus, plus);
    let inv_c: Vec<f64> = plus.iter().map(|&j| 1.0 / table.c_prime[j]).collect();
    (0..=max_order)
        .map(|n| {
            let (dnu, s1) = dn_density_at_zero(table, init, n);
            let (dp, s2) = dn_atom(table, init, n);
            let lhs = subvector(&dnu, plus);
            let mut rhs = subvector(&dp, minus) * &q_mp;
            for (j, x) in rhs.iter_mut().enumerate() {
                *x *= inv_c[j];
            }
            let residual = max_abs(&(&lhs - &rhs));
            let scale = s1.max(s2).max(1.0);
            BoundaryCheck {
                order: n,
                passed: residual <= 1e-9 * scale,
                lhs,
                rhs,
                residual,
            }
        })
        .collect()
}

fn require_boundary(
    model: &SffmModel,
    table: &WeightTable,
    init: &InitialDistribution,
    order: usize,
    opts: &TransientOptions,
) -> Result<()> {
    if opts.trust_certificate && init.is_certified() {
        return Ok(());
    }
    for c in check_with_table(model, table, init, order) {
        if !c.passed {
            return Err(Error::Boundary { order: c.order, residual: c.residual });
        }
    }
    Ok(())
}

/// `D^n μ(A_v)`.
///
/// Requires the boundary conditions through order `n`; also confirms that
/// `D^n P` carries no mass on phases with `c > 0`.
pub fn dn_measure(
    model: &SffmModel,
    init: &InitialDistribution,
    n: usize,
    set: &IntervalSet,
    opts: &TransientOptions,
) -> Result<TransientMeasure> {
    let table = WeightTable::new(model, n);
    require_boundary(model, &table, init, n, opts)?;
    let (dp, scale) = dn_atom(&table, init, n);
    let plus = &model.partition().plus_c;
    let leak = max_abs(&subvector(&dp, plus));
    if leak > 1e-9 * scale.max(1.0) {
        return Err(Error::Boundary { order: n.saturating_sub(1), residual: leak });
    }
    Ok(dn_from_table(&table, init, n, set))
}

/// `Σ_{n=0}^{N} y^n/n! D^n μ(A_v)`, the truncated series for `μ e^{Dy}(A_v)`.
pub fn series_mu_exp_dy(
    model: &SffmModel,
    init: &InitialDistribution,
    y: f64,
    set: &IntervalSet,
    terms: usize,
) -> RowVector {
    let table = WeightTable::new(model, terms);
    let mut sum = RowVector::zeros(model.n());
    let mut coef = 1.0;
    for n in 0..=terms {
        if n > 0 {
            coef *= y / n as f64;
        }
        sum += dn_from_table(&table, init, n, set).values * coef;
    }
    sum
}

fn check_y(y: f64) -> Result<()> {
    if !(y >= 0.0 && y.is_finite()) {
        return Err(Error::BadArgument { what: "y", value: y });
    }
    Ok(())
}

/// `μ e^{Dy}(A_v)` in closed form.
pub fn mu_exp_dy(
    model: &SffmModel,
    init: &InitialDistribution,
    y: f64,
    set: &IntervalSet,
    opts: &TransientOptions,
) -> Result<TransientMeasure> {
    check_y(y)?;
    let table = WeightTable::new(model, opts.boundary_order);
    require_boundary(model, &table, init, opts.boundary_order, opts)?;
    let d = mass_parts(model, init, y)?;
    let share = 1.0 - set.tail(init.lambda);
    Ok(TransientMeasure::new(&d.above_zero * share, d.at_zero))
}

/// Phase marginal at `ω(y)` split into `X = 0` and `X > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassDecomposition {
    pub at_zero: RowVector,
    pub above_zero: RowVector,
    pub marginal: RowVector,
}

fn mass_parts(model: &SffmModel, init: &InitialDistribution, y: f64) -> Result<MassDecomposition> {
    let e = expm(&(model.fluid_generator() * y))?;
    let el = expm(&(model.tilted_generator(init.lambda) * y))?;
    let marginal = init.total() * e;
    let above_zero = init.density_mass() * el;
    Ok(MassDecomposition {
        at_zero: &marginal - &above_zero,
        above_zero,
        marginal,
    })
}

pub fn mass_decomposition(
    model: &SffmModel,
    init: &InitialDistribution,
    y: f64,
    opts: &TransientOptions,
) -> Result<MassDecomposition> {
    check_y(y)?;
    let table = WeightTable::new(model, opts.boundary_order);
    require_boundary(model, &table, init, opts.boundary_order, opts)?;
    mass_parts(model, init, y)
}

/// `lim_{y→∞} μ e^{Dy}(A_v)`, from the zero-eigenvalue projectors of `Q` and `Q_λ`.
pub fn limit_y_infinity(
    model: &SffmModel,
    init: &InitialDistribution,
    set: &IntervalSet,
    opts: &TransientOptions,
) -> Result<TransientMeasure> {
    let table = WeightTable::new(model, opts.boundary_order);
    require_boundary(model, &table, init, opts.boundary_order, opts)?;
    let p0 = zero_eigen_projection(&model.fluid_generator())?;
    let p0l = zero_eigen_projection(&model.tilted_generator(init.lambda))?;
    let above = init.density_mass() * p0l;
    let marginal = init.total() * p0;
    let share = 1.0 - set.tail(init.lambda);
    Ok(TransientMeasure::new(&above * share, marginal - above))
}

/// Boundary weights `A(m)`, `M(ℓ, m)` and `B(m)` for `m ≤ order`.
#[derive(Debug, Clone)]
pub struct BoundaryWeights {
    a: Vec<RowVector>,
    chains: Vec<Vec<RowVector>>,
}

impl BoundaryWeights {
    pub fn new(model: &SffmModel, init: &InitialDistribution, order: usize) -> Self {
        let table = WeightTable::new(model, order);
        Self::from_table(model, &table, init)
    }

    fn from_table(model: &SffmModel, table: &WeightTable, init: &InitialDistribution) -> Self {
        let part = model.partition();
        let (plus, minus) = (&part.plus_c, &part.minus_c);
        let p_minus = subvector(&init.atom, minus);
        let order = table.order;
        let np = plus.len();
        let mut a = vec![RowVector::zeros(np)];
        for m in 1..=order {
            let mut x = -(&p_minus * crate::matops::submatrix(table.f(0, m), minus, plus));
            for k in 1..m {
                let nu = subvector(&nu_derivative(init, k - 1), minus);
                x -= nu * crate::matops::submatrix(table.f(k, m), minus, plus);
            }
            a.push(x);
        }
        // chains[ℓ][m] = (-1)^ℓ Σ_{k_1<…<k_ℓ<m} A(k_1) F(k_1,k_2) … F(k_ℓ,m)
        let f_pp = |k: usize, m: usize| crate::matops::submatrix(table.f(k, m), plus, plus);
        let mut chains = vec![a.clone()];
        for l in 1..order.max(1) {
            let prev = &chains[l - 1];
            let mut cur = vec![RowVector::zeros(np); order + 1];
            for m in (l + 1)..=order {
                let mut acc = RowVector::zeros(np);
                for k in l..m {
                    acc -= &prev[k] * f_pp(k, m);
                }
                cur[m] = acc;
            }
            chains.push(cur);
        }
        Self { a, chains }
    }

    pub fn a(&self, m: usize) -> &RowVector {
        &self.a[m]
    }

    /// `M(ℓ, m)`; zero when the chain is too long to fit below `m`.
    pub fn chain(&self, l: usize, m: usize) -> RowVector {
        self.chains
            .get(l)
            .map(|c| c[m].clone())
            .unwrap_or_else(|| RowVector::zeros(self.a[0].len()))
    }

    /// `B(m) = Σ_{ℓ=1}^{m-1} M(ℓ, m)`.
    pub fn b(&self, m: usize) -> RowVector {
        let mut out = RowVector::zeros(self.a[0].len());
        for l in 1..m {
            out += self.chain(l, m);
        }
        out
    }
}

/// The value `ν_+^{(n)}(0)` must take for the boundary condition at order `n`,
/// by recursion over lower orders and in closed form `A(n+1) + B(n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRhs {
    pub recursive: RowVector,
    pub closed_form: RowVector,
    /// Largest entry among the recursion's summands; rounding error scales
    /// with it rather than with the result.
    pub magnitude: f64,
    pub agree: bool,
}

pub fn boundary_rhs(model: &SffmModel, init: &InitialDistribution, n: usize) -> BoundaryRhs {
    let table = WeightTable::new(model, n + 1);
    let w = BoundaryWeights::from_table(model, &table, init);
    let plus = &model.partition().plus_c;
    // rec[m] = ν_+^{(m-1)}(0) determined by the conditions below order m.
    let mut rec: Vec<RowVector> = vec![RowVector::zeros(plus.len())];
    let mut magnitude: f64 = 1.0;
    for m in 1..=n + 1 {
        let mut x = w.a(m).clone();
        magnitude = magnitude.max(max_abs(&x));
        for k in 1..m {
            let term = &rec[k] * crate::matops::submatrix(table.f(k, m), plus, plus);
            magnitude = magnitude.max(max_abs(&term));
            x -= term;
        }
        rec.push(x);
    }
    let recursive = rec.pop().expect("nonempty");
    let closed_form = w.a(n + 1) + w.b(n + 1);
    let agree = max_abs(&(&recursive - &closed_form)) <= 1e-9 * magnitude;
    BoundaryRhs { recursive, closed_form, magnitude, agree }
}
