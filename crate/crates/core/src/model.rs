//! Model description, validation, stability and the two constructions that
//! produce models: censoring zero-rate phases and the tandem family.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::matops::{inverse, linear_solve, submatrix, Matrix, RowVector};
use crate::{Error, Result};

/// A broken model invariant. Phases and rows are reported 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    NotSquare { rows: usize, cols: usize },
    Length { what: &'static str, expected: usize, found: usize },
    NonFinite { row: usize, col: usize },
    NegativeRate { row: usize, col: usize, value: f64 },
    RowSum { row: usize, sum: f64 },
    ZeroC { phase: usize },
    ZeroR { phase: usize },
    NonFiniteRate { what: &'static str, phase: usize },
    Reducible,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "model has no phases"),
            Violation::NotSquare { rows, cols } => write!(f, "generator is {rows}x{cols}, not square"),
            Violation::Length { what, expected, found } => {
                write!(f, "{what} has length {found}, expected {expected}")
            }
            Violation::NonFinite { row, col } => {
                write!(f, "generator entry ({}, {}) is not finite", row + 1, col + 1)
            }
            Violation::NegativeRate { row, col, value } => write!(
                f,
                "negative transition rate {value} from phase {} to phase {}",
                row + 1,
                col + 1
            ),
            Violation::RowSum { row, sum } => write!(f, "generator row {} sums to {sum}", row + 1),
            Violation::ZeroC { phase } => write!(f, "zero c-rate at phase {}", phase + 1),
            Violation::ZeroR { phase } => write!(f, "zero r-rate at phase {}", phase + 1),
            Violation::NonFiniteRate { what, phase } => {
                write!(f, "{what}-rate at phase {} is not finite", phase + 1)
            }
            Violation::Reducible => write!(f, "generator is reducible"),
        }
    }
}

/// Checks every structural invariant of `(T, c, r)` and lists what fails.
pub fn validate(t: &Matrix, c: &[f64], r: &[f64]) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = t.nrows();
    if n == 0 {
        out.push(Violation::Empty);
        return out;
    }
    if t.ncols() != n {
        out.push(Violation::NotSquare { rows: n, cols: t.ncols() });
        return out;
    }
    for (what, v) in [("c", c), ("r", r)] {
        if v.len() != n {
            out.push(Violation::Length { what, expected: n, found: v.len() });
        }
    }
    if !out.is_empty() {
        return out;
    }
    let mut finite = true;
    for i in 0..n {
        for j in 0..n {
            if !t[(i, j)].is_finite() {
                out.push(Violation::NonFinite { row: i, col: j });
                finite = false;
            } else if i != j && t[(i, j)] < 0.0 {
                out.push(Violation::NegativeRate { row: i, col: j, value: t[(i, j)] });
            }
        }
    }
    if finite {
        for i in 0..n {
            let sum: f64 = t.row(i).sum();
            let scale = t.row(i).iter().fold(1.0f64, |m, x| m.max(x.abs()));
            if sum.abs() > 1e-12 * scale {
                out.push(Violation::RowSum { row: i, sum });
            }
        }
    }
    for (what, v) in [("c", c), ("r", r)] {
        for (i, &x) in v.iter().enumerate() {
            if !x.is_finite() {
                out.push(Violation::NonFiniteRate { what, phase: i });
            } else if x == 0.0 {
                out.push(if what == "c" { Violation::ZeroC { phase: i } } else { Violation::ZeroR { phase: i } });
            }
        }
    }
    if finite && !irreducible(t) {
        out.push(Violation::Reducible);
    }
    out
}

/// Strong connectivity of the off-diagonal transition pattern.
pub fn irreducible(t: &Matrix) -> bool {
    let n = t.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let w = if forward { t[(i, j)] } else { t[(j, i)] };
                if i != j && w > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    n <= 1 || (reach(true) && reach(false))
}

/// Phase sets by the sign of `r` (`S^+`, `S^-`) and of `c` (`S_+`, `S_-`),
/// each in increasing natural order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePartition {
    pub plus_r: Vec<usize>,
    pub minus_r: Vec<usize>,
    pub plus_c: Vec<usize>,
    pub minus_c: Vec<usize>,
}

impl PhasePartition {
    pub fn new(c: &[f64], r: &[f64]) -> Self {
        let split = |v: &[f64]| {
            let plus = (0..v.len()).filter(|&i| v[i] > 0.0).collect();
            let minus = (0..v.len()).filter(|&i| v[i] < 0.0).collect();
            (plus, minus)
        };
        let (plus_r, minus_r) = split(r);
        let (plus_c, minus_c) = split(c);
        Self { plus_r, minus_r, plus_c, minus_c }
    }

    /// `S^+` followed by `S^-`: the block order of the return operators.
    pub fn r_order(&self) -> Vec<usize> {
        self.plus_r.iter().chain(&self.minus_r).copied().collect()
    }

    pub fn c_order(&self) -> Vec<usize> {
        self.plus_c.iter().chain(&self.minus_c).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SffmModel {
    t: Matrix,
    c: Vec<f64>,
    r: Vec<f64>,
    partition: PhasePartition,
}

impl SffmModel {
    pub fn new(t: Matrix, c: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        let v = validate(&t, &c, &r);
        if !v.is_empty() {
            return Err(Error::InvalidModel(v));
        }
        let partition = PhasePartition::new(&c, &r);
        Ok(Self { t, c, r, partition })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn t(&self) -> &Matrix {
        &self.t
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn partition(&self) -> &PhasePartition {
        &self.partition
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(&self.t, &self.c, &self.r)
    }

    /// `Q = |R|^{-1} T`, the generator in the time scale of `Ŷ`.
    pub fn fluid_generator(&self) -> Matrix {
        Matrix::from_fn(self.n(), self.n(), |i, j| self.t[(i, j)] / self.r[i].abs())
    }

    /// Diagonal of `C' = |R|^{-1} C`.
    pub fn c_prime(&self) -> Vec<f64> {
        self.c.iter().zip(&self.r).map(|(c, r)| c / r.abs()).collect()
    }

    /// `Q_λ = |R|^{-1}(T + λC)`.
    pub fn tilted_generator(&self, lambda: f64) -> Matrix {
        let mut q = self.fluid_generator();
        for (i, cp) in self.c_prime().into_iter().enumerate() {
            q[(i, i)] += lambda * cp;
        }
        q
    }
}

/// Initial law of `(X(0), φ(0))`: density `ν(0) e^{-λx}` on `x > 0` plus an
/// atom `P` at zero carried by phases with `c < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDistribution {
    pub lambda: f64,
    pub nu0: RowVector,
    pub atom: RowVector,
    certified: bool,
}

impl InitialDistribution {
    pub fn new(model: &SffmModel, lambda: f64, nu0: RowVector, atom: RowVector) -> Result<Self> {
        let n = model.n();
        let bad = |s: alloc::string::String| Err(Error::InvalidInitial(s));
        if !(lambda.is_finite() && lambda > 0.0) {
            return bad(format!("lambda must be positive, got {lambda}"));
        }
        if nu0.len() != n || atom.len() != n {
            return bad(format!("expected vectors of length {n}"));
        }
        for j in 0..n {
            if !(nu0[j].is_finite() && nu0[j] >= 0.0) {
                return bad(format!("nu0 at phase {} is {}", j + 1, nu0[j]));
            }
            if !(atom[j].is_finite() && atom[j] >= 0.0) {
                return bad(format!("P at phase {} is {}", j + 1, atom[j]));
            }
        }
        for &j in &model.partition().plus_c {
            if atom[j] != 0.0 {
                return bad(format!("P at phase {} must be 0 since c > 0 there", j + 1));
            }
        }
        let total = nu0.sum() / lambda + atom.sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("total mass is {total}, not 1"));
        }
        Ok(Self { lambda, nu0, atom, certified: false })
    }

    /// True for distributions built by [`build_tandem_model`], whose boundary
    /// conditions hold at every order.
    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// `μ([0, ∞)) = P + ν(0)/λ`, the phase marginal.
    pub fn total(&self) -> RowVector {
        &self.atom + &self.nu0 / self.lambda
    }

    /// `ν(0)/λ`, the mass of the density part.
    pub fn density_mass(&self) -> RowVector {
        &self.nu0 / self.lambda
    }
}

/// Recurrence of a level process reflected at zero, from the sign of its drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recurrence {
    Positive,
    Null,
    Transient,
}

impl Recurrence {
    fn from_drift(d: f64) -> Self {
        if d.abs() <= 1e-10 {
            Recurrence::Null
        } else if d < 0.0 {
            Recurrence::Positive
        } else {
            Recurrence::Transient
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub pi: RowVector,
    pub drift_x: f64,
    pub drift_y: f64,
    pub x: Recurrence,
    pub y: Recurrence,
}

/// Stationary distribution of the phase process.
pub fn stationary(t: &Matrix) -> Result<RowVector> {
    let n = t.nrows();
    let mut a = t.transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut e = Matrix::zeros(n, 1);
    e[(n - 1, 0)] = 1.0;
    let x = linear_solve(&a, &e)?;
    Ok(RowVector::from_fn(n, |_, j| x[(j, 0)]))
}

pub fn stability(model: &SffmModel) -> Result<StabilityReport> {
    let pi = stationary(model.t())?;
    let drift = |v: &[f64]| v.iter().zip(pi.iter()).map(|(a, b)| a * b).sum::<f64>();
    let drift_x = drift(model.c());
    let drift_y = drift(model.r());
    Ok(StabilityReport {
        pi,
        drift_x,
        drift_y,
        x: Recurrence::from_drift(drift_x),
        y: Recurrence::from_drift(drift_y),
    })
}

/// Generator of the phase process watched only outside `zero_set`:
/// `T = T̄^{ℓm} + T̄^{ℓ0} (-T̄^{00})^{-1} T̄^{0m}`.
///
/// Remaining phases keep their relative order.
pub fn censor_zero_phases(t_bar: &Matrix, zero_set: &[usize]) -> Result<Matrix> {
    let n = t_bar.nrows();
    if t_bar.ncols() != n {
        return Err(Error::Dimension { expected: n, found: t_bar.ncols() });
    }
    if let Some(&bad) = zero_set.iter().find(|&&i| i >= n) {
        return Err(Error::Dimension { expected: n, found: bad + 1 });
    }
    let keep: Vec<usize> = (0..n).filter(|i| !zero_set.contains(i)).collect();
    let zero: Vec<usize> = (0..n).filter(|i| zero_set.contains(i)).collect();
    let tkk = submatrix(t_bar, &keep, &keep);
    if zero.is_empty() {
        return Ok(tkk);
    }
    let tk0 = submatrix(t_bar, &keep, &zero);
    let t0k = submatrix(t_bar, &zero, &keep);
    let t00 = submatrix(t_bar, &zero, &zero);
    let inv = inverse(&(-t00)).map_err(|_| Error::AbsorbingZeroClass)?;
    Ok(tkk + tk0 * inv * t0k)
}

/// Parameters of the tandem family whose fluid generator has block form
/// `[[-(b+β)I, T_pm], [T_mp, -bI]]` in `c`-sign order and whose rates satisfy
/// `|c_i| = γ|r_i|`. Such models satisfy the boundary conditions at every
/// order with `λ = β/γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TandemParams {
    pub b: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `|S_+| × |S_-|`, rows summing to `b + β`.
    pub t_pm: Matrix,
    /// `|S_-| × |S_+|`, rows summing to `b`.
    pub t_mp: Matrix,
    pub abs_r: Vec<f64>,
    pub r_signs: Vec<i8>,
    pub c_signs: Vec<i8>,
    /// Atom at zero on `S_-`, in increasing phase order.
    pub p_minus: Vec<f64>,
    /// How `ν_-(0)` is split over `S_-`; uniform when absent.
    pub nu_minus_weights: Option<Vec<f64>>,
}

pub fn build_tandem_model(p: &TandemParams) -> Result<(SffmModel, InitialDistribution)> {
    let bad = |s: alloc::string::String| Err(Error::InvalidTandem(s));
    let n = p.abs_r.len();
    if p.r_signs.len() != n || p.c_signs.len() != n {
        return bad(format!("sign vectors must have length {n}"));
    }
    for (name, v) in [("b", p.b), ("beta", p.beta), ("gamma", p.gamma)] {
        if !(v.is_finite() && v > 0.0) {
            return bad(format!("{name} must be positive, got {v}"));
        }
    }
    if p.r_signs.iter().chain(&p.c_signs).any(|&s| s != 1 && s != -1) {
        return bad("signs must be +1 or -1".into());
    }
    if p.abs_r.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return bad("|r| entries must be positive".into());
    }
    let plus: Vec<usize> = (0..n).filter(|&i| p.c_signs[i] > 0).collect();
    let minus: Vec<usize> = (0..n).filter(|&i| p.c_signs[i] < 0).collect();
    let (np, nm) = (plus.len(), minus.len());
    if p.t_pm.shape() != (np, nm) || p.t_mp.shape() != (nm, np) {
        return bad(format!("T_pm must be {np}x{nm} and T_mp {nm}x{np} for the given c signs"));
    }
    if p.p_minus.len() != nm {
        return bad(format!("P_minus must have length {nm}"));
    }
    let check_rows = |m: &Matrix, target: f64, name: &str| -> Result<()> {
        if m.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::InvalidTandem(format!("{name} must be nonnegative")));
        }
        for (i, row) in m.row_iter().enumerate() {
            if (row.sum() - target).abs() > 1e-12 * target.max(1.0) {
                return Err(Error::InvalidTandem(format!(
                    "{name} row {} sums to {}, expected {target}",
                    i + 1,
                    row.sum()
                )));
            }
        }
        Ok(())
    };
    check_rows(&p.t_pm, p.b + p.beta, "T_pm")?;
    check_rows(&p.t_mp, p.b, "T_mp")?;
    if p.p_minus.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
        return bad("P_minus must be nonnegative".into());
    }

    let mut t = Matrix::zeros(n, n);
    for (a, &i) in plus.iter().enumerate() {
        t[(i, i)] = -(p.b + p.beta) * p.abs_r[i];
        for (k, &j) in minus.iter().enumerate() {
            t[(i, j)] = p.t_pm[(a, k)] * p.abs_r[i];
        }
    }
    for (a, &i) in minus.iter().enumerate() {
        t[(i, i)] = -p.b * p.abs_r[i];
        for (k, &j) in plus.iter().enumerate() {
            t[(i, j)] = p.t_mp[(a, k)] * p.abs_r[i];
        }
    }
    let c: Vec<f64> = (0..n).map(|i| p.c_signs[i] as f64 * p.gamma * p.abs_r[i]).collect();
    let r: Vec<f64> = (0..n).map(|i| p.r_signs[i] as f64 * p.abs_r[i]).collect();
    let model = SffmModel::new(t, c, r)?;

    let lambda = p.beta / p.gamma;
    let atom_mass: f64 = p.p_minus.iter().sum();
    let bound = lambda * p.gamma / (p.b + lambda * p.gamma);
    if atom_mass > bound * (1.0 + 1e-14) {
        return Err(Error::AtomTooLarge { mass: atom_mass, bound });
    }
    let weights = match &p.nu_minus_weights {
        Some(w) => {
            if w.len() != nm || w.iter().any(|&x| !(x.is_finite() && x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                return bad("nu_minus_weights must be nonnegative with positive sum over S_-".into());
            }
            w.clone()
        }
        None => vec![1.0; nm],
    };
    let wsum: f64 = weights.iter().sum();
    let minus_mass = (lambda - (p.b + lambda * p.gamma) / p.gamma * atom_mass).max(0.0);

    let p_row = RowVector::from_vec(p.p_minus.clone());
    let nu_plus = &p_row * &p.t_mp / p.gamma;
    let mut nu0 = RowVector::zeros(n);
    let mut atom = RowVector::zeros(n);
    for (a, &i) in plus.iter().enumerate() {
        nu0[i] = nu_plus[a];
    }
    for (a, &i) in minus.iter().enumerate() {
        nu0[i] = minus_mass * weights[a] / wsum;
        atom[i] = p.p_minus[a];
    }
    let mut init = InitialDistribution::new(&model, lambda, nu0, atom)?;
    init.certified = true;
    Ok((model, init))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn two_phase() -> SffmModel {
        SffmModel::new(Matrix::from_row_slice(2, 2, &[-2.0, 2.0, 1.0, -1.0]), vec![1.0, -1.0], vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn violation_messages() {
        let t = Matrix::from_row_slice(2, 2, &[-2.0, 2.1, 1.0, -1.0]);
        let v = validate(&t, &[1.0, -1.0], &[1.0, 0.0]);
        let msgs: Vec<_> = v.iter().map(|x| x.to_string()).collect();
        assert!(msgs.iter().any(|m| m.starts_with("generator row 1 sums to 0.1")), "{msgs:?}");
        assert!(msgs.contains(&"zero r-rate at phase 2".to_string()));
    }

    #[test]
    fn reducible_detected() {
        let t = Matrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, 0.0]);
        assert_eq!(validate(&t, &[1.0, 1.0], &[1.0, 1.0]), vec![Violation::Reducible]);
    }

    #[test]
    fn partition_and_generators() {
        let m = two_phase();
        assert_eq!(m.partition().plus_r, vec![0]);
        assert_eq!(m.partition().minus_c, vec![1]);
        let q = m.tilted_generator(1.0);
        assert_eq!(q, Matrix::from_row_slice(2, 2, &[-1.0, 2.0, 1.0, -2.0]));
    }

    #[test]
    fn stability_of_two_phase() {
        let s = stability(&two_phase()).unwrap();
        assert!((s.pi[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.drift_x + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.x, Recurrence::Positive);
        assert_eq!(s.y, Recurrence::Positive);
    }

    #[test]
    fn initial_distribution_rules() {
        let m = two_phase();
        let ok = InitialDistribution::new(
            &m,
            1.0,
            RowVector::from_row_slice(&[0.2, 0.6]),
            RowVector::from_row_slice(&[0.0, 0.2]),
        );
        assert!(ok.is_ok());
        let atom_on_plus = InitialDistribution::new(
            &m,
            1.0,
            RowVector::from_row_slice(&[0.2, 0.6]),
            RowVector::from_row_slice(&[0.2, 0.0]),
        );
        assert!(atom_on_plus.is_err());
        let mass = InitialDistribution::new(
            &m,
            1.0,
            RowVector::from_row_slice(&[0.2, 0.7]),
            RowVector::from_row_slice(&[0.0, 0.2]),
        );
        assert!(mass.is_err());
    }

    #[test]
    fn censor_three_phase() {
        let t_bar = Matrix::from_row_slice(3, 3, &[-2.0, 1.0, 1.0, 1.0, -1.0, 0.0, 1.0, 1.0, -2.0]);
        let t = censor_zero_phases(&t_bar, &[2]).unwrap();
        let want = Matrix::from_row_slice(2, 2, &[-1.5, 1.5, 1.0, -1.0]);
        assert!((t - want).abs().max() < 1e-15);
    }

    #[test]
    fn censor_absorbing_class() {
        let t_bar = Matrix::from_row_slice(3, 3, &[-1.0, 0.0, 1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(censor_zero_phases(&t_bar, &[2]), Err(Error::AbsorbingZeroClass));
    }

    fn tandem(p_minus: f64) -> TandemParams {
        TandemParams {
            b: 1.0,
            beta: 1.0,
            gamma: 1.0,
            t_pm: Matrix::from_element(1, 1, 2.0),
            t_mp: Matrix::from_element(1, 1, 1.0),
            abs_r: vec![1.0, 1.0],
            r_signs: vec![1, -1],
            c_signs: vec![1, -1],
            p_minus: vec![p_minus],
            nu_minus_weights: None,
        }
    }

    #[test]
    fn tandem_two_phase() {
        let (m, init) = build_tandem_model(&tandem(0.2)).unwrap();
        assert_eq!(m, two_phase());
        assert!(init.is_certified());
        assert!((init.nu0[0] - 0.2).abs() < 1e-15);
        assert!((init.nu0[1] - 0.6).abs() < 1e-15);
        assert_eq!(init.atom[1], 0.2);
    }

    #[test]
    fn tandem_atom_bound() {
        let err = build_tandem_model(&tandem(0.6)).unwrap_err();
        assert!(matches!(err, Error::AtomTooLarge { bound, .. } if (bound - 0.5).abs() < 1e-15));
    }
}
