use super::{inverse, norm_inf, Matrix};
use crate::{Error, Result};

/// Nonsymmetric algebraic Riccati equation `B + A X + X D + X C X = 0`
/// with `A` (p×p) and `D` (q×q) Metzler, `B` (p×q) and `C` (q×p) nonnegative.
#[derive(Debug, Clone)]
pub struct RiccatiProblem {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

#[derive(Debug, Clone, Copy)]
pub struct RiccatiOptions {
    /// Residual target, relative to `max(1, ‖A‖ + ‖B‖ + ‖C‖ + ‖D‖)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Finish with Newton steps once the fixed point is close.
    pub newton: bool,
    /// Residual at which the fixed point hands over to Newton.
    pub newton_switch: f64,
    pub max_newton: usize,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_iter: 200_000,
            newton: true,
            newton_switch: 1e-9,
            max_newton: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub newton_steps: usize,
    /// ∞-norm of `B + A X + X D + X C X`.
    pub residual: f64,
    pub converged: bool,
}

impl RiccatiProblem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let (p, q) = (a.nrows(), d.nrows());
        for (m, r, k) in [(&a, p, p), (&b, p, q), (&c, q, p), (&d, q, q)] {
            if m.nrows() != r {
                return Err(Error::Dimension { expected: r, found: m.nrows() });
            }
            if m.ncols() != k {
                return Err(Error::Dimension { expected: k, found: m.ncols() });
            }
        }
        Ok(Self { a, b, c, d })
    }

    pub fn residual(&self, x: &Matrix) -> Matrix {
        &self.b + &self.a * x + x * &self.d + x * &self.c * x
    }

    fn scale(&self) -> f64 {
        let s = norm_inf(&self.a) + norm_inf(&self.b) + norm_inf(&self.c) + norm_inf(&self.d);
        s.max(1.0)
    }
}

/// Monotone fixed-point iterates `X_{k+1} = (sI - A)^{-1}(B + X_k (D + sI) + X_k C X_k)`
/// starting from zero. The shift `s` makes `sI - A` a strictly diagonally
/// dominant M-matrix and `D + sI` nonnegative, so the iterates increase
/// entrywise towards the minimal nonnegative solution.
pub struct RiccatiIteration<'a> {
    problem: &'a RiccatiProblem,
    left: Matrix,
    d_shift: Matrix,
    x: Matrix,
}

impl<'a> RiccatiIteration<'a> {
    pub fn new(problem: &'a RiccatiProblem) -> Result<Self> {
        let p = problem.a.nrows();
        let q = problem.d.nrows();
        let s = shift(problem);
        let left = inverse(&(Matrix::identity(p, p) * s - &problem.a))?;
        let d_shift = &problem.d + Matrix::identity(q, q) * s;
        Ok(Self {
            problem,
            left,
            d_shift,
            x: Matrix::zeros(p, q),
        })
    }

    pub fn current(&self) -> &Matrix {
        &self.x
    }
}

impl Iterator for RiccatiIteration<'_> {
    type Item = Matrix;

    fn next(&mut self) -> Option<Matrix> {
        let pr = self.problem;
        let rhs = &pr.b + &self.x * &self.d_shift + &self.x * &pr.c * &self.x;
        self.x = &self.left * rhs;
        Some(self.x.clone())
    }
}

fn shift(pr: &RiccatiProblem) -> f64 {
    let q = pr.d.nrows();
    let p = pr.a.nrows();
    let mut s: f64 = 0.0;
    for i in 0..q {
        s = s.max(-pr.d[(i, i)]);
    }
    let mut row_max = f64::NEG_INFINITY;
    for i in 0..p {
        row_max = row_max.max(pr.a.row(i).sum());
    }
    if p > 0 && s <= row_max {
        s = row_max + 1e-3 * row_max.abs().max(1.0);
    }
    // Keep every row of sI - A strictly dominant even when A has zero rows.
    if p > 0 && s <= 0.0 {
        s = 1e-3;
    }
    s
}

/// Minimal nonnegative solution of the Riccati equation.
///
/// Returns the solution with a report; a report with `converged == false`
/// is not an error, callers decide. NaN or infinite iterates are an error.
pub fn solve_riccati(problem: &RiccatiProblem, opts: &RiccatiOptions) -> Result<(Matrix, SolveReport)> {
    let p = problem.a.nrows();
    let q = problem.d.nrows();
    if p == 0 || q == 0 {
        let report = SolveReport { iterations: 0, newton_steps: 0, residual: 0.0, converged: true };
        return Ok((Matrix::zeros(p, q), report));
    }
    let tol = opts.tol * problem.scale();
    let switch = if opts.newton { opts.newton_switch.max(tol) } else { tol };
    let mut it = RiccatiIteration::new(problem)?;
    let mut x = Matrix::zeros(p, q);
    let mut iterations = 0;
    let mut res = norm_inf(&problem.residual(&x));
    while iterations < opts.max_iter && res > switch {
        let next = it.next().expect("infinite iterator");
        iterations += 1;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged);
        }
        let step = (&next - &x).abs().max();
        x = next;
        res = norm_inf(&problem.residual(&x));
        if step <= 1e-17 * (1.0 + x.abs().max()) {
            break;
        }
    }
    let mut newton_steps = 0;
    if opts.newton && res > tol {
        let mut best = (x.clone(), res);
        let mut y = x.clone();
        while newton_steps < opts.max_newton {
            let Some(h) = newton_step(problem, &y) else { break };
            newton_steps += 1;
            y += h;
            if y.iter().any(|v| !v.is_finite()) {
                break;
            }
            let r = norm_inf(&problem.residual(&y));
            if r < best.1 {
                best = (y.clone(), r);
            }
            if r <= tol || r > 1e3 * best.1 {
                break;
            }
        }
        if best.0.min() >= -1e-12 {
            x = best.0;
            res = best.1;
        }
    }
    let report = SolveReport {
        iterations,
        newton_steps,
        residual: res,
        converged: res <= tol.max(1e-12),
    };
    Ok((x, report))
}

/// Solves `(A + X C) H + H (D + C X) = -R(X)` through its Kronecker form.
fn newton_step(pr: &RiccatiProblem, x: &Matrix) -> Option<Matrix> {
    let p = pr.a.nrows();
    let q = pr.d.nrows();
    let k1 = &pr.a + x * &pr.c;
    let k2 = &pr.d + &pr.c * x;
    let big = Matrix::identity(q, q).kronecker(&k1) + k2.transpose().kronecker(&Matrix::identity(p, p));
    let r = -pr.residual(x);
    let rhs = Matrix::from_column_slice(p * q, 1, r.as_slice());
    let h = big.lu().solve(&rhs)?;
    Some(Matrix::from_column_slice(p, q, h.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Scalar case: b + (a + d) x + c x² = 0, minimal root in closed form.
    #[test]
    fn scalar_minimal_root() {
        let (a, b, c, d) = (-3.0, 1.0, 2.0, -1.0);
        let pr = RiccatiProblem::new(
            Matrix::from_element(1, 1, a),
            Matrix::from_element(1, 1, b),
            Matrix::from_element(1, 1, c),
            Matrix::from_element(1, 1, d),
        )
        .unwrap();
        let (x, rep) = solve_riccati(&pr, &RiccatiOptions::default()).unwrap();
        let s = a + d;
        let root = (-s - (s * s - 4.0 * b * c).sqrt()) / (2.0 * c);
        assert!(rep.converged);
        assert!((x[(0, 0)] - root).abs() < 1e-14);
    }

    #[test]
    fn iterates_increase() {
        let pr = RiccatiProblem::new(
            Matrix::from_row_slice(2, 2, &[-2.0, 1.0, 0.0, -1.0]),
            Matrix::from_row_slice(2, 1, &[1.0, 1.0]),
            Matrix::from_row_slice(1, 2, &[0.4, 0.6]),
            Matrix::from_row_slice(1, 1, &[-1.0]),
        )
        .unwrap();
        let mut prev = Matrix::zeros(2, 1);
        for x in RiccatiIteration::new(&pr).unwrap().take(200) {
            assert!((&x - &prev).min() >= -1e-15);
            prev = x;
        }
    }

    #[test]
    fn fixed_point_only_still_converges() {
        let pr = RiccatiProblem::new(
            Matrix::from_row_slice(1, 1, &[-2.0]),
            Matrix::from_row_slice(1, 1, &[2.0]),
            Matrix::from_row_slice(1, 1, &[1.0]),
            Matrix::from_row_slice(1, 1, &[-1.0]),
        )
        .unwrap();
        let opts = RiccatiOptions { newton: false, ..Default::default() };
        let (x, rep) = solve_riccati(&pr, &opts).unwrap();
        assert!(rep.converged && rep.newton_steps == 0);
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12);
    }
}
