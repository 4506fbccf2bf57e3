//! Return operators of the level `Y`.
//!
//! `Ψ` (rows `S^+`, columns `S^-`) holds the phase at which `Y` first comes back
//! down to its starting level after starting upwards. `Ξ` is the mirror image.
//! `Φ = [[0, Ψ], [Ξ, 0]]` in `r`-sign blocks, and `M = Φ (I - Φ)^{-1}` counts
//! expected visits. Tilted versions use `Q_λ` in place of `Q`.

use crate::matops::{
    norm_inf, right_solve, solve_riccati, submatrix, Matrix, RiccatiOptions, RiccatiProblem, SolveReport,
};
use crate::model::{stability, PhasePartition, Recurrence, SffmModel};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ReturnOperators {
    pub lambda: f64,
    pub psi: Matrix,
    pub xi: Matrix,
    pub psi_lambda: Matrix,
    pub xi_lambda: Matrix,
    /// `Φ` in natural phase order.
    pub phi: Matrix,
    pub m: Matrix,
    pub phi_lambda: Matrix,
    pub m_lambda: Matrix,
    /// Reports for `Ψ`, `Ξ`, `Ψ_λ`, `Ξ_λ`.
    pub reports: [SolveReport; 4],
    /// `‖(I + M)^{-1} M - Φ‖_∞` and the tilted counterpart.
    pub roundtrip: (f64, f64),
}

impl ReturnOperators {
    /// Row sums of `Φ_λ`. Not bounded by one in general.
    pub fn phi_lambda_row_sums(&self) -> alloc::vec::Vec<f64> {
        self.phi_lambda.row_iter().map(|r| r.sum()).collect()
    }
}

/// Riccati problem whose minimal solution is `Ψ` (`up = true`) or `Ξ`
/// built from the generator `q`.
pub fn return_problem(q: &Matrix, part: &PhasePartition, up: bool) -> RiccatiProblem {
    let (p, m) = if up {
        (&part.plus_r, &part.minus_r)
    } else {
        (&part.minus_r, &part.plus_r)
    };
    RiccatiProblem {
        a: submatrix(q, p, p),
        b: submatrix(q, p, m),
        c: submatrix(q, m, p),
        d: submatrix(q, m, m),
    }
}

fn solve(q: &Matrix, part: &PhasePartition, up: bool, opts: &RiccatiOptions) -> Result<(Matrix, SolveReport)> {
    let pr = return_problem(q, part, up);
    let (x, rep) = solve_riccati(&pr, opts)?;
    if !rep.converged {
        return Err(Error::NotConverged {
            what: if up { "Psi" } else { "Xi" },
            iterations: rep.iterations,
            residual: rep.residual,
        });
    }
    Ok((x, rep))
}

/// `Ψ`, or `Ψ_λ` when `lambda` is given.
pub fn compute_psi(model: &SffmModel, lambda: Option<f64>, opts: &RiccatiOptions) -> Result<(Matrix, SolveReport)> {
    solve(&generator(model, lambda), model.partition(), true, opts)
}

/// `Ξ`, or `Ξ_λ` when `lambda` is given.
pub fn compute_xi(model: &SffmModel, lambda: Option<f64>, opts: &RiccatiOptions) -> Result<(Matrix, SolveReport)> {
    solve(&generator(model, lambda), model.partition(), false, opts)
}

fn generator(model: &SffmModel, lambda: Option<f64>) -> Matrix {
    match lambda {
        Some(l) => model.tilted_generator(l),
        None => model.fluid_generator(),
    }
}

/// Places `Ψ` and `Ξ` into an `n × n` matrix in natural order.
pub fn embed_phi(psi: &Matrix, xi: &Matrix, part: &PhasePartition) -> Matrix {
    let n = part.plus_r.len() + part.minus_r.len();
    let mut phi = Matrix::zeros(n, n);
    for (a, &i) in part.plus_r.iter().enumerate() {
        for (b, &j) in part.minus_r.iter().enumerate() {
            phi[(i, j)] = psi[(a, b)];
        }
    }
    for (a, &i) in part.minus_r.iter().enumerate() {
        for (b, &j) in part.plus_r.iter().enumerate() {
            phi[(i, j)] = xi[(a, b)];
        }
    }
    phi
}

/// `M = Φ (I - Φ)^{-1}`.
pub fn visits_from_phi(phi: &Matrix) -> Result<Matrix> {
    let n = phi.nrows();
    right_solve(phi, &(Matrix::identity(n, n) - phi))
}

/// `Φ = (I + M)^{-1} M`.
pub fn phi_from_visits(m: &Matrix) -> Result<Matrix> {
    let n = m.nrows();
    crate::matops::linear_solve(&(Matrix::identity(n, n) + m), m)
}

/// All return operators at tilt `lambda`.
pub fn assemble(model: &SffmModel, lambda: f64, opts: &RiccatiOptions) -> Result<ReturnOperators> {
    if stability(model)?.y == Recurrence::Null {
        return Err(Error::MUndefined);
    }
    let part = model.partition();
    let (psi, r0) = compute_psi(model, None, opts)?;
    let (xi, r1) = compute_xi(model, None, opts)?;
    let (psi_lambda, r2) = compute_psi(model, Some(lambda), opts)?;
    let (xi_lambda, r3) = compute_xi(model, Some(lambda), opts)?;
    let phi = embed_phi(&psi, &xi, part);
    let phi_lambda = embed_phi(&psi_lambda, &xi_lambda, part);
    let m = visits_from_phi(&phi).map_err(|_| Error::MUndefined)?;
    let m_lambda = visits_from_phi(&phi_lambda)?;
    let rt = norm_inf(&(phi_from_visits(&m)? - &phi));
    let rt_l = norm_inf(&(phi_from_visits(&m_lambda)? - &phi_lambda));
    Ok(ReturnOperators {
        lambda,
        psi,
        xi,
        psi_lambda,
        xi_lambda,
        phi,
        m,
        phi_lambda,
        m_lambda,
        reports: [r0, r1, r2, r3],
        roundtrip: (rt, rt_l),
    })
}
