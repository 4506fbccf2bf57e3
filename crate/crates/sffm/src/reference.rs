//! Built-in examples with published reference values.
//!
//! Closed-form values are compared at `1e-9`, values printed to four decimals
//! at `1e-4`.

use sffm_core::catalog;
use sffm_core::matops::RiccatiOptions;
use sffm_core::model::stability;
use sffm_core::return_ops::assemble;
use sffm_core::transient::{check_boundary, limit_y_infinity, mu_exp_dy, IntervalSet, TransientOptions};
use sffm_core::first_return::mu_phi;
use sffm_core::{Matrix, RowVector};

use crate::CliError;

pub const EXACT: f64 = 1e-9;
pub const PRINTED: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub reference: f64,
    pub computed: f64,
    pub tol: f64,
}

impl Check {
    pub fn diff(&self) -> f64 {
        (self.computed - self.reference).abs()
    }

    pub fn passed(&self) -> bool {
        self.diff() <= self.tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleReport {
    pub k: usize,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ExampleReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }

    fn scalar(&mut self, label: impl Into<String>, reference: f64, computed: f64, tol: f64) {
        self.checks.push(Check { label: label.into(), reference, computed, tol });
    }

    fn vector(&mut self, label: &str, reference: &[f64], computed: &RowVector, tol: f64) {
        assert_eq!(reference.len(), computed.len());
        for (i, (&r, &c)) in reference.iter().zip(computed.iter()).enumerate() {
            self.scalar(format!("{label}[{}]", i + 1), r, c, tol);
        }
    }

    fn matrix(&mut self, label: &str, reference: &[&[f64]], computed: &Matrix, tol: f64) {
        assert_eq!(reference.len(), computed.nrows());
        for (i, row) in reference.iter().enumerate() {
            assert_eq!(row.len(), computed.ncols());
            for (j, &r) in row.iter().enumerate() {
                self.scalar(format!("{label}[{},{}]", i + 1, j + 1), r, computed[(i, j)], tol);
            }
        }
    }

    fn boundary(&mut self, checks: &[sffm_core::transient::BoundaryCheck]) {
        for c in checks {
            self.scalar(format!("boundary residual n={}", c.order), 0.0, c.residual, EXACT);
        }
    }
}

fn sorted_real_eigenvalues(m: &Matrix) -> RowVector {
    let mut ev: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    RowVector::from_vec(ev)
}

fn permute(v: &RowVector, order: &[usize]) -> RowVector {
    RowVector::from_fn(order.len(), |_, j| v[order[j]])
}

pub fn run_example(k: usize) -> Result<ExampleReport, CliError> {
    let (model, init) = catalog::example(k)?;
    let title = match k {
        1 => "two phases, c = r = (1, -1), b = beta = 1, P_- = 0.2",
        2 => "two phases, r reversed",
        3 => "four phases, uniform S_- -> S_+ switching (null recurrent Y)",
        4 => "four phases, S_- -> S_+ switching 0.4 / 0.6",
        5 => "first return on the two-phase model",
        6 => "first return on the four-phase model, r = 0.6, p = 0.2",
        _ => unreachable!("catalog accepted k"),
    };
    let mut rep = ExampleReport { k, title, checks: Vec::new(), notes: Vec::new() };
    let opts = TransientOptions::default();
    let st = stability(&model)?;
    rep.notes.push(format!(
        "drift of X {:.6} ({:?}), drift of Y {:.6} ({:?})",
        st.drift_x, st.x, st.drift_y, st.y
    ));
    rep.boundary(&check_boundary(&model, &init, 5));
    match k {
        1 | 2 => {
            rep.scalar("lambda", 1.0, init.lambda, EXACT);
            rep.vector("nu(0)", &[0.2, 0.6], &init.nu0, EXACT);
            rep.vector("P", &[0.0, 0.2], &init.atom, EXACT);
            rep.vector("eig(Q)", &[-3.0, 0.0], &sorted_real_eigenvalues(&model.fluid_generator()), EXACT);
            if k == 2 {
                // reversing the sign of r leaves every quantity at omega(y) unchanged
                let (m1, i1) = catalog::example(1)?;
                for y in [0.1, 1.0] {
                    for v in [0.5, 1.0, f64::INFINITY] {
                        let set = if v.is_finite() { IntervalSet::up_to(v)? } else { IntervalSet::whole() };
                        let a = mu_exp_dy(&m1, &i1, y, &set, &opts)?;
                        let b = mu_exp_dy(&model, &init, y, &set, &opts)?;
                        rep.vector(&format!("mu e^(Dy)(A_v) y={y} v={v} vs example 1"), &a.values.iter().copied().collect::<Vec<_>>(), &b.values, 1e-12);
                    }
                }
                rep.notes.push(
                    "reference text calls Y stable and X unstable here; the drifts above give the opposite".into(),
                );
            }
        }
        3 => {
            rep.vector("nu(0)", &[0.1, 0.1, 0.3, 0.3], &init.nu0, EXACT);
            rep.vector("P", &[0.0, 0.0, 0.1, 0.1], &init.atom, EXACT);
            rep.vector("pi", &[1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0], &st.pi, EXACT);
            rep.scalar("drift of Y", 0.0, st.drift_y, EXACT);
            let d = [-3.0, -2.0, -1.0, 0.0];
            rep.vector("eig(Q)", &d, &sorted_real_eigenvalues(&model.fluid_generator()), EXACT);
            let ql = model.tilted_generator(init.lambda);
            rep.vector("eig(Q_lambda)", &d, &sorted_real_eigenvalues(&ql), EXACT);
            match assemble(&model, init.lambda, &RiccatiOptions::default()) {
                Err(e) => rep.notes.push(format!("return operators: {e}")),
                Ok(_) => rep.notes.push("return operators unexpectedly defined".into()),
            }
        }
        4 => {
            rep.vector("nu(0)", &[0.08, 0.12, 0.3, 0.3], &init.nu0, EXACT);
            rep.vector("P", &[0.0, 0.0, 0.1, 0.1], &init.atom, EXACT);
            let pi = &st.pi;
            rep.scalar("pi[1]", 2.0 / 15.0, pi[0], EXACT);
            rep.scalar("pi[2]", 3.0 / 15.0, pi[1], EXACT);
            rep.scalar("pi[1]+pi[2]", 1.0 / 3.0, pi[0] + pi[1], EXACT);
            rep.scalar("pi[3]+pi[4]", 2.0 / 3.0, pi[2] + pi[3], EXACT);
            rep.scalar("pi[1]+pi[4]", 7.0 / 15.0, pi[0] + pi[3], EXACT);
            rep.scalar("pi[2]+pi[3]", 8.0 / 15.0, pi[1] + pi[2], EXACT);
        }
        5 => {
            let ops = assemble(&model, init.lambda, &RiccatiOptions::default())?;
            let phi: [&[f64]; 2] = [&[0.0, 1.0], &[0.5, 0.0]];
            rep.matrix("Phi", &phi, &ops.phi, EXACT);
            rep.matrix("Phi_lambda", &phi, &ops.phi_lambda, EXACT);
            rep.matrix("Q_lambda", &[&[-1.0, 2.0], &[1.0, -2.0]], &model.tilted_generator(init.lambda), EXACT);
            let whole = mu_phi(&model, &init, &IntervalSet::whole(), &ops, &opts)?;
            rep.vector("mu([0,inf)) Phi", &[0.4, 0.2], &whole.const_part, EXACT);
            let decay = &init.density_mass() * &ops.phi_lambda;
            rep.vector("(nu(0)/lambda) Phi_lambda", &[0.3, 0.2], &decay, EXACT);
            for v in [0.5, 1.0, 2.0] {
                let m = mu_phi(&model, &init, &IntervalSet::up_to(v)?, &ops, &opts)?;
                let e = (-v).exp();
                rep.vector(&format!("mu Phi(A_v) v={v}"), &[0.4 - 0.3 * e, 0.2 - 0.2 * e], &m.values, EXACT);
            }
            for v in [0.0, 1.0, f64::INFINITY] {
                let set = if v.is_finite() { IntervalSet::up_to(v)? } else { IntervalSet::whole() };
                let lim = limit_y_infinity(&model, &init, &set, &opts)?;
                let e = (-v).exp();
                let exact = [1.0 / 3.0 - e / 3.0, 2.0 / 3.0 - e / 3.0];
                rep.vector(&format!("limit v={v}"), &exact, &lim.values, EXACT);
                let printed = [0.3333 - 0.3333 * e, 0.6667 - 0.3333 * e];
                rep.vector(&format!("limit v={v} (4 decimals)"), &printed, &lim.values, PRINTED);
            }
        }
        6 => {
            let ops = assemble(&model, init.lambda, &RiccatiOptions::default())?;
            rep.matrix("Psi", &[&[0.2662, 0.7338], &[0.4314, 0.5686]], &ops.psi, PRINTED);
            rep.matrix("Xi", &[&[0.1774, 0.7190], &[0.2935, 0.5686]], &ops.xi, PRINTED);
            rep.matrix("Psi_lambda", &[&[0.6354, 0.7292], &[0.3962, 0.2077]], &ops.psi_lambda, PRINTED);
            rep.matrix("Xi_lambda", &[&[0.4236, 0.6603], &[0.2917, 0.2077]], &ops.xi_lambda, PRINTED);
            let order = model.partition().r_order();
            let whole = mu_phi(&model, &init, &IntervalSet::whole(), &ops, &opts)?;
            rep.vector("mu([0,inf)) Phi", &[0.1387, 0.3137, 0.1939, 0.2861], &permute(&whole.const_part, &order), PRINTED);
            let decay = &init.density_mass() * &ops.phi_lambda;
            rep.vector("(nu(0)/lambda) Phi_lambda", &[0.1383, 0.1415, 0.1697, 0.1206], &permute(&decay, &order), PRINTED);
            let lim = limit_y_infinity(&model, &init, &IntervalSet::whole(), &opts)?;
            rep.vector("limit decay coefficient", &[0.1333, 0.1667, 0.2, 0.1667], &permute(&lim.density_part, &order), PRINTED);
            rep.vector("limit constant", &[0.1333, 0.3333, 0.2, 0.3333], &permute(&lim.values, &order), PRINTED);
            rep.notes.push(format!("vectors in phase order {:?}", order.iter().map(|i| i + 1).collect::<Vec<_>>()));
            rep.notes.push(format!("row sums of Phi_lambda {:?}", ops.phi_lambda_row_sums()));
        }
        _ => unreachable!(),
    }
    Ok(rep)
}
