//! One function per subcommand. Each returns a human-readable report, an
//! optional table and an exit code; the binary decides where they go.

use std::fmt::Write as _;

use sffm_core::first_return::mu_phi;
use sffm_core::matops::{RiccatiOptions, SolveReport};
use sffm_core::model::stability;
use sffm_core::return_ops::assemble;
use sffm_core::simulate::{empirical_measure, Escape, SimConfig, Simulator, StopReason, Target};
use sffm_core::transient::{
    check_boundary, limit_y_infinity, mass_decomposition, mu_exp_dy, IntervalSet, TransientOptions,
};
use sffm_core::{Matrix, RowVector};

use crate::model_file::{Loaded, PrintOrder, TargetKind};
use crate::reference::run_example;
use crate::table::{fmt_num, raw_dump, stop_name, ResultTable};
use crate::CliError;

pub const DEFAULT_Y: [f64; 2] = [0.1, 1.0];
pub const DEFAULT_SIM_Y: f64 = 1.0;
pub const DEFAULT_SIM_V: [f64; 5] = [0.0, 0.5, 1.0, 2.0, f64::INFINITY];
pub const DEFAULT_REPS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const BOUNDARY_ORDER: usize = 5;

/// `0, 0.05, ..., 5`.
pub fn default_v_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 * 0.05).collect()
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub report: String,
    pub table: Option<ResultTable>,
    pub raw: Option<String>,
    pub exit: i32,
}

fn set_for(v: f64) -> Result<IntervalSet, CliError> {
    if v == f64::INFINITY {
        Ok(IntervalSet::whole())
    } else {
        Ok(IntervalSet::up_to(v)?)
    }
}

fn phase_columns(prefix: &str, order: &[usize]) -> Vec<String> {
    order.iter().map(|p| format!("{prefix}_{}", p + 1)).collect()
}

fn ordered(v: &RowVector, order: &[usize]) -> Vec<f64> {
    order.iter().map(|&i| v[i]).collect()
}

fn fmt_row(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:>12.8}")).collect::<Vec<_>>().join(" ")
}

fn write_matrix(out: &mut String, name: &str, m: &Matrix, rows: &[usize], cols: &[usize]) {
    let _ = writeln!(out, "{name} (rows {:?}, columns {:?})", one_based(rows), one_based(cols));
    for i in 0..m.nrows() {
        let row: Vec<f64> = (0..m.ncols()).map(|j| m[(i, j)]).collect();
        let _ = writeln!(out, "  {}", fmt_row(&row));
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn permuted(m: &Matrix, order: &[usize]) -> Matrix {
    Matrix::from_fn(order.len(), order.len(), |i, j| m[(order[i], order[j])])
}

fn boundary_lines(loaded: &Loaded, out: &mut String) -> bool {
    let checks = check_boundary(&loaded.model, &loaded.init, BOUNDARY_ORDER);
    let ok = checks.iter().all(|c| c.passed);
    for c in &checks {
        let _ = writeln!(
            out,
            "  boundary order {}: residual {:.3e} {}",
            c.order,
            c.residual,
            if c.passed { "ok" } else { "FAILED" }
        );
    }
    ok
}

pub fn validate(loaded: &Loaded) -> Result<Outcome, CliError> {
    let mut out = String::new();
    let m = &loaded.model;
    let part = m.partition();
    let _ = writeln!(out, "model hash {}", loaded.hash);
    let _ = writeln!(out, "phases: {}", m.n());
    let _ = writeln!(out, "  r > 0: {:?}  r < 0: {:?}", one_based(&part.plus_r), one_based(&part.minus_r));
    let _ = writeln!(out, "  c > 0: {:?}  c < 0: {:?}", one_based(&part.plus_c), one_based(&part.minus_c));
    let st = stability(m)?;
    let _ = writeln!(out, "stationary phase law: {}", fmt_row(&st.pi.iter().copied().collect::<Vec<_>>()));
    let _ = writeln!(out, "drift of X: {:.6e} ({:?})", st.drift_x, st.x);
    let _ = writeln!(out, "drift of Y: {:.6e} ({:?})", st.drift_y, st.y);
    let init = &loaded.init;
    let _ = writeln!(out, "lambda: {}", init.lambda);
    let _ = writeln!(out, "nu(0): {}", fmt_row(&init.nu0.iter().copied().collect::<Vec<_>>()));
    let _ = writeln!(out, "P: {}", fmt_row(&init.atom.iter().copied().collect::<Vec<_>>()));
    let _ = writeln!(out, "built from tandem parameters: {}", init.is_certified());
    let ok = boundary_lines(loaded, &mut out);
    let _ = writeln!(out, "{}", if ok { "valid" } else { "invalid: boundary conditions fail" });
    Ok(Outcome { report: out, exit: if ok { 0 } else { 1 }, ..Outcome::default() })
}

fn report_line(name: &str, r: &SolveReport) -> String {
    format!(
        "{name}: {} fixed-point iterations, {} Newton steps, residual {:.3e}, converged {}",
        r.iterations, r.newton_steps, r.residual, r.converged
    )
}

const MATRIX_CODES: [&str; 6] = ["Psi", "Xi", "Phi", "M", "Phi_lambda", "M_lambda"];

pub fn return_ops(loaded: &Loaded, lambda: Option<f64>, order: PrintOrder) -> Result<Outcome, CliError> {
    let lambda = lambda.unwrap_or(loaded.init.lambda);
    let ops = assemble(&loaded.model, lambda, &RiccatiOptions::default())?;
    let part = loaded.model.partition();
    let perm = loaded.order(order);
    let mut out = String::new();
    let _ = writeln!(out, "lambda = {lambda}");
    write_matrix(&mut out, "Psi", &ops.psi, &part.plus_r, &part.minus_r);
    write_matrix(&mut out, "Xi", &ops.xi, &part.minus_r, &part.plus_r);
    write_matrix(&mut out, "Psi_lambda", &ops.psi_lambda, &part.plus_r, &part.minus_r);
    write_matrix(&mut out, "Xi_lambda", &ops.xi_lambda, &part.minus_r, &part.plus_r);
    for (name, m) in [("Phi", &ops.phi), ("M", &ops.m), ("Phi_lambda", &ops.phi_lambda), ("M_lambda", &ops.m_lambda)] {
        write_matrix(&mut out, name, &permuted(m, &perm), &perm, &perm);
    }
    for (name, r) in ["Psi", "Xi", "Psi_lambda", "Xi_lambda"].iter().zip(ops.reports.iter()) {
        let _ = writeln!(out, "{}", report_line(name, r));
    }
    let _ = writeln!(out, "round trip Phi <-> M: {:.3e}, tilted {:.3e}", ops.roundtrip.0, ops.roundtrip.1);
    let _ = writeln!(out, "row sums of Phi_lambda: {:?}", ops.phi_lambda_row_sums());

    let mut t = ResultTable::new(
        "return-ops",
        &loaded.hash,
        None,
        ["matrix", "row", "col", "value"].map(String::from).to_vec(),
    );
    t.meta("lambda", fmt_num(lambda));
    t.meta(
        "matrix_codes",
        MATRIX_CODES.iter().enumerate().map(|(i, n)| format!("{i}={n}")).collect::<Vec<_>>().join(" "),
    );
    t.meta("phase_numbering", "1-based natural order");
    let mut emit = |code: usize, m: &Matrix, rows: &[usize], cols: &[usize]| {
        for (i, &ri) in rows.iter().enumerate() {
            for (j, &cj) in cols.iter().enumerate() {
                t.push(vec![code as f64, (ri + 1) as f64, (cj + 1) as f64, m[(i, j)]]);
            }
        }
    };
    let all: Vec<usize> = (0..loaded.model.n()).collect();
    emit(0, &ops.psi, &part.plus_r, &part.minus_r);
    emit(1, &ops.xi, &part.minus_r, &part.plus_r);
    emit(2, &ops.phi, &all, &all);
    emit(3, &ops.m, &all, &all);
    emit(4, &ops.phi_lambda, &all, &all);
    emit(5, &ops.m_lambda, &all, &all);
    Ok(Outcome { report: out, table: Some(t), ..Outcome::default() })
}

pub fn transient(loaded: &Loaded, ys: &[f64], vs: &[f64], order: PrintOrder) -> Result<Outcome, CliError> {
    let (model, init) = (&loaded.model, &loaded.init);
    let opts = TransientOptions { boundary_order: BOUNDARY_ORDER, trust_certificate: true };
    let perm = loaded.order(order);
    let mut cols = vec!["y".to_string(), "v".to_string()];
    cols.extend(phase_columns("mu", &perm));
    cols.extend(phase_columns("at_zero", &perm));
    cols.extend(phase_columns("above_zero", &perm));
    let mut t = ResultTable::new("transient", &loaded.hash, None, cols);
    t.meta("rows_with_y_inf", "limit as y -> infinity");
    let mut out = String::new();
    for &y in ys {
        let d = mass_decomposition(model, init, y, &opts)?;
        let _ = writeln!(out, "y = {y}: X = 0 mass {}", fmt_row(&ordered(&d.at_zero, &perm)));
        let _ = writeln!(out, "         X > 0 mass {}", fmt_row(&ordered(&d.above_zero, &perm)));
        for &v in vs {
            let mu = mu_exp_dy(model, init, y, &set_for(v)?, &opts)?;
            let mut row = vec![y, v];
            row.extend(ordered(&mu.values, &perm));
            row.extend(ordered(&d.at_zero, &perm));
            row.extend(ordered(&d.above_zero, &perm));
            t.push(row);
        }
    }
    let whole = limit_y_infinity(model, init, &IntervalSet::whole(), &opts)?;
    let _ = writeln!(
        out,
        "y -> inf: limit = -exp(-lambda v) a + b\n  a = {}\n  b = {}",
        fmt_row(&ordered(&whole.density_part, &perm)),
        fmt_row(&ordered(&whole.values, &perm))
    );
    for &v in vs {
        let lim = limit_y_infinity(model, init, &set_for(v)?, &opts)?;
        let mut row = vec![f64::INFINITY, v];
        row.extend(ordered(&lim.values, &perm));
        row.extend(ordered(&lim.atom_part, &perm));
        row.extend(ordered(&whole.density_part, &perm));
        t.push(row);
    }
    Ok(Outcome { report: out, table: Some(t), ..Outcome::default() })
}

pub fn first_return(loaded: &Loaded, vs: &[f64], order: PrintOrder) -> Result<Outcome, CliError> {
    let (model, init) = (&loaded.model, &loaded.init);
    let opts = TransientOptions { boundary_order: BOUNDARY_ORDER, trust_certificate: true };
    let ops = assemble(model, init.lambda, &RiccatiOptions::default())?;
    let perm = loaded.order(order);
    let mut cols = vec!["v".to_string()];
    cols.extend(phase_columns("mu_phi", &perm));
    let mut t = ResultTable::new("first-return", &loaded.hash, None, cols);
    let whole = mu_phi(model, init, &IntervalSet::whole(), &ops, &opts)?;
    for &v in vs {
        let m = mu_phi(model, init, &set_for(v)?, &ops, &opts)?;
        let mut row = vec![v];
        row.extend(ordered(&m.values, &perm));
        t.push(row);
    }
    let sums = ops.phi_lambda_row_sums();
    t.meta("phi_lambda_row_sums", sums.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" "));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "mu Phi(A_v) = c - exp(-lambda v) d\n  c = {}\n  d = {}",
        fmt_row(&ordered(&whole.const_part, &perm)),
        fmt_row(&ordered(&whole.decay_part, &perm))
    );
    let _ = writeln!(out, "row sums of Phi_lambda: {sums:?}");
    Ok(Outcome { report: out, table: Some(t), ..Outcome::default() })
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub target: TargetKind,
    pub ys: Vec<f64>,
    pub vs: Vec<f64>,
    pub reps: u64,
    pub seed: u64,
    pub raw: bool,
    pub order: PrintOrder,
}

fn z_score(est: f64, se: f64, analytic: f64) -> f64 {
    let d = est - analytic;
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(d)
    }
}

pub fn simulate(loaded: &Loaded, args: &SimulateArgs) -> Result<Outcome, CliError> {
    let (model, init) = (&loaded.model, &loaded.init);
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    if args.raw && args.target == TargetKind::Omega && args.ys.len() != 1 {
        return Err(CliError::Usage("--raw needs a single --y value".into()));
    }
    let opts = TransientOptions { boundary_order: BOUNDARY_ORDER, trust_certificate: true };
    let config = SimConfig {
        seed: args.seed,
        replications: args.reps,
        escape: Escape::Auto { tolerance: 1e-12 },
        ..SimConfig::default()
    };
    let perm = loaded.order(args.order);
    let (targets, mut cols, command): (Vec<Target>, Vec<String>, &str) = match args.target {
        TargetKind::Omega => (
            args.ys.iter().map(|&y| Target::Omega { y }).collect(),
            vec!["y".into()],
            "simulate omega",
        ),
        TargetKind::Theta => (vec![Target::Theta], Vec::new(), "simulate theta"),
    };
    cols.extend(["v", "phase", "estimate", "std_err", "analytic", "z"].map(String::from));
    let mut t = ResultTable::new(command, &loaded.hash, Some(args.seed), cols);
    t.meta("replications", args.reps.to_string());
    let ops = match args.target {
        TargetKind::Theta => match assemble(model, init.lambda, &RiccatiOptions::default()) {
            Ok(o) => Some(o),
            Err(e) => {
                t.meta("analytic", format!("unavailable: {e}"));
                None
            }
        },
        TargetKind::Omega => None,
    };
    let mut out = String::new();
    let mut raw = None;
    let mut worst: f64 = 0.0;
    for target in targets {
        let sim = Simulator::new(model, init, target, config)?;
        let batch = crate::parallel::run(&sim, args.reps);
        let counts = [StopReason::Reached, StopReason::NoReturn, StopReason::Capped]
            .map(|s| format!("{}={}", stop_name(s), batch.count(s)))
            .join(" ");
        let label = match target {
            Target::Omega { y } => format!("y={y}"),
            Target::Theta => "theta".into(),
        };
        t.meta("stops", format!("{label} {counts}"));
        if let Some(level) = sim.escape_threshold() {
            t.meta("escape_level", fmt_num(level));
        }
        let _ = writeln!(out, "{label}: {counts}");
        for &v in &args.vs {
            let est = empirical_measure(&batch, v);
            let set = set_for(v)?;
            let analytic = match (target, &ops) {
                (Target::Omega { y }, _) => mu_exp_dy(model, init, y, &set, &opts).map(|m| m.values),
                (Target::Theta, Some(ops)) => mu_phi(model, init, &set, ops, &opts).map(|m| m.values),
                (Target::Theta, None) => Ok(RowVector::from_element(model.n(), f64::NAN)),
            };
            let analytic = match analytic {
                Ok(a) => a,
                Err(e) => {
                    t.meta("analytic", format!("unavailable: {e}"));
                    RowVector::from_element(model.n(), f64::NAN)
                }
            };
            for &p in &perm {
                let z = z_score(est.mean[p], est.std_err[p], analytic[p]);
                if !z.is_nan() {
                    worst = worst.max(z.abs());
                }
                let mut row = match target {
                    Target::Omega { y } => vec![y],
                    Target::Theta => Vec::new(),
                };
                row.extend([v, (p + 1) as f64, est.mean[p], est.std_err[p], analytic[p], z]);
                t.push(row);
            }
        }
        if args.raw {
            raw = Some(raw_dump(&batch));
        }
    }
    let _ = writeln!(out, "largest |z| = {worst:.3}");
    Ok(Outcome { report: out, table: Some(t), raw, exit: 0 })
}

pub fn example(k: usize) -> Result<Outcome, CliError> {
    let rep = run_example(k)?;
    let mut out = String::new();
    let _ = writeln!(out, "example {k}: {}", rep.title);
    let width = rep.checks.iter().map(|c| c.label.len()).max().unwrap_or(0);
    let _ = writeln!(
        out,
        "{:<width$}  {:>14}  {:>14}  {:>10}  {:>7}",
        "quantity", "reference", "computed", "abs diff", "tol"
    );
    for c in &rep.checks {
        let _ = writeln!(
            out,
            "{:<width$}  {:>14.10}  {:>14.10}  {:>10.2e}  {:>7.0e}  {}",
            c.label,
            c.reference,
            c.computed,
            c.diff(),
            c.tol,
            if c.passed() { "ok" } else { "MISMATCH" }
        );
    }
    for n in &rep.notes {
        let _ = writeln!(out, "note: {n}");
    }
    let fails = rep.failures();
    let _ = writeln!(out, "{} of {} values reproduced", rep.checks.len() - fails, rep.checks.len());
    let mut t = ResultTable::new(
        "example",
        &format!("example-{k}"),
        None,
        ["index", "reference", "computed", "abs_diff", "tolerance"].map(String::from).to_vec(),
    );
    for (i, c) in rep.checks.iter().enumerate() {
        t.push(vec![i as f64, c.reference, c.computed, c.diff(), c.tol]);
    }
    Ok(Outcome { report: out, table: Some(t), raw: None, exit: if fails == 0 { 0 } else { 2 } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_file::ModelFile;

    fn ex(k: usize) -> Loaded {
        ModelFile::example(k).unwrap().load().unwrap()
    }

    #[test]
    fn v_grid() {
        let g = default_v_grid();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 5.0);
        assert!((g[1] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn transient_table_shape() {
        let o = transient(&ex(1), &DEFAULT_Y, &[0.0, 1.0, f64::INFINITY], PrintOrder::Natural).unwrap();
        let t = o.table.unwrap();
        assert_eq!(t.columns.len(), 2 + 3 * 2);
        assert_eq!(t.rows.len(), 2 * 3 + 3);
        // at v = inf mu equals the marginal
        for row in &t.rows[..6] {
            if row[1] == f64::INFINITY {
                assert!((row[2] - row[4] - row[6]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn validate_flags_boundary_failure() {
        let good = ModelFile::example(1).unwrap();
        assert_eq!(validate(&good.clone().load().unwrap()).unwrap().exit, 0);
        let l = good.load().unwrap();
        let mut f = ModelFile::from_parts(&l.model, &l.init);
        f.init.as_mut().unwrap().nu0 = vec![0.3, 0.5];
        let o = validate(&f.load().unwrap()).unwrap();
        assert_eq!(o.exit, 1);
        assert!(o.report.contains("FAILED"));
    }

    #[test]
    fn first_return_null_y_is_numerical() {
        let e = first_return(&ex(3), &[1.0], PrintOrder::Natural).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn return_ops_table() {
        let o = return_ops(&ex(5), None, PrintOrder::Natural).unwrap();
        let t = o.table.unwrap();
        // Psi and Xi are 1x1, the four full matrices 2x2
        assert_eq!(t.rows.len(), 2 + 4 * 4);
        assert!(o.report.contains("converged true"));
    }

    #[test]
    fn z_scores() {
        assert_eq!(z_score(0.5, 0.0, 0.5), 0.0);
        assert_eq!(z_score(0.6, 0.0, 0.5), f64::INFINITY);
        assert!((z_score(0.6, 0.05, 0.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn example_exit_codes() {
        assert_eq!(example(5).unwrap().exit, 0);
        assert_eq!(example(0).unwrap_err().exit_code(), 3);
    }
}
