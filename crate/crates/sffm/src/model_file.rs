//! TOML model files.
//!
//! A file has a `schema` number, an optional `[model]` section and exactly one
//! of `[init]` (explicit initial law, needs `[model]`) or `[tandem]` (model and
//! initial law built together). An `[analysis]` section supplies defaults for
//! command flags.
//!
//! ```toml
//! schema = 1
//!
//! [model]
//! n = 2
//! T = [[-2.0, 2.0], [1.0, -1.0]]
//! c = [1.0, -1.0]
//! r = [1.0, -1.0]
//!
//! [init]
//! lambda = 1.0
//! nu0 = [0.2, 0.6]
//! P = [0.0, 0.2]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sffm_core::catalog;
use sffm_core::model::build_tandem_model;
use sffm_core::{InitialDistribution, Matrix, RowVector, SffmModel, TandemParams};

use crate::CliError;

pub const SCHEMA: u32 = 1;

/// Tolerance for a `[model]` section written next to `[tandem]`.
pub const MODEL_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tandem: Option<TandemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub r: Vec<f64>,
    /// 1-based print order used by `--order paper`. Defaults to `S^+` then
    /// `S^-`, each increasing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub lambda: f64,
    pub nu0: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TandemSection {
    pub b: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "T_pm")]
    pub t_pm: Vec<Vec<f64>>,
    #[serde(rename = "T_mp")]
    pub t_mp: Vec<Vec<f64>>,
    pub abs_r: Vec<f64>,
    pub r_signs: Vec<i8>,
    pub c_signs: Vec<i8>,
    #[serde(rename = "P_minus")]
    pub p_minus: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_minus_weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrintOrder {
    Natural,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Omega,
    Theta,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<PrintOrder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetKind>,
}

/// A parsed file together with the model it describes.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub file: ModelFile,
    pub model: SffmModel,
    pub init: InitialDistribution,
    pub hash: String,
    /// 0-based permutation for `--order paper`.
    pub paper_order: Vec<usize>,
}

impl Loaded {
    pub fn order(&self, order: PrintOrder) -> Vec<usize> {
        match order {
            PrintOrder::Natural => (0..self.model.n()).collect(),
            PrintOrder::Paper => self.paper_order.clone(),
        }
    }

    pub fn analysis(&self) -> AnalysisSection {
        self.file.analysis.clone().unwrap_or_default()
    }
}

fn rows_to_matrix(what: &str, rows: &[Vec<f64>]) -> Result<Matrix, CliError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::File(format!("{what} rows have different lengths")));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ModelFile = toml::from_str(text).map_err(|e| CliError::File(e.message().to_string()))?;
        if file.schema != SCHEMA {
            return Err(CliError::File(format!("unsupported schema {}, expected {SCHEMA}", file.schema)));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model file fields are always representable")
    }

    /// SHA-256 of the canonical serialization, in hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn from_tandem(p: &TandemParams) -> Self {
        ModelFile {
            schema: SCHEMA,
            model: None,
            init: None,
            tandem: Some(TandemSection {
                b: p.b,
                beta: p.beta,
                gamma: p.gamma,
                t_pm: matrix_to_rows(&p.t_pm),
                t_mp: matrix_to_rows(&p.t_mp),
                abs_r: p.abs_r.clone(),
                r_signs: p.r_signs.clone(),
                c_signs: p.c_signs.clone(),
                p_minus: p.p_minus.clone(),
                nu_minus_weights: p.nu_minus_weights.clone(),
            }),
            analysis: None,
        }
    }

    pub fn from_parts(model: &SffmModel, init: &InitialDistribution) -> Self {
        ModelFile {
            schema: SCHEMA,
            model: Some(ModelSection {
                n: model.n(),
                t: matrix_to_rows(model.t()),
                c: model.c().to_vec(),
                r: model.r().to_vec(),
                order: None,
            }),
            init: Some(InitSection {
                lambda: init.lambda,
                nu0: init.nu0.iter().copied().collect(),
                p: init.atom.iter().copied().collect(),
            }),
            tandem: None,
            analysis: None,
        }
    }

    /// The file for built-in example `k`.
    pub fn example(k: usize) -> Result<Self, CliError> {
        Ok(Self::from_tandem(&catalog::tandem_params(k)?))
    }

    pub fn load(self) -> Result<Loaded, CliError> {
        let (model, init) = match (&self.init, &self.tandem) {
            (Some(_), Some(_)) => return Err(CliError::File("both [init] and [tandem] are present".into())),
            (None, None) => return Err(CliError::File("one of [init] or [tandem] is required".into())),
            (Some(init), None) => {
                let sec = self
                    .model
                    .as_ref()
                    .ok_or_else(|| CliError::File("[init] needs a [model] section".into()))?;
                let model = self.build_model(sec)?;
                let init = InitialDistribution::new(
                    &model,
                    init.lambda,
                    RowVector::from_row_slice(&init.nu0),
                    RowVector::from_row_slice(&init.p),
                )?;
                (model, init)
            }
            (None, Some(tandem)) => {
                let (model, init) = build_tandem_model(&tandem_params(tandem)?)?;
                if let Some(sec) = &self.model {
                    check_same(&self.build_model(sec)?, &model)?;
                }
                (model, init)
            }
        };
        let paper_order = match self.model.as_ref().and_then(|m| m.order.clone()) {
            Some(order) => check_order(&order, model.n())?,
            None => model.partition().r_order(),
        };
        Ok(Loaded {
            hash: self.hash(),
            file: self,
            model,
            init,
            paper_order,
        })
    }

    fn build_model(&self, sec: &ModelSection) -> Result<SffmModel, CliError> {
        if sec.t.len() != sec.n {
            return Err(CliError::File(format!("n = {} but T has {} rows", sec.n, sec.t.len())));
        }
        let t = rows_to_matrix("T", &sec.t)?;
        Ok(SffmModel::new(t, sec.c.clone(), sec.r.clone())?)
    }
}

fn tandem_params(s: &TandemSection) -> Result<TandemParams, CliError> {
    Ok(TandemParams {
        b: s.b,
        beta: s.beta,
        gamma: s.gamma,
        t_pm: rows_to_matrix("T_pm", &s.t_pm)?,
        t_mp: rows_to_matrix("T_mp", &s.t_mp)?,
        abs_r: s.abs_r.clone(),
        r_signs: s.r_signs.clone(),
        c_signs: s.c_signs.clone(),
        p_minus: s.p_minus.clone(),
        nu_minus_weights: s.nu_minus_weights.clone(),
    })
}

fn check_same(given: &SffmModel, built: &SffmModel) -> Result<(), CliError> {
    let mismatch = || CliError::File("[model] does not match the model built from [tandem]".into());
    if given.n() != built.n() {
        return Err(mismatch());
    }
    let dt = (given.t() - built.t()).abs().max();
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MODEL_MATCH_TOL);
    if dt > MODEL_MATCH_TOL || !close(given.c(), built.c()) || !close(given.r(), built.r()) {
        return Err(mismatch());
    }
    Ok(())
}

fn check_order(order: &[usize], n: usize) -> Result<Vec<usize>, CliError> {
    let mut seen = vec![false; n];
    for &k in order {
        if k == 0 || k > n || seen[k - 1] {
            return Err(CliError::File(format!("order must be a permutation of 1..={n}")));
        }
        seen[k - 1] = true;
    }
    if order.len() != n {
        return Err(CliError::File(format!("order must be a permutation of 1..={n}")));
    }
    Ok(order.iter().map(|k| k - 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX5: &str = r#"
schema = 1

[model]
n = 2
T = [[-2.0, 2.0], [1.0, -1.0]]
c = [1.0, -1.0]
r = [1.0, -1.0]

[init]
lambda = 1.0
nu0 = [0.2, 0.6]
P = [0.0, 0.2]
"#;

    #[test]
    fn explicit_matches_tandem() {
        let a = ModelFile::parse(EX5).unwrap().load().unwrap();
        let b = ModelFile::example(5).unwrap().load().unwrap();
        assert_eq!(a.model.t(), b.model.t());
        assert!((&a.init.nu0 - &b.init.nu0).abs().max() < 1e-15);
        assert_eq!(a.init.atom, b.init.atom);
        assert!(!a.init.is_certified());
        assert!(b.init.is_certified());
    }

    #[test]
    fn init_and_tandem_exclusive() {
        let mut f = ModelFile::example(1).unwrap();
        f.init = Some(InitSection { lambda: 1.0, nu0: vec![0.2, 0.6], p: vec![0.0, 0.2] });
        assert!(matches!(f.clone().load(), Err(CliError::File(_))));
        f.init = None;
        f.tandem = None;
        assert!(matches!(f.load(), Err(CliError::File(_))));
    }

    #[test]
    fn model_beside_tandem_must_agree() {
        let (m, i) = catalog::example(6).unwrap();
        let mut f = ModelFile::example(6).unwrap();
        f.model = ModelFile::from_parts(&m, &i).model;
        assert!(f.clone().load().is_ok());
        f.model.as_mut().unwrap().c[0] = 2.0;
        assert!(f.load().is_err());
    }

    #[test]
    fn paper_order_defaults_to_r_sign_blocks() {
        let l = ModelFile::example(6).unwrap().load().unwrap();
        assert_eq!(l.order(PrintOrder::Paper), vec![0, 3, 1, 2]);
        assert_eq!(l.order(PrintOrder::Natural), vec![0, 1, 2, 3]);
    }

    #[test]
    fn bad_order_rejected() {
        assert!(check_order(&[1, 1], 2).is_err());
        assert!(check_order(&[1], 2).is_err());
        assert!(check_order(&[0, 1], 2).is_err());
        assert_eq!(check_order(&[2, 1], 2).unwrap(), vec![1, 0]);
    }

    #[test]
    fn unknown_field_and_schema() {
        assert!(ModelFile::parse("schema = 2\n").is_err());
        assert!(ModelFile::parse("schema = 1\nfoo = 3\n").is_err());
    }

    #[test]
    fn hash_is_stable() {
        let f = ModelFile::example(1).unwrap();
        assert_eq!(f.hash(), f.clone().hash());
        assert_eq!(f.hash().len(), 64);
        assert_ne!(f.hash(), ModelFile::example(2).unwrap().hash());
    }
}
