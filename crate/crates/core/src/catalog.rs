//! Built-in example models.
//!
//! 1. Two phases, `c = r = (1, -1)`, `b = β = 1`, atom `0.2`.
//! 2. As 1 with the sign of `r` reversed.
//! 3. Four phases with uniform switching between the `c`-sign classes; `Y` is
//!    null recurrent.
//! 4. As 3 with the `S_- → S_+` switching split `0.4 / 0.6`.
//! 5. The model of 1, used for first-return values.
//! 6. The model of 4, used for first-return values.

use alloc::vec;

use crate::matops::Matrix;
use crate::model::{build_tandem_model, InitialDistribution, SffmModel, TandemParams};
use crate::{Error, Result};

pub const EXAMPLES: core::ops::RangeInclusive<usize> = 1..=6;

fn two_phase(r_signs: [i8; 2]) -> TandemParams {
    TandemParams {
        b: 1.0,
        beta: 1.0,
        gamma: 1.0,
        t_pm: Matrix::from_element(1, 1, 2.0),
        t_mp: Matrix::from_element(1, 1, 1.0),
        abs_r: vec![1.0; 2],
        r_signs: r_signs.to_vec(),
        c_signs: vec![1, -1],
        p_minus: vec![0.2],
        nu_minus_weights: None,
    }
}

/// Four phases, `c = (1, 1, -1, -1)`, `r = (1, -1, -1, 1)`, `b = β = 1`,
/// with `S_- → S_+` rows `[1 - s, s]`.
pub fn four_phase(split: f64, p: f64) -> TandemParams {
    TandemParams {
        b: 1.0,
        beta: 1.0,
        gamma: 1.0,
        t_pm: Matrix::from_element(2, 2, 1.0),
        t_mp: Matrix::from_row_slice(2, 2, &[1.0 - split, split, 1.0 - split, split]),
        abs_r: vec![1.0; 4],
        r_signs: vec![1, -1, -1, 1],
        c_signs: vec![1, 1, -1, -1],
        p_minus: vec![p / 2.0; 2],
        nu_minus_weights: None,
    }
}

pub fn tandem_params(k: usize) -> Result<TandemParams> {
    Ok(match k {
        1 | 5 => two_phase([1, -1]),
        2 => two_phase([-1, 1]),
        3 => four_phase(0.5, 0.2),
        4 | 6 => four_phase(0.6, 0.2),
        _ => return Err(Error::UnknownExample(k)),
    })
}

pub fn example(k: usize) -> Result<(SffmModel, InitialDistribution)> {
    build_tandem_model(&tandem_params(k)?)
}
