//! Exact event-driven simulation of the fluid-fluid model.
//!
//! Between phase jumps both levels move linearly, so stopping times are found
//! by solving a linear equation inside the current holding interval. Each
//! replication draws from its own ChaCha stream keyed by the replication
//! index, so results do not depend on how replications are scheduled.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::matops::{Matrix, RowVector};
use crate::model::{stability, InitialDistribution, Recurrence, SffmModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// Stop when `Ŷ = ∫|r|` reaches `y`.
    Omega { y: f64 },
    /// Stop when `Y` first returns to its starting level.
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Reached,
    /// `Y` drifted so far away that a return has negligible probability.
    NoReturn,
    Capped,
}

/// When to give up on a path of `Y` that is drifting away from its start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Escape {
    Never,
    /// Distance beyond which the path is abandoned.
    Level(f64),
    /// Distance at which the chance of ever coming back falls below the given
    /// tolerance, from the large-deviation rate of `Y`.
    Auto { tolerance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub replications: u64,
    pub max_events: u64,
    pub escape: Escape,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            replications: 100_000,
            max_events: 1_000_000,
            escape: Escape::Auto { tolerance: 1e-12 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub replication: u64,
    pub stop: StopReason,
    pub phase: usize,
    pub x: f64,
    pub t: f64,
    /// `Ŷ` at the stopping time.
    pub y_hat: f64,
    /// `∫ max(r, 0)` at the stopping time.
    pub h_plus: f64,
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub target: Target,
    pub phases: usize,
    pub records: Vec<SampleRecord>,
}

impl SampleBatch {
    pub fn count(&self, reason: StopReason) -> usize {
        self.records.iter().filter(|r| r.stop == reason).count()
    }
}

/// Precomputed jump tables for repeated replications.
#[derive(Debug, Clone)]
pub struct Simulator {
    target: Target,
    config: SimConfig,
    rates: Vec<f64>,
    jumps: Vec<Vec<(usize, f64)>>,
    c: Vec<f64>,
    r: Vec<f64>,
    start: Vec<(usize, bool, f64)>,
    lambda: f64,
    /// Signed escape threshold for `Y - Y(0)`: abandon once past it.
    escape_at: Option<f64>,
}

impl Simulator {
    pub fn new(model: &SffmModel, init: &InitialDistribution, target: Target, config: SimConfig) -> Result<Self> {
        if let Target::Omega { y } = target {
            if !(y >= 0.0 && y.is_finite()) {
                return Err(Error::BadArgument { what: "y", value: y });
            }
        }
        let n = model.n();
        let t = model.t();
        let rates: Vec<f64> = (0..n).map(|i| -t[(i, i)]).collect();
        let jumps = (0..n)
            .map(|i| {
                let mut acc = 0.0;
                let mut v = Vec::new();
                for j in (0..n).filter(|&j| j != i && t[(i, j)] > 0.0) {
                    acc += t[(i, j)];
                    v.push((j, acc));
                }
                v
            })
            .collect();
        let mut start = Vec::new();
        let mut acc = 0.0;
        for j in 0..n {
            if init.atom[j] > 0.0 {
                acc += init.atom[j];
                start.push((j, true, acc));
            }
            if init.nu0[j] > 0.0 {
                acc += init.nu0[j] / init.lambda;
                start.push((j, false, acc));
            }
        }
        let escape_at = match (target, config.escape) {
            (Target::Omega { .. }, _) | (_, Escape::Never) => None,
            (Target::Theta, e) => escape_threshold(model, e)?,
        };
        Ok(Self {
            target,
            config,
            rates,
            jumps,
            c: model.c().to_vec(),
            r: model.r().to_vec(),
            start,
            lambda: init.lambda,
            escape_at,
        })
    }

    pub fn escape_threshold(&self) -> Option<f64> {
        self.escape_at
    }

    /// One replication, drawn from stream `index` of the configured seed.
    pub fn replicate(&self, index: u64) -> SampleRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index);
        let total = self.start.last().map_or(1.0, |s| s.2);
        let u = uniform_open(&mut rng) * total;
        let &(mut phase, at_zero, _) = self.start.iter().find(|s| u <= s.2).unwrap_or(&self.start[self.start.len() - 1]);
        let mut x = if at_zero { 0.0 } else { exponential(&mut rng, self.lambda) };
        let mut t = 0.0;
        let mut y_hat = Kahan::default();
        let mut h_plus = Kahan::default();
        let mut y_tilde: f64 = 0.0;
        let mut events = 0;
        let record = |stop, phase, x, t, y_hat: &Kahan, h_plus: &Kahan, events| SampleRecord {
            replication: index,
            stop,
            phase,
            x,
            t,
            y_hat: y_hat.value(),
            h_plus: h_plus.value(),
            events,
        };
        loop {
            let rate = self.rates[phase];
            let hold = if rate > 0.0 { exponential(&mut rng, rate) } else { f64::INFINITY };
            let (c, r) = (self.c[phase], self.r[phase]);
            let stop_in = match self.target {
                Target::Omega { y } => Some(((y - y_hat.value()) / r.abs()).max(0.0)),
                Target::Theta => {
                    if (y_tilde > 0.0 && r < 0.0) || (y_tilde < 0.0 && r > 0.0) {
                        Some(y_tilde.abs() / r.abs())
                    } else {
                        None
                    }
                }
            };
            let dt = match stop_in {
                Some(s) if s <= hold => s,
                _ => hold,
            };
            let stopped = matches!(stop_in, Some(s) if s <= hold);
            x = (x + c * dt).max(0.0);
            t += dt;
            y_hat.add(r.abs() * dt);
            if r > 0.0 {
                h_plus.add(r * dt);
            }
            if stopped {
                return record(StopReason::Reached, phase, x, t, &y_hat, &h_plus, events);
            }
            y_tilde += r * dt;
            if let Some(lim) = self.escape_at {
                if (lim < 0.0 && y_tilde < lim) || (lim > 0.0 && y_tilde > lim) {
                    return record(StopReason::NoReturn, phase, x, t, &y_hat, &h_plus, events);
                }
            }
            events += 1;
            if events >= self.config.max_events {
                return record(StopReason::Capped, phase, x, t, &y_hat, &h_plus, events);
            }
            let row = &self.jumps[phase];
            let u = uniform_open(&mut rng) * rate;
            phase = row.iter().find(|(_, acc)| u <= *acc).unwrap_or(&row[row.len() - 1]).0;
        }
    }

    pub fn run(&self) -> SampleBatch {
        let records = (0..self.config.replications).map(|i| self.replicate(i)).collect();
        self.batch(records)
    }

    /// Wraps externally produced records, e.g. from a parallel runner.
    pub fn batch(&self, records: Vec<SampleRecord>) -> SampleBatch {
        SampleBatch {
            target: self.target,
            phases: self.c.len(),
            records,
        }
    }
}

pub fn run_to_omega(model: &SffmModel, init: &InitialDistribution, y: f64, config: &SimConfig) -> Result<SampleBatch> {
    Ok(Simulator::new(model, init, Target::Omega { y }, *config)?.run())
}

pub fn run_to_theta(model: &SffmModel, init: &InitialDistribution, config: &SimConfig) -> Result<SampleBatch> {
    Ok(Simulator::new(model, init, Target::Theta, *config)?.run())
}

/// Estimated `P(φ = j, X ≤ v)` at the stopping time with binomial standard
/// errors. Capped paths are excluded when stopping at `ω(y)`; when stopping at
/// `θ` every path that did not return counts towards the missing mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: RowVector,
    pub std_err: RowVector,
    pub samples: usize,
}

pub fn empirical_measure(batch: &SampleBatch, v: f64) -> Estimate {
    let used: Vec<&SampleRecord> = match batch.target {
        Target::Omega { .. } => batch.records.iter().filter(|r| r.stop != StopReason::Capped).collect(),
        Target::Theta => batch.records.iter().collect(),
    };
    let n = used.len().max(1) as f64;
    let mut counts = RowVector::zeros(batch.phases);
    for r in &used {
        if r.stop == StopReason::Reached && r.x <= v {
            counts[r.phase] += 1.0;
        }
    }
    let mean = counts / n;
    let std_err = mean.map(|p| libm::sqrt(p * (1.0 - p) / n));
    Estimate { mean, std_err, samples: used.len() }
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    -libm::log(uniform_open(rng)) / rate
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Largest real part among the eigenvalues of `T + θR`.
fn growth_rate(t: &Matrix, r: &[f64], theta: f64) -> f64 {
    let mut a = t.clone();
    for (i, ri) in r.iter().enumerate() {
        a[(i, i)] += theta * ri;
    }
    a.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Signed distance from the start beyond which `Y` is treated as gone.
fn escape_threshold(model: &SffmModel, escape: Escape) -> Result<Option<f64>> {
    let tolerance = match escape {
        Escape::Never => return Ok(None),
        Escape::Level(l) => {
            let d = stability(model)?.drift_y;
            return Ok(if d == 0.0 { None } else { Some(l.abs() * d.signum()) });
        }
        Escape::Auto { tolerance } => tolerance,
    };
    let s = stability(model)?;
    if s.y == Recurrence::Null {
        return Ok(None);
    }
    // Drifting towards -∞ (sign -1) the return probability from depth L decays
    // like e^{-θ* L} where T + θ* R has Perron root zero, θ* > 0.
    let sign = if s.drift_y < 0.0 { 1.0 } else { -1.0 };
    let r: Vec<f64> = model.r().iter().map(|x| x * sign).collect();
    if r.iter().all(|&x| x < 0.0) {
        return Ok(Some(-sign * f64::MIN_POSITIVE));
    }
    let t = model.t();
    let mut hi = 1.0;
    while growth_rate(t, &r, hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(None);
        }
    }
    let mut lo = hi / 2.0;
    while growth_rate(t, &r, lo) > 0.0 && lo > 1e-12 {
        lo /= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if growth_rate(t, &r, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = lo;
    // Spread of the Perron vector bounds the prefactor.
    let mut a = t.clone();
    for (i, ri) in r.iter().enumerate() {
        a[(i, i)] += theta * ri;
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |m, (i, &s)| if s < m.1 { (i, s) } else { m });
    let h: Vec<f64> = (0..model.n()).map(|j| v_t[(k, j)].abs()).collect();
    let spread = h.iter().copied().fold(0.0, f64::max) / h.iter().copied().fold(f64::INFINITY, f64::min).max(1e-300);
    let level = (libm::log(1.0 / tolerance) + libm::log(spread.max(1.0))) / theta;
    Ok(Some(-sign * level))
}
