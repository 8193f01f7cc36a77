//! Per-step error rates, cycle-length optimization, single-qubit baselines
//! and the discrete/continuous result tables.
//!
//! Monte Carlo trials use `ChaCha8Rng` seeded with the run seed and put on
//! stream `i` for trial `i`, so every trial has its own reproducible
//! sequence whatever the thread count. Per-trial results are collected in
//! trial order and summed sequentially.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use serde_json::json;

use crate::error::{Error, Result};
use crate::error_models::{compose_discrete_steps, sample_continuous, ErrorModel};
use crate::pauli::{penalty_weights, OracleCurve};
use crate::qec_circuit::{QecCode, CYCLE_OVERHEAD};
use crate::statevector::{fidelity, StateVector};

/// `1 - (1 - ε_final)^(1/T)`, the error per time step of a cycle that takes
/// `t_total` steps and fails with probability `epsilon_final`.
pub fn epsilon_step(epsilon_final: f64, t_total: u64) -> Result<f64> {
    if t_total == 0 {
        return Err(Error::InvalidParameter("cycle length must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&epsilon_final) {
        return Err(Error::InvalidParameter(format!(
            "epsilon_final {epsilon_final} outside [0, 1]"
        )));
    }
    if epsilon_final == 1.0 {
        return Ok(1.0);
    }
    Ok(-((-epsilon_final).ln_1p() / t_total as f64).exp_m1())
}

/// Mean of per-trial ε_final with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
}

impl McEstimate {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_err = if n > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_err,
            trials: n,
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    Ok(())
}

/// Monte Carlo estimate of ε_final for the standard cycle on the probe state.
pub fn estimate_epsilon_final_mc(model: &ErrorModel, t_wait: usize, trials: usize, seed: u64) -> Result<McEstimate> {
    estimate_epsilon_final_mc_for(
        QecCode::standard(),
        &StateVector::test_state(),
        model,
        t_wait,
        trials,
        seed,
    )
}

pub fn estimate_epsilon_final_mc_for(
    code: &QecCode,
    input: &StateVector,
    model: &ErrorModel,
    t_wait: usize,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    Ok(sample_cycles_for(code, input, model, t_wait, trials, seed)?.estimate)
}

/// ε_final estimate together with how often each syndrome was measured.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleStats {
    pub estimate: McEstimate,
    pub syndrome_counts: [u64; 16],
}

/// Runs `trials` seeded cycles of the standard code on the probe state.
pub fn sample_cycles(model: &ErrorModel, t_wait: usize, trials: usize, seed: u64) -> Result<CycleStats> {
    sample_cycles_for(
        QecCode::standard(),
        &StateVector::test_state(),
        model,
        t_wait,
        trials,
        seed,
    )
}

pub fn sample_cycles_for(
    code: &QecCode,
    input: &StateVector,
    model: &ErrorModel,
    t_wait: usize,
    trials: usize,
    seed: u64,
) -> Result<CycleStats> {
    check_trials(trials)?;
    let runs: Vec<(f64, u8)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            code.run_cycle(input, model, t_wait, &mut rng)
                .map(|r| (r.epsilon_final, r.syndrome))
        })
        .collect::<Result<_>>()?;
    let mut syndrome_counts = [0u64; 16];
    for &(_, s) in &runs {
        syndrome_counts[s as usize] += 1;
    }
    let samples: Vec<f64> = runs.into_iter().map(|r| r.0).collect();
    Ok(CycleStats {
        estimate: McEstimate::from_samples(&samples),
        syndrome_counts,
    })
}

/// How ε_final is obtained for each grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluator {
    /// Exact Pauli-class propagation; discrete model only.
    Oracle,
    MonteCarlo {
        trials: usize,
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Oracle,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::MonteCarlo => "montecarlo",
        }
    }
}

/// One evaluated cycle length. Rows of the CSV output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub model: &'static str,
    /// `p` for the discrete model, `sigma` for the continuous one.
    pub param: f64,
    #[serde(rename = "T")]
    pub t_total: u64,
    pub t_wait: u64,
    pub epsilon_final: f64,
    pub epsilon_step: f64,
    pub std_err: f64,
    pub trials: usize,
    pub method: Method,
}

impl SweepRecord {
    /// `epsilon_step / p`; `None` when `p` is zero.
    pub fn improvement(&self, p: f64) -> Option<f64> {
        (p > 0.0).then(|| self.epsilon_step / p)
    }
}

/// A scan over cycle lengths and the point chosen from it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub model: &'static str,
    pub param: f64,
    pub method: Method,
    pub best: SweepRecord,
    /// Whether `best` is a local minimum strictly inside the grid. When no
    /// such minimum exists `best` is the grid minimizer, which for a
    /// saturating ε_final lies at the long end of the grid.
    pub interior: bool,
    pub points: Vec<SweepRecord>,
}

struct Evaluation<'a> {
    model: ErrorModel,
    evaluator: Evaluator,
    curve: Option<OracleCurve>,
    code: &'a QecCode,
}

impl<'a> Evaluation<'a> {
    fn new(code: &'a QecCode, model: &ErrorModel, evaluator: Evaluator) -> Result<Self> {
        let curve = match (evaluator, model) {
            (Evaluator::Oracle, ErrorModel::Discrete(m)) => Some(OracleCurve::new(
                code,
                m.p(),
                &penalty_weights(&StateVector::test_state())?,
            )?),
            (Evaluator::Oracle, ErrorModel::Continuous(_)) => {
                return Err(Error::InvalidParameter(
                    "the exact oracle supports only the discrete model".into(),
                ))
            }
            (Evaluator::MonteCarlo { trials, .. }, _) => {
                check_trials(trials)?;
                None
            }
        };
        Ok(Self {
            model: *model,
            evaluator,
            curve,
            code,
        })
    }

    fn point(&self, t_wait: u64) -> Result<SweepRecord> {
        let t_total = t_wait + CYCLE_OVERHEAD as u64;
        let (eps, std_err, trials, method) = match (&self.curve, self.evaluator) {
            (Some(curve), _) => (curve.epsilon_final(t_wait), 0.0, 0, Method::Oracle),
            (None, Evaluator::MonteCarlo { trials, seed }) => {
                let t = usize::try_from(t_wait).map_err(|_| Error::InvalidParameter("wait too long".into()))?;
                let est =
                    estimate_epsilon_final_mc_for(self.code, &StateVector::test_state(), &self.model, t, trials, seed)?;
                (est.mean, est.std_err, trials, Method::MonteCarlo)
            }
            (None, Evaluator::Oracle) => unreachable!("oracle evaluation always has a curve"),
        };
        Ok(SweepRecord {
            model: self.model.kind(),
            param: self.model.param(),
            t_total,
            t_wait,
            epsilon_final: eps,
            epsilon_step: epsilon_step(eps, t_total)?,
            std_err,
            trials,
            method,
        })
    }
}

/// Index of the first strict interior local minimum, if any.
fn first_interior_minimum(points: &[SweepRecord]) -> Option<usize> {
    let e: Vec<f64> = points.iter().map(|r| r.epsilon_step).collect();
    (1..e.len().saturating_sub(1)).find(|&i| {
        e[i] < e[i - 1] && {
            // Walk across a flat stretch to the next distinct value.
            let next = e[i + 1..].iter().find(|&&x| x != e[i]);
            next.is_some_and(|&x| x > e[i])
        }
    })
}

fn argmin_first(points: &[SweepRecord]) -> usize {
    let mut best = 0;
    for (i, r) in points.iter().enumerate() {
        if r.epsilon_step < points[best].epsilon_step {
            best = i;
        }
    }
    best
}

/// Evaluates every wait time in `t_grid` (sorted and deduplicated first) and
/// picks the optimum used for the result tables.
///
/// The optimum is the first local minimum of ε_step strictly inside the
/// grid. ε_final saturates at long waits, which drives ε_step back towards
/// zero as `1/T`; the global minimizer of a wide grid is therefore always
/// its last point and says nothing about the useful regime. If the curve has
/// no interior minimum the grid minimizer is returned (ties go to the
/// smaller `T`) and the sweep is flagged as not interior.
pub fn scan_t_wait(model: &ErrorModel, evaluator: Evaluator, t_grid: &[u64]) -> Result<Sweep> {
    scan_t_wait_for(QecCode::standard(), model, evaluator, t_grid)
}

pub fn scan_t_wait_for(code: &QecCode, model: &ErrorModel, evaluator: Evaluator, t_grid: &[u64]) -> Result<Sweep> {
    let mut grid = t_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty wait-time grid".into()));
    }
    let eval = Evaluation::new(code, model, evaluator)?;
    let points: Vec<SweepRecord> = grid.iter().map(|&t| eval.point(t)).collect::<Result<_>>()?;
    let (idx, interior) = match first_interior_minimum(&points) {
        Some(i) => (i, true),
        None => (argmin_first(&points), false),
    };
    Ok(Sweep {
        model: model.kind(),
        param: model.param(),
        method: points[idx].method,
        best: points[idx].clone(),
        interior,
        points,
    })
}

/// The grid point with the smallest ε_step, ties going to the smaller `T`.
///
/// This is the plain minimizer over whatever grid the caller passes, so on
/// grids reaching far past `1/p` it lands on the saturated tail. The table
/// reproductions use [`scan_t_wait`] instead.
pub fn find_t_opt(model: &ErrorModel, evaluator: Evaluator, t_grid: &[u64]) -> Result<SweepRecord> {
    let sweep = scan_t_wait(model, evaluator, t_grid)?;
    let i = argmin_first(&sweep.points);
    Ok(sweep.points[i].clone())
}

/// Wait times for the discrete model: every integer up to 100, then about
/// 40 points per decade up to `50/p`.
pub fn default_discrete_grid(p: f64) -> Vec<u64> {
    let mut grid: Vec<u64> = (0..=100).collect();
    if p > 0.0 {
        let hi = (50.0 / p).min(1e10);
        let mut t = 100.0f64;
        while t < hi {
            t *= 10f64.powf(1.0 / 40.0);
            grid.push(t.round() as u64);
        }
    }
    grid.dedup();
    grid
}

/// Oracle T_opt search: coarse scan on [`default_discrete_grid`], then every
/// integer wait within ±20% of an interior optimum.
pub fn oracle_t_opt(p: f64) -> Result<Sweep> {
    let model = ErrorModel::discrete(p)?;
    let coarse = scan_t_wait(&model, Evaluator::Oracle, &default_discrete_grid(p))?;
    if !coarse.interior || coarse.best.t_wait <= 100 {
        return Ok(coarse);
    }
    let t = coarse.best.t_wait as f64;
    let (lo, hi) = ((0.8 * t).floor() as u64, (1.2 * t).ceil() as u64);
    let step = ((hi - lo) / 200_000).max(1);
    let fine: Vec<u64> = (lo..=hi).step_by(step as usize).collect();
    let eval = Evaluation::new(QecCode::standard(), &model, Evaluator::Oracle)?;
    let mut best = coarse.best.clone();
    for t in fine {
        let r = eval.point(t)?;
        if r.epsilon_step < best.epsilon_step || (r.epsilon_step == best.epsilon_step && r.t_wait < best.t_wait) {
            best = r;
        }
    }
    let mut points = coarse.points;
    points.push(best.clone());
    points.sort_by_key(|r| r.t_wait);
    points.dedup_by_key(|r| r.t_wait);
    Ok(Sweep { best, points, ..coarse })
}

/// Error rate of a bare qubit holding the probe state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Baseline {
    pub p_step: f64,
    pub epsilon_final: f64,
    pub std_err: f64,
    pub trials: usize,
}

/// Per-step error of an unprotected qubit over `t_total` steps, through the
/// same single-qubit version of the ε_step formula. Exact for the discrete
/// model; Monte Carlo with `trials` runs for the continuous model.
pub fn single_qubit_baseline(model: &ErrorModel, t_total: u64, trials: usize, seed: u64) -> Result<Baseline> {
    let psi = StateVector::test_state();
    match model {
        ErrorModel::Discrete(m) => {
            let w = penalty_weights(&psi)?;
            let d = compose_discrete_steps(m.p(), t_total).by_letter();
            let eps = d.iter().zip(w).map(|(a, b)| a * b).sum::<f64>().clamp(0.0, 1.0);
            Ok(Baseline {
                p_step: epsilon_step(eps, t_total)?,
                epsilon_final: eps,
                std_err: 0.0,
                trials: 0,
            })
        }
        ErrorModel::Continuous(m) => {
            check_trials(trials)?;
            let samples: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut rng = trial_rng(seed, i);
                    let mut s = psi.clone();
                    for _ in 0..t_total {
                        s.apply_1q_unchecked(&sample_continuous(m, &mut rng), 0);
                    }
                    (1.0 - fidelity(&s, &psi).expect("same dimension")).clamp(0.0, 1.0)
                })
                .collect();
            let est = McEstimate::from_samples(&samples);
            Ok(Baseline {
                p_step: epsilon_step(est.mean, t_total)?,
                epsilon_final: est.mean,
                std_err: est.std_err,
                trials,
            })
        }
    }
}

/// Published reference values for the discrete table: `(p, T_opt, ε_step)`.
/// Used only for side-by-side comparison.
pub const REFERENCE_DISCRETE: [(f64, u64, f64); 8] = [
    (1e-2, 25, 1.7e-2),
    (1.6e-3, 40, 1.6e-3),
    (1e-3, 50, 8.4e-4),
    (1e-4, 150, 3.1e-5),
    (1e-5, 750, 1.1e-6),
    (1e-6, 1500, 3.2e-8),
    (1e-7, 6000, 1.1e-9),
    (1e-8, 10000, 2.0e-11),
];

/// Published reference values for the continuous table:
/// `(sigma, T_opt, single-qubit p, ε_step)`.
pub const REFERENCE_CONTINUOUS: [(f64, u64, f64, f64); 5] = [
    (1e-1, 25, 5.9e-2, 6.9e-3),
    (1e-2, 250, 5.9e-3, 1.4e-5),
    (1e-3, 2500, 6.0e-4, 1.3e-8),
    (1e-4, 25000, 6.0e-5, 1.0e-11),
    (1e-5, 250000, 6.0e-6, 7.2e-15),
];

fn same_param(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// A reproduced row of the discrete table next to its reference.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteRow {
    pub record: SweepRecord,
    pub improvement: f64,
    pub interior: bool,
    pub ref_t_opt: Option<u64>,
    pub ref_epsilon_step: Option<f64>,
    pub ref_improvement: Option<f64>,
}

/// Reproduces the discrete table for `p_values`.
pub fn reproduce_table2(p_values: &[f64], evaluator: Evaluator) -> Result<Vec<DiscreteRow>> {
    p_values
        .iter()
        .map(|&p| {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1]")));
            }
            let sweep = match evaluator {
                Evaluator::Oracle => oracle_t_opt(p)?,
                Evaluator::MonteCarlo { .. } => {
                    let grid: Vec<u64> = default_discrete_grid(p).into_iter().filter(|&t| t <= 200).collect();
                    scan_t_wait(&ErrorModel::discrete(p)?, evaluator, &grid)?
                }
            };
            let reference = REFERENCE_DISCRETE.iter().find(|r| same_param(r.0, p));
            Ok(DiscreteRow {
                improvement: sweep.best.epsilon_step / p,
                interior: sweep.interior,
                ref_t_opt: reference.map(|r| r.1),
                ref_epsilon_step: reference.map(|r| r.2),
                ref_improvement: reference.map(|r| r.2 / r.0),
                record: sweep.best,
            })
        })
        .collect()
}

/// A reproduced row of the continuous table next to its reference.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousRow {
    pub record: SweepRecord,
    /// Measured single-qubit error per step at the same `T`.
    pub baseline_p: f64,
    pub baseline_std_err: f64,
    pub improvement: Option<f64>,
    pub interior: bool,
    pub ref_t_opt: Option<u64>,
    pub ref_p: Option<f64>,
    pub ref_epsilon_step: Option<f64>,
    pub ref_improvement: Option<f64>,
}

// Rows serialize flat, record fields first, so the same shape works for CSV
// (which rejects nested structs and `serde(flatten)`) and JSON.
fn serialize_flat<S: Serializer>(
    s: S,
    name: &'static str,
    r: &SweepRecord,
    extras: &[(&'static str, serde_json::Value)],
) -> std::result::Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct(name, 9 + extras.len())?;
    st.serialize_field("model", r.model)?;
    st.serialize_field("param", &r.param)?;
    st.serialize_field("T", &r.t_total)?;
    st.serialize_field("t_wait", &r.t_wait)?;
    st.serialize_field("epsilon_final", &r.epsilon_final)?;
    st.serialize_field("epsilon_step", &r.epsilon_step)?;
    st.serialize_field("std_err", &r.std_err)?;
    st.serialize_field("trials", &r.trials)?;
    st.serialize_field("method", &r.method)?;
    for (k, v) in extras {
        st.serialize_field(k, v)?;
    }
    st.end()
}

impl Serialize for DiscreteRow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_flat(
            s,
            "DiscreteRow",
            &self.record,
            &[
                ("improvement", json!(self.improvement)),
                ("interior", json!(self.interior)),
                ("ref_t_opt", json!(self.ref_t_opt)),
                ("ref_epsilon_step", json!(self.ref_epsilon_step)),
                ("ref_improvement", json!(self.ref_improvement)),
            ],
        )
    }
}

impl Serialize for ContinuousRow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_flat(
            s,
            "ContinuousRow",
            &self.record,
            &[
                ("baseline_p", json!(self.baseline_p)),
                ("baseline_std_err", json!(self.baseline_std_err)),
                ("improvement", json!(self.improvement)),
                ("interior", json!(self.interior)),
                ("ref_t_opt", json!(self.ref_t_opt)),
                ("ref_p", json!(self.ref_p)),
                ("ref_epsilon_step", json!(self.ref_epsilon_step)),
                ("ref_improvement", json!(self.ref_improvement)),
            ],
        )
    }
}

/// Cycle lengths tried for the continuous model: multiples of `2.5/sigma`
/// from one half to twice, never below the 14-step overhead.
pub fn default_continuous_grid(sigma: f64) -> Vec<u64> {
    let centre = if sigma > 0.0 {
        2.5 / sigma
    } else {
        CYCLE_OVERHEAD as f64
    };
    let mut grid: Vec<u64> = [0.5, 0.7, 1.0, 1.4, 2.0]
        .iter()
        .map(|f| ((f * centre).round() as u64).saturating_sub(CYCLE_OVERHEAD as u64))
        .collect();
    grid.dedup();
    grid
}

/// Reproduces the continuous table by Monte Carlo with `trials` runs per
/// grid point.
pub fn reproduce_table3(sigma_values: &[f64], trials: usize, seed: u64) -> Result<Vec<ContinuousRow>> {
    sigma_values
        .iter()
        .map(|&sigma| {
            let model = ErrorModel::continuous(sigma)?;
            let sweep = scan_t_wait(
                &model,
                Evaluator::MonteCarlo { trials, seed },
                &default_continuous_grid(sigma),
            )?;
            let base = single_qubit_baseline(&model, sweep.best.t_total, trials, seed)?;
            let reference = REFERENCE_CONTINUOUS.iter().find(|r| same_param(r.0, sigma));
            Ok(ContinuousRow {
                improvement: (base.p_step > 0.0).then(|| sweep.best.epsilon_step / base.p_step),
                baseline_p: base.p_step,
                baseline_std_err: base.std_err,
                interior: sweep.interior,
                ref_t_opt: reference.map(|r| r.1),
                ref_p: reference.map(|r| r.2),
                ref_epsilon_step: reference.map(|r| r.3),
                ref_improvement: reference.map(|r| r.3 / r.2),
                record: sweep.best,
            })
        })
        .collect()
}

/// Outcome of the break-even search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BreakEven {
    /// Estimated crossing point.
    pub p_star: f64,
    /// True when the crossing is a genuine `ε_step = p` crossing; false when
    /// it marks the point above which ε_step has no interior minimum.
    pub ratio_crossing: bool,
}

/// Largest `p` in `[lo, hi]` up to which the optimized encoded error stays
/// below `p`, found by a log-spaced scan refined by bisection.
pub fn break_even(lo: f64, hi: f64) -> Result<Option<BreakEven>> {
    if !(lo > 0.0 && hi > lo && hi <= 1.0) {
        return Err(Error::InvalidParameter("need 0 < lo < hi <= 1".into()));
    }
    // Some(ratio) when an interior optimum exists.
    let probe = |p: f64| -> Result<Option<f64>> {
        let s = oracle_t_opt(p)?;
        Ok(s.interior.then(|| s.best.epsilon_step / p))
    };
    let helps = |r: Option<f64>| r.is_some_and(|x| x < 1.0);
    let steps = ((hi / lo).log10() * 20.0).ceil() as usize;
    let ps: Vec<f64> = (0..=steps)
        .map(|k| lo * (hi / lo).powf(k as f64 / steps as f64))
        .collect();
    let mut prev = (ps[0], probe(ps[0])?);
    if !helps(prev.1) {
        return Ok(None);
    }
    for &p in &ps[1..] {
        let cur = (p, probe(p)?);
        if !helps(cur.1) {
            let ratio_crossing = cur.1.is_some();
            let (mut a, mut b) = (prev.0, cur.0);
            for _ in 0..40 {
                let mid = (a * b).sqrt();
                if helps(probe(mid)?) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(Some(BreakEven {
                p_star: (a * b).sqrt(),
                ratio_crossing,
            }));
        }
        prev = cur;
    }
    Ok(None)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::InvalidParameter(
            "slope needs at least two positive points".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Log-log slope of oracle ε_step against `p` at a fixed wait, over
/// `points` log-spaced values in `[p_lo, p_hi]`.
pub fn suppression_slope(t_wait: u64, p_lo: f64, p_hi: f64, points: usize) -> Result<f64> {
    let pts: Vec<(f64, f64)> = (0..points.max(2))
        .map(|k| {
            let p = p_lo * (p_hi / p_lo).powf(k as f64 / (points.max(2) - 1) as f64);
            let curve = OracleCurve::standard(p)?;
            let e = epsilon_step(curve.epsilon_final(t_wait), t_wait + CYCLE_OVERHEAD as u64)?;
            Ok((p, e))
        })
        .collect::<Result<_>>()?;
    log_log_slope(&pts)
}

/// Output encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Writes rows as CSV (one header line) or as a JSON document
/// `{"<key>": [...]}`.
pub fn write_rows<T: Serialize, W: Write>(rows: &[T], key: &str, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = json!({ key: rows });
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Writes sweeps: CSV gets one row per evaluated point, JSON nests the
/// points under each sweep.
pub fn write_sweeps<W: Write>(sweeps: &[Sweep], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let rows: Vec<&SweepRecord> = sweeps.iter().flat_map(|s| &s.points).collect();
            write_rows(&rows, "points", Format::Csv, out)
        }
        Format::Json => write_rows(sweeps, "sweeps", Format::Json, out),
    }
}

/// Convenience wrapper creating `path` (and its parent directory).
pub fn write_to_path<F: FnOnce(std::fs::File) -> Result<()>>(path: &Path, f: F) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    f(std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::exact_epsilon_final;

    #[test]
    fn step_formula() {
        assert_eq!(epsilon_step(0.0, 17).unwrap(), 0.0);
        assert!((epsilon_step(0.123, 1).unwrap() - 0.123).abs() < 1e-15);
        assert!((epsilon_step(0.3486, 25).unwrap() - 1.70e-2).abs() < 5e-5);
        assert_eq!(epsilon_step(1.0, 9).unwrap(), 1.0);
        assert!(epsilon_step(0.1, 0).is_err());
        assert!(epsilon_step(1.5, 3).is_err());
        // Inverse relation.
        let e = epsilon_step(0.2, 40).unwrap();
        assert!((1.0 - (1.0 - e).powi(40) - 0.2).abs() < 1e-14);
        // Tiny values keep full relative precision.
        assert!((epsilon_step(1e-15, 1000).unwrap() / 1e-18 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn syndrome_counts_add_up() {
        let stats = sample_cycles(&ErrorModel::discrete(0.005).unwrap(), 3, 2000, 4).unwrap();
        assert_eq!(stats.syndrome_counts.iter().sum::<u64>(), 2000);
        assert!(stats.syndrome_counts[0] > 500);
        let quiet = sample_cycles(&ErrorModel::discrete(0.0).unwrap(), 3, 50, 4).unwrap();
        assert_eq!(quiet.syndrome_counts[0], 50);
    }

    #[test]
    fn noiseless_monte_carlo_is_zero() {
        let est = estimate_epsilon_final_mc(&ErrorModel::discrete(0.0).unwrap(), 5, 200, 1).unwrap();
        assert!(est.mean < 1e-10);
        assert_eq!(est.std_err, 0.0);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let m = ErrorModel::discrete(0.03).unwrap();
        let a = estimate_epsilon_final_mc(&m, 4, 3000, 9).unwrap();
        let b = estimate_epsilon_final_mc(&m, 4, 3000, 9).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
        let c = estimate_epsilon_final_mc(&m, 4, 3000, 10).unwrap();
        assert_ne!(a.mean.to_bits(), c.mean.to_bits());
    }

    #[test]
    fn monte_carlo_matches_oracle() {
        let (p, t) = (3e-2, 11);
        let est = estimate_epsilon_final_mc(&ErrorModel::discrete(p).unwrap(), t, 40_000, 2).unwrap();
        let exact = exact_epsilon_final(p, t).unwrap();
        assert!(
            (est.mean - exact).abs() < 4.0 * est.std_err,
            "{} ± {} vs {exact}",
            est.mean,
            est.std_err
        );
    }

    #[test]
    fn zero_noise_picks_shortest_cycle() {
        let m = ErrorModel::discrete(0.0).unwrap();
        let r = find_t_opt(&m, Evaluator::Oracle, &[30, 5, 12]).unwrap();
        assert_eq!(r.t_wait, 5);
        assert_eq!(r.epsilon_step, 0.0);
        let r = find_t_opt(
            &ErrorModel::continuous(0.0).unwrap(),
            Evaluator::MonteCarlo { trials: 10, seed: 0 },
            &[3, 1],
        )
        .unwrap();
        assert_eq!(r.t_total, 15);
    }

    #[test]
    fn oracle_rejects_continuous_model() {
        let m = ErrorModel::continuous(0.1).unwrap();
        assert!(find_t_opt(&m, Evaluator::Oracle, &[0]).is_err());
        assert!(find_t_opt(&m, Evaluator::Oracle, &[]).is_err());
    }

    #[test]
    fn interior_minimum_rule() {
        let rec = |t: u64, e: f64| SweepRecord {
            model: "discrete",
            param: 0.1,
            t_total: t + 14,
            t_wait: t,
            epsilon_final: 0.0,
            epsilon_step: e,
            std_err: 0.0,
            trials: 0,
            method: Method::Oracle,
        };
        let pts = vec![rec(0, 5.0), rec(1, 3.0), rec(2, 4.0), rec(3, 1.0), rec(4, 2.0)];
        assert_eq!(first_interior_minimum(&pts), Some(1));
        let flat = vec![rec(0, 5.0), rec(1, 3.0), rec(2, 3.0), rec(3, 4.0)];
        assert_eq!(first_interior_minimum(&flat), Some(1));
        let falling = vec![rec(0, 5.0), rec(1, 3.0), rec(2, 2.0)];
        assert_eq!(first_interior_minimum(&falling), None);
        assert_eq!(argmin_first(&falling), 2);
    }

    #[test]
    fn discrete_baseline_single_step() {
        let p = 0.01;
        let b = single_qubit_baseline(&ErrorModel::discrete(p).unwrap(), 1, 0, 0).unwrap();
        let w = penalty_weights(&StateVector::test_state()).unwrap();
        let expect = p / 3.0 * (w[1] + w[2] + w[3]);
        assert!((b.p_step - expect).abs() < 1e-15);
        assert!((b.p_step / p - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn continuous_baseline_zero_sigma() {
        let b = single_qubit_baseline(&ErrorModel::continuous(0.0).unwrap(), 25, 100, 3).unwrap();
        assert_eq!(b.p_step, 0.0);
    }

    #[test]
    fn continuous_baseline_matches_channel() {
        let sigma = 0.1;
        let t = 25;
        let b = single_qubit_baseline(&ErrorModel::continuous(sigma).unwrap(), t, 50_000, 4).unwrap();
        let exact = crate::error_models::continuous_channel_infidelity(sigma, t, &StateVector::test_state()).unwrap();
        assert!(
            (b.epsilon_final - exact).abs() < 4.0 * b.std_err,
            "{} ± {} vs {exact}",
            b.epsilon_final,
            b.std_err
        );
    }

    #[test]
    fn grids() {
        let g = default_discrete_grid(1e-3);
        assert_eq!(g[0], 0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(*g.last().unwrap() >= 50_000);
        assert_eq!(default_discrete_grid(0.0).len(), 101);
        assert_eq!(default_continuous_grid(0.1), vec![0, 4, 11, 21, 36]);
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (1..5).map(|k| (k as f64, 3.0 * (k as f64).powi(2))).collect();
        assert!((log_log_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_log_slope(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn csv_and_json_output() {
        let rows = reproduce_table2(&[1e-3], Evaluator::Oracle).unwrap();
        let mut buf = Vec::new();
        write_rows(&rows, "rows", Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("model,param,T,t_wait,epsilon_final,epsilon_step,std_err,trials,method"));
        assert_eq!(text.lines().count(), 2);
        let mut buf = Vec::new();
        write_rows(&rows, "rows", Format::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["rows"][0]["method"], "oracle");
        assert!(reproduce_table2(&[0.0], Evaluator::Oracle).is_err());
    }
}
