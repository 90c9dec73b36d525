//! Exhaustive ground truth for small instances.
//!
//! Every coin script in `{L, R}^(n x H)` is run through the engine. Scripts
//! are equally likely, so exact statistics are integer counts over the
//! `2^(nH)` scripts; floating point enters only at report time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run, Trace, WorldConfig};
use crate::error::{Error, Result};
use crate::strategy::{CoinScript, CoinSource};
use crate::util::{hash_words, moments, pairwise_sum};

pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Violating scripts kept verbatim in a report; the count is always exact.
const MAX_RECORDED_VIOLATIONS: usize = 64;

/// Scripts per parallel work item. Fixed so that the reduction order, and
/// hence every floating-point sum, does not depend on the thread count.
const CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationSpec {
    pub config: WorldConfig,
    pub horizon: u32,
    pub budget: u64,
}

impl EnumerationSpec {
    pub fn new(config: WorldConfig, horizon: u32) -> Self {
        Self {
            config,
            horizon,
            budget: DEFAULT_BUDGET,
        }
    }

    fn bits(&self) -> u128 {
        self.config.n() as u128 * self.horizon as u128
    }

    pub fn size(&self) -> u128 {
        if self.bits() >= 128 {
            u128::MAX
        } else {
            1u128 << self.bits()
        }
    }

    fn engine_config(&self) -> WorldConfig {
        let mut c = self.config.clone();
        c.max_rounds = self.horizon.max(1);
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactReport {
    pub n: usize,
    pub d: f64,
    pub r: f64,
    pub horizon: u32,
    pub initial_positions: Vec<f64>,
    pub scripts: u64,
    pub rendezvous_scripts: u64,
    /// Scripts whose rendezvous happened in round `i`.
    pub rendezvous_count_by_round: Vec<u64>,
    pub rendezvous_probability_by_round: Vec<f64>,
    pub rendezvous_probability: f64,
    /// Probability mass not resolved within the horizon.
    pub residual_probability: f64,
    /// Mean over rendezvous-by-horizon scripts of the largest distance any
    /// robot travelled.
    pub expected_max_distance: f64,
    /// Scripts whose first meeting of any kind happened in round `i`.
    pub first_meeting_count_by_round: Vec<u64>,
    /// Scripts with at least one single-single meeting in a feasible,
    /// checkable round.
    pub followup_checked: u64,
    pub followup_violation_count: u64,
    /// Up to 64 violating scripts, in coin-script text format.
    pub followup_violations: Vec<String>,
}

#[derive(Debug, Clone, Default)]
struct Partial {
    rendezvous_count_by_round: Vec<u64>,
    first_meeting_count_by_round: Vec<u64>,
    max_distance_sum: f64,
    followup_checked: u64,
    followup_violation_count: u64,
    followup_violations: Vec<String>,
}

impl Partial {
    fn new(horizon: u32) -> Self {
        Self {
            rendezvous_count_by_round: vec![0; horizon as usize],
            first_meeting_count_by_round: vec![0; horizon as usize],
            ..Default::default()
        }
    }

    fn merge(mut self, other: Partial) -> Self {
        for (a, b) in self
            .rendezvous_count_by_round
            .iter_mut()
            .zip(&other.rendezvous_count_by_round)
        {
            *a += b;
        }
        for (a, b) in self
            .first_meeting_count_by_round
            .iter_mut()
            .zip(&other.first_meeting_count_by_round)
        {
            *a += b;
        }
        self.max_distance_sum += other.max_distance_sum;
        self.followup_checked += other.followup_checked;
        self.followup_violation_count += other.followup_violation_count;
        let room = MAX_RECORDED_VIOLATIONS.saturating_sub(self.followup_violations.len());
        self.followup_violations
            .extend(other.followup_violations.into_iter().take(room));
        self
    }
}

/// Whether a trace has a single-single meeting that the follow-up check covers.
fn followup_applies(trace: &Trace, horizon: u32) -> bool {
    let sched = match crate::schedule::ExpansionSchedule::new(trace.r) {
        Ok(s) => s,
        Err(_) => return false,
    };
    trace
        .single_meeting_rounds()
        .into_iter()
        .any(|i| i + 1 < horizon && sched.round_is_feasible(i, trace.d()))
}

fn run_chunk(spec: &EnumerationSpec, start: u64, end: u64) -> Result<Partial> {
    let n = spec.config.n();
    let h = spec.horizon as usize;
    let config = spec.engine_config();
    let mut part = Partial::new(spec.horizon);
    let mut distances = Vec::with_capacity((end - start) as usize);
    for index in start..end {
        let script = CoinScript::from_index(n, h, index);
        let trace = run(config.clone(), CoinSource::script(script.clone()))?;
        if let Some(round) = trace.rendezvous_round {
            part.rendezvous_count_by_round[round as usize] += 1;
            distances.push(trace.max_distance());
        }
        if let Some(first) = trace.events.first() {
            if (first.round as usize) < h {
                part.first_meeting_count_by_round[first.round as usize] += 1;
            }
        }
        if followup_applies(&trace, spec.horizon) {
            part.followup_checked += 1;
        }
        if trace.followup_violation(spec.horizon).is_some() {
            part.followup_violation_count += 1;
            if part.followup_violations.len() < MAX_RECORDED_VIOLATIONS {
                part.followup_violations.push(script.to_string());
            }
        }
    }
    part.max_distance_sum = pairwise_sum(&distances);
    Ok(part)
}

/// Runs every script of the product space and aggregates exact statistics.
/// Uses the ambient rayon pool.
pub fn enumerate(spec: &EnumerationSpec) -> Result<ExactReport> {
    spec.config.validate()?;
    let size = spec.size();
    if size > spec.budget as u128 {
        return Err(Error::BudgetExceeded {
            size,
            budget: spec.budget as u128,
        });
    }
    let total = size as u64;
    let part = if spec.horizon == 0 {
        Partial::new(0)
    } else {
        let chunks: Vec<(u64, u64)> = (0..total.div_ceil(CHUNK))
            .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(total)))
            .collect();
        let parts = chunks
            .par_iter()
            .map(|&(a, b)| run_chunk(spec, a, b))
            .collect::<Result<Vec<_>>>()?;
        parts
            .into_iter()
            .fold(Partial::new(spec.horizon), Partial::merge)
    };

    let scripts = total;
    let rendezvous_scripts: u64 = part.rendezvous_count_by_round.iter().sum();
    let by_round: Vec<f64> = part
        .rendezvous_count_by_round
        .iter()
        .map(|&c| c as f64 / scripts as f64)
        .collect();
    let p = rendezvous_scripts as f64 / scripts as f64;
    Ok(ExactReport {
        n: spec.config.n(),
        d: spec.config.d(),
        r: spec.config.r,
        horizon: spec.horizon,
        initial_positions: spec.config.initial_positions.clone(),
        scripts,
        rendezvous_scripts,
        rendezvous_count_by_round: part.rendezvous_count_by_round,
        rendezvous_probability_by_round: by_round,
        rendezvous_probability: p,
        residual_probability: (scripts - rendezvous_scripts) as f64 / scripts as f64,
        expected_max_distance: if rendezvous_scripts > 0 {
            part.max_distance_sum / rendezvous_scripts as f64
        } else {
            0.0
        },
        first_meeting_count_by_round: part.first_meeting_count_by_round,
        followup_checked: part.followup_checked,
        followup_violation_count: part.followup_violation_count,
        followup_violations: part.followup_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloComparison {
    pub trials: u64,
    pub seed: u64,
    pub rendezvous_trials: u64,
    pub exact_mean: f64,
    pub mc_mean: Option<f64>,
    pub standard_error: Option<f64>,
    pub deviation: Option<f64>,
    pub deviation_in_se: Option<f64>,
    pub within_3se: bool,
    pub exact_rendezvous_probability: f64,
    pub mc_rendezvous_probability: Option<f64>,
}

/// Seed for Monte Carlo trial `t`.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    hash_words(&[seed, t])
}

/// Seeded random executions of the same instance, compared with an exact
/// report: mean largest distance over runs that rendezvous within the
/// horizon, against the enumerated conditional mean.
pub fn compare_monte_carlo(
    spec: &EnumerationSpec,
    exact: &ExactReport,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloComparison> {
    if exact.n != spec.config.n()
        || exact.horizon != spec.horizon
        || exact.r != spec.config.r
        || exact.initial_positions != spec.config.initial_positions
    {
        return Err(Error::Config(
            "exact report was computed for a different configuration".into(),
        ));
    }
    let mut out = MonteCarloComparison {
        trials,
        seed,
        rendezvous_trials: 0,
        exact_mean: exact.expected_max_distance,
        mc_mean: None,
        standard_error: None,
        deviation: None,
        deviation_in_se: None,
        within_3se: true,
        exact_rendezvous_probability: exact.rendezvous_probability,
        mc_rendezvous_probability: None,
    };
    if trials == 0 || spec.horizon == 0 {
        return Ok(out);
    }
    let config = spec.engine_config();
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let coins = CoinSource::Seeded(crate::strategy::SeededCoins::new(trial_seed(seed, t)));
            run(config.clone(), coins).map(|tr| tr.rendezvous_achieved.then(|| tr.max_distance()))
        })
        .collect::<Result<Vec<_>>>()?;
    let distances: Vec<f64> = results.into_iter().flatten().collect();
    out.rendezvous_trials = distances.len() as u64;
    out.mc_rendezvous_probability = Some(distances.len() as f64 / trials as f64);
    if distances.len() >= 2 {
        let m = moments(&distances);
        let se = m.sd / (m.count as f64).sqrt();
        let dev = (m.mean - exact.expected_max_distance).abs();
        out.mc_mean = Some(m.mean);
        out.standard_error = Some(se);
        out.deviation = Some(dev);
        out.deviation_in_se = Some(if se > 0.0 { dev / se } else { 0.0 });
        out.within_3se = dev <= 3.0 * se;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(horizon: u32) -> EnumerationSpec {
        EnumerationSpec::new(WorldConfig::new(vec![0.0, 0.5, 1.0], 1.28), horizon)
    }

    #[test]
    fn zero_horizon_is_empty() {
        let rep = enumerate(&small(0)).unwrap();
        assert_eq!(rep.scripts, 1);
        assert_eq!(rep.rendezvous_probability, 0.0);
        assert_eq!(rep.expected_max_distance, 0.0);
        assert_eq!(rep.followup_violation_count, 0);
    }

    #[test]
    fn budget_is_enforced() {
        let mut spec = small(10);
        spec.budget = 1 << 20;
        match enumerate(&spec) {
            Err(Error::BudgetExceeded { size, .. }) => assert_eq!(size, 1 << 30),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn round_zero_meeting_probability_is_p_meet() {
        // d = 1 <= f(1): round 0 is feasible, so only RRR and LLL avoid a
        // meeting.
        let rep = enumerate(&small(1)).unwrap();
        assert_eq!(rep.scripts, 8);
        assert_eq!(rep.first_meeting_count_by_round[0], 6);
        assert_eq!(
            rep.first_meeting_count_by_round[0] as f64 / rep.scripts as f64,
            crate::bounds::p_meet(3).unwrap()
        );
    }

    #[test]
    fn mismatched_comparison_is_rejected() {
        let rep = enumerate(&small(2)).unwrap();
        let other = EnumerationSpec::new(WorldConfig::new(vec![0.0, 0.4, 1.0], 1.28), 2);
        assert!(compare_monte_carlo(&other, &rep, 10, 1).is_err());
    }

    #[test]
    fn zero_trials_is_an_empty_comparison() {
        let spec = small(2);
        let rep = enumerate(&spec).unwrap();
        let cmp = compare_monte_carlo(&spec, &rep, 0, 1).unwrap();
        assert_eq!(cmp.mc_mean, None);
        assert_eq!(cmp.rendezvous_trials, 0);
    }
}
