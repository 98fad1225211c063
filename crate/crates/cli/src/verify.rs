//! Property suites run over Haar-random states, with counterexample dumps.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use trispin_core::experiment::{estimate_correlations, exact_records, simulate_counts};
use trispin_core::invariants::{invariance_report, ordering_quadruple, spin_spectrum};
use trispin_core::nonlocality::{
    chsh_from_correlation, monogamy_report, optimal_chsh_settings, MeasurementDirections,
};
use trispin_core::states::{haar_random_state, FamilyParams, Pair, PureState3};
use trispin_core::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Invariance,
    Monogamy,
    Ordering,
    ChshOptimality,
    EstimatorConsistency,
}

impl Suite {
    pub fn parse(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "invariance" => Ok(Suite::Invariance),
            "monogamy" => Ok(Suite::Monogamy),
            "ordering" => Ok(Suite::Ordering),
            "chsh-optimality" => Ok(Suite::ChshOptimality),
            "estimator-consistency" => Ok(Suite::EstimatorConsistency),
            other => Err(Error::InvalidArgument(format!(
                "unknown suite {other:?} (expected invariance, monogamy, ordering, \
                 chsh-optimality or estimator-consistency)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Suite::Invariance => "invariance",
            Suite::Monogamy => "monogamy",
            Suite::Ordering => "ordering",
            Suite::ChshOptimality => "chsh-optimality",
            Suite::EstimatorConsistency => "estimator-consistency",
        }
    }
}

/// Outcome of one suite: log lines, worst observed deviations, and the first
/// failing state (serialized as a state file) if any check failed.
pub struct SuiteOutcome {
    pub suite: Suite,
    pub trials: u64,
    pub passed: bool,
    pub lines: Vec<String>,
    pub counterexample: Option<String>,
}

fn trial_state(seed: u64, trial: u64) -> PureState3 {
    haar_random_state(seed.wrapping_mul(0x100_0000).wrapping_add(trial))
}

fn counterexample_json(state: &PureState3) -> String {
    FamilyParams::Custom {
        amplitudes: *state.amplitudes(),
    }
    .to_json()
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn random_directions(rng: &mut ChaCha8Rng) -> MeasurementDirections {
    MeasurementDirections {
        a1: random_unit(rng),
        a2: random_unit(rng),
        b1: random_unit(rng),
        b2: random_unit(rng),
    }
}

pub fn run_suite(suite: Suite, trials: u64, seed: u64) -> Result<SuiteOutcome> {
    match suite {
        Suite::Invariance => invariance_suite(trials, seed),
        Suite::Monogamy => monogamy_suite(trials, seed),
        Suite::Ordering => ordering_suite(trials, seed),
        Suite::ChshOptimality => chsh_optimality_suite(trials, seed),
        Suite::EstimatorConsistency => estimator_consistency_suite(trials, seed),
    }
}

fn invariance_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut worst_sum = 0.0_f64;
    let mut worst_dev = 0.0_f64;
    let mut counterexample = None;
    for trial in 0..trials {
        let state = trial_state(seed, trial);
        let report = invariance_report(&state)?;
        worst_sum = worst_sum.max((report.iso_sum - 1.0).abs());
        worst_dev = worst_dev.max(report.max_aniso_deviation);
        if ((report.iso_sum - 1.0).abs() > 1e-10 || report.max_aniso_deviation > 1e-10)
            && counterexample.is_none()
        {
            counterexample = Some(counterexample_json(&state));
        }
    }
    let passed = counterexample.is_none();
    Ok(SuiteOutcome {
        suite: Suite::Invariance,
        trials,
        passed,
        lines: vec![
            format!("max |iso_sum - 1|        = {worst_sum:.3e} (tolerance 1e-10)"),
            format!("max anisotropy deviation = {worst_dev:.3e} (tolerance 1e-10)"),
        ],
        counterexample,
    })
}

fn monogamy_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6f_6e6f_6761_6d79);
    let mut worst_identity = 0.0_f64;
    let mut worst_bound = f64::MIN;
    let mut worst_bell = f64::MIN;
    let mut counterexample = None;
    for trial in 0..trials {
        let state = trial_state(seed, trial);
        let report = monogamy_report(&state, &random_directions(&mut rng), &random_directions(&mut rng))?;
        let identity = (report.m_ab + report.m_ac - report.bound).abs();
        worst_identity = worst_identity.max(identity);
        worst_bound = worst_bound.max(report.bound);
        worst_bell = worst_bell.max(report.chsh_ab_sq + report.chsh_ac_sq);
        let bad = identity > 1e-10
            || report.bound > 2.0 + 1e-12
            || report.chsh_ab_sq + report.chsh_ac_sq > 8.0 + 1e-6;
        if bad && counterexample.is_none() {
            counterexample = Some(counterexample_json(&state));
        }
    }
    let passed = counterexample.is_none();
    Ok(SuiteOutcome {
        suite: Suite::Monogamy,
        trials,
        passed,
        lines: vec![
            format!("max |M_AB + M_AC - 2(1-s3_BC)| = {worst_identity:.3e} (tolerance 1e-10)"),
            format!("max bound 2(1-s3_BC)           = {worst_bound:.12} (must be <= 2)"),
            format!("max <B_AB>^2 + <B_AC>^2        = {worst_bell:.12} (must be <= 8)"),
        ],
        counterexample,
    })
}

fn ordering_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut worst_spread = 0.0_f64;
    let mut counterexample = None;
    let pairings = [
        (Pair::AB, Pair::AC),
        (Pair::AB, Pair::BC),
        (Pair::AC, Pair::BC),
    ];
    for trial in 0..trials {
        let state = trial_state(seed, trial);
        for (first, second) in pairings {
            let q = ordering_quadruple(&state, first, second)?;
            worst_spread = worst_spread.max(q.spread());
            let monotone = q.conc_diff * q.iso_diff >= -1e-12;
            if (q.spread() > 1e-9 || !monotone) && counterexample.is_none() {
                counterexample = Some(counterexample_json(&state));
            }
        }
    }
    let passed = counterexample.is_none();
    Ok(SuiteOutcome {
        suite: Suite::Ordering,
        trials,
        passed,
        lines: vec![format!(
            "max quadruple spread over all pairings = {worst_spread:.3e} (tolerance 1e-9)"
        )],
        counterexample,
    })
}

fn chsh_optimality_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6368_7368_6f70_7421);
    let mut worst_gap = 0.0_f64;
    let mut worst_excess = f64::MIN;
    let mut counterexample = None;
    for trial in 0..trials {
        let state = trial_state(seed, trial);
        for pair in Pair::ALL {
            let t = state.correlation_matrix(pair)?;
            let opt = optimal_chsh_settings(&t);
            let achieved = chsh_from_correlation(&t, &opt.directions);
            let expected = 2.0 * (spin_spectrum(&t).s[0] + spin_spectrum(&t).s[1]).sqrt();
            let gap = (achieved - expected).abs();
            worst_gap = worst_gap.max(gap);
            // a handful of random probes per state must stay below optimal
            let mut excess = f64::MIN;
            for _ in 0..8 {
                let probe = chsh_from_correlation(&t, &random_directions(&mut rng));
                excess = excess.max(probe.abs() - opt.value);
            }
            worst_excess = worst_excess.max(excess);
            if (gap > 1e-8 || excess > 1e-8) && counterexample.is_none() {
                counterexample = Some(counterexample_json(&state));
            }
        }
    }
    let passed = counterexample.is_none();
    Ok(SuiteOutcome {
        suite: Suite::ChshOptimality,
        trials,
        passed,
        lines: vec![
            format!("max |<B>(optimal dirs) - 2 sqrt(M)| = {worst_gap:.3e} (tolerance 1e-8)"),
            format!("max random-direction excess        = {worst_excess:.3e} (must be <= 1e-8)"),
        ],
        counterexample,
    })
}

fn estimator_consistency_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    // exact-frequency records must reproduce exact correlations; sampled
    // records must land within a generous multiple of the sampling error
    let exact_trials = trials.min(200);
    let mut worst_exact = 0.0_f64;
    let mut worst_sampled = 0.0_f64;
    let mut counterexample = None;
    for trial in 0..exact_trials {
        let state = trial_state(seed, trial);
        let est = estimate_correlations(&exact_records(&state, 10_000_000))?;
        for pair in Pair::ALL {
            let exact = state.correlation_matrix(pair)?;
            for j in 0..3 {
                for k in 0..3 {
                    let diff = (est.t(pair).0[j][k] - exact.0[j][k]).abs();
                    worst_exact = worst_exact.max(diff);
                    if diff > 1e-3 && counterexample.is_none() {
                        counterexample = Some(counterexample_json(&state));
                    }
                }
            }
        }
        if trial < 20 {
            let shots = 10_000u64;
            let est = estimate_correlations(&simulate_counts(&state, shots, seed ^ trial))?;
            // pooled entries have σ ≤ 1/sqrt(3·shots); allow 6σ
            let limit = 6.0 / ((3 * shots) as f64).sqrt();
            for pair in Pair::ALL {
                let exact = state.correlation_matrix(pair)?;
                for j in 0..3 {
                    for k in 0..3 {
                        let diff = (est.t(pair).0[j][k] - exact.0[j][k]).abs();
                        worst_sampled = worst_sampled.max(diff);
                        if diff > limit && counterexample.is_none() {
                            counterexample = Some(counterexample_json(&state));
                        }
                    }
                }
            }
        }
    }
    let passed = counterexample.is_none();
    Ok(SuiteOutcome {
        suite: Suite::EstimatorConsistency,
        trials: exact_trials,
        passed,
        lines: vec![
            format!("max |T_est - T_exact| (exact-frequency records) = {worst_exact:.3e} (tolerance 1e-3)"),
            format!("max |T_est - T_exact| (1e4-shot sampling)       = {worst_sampled:.3e}"),
        ],
        counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_parsing() {
        assert_eq!(Suite::parse("invariance").unwrap(), Suite::Invariance);
        assert_eq!(Suite::parse("chsh-optimality").unwrap(), Suite::ChshOptimality);
        assert!(Suite::parse("nonsense").is_err());
    }

    #[test]
    fn small_runs_pass() {
        for suite in [
            Suite::Invariance,
            Suite::Monogamy,
            Suite::Ordering,
            Suite::ChshOptimality,
        ] {
            let outcome = run_suite(suite, 50, 7).unwrap();
            assert!(outcome.passed, "{:?}: {:?}", suite, outcome.lines);
            assert!(outcome.counterexample.is_none());
        }
        let outcome = run_suite(Suite::EstimatorConsistency, 5, 7).unwrap();
        assert!(outcome.passed, "{:?}", outcome.lines);
    }
}
