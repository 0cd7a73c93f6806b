//! Empirical verification of bounds against simulated adversaries.
//!
//! [`verify_bound`] plays each strategy for `trials` trajectories, counts the
//! event, and compares a Clopper-Pearson confidence interval — plus the exact
//! tree probability and the backward-induction envelope whenever the tree is
//! small enough — against the claimed bound.
//!
//! Verdict semantics: a row **fails** only when its evidence is entirely on
//! the violating side of the bound (the whole confidence interval, or the
//! exact probability when available — exact values are decisive). Otherwise
//! it passes, and the `conclusive` flag records whether the evidence also
//! lies entirely on the compliant side. The distinction matters for tiny
//! tail bounds such as `1e-9`: with `1e5` trials and zero hits the interval
//! upper end sits near `5e-5`, which cannot *confirm* strict containment but
//! certainly does not refute the bound.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use super::{
    count_events, exact_event_probability, lower_upper_event_probability_dp, EventSpec,
    ProcessSpec, Strategy,
};
use crate::bounds::{BoundReport, FormulaId};
use crate::error::{Error, Result};

/// A two-sided binomial confidence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomialCi {
    pub lower: f64,
    pub upper: f64,
}

/// Two-sided Clopper-Pearson interval at confidence `1 - alpha`.
pub fn clopper_pearson(successes: u64, trials: u64, alpha: f64) -> Result<BinomialCi> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    if successes > trials {
        return Err(Error::invalid(format!(
            "{successes} successes in {trials} trials"
        )));
    }
    if !(alpha.is_finite() && 0.0 < alpha && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} must be in (0, 1)")));
    }
    let k = successes as f64;
    let n = trials as f64;
    let lower = if successes == 0 {
        0.0
    } else {
        beta_quantile(k, n - k + 1.0, alpha / 2.0)?
    };
    let upper = if successes == trials {
        1.0
    } else {
        beta_quantile(k + 1.0, n - k, 1.0 - alpha / 2.0)?
    };
    Ok(BinomialCi { lower, upper })
}

/// Beta quantile by bisection on the regularized incomplete beta CDF.
/// (The generic `inverse_cdf` fallback is far too coarse for tail
/// probabilities like `5e-5`.)
fn beta_quantile(a: f64, b: f64, q: f64) -> Result<f64> {
    let dist = Beta::new(a, b).map_err(|e| Error::invalid(format!("beta: {e}")))?;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dist.cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Which side of the event probability the bound controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundDirection {
    /// The bound is an upper bound on the event probability (tail bounds).
    TailUpper,
    /// The bound is a lower bound on the event probability (coverage bounds).
    CoverageLower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub trials: u64,
    pub seed: u64,
    pub workers: Option<usize>,
    /// Confidence level `1 - alpha` for the per-strategy intervals.
    pub alpha: f64,
    /// Try exact enumeration per strategy (skipped past the leaf cap).
    pub use_exact: bool,
    /// Try the backward-induction envelope (skipped past the leaf cap).
    pub use_dp: bool,
    pub leaf_cap: Option<u128>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 100_000,
            seed: 0,
            workers: None,
            alpha: 0.01,
            use_exact: true,
            use_dp: true,
            leaf_cap: None,
        }
    }
}

/// One strategy's row in a verification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrategyVerification {
    pub strategy: String,
    pub successes: u64,
    pub frequency: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    pub verdict: Verdict,
    pub conclusive: bool,
}

/// The full outcome of [`verify_bound`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub report: BoundReport,
    pub event: EventSpec,
    pub direction: BoundDirection,
    pub horizon: usize,
    pub trials: u64,
    pub seed: u64,
    pub alpha: f64,
    /// Exact envelope over all strategies, when the tree fits the cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dp_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dp_upper: Option<f64>,
    pub rows: Vec<StrategyVerification>,
    pub verdict: Verdict,
    pub conclusive: bool,
}

const EXACT_TOL: f64 = 1e-12;
const DP_TOL: f64 = 1e-9;
/// Slack for cross-checking event parameters against report inputs.
const INPUT_TOL: f64 = 1e-9;

fn mismatch(report: &BoundReport, event: &EventSpec, expected: &str) -> Error {
    Error::invalid(format!(
        "formula {} pairs with {expected}, got {event}",
        report.formula_id
    ))
}

fn check_eps(report: &BoundReport, event: &EventSpec, event_eps: f64) -> Result<()> {
    if let Some(eps) = report.inputs.epsilon {
        if (eps - event_eps).abs() > INPUT_TOL * eps.abs().max(1.0) {
            return Err(Error::invalid(format!(
                "event {event} uses epsilon {event_eps} but the bound was computed for {eps}"
            )));
        }
    }
    Ok(())
}

/// Validate that `event` is the kind of event `report` controls, and return
/// the direction of control.
pub fn direction_for(report: &BoundReport, event: &EventSpec) -> Result<BoundDirection> {
    match report.formula_id {
        FormulaId::Thm1 | FormulaId::Thm2 => match event {
            EventSpec::SumUpperDev { epsilon } | EventSpec::SumLowerDev { epsilon } => {
                check_eps(report, event, *epsilon)?;
                Ok(BoundDirection::TailUpper)
            }
            _ => Err(mismatch(report, event, "SUM_UPPER_DEV or SUM_LOWER_DEV")),
        },
        FormulaId::Markov => match event {
            EventSpec::SumUpperDev { epsilon } => {
                // The bound controls P(S_n >= eps) for non-negative sums with
                // upper expectation E = sum of upper means, so the deviation
                // event level is eps - E.
                if let (Some(eps), Some(e_up)) =
                    (report.inputs.epsilon, report.inputs.expectation_upper)
                {
                    let want = eps - e_up;
                    if (want - epsilon).abs() > INPUT_TOL * eps.abs().max(1.0) {
                        return Err(Error::invalid(format!(
                            "event {event} should use level epsilon - E = {want}"
                        )));
                    }
                }
                Ok(BoundDirection::TailUpper)
            }
            _ => Err(mismatch(report, event, "SUM_UPPER_DEV")),
        },
        FormulaId::Thm3Wlln | FormulaId::DcmWlln | FormulaId::Thm4Wlln => match event {
            EventSpec::MeanBand { epsilon } => {
                check_eps(report, event, *epsilon)?;
                Ok(BoundDirection::CoverageLower)
            }
            _ => Err(mismatch(report, event, "MEAN_BAND")),
        },
        FormulaId::Thm3SllnN | FormulaId::Thm4SllnN => match event {
            EventSpec::WindowBand { start, epsilon, .. } => {
                check_eps(report, event, *epsilon)?;
                let threshold = report.threshold.ok_or_else(|| {
                    Error::invalid("threshold report carries no threshold value")
                })?;
                if *start < threshold {
                    return Err(Error::invalid(format!(
                        "window starts at {start}, before the guarantee threshold {threshold}"
                    )));
                }
                Ok(BoundDirection::CoverageLower)
            }
            _ => Err(mismatch(report, event, "WINDOW_BAND")),
        },
        FormulaId::Khr => match event {
            EventSpec::MaxBand { epsilons } => {
                if let Some(want) = &report.inputs.epsilons {
                    if want.len() != epsilons.len()
                        || want
                            .iter()
                            .zip(epsilons)
                            .any(|(a, b)| (a - b).abs() > INPUT_TOL)
                    {
                        return Err(Error::invalid(
                            "event band levels differ from the bound's epsilons",
                        ));
                    }
                }
                Ok(BoundDirection::CoverageLower)
            }
            _ => Err(mismatch(report, event, "MAX_BAND")),
        },
        FormulaId::HoeffdingMgf => Err(Error::invalid(
            "the moment-generating-function inequality is not an event probability; check it with the dominance checks instead",
        )),
    }
}

/// The canonical trajectory event for a report, when one is determined by
/// its inputs. Window events need explicit placement and are not inferred.
pub fn event_for(report: &BoundReport) -> Result<EventSpec> {
    let need = |x: Option<f64>, what: &str| {
        x.ok_or_else(|| Error::invalid(format!("report carries no {what}")))
    };
    match report.formula_id {
        FormulaId::Thm1 | FormulaId::Thm2 => Ok(EventSpec::SumUpperDev {
            epsilon: need(report.inputs.epsilon, "epsilon")?,
        }),
        FormulaId::Markov => {
            let eps = need(report.inputs.epsilon, "epsilon")?;
            let e_up = need(report.inputs.expectation_upper, "upper expectation")?;
            if eps <= e_up {
                return Err(Error::invalid(format!(
                    "epsilon {eps} does not exceed the upper expectation {e_up}; the bound is vacuous there and has no deviation event"
                )));
            }
            Ok(EventSpec::SumUpperDev {
                epsilon: eps - e_up,
            })
        }
        FormulaId::Thm3Wlln | FormulaId::DcmWlln | FormulaId::Thm4Wlln => Ok(EventSpec::MeanBand {
            epsilon: need(report.inputs.epsilon, "epsilon")?,
        }),
        FormulaId::Thm3SllnN | FormulaId::Thm4SllnN => Err(Error::invalid(
            "threshold guarantees need an explicit WINDOW_BAND event (start >= threshold)",
        )),
        FormulaId::Khr => Ok(EventSpec::MaxBand {
            epsilons: report
                .inputs
                .epsilons
                .clone()
                .ok_or_else(|| Error::invalid("report carries no epsilons"))?,
        }),
        FormulaId::HoeffdingMgf => Err(Error::invalid(
            "the moment-generating-function inequality has no trajectory event",
        )),
    }
}

fn row_verdict(
    direction: BoundDirection,
    bound: f64,
    ci: &BinomialCi,
    exact: Option<f64>,
) -> (Verdict, bool) {
    match exact {
        Some(p) => {
            let ok = match direction {
                BoundDirection::TailUpper => p <= bound + EXACT_TOL,
                BoundDirection::CoverageLower => p >= bound - EXACT_TOL,
            };
            (if ok { Verdict::Pass } else { Verdict::Fail }, true)
        }
        None => match direction {
            BoundDirection::TailUpper => {
                let fail = ci.lower > bound;
                (
                    if fail { Verdict::Fail } else { Verdict::Pass },
                    ci.upper <= bound,
                )
            }
            BoundDirection::CoverageLower => {
                let fail = ci.upper < bound;
                (
                    if fail { Verdict::Fail } else { Verdict::Pass },
                    ci.lower >= bound,
                )
            }
        },
    }
}

/// Verify one bound against each strategy. See the module docs for the
/// verdict semantics.
pub fn verify_bound(
    spec: &ProcessSpec,
    strategies: &[Box<dyn Strategy>],
    event: &EventSpec,
    report: &BoundReport,
    opts: &VerifyOptions,
) -> Result<VerificationRecord> {
    if strategies.is_empty() {
        return Err(Error::invalid("need at least one strategy"));
    }
    if opts.trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let direction = direction_for(report, event)?;
    let bound = report.value;

    let (dp_lower, dp_upper) = if opts.use_dp && spec.is_all_credal() && !event.reads_means() {
        match lower_upper_event_probability_dp(spec, event, opts.leaf_cap) {
            Ok((lo, hi)) => (Some(lo), Some(hi)),
            Err(Error::Capacity { .. }) => (None, None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };

    let mut rows = Vec::with_capacity(strategies.len());
    for s in strategies {
        let successes = count_events(
            spec,
            s.as_ref(),
            std::slice::from_ref(event),
            opts.trials,
            opts.seed,
            opts.workers,
        )?[0];
        let frequency = successes as f64 / opts.trials as f64;
        let ci = clopper_pearson(successes, opts.trials, opts.alpha)?;
        let exact = if opts.use_exact {
            match exact_event_probability(spec, s.as_ref(), event, opts.leaf_cap) {
                Ok(p) => Some(p),
                Err(Error::Capacity { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let (verdict, conclusive) = row_verdict(direction, bound, &ci, exact);
        rows.push(StrategyVerification {
            strategy: s.name().to_string(),
            successes,
            frequency,
            ci_lower: ci.lower,
            ci_upper: ci.upper,
            exact,
            verdict,
            conclusive,
        });
    }

    let mut verdict = if rows.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    let mut conclusive = rows.iter().all(|r| r.conclusive);
    match direction {
        BoundDirection::TailUpper => {
            if let Some(hi) = dp_upper {
                if hi > bound + DP_TOL {
                    verdict = Verdict::Fail;
                }
                conclusive = true;
            }
        }
        BoundDirection::CoverageLower => {
            if let Some(lo) = dp_lower {
                if lo < bound - DP_TOL {
                    verdict = Verdict::Fail;
                }
                conclusive = true;
            }
        }
    }

    Ok(VerificationRecord {
        report: report.clone(),
        event: event.clone(),
        direction,
        horizon: spec.horizon(),
        trials: opts.trials,
        seed: opts.seed,
        alpha: opts.alpha,
        dp_lower,
        dp_upper,
        rows,
        verdict,
        conclusive,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per strategy; floats in shortest round-trip form, so equal seeds
/// give byte-identical files.
pub fn write_verification_csv(
    record: &VerificationRecord,
    w: &mut dyn Write,
) -> std::io::Result<()> {
    writeln!(
        w,
        "strategy,formula,side,event,horizon,trials,seed,successes,frequency,ci_lower,ci_upper,bound,exact,dp_lower,dp_upper,verdict,conclusive"
    )?;
    for r in &record.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.strategy),
            record.report.formula_id,
            match record.direction {
                BoundDirection::TailUpper => "tail-upper",
                BoundDirection::CoverageLower => "coverage-lower",
            },
            csv_field(&record.event.to_string()),
            record.horizon,
            record.trials,
            record.seed,
            r.successes,
            r.frequency,
            r.ci_lower,
            r.ci_upper,
            record.report.value,
            csv_opt(r.exact),
            csv_opt(record.dp_lower),
            csv_opt(record.dp_upper),
            r.verdict,
            r.conclusive,
        )?;
    }
    Ok(())
}
