//! A worked counterexample: a binary family whose every per-step marginal
//! respects the mean band, but whose law of large numbers stalls.
//!
//! Fix a contamination level `delta` in `(0, 1)` and consider three models of
//! an infinite sequence of `{0, 1}` draws:
//!
//! * `P1`: every draw is 1;
//! * `P2`: with probability `delta` every draw is 0, otherwise every draw
//!   is 1 (a single coin decides the whole path);
//! * `P3`: draws are iid Bernoulli(`1 - delta`).
//!
//! Each model keeps every conditional-on-nothing marginal inside
//! `P(X_i = 1) in [1 - delta, 1]`, the band of the *tight* credal step. Yet
//! the lower envelope over the family of the event
//! `mean > (1 - delta) - epsilon` is `1 - delta` at **every** horizon — the
//! `P2` branch that locks onto all-zeros never becomes unlikely, so coverage
//! cannot converge to one and no law of large numbers holds.
//!
//! The structural explanation is a conditioning gap: under regular-extension
//! conditioning the family is not even weakly irrelevant — learning
//! `X_1 = 0` collapses the envelope of later coordinates to `[0, 1 - delta]`
//! — while under the strict-positive-lower policy every testable past event
//! contains the all-ones path and the envelope stays put. [`example1_gap`]
//! exhibits both facts with the generic irrelevance checker on the truncated
//! joint family.
//!
//! `P2` is history-dependent in an essential way: it is *not* a strategy of
//! the tight spec (after an initial 0 it must play a point mass on 0, below
//! the band), but it is a strategy of the vacuous spec. The trio is exposed
//! as [`crate::process::Strategy`] values over [`Example1::vacuous_spec`] so
//! the sampling and enumeration machinery can cross-check the closed forms.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::credal::ConditioningPolicy;
use crate::credal::OutcomeSpace;
use crate::error::{Error, Result};
use crate::irrelevance::{
    check_epistemic_irrelevance, check_weak_irrelevance, IrrelevanceOptions, IrrelevanceReport,
    JointCredalSet, ProductSpace,
};
use crate::process::{ChooseCtx, CredalStep, ProcessSpec, StepChoice, StepConstraint, Strategy};

/// The counterexample family at contamination level `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example1 {
    delta: f64,
}

impl Example1 {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && 0.0 < delta && delta < 1.0) {
            return Err(Error::invalid(format!(
                "delta = {delta} must lie strictly inside (0, 1)"
            )));
        }
        Ok(Example1 { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The per-step band `P(X = 1) in [1 - delta, 1]`, extremes
    /// `(delta, 1 - delta)` and `(0, 1)`.
    pub fn tight_spec(&self, n: usize) -> Result<ProcessSpec> {
        let step = CredalStep::from_parts(
            vec![0.0, 1.0],
            vec![vec![self.delta, 1.0 - self.delta], vec![0.0, 1.0]],
        )?;
        ProcessSpec::homogeneous(StepConstraint::Credal(step), n)
    }

    /// The full simplex on `{0, 1}` — every strategy is admissible, which is
    /// what lets `P2` exist as a strategy.
    pub fn vacuous_spec(n: usize) -> Result<ProcessSpec> {
        let step = CredalStep::from_parts(vec![0.0, 1.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
        ProcessSpec::homogeneous(StepConstraint::Credal(step), n)
    }

    pub fn p1(&self) -> Box<dyn Strategy> {
        Box::new(P1)
    }

    pub fn p2(&self) -> Box<dyn Strategy> {
        Box::new(P2 { delta: self.delta })
    }

    pub fn p3(&self) -> Box<dyn Strategy> {
        Box::new(P3 { delta: self.delta })
    }
}

/// All ones.
struct P1;

impl Strategy for P1 {
    fn name(&self) -> &str {
        "P1"
    }

    fn history_dependent(&self) -> bool {
        false
    }

    fn choose(&self, _ctx: &ChooseCtx) -> Result<StepChoice> {
        Ok(StepChoice::Extreme(1))
    }
}

/// One coin for the whole path: all zeros with probability `delta`, else all
/// ones.
struct P2 {
    delta: f64,
}

impl Strategy for P2 {
    fn name(&self) -> &str {
        "P2"
    }

    fn choose(&self, ctx: &ChooseCtx) -> Result<StepChoice> {
        match ctx.history.first() {
            None => Ok(StepChoice::Mixture(vec![self.delta, 1.0 - self.delta])),
            Some(x) if *x > 0.5 => Ok(StepChoice::Extreme(1)),
            Some(_) => Ok(StepChoice::Extreme(0)),
        }
    }
}

/// Iid Bernoulli(`1 - delta`).
struct P3 {
    delta: f64,
}

impl Strategy for P3 {
    fn name(&self) -> &str {
        "P3"
    }

    fn history_dependent(&self) -> bool {
        false
    }

    fn choose(&self, _ctx: &ChooseCtx) -> Result<StepChoice> {
        Ok(StepChoice::Mixture(vec![self.delta, 1.0 - self.delta]))
    }
}

/// Coverage of `mean > (1 - delta) - epsilon` under each model, and the
/// family's lower envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example1Coverage {
    pub n: u64,
    pub epsilon: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// `min(p1, p2, p3)` — stuck at `1 - delta` for every `n`.
    pub lower: f64,
}

/// Closed-form coverage at horizon `n`.
///
/// Requires `0 < epsilon < 1 - delta`: below 0 the event is empty, above
/// `1 - delta` the threshold is negative and the event trivially certain, so
/// only this window says anything.
pub fn example1_coverage(delta: f64, epsilon: f64, n: u64) -> Result<Example1Coverage> {
    let ex = Example1::new(delta)?;
    let delta = ex.delta();
    if !(epsilon.is_finite() && 0.0 < epsilon && epsilon < 1.0 - delta) {
        return Err(Error::invalid(format!(
            "epsilon = {epsilon} must lie strictly inside (0, {})",
            1.0 - delta
        )));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    // P3: P(S > n (1 - delta - epsilon)) for S ~ Binomial(n, 1 - delta).
    // The threshold is meant to be compared against integer sums; guard
    // against float noise pushing an intended integer just past itself.
    let t = n as f64 * (1.0 - delta - epsilon);
    let tr = t.round();
    let tf = if (t - tr).abs() < 1e-9 { tr } else { t.floor() };
    let p3 = if tf < 0.0 {
        1.0
    } else {
        let bin =
            Binomial::new(1.0 - delta, n).map_err(|e| Error::invalid(format!("binomial: {e}")))?;
        1.0 - bin.cdf(tf as u64)
    };
    let p1 = 1.0;
    let p2 = 1.0 - delta;
    Ok(Example1Coverage {
        n,
        epsilon,
        p1,
        p2,
        p3,
        lower: p1.min(p2).min(p3),
    })
}

/// [`example1_coverage`] over a grid of horizons.
pub fn example1_coverage_grid(
    delta: f64,
    epsilon: f64,
    ns: &[u64],
) -> Result<Vec<Example1Coverage>> {
    ns.iter()
        .map(|&n| example1_coverage(delta, epsilon, n))
        .collect()
}

/// The family truncated to its first `i` coordinates, as a joint credal set
/// with extremes `P1`, `P2`, `P3`.
pub fn example1_truncated_joint(delta: f64, i: usize) -> Result<JointCredalSet> {
    let ex = Example1::new(delta)?;
    let delta = ex.delta();
    if i == 0 {
        return Err(Error::invalid("need at least one coordinate"));
    }
    if i > 20 {
        return Err(Error::invalid(format!(
            "{i} coordinates means 2^{i} joint outcomes; stopping at 20"
        )));
    }
    let shape = ProductSpace::power(OutcomeSpace::binary(), i)?;
    let size = shape.len();

    let mut p1 = vec![0.0; size];
    p1[shape.index(&vec![1; i])] = 1.0;

    let mut p2 = vec![0.0; size];
    p2[shape.index(&vec![0; i])] = delta;
    p2[shape.index(&vec![1; i])] = 1.0 - delta;

    let mut p3 = vec![0.0; size];
    for (idx, slot) in p3.iter_mut().enumerate() {
        let multi = shape.unindex(idx);
        let ones = multi.iter().filter(|&&b| b == 1).count() as i32;
        *slot = (1.0 - delta).powi(ones) * delta.powi(i as i32 - ones);
    }

    JointCredalSet::from_extreme_weights(shape, vec![p1, p2, p3])
}

/// Both sides of the conditioning gap on the truncated family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Example1Gap {
    pub coordinate: usize,
    /// Regular extension: conditioning on events of positive upper
    /// probability. Fails — learning `X_1 = 0` moves the envelope.
    pub regular: IrrelevanceReport,
    /// Strict policy: only events of positive lower probability. Holds —
    /// each one contains the all-ones path, pinning the envelope.
    pub strict: IrrelevanceReport,
}

/// Run the weak-irrelevance check on coordinate `i` of the truncated family
/// under both conditioning policies.
pub fn example1_gap(delta: f64, i: usize, opts: &IrrelevanceOptions) -> Result<Example1Gap> {
    let joint = example1_truncated_joint(delta, i)?;
    let regular = check_weak_irrelevance(&joint, i, ConditioningPolicy::RegularExtension, opts)?;
    let strict = check_weak_irrelevance(&joint, i, ConditioningPolicy::StrictPositiveLower, opts)?;
    Ok(Example1Gap {
        coordinate: i,
        regular,
        strict,
    })
}

/// The epistemic variant of [`example1_gap`] (all event indicators of the
/// coordinate, not just its projection).
pub fn example1_gap_epistemic(
    delta: f64,
    i: usize,
    opts: &IrrelevanceOptions,
) -> Result<Example1Gap> {
    let joint = example1_truncated_joint(delta, i)?;
    let regular =
        check_epistemic_irrelevance(&joint, i, ConditioningPolicy::RegularExtension, opts)?;
    let strict =
        check_epistemic_irrelevance(&joint, i, ConditioningPolicy::StrictPositiveLower, opts)?;
    Ok(Example1Gap {
        coordinate: i,
        regular,
        strict,
    })
}
