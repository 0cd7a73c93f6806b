//! Adversarial forward-irrelevant processes.
//!
//! A process spec fixes, per step, the set of conditional distributions a
//! strategy may choose from: either a credal set over a finite support
//! (choices are its members) or a moment constraint (any finite-support
//! distribution with conditional mean in a band and variance under a cap).
//! A strategy is nature's play: a history-dependent rule picking one
//! admissible conditional distribution per step. Everything downstream —
//! sampling, exact enumeration, backward induction, bound verification —
//! quantifies over strategies.

mod engine;
mod strategies;
mod verify;

pub use engine::{
    count_events, exact_event_probability, lower_upper_event_probability_dp, sample, walk_tree,
    TrajectoryBatch, TreeNode,
};
pub use strategies::{
    builtin_strategies, parse_strategy, strategy_names, ExtremeConst, GaussGrid, Greedy, HashMix,
    IidMix, SignSwitch, TwoPoint,
};
pub use verify::{
    clopper_pearson, direction_for, event_for, verify_bound, write_verification_csv, BinomialCi,
    BoundDirection, StrategyVerification, Verdict, VerificationRecord, VerifyOptions,
};

use serde::{Deserialize, Serialize};

use crate::bounds::{MeanBand, MomentSpec, RangeSpec};
use crate::credal::{CredalSet, OutcomeSpace, ProbabilityVector, PROB_SUM_TOL};
use crate::error::{ensure_finite, Error, Result};

/// A finite-support distribution on the reals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FiniteDistRaw", into = "FiniteDistRaw")]
pub struct FiniteDist {
    values: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct FiniteDistRaw {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl FiniteDist {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::invalid(format!(
                "distribution needs matching non-empty values/probs, got {}/{}",
                values.len(),
                probs.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            ensure_finite(&format!("value[{i}]"), *v)?;
        }
        let mut sum = 0.0;
        for (i, p) in probs.iter().enumerate() {
            ensure_finite(&format!("prob[{i}]"), *p)?;
            if *p < 0.0 {
                return Err(Error::invalid(format!("prob[{i}] = {p} is negative")));
            }
            sum += *p;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::invalid(format!(
                "probabilities sum to {sum}, not 1 (tolerance {PROB_SUM_TOL})"
            )));
        }
        Ok(FiniteDist { values, probs })
    }

    pub fn point_mass(v: f64) -> Result<Self> {
        FiniteDist::new(vec![v], vec![1.0])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| v * p)
            .sum()
    }

    pub fn second_moment_about(&self, c: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| (v - c) * (v - c) * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        self.second_moment_about(self.mean())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Right-continuous inverse CDF: the unique index `j` with
    /// `F(j-1) <= u < F(j)`, so each atom is hit with exactly its probability
    /// for `u` uniform on `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut cum = 0.0;
        let mut last = 0;
        for (j, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                cum += p;
                last = j;
                if u < cum {
                    return self.values[j];
                }
            }
        }
        self.values[last] // float shortfall: the top atom absorbs it
    }
}

impl TryFrom<FiniteDistRaw> for FiniteDist {
    type Error = Error;
    fn try_from(raw: FiniteDistRaw) -> Result<Self> {
        FiniteDist::new(raw.values, raw.probs)
    }
}

impl From<FiniteDist> for FiniteDistRaw {
    fn from(d: FiniteDist) -> FiniteDistRaw {
        FiniteDistRaw {
            values: d.values,
            probs: d.probs,
        }
    }
}

/// A step whose conditional distribution must lie in a credal set over a
/// fixed finite support of real values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CredalStepRaw", into = "CredalStepRaw")]
pub struct CredalStep {
    values: Vec<f64>,
    set: CredalSet,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct CredalStepRaw {
    pub values: Vec<f64>,
    pub extremes: Vec<Vec<f64>>,
}

impl CredalStep {
    pub fn new(values: Vec<f64>, set: CredalSet) -> Result<Self> {
        if values.len() != set.space().len() {
            return Err(Error::invalid(format!(
                "{} support values for a {}-outcome credal set",
                values.len(),
                set.space().len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            ensure_finite(&format!("support value[{i}]"), *v)?;
            if values[..i].contains(v) {
                return Err(Error::invalid(format!("duplicate support value {v}")));
            }
        }
        Ok(CredalStep { values, set })
    }

    /// Build from raw support values and extreme weights, synthesizing
    /// outcome labels from the values.
    pub fn from_parts(values: Vec<f64>, extremes: Vec<Vec<f64>>) -> Result<Self> {
        let space = OutcomeSpace::new(values.iter().map(|v| v.to_string()).collect())?;
        let set = CredalSet::new(
            space,
            extremes
                .into_iter()
                .map(ProbabilityVector::new)
                .collect::<Result<Vec<_>>>()?,
        )?;
        CredalStep::new(values, set)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn set(&self) -> &CredalSet {
        &self.set
    }

    pub fn num_extremes(&self) -> usize {
        self.set.num_extremes()
    }

    pub fn extreme_dist(&self, j: usize) -> Result<FiniteDist> {
        let e = self.set.extremes().get(j).ok_or_else(|| {
            Error::invalid(format!(
                "extreme index {j} out of range ({} extremes)",
                self.set.num_extremes()
            ))
        })?;
        FiniteDist::new(self.values.clone(), e.weights().to_vec())
    }

    pub fn extreme_mean(&self, j: usize) -> f64 {
        self.set.extremes()[j].dot(&self.values)
    }

    pub fn lower_mean(&self) -> f64 {
        (0..self.num_extremes())
            .map(|j| self.extreme_mean(j))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn upper_mean(&self) -> f64 {
        (0..self.num_extremes())
            .map(|j| self.extreme_mean(j))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range_width(&self) -> f64 {
        let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }
}

impl TryFrom<CredalStepRaw> for CredalStep {
    type Error = Error;
    fn try_from(raw: CredalStepRaw) -> Result<Self> {
        CredalStep::from_parts(raw.values, raw.extremes)
    }
}

impl From<CredalStep> for CredalStepRaw {
    fn from(s: CredalStep) -> CredalStepRaw {
        CredalStepRaw {
            extremes: s
                .set
                .extremes()
                .iter()
                .map(|e| e.weights().to_vec())
                .collect(),
            values: s.values,
        }
    }
}

/// Allowed supports for a moment-constrained step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MomentSupportRaw", into = "MomentSupportRaw")]
pub enum MomentSupport {
    /// Distributions must put their mass on these atoms.
    Atoms(Vec<f64>),
    /// Any finite support on the reals (e.g. for discretized continuous
    /// families).
    Unrestricted,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentSupportRaw {
    Atoms(Vec<f64>),
    Tag(String),
}

impl TryFrom<MomentSupportRaw> for MomentSupport {
    type Error = Error;
    fn try_from(raw: MomentSupportRaw) -> Result<Self> {
        match raw {
            MomentSupportRaw::Atoms(a) => Ok(MomentSupport::Atoms(a)),
            MomentSupportRaw::Tag(t) if t == "unrestricted" => Ok(MomentSupport::Unrestricted),
            MomentSupportRaw::Tag(t) => Err(Error::invalid(format!(
                "unknown support {t:?}; use an atom list or \"unrestricted\""
            ))),
        }
    }
}

impl From<MomentSupport> for MomentSupportRaw {
    fn from(s: MomentSupport) -> MomentSupportRaw {
        match s {
            MomentSupport::Atoms(a) => MomentSupportRaw::Atoms(a),
            MomentSupport::Unrestricted => MomentSupportRaw::Tag("unrestricted".into()),
        }
    }
}

/// A step whose conditional distribution is constrained through moments:
/// mean inside `[mean_lower, mean_upper]`, variance at most `variance_cap`,
/// optionally support width at most `range_bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MomentStepRaw", into = "MomentStepRaw")]
pub struct MomentStep {
    pub support: MomentSupport,
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub variance_cap: f64,
    pub range_bound: Option<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct MomentStepRaw {
    pub support: MomentSupport,
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub variance_cap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_bound: Option<f64>,
}

impl MomentStep {
    pub fn new(
        support: MomentSupport,
        mean_lower: f64,
        mean_upper: f64,
        variance_cap: f64,
        range_bound: Option<f64>,
    ) -> Result<Self> {
        ensure_finite("mean_lower", mean_lower)?;
        ensure_finite("mean_upper", mean_upper)?;
        ensure_finite("variance_cap", variance_cap)?;
        if mean_lower > mean_upper {
            return Err(Error::invalid(format!(
                "mean band has lower {mean_lower} > upper {mean_upper}"
            )));
        }
        if variance_cap < 0.0 {
            return Err(Error::invalid(format!(
                "variance cap {variance_cap} must be non-negative"
            )));
        }
        if let Some(b) = range_bound {
            ensure_finite("range_bound", b)?;
            if b <= 0.0 {
                return Err(Error::invalid(format!("range bound {b} must be positive")));
            }
        }
        if let MomentSupport::Atoms(atoms) = &support {
            if atoms.is_empty() {
                return Err(Error::invalid("atom support must be non-empty"));
            }
            for (i, a) in atoms.iter().enumerate() {
                ensure_finite(&format!("atom[{i}]"), *a)?;
            }
            let lo = atoms.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = atoms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if let Some(b) = range_bound {
                if hi - lo > b + 1e-12 {
                    return Err(Error::invalid(format!(
                        "atoms span {} which exceeds the range bound {b}",
                        hi - lo
                    )));
                }
            }
            if mean_lower < lo - 1e-12 || mean_upper > hi + 1e-12 {
                return Err(Error::invalid(format!(
                    "mean band [{mean_lower}, {mean_upper}] leaves the atom hull [{lo}, {hi}]"
                )));
            }
        }
        Ok(MomentStep {
            support,
            mean_lower,
            mean_upper,
            variance_cap,
            range_bound,
        })
    }
}

impl TryFrom<MomentStepRaw> for MomentStep {
    type Error = Error;
    fn try_from(raw: MomentStepRaw) -> Result<Self> {
        MomentStep::new(
            raw.support,
            raw.mean_lower,
            raw.mean_upper,
            raw.variance_cap,
            raw.range_bound,
        )
    }
}

impl From<MomentStep> for MomentStepRaw {
    fn from(s: MomentStep) -> MomentStepRaw {
        MomentStepRaw {
            support: s.support,
            mean_lower: s.mean_lower,
            mean_upper: s.mean_upper,
            variance_cap: s.variance_cap,
            range_bound: s.range_bound,
        }
    }
}

/// The per-step constraint a strategy must respect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepConstraint {
    Credal(CredalStep),
    Moment(MomentStep),
}

/// How closely a proposed conditional distribution must respect its
/// constraint (means, variances, hull residuals).
pub const CONSTRAINT_TOL: f64 = 1e-9;

impl StepConstraint {
    pub fn lower_mean(&self) -> f64 {
        match self {
            StepConstraint::Credal(c) => c.lower_mean(),
            StepConstraint::Moment(m) => m.mean_lower,
        }
    }

    pub fn upper_mean(&self) -> f64 {
        match self {
            StepConstraint::Credal(c) => c.upper_mean(),
            StepConstraint::Moment(m) => m.mean_upper,
        }
    }

    pub fn range_width(&self) -> Option<f64> {
        match self {
            StepConstraint::Credal(c) => Some(c.range_width()),
            StepConstraint::Moment(m) => match (&m.range_bound, &m.support) {
                (Some(b), _) => Some(*b),
                (None, MomentSupport::Atoms(a)) => {
                    let lo = a.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    Some(hi - lo)
                }
                (None, MomentSupport::Unrestricted) => None,
            },
        }
    }

    /// Is this explicit distribution admissible at this step?
    pub fn check_dist(&self, d: &FiniteDist) -> std::result::Result<(), String> {
        match self {
            StepConstraint::Credal(c) => {
                if d.values() != c.values() {
                    return Err(format!(
                        "support {:?} differs from the step support {:?}",
                        d.values(),
                        c.values()
                    ));
                }
                match c.set().membership_weights(d.probs(), CONSTRAINT_TOL) {
                    Ok(Some(_)) => Ok(()),
                    Ok(None) => Err("distribution lies outside the credal set".into()),
                    Err(e) => Err(e.to_string()),
                }
            }
            StepConstraint::Moment(m) => {
                if let MomentSupport::Atoms(atoms) = &m.support {
                    for v in d.values() {
                        if !atoms.iter().any(|a| (a - v).abs() <= 1e-12) {
                            return Err(format!("value {v} is not one of the allowed atoms"));
                        }
                    }
                }
                if let Some(b) = m.range_bound {
                    let width = d.max_value() - d.min_value();
                    if width > b + CONSTRAINT_TOL {
                        return Err(format!("support width {width} exceeds the range bound {b}"));
                    }
                }
                let mean = d.mean();
                if mean < m.mean_lower - CONSTRAINT_TOL || mean > m.mean_upper + CONSTRAINT_TOL {
                    return Err(format!(
                        "mean {mean} outside [{}, {}]",
                        m.mean_lower, m.mean_upper
                    ));
                }
                let var = d.variance();
                if var > m.variance_cap + CONSTRAINT_TOL {
                    return Err(format!("variance {var} exceeds the cap {}", m.variance_cap));
                }
                Ok(())
            }
        }
    }
}

/// A process: one constraint per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProcessSpecRaw", into = "ProcessSpecRaw")]
pub struct ProcessSpec {
    steps: Vec<StepConstraint>,
}

#[derive(Clone, Default, Serialize, Deserialize)]
pub struct ProcessSpecRaw {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<StepConstraint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepConstraint>,
}

impl ProcessSpec {
    pub fn new(steps: Vec<StepConstraint>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::invalid("process needs at least one step"));
        }
        Ok(ProcessSpec { steps })
    }

    /// `n` copies of the same constraint.
    pub fn homogeneous(step: StepConstraint, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        Ok(ProcessSpec {
            steps: vec![step; n],
        })
    }

    pub fn steps(&self) -> &[StepConstraint] {
        &self.steps
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn lower_means(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.lower_mean()).collect()
    }

    pub fn upper_means(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.upper_mean()).collect()
    }

    /// The averaged mean band `(mu_lower_n, mu_upper_n)` at the horizon.
    pub fn mean_band(&self) -> MeanBand {
        let n = self.horizon() as f64;
        let lo = self.lower_means().iter().sum::<f64>() / n;
        let hi = self.upper_means().iter().sum::<f64>() / n;
        MeanBand {
            lower: lo,
            upper: hi,
        }
    }

    /// Per-step ranges, when every step has one.
    pub fn range_spec(&self) -> Option<RangeSpec> {
        let b: Option<Vec<f64>> = self.steps.iter().map(|s| s.range_width()).collect();
        RangeSpec::new(b?).ok()
    }

    /// A moment envelope valid for every admissible strategy.
    ///
    /// `delta` is the largest mean-band half-width. `sigma2` is, per moment
    /// step, the declared variance cap; per credal step, the upper
    /// expectation of `(X - c)^2` with `c` the step's mean-band midpoint.
    /// That envelope is sound even though the variance itself is concave
    /// over the credal set (a mixture can out-spread every extreme):
    /// `Var(X) <= E[(X - c)^2]` holds for any fixed centre `c`, and the
    /// right-hand side is linear, so its maximum is at an extreme.
    pub fn moment_spec(&self) -> MomentSpec {
        let mut sigma2 = 0.0f64;
        let mut delta = 0.0f64;
        for s in &self.steps {
            delta = delta.max((s.upper_mean() - s.lower_mean()) / 2.0);
            let v = match s {
                StepConstraint::Moment(m) => m.variance_cap,
                StepConstraint::Credal(c) => {
                    let centre = (c.lower_mean() + c.upper_mean()) / 2.0;
                    (0..c.num_extremes())
                        .map(|j| {
                            c.set().extremes()[j]
                                .weights()
                                .iter()
                                .zip(c.values())
                                .map(|(p, v)| p * (v - centre) * (v - centre))
                                .sum::<f64>()
                        })
                        .fold(f64::NEG_INFINITY, f64::max)
                }
            };
            sigma2 = sigma2.max(v);
        }
        MomentSpec { sigma2, delta }
    }

    pub fn is_all_credal(&self) -> bool {
        self.steps
            .iter()
            .all(|s| matches!(s, StepConstraint::Credal(_)))
    }
}

impl TryFrom<ProcessSpecRaw> for ProcessSpec {
    type Error = Error;
    fn try_from(raw: ProcessSpecRaw) -> Result<Self> {
        match (raw.steps, raw.horizon, raw.step) {
            (Some(steps), None, None) => ProcessSpec::new(steps),
            (None, Some(n), Some(step)) => ProcessSpec::homogeneous(step, n),
            _ => Err(Error::invalid(
                "spec needs either \"steps\" or \"horizon\" + \"step\"",
            )),
        }
    }
}

impl From<ProcessSpec> for ProcessSpecRaw {
    fn from(spec: ProcessSpec) -> ProcessSpecRaw {
        let homogeneous = spec.steps.len() > 1 && spec.steps.windows(2).all(|w| w[0] == w[1]);
        if homogeneous {
            ProcessSpecRaw {
                steps: None,
                horizon: Some(spec.steps.len()),
                step: Some(spec.steps.into_iter().next().unwrap()),
            }
        } else {
            ProcessSpecRaw {
                steps: Some(spec.steps),
                horizon: None,
                step: None,
            }
        }
    }
}

/// What a strategy hands back for one step.
#[derive(Clone, Debug)]
pub enum StepChoice {
    /// Index into the step's credal extremes (credal steps only).
    Extreme(usize),
    /// Convex combination of the step's credal extremes (credal steps only).
    Mixture(Vec<f64>),
    /// An explicit distribution, checked against the constraint.
    Dist(FiniteDist),
}

/// Everything a strategy may look at when choosing the next conditional
/// distribution.
pub struct ChooseCtx<'a> {
    pub spec: &'a ProcessSpec,
    /// 0-based step index.
    pub step: usize,
    /// Realized draws so far.
    pub history: &'a [f64],
    /// Sum of the history (maintained by the engine).
    pub sum: f64,
    /// `cum_lower[i]` = sum of the lower means of steps `< i`.
    pub cum_lower: &'a [f64],
    pub cum_upper: &'a [f64],
}

/// Nature's play: pick an admissible conditional distribution per step.
pub trait Strategy: Send + Sync {
    fn name(&self) -> &str;

    /// `false` lets the engine resolve and validate every step once and
    /// reuse the result across trials.
    fn history_dependent(&self) -> bool {
        true
    }

    fn choose(&self, ctx: &ChooseCtx) -> Result<StepChoice>;
}

/// Trajectory predicates verified against bounds.
///
/// Tail epsilons are absolute sum deviations (closed events, `>=`); band
/// epsilons are per-mean deviations (open bands, strict `<`), matching the
/// displays the bounds come from.
///
/// Comparisons are plain IEEE double arithmetic. A level that lands exactly
/// on an achievable `sum - track` value sits on a rounding knife-edge
/// (accumulated mean tracks round like any float sum); choose levels
/// strictly between achievable values when the distinction matters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventSpec {
    /// `sum_i (x_i - upper_mean_i) >= epsilon`.
    SumUpperDev { epsilon: f64 },
    /// `sum_i (x_i - lower_mean_i) <= -epsilon`.
    SumLowerDev { epsilon: f64 },
    /// `mu_lower_n - epsilon < (1/n) sum x_i < mu_upper_n + epsilon`.
    MeanBand { epsilon: f64 },
    /// The running-mean band holds at every step of `[start, start+len]`
    /// (1-based, inclusive).
    WindowBand { start: u64, len: u64, epsilon: f64 },
    /// `|y_j| < epsilons[j]` for every step, `y` the centered running sum.
    MaxBand { epsilons: Vec<f64> },
}

impl std::fmt::Display for EventSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventSpec::SumUpperDev { epsilon } => write!(f, "SUM_UPPER_DEV({epsilon})"),
            EventSpec::SumLowerDev { epsilon } => write!(f, "SUM_LOWER_DEV({epsilon})"),
            EventSpec::MeanBand { epsilon } => write!(f, "MEAN_BAND({epsilon})"),
            EventSpec::WindowBand {
                start,
                len,
                epsilon,
            } => {
                write!(f, "WINDOW_BAND({start},{len},{epsilon})")
            }
            EventSpec::MaxBand { epsilons } => {
                write!(f, "MAX_BAND(n={})", epsilons.len())
            }
        }
    }
}

impl EventSpec {
    /// Does the event read the realized conditional means (and not just the
    /// draws)?
    pub fn reads_means(&self) -> bool {
        matches!(self, EventSpec::MaxBand { .. })
    }
}

/// An event bound to a spec's mean tracks, ready to evaluate along paths.
#[derive(Clone, Debug)]
pub struct BoundEvent {
    event: EventSpec,
    /// `cum_lower[i]` = sum of lower means of the first `i` steps.
    cum_lower: Vec<f64>,
    cum_upper: Vec<f64>,
    horizon: usize,
}

/// Running evaluation state for one trajectory.
#[derive(Clone, Copy, Debug)]
pub struct EventState {
    sum: f64,
    y: f64,
    decided: Option<bool>,
}

impl BoundEvent {
    pub fn new(spec: &ProcessSpec, event: EventSpec) -> Result<Self> {
        let n = spec.horizon();
        let mut cum_lower = Vec::with_capacity(n + 1);
        let mut cum_upper = Vec::with_capacity(n + 1);
        cum_lower.push(0.0);
        cum_upper.push(0.0);
        for s in spec.steps() {
            cum_lower.push(cum_lower.last().unwrap() + s.lower_mean());
            cum_upper.push(cum_upper.last().unwrap() + s.upper_mean());
        }
        match &event {
            EventSpec::SumUpperDev { epsilon }
            | EventSpec::SumLowerDev { epsilon }
            | EventSpec::MeanBand { epsilon } => {
                if !(epsilon.is_finite() && *epsilon > 0.0) {
                    return Err(Error::invalid(format!(
                        "epsilon = {epsilon} must be positive"
                    )));
                }
            }
            EventSpec::WindowBand {
                start,
                len,
                epsilon,
            } => {
                if !(epsilon.is_finite() && *epsilon > 0.0) {
                    return Err(Error::invalid(format!(
                        "epsilon = {epsilon} must be positive"
                    )));
                }
                if *start < 1 || (*start + *len) as usize > n {
                    return Err(Error::invalid(format!(
                        "window [{start}, {}] does not fit a horizon of {n}",
                        start + len
                    )));
                }
            }
            EventSpec::MaxBand { epsilons } => {
                if epsilons.len() != n {
                    return Err(Error::invalid(format!(
                        "{} band levels for a horizon of {n}",
                        epsilons.len()
                    )));
                }
                for (i, e) in epsilons.iter().enumerate() {
                    if !(e.is_finite() && *e > 0.0) {
                        return Err(Error::invalid(format!(
                            "band level [{i}] = {e} must be positive"
                        )));
                    }
                }
            }
        }
        Ok(BoundEvent {
            event,
            cum_lower,
            cum_upper,
            horizon: n,
        })
    }

    pub fn event(&self) -> &EventSpec {
        &self.event
    }

    pub fn start(&self) -> EventState {
        EventState {
            sum: 0.0,
            y: 0.0,
            decided: None,
        }
    }

    /// Feed step `i` (0-based) with draw `x` and realized conditional mean `m`.
    #[inline]
    pub fn update(&self, st: &mut EventState, i: usize, x: f64, m: f64) {
        if st.decided.is_some() {
            return;
        }
        st.sum += x;
        let step = i + 1; // 1-based
        match &self.event {
            EventSpec::SumUpperDev { .. }
            | EventSpec::SumLowerDev { .. }
            | EventSpec::MeanBand { .. } => {}
            EventSpec::WindowBand {
                start,
                len,
                epsilon,
            } => {
                let s = *start as usize;
                let e = (*start + *len) as usize;
                if step >= s && step <= e {
                    let nf = step as f64;
                    let lo = self.cum_lower[step] - nf * *epsilon;
                    let hi = self.cum_upper[step] + nf * *epsilon;
                    if !(st.sum > lo && st.sum < hi) {
                        st.decided = Some(false);
                    } else if step == e {
                        st.decided = Some(true);
                    }
                }
            }
            EventSpec::MaxBand { epsilons } => {
                st.y += x - m;
                if st.y.abs() >= epsilons[i] {
                    st.decided = Some(false);
                }
            }
        }
    }

    #[inline]
    pub fn decided(&self, st: &EventState) -> Option<bool> {
        st.decided
    }

    /// Verdict after all steps have been fed.
    pub fn finish(&self, st: &EventState) -> bool {
        if let Some(d) = st.decided {
            return d;
        }
        let n = self.horizon;
        match &self.event {
            EventSpec::SumUpperDev { epsilon } => st.sum - self.cum_upper[n] >= *epsilon,
            EventSpec::SumLowerDev { epsilon } => st.sum - self.cum_lower[n] <= -*epsilon,
            EventSpec::MeanBand { epsilon } => {
                let nf = n as f64;
                st.sum > self.cum_lower[n] - nf * *epsilon
                    && st.sum < self.cum_upper[n] + nf * *epsilon
            }
            EventSpec::WindowBand { .. } => true, // validated windows decide in update
            EventSpec::MaxBand { .. } => true,
        }
    }

    /// Convenience: evaluate on a full path.
    pub fn eval_path(&self, xs: &[f64], ms: &[f64]) -> bool {
        let mut st = self.start();
        for i in 0..xs.len() {
            self.update(&mut st, i, xs[i], ms[i]);
            if let Some(d) = st.decided {
                return d;
            }
        }
        self.finish(&st)
    }
}
