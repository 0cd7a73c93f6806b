//! Closed-form concentration bounds and law-of-large-numbers thresholds.
//!
//! Each formula has a fixed string identifier used across reports, the CLI,
//! and the FFI. Probability-valued results are clamped to `[0, 1]`; the
//! unclamped evaluation is kept in `raw_value` (the MGF bound, for one, is
//! always >= 1). Tail epsilons are absolute deviations of the *sum*; coverage
//! epsilons are deviations of the running *mean*.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Fixed identifiers for the implemented formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormulaId {
    #[serde(rename = "thm1")]
    Thm1,
    #[serde(rename = "thm2")]
    Thm2,
    #[serde(rename = "thm3-wlln")]
    Thm3Wlln,
    #[serde(rename = "dcm-wlln")]
    DcmWlln,
    #[serde(rename = "thm3-slln-N")]
    Thm3SllnN,
    #[serde(rename = "thm4-wlln")]
    Thm4Wlln,
    #[serde(rename = "thm4-slln-N")]
    Thm4SllnN,
    #[serde(rename = "markov")]
    Markov,
    #[serde(rename = "hoeffding-mgf")]
    HoeffdingMgf,
    #[serde(rename = "khr")]
    Khr,
}

impl FormulaId {
    pub const ALL: [FormulaId; 10] = [
        FormulaId::Thm1,
        FormulaId::Thm2,
        FormulaId::Thm3Wlln,
        FormulaId::DcmWlln,
        FormulaId::Thm3SllnN,
        FormulaId::Thm4Wlln,
        FormulaId::Thm4SllnN,
        FormulaId::Markov,
        FormulaId::HoeffdingMgf,
        FormulaId::Khr,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FormulaId::Thm1 => "thm1",
            FormulaId::Thm2 => "thm2",
            FormulaId::Thm3Wlln => "thm3-wlln",
            FormulaId::DcmWlln => "dcm-wlln",
            FormulaId::Thm3SllnN => "thm3-slln-N",
            FormulaId::Thm4Wlln => "thm4-wlln",
            FormulaId::Thm4SllnN => "thm4-slln-N",
            FormulaId::Markov => "markov",
            FormulaId::HoeffdingMgf => "hoeffding-mgf",
            FormulaId::Khr => "khr",
        }
    }
}

impl std::fmt::Display for FormulaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FormulaId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FormulaId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown formula {s:?}; expected one of: {}",
                    FormulaId::ALL.map(|id| id.as_str()).join(", ")
                ))
            })
    }
}

/// Which event family a bound speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// `sum_i (X_i - upper mean_i) >= eps` (same value bounds the mirrored
    /// lower-deviation event).
    UpperDeviation,
    /// `sum_i (X_i - lower mean_i) <= -eps`.
    LowerDeviation,
    /// The running mean stays inside the two-sided band.
    TwoSidedCoverage,
}

/// Per-step ranges `B_i` (each step's draw moves within an interval of width
/// `B_i`), with `gamma = sum_i B_i^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RangeSpec {
    b: Vec<f64>,
}

impl RangeSpec {
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::invalid("range spec must cover at least one step"));
        }
        for (i, v) in b.iter().enumerate() {
            ensure_finite(&format!("B[{i}]"), *v)?;
            if *v <= 0.0 {
                return Err(Error::invalid(format!("B[{i}] = {v} must be positive")));
            }
        }
        Ok(RangeSpec { b })
    }

    /// `n` steps of the same range.
    pub fn uniform(b: f64, n: usize) -> Result<Self> {
        RangeSpec::new(vec![b; n.max(1)])
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn gamma(&self) -> f64 {
        self.b.iter().map(|v| v * v).sum()
    }

    pub fn b_max(&self) -> f64 {
        self.b.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl TryFrom<Vec<f64>> for RangeSpec {
    type Error = Error;
    fn try_from(b: Vec<f64>) -> Result<Self> {
        RangeSpec::new(b)
    }
}

impl From<RangeSpec> for Vec<f64> {
    fn from(r: RangeSpec) -> Vec<f64> {
        r.b
    }
}

/// Moment-mode parameters: a cap `sigma2` on conditional variances and a
/// half-width `delta` of the conditional-mean band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub sigma2: f64,
    pub delta: f64,
}

impl MomentSpec {
    pub fn new(sigma2: f64, delta: f64) -> Result<Self> {
        ensure_finite("sigma2", sigma2)?;
        ensure_finite("delta", delta)?;
        if sigma2 < 0.0 || delta < 0.0 {
            return Err(Error::invalid(format!(
                "moment spec needs sigma2 >= 0 and delta >= 0, got ({sigma2}, {delta})"
            )));
        }
        Ok(MomentSpec { sigma2, delta })
    }
}

/// The band the running lower/upper mean tracks average into.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanBand {
    pub lower: f64,
    pub upper: f64,
}

impl MeanBand {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        ensure_finite("band lower", lower)?;
        ensure_finite("band upper", upper)?;
        if lower > upper {
            return Err(Error::invalid(format!(
                "mean band has lower {lower} > upper {upper}"
            )));
        }
        Ok(MeanBand { lower, upper })
    }
}

/// Inputs echoed into a [`BoundReport`]; only the fields a formula uses are
/// present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_moments: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    /// Tighter proof-chain value backing a threshold's headline guarantee.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intermediate: Option<f64>,
}

/// One evaluated bound: identifier, the side it controls, the clamped
/// probability value, and the echoed inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula_id: FormulaId,
    pub side: Side,
    /// Probability value clamped to `[0, 1]`.
    pub value: f64,
    /// Unclamped evaluation, when it differs from `value`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_value: Option<f64>,
    /// Threshold `N` for the slln formulas.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<u64>,
    /// Set when the guarantee is trivially true (e.g. excursion level >= 1).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub vacuous: bool,
    pub inputs: BoundInputs,
}

impl BoundReport {
    fn probability(
        formula_id: FormulaId,
        side: Side,
        raw: f64,
        inputs: BoundInputs,
    ) -> BoundReport {
        let value = raw.clamp(0.0, 1.0);
        BoundReport {
            formula_id,
            side,
            value,
            raw_value: (raw != value).then_some(raw),
            threshold: None,
            vacuous: false,
            inputs,
        }
    }

    /// Is this a tail bound (upper bound on a deviation event) as opposed to
    /// a coverage bound (lower bound on a band event)?
    pub fn is_tail(&self) -> bool {
        matches!(self.side, Side::UpperDeviation | Side::LowerDeviation)
    }
}

fn check_epsilon(epsilon: f64) -> Result<f64> {
    ensure_finite("epsilon", epsilon)?;
    if epsilon <= 0.0 {
        return Err(Error::invalid(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    Ok(epsilon)
}

fn check_n(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    Ok(n)
}

/// `exp(-2 eps^2 / gamma)`: tail bound for sums of adaptively-chosen
/// bounded steps, `gamma = sum_i B_i^2`. The same value bounds the
/// upper-deviation event `sum (X_i - upper mean_i) >= eps` and the mirrored
/// lower-deviation event.
pub fn hoeffding_tail(epsilon: f64, r: &RangeSpec) -> Result<BoundReport> {
    let epsilon = check_epsilon(epsilon)?;
    let raw = (-2.0 * epsilon * epsilon / r.gamma()).exp();
    Ok(BoundReport::probability(
        FormulaId::Thm1,
        Side::UpperDeviation,
        raw,
        BoundInputs {
            n: Some(r.len() as u64),
            epsilon: Some(epsilon),
            b: Some(r.b().to_vec()),
            gamma: Some(r.gamma()),
            ..Default::default()
        },
    ))
}

/// The martingale-difference form of the same exponential tail; numerically
/// identical to [`hoeffding_tail`], reported under its own identifier.
pub fn azuma_tail(epsilon: f64, r: &RangeSpec) -> Result<BoundReport> {
    let mut report = hoeffding_tail(epsilon, r)?;
    report.formula_id = FormulaId::Thm2;
    Ok(report)
}

/// Two-sided coverage `max(0, 1 - 2 exp(-2 n eps^2 / B_max^2))` for the
/// running mean staying within `eps` of the mean band.
pub fn wlln_coverage_bounded(n: u64, epsilon: f64, r: &RangeSpec) -> Result<BoundReport> {
    let n = check_n(n)?;
    let epsilon = check_epsilon(epsilon)?;
    let bm = r.b_max();
    let raw = 1.0 - 2.0 * (-2.0 * n as f64 * epsilon * epsilon / (bm * bm)).exp();
    Ok(BoundReport::probability(
        FormulaId::Thm3Wlln,
        Side::TwoSidedCoverage,
        raw,
        BoundInputs {
            n: Some(n),
            epsilon: Some(epsilon),
            b_max: Some(bm),
            ..Default::default()
        },
    ))
}

/// The older two-sided coverage `max(0, 1 - 2 exp(-(n eps^2 / 4) / B_max^2))`;
/// dominated by [`wlln_coverage_bounded`] everywhere.
pub fn dcm_coverage_bounded(n: u64, epsilon: f64, r: &RangeSpec) -> Result<BoundReport> {
    let n = check_n(n)?;
    let epsilon = check_epsilon(epsilon)?;
    let bm = r.b_max();
    let raw = 1.0 - 2.0 * (-(n as f64 * epsilon * epsilon / 4.0) / (bm * bm)).exp();
    Ok(BoundReport::probability(
        FormulaId::DcmWlln,
        Side::TwoSidedCoverage,
        raw,
        BoundInputs {
            n: Some(n),
            epsilon: Some(epsilon),
            b_max: Some(bm),
            ..Default::default()
        },
    ))
}

/// Smallest positive integer strictly exceeding `x`, nudged upward by a hair
/// so that grid inputs landing exactly on an integer round up (the
/// conservative direction for a threshold).
fn strict_ceiling(x: f64) -> u64 {
    let nudged = x + f64::max(1e-9, x.abs() * 1e-12);
    let n = nudged.floor() + 1.0;
    if n < 1.0 {
        1
    } else {
        n as u64
    }
}

/// A threshold result: the step index `N` from which the guarantee holds,
/// and whether the guarantee was vacuous to begin with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SllnThreshold {
    pub n: u64,
    pub vacuous: bool,
}

/// Smallest integer `N` strictly exceeding
/// `-(B^2 / (2 eps^2)) ln(eps (1 - e^{-2 eps^2 / B^2}))`.
///
/// From step `N` on, the probability that the running mean ever strays `eps`
/// from its band inside any window `[N, N + N']` is below `eps` per tail (the
/// geometric sum `e^{-2 N eps^2/B^2} / (1 - e^{-2 eps^2/B^2})` is `< eps`).
/// `eps >= 1` makes that guarantee vacuous: `N = 1` with the flag set.
pub fn slln_threshold_bounded(epsilon: f64, b_max: f64) -> Result<SllnThreshold> {
    let epsilon = check_epsilon(epsilon)?;
    ensure_finite("b_max", b_max)?;
    if b_max <= 0.0 {
        return Err(Error::invalid(format!("b_max = {b_max} must be positive")));
    }
    if epsilon >= 1.0 {
        return Ok(SllnThreshold {
            n: 1,
            vacuous: true,
        });
    }
    let b2 = b_max * b_max;
    let rate = 1.0 - (-2.0 * epsilon * epsilon / b2).exp();
    let rhs = -(b2 / (2.0 * epsilon * epsilon)) * (epsilon * rate).ln();
    Ok(SllnThreshold {
        n: strict_ceiling(rhs),
        vacuous: false,
    })
}

/// The geometric excursion sum `e^{-2 N eps^2/B^2} / (1 - e^{-2 eps^2/B^2})`
/// evaluated at `N`; the threshold above makes this `< eps`.
pub fn excursion_tail_bounded(n_start: u64, epsilon: f64, b_max: f64) -> Result<f64> {
    let epsilon = check_epsilon(epsilon)?;
    if b_max <= 0.0 {
        return Err(Error::invalid(format!("b_max = {b_max} must be positive")));
    }
    let b2 = b_max * b_max;
    let q = (-2.0 * epsilon * epsilon / b2).exp();
    Ok(q.powi(n_start.max(1) as i32) / (1.0 - q))
}

/// Two-sided coverage `max(0, 1 - (sigma2 + delta^2) / (eps^2 n))` for
/// moment-constrained steps.
pub fn wlln_coverage_unbounded(n: u64, epsilon: f64, m: &MomentSpec) -> Result<BoundReport> {
    let n = check_n(n)?;
    let epsilon = check_epsilon(epsilon)?;
    let raw = 1.0 - (m.sigma2 + m.delta * m.delta) / (epsilon * epsilon * n as f64);
    Ok(BoundReport::probability(
        FormulaId::Thm4Wlln,
        Side::TwoSidedCoverage,
        raw,
        BoundInputs {
            n: Some(n),
            epsilon: Some(epsilon),
            sigma2: Some(m.sigma2),
            delta: Some(m.delta),
            ..Default::default()
        },
    ))
}

/// Smallest integer `N` strictly exceeding `(sigma2 + delta^2) / eps^3`.
/// From `N` on, windowed coverage exceeds `1 - 2 eps` (the proof chain passes
/// through `1 - 2 (sigma2 + delta^2) / (eps^2 N)`).
pub fn slln_threshold_unbounded(epsilon: f64, m: &MomentSpec) -> Result<SllnThreshold> {
    let epsilon = check_epsilon(epsilon)?;
    let rhs = (m.sigma2 + m.delta * m.delta) / (epsilon * epsilon * epsilon);
    Ok(SllnThreshold {
        n: strict_ceiling(rhs),
        vacuous: false,
    })
}

/// `min(1, E / eps)`: the one-sided tail for a non-negative sum with upper
/// expectation `E`.
pub fn markov_tail(expectation_upper: f64, epsilon: f64) -> Result<f64> {
    ensure_finite("expectation_upper", expectation_upper)?;
    if expectation_upper < 0.0 {
        return Err(Error::invalid(format!(
            "expectation_upper = {expectation_upper} must be non-negative"
        )));
    }
    let epsilon = check_epsilon(epsilon)?;
    Ok((expectation_upper / epsilon).min(1.0))
}

/// `exp(s^2 (b - a)^2 / 8)`: dominates the moment generating function
/// `E[e^{sX}]` of any distribution supported on `[a, b]` with mean `<= 0`.
pub fn hoeffding_mgf_bound(s: f64, a: f64, b: f64) -> Result<f64> {
    ensure_finite("s", s)?;
    ensure_finite("a", a)?;
    ensure_finite("b", b)?;
    if s <= 0.0 {
        return Err(Error::invalid(format!("s = {s} must be positive")));
    }
    if a > b {
        return Err(Error::invalid(format!("support has a = {a} > b = {b}")));
    }
    Ok((s * s * (b - a) * (b - a) / 8.0).exp())
}

/// `max(0, 1 - sum_i m_i / eps_i^2)`: a lower bound on the probability that a
/// martingale with per-step second moments `m_i` stays inside the widening
/// band `|Y_i| < eps_i`. Requires positive, non-decreasing `eps_i`.
pub fn khr_bound(second_moments: &[f64], epsilons: &[f64]) -> Result<f64> {
    if second_moments.len() != epsilons.len() {
        return Err(Error::invalid(format!(
            "{} second moments but {} epsilons",
            second_moments.len(),
            epsilons.len()
        )));
    }
    if second_moments.is_empty() {
        return Err(Error::invalid("khr bound needs at least one step"));
    }
    let mut prev = 0.0;
    for (i, &e) in epsilons.iter().enumerate() {
        ensure_finite(&format!("epsilon[{i}]"), e)?;
        if e <= 0.0 {
            return Err(Error::invalid(format!(
                "epsilon[{i}] = {e} must be positive"
            )));
        }
        if e < prev {
            return Err(Error::invalid(format!(
                "epsilons must be non-decreasing; epsilon[{i}] = {e} < {prev}"
            )));
        }
        prev = e;
    }
    let mut sum = 0.0;
    for (i, &m) in second_moments.iter().enumerate() {
        ensure_finite(&format!("second_moment[{i}]"), m)?;
        if m < 0.0 {
            return Err(Error::invalid(format!(
                "second_moment[{i}] = {m} must be non-negative"
            )));
        }
        sum += m / (epsilons[i] * epsilons[i]);
    }
    Ok((1.0 - sum).max(0.0))
}

/// `phi(u) = -p u + ln(1 - p + p e^u)`: the centered log-MGF of a two-point
/// distribution on `{a, b}` with mean 0, where `p = -a / (b - a)` and
/// `u = s (b - a)`.
pub fn phi(p: f64, u: f64) -> Result<f64> {
    check_p(p)?;
    ensure_finite("u", u)?;
    Ok(-p * u + (1.0 - p + p * u.exp()).ln())
}

/// `phi''(u) = p (1 - p) e^u / (1 - p + p e^u)^2`; its supremum over all `u`
/// is 1/4, attained where `e^u = (1 - p) / p`.
pub fn phi_second(p: f64, u: f64) -> Result<f64> {
    check_p(p)?;
    ensure_finite("u", u)?;
    let eu = u.exp();
    let d = 1.0 - p + p * eu;
    Ok(p * (1.0 - p) * eu / (d * d))
}

fn check_p(p: f64) -> Result<()> {
    ensure_finite("p", p)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p = {p} must be in [0, 1]")));
    }
    Ok(())
}

/// Numeric maximum of `phi''` over `u in (lo, hi]` by golden-section search
/// (the function is unimodal in `u`), refined to ~1e-12 in `u`.
pub fn phi_second_max(p: f64, lo: f64, hi: f64) -> Result<f64> {
    check_p(p)?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("bad search interval ({lo}, {hi}]")));
    }
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    // Open at lo: start a hair inside.
    let mut a = lo + 1e-12 * (hi - lo).max(1.0);
    let mut b = hi;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = phi_second(p, c)?;
    let mut fd = phi_second(p, d)?;
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = phi_second(p, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = phi_second(p, d)?;
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    Ok(fc.max(fd))
}

/// Report builders for the formulas whose core operation returns a plain
/// number or threshold; these are what the CLI and FFI serialize.
pub mod report {
    use super::*;

    pub fn thm3_slln(epsilon: f64, b_max: f64) -> Result<BoundReport> {
        let t = slln_threshold_bounded(epsilon, b_max)?;
        let intermediate = if t.vacuous {
            None
        } else {
            Some(1.0 - 2.0 * excursion_tail_bounded(t.n, epsilon, b_max)?)
        };
        Ok(BoundReport {
            formula_id: FormulaId::Thm3SllnN,
            side: Side::TwoSidedCoverage,
            value: (1.0 - 2.0 * epsilon).clamp(0.0, 1.0),
            raw_value: None,
            threshold: Some(t.n),
            vacuous: t.vacuous,
            inputs: BoundInputs {
                epsilon: Some(epsilon),
                b_max: Some(b_max),
                intermediate,
                ..Default::default()
            },
        })
    }

    pub fn thm4_slln(epsilon: f64, m: &MomentSpec) -> Result<BoundReport> {
        let t = slln_threshold_unbounded(epsilon, m)?;
        let intermediate =
            1.0 - 2.0 * (m.sigma2 + m.delta * m.delta) / (epsilon * epsilon * t.n as f64);
        Ok(BoundReport {
            formula_id: FormulaId::Thm4SllnN,
            side: Side::TwoSidedCoverage,
            value: (1.0 - 2.0 * epsilon).clamp(0.0, 1.0),
            raw_value: None,
            threshold: Some(t.n),
            vacuous: t.vacuous,
            inputs: BoundInputs {
                epsilon: Some(epsilon),
                sigma2: Some(m.sigma2),
                delta: Some(m.delta),
                intermediate: Some(intermediate),
                ..Default::default()
            },
        })
    }

    pub fn markov(expectation_upper: f64, epsilon: f64) -> Result<BoundReport> {
        let raw = super::markov_tail(expectation_upper, epsilon)?;
        Ok(BoundReport::probability(
            FormulaId::Markov,
            Side::UpperDeviation,
            raw,
            BoundInputs {
                epsilon: Some(epsilon),
                expectation_upper: Some(expectation_upper),
                ..Default::default()
            },
        ))
    }

    pub fn hoeffding_mgf(s: f64, a: f64, b: f64) -> Result<BoundReport> {
        let raw = super::hoeffding_mgf_bound(s, a, b)?;
        let mut r = BoundReport::probability(
            FormulaId::HoeffdingMgf,
            Side::UpperDeviation,
            raw,
            BoundInputs {
                s: Some(s),
                a: Some(a),
                b_upper: Some(b),
                ..Default::default()
            },
        );
        // The MGF bound is >= 1 by construction; always keep the raw value.
        r.raw_value = Some(raw);
        Ok(r)
    }

    pub fn khr(second_moments: &[f64], epsilons: &[f64]) -> Result<BoundReport> {
        let raw = super::khr_bound(second_moments, epsilons)?;
        Ok(BoundReport::probability(
            FormulaId::Khr,
            Side::TwoSidedCoverage,
            raw,
            BoundInputs {
                n: Some(second_moments.len() as u64),
                second_moments: Some(second_moments.to_vec()),
                epsilons: Some(epsilons.to_vec()),
                ..Default::default()
            },
        ))
    }
}
