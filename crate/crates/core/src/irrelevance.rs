//! Irrelevance checks on joint credal sets over product spaces.
//!
//! Given a joint credal set over `X_1 x ... x X_d` and a coordinate `i`, the
//! epistemic check asks whether conditioning on events of the past
//! (`X_1..X_{i-1}`) moves the lower/upper expectation of any test function of
//! `X_i`; the weak check asks the same for the coordinate projection only.
//! Events are enumerated exhaustively over all non-empty subsets of prefix
//! assignments, which is why callers must keep prefix spaces tiny (the cap
//! refuses anything past `default_event_cap()` candidates).
//!
//! Upper expectations of indicator functions do not determine the whole
//! envelope, so no finite function family is complete for "every bounded f".
//! The tested family is therefore explicit in the report: all subset
//! indicators of the coordinate space (when that power set is small), the
//! numeric coordinate projection when the labels parse as numbers, and any
//! caller-supplied extras.

use serde::{Deserialize, Serialize};

use crate::caps::default_event_cap;
use crate::credal::{ConditioningPolicy, CredalSet, OutcomeSpace};
use crate::error::{Error, Result};

/// A finite product of outcome spaces, indexed in row-major order (the last
/// coordinate varies fastest).
#[derive(Clone, Debug)]
pub struct ProductSpace {
    factors: Vec<OutcomeSpace>,
    len: usize,
}

impl ProductSpace {
    pub fn new(factors: Vec<OutcomeSpace>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("product space needs at least one factor"));
        }
        let mut len: usize = 1;
        for f in &factors {
            len = len
                .checked_mul(f.len())
                .ok_or_else(|| Error::invalid("product space size overflows"))?;
        }
        if len as u128 > (1u128 << 26) {
            return Err(Error::Capacity {
                what: "product space outcomes",
                needed: len as u128,
                cap: 1 << 26,
            });
        }
        Ok(ProductSpace { factors, len })
    }

    /// `n` copies of the same factor.
    pub fn power(factor: OutcomeSpace, n: usize) -> Result<Self> {
        ProductSpace::new(vec![factor; n])
    }

    pub fn factors(&self) -> &[OutcomeSpace] {
        &self.factors
    }

    pub fn dims(&self) -> usize {
        self.factors.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Joint index of a multi-index.
    pub fn index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.factors.len());
        let mut idx = 0;
        for (m, f) in multi.iter().zip(&self.factors) {
            debug_assert!(*m < f.len());
            idx = idx * f.len() + m;
        }
        idx
    }

    /// Multi-index of a joint index.
    pub fn unindex(&self, mut idx: usize) -> Vec<usize> {
        let mut multi = vec![0; self.factors.len()];
        for (slot, f) in multi.iter_mut().zip(&self.factors).rev() {
            *slot = idx % f.len();
            idx /= f.len();
        }
        multi
    }

    /// Number of assignments of the first `count` coordinates.
    pub fn prefix_len(&self, count: usize) -> usize {
        self.factors[..count].iter().map(|f| f.len()).product()
    }

    /// Number of assignments of the remaining coordinates (from `count` on).
    pub fn suffix_len(&self, count: usize) -> usize {
        self.factors[count..].iter().map(|f| f.len()).product()
    }

    /// The flattened outcome space, labels joined with `,`.
    pub fn flat_space(&self) -> Result<OutcomeSpace> {
        let mut labels = Vec::with_capacity(self.len);
        for idx in 0..self.len {
            let multi = self.unindex(idx);
            let parts: Vec<&str> = multi
                .iter()
                .zip(&self.factors)
                .map(|(&m, f)| f.labels()[m].as_str())
                .collect();
            labels.push(parts.join(","));
        }
        OutcomeSpace::new(labels)
    }
}

/// A credal set over a product space, with the factor structure retained so
/// coordinates can be addressed.
#[derive(Clone, Debug)]
pub struct JointCredalSet {
    shape: ProductSpace,
    set: CredalSet,
}

impl JointCredalSet {
    pub fn new(shape: ProductSpace, set: CredalSet) -> Result<Self> {
        if set.space().len() != shape.len() {
            return Err(Error::invalid(format!(
                "joint credal set has {} outcomes but the product space has {}",
                set.space().len(),
                shape.len()
            )));
        }
        Ok(JointCredalSet { shape, set })
    }

    /// Build from raw extreme weights, synthesizing the flattened labels.
    pub fn from_extreme_weights(shape: ProductSpace, extremes: Vec<Vec<f64>>) -> Result<Self> {
        let space = shape.flat_space()?;
        let set = CredalSet::new(
            space,
            extremes
                .into_iter()
                .map(crate::credal::ProbabilityVector::new)
                .collect::<Result<Vec<_>>>()?,
        )?;
        JointCredalSet::new(shape, set)
    }

    /// Independent products of per-coordinate extremes: one joint extreme per
    /// tuple of marginal extremes.
    pub fn independent_product(marginals: &[CredalSet]) -> Result<Self> {
        let shape = ProductSpace::new(marginals.iter().map(|m| m.space().clone()).collect())?;
        let mut extremes: Vec<Vec<f64>> = vec![vec![1.0]];
        for m in marginals {
            let mut next = Vec::with_capacity(extremes.len() * m.num_extremes());
            for partial in &extremes {
                for e in m.extremes() {
                    let mut w = Vec::with_capacity(partial.len() * e.len());
                    for p in partial {
                        for q in e.weights() {
                            w.push(p * q);
                        }
                    }
                    next.push(w);
                }
            }
            extremes = next;
        }
        JointCredalSet::from_extreme_weights(shape, extremes)
    }

    pub fn shape(&self) -> &ProductSpace {
        &self.shape
    }

    pub fn set(&self) -> &CredalSet {
        &self.set
    }
}

/// A named test function on a coordinate's outcome space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabelledFunction {
    pub label: String,
    pub values: Vec<f64>,
}

/// Options for the irrelevance checkers.
#[derive(Clone, Debug)]
pub struct IrrelevanceOptions {
    /// Gap above which a conditional envelope counts as moved.
    pub tol: f64,
    /// Cap on the number of candidate events (`2^prefix - 1` must fit).
    pub event_cap: u128,
    /// Numeric values of the checked coordinate, for the projection test
    /// function; defaults to parsing the labels, skipped if unparseable.
    pub coordinate_values: Option<Vec<f64>>,
    /// Additional test functions on the checked coordinate.
    pub extra_functions: Vec<LabelledFunction>,
}

impl Default for IrrelevanceOptions {
    fn default() -> Self {
        IrrelevanceOptions {
            tol: 1e-9,
            event_cap: default_event_cap(),
            coordinate_values: None,
            extra_functions: Vec::new(),
        }
    }
}

/// One conditional envelope that moved.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IrrelevanceViolation {
    /// Prefix assignments (joint indices over the first `i-1` coordinates)
    /// forming the conditioning event.
    pub event_prefixes: Vec<usize>,
    pub function: String,
    pub conditional_lower: f64,
    pub conditional_upper: f64,
    pub unconditional_lower: f64,
    pub unconditional_upper: f64,
    pub gap: f64,
}

/// Outcome of an irrelevance check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IrrelevanceReport {
    pub coordinate: usize,
    pub policy: ConditioningPolicy,
    pub holds: bool,
    pub events_tested: u64,
    /// Events skipped because their upper probability is zero (conditioning
    /// undefined under every policy).
    pub events_skipped_undefined: u64,
    /// Events skipped by the strict-positive-lower guard.
    pub events_skipped_policy: u64,
    /// Labels of the tested function family.
    pub functions: Vec<String>,
    pub max_gap: f64,
    pub worst: Option<IrrelevanceViolation>,
}

/// Does learning the past leave every tested function of `X_i` with the same
/// lower/upper expectations? `i` is 1-based.
pub fn check_epistemic_irrelevance(
    joint: &JointCredalSet,
    i: usize,
    policy: ConditioningPolicy,
    opts: &IrrelevanceOptions,
) -> Result<IrrelevanceReport> {
    check_irrelevance(joint, i, policy, opts, true)
}

/// Like the epistemic check, but tests only the numeric coordinate
/// projection `X_i` itself.
pub fn check_weak_irrelevance(
    joint: &JointCredalSet,
    i: usize,
    policy: ConditioningPolicy,
    opts: &IrrelevanceOptions,
) -> Result<IrrelevanceReport> {
    check_irrelevance(joint, i, policy, opts, false)
}

fn coordinate_functions(
    joint: &JointCredalSet,
    i: usize,
    opts: &IrrelevanceOptions,
    epistemic: bool,
) -> Result<Vec<LabelledFunction>> {
    let coord_space = &joint.shape().factors()[i - 1];
    let k = coord_space.len();
    let mut fns: Vec<LabelledFunction> = Vec::new();

    let projection = match &opts.coordinate_values {
        Some(v) => {
            if v.len() != k {
                return Err(Error::invalid(format!(
                    "coordinate_values has {} entries but coordinate {i} has {k} outcomes",
                    v.len()
                )));
            }
            Some(v.clone())
        }
        None => coord_space.numeric_values().ok(),
    };

    if epistemic {
        // All proper non-empty subset indicators (complete for events of X_i);
        // fall back to singletons when the power set is too big.
        if k <= 12 {
            for mask in 1..(1usize << k) - 1 {
                let values: Vec<f64> = (0..k)
                    .map(|j| if mask >> j & 1 == 1 { 1.0 } else { 0.0 })
                    .collect();
                let members: Vec<&str> = (0..k)
                    .filter(|j| mask >> j & 1 == 1)
                    .map(|j| coord_space.labels()[j].as_str())
                    .collect();
                fns.push(LabelledFunction {
                    label: format!("1{{X{} in {{{}}}}}", i, members.join(",")),
                    values,
                });
            }
        } else {
            for j in 0..k {
                let mut values = vec![0.0; k];
                values[j] = 1.0;
                fns.push(LabelledFunction {
                    label: format!("1{{X{} = {}}}", i, coord_space.labels()[j]),
                    values,
                });
            }
        }
        if let Some(v) = projection {
            fns.push(LabelledFunction {
                label: format!("X{i}"),
                values: v,
            });
        }
        fns.extend(opts.extra_functions.iter().cloned());
    } else {
        let v = projection.ok_or_else(|| {
            Error::invalid(format!(
                "coordinate {i} has non-numeric labels; supply coordinate_values for the weak check"
            ))
        })?;
        fns.push(LabelledFunction {
            label: format!("X{i}"),
            values: v,
        });
    }
    for f in &fns {
        if f.values.len() != k {
            return Err(Error::invalid(format!(
                "test function {:?} has {} values but coordinate {i} has {k} outcomes",
                f.label,
                f.values.len()
            )));
        }
    }
    Ok(fns)
}

fn check_irrelevance(
    joint: &JointCredalSet,
    i: usize,
    policy: ConditioningPolicy,
    opts: &IrrelevanceOptions,
    epistemic: bool,
) -> Result<IrrelevanceReport> {
    let dims = joint.shape().dims();
    if i == 0 || i > dims {
        return Err(Error::invalid(format!(
            "coordinate index {i} out of range (1..={dims})"
        )));
    }
    let fns = coordinate_functions(joint, i, opts, epistemic)?;

    let prefix = joint.shape().prefix_len(i - 1);
    if prefix > 63 {
        return Err(Error::Capacity {
            what: "irrelevance events",
            needed: u128::MAX,
            cap: opts.event_cap,
        });
    }
    let num_events = (1u128 << prefix) - 1;
    if num_events > opts.event_cap {
        return Err(Error::Capacity {
            what: "irrelevance events",
            needed: num_events,
            cap: opts.event_cap,
        });
    }

    let suffix = joint.shape().suffix_len(i - 1);
    let coord_stride = joint.shape().suffix_len(i); // stride of coordinate i-1 (0-based)
    let k_i = joint.shape().factors()[i - 1].len();
    let extremes = joint.set().extremes();
    let ne = extremes.len();

    // Per extreme: prefix-marginal mass, and per function the prefix-
    // aggregated mass-weighted function values, so each event costs O(prefix).
    let mut prefix_mass = vec![vec![0.0f64; prefix]; ne];
    let mut prefix_fval = vec![vec![vec![0.0f64; prefix]; fns.len()]; ne];
    for (e, p) in extremes.iter().enumerate() {
        for (idx, &w) in p.weights().iter().enumerate() {
            let pidx = idx / suffix;
            let coord = (idx / coord_stride) % k_i;
            prefix_mass[e][pidx] += w;
            for (fi, f) in fns.iter().enumerate() {
                prefix_fval[e][fi][pidx] += w * f.values[coord];
            }
        }
    }

    // Unconditional envelopes of each function.
    let uncond: Vec<(f64, f64)> = (0..fns.len())
        .map(|fi| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for fv in &prefix_fval {
                let v: f64 = fv[fi].iter().sum();
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (lo, hi)
        })
        .collect();

    let mut report = IrrelevanceReport {
        coordinate: i,
        policy,
        holds: true,
        events_tested: 0,
        events_skipped_undefined: 0,
        events_skipped_policy: 0,
        functions: fns.iter().map(|f| f.label.clone()).collect(),
        max_gap: 0.0,
        worst: None,
    };

    let mut pa = vec![0.0f64; ne];
    for mask in 1u64..=(num_events as u64) {
        let mut upper: f64 = f64::NEG_INFINITY;
        let mut lower: f64 = f64::INFINITY;
        for e in 0..ne {
            let mut s = 0.0;
            let mut bits = mask;
            while bits != 0 {
                let pidx = bits.trailing_zeros() as usize;
                s += prefix_mass[e][pidx];
                bits &= bits - 1;
            }
            pa[e] = s;
            upper = upper.max(s);
            lower = lower.min(s);
        }
        if upper <= 0.0 {
            report.events_skipped_undefined += 1;
            continue;
        }
        if policy == ConditioningPolicy::StrictPositiveLower && lower <= 0.0 {
            report.events_skipped_policy += 1;
            continue;
        }
        report.events_tested += 1;

        for (fi, f) in fns.iter().enumerate() {
            let mut clo = f64::INFINITY;
            let mut chi = f64::NEG_INFINITY;
            for e in 0..ne {
                if pa[e] > 0.0 {
                    let mut s = 0.0;
                    let mut bits = mask;
                    while bits != 0 {
                        let pidx = bits.trailing_zeros() as usize;
                        s += prefix_fval[e][fi][pidx];
                        bits &= bits - 1;
                    }
                    let v = s / pa[e];
                    clo = clo.min(v);
                    chi = chi.max(v);
                }
            }
            let (ulo, uhi) = uncond[fi];
            let gap = (clo - ulo).abs().max((chi - uhi).abs());
            if gap > report.max_gap {
                report.max_gap = gap;
                report.worst = Some(IrrelevanceViolation {
                    event_prefixes: (0..prefix).filter(|p| mask >> p & 1 == 1).collect(),
                    function: f.label.clone(),
                    conditional_lower: clo,
                    conditional_upper: chi,
                    unconditional_lower: ulo,
                    unconditional_upper: uhi,
                    gap,
                });
            }
        }
    }
    report.holds = report.max_gap <= opts.tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::credal::ProbabilityVector;
    use approx::assert_abs_diff_eq;

    fn binary_set(p1: &[f64; 2], p2: &[f64; 2]) -> CredalSet {
        CredalSet::new(
            OutcomeSpace::binary(),
            vec![
                ProbabilityVector::new(p1.to_vec()).unwrap(),
                ProbabilityVector::new(p2.to_vec()).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn independent_product_is_epistemically_irrelevant() {
        // Oracle: under an independent product, conditioning on any past
        // event leaves each marginal extreme untouched, so the conditional
        // envelope equals the marginal one by direct comparison.
        let m = binary_set(&[0.5, 0.5], &[0.3, 0.7]);
        let joint = JointCredalSet::independent_product(&[m.clone(), m]).unwrap();
        let report = check_epistemic_irrelevance(
            &joint,
            2,
            ConditioningPolicy::RegularExtension,
            &IrrelevanceOptions::default(),
        )
        .unwrap();
        assert!(report.holds, "max gap {}", report.max_gap);
        assert_eq!(report.events_tested, 3); // {0}, {1}, {0,1}
    }

    #[test]
    fn copy_process_fails_with_enumerated_gap() {
        // X2 = X1 under a single fair extreme: P(00) = P(11) = 1/2.
        // Conditioning on {X1 = 0} pins X2 = 0, so the upper probability of
        // {X2 = 1} drops from 1/2 to 0: gap 1/2, found by enumeration.
        let shape = ProductSpace::power(OutcomeSpace::binary(), 2).unwrap();
        let joint =
            JointCredalSet::from_extreme_weights(shape, vec![vec![0.5, 0.0, 0.0, 0.5]]).unwrap();
        let report = check_epistemic_irrelevance(
            &joint,
            2,
            ConditioningPolicy::RegularExtension,
            &IrrelevanceOptions::default(),
        )
        .unwrap();
        assert!(!report.holds);
        assert_abs_diff_eq!(report.max_gap, 0.5, epsilon = 1e-12);
        let worst = report.worst.unwrap();
        assert_eq!(worst.event_prefixes.len(), 1);
    }

    #[test]
    fn weak_check_tests_only_the_projection() {
        let m = binary_set(&[0.5, 0.5], &[0.3, 0.7]);
        let joint = JointCredalSet::independent_product(&[m.clone(), m]).unwrap();
        let report = check_weak_irrelevance(
            &joint,
            2,
            ConditioningPolicy::StrictPositiveLower,
            &IrrelevanceOptions::default(),
        )
        .unwrap();
        assert!(report.holds);
        assert_eq!(report.functions, vec!["X2".to_string()]);
    }

    #[test]
    fn event_cap_is_enforced() {
        let m = binary_set(&[0.5, 0.5], &[0.3, 0.7]);
        let joint =
            JointCredalSet::independent_product(&[m.clone(), m.clone(), m.clone(), m]).unwrap();
        let opts = IrrelevanceOptions {
            event_cap: 10,
            ..Default::default()
        };
        // Coordinate 4 has a prefix of 8 assignments -> 255 candidate events.
        match check_epistemic_irrelevance(&joint, 4, ConditioningPolicy::RegularExtension, &opts) {
            Err(Error::Capacity { .. }) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn coordinate_one_is_vacuously_irrelevant() {
        let m = binary_set(&[0.5, 0.5], &[0.3, 0.7]);
        let joint = JointCredalSet::independent_product(&[m.clone(), m]).unwrap();
        let report = check_epistemic_irrelevance(
            &joint,
            1,
            ConditioningPolicy::RegularExtension,
            &IrrelevanceOptions::default(),
        )
        .unwrap();
        // The only event over an empty prefix is the sure event.
        assert!(report.holds);
        assert_eq!(report.events_tested, 1);
    }

    #[test]
    fn product_space_indexing_round_trips() {
        let shape = ProductSpace::new(vec![
            OutcomeSpace::binary(),
            OutcomeSpace::indexed(3).unwrap(),
            OutcomeSpace::binary(),
        ])
        .unwrap();
        assert_eq!(shape.len(), 12);
        for idx in 0..shape.len() {
            let multi = shape.unindex(idx);
            assert_eq!(shape.index(&multi), idx);
        }
        assert_eq!(shape.prefix_len(2), 6);
        assert_eq!(shape.suffix_len(2), 2);
    }
}
