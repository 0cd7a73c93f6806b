//! Credal sets over finite outcome spaces.
//!
//! A credal set is stored by its extreme points: probability vectors over a
//! shared, ordered outcome space. Lower and upper expectations are exact
//! minima/maxima of the linear expectation over the extremes; conditioning
//! Bayes-updates every extreme that gives the event positive probability.
//! The irrelevance checkers live in [`crate::irrelevance`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Tolerance for "these weights sum to one".
pub const PROB_SUM_TOL: f64 = 1e-12;

/// An ordered, finite set of outcome labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct OutcomeSpace {
    labels: Vec<String>,
}

impl OutcomeSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid(
                "outcome space must have at least one outcome",
            ));
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::invalid(format!("duplicate outcome label {l:?}")));
            }
        }
        Ok(OutcomeSpace { labels })
    }

    /// The binary space with labels `"0"`, `"1"`.
    pub fn binary() -> Self {
        OutcomeSpace {
            labels: vec!["0".into(), "1".into()],
        }
    }

    /// Labels `"0"`, `"1"`, ..., `"k-1"`.
    pub fn indexed(k: usize) -> Result<Self> {
        OutcomeSpace::new((0..k).map(|j| j.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Parse every label as a real number, for spaces whose labels are the
    /// outcome values themselves.
    pub fn numeric_values(&self) -> Result<Vec<f64>> {
        self.labels
            .iter()
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("label {l:?} is not numeric")))
            })
            .collect()
    }
}

impl TryFrom<Vec<String>> for OutcomeSpace {
    type Error = Error;
    fn try_from(labels: Vec<String>) -> Result<Self> {
        OutcomeSpace::new(labels)
    }
}

impl From<OutcomeSpace> for Vec<String> {
    fn from(s: OutcomeSpace) -> Vec<String> {
        s.labels
    }
}

/// A probability vector: non-negative weights summing to one within
/// [`PROB_SUM_TOL`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("probability vector must be non-empty"));
        }
        let mut sum = 0.0;
        for (j, w) in weights.iter().enumerate() {
            ensure_finite(&format!("weight[{j}]"), *w)?;
            if *w < 0.0 {
                return Err(Error::invalid(format!("weight[{j}] = {w} is negative")));
            }
            sum += *w;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::invalid(format!(
                "weights sum to {sum}, not 1 (tolerance {PROB_SUM_TOL})"
            )));
        }
        Ok(ProbabilityVector { weights })
    }

    pub fn point_mass(k: usize, j: usize) -> Result<Self> {
        if j >= k {
            return Err(Error::invalid(format!(
                "point mass index {j} out of range for {k} outcomes"
            )));
        }
        let mut w = vec![0.0; k];
        w[j] = 1.0;
        Ok(ProbabilityVector { weights: w })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The linear expectation `sum_j w_j f_j`.
    pub fn dot(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Probability assigned to an event (a mask over outcomes).
    pub fn event_probability(&self, event: &Event) -> f64 {
        event.indices().map(|j| self.weights[j]).sum()
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        ProbabilityVector::new(w)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Vec<f64> {
        p.weights
    }
}

/// A real-valued function on an outcome space, given pointwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BoundedFunction {
    values: Vec<f64>,
}

impl BoundedFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("bounded function must be non-empty"));
        }
        for (j, v) in values.iter().enumerate() {
            ensure_finite(&format!("value[{j}]"), *v)?;
        }
        Ok(BoundedFunction { values })
    }

    pub fn indicator(event: &Event) -> Self {
        BoundedFunction {
            values: (0..event.space_len())
                .map(|j| if event.contains(j) { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn negated(&self) -> Self {
        BoundedFunction {
            values: self.values.iter().map(|v| -v).collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for BoundedFunction {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        BoundedFunction::new(v)
    }
}

impl From<BoundedFunction> for Vec<f64> {
    fn from(f: BoundedFunction) -> Vec<f64> {
        f.values
    }
}

/// A subset of an outcome space, stored as a membership mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    mask: Vec<bool>,
}

impl Event {
    /// Event from outcome indices; indices out of range are an input error.
    pub fn from_indices(
        space_len: usize,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut mask = vec![false; space_len];
        for j in indices {
            if j >= space_len {
                return Err(Error::invalid(format!(
                    "event index {j} out of range for {space_len} outcomes"
                )));
            }
            mask[j] = true;
        }
        Ok(Event { mask })
    }

    /// Event from outcome labels; unknown labels are an input error.
    pub fn from_labels<S: AsRef<str>>(space: &OutcomeSpace, labels: &[S]) -> Result<Self> {
        let mut idx = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            idx.push(
                space
                    .index_of(l)
                    .ok_or_else(|| Error::invalid(format!("unknown outcome label {l:?}")))?,
            );
        }
        Event::from_indices(space.len(), idx)
    }

    pub fn space_len(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.mask[j]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(j, &m)| m.then_some(j))
    }

    pub fn cardinality(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality() == 0
    }

    pub fn complement(&self) -> Self {
        Event {
            mask: self.mask.iter().map(|m| !m).collect(),
        }
    }
}

/// How to condition a credal set on an event.
///
/// Both policies refuse events with upper probability zero (conditioning is
/// undefined there). They differ on events that only *some* extremes can see:
/// regular extension Bayes-updates the extremes with positive probability and
/// drops the rest; the strict policy refuses unless the lower probability is
/// positive, i.e. unless every extreme can be updated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConditioningPolicy {
    RegularExtension,
    StrictPositiveLower,
}

/// Raw serde image of [`CredalSet`]: `{"space": [...], "extremes": [[...]]}`.
#[derive(Clone, Serialize, Deserialize)]
pub struct CredalSetRaw {
    pub space: Vec<String>,
    pub extremes: Vec<Vec<f64>>,
}

/// A credal set given by its extreme points over a finite outcome space.
///
/// Duplicate extremes are permitted (they do not change any envelope) but are
/// reported by [`CredalSet::canonicalize`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CredalSetRaw", into = "CredalSetRaw")]
pub struct CredalSet {
    space: OutcomeSpace,
    extremes: Vec<ProbabilityVector>,
}

impl CredalSet {
    pub fn new(space: OutcomeSpace, extremes: Vec<ProbabilityVector>) -> Result<Self> {
        if extremes.is_empty() {
            return Err(Error::invalid(
                "credal set needs at least one extreme point",
            ));
        }
        for (e, p) in extremes.iter().enumerate() {
            if p.len() != space.len() {
                return Err(Error::invalid(format!(
                    "extreme {e} has {} weights but the space has {} outcomes",
                    p.len(),
                    space.len()
                )));
            }
        }
        Ok(CredalSet { space, extremes })
    }

    /// The vacuous credal set on `space`: all point masses, i.e. every
    /// distribution is allowed.
    pub fn vacuous(space: OutcomeSpace) -> Result<Self> {
        let k = space.len();
        let extremes = (0..k)
            .map(|j| ProbabilityVector::point_mass(k, j))
            .collect::<Result<Vec<_>>>()?;
        CredalSet::new(space, extremes)
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn extremes(&self) -> &[ProbabilityVector] {
        &self.extremes
    }

    pub fn num_extremes(&self) -> usize {
        self.extremes.len()
    }

    fn check_function(&self, f: &BoundedFunction) -> Result<()> {
        if f.len() != self.space.len() {
            return Err(Error::invalid(format!(
                "function has {} values but the space has {} outcomes",
                f.len(),
                self.space.len()
            )));
        }
        Ok(())
    }

    fn check_event(&self, a: &Event) -> Result<()> {
        if a.space_len() != self.space.len() {
            return Err(Error::invalid(format!(
                "event is over {} outcomes but the space has {}",
                a.space_len(),
                self.space.len()
            )));
        }
        Ok(())
    }

    /// `min` over extremes of the linear expectation of `f`.
    pub fn lower_expectation(&self, f: &BoundedFunction) -> Result<f64> {
        self.check_function(f)?;
        Ok(self
            .extremes
            .iter()
            .map(|p| p.dot(f.values()))
            .fold(f64::INFINITY, f64::min))
    }

    /// `max` over extremes of the linear expectation of `f`.
    pub fn upper_expectation(&self, f: &BoundedFunction) -> Result<f64> {
        self.check_function(f)?;
        Ok(self
            .extremes
            .iter()
            .map(|p| p.dot(f.values()))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn lower_probability(&self, a: &Event) -> Result<f64> {
        self.check_event(a)?;
        Ok(self
            .extremes
            .iter()
            .map(|p| p.event_probability(a))
            .fold(f64::INFINITY, f64::min))
    }

    pub fn upper_probability(&self, a: &Event) -> Result<f64> {
        self.check_event(a)?;
        Ok(self
            .extremes
            .iter()
            .map(|p| p.event_probability(a))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Condition on `a`. The result lives on the sub-space of `a`'s outcomes
    /// (labels and order preserved); its extremes are the Bayes updates of
    /// every extreme that gives `a` positive probability.
    pub fn condition(&self, a: &Event, policy: ConditioningPolicy) -> Result<CredalSet> {
        self.check_event(a)?;
        let probs: Vec<f64> = self
            .extremes
            .iter()
            .map(|p| p.event_probability(a))
            .collect();
        let upper = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lower = probs.iter().cloned().fold(f64::INFINITY, f64::min);
        if upper <= 0.0 {
            return Err(Error::UndefinedConditioning);
        }
        if policy == ConditioningPolicy::StrictPositiveLower && lower <= 0.0 {
            return Err(Error::PolicyViolation);
        }
        let idx: Vec<usize> = a.indices().collect();
        let labels = idx
            .iter()
            .map(|&j| self.space.labels()[j].clone())
            .collect();
        let sub_space = OutcomeSpace::new(labels)?;
        let mut extremes = Vec::new();
        for (p, &pa) in self.extremes.iter().zip(&probs) {
            if pa > 0.0 {
                let w: Vec<f64> = idx.iter().map(|&j| p.weights()[j] / pa).collect();
                extremes.push(ProbabilityVector::new(w)?);
            }
        }
        CredalSet::new(sub_space, extremes)
    }

    /// Drop duplicate extremes (pointwise within `tol`); returns the reduced
    /// set and how many duplicates were removed.
    pub fn canonicalize(&self, tol: f64) -> (CredalSet, usize) {
        let mut kept: Vec<ProbabilityVector> = Vec::new();
        for p in &self.extremes {
            let dup = kept.iter().any(|q| {
                p.weights()
                    .iter()
                    .zip(q.weights())
                    .all(|(a, b)| (a - b).abs() <= tol)
            });
            if !dup {
                kept.push(p.clone());
            }
        }
        let removed = self.extremes.len() - kept.len();
        (
            CredalSet {
                space: self.space.clone(),
                extremes: kept,
            },
            removed,
        )
    }

    /// If `target` is a convex combination of the extremes (within `tol`),
    /// return one witnessing weight vector over the extremes.
    pub fn membership_weights(&self, target: &[f64], tol: f64) -> Result<Option<Vec<f64>>> {
        if target.len() != self.space.len() {
            return Err(Error::invalid(format!(
                "target has {} weights but the space has {} outcomes",
                target.len(),
                self.space.len()
            )));
        }
        let points: Vec<&[f64]> = self.extremes.iter().map(|p| p.weights()).collect();
        Ok(convex_combination_weights(&points, target, tol))
    }
}

impl TryFrom<CredalSetRaw> for CredalSet {
    type Error = Error;
    fn try_from(raw: CredalSetRaw) -> Result<Self> {
        let space = OutcomeSpace::new(raw.space)?;
        let extremes = raw
            .extremes
            .into_iter()
            .map(ProbabilityVector::new)
            .collect::<Result<Vec<_>>>()?;
        CredalSet::new(space, extremes)
    }
}

impl From<CredalSet> for CredalSetRaw {
    fn from(set: CredalSet) -> CredalSetRaw {
        CredalSetRaw {
            space: set.space.labels().to_vec(),
            extremes: set.extremes.iter().map(|p| p.weights().to_vec()).collect(),
        }
    }
}

/// Solve the convex-hull membership problem `sum_j w_j points_j = target`,
/// `w_j >= 0`, `sum_j w_j = 1` with a phase-I simplex. Returns a witnessing
/// weight vector, or `None` when the target is outside the hull (residual
/// above `tol`).
pub fn convex_combination_weights(points: &[&[f64]], target: &[f64], tol: f64) -> Option<Vec<f64>> {
    let m = points.len();
    if m == 0 {
        return None;
    }
    let dim = target.len();
    let rows = dim + 1; // coordinates + the sum-to-one constraint
    let cols = m + rows; // weights + one artificial per row

    // Tableau rows: [A | I | rhs] with rhs = (target, 1) >= 0 required for the
    // artificial start; coordinates of probability vectors are >= 0, but a
    // generic caller may pass negatives, so flip rows as needed.
    let mut t = vec![vec![0.0f64; cols + 1]; rows];
    for r in 0..rows {
        for j in 0..m {
            let a = if r < dim { points[j][r] } else { 1.0 };
            t[r][j] = a;
        }
        t[r][m + r] = 1.0;
        t[r][cols] = if r < dim { target[r] } else { 1.0 };
        if t[r][cols] < 0.0 {
            for v in &mut t[r][..m] {
                *v = -*v;
            }
            t[r][cols] = -t[r][cols];
        }
    }

    // Phase-I objective: minimize the sum of artificials. With the artificial
    // basis, the reduced-cost row is minus the sum of the constraint rows on
    // the structural columns.
    let mut basis: Vec<usize> = (m..cols).collect();
    let mut obj = vec![0.0f64; cols + 1];
    for j in 0..=cols {
        let s: f64 = (0..rows).map(|r| t[r][j]).sum();
        obj[j] = -s;
    }
    for r in 0..rows {
        obj[m + r] = 0.0;
    }

    let eps = 1e-11;
    for _ in 0..10_000 {
        // Bland's rule: smallest-index entering column with negative reduced cost.
        let enter = (0..cols).find(|&j| obj[j] < -eps);
        let Some(enter) = enter else { break };
        // Ratio test, Bland tie-break on basis index.
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..rows {
            if t[r][enter] > eps {
                let ratio = t[r][cols] / t[r][enter];
                if ratio < best - eps
                    || (ratio < best + eps && leave.is_none_or(|l| basis[r] < basis[l]))
                {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(leave) = leave else {
            return None; // unbounded phase-I cannot happen; treat as infeasible
        };
        // Pivot.
        let piv = t[leave][enter];
        for v in &mut t[leave] {
            *v /= piv;
        }
        let pivot_row = t[leave].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r != leave && row[enter].abs() > 0.0 {
                let f = row[enter];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = obj[enter];
        if f.abs() > 0.0 {
            for (o, pv) in obj.iter_mut().zip(&pivot_row) {
                *o -= f * pv;
            }
        }
        basis[leave] = enter;
    }

    // Optimal phase-I value = sum of artificial variables still in play.
    let residual: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= m)
        .map(|(r, _)| t[r][cols])
        .sum();
    if residual.abs() > tol {
        return None;
    }
    let mut w = vec![0.0f64; m];
    for (r, &b) in basis.iter().enumerate() {
        if b < m {
            w[b] = t[r][cols].max(0.0);
        }
    }
    // Tidy: renormalize the inevitable last-bit drift.
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        for x in &mut w {
            *x /= s;
        }
    }
    Some(w)
}
