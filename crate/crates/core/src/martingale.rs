//! Exact martingale-structure checks by trajectory-tree enumeration.
//!
//! For a trajectory `x` with realized conditional means `m`, the centered
//! running sum is `Y_i = sum_{k <= i} (x_k - m_k)`. Whatever the strategy,
//! `Y` is a martingale; these checks verify the defining identities node by
//! node over the whole tree, with no sampling error:
//!
//! * [`check_martingale_exact`]: `E[X_i | history] = m_i` at every node;
//! * [`check_second_moment_identity`]: `E[Y_n^2] = sum_i E[(X_i - m_i)^2]`
//!   (cross terms vanish), and the right side stays within the spec's
//!   moment budget `n (sigma^2 + delta^2)`;
//! * [`check_khr_exact`]: the exact probability that `|Y_j|` stays under a
//!   non-decreasing band dominates the maximal-inequality bound evaluated on
//!   the enumerated per-step second moments.
//!
//! `mean_bias` (fault injection) shifts every reported conditional mean, so
//! a correct checker must flag a deviation of exactly that size; it is the
//! negative control for the first two checks and is ignored by the
//! band-probability check, which has its own dual route (enumeration vs
//! closed-form bound).

use serde::{Deserialize, Serialize};

use crate::bounds::khr_bound;
use crate::error::{Error, Result};
use crate::process::{
    exact_event_probability, walk_tree, EventSpec, ProcessSpec, Strategy, TrajectoryBatch, TreeNode,
};

/// Options for the exact tree checks.
#[derive(Clone, Copy, Debug)]
pub struct TreeCheckOptions {
    /// Largest tolerated identity violation.
    pub tol: f64,
    /// Leaf cap for the enumeration (default [`crate::caps::default_leaf_cap`]).
    pub leaf_cap: Option<u128>,
    /// Added to every realized conditional mean before checking — a fault
    /// injection for negative controls. `0.0` checks the true process.
    pub mean_bias: f64,
}

impl Default for TreeCheckOptions {
    fn default() -> Self {
        TreeCheckOptions {
            tol: 1e-10,
            leaf_cap: None,
            mean_bias: 0.0,
        }
    }
}

/// Outcome of [`check_martingale_exact`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MartingaleReport {
    /// Internal nodes enumerated.
    pub nodes: u64,
    /// Largest `|E[X_i | history] - m_i|` over all nodes.
    pub max_deviation: f64,
    pub passed: bool,
}

/// Verify `E[X_i | history] = m_i` at every reachable node.
///
/// The node expectation is recomputed from the resolved distribution in
/// reverse summation order, so it does not merely echo the engine's cached
/// mean.
pub fn check_martingale_exact(
    spec: &ProcessSpec,
    strategy: &dyn Strategy,
    opts: &TreeCheckOptions,
) -> Result<MartingaleReport> {
    let mut nodes = 0u64;
    let mut max_deviation = 0.0f64;
    walk_tree(spec, strategy, opts.mean_bias, opts.leaf_cap, &mut |node| {
        if let TreeNode::Internal { dist, mean, .. } = node {
            nodes += 1;
            let e: f64 = dist
                .values()
                .iter()
                .zip(dist.probs())
                .rev()
                .map(|(v, p)| v * p)
                .sum();
            let dev = (e - mean).abs();
            if dev > max_deviation {
                max_deviation = dev;
            }
        }
        Ok(())
    })?;
    Ok(MartingaleReport {
        nodes,
        max_deviation,
        passed: max_deviation <= opts.tol,
    })
}

/// Outcome of [`check_second_moment_identity`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SecondMomentReport {
    /// `E[Y_n^2]`, enumerated over leaves.
    pub e_y_sq: f64,
    /// `E[(X_i - m_i)^2]` per step, enumerated over internal nodes.
    pub step_moments: Vec<f64>,
    /// `|E[Y_n^2] - sum_i E[(X_i - m_i)^2]|`.
    pub gap: f64,
    /// The spec's envelope `n (sigma^2 + delta^2)`.
    pub budget: f64,
    pub within_budget: bool,
    pub passed: bool,
}

/// Verify the orthogonal-increments identity
/// `E[Y_n^2] = sum_i E[(X_i - m_i)^2]` and the moment budget.
pub fn check_second_moment_identity(
    spec: &ProcessSpec,
    strategy: &dyn Strategy,
    opts: &TreeCheckOptions,
) -> Result<SecondMomentReport> {
    let n = spec.horizon();
    let mut step_moments = vec![0.0f64; n];
    let mut e_y_sq = 0.0f64;
    walk_tree(spec, strategy, opts.mean_bias, opts.leaf_cap, &mut |node| {
        match node {
            TreeNode::Internal {
                step,
                reach,
                dist,
                mean,
                ..
            } => {
                let m2: f64 = dist
                    .values()
                    .iter()
                    .zip(dist.probs())
                    .map(|(v, p)| (v - mean) * (v - mean) * p)
                    .sum();
                step_moments[step] += reach * m2;
            }
            TreeNode::Leaf {
                reach,
                history,
                means,
            } => {
                let y: f64 = history.iter().zip(means).map(|(x, m)| x - m).sum();
                e_y_sq += reach * y * y;
            }
        }
        Ok(())
    })?;
    let step_sum: f64 = step_moments.iter().sum();
    let gap = (e_y_sq - step_sum).abs();
    let ms = spec.moment_spec();
    let budget = n as f64 * (ms.sigma2 + ms.delta * ms.delta);
    // The bias is a deliberate fault: it inflates each step moment by
    // bias^2, which the budget does not owe us.
    let within_budget = step_sum <= budget + opts.tol + opts.mean_bias * opts.mean_bias * n as f64;
    Ok(SecondMomentReport {
        e_y_sq,
        step_moments,
        gap,
        budget,
        within_budget,
        passed: gap <= opts.tol && within_budget,
    })
}

/// Outcome of [`check_khr_exact`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KhrReport {
    /// Exact `P(|Y_j| < epsilons[j] for all j)` by enumeration.
    pub exact: f64,
    /// The maximal-inequality bound on the enumerated step moments.
    pub bound: f64,
    /// Enumerated `E[(X_i - m_i)^2]` per step.
    pub step_moments: Vec<f64>,
    pub passed: bool,
}

/// Dual-route check of the maximal inequality: exact band probability vs
/// the closed-form bound fed with the enumerated step moments. `mean_bias`
/// is ignored here — both routes must describe the same (true) process.
pub fn check_khr_exact(
    spec: &ProcessSpec,
    strategy: &dyn Strategy,
    epsilons: &[f64],
    opts: &TreeCheckOptions,
) -> Result<KhrReport> {
    if epsilons.len() != spec.horizon() {
        return Err(Error::invalid(format!(
            "{} band levels for a horizon of {}",
            epsilons.len(),
            spec.horizon()
        )));
    }
    let mut step_moments = vec![0.0f64; spec.horizon()];
    walk_tree(spec, strategy, 0.0, opts.leaf_cap, &mut |node| {
        if let TreeNode::Internal {
            step,
            reach,
            dist,
            mean,
            ..
        } = node
        {
            let m2: f64 = dist
                .values()
                .iter()
                .zip(dist.probs())
                .map(|(v, p)| (v - mean) * (v - mean) * p)
                .sum();
            step_moments[step] += reach * m2;
        }
        Ok(())
    })?;
    let bound = khr_bound(&step_moments, epsilons)?;
    let exact = exact_event_probability(
        spec,
        strategy,
        &EventSpec::MaxBand {
            epsilons: epsilons.to_vec(),
        },
        opts.leaf_cap,
    )?;
    Ok(KhrReport {
        exact,
        bound,
        step_moments,
        passed: exact >= bound - opts.tol,
    })
}

/// Exact probability that the running-mean band of width `epsilon` holds at
/// every step of `[start, start + len]` (1-based).
pub fn window_coverage_exact(
    spec: &ProcessSpec,
    strategy: &dyn Strategy,
    start: u64,
    len: u64,
    epsilon: f64,
    leaf_cap: Option<u128>,
) -> Result<f64> {
    exact_event_probability(
        spec,
        strategy,
        &EventSpec::WindowBand {
            start,
            len,
            epsilon,
        },
        leaf_cap,
    )
}

/// Centered running sums `Y` for each sampled trajectory.
pub fn build_y(batch: &TrajectoryBatch) -> Vec<Vec<f64>> {
    (0..batch.trials())
        .map(|t| {
            let mut y = Vec::with_capacity(batch.horizon());
            let mut acc = 0.0;
            for (x, m) in batch.xs(t).iter().zip(batch.ms(t)) {
                acc += x - m;
                y.push(acc);
            }
            y
        })
        .collect()
}
