//! Built-in strategies.
//!
//! Names accepted by [`parse_strategy`]:
//!
//! | name | steps | play |
//! |------|-------|------|
//! | `EXTREME_CONST(j)` | credal | extreme `j` at every step |
//! | `GREEDY_UP` / `GREEDY_DOWN` | any | per-step max / min conditional mean, spread maximal on moment steps |
//! | `SIGN_SWITCH` | any | push the sum up while it sits below the upper-mean track, down otherwise |
//! | `IID_MIX` / `IID_MIX(w0,...)` | credal | the uniform (or given) mixture of extremes, every step |
//! | `TWO_POINT` / `TWO_POINT_UP` / `TWO_POINT_DOWN` | moment | symmetric two-point spread at full variance, mean at band mid / top / bottom |
//! | `GAUSS` / `GAUSS_UP` / `GAUSS_DOWN` | moment | 32-atom Gaussian quantile grid under the variance cap |
//! | `HASH_MIX(salt)` | any | deterministic pseudo-random history-dependent choices |
//!
//! Every strategy is deterministic given the history, so trajectories are a
//! pure function of `(seed, trial)`.

use statrs::distribution::{ContinuousCDF, Normal};

use super::{
    ChooseCtx, FiniteDist, MomentStep, MomentSupport, ProcessSpec, StepChoice, StepConstraint,
    Strategy,
};
use crate::error::{Error, Result};
use crate::rng;

/// Mean targets inside a step's mean band.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tilt {
    Down,
    Mid,
    Up,
}

impl Tilt {
    fn pick(self, lo: f64, hi: f64) -> f64 {
        match self {
            Tilt::Down => lo,
            Tilt::Mid => (lo + hi) / 2.0,
            Tilt::Up => hi,
        }
    }
}

fn credal_extreme_by_mean(step: &super::CredalStep, up: bool) -> usize {
    let mut best = 0usize;
    let mut best_mean = step.extreme_mean(0);
    for j in 1..step.num_extremes() {
        let m = step.extreme_mean(j);
        if (up && m > best_mean) || (!up && m < best_mean) {
            best = j;
            best_mean = m;
        }
    }
    best
}

/// The maximal symmetric spread a two-point distribution may use at this
/// moment step.
fn max_spread(m: &MomentStep) -> f64 {
    let mut s = m.variance_cap.sqrt();
    if let Some(b) = m.range_bound {
        s = s.min(b / 2.0);
    }
    s
}

fn two_point(m: &MomentStep, tilt: Tilt) -> Result<StepChoice> {
    if !matches!(m.support, MomentSupport::Unrestricted) {
        return Err(Error::invalid(
            "two-point strategies need an unrestricted-support moment step",
        ));
    }
    let mean = tilt.pick(m.mean_lower, m.mean_upper);
    let s = max_spread(m);
    Ok(StepChoice::Dist(FiniteDist::new(
        vec![mean - s, mean + s],
        vec![0.5, 0.5],
    )?))
}

/// Strategy playing one fixed credal extreme at every step.
pub struct ExtremeConst {
    name: String,
    index: usize,
}

impl ExtremeConst {
    pub fn new(index: usize) -> Self {
        ExtremeConst {
            name: format!("EXTREME_CONST({index})"),
            index,
        }
    }
}

impl Strategy for ExtremeConst {
    fn name(&self) -> &str {
        &self.name
    }

    fn history_dependent(&self) -> bool {
        false
    }

    fn choose(&self, _ctx: &ChooseCtx) -> Result<StepChoice> {
        Ok(StepChoice::Extreme(self.index))
    }
}

/// Per-step extreme of maximal (`up`) or minimal mean; on moment steps the
/// matching band edge with maximal spread.
pub struct Greedy {
    name: &'static str,
    up: bool,
}

impl Greedy {
    pub fn up() -> Self {
        Greedy {
            name: "GREEDY_UP",
            up: true,
        }
    }

    pub fn down() -> Self {
        Greedy {
            name: "GREEDY_DOWN",
            up: false,
        }
    }
}

impl Strategy for Greedy {
    fn name(&self) -> &str {
        self.name
    }

    fn history_dependent(&self) -> bool {
        false
    }

    fn choose(&self, ctx: &ChooseCtx) -> Result<StepChoice> {
        match &ctx.spec.steps()[ctx.step] {
            StepConstraint::Credal(c) => {
                Ok(StepChoice::Extreme(credal_extreme_by_mean(c, self.up)))
            }
            StepConstraint::Moment(m) => two_point(m, if self.up { Tilt::Up } else { Tilt::Down }),
        }
    }
}

/// Oscillating adversary: while the running sum sits below the cumulated
/// upper-mean track it pushes up, otherwise down. Keeps trajectories inside
/// the mean corridor while maximizing local swing.
pub struct SignSwitch;

impl Strategy for SignSwitch {
    fn name(&self) -> &str {
        "SIGN_SWITCH"
    }

    fn choose(&self, ctx: &ChooseCtx) -> Result<StepChoice> {
        let up = ctx.sum < ctx.cum_upper[ctx.step];
        match &ctx.spec.steps()[ctx.step] {
            StepConstraint::Credal(c) => Ok(StepChoice::Extreme(credal_extreme_by_mean(c, up))),
            StepConstraint::Moment(m) => two_point(m, if up { Tilt::Up } else { Tilt::Down }),
        }
    }
}

/// The same mixture of extremes at every step: the process is an iid product
/// of one credal member.
pub struct IidMix {
    name: String,
    weights: Option<Vec<f64>>,
}

impl IidMix {
    pub fn uniform() -> Self {
        IidMix {
            name: "IID_MIX".into(),
            weights: None,
        }
    }

    pub fn with_weights(weights: Vec<f64>) -> Self {
        IidMix {
            name: format!(
                "IID_MIX({})",
                weights
                    .iter()
                    .map(|w| w.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            weights: Some(weights),
        }
    }
}

impl Strategy for IidMix {
    fn name(&self) -> &str {
        &self.name
    }

    fn history_dependent(&self) -> bool {
        false
    }

    fn choose(&self, ctx: &ChooseCtx) -> Result<StepChoice> {
        let StepConstraint::Credal(c) = &ctx.spec.steps()[ctx.step] else {
            return Err(Error::invalid("IID_MIX needs credal steps"));
        };
        match &self.weights {
            Some(w) => Ok(StepChoice::Mixture(w.clone())),
            None => Ok(StepChoice::Mixture(vec![
                1.0 / c.num_extremes() as f64;
                c.num_extremes()
            ])),
        }
    }
}

/// Two-point moment strategy at a fixed band position.
pub struct TwoPoint {
    name: &'static str,
    tilt: Tilt,
}

impl TwoPoint {
    pub fn mid() -> Self {
        TwoPoint {
            name: "TWO_POINT",
            tilt: Tilt::Mid,
        }
    }

    pub fn up() -> Self {
        TwoPoint {
            name: "TWO_POINT_UP",
            tilt: Tilt::Up,
        }
    }

    pub fn down() -> Self {
        TwoPoint {
            name: "TWO_POINT_DOWN",
            tilt: Tilt::Down,
        }
    }
}

impl Strategy for TwoPoint {
    fn name(&self) -> &str {
        self.name
    }

    fn history_dependent(&self) -> bool {
        false
    }

    fn choose(&self, ctx: &ChooseCtx) -> Result<StepChoice> {
        let StepConstraint::Moment(m) = &ctx.spec.steps()[ctx.step] else {
            return Err(Error::invalid("TWO_POINT needs moment steps"));
        };
        two_point(m, self.tilt)
    }
}

/// Discretized centered Gaussian under the variance cap: 32 equal-weight
/// atoms at quantile midpoints. The grid is mirrored exactly, so the mean
/// hits the target to float precision, and quantile-midpoint discretization
/// only shrinks the variance.
pub struct GaussGrid {
    name: &'static str,
    tilt: Tilt,
}

const GAUSS_ATOMS: usize = 32;

impl GaussGrid {
    pub fn mid() -> Self {
        GaussGrid {
            name: "GAUSS",
            tilt: Tilt::Mid,
        }
    }

    pub fn up() -> Self {
        GaussGrid {
            name: "GAUSS_UP",
            tilt: Tilt::Up,
        }
    }

    pub fn down() -> Self {
        GaussGrid {
            name: "GAUSS_DOWN",
            tilt: Tilt::Down,
        }
    }
}

impl Strategy for GaussGrid {
    fn name(&self) -> &str {
        self.name
    }

    fn history_dependent(&self) -> bool {
        false
    }

    fn choose(&self, ctx: &ChooseCtx) -> Result<StepChoice> {
        let StepConstraint::Moment(m) = &ctx.spec.steps()[ctx.step] else {
            return Err(Error::invalid("GAUSS needs moment steps"));
        };
        if !matches!(m.support, MomentSupport::Unrestricted) {
            return Err(Error::invalid(
                "GAUSS needs an unrestricted-support moment step",
            ));
        }
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let k = GAUSS_ATOMS;
        let mut z = vec![0.0f64; k];
        for i in 0..k / 2 {
            let q = (i as f64 + 0.5) / k as f64;
            let zi = normal.inverse_cdf(q);
            z[i] = zi;
            z[k - 1 - i] = -zi;
        }
        let z_max = z[k - 1];
        let mut sigma = m.variance_cap.sqrt();
        if let Some(b) = m.range_bound {
            sigma = sigma.min(b / (2.0 * z_max));
        }
        let mean = self.tilt.pick(m.mean_lower, m.mean_upper);
        let values: Vec<f64> = z.iter().map(|zi| mean + sigma * zi).collect();
        let probs = vec![1.0 / k as f64; k];
        Ok(StepChoice::Dist(FiniteDist::new(values, probs)?))
    }
}

/// Deterministic pseudo-random history-dependent strategy, for adversarial
/// sweeps: the choice at each node is a hash of `(salt, step, history)`.
pub struct HashMix {
    name: String,
    salt: u64,
}

impl HashMix {
    pub fn new(salt: u64) -> Self {
        HashMix {
            name: format!("HASH_MIX({salt})"),
            salt,
        }
    }
}

impl Strategy for HashMix {
    fn name(&self) -> &str {
        &self.name
    }

    fn choose(&self, ctx: &ChooseCtx) -> Result<StepChoice> {
        let mut acc = self.salt;
        for &x in ctx.history {
            acc = rng::draw_u64(acc, 0, x.to_bits());
        }
        match &ctx.spec.steps()[ctx.step] {
            StepConstraint::Credal(c) => {
                let m = c.num_extremes();
                let mut w: Vec<f64> = (0..m)
                    .map(|e| 0.001 + rng::draw_unit(acc, ctx.step as u64, e as u64))
                    .collect();
                let sum: f64 = w.iter().sum();
                for wi in &mut w {
                    *wi /= sum;
                }
                Ok(StepChoice::Mixture(w))
            }
            StepConstraint::Moment(m) => {
                if !matches!(m.support, MomentSupport::Unrestricted) {
                    return Err(Error::invalid(
                        "HASH_MIX needs credal or unrestricted-support moment steps",
                    ));
                }
                let u1 = rng::draw_unit(acc, ctx.step as u64, 0);
                let u2 = rng::draw_unit(acc, ctx.step as u64, 1);
                let mean = m.mean_lower + u1 * (m.mean_upper - m.mean_lower);
                let s = u2.sqrt() * max_spread(m);
                Ok(StepChoice::Dist(FiniteDist::new(
                    vec![mean - s, mean + s],
                    vec![0.5, 0.5],
                )?))
            }
        }
    }
}

/// Names understood by [`parse_strategy`], for help text.
pub fn strategy_names() -> Vec<&'static str> {
    vec![
        "EXTREME_CONST(j)",
        "GREEDY_UP",
        "GREEDY_DOWN",
        "SIGN_SWITCH",
        "IID_MIX",
        "IID_MIX(w0,w1,...)",
        "TWO_POINT",
        "TWO_POINT_UP",
        "TWO_POINT_DOWN",
        "GAUSS",
        "GAUSS_UP",
        "GAUSS_DOWN",
        "HASH_MIX(salt)",
    ]
}

fn parse_args(name: &str) -> Option<(&str, Vec<&str>)> {
    let open = name.find('(')?;
    let close = name.strip_suffix(')')?;
    let head = &close[..open];
    let args = close[open + 1..].split(',').map(str::trim).collect();
    Some((head, args))
}

/// Resolve a strategy name (see the module table) to a strategy.
pub fn parse_strategy(name: &str) -> Result<Box<dyn Strategy>> {
    let name = name.trim();
    match name {
        "GREEDY_UP" => return Ok(Box::new(Greedy::up())),
        "GREEDY_DOWN" => return Ok(Box::new(Greedy::down())),
        "SIGN_SWITCH" => return Ok(Box::new(SignSwitch)),
        "IID_MIX" => return Ok(Box::new(IidMix::uniform())),
        "TWO_POINT" => return Ok(Box::new(TwoPoint::mid())),
        "TWO_POINT_UP" => return Ok(Box::new(TwoPoint::up())),
        "TWO_POINT_DOWN" => return Ok(Box::new(TwoPoint::down())),
        "GAUSS" => return Ok(Box::new(GaussGrid::mid())),
        "GAUSS_UP" => return Ok(Box::new(GaussGrid::up())),
        "GAUSS_DOWN" => return Ok(Box::new(GaussGrid::down())),
        "HASH_MIX" => return Ok(Box::new(HashMix::new(0))),
        _ => {}
    }
    if let Some((head, args)) = parse_args(name) {
        match head {
            "EXTREME_CONST" if args.len() == 1 => {
                let j: usize = args[0]
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad extreme index {:?}", args[0])))?;
                return Ok(Box::new(ExtremeConst::new(j)));
            }
            "HASH_MIX" if args.len() == 1 => {
                let salt: u64 = args[0]
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad salt {:?}", args[0])))?;
                return Ok(Box::new(HashMix::new(salt)));
            }
            "IID_MIX" => {
                let w: Vec<f64> = args
                    .iter()
                    .map(|a| {
                        a.parse::<f64>()
                            .map_err(|_| Error::invalid(format!("bad mixture weight {a:?}")))
                    })
                    .collect::<Result<_>>()?;
                return Ok(Box::new(IidMix::with_weights(w)));
            }
            _ => {}
        }
    }
    Err(Error::invalid(format!(
        "unknown strategy {name:?}; available: {}",
        strategy_names().join(", ")
    )))
}

/// A default adversarial panel fitting the spec's step kinds.
pub fn builtin_strategies(spec: &ProcessSpec) -> Vec<Box<dyn Strategy>> {
    let mut out: Vec<Box<dyn Strategy>> = vec![
        Box::new(Greedy::up()),
        Box::new(Greedy::down()),
        Box::new(SignSwitch),
    ];
    let credal_extremes = spec
        .steps()
        .iter()
        .filter_map(|s| match s {
            StepConstraint::Credal(c) => Some(c.num_extremes()),
            StepConstraint::Moment(_) => None,
        })
        .min();
    if spec.is_all_credal() {
        if let Some(m) = credal_extremes {
            for j in 0..m.min(4) {
                out.push(Box::new(ExtremeConst::new(j)));
            }
        }
        out.push(Box::new(IidMix::uniform()));
    }
    if spec
        .steps()
        .iter()
        .any(|s| matches!(s, StepConstraint::Moment(_)))
    {
        out.push(Box::new(TwoPoint::up()));
        out.push(Box::new(TwoPoint::down()));
        out.push(Box::new(TwoPoint::mid()));
        out.push(Box::new(GaussGrid::mid()));
    }
    out
}
