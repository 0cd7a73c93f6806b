//! Command-line interface.
//!
//! Five subcommands cover the library's workflow:
//!
//! * `bound` — evaluate one formula on explicit inputs;
//! * `simulate` — sample trajectories of adversarial strategies as CSV;
//! * `verify` — run the full bound-verification pipeline (Monte Carlo with
//!   exact confidence intervals, exact tree enumeration where it fits, and
//!   the backward-induction envelope) and emit the ledger CSV;
//! * `example1` — the contamination counterexample: closed-form coverage
//!   table and the conditioning-policy irrelevance gap;
//! * `check` — exact martingale/second-moment/band self-checks on a
//!   strategy's trajectory tree, with a fault-injection knob.
//!
//! Exit codes: `0` success (and all checks passed), `1` a mathematical check
//! failed, `2` invalid input. Every JSON document carries a `provenance`
//! block naming the tool version, the exact command line, the seed, and the
//! active enumeration caps, so results can be reproduced byte for byte.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{
    azuma_tail, dcm_coverage_bounded, hoeffding_tail, report, wlln_coverage_bounded,
    wlln_coverage_unbounded, BoundReport, FormulaId, MomentSpec, RangeSpec,
};
use crate::caps;
use crate::error::{Error, Result};
use crate::examples::{example1_coverage_grid, example1_gap, Example1Gap};
use crate::irrelevance::IrrelevanceOptions;
use crate::martingale::{
    check_khr_exact, check_martingale_exact, check_second_moment_identity, window_coverage_exact,
    TreeCheckOptions,
};
use crate::process::{
    builtin_strategies, event_for, parse_strategy, sample, strategy_names, verify_bound,
    write_verification_csv, CredalStep, EventSpec, MomentStep, MomentSupport, ProcessSpec,
    StepConstraint, Strategy, VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "credal-lln",
    version,
    about = "Concentration bounds and laws of large numbers for credal sets: \
             evaluate, simulate adversarially, and verify."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one bound formula on explicit inputs.
    Bound(BoundArgs),
    /// Sample strategy trajectories and write them as CSV.
    Simulate(SimulateArgs),
    /// Verify a bound against adversarial strategies; emit the ledger CSV.
    Verify(VerifyArgs),
    /// The contamination counterexample: coverage table and irrelevance gap.
    Example1(Example1Args),
    /// Exact self-checks of a strategy's trajectory tree.
    Check(CheckArgs),
    /// List the built-in strategy names.
    Strategies,
}

#[derive(Args)]
struct BoundArgs {
    /// One of: thm1, thm2, thm3-wlln, dcm-wlln, thm3-slln-N, thm4-wlln,
    /// thm4-slln-N, markov, hoeffding-mgf, khr.
    #[arg(long)]
    formula: String,
    /// Deviation level (absolute for tails, per-mean for coverage).
    #[arg(long)]
    eps: Option<f64>,
    /// Number of steps.
    #[arg(long)]
    n: Option<u64>,
    /// Per-step range widths B_i (comma separated); overrides --bmax/--n.
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    /// Uniform per-step range width.
    #[arg(long)]
    bmax: Option<f64>,
    /// Per-step variance cap.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Mean-band half width.
    #[arg(long)]
    delta: Option<f64>,
    /// Upper expectation of the (non-negative) sum, for markov.
    #[arg(long)]
    expectation: Option<f64>,
    /// Exponent for hoeffding-mgf.
    #[arg(long)]
    s: Option<f64>,
    /// Support lower end for hoeffding-mgf.
    #[arg(long)]
    a: Option<f64>,
    /// Support upper end for hoeffding-mgf.
    #[arg(long)]
    b_upper: Option<f64>,
    /// Per-step second moments m_i for khr (comma separated).
    #[arg(long, value_delimiter = ',')]
    moments: Option<Vec<f64>>,
    /// Per-step band radii eps_i for khr (comma separated, non-decreasing).
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Strategy names, comma separated (default: every builtin that fits the
    /// spec).
    #[arg(long, value_delimiter = ',')]
    strategy: Option<Vec<String>>,
    /// Trajectories per strategy.
    #[arg(long, default_value_t = 10)]
    trials: u64,
    /// Counter-based RNG seed; identical seeds give identical draws
    /// regardless of --workers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: one thread, no pool).
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Formula to verify (hoeffding-mgf is not an event bound; use `bound`).
    #[arg(long)]
    formula: String,
    /// Deviation level.
    #[arg(long)]
    eps: Option<f64>,
    /// Per-step second moments for khr.
    #[arg(long, value_delimiter = ',')]
    moments: Option<Vec<f64>>,
    /// Per-step band radii for khr.
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    /// First step (1-based) of the window event, for the slln formulas.
    #[arg(long)]
    window_start: Option<u64>,
    /// Number of steps the window event watches.
    #[arg(long)]
    window_len: Option<u64>,
    /// Strategy names, comma separated (default: every builtin that fits).
    #[arg(long, value_delimiter = ',')]
    strategy: Option<Vec<String>>,
    /// Monte Carlo trials per strategy.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// Two-sided miscoverage of the per-strategy confidence intervals.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Skip the exact tree enumeration even where it would fit.
    #[arg(long)]
    no_exact: bool,
    /// Skip the backward-induction envelope.
    #[arg(long)]
    no_dp: bool,
    /// Leaf cap for exact enumerations (default 2000000, env CREDAL_LLN_CAP).
    #[arg(long)]
    leaf_cap: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct Example1Args {
    /// Contamination level, strictly inside (0, 1).
    #[arg(long, default_value_t = 0.3)]
    delta: f64,
    /// Coverage slack, strictly inside (0, 1 - delta).
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Horizons for the coverage table, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000,10000")]
    n: Vec<u64>,
    /// Coordinate of the truncated joint family for the irrelevance check
    /// (the check enumerates events over the 2^(k-1) prefixes).
    #[arg(long, default_value_t = 4)]
    coordinate: usize,
    /// Skip the irrelevance check.
    #[arg(long)]
    no_gap: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Strategy names, comma separated (default: every builtin that fits).
    #[arg(long, value_delimiter = ',')]
    strategy: Option<Vec<String>>,
    /// Added to every realized conditional mean — a fault injection; 0
    /// checks the true process.
    #[arg(long, default_value_t = 0.0)]
    bias: f64,
    /// Largest tolerated identity violation.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Also run the band check against these per-step radii.
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    /// Also report exact window coverage: first step (1-based).
    #[arg(long)]
    window_start: Option<u64>,
    /// Window length.
    #[arg(long)]
    window_len: Option<u64>,
    /// Window band radius.
    #[arg(long)]
    window_eps: Option<f64>,
    /// Leaf cap for the enumerations (default 2000000, env CREDAL_LLN_CAP).
    #[arg(long)]
    leaf_cap: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SpecArgs {
    /// Process spec: a JSON file path, or a builtin name (binary,
    /// binary-pm1, ternary, moment).
    #[arg(long, default_value = "binary")]
    spec: String,
    /// Horizon for builtin specs (a spec file fixes its own horizon).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct OutputArgs {
    /// Emit a single JSON document instead of the human/CSV form.
    #[arg(long)]
    json: bool,
    /// Write the primary artifact to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Reproducibility header attached to every JSON document.
#[derive(Serialize)]
struct Provenance {
    tool: &'static str,
    version: &'static str,
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    event_cap: u64,
    leaf_cap: u64,
}

fn provenance(seed: Option<u64>, trials: Option<u64>) -> Provenance {
    Provenance {
        tool: "credal-lln",
        version: env!("CARGO_PKG_VERSION"),
        command: std::env::args().collect::<Vec<_>>().join(" "),
        seed,
        trials,
        event_cap: caps::default_event_cap().min(u64::MAX as u128) as u64,
        leaf_cap: caps::default_leaf_cap().min(u64::MAX as u128) as u64,
    }
}

/// Parse args, dispatch, and map the outcome to an exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Bound(a) => cmd_bound(a),
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Example1(a) => cmd_example1(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Strategies => {
            for name in strategy_names() {
                println!("{name}");
            }
            Ok(0)
        }
    }
}

fn need<T>(x: Option<T>, flag: &str) -> Result<T> {
    x.ok_or_else(|| Error::invalid(format!("missing {flag}")))
}

fn write_artifact(out: &OutputArgs, content: &str) -> Result<()> {
    match &out.out {
        Some(path) => {
            fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            std::io::stdout().flush()?;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Specs and strategies

const BUILTIN_SPECS: [&str; 4] = ["binary", "binary-pm1", "ternary", "moment"];

fn builtin_spec(name: &str, n: usize) -> Result<ProcessSpec> {
    let step = match name {
        "binary" => StepConstraint::Credal(CredalStep::from_parts(
            vec![0.0, 1.0],
            vec![vec![0.5, 0.5], vec![0.3, 0.7]],
        )?),
        "binary-pm1" => StepConstraint::Credal(CredalStep::from_parts(
            vec![-1.0, 1.0],
            vec![vec![0.5, 0.5], vec![0.3, 0.7]],
        )?),
        "ternary" => StepConstraint::Credal(CredalStep::from_parts(
            vec![-1.0, 0.0, 1.0],
            vec![
                vec![0.2, 0.5, 0.3],
                vec![0.4, 0.2, 0.4],
                vec![0.25, 0.25, 0.5],
            ],
        )?),
        "moment" => StepConstraint::Moment(MomentStep::new(
            MomentSupport::Unrestricted,
            -0.1,
            0.1,
            1.0,
            Some(2.0),
        )?),
        other => {
            return Err(Error::invalid(format!(
                "unknown builtin spec {other:?}; expected one of {} or a JSON file path",
                BUILTIN_SPECS.join(", ")
            )))
        }
    };
    ProcessSpec::homogeneous(step, n)
}

fn load_spec(args: &SpecArgs) -> Result<ProcessSpec> {
    if BUILTIN_SPECS.contains(&args.spec.as_str()) {
        return builtin_spec(&args.spec, args.n.unwrap_or(20));
    }
    let path = PathBuf::from(&args.spec);
    if !path.exists() {
        return Err(Error::invalid(format!(
            "--spec {:?} is neither a builtin ({}) nor an existing file",
            args.spec,
            BUILTIN_SPECS.join(", ")
        )));
    }
    if args.n.is_some() {
        return Err(Error::invalid(
            "a spec file fixes its own horizon; drop --n",
        ));
    }
    let text = fs::read_to_string(&path)?;
    Ok(serde_json::from_str(&text)?)
}

fn load_strategies(
    names: &Option<Vec<String>>,
    spec: &ProcessSpec,
) -> Result<Vec<Box<dyn Strategy>>> {
    match names {
        None => Ok(builtin_strategies(spec)),
        Some(names) => {
            if names.is_empty() {
                return Err(Error::invalid("empty --strategy list"));
            }
            names.iter().map(|n| parse_strategy(n)).collect()
        }
    }
}

// ---------------------------------------------------------------------------
// bound

fn range_from(args: &BoundArgs) -> Result<RangeSpec> {
    if let Some(b) = &args.b {
        if let Some(n) = args.n {
            if n as usize != b.len() {
                return Err(Error::invalid(format!(
                    "--n {n} disagrees with the {} entries of --b",
                    b.len()
                )));
            }
        }
        return RangeSpec::new(b.clone());
    }
    let bmax = need(args.bmax, "--bmax (or --b)")?;
    let n = need(args.n, "--n")?;
    RangeSpec::uniform(bmax, n as usize)
}

fn moment_from(args: &BoundArgs) -> Result<MomentSpec> {
    MomentSpec::new(need(args.sigma2, "--sigma2")?, need(args.delta, "--delta")?)
}

fn bound_report(args: &BoundArgs) -> Result<BoundReport> {
    let formula: FormulaId = args.formula.parse()?;
    match formula {
        FormulaId::Thm1 => hoeffding_tail(need(args.eps, "--eps")?, &range_from(args)?),
        FormulaId::Thm2 => azuma_tail(need(args.eps, "--eps")?, &range_from(args)?),
        FormulaId::Thm3Wlln => wlln_coverage_bounded(
            need(args.n, "--n")?,
            need(args.eps, "--eps")?,
            &range_from(args)?,
        ),
        FormulaId::DcmWlln => dcm_coverage_bounded(
            need(args.n, "--n")?,
            need(args.eps, "--eps")?,
            &range_from(args)?,
        ),
        FormulaId::Thm3SllnN => {
            report::thm3_slln(need(args.eps, "--eps")?, need(args.bmax, "--bmax")?)
        }
        FormulaId::Thm4Wlln => wlln_coverage_unbounded(
            need(args.n, "--n")?,
            need(args.eps, "--eps")?,
            &moment_from(args)?,
        ),
        FormulaId::Thm4SllnN => report::thm4_slln(need(args.eps, "--eps")?, &moment_from(args)?),
        FormulaId::Markov => report::markov(
            need(args.expectation, "--expectation")?,
            need(args.eps, "--eps")?,
        ),
        FormulaId::HoeffdingMgf => report::hoeffding_mgf(
            need(args.s, "--s")?,
            need(args.a, "--a")?,
            need(args.b_upper, "--b-upper")?,
        ),
        FormulaId::Khr => report::khr(
            need(args.moments.as_deref(), "--moments")?,
            need(args.eps_list.as_deref(), "--eps-list")?,
        ),
    }
}

#[derive(Serialize)]
struct BoundDoc {
    provenance: Provenance,
    report: BoundReport,
}

fn cmd_bound(args: BoundArgs) -> Result<i32> {
    let report = bound_report(&args)?;
    let content = if args.out.json {
        let doc = BoundDoc {
            provenance: provenance(None, None),
            report,
        };
        format!("{}\n", serde_json::to_string_pretty(&doc)?)
    } else {
        let mut s = format!(
            "formula: {}\nside: {}\nvalue: {}\n",
            report.formula_id,
            serde_plain(&report.side)?,
            report.value
        );
        if let Some(raw) = report.raw_value {
            s.push_str(&format!("raw_value: {raw}\n"));
        }
        if let Some(t) = report.threshold {
            s.push_str(&format!("threshold: {t}\n"));
        }
        if report.vacuous {
            s.push_str("vacuous: true\n");
        }
        s
    };
    write_artifact(&args.out, &content)?;
    Ok(0)
}

/// Serialize a plain (unit-variant) enum to its serde string form.
fn serde_plain<T: Serialize>(x: &T) -> Result<String> {
    match serde_json::to_value(x)? {
        serde_json::Value::String(s) => Ok(s),
        v => Ok(v.to_string()),
    }
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Serialize)]
struct TrajectoryDoc {
    provenance: Provenance,
    horizon: usize,
    strategies: Vec<TrajectorySet>,
}

#[derive(Serialize)]
struct TrajectorySet {
    strategy: String,
    trials: u64,
    x: Vec<Vec<f64>>,
    m: Vec<Vec<f64>>,
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let spec = load_spec(&args.spec)?;
    let strategies = load_strategies(&args.strategy, &spec)?;
    let n = spec.horizon();

    if args.out.json {
        let mut sets = Vec::new();
        for s in &strategies {
            let batch = sample(&spec, s.as_ref(), args.trials, args.seed, args.workers)?;
            let mut x = Vec::with_capacity(args.trials as usize);
            let mut m = Vec::with_capacity(args.trials as usize);
            for t in 0..args.trials {
                x.push(batch.xs(t as usize).to_vec());
                m.push(batch.ms(t as usize).to_vec());
            }
            sets.push(TrajectorySet {
                strategy: s.name().to_string(),
                trials: args.trials,
                x,
                m,
            });
        }
        let doc = TrajectoryDoc {
            provenance: provenance(Some(args.seed), Some(args.trials)),
            horizon: n,
            strategies: sets,
        };
        write_artifact(
            &args.out,
            &format!("{}\n", serde_json::to_string_pretty(&doc)?),
        )?;
        return Ok(0);
    }

    let mut csv = String::from("strategy,trial,step,x,m,y\n");
    for s in &strategies {
        let batch = sample(&spec, s.as_ref(), args.trials, args.seed, args.workers)?;
        for t in 0..args.trials {
            let xs = batch.xs(t as usize);
            let ms = batch.ms(t as usize);
            let mut y = 0.0;
            for i in 0..n {
                y += xs[i] - ms[i];
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    s.name(),
                    t,
                    i + 1,
                    xs[i],
                    ms[i],
                    y
                ));
            }
        }
    }
    write_artifact(&args.out, &csv)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify

fn report_for_verify(args: &VerifyArgs, spec: &ProcessSpec) -> Result<BoundReport> {
    let formula: FormulaId = args.formula.parse()?;
    let range = || {
        spec.range_spec().ok_or_else(|| {
            Error::invalid(
                "this spec has unbounded steps; the bounded-range formulas need every step's range",
            )
        })
    };
    let n = spec.horizon() as u64;
    match formula {
        FormulaId::Thm1 => hoeffding_tail(need(args.eps, "--eps")?, &range()?),
        FormulaId::Thm2 => azuma_tail(need(args.eps, "--eps")?, &range()?),
        FormulaId::Thm3Wlln => wlln_coverage_bounded(n, need(args.eps, "--eps")?, &range()?),
        FormulaId::DcmWlln => dcm_coverage_bounded(n, need(args.eps, "--eps")?, &range()?),
        FormulaId::Thm3SllnN => {
            report::thm3_slln(need(args.eps, "--eps")?, range()?.b_max())
        }
        FormulaId::Thm4Wlln => {
            wlln_coverage_unbounded(n, need(args.eps, "--eps")?, &spec.moment_spec())
        }
        FormulaId::Thm4SllnN => {
            report::thm4_slln(need(args.eps, "--eps")?, &spec.moment_spec())
        }
        FormulaId::Markov => {
            for (i, s) in spec.steps().iter().enumerate() {
                let ok = match s {
                    StepConstraint::Credal(cs) => {
                        cs.values().iter().all(|&v| v >= -1e-12)
                    }
                    StepConstraint::Moment(_) => false,
                };
                if !ok {
                    return Err(Error::invalid(format!(
                        "markov speaks about non-negative sums; step {} does not guarantee non-negative draws",
                        i + 1
                    )));
                }
            }
            let e_upper: f64 = spec.upper_means().iter().sum();
            report::markov(e_upper, need(args.eps, "--eps")?)
        }
        FormulaId::Khr => report::khr(
            need(args.moments.as_deref(), "--moments")?,
            need(args.eps_list.as_deref(), "--eps-list")?,
        ),
        FormulaId::HoeffdingMgf => Err(Error::invalid(
            "hoeffding-mgf dominates a moment generating function, not an event probability; use `bound`",
        )),
    }
}

fn event_for_verify(args: &VerifyArgs, report: &BoundReport) -> Result<EventSpec> {
    match (args.window_start, args.window_len) {
        (None, None) => event_for(report),
        (Some(start), Some(len)) => {
            if !matches!(
                report.formula_id,
                FormulaId::Thm3SllnN | FormulaId::Thm4SllnN
            ) {
                return Err(Error::invalid(
                    "--window-start/--window-len only apply to the slln formulas",
                ));
            }
            Ok(EventSpec::WindowBand {
                start,
                len,
                epsilon: need(args.eps, "--eps")?,
            })
        }
        _ => Err(Error::invalid(
            "--window-start and --window-len go together",
        )),
    }
}

#[derive(Serialize)]
struct VerifyDoc {
    provenance: Provenance,
    record: crate::process::VerificationRecord,
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let spec = load_spec(&args.spec)?;
    let report = report_for_verify(&args, &spec)?;
    let event = event_for_verify(&args, &report)?;
    let strategies = load_strategies(&args.strategy, &spec)?;
    let opts = VerifyOptions {
        trials: args.trials,
        seed: args.seed,
        workers: args.workers,
        alpha: args.alpha,
        use_exact: !args.no_exact,
        use_dp: !args.no_dp,
        leaf_cap: args.leaf_cap.map(|c| c as u128),
    };
    let record = verify_bound(&spec, &strategies, &event, &report, &opts)?;
    let failed = matches!(record.verdict, crate::process::Verdict::Fail);

    if args.out.json {
        let doc = VerifyDoc {
            provenance: provenance(Some(args.seed), Some(args.trials)),
            record,
        };
        write_artifact(
            &args.out,
            &format!("{}\n", serde_json::to_string_pretty(&doc)?),
        )?;
    } else {
        let mut csv = Vec::new();
        write_verification_csv(&record, &mut csv)?;
        let csv = String::from_utf8(csv).expect("csv is ascii");
        write_artifact(&args.out, &csv)?;
        if args.out.out.is_some() {
            println!(
                "{} {} vs {}: bound {} over {} strategies — {}{}",
                record.report.formula_id,
                serde_plain(&record.direction)?,
                record.event,
                record.report.value,
                record.rows.len(),
                record.verdict,
                if record.conclusive {
                    " (conclusive)"
                } else {
                    ""
                }
            );
        }
    }
    Ok(if failed { 1 } else { 0 })
}

// ---------------------------------------------------------------------------
// example1

#[derive(Serialize)]
struct Example1Doc {
    provenance: Provenance,
    delta: f64,
    epsilon: f64,
    coverage: Vec<crate::examples::Example1Coverage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<Example1Gap>,
}

fn cmd_example1(args: Example1Args) -> Result<i32> {
    let coverage = example1_coverage_grid(args.delta, args.eps, &args.n)?;
    let gap = if args.no_gap {
        None
    } else {
        Some(example1_gap(
            args.delta,
            args.coordinate,
            &IrrelevanceOptions::default(),
        )?)
    };

    if args.out.json {
        let doc = Example1Doc {
            provenance: provenance(None, None),
            delta: args.delta,
            epsilon: args.eps,
            coverage,
            gap,
        };
        write_artifact(
            &args.out,
            &format!("{}\n", serde_json::to_string_pretty(&doc)?),
        )?;
        return Ok(0);
    }

    let mut s = format!(
        "coverage of mean > {} under the three models (delta = {}, eps = {}):\n",
        1.0 - args.delta - args.eps,
        args.delta,
        args.eps
    );
    s.push_str("n,p1,p2,p3,lower\n");
    for c in &coverage {
        s.push_str(&format!("{},{},{},{},{}\n", c.n, c.p1, c.p2, c.p3, c.lower));
    }
    s.push_str(&format!(
        "\nthe lower envelope never exceeds 1 - delta = {}: no law of large numbers\n",
        1.0 - args.delta
    ));
    if let Some(g) = &gap {
        s.push_str(&format!(
            "\nweak irrelevance of coordinate {} in the truncated family:\n",
            g.coordinate
        ));
        s.push_str(&format!(
            "  regular-extension:     holds={} max_gap={} (events tested: {})\n",
            g.regular.holds, g.regular.max_gap, g.regular.events_tested
        ));
        s.push_str(&format!(
            "  strict-positive-lower: holds={} (events skipped by policy: {})\n",
            g.strict.holds, g.strict.events_skipped_policy
        ));
    }
    write_artifact(&args.out, &s)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// check

#[derive(Serialize)]
struct CheckDoc {
    provenance: Provenance,
    bias: f64,
    tol: f64,
    strategies: Vec<StrategyChecks>,
    all_passed: bool,
}

#[derive(Serialize)]
struct StrategyChecks {
    strategy: String,
    martingale: crate::martingale::MartingaleReport,
    second_moment: crate::martingale::SecondMomentReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    band: Option<crate::martingale::KhrReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window_coverage: Option<f64>,
    passed: bool,
}

fn cmd_check(args: CheckArgs) -> Result<i32> {
    let spec = load_spec(&args.spec)?;
    let strategies = load_strategies(&args.strategy, &spec)?;
    let opts = TreeCheckOptions {
        tol: args.tol,
        leaf_cap: args.leaf_cap.map(|c| c as u128),
        mean_bias: args.bias,
    };
    let window = match (args.window_start, args.window_len, args.window_eps) {
        (None, None, None) => None,
        (Some(s), Some(l), Some(e)) => Some((s, l, e)),
        _ => {
            return Err(Error::invalid(
                "--window-start, --window-len and --window-eps go together",
            ))
        }
    };

    let mut all = true;
    let mut rows = Vec::new();
    for s in &strategies {
        let martingale = check_martingale_exact(&spec, s.as_ref(), &opts)?;
        let second_moment = check_second_moment_identity(&spec, s.as_ref(), &opts)?;
        let band = match &args.eps_list {
            Some(eps) => Some(check_khr_exact(&spec, s.as_ref(), eps, &opts)?),
            None => None,
        };
        let window_coverage = match window {
            Some((st, l, e)) => Some(window_coverage_exact(
                &spec,
                s.as_ref(),
                st,
                l,
                e,
                opts.leaf_cap,
            )?),
            None => None,
        };
        let passed =
            martingale.passed && second_moment.passed && band.as_ref().is_none_or(|b| b.passed);
        all &= passed;
        rows.push(StrategyChecks {
            strategy: s.name().to_string(),
            martingale,
            second_moment,
            band,
            window_coverage,
            passed,
        });
    }

    if args.out.json {
        let doc = CheckDoc {
            provenance: provenance(None, None),
            bias: args.bias,
            tol: args.tol,
            strategies: rows,
            all_passed: all,
        };
        write_artifact(
            &args.out,
            &format!("{}\n", serde_json::to_string_pretty(&doc)?),
        )?;
    } else {
        let mut s = String::new();
        for r in &rows {
            s.push_str(&format!(
                "{}: martingale {} (max dev {}), second-moment {} (gap {})",
                r.strategy,
                pass_str(r.martingale.passed),
                r.martingale.max_deviation,
                pass_str(r.second_moment.passed),
                r.second_moment.gap,
            ));
            if let Some(b) = &r.band {
                s.push_str(&format!(
                    ", band {} (exact {} vs bound {})",
                    pass_str(b.passed),
                    b.exact,
                    b.bound
                ));
            }
            if let Some(w) = r.window_coverage {
                s.push_str(&format!(", window coverage {w}"));
            }
            s.push('\n');
        }
        s.push_str(&format!("all: {}\n", pass_str(all)));
        write_artifact(&args.out, &s)?;
    }
    Ok(if all { 0 } else { 1 })
}

fn pass_str(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}
