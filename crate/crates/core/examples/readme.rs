//! The README's library example, kept compiling.

use credal_lln::bounds;
use credal_lln::process::{
    lower_upper_event_probability_dp, CredalStep, EventSpec, ProcessSpec, StepConstraint,
};

fn main() -> credal_lln::Result<()> {
    // Ten binary steps; the adversary mixes two extreme coins per step.
    let step = CredalStep::from_parts(vec![0.0, 1.0], vec![vec![0.5, 0.5], vec![0.3, 0.7]])?;
    let spec = ProcessSpec::homogeneous(StepConstraint::Credal(step), 10)?;

    // The exponential tail bound holds for every strategy…
    let bound = bounds::hoeffding_tail(2.5, &spec.range_spec().unwrap())?;

    // …and backward induction computes exactly how tight it is.
    let event = EventSpec::SumUpperDev { epsilon: 2.5 };
    let (lo, hi) = lower_upper_event_probability_dp(&spec, &event, None)?;
    assert!(hi <= bound.value);
    println!(
        "bound {:.6}, attainable range [{lo:.6}, {hi:.6}]",
        bound.value
    );
    Ok(())
}
