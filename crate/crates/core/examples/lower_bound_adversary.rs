//! Find two functions a sampler cannot tell apart and measure its error on them.
//!
//! cargo run --release --example lower_bound_adversary

use monoquad::analysis;
use monoquad::cli::cmd_lower_bound;
use monoquad::estimators::EstimatorSpec;

fn main() -> monoquad::Result<()> {
    for spec in [
        EstimatorSpec::SimpleMc { n: 1 },
        EstimatorSpec::SimpleMc { n: 4 },
        EstimatorSpec::ControlVariate { n: 4 },
        EstimatorSpec::Stratified(analysis::optimal_strata(4)?),
    ] {
        let out = cmd_lower_bound(&spec, 1.0, 100_000, 0)?;
        println!(
            "{:<16} n={} cell {:?} missed {:.3} of the time: max L1 error {:.5} (se {:.1e}) vs bound {:.5} -> {}",
            out.estimator,
            out.n,
            out.interval,
            out.miss_probability,
            out.max_lp_error,
            out.standard_error,
            out.bound,
            if out.pass { "ok" } else { "VIOLATED" },
        );
    }
    Ok(())
}
