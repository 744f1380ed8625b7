//! Estimate the integral of a few monotone functions with every rule.
//!
//! cargo run --example integrate_monotone

use monoquad::analysis;
use monoquad::estimators::EstimatorSpec;
use monoquad::{MonotoneFunction, Preset, RngStream};

fn main() -> monoquad::Result<()> {
    let n = 16;
    let rules = [
        EstimatorSpec::SimpleMc { n },
        EstimatorSpec::ControlVariate { n },
        EstimatorSpec::Stratified(analysis::optimal_strata(n)?),
        EstimatorSpec::Trapezoid { n },
    ];
    let functions = [
        ("sqrt", MonotoneFunction::preset(Preset::Sqrt)?),
        ("logistic", MonotoneFunction::preset(Preset::logistic())?),
        ("step(0.3)", MonotoneFunction::unit_step(0.3)?),
        ("staircase", MonotoneFunction::staircase(vec![0.0, 0.1, 0.5, 0.5, 0.9])?),
    ];

    println!("{:<12} {:>10} {:>16} {:>12} {:>12}", "function", "exact", "rule", "estimate", "error");
    for (label, f) in &functions {
        let exact = f.exact_integral();
        for rule in &rules {
            let est = rule.estimate(f, RngStream::new(42, 0))?;
            println!("{label:<12} {exact:>10.6} {:>16} {est:>12.6} {:>12.2e}", rule.name(), est - exact);
        }
    }
    Ok(())
}
