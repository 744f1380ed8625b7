//! Closed-form worst-case variances and the functions that attain them.
//!
//! cargo run --example worst_case_certificates

use monoquad::analysis;
use monoquad::estimators::{EstimatorSpec, StrataSpec};
use monoquad::oracle;

fn main() -> monoquad::Result<()> {
    let n = 6;
    let specs = [
        EstimatorSpec::SimpleMc { n },
        EstimatorSpec::ControlVariate { n },
        EstimatorSpec::Stratified(analysis::optimal_strata(n)?),
        EstimatorSpec::Stratified(StrataSpec::new(vec![0.0, 0.5, 1.0], vec![2, 4])?),
        EstimatorSpec::Stratified(StrataSpec::new(vec![0.0, 0.1, 0.3, 0.6, 1.0], vec![1, 1, 2, 2])?),
    ];
    for spec in &specs {
        let cert = analysis::worst_case_certificate(spec)?;
        let exact = oracle::certify(&cert)?;
        println!(
            "{:<16} budget {n}: worst case {:.6e}, witness step at {:?}, exact variance at witness {:.6e}",
            spec.name(),
            cert.worst_case_variance,
            cert.witness.as_unit_step(),
            exact,
        );
    }
    println!("lower bound 1/(32n^2) = {:.6e}", analysis::variance_lower_bound(n)?);
    Ok(())
}
