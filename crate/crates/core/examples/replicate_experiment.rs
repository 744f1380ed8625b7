//! Replicate an estimator many times and compare with the exact variance.
//!
//! cargo run --release --example replicate_experiment

use monoquad::estimators::EstimatorSpec;
use monoquad::oracle::{self, ExperimentConfig, Report};
use monoquad::{MonotoneFunction, Preset};

fn main() -> monoquad::Result<()> {
    let f = MonotoneFunction::preset(Preset::Square)?;
    print!("{}", Report::csv_header());
    for estimator in [
        EstimatorSpec::SimpleMc { n: 8 },
        EstimatorSpec::ControlVariate { n: 8 },
        EstimatorSpec::Stratified(monoquad::analysis::optimal_strata(8)?),
        EstimatorSpec::Trapezoid { n: 8 },
    ] {
        let config = ExperimentConfig::new(estimator, f.clone(), 200_000, 2024);
        let report = oracle::run_experiment(&config)?;
        print!("{}", report.csv_row());
    }

    let config = ExperimentConfig::new(EstimatorSpec::ControlVariate { n: 8 }, f.clone(), 100_000, 1);
    let check = oracle::verify_unbiasedness(&config.estimator, &f, config.replications, config.seed)?;
    eprintln!("control variate unbiasedness: z = {:.2}, pass = {}", check.z, check.pass);
    Ok(())
}
