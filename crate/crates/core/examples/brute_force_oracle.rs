//! Exhaustive search over staircase functions on a coarse grid, compared with
//! the closed-form worst case.
//!
//! cargo run --release --example brute_force_oracle

use monoquad::analysis;
use monoquad::estimators::{EstimatorSpec, StrataSpec};
use monoquad::oracle::{self, SearchOptions};

fn main() -> monoquad::Result<()> {
    let (m, g) = (8, 8);
    println!("searching F_{m} with levels k/{g}: {} candidates each", oracle::candidate_count(m, g));
    for spec in [
        EstimatorSpec::SimpleMc { n: 3 },
        EstimatorSpec::ControlVariate { n: 3 },
        EstimatorSpec::Stratified(StrataSpec::equal(4)?),
        EstimatorSpec::Stratified(StrataSpec::new(vec![0.0, 0.25, 1.0], vec![1, 3])?),
    ] {
        let found = oracle::brute_force_max_variance(&spec, m, g, &SearchOptions::default())?;
        let closed = analysis::worst_case_certificate(&spec)?.worst_case_variance;
        println!(
            "{:<16} search {:.6e}  closed form {:.6e}  witness {}",
            spec.name(),
            found.max_value,
            closed,
            found.witness.as_unit_step().map_or("not a step".to_string(), |x| format!("step at {x}")),
        );
    }

    let tight = SearchOptions { cap: 1000, allow_heuristic: false };
    match oracle::brute_force_max_variance(&EstimatorSpec::SimpleMc { n: 1 }, 16, 16, &tight) {
        Err(e) => println!("with a cap of 1000: {e}"),
        Ok(r) => println!("unexpectedly finished: {}", r.max_value),
    }
    Ok(())
}
