//! Worst-case error of the trapezoidal rule on monotone functions, by search
//! and in closed form.
//!
//! cargo run --release --example kiefer_trapezoid

use monoquad::analysis;
use monoquad::estimators::trapezoid;
use monoquad::oracle::{self, SearchOptions};
use monoquad::MonotoneFunction;

fn main() -> monoquad::Result<()> {
    let opts = SearchOptions { cap: 20_000_000, allow_heuristic: false };
    for n in 1..=2 {
        let m = 8 * (n + 1);
        let r = oracle::brute_force_max_trapezoid_error(n, m, 8, &opts)?;
        let (bound, _) = analysis::trapezoid_worst_case(n)?;
        println!("n={n}: search over F_{m} finds {:.6}, closed form {:.6}", r.max_value, bound);
    }

    // a step just past a node is the hardest case
    let n = 4;
    let (bound, _) = analysis::trapezoid_worst_case(n)?;
    for x0 in [0.2, 0.2 + 1e-9, 0.5] {
        let f = MonotoneFunction::unit_step(x0)?;
        let err = (f.exact_integral() - trapezoid(&f, n)?).abs();
        println!("n={n} step at {x0:.9}: error {err:.6} (bound {bound:.6})");
    }
    Ok(())
}
