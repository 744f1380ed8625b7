//! Upper-to-lower bound ratios, as a CSV on stdout.
//!
//! cargo run --example ratio_table -- 20

fn main() -> monoquad::Result<()> {
    let n_max = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    print!("{}", monoquad::analysis::ratio_table_csv(n_max)?);
    Ok(())
}
