//! Optimized rate-versus-distance table, printed as CSV.
//!
//! Equivalent to `sweep --l-start 0 --l-stop 1100 --l-step 50` on the
//! binary; the columns match the CLI output so the two can be diffed.

use ecs_tfqkd::{cli, optimizer, Error, OptimizeSpec, SystemParams};

fn main() -> Result<(), Error> {
    let distances: Vec<f64> = (0..=22).map(|i| 50.0 * i as f64).collect();
    let points = optimizer::sweep(&SystemParams::default(), &distances, &OptimizeSpec::default())?;

    println!("{}", cli::CSV_HEADER);
    for pt in &points {
        println!("{}", cli::csv_row(pt));
    }
    Ok(())
}
