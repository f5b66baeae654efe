//! Closed-form gains versus the Fock-space simulation.
//!
//! The oracle builds every input state in a truncated Fock space, applies the
//! two beam splitters exactly, evaluates all sixteen threshold-detector
//! click patterns, and sifts — sharing no code with the closed forms it
//! checks. This runs the standard validation grid (4 intensities x 4
//! efficiencies x 3 dark-count levels x 4 source variants x 2 bases) and
//! reports the worst disagreement.

use ecs_tfqkd::{oracle, Error};

fn main() -> Result<(), Error> {
    let rows = oracle::run_validation_grid()?;

    println!("{}", oracle::ValidationRow::CSV_HEADER);
    for row in rows.iter().step_by(48) {
        println!("{}", row.csv_line());
    }
    println!("... ({} rows total)", rows.len());

    let worst = rows
        .iter()
        .max_by(|a, b| a.deviation.total_cmp(&b.deviation))
        .expect("grid is nonempty");
    println!();
    println!(
        "worst deviation: {:.3e} at {} {} mu={} eta={} pd={}",
        worst.deviation, worst.variant, worst.basis, worst.mu, worst.eta, worst.p_d
    );
    println!(
        "tolerance 1e-9: {}",
        if worst.deviation <= 1e-9 { "PASS" } else { "FAIL" }
    );
    Ok(())
}
