//! Mean relative variance against poset size on random posets, written as
//! CSV and summarized on stdout.
//!
//! ```text
//! cargo run --release --example random_poset_experiment [out.csv]
//! ```

use std::path::PathBuf;

use linext::experiment::{write_experiment, ExperimentConfig, PerSize};

fn main() -> linext::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "rv_vs_n.csv".into());
    let mut config = ExperimentConfig::desk_scale(2024, PathBuf::from(out));
    config.posets_per_n = PerSize::Fixed(32);
    let result = write_experiment(&config)?;

    println!(
        "{:>4} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "n", "uniform", "(rec)", "desc", "(rec)", "asq", "(rec)"
    );
    for &n in &config.n_values {
        let cells: Vec<String> = ["uniform", "desc", "asq"]
            .iter()
            .flat_map(|s| {
                [false, true].map(|r| format!("{:>10.3}", result.mean_rv(n, s, r).unwrap()))
            })
            .collect();
        println!("{n:>4} {}", cells.join(" "));
    }
    println!(
        "asq <= desc <= uniform at {:.0}% of sizes; recursion helps in {:.0}% of cells",
        100.0 * result.ordering_fraction(false),
        100.0 * result.recursion_gain_fraction()
    );
    println!(
        "rows in {}, summary in {}",
        config.out.display(),
        config.summary_path().display()
    );
    Ok(())
}
