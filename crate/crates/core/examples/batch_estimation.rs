//! Batch estimation on a poset too large to count exactly, comparing the
//! three importance functions with and without the component recursion.
//!
//! ```text
//! cargo run --release --example batch_estimation [n] [samples]
//! ```

use linext::sis::{run_batch, ImportanceSpec};
use linext::Poset;

fn main() -> linext::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer"));
    let n = args.next().unwrap_or(60);
    let k = args.next().unwrap_or(20_000);
    let p = Poset::random(n, 0.2, 42);
    println!(
        "n = {n}, {} relations, {} components, k = {k}",
        p.relations().len(),
        p.connected_components().len()
    );
    println!(
        "{:<8} {:<9} {:>14} {:>10} {:>12}",
        "spec", "recursive", "ln L-hat", "RV", "rel. SE"
    );
    for spec in ImportanceSpec::SHIPPED {
        for recursive in [false, true] {
            let s = run_batch(&p, &spec, k, 1, recursive)?;
            println!(
                "{:<8} {:<9} {:>14.6} {:>10.4} {:>12.2e}",
                spec.name(),
                recursive,
                s.mean_log_estimate,
                s.relative_variance,
                s.standard_error() / s.mean_estimate
            );
        }
    }
    Ok(())
}
