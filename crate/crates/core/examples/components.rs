//! The component recursion on a poset made of several disjoint blocks,
//! where splitting collapses most of the variance.
//!
//! ```text
//! cargo run --release --example components
//! ```

use linext::oracle::exact_count;
use linext::rng::rng_from_seed;
use linext::sis::{recursive_estimate, run_batch, single_estimate, ImportanceSpec};
use linext::Poset;

fn main() -> linext::Result<()> {
    // Three chains of length 4 and a 4-star, side by side.
    let mut pairs = Vec::new();
    for block in 0..3 {
        let o = 4 * block;
        pairs.extend([(o, o + 1), (o + 1, o + 2), (o + 2, o + 3)]);
    }
    pairs.extend([(12, 13), (12, 14), (12, 15)]);
    let p = Poset::from_relations(16, &pairs)?;
    println!(
        "components {:?}, L = {}",
        p.connected_components().sizes,
        exact_count(&p)?
    );

    let spec = ImportanceSpec::Uniform;
    let mut rng = rng_from_seed(1);
    println!(
        "single draws  plain {:.0}  recursive {:.0}",
        single_estimate(&p, &spec, &mut rng)?.0.value(),
        recursive_estimate(&p, &spec, &mut rng)?.value()
    );
    for recursive in [false, true] {
        let s = run_batch(&p, &spec, 20_000, 4, recursive)?;
        println!(
            "recursive = {recursive:<5}  mean {:.1}  RV {:.4}",
            s.mean_estimate, s.relative_variance
        );
    }
    Ok(())
}
