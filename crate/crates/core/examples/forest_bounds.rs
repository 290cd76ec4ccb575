//! The descendant-count importance: its deterministic lower bound, the
//! per-sample spanning-forest upper bound, exactness on forests, and
//! uniform sampling of a forest's linear extensions.
//!
//! ```text
//! cargo run --release --example forest_bounds
//! ```

use std::collections::BTreeMap;

use linext::oracle::exact_count;
use linext::rng::rng_from_seed;
use linext::sis::{
    lower_bound, sample_forest_extension_uniform, sample_with_forest, ImportanceSpec,
};
use linext::Poset;

fn main() -> linext::Result<()> {
    let p = Poset::random(14, 0.25, 5);
    let exact = exact_count(&p)?;
    let mut rng = rng_from_seed(9);
    let mut best = f64::INFINITY;
    let mut sum = 0.0;
    let k = 2000;
    for _ in 0..k {
        let (est, forest, ub) = sample_with_forest(&p, &ImportanceSpec::Descendants, &mut rng)?;
        assert!(forest.count() >= exact);
        sum += est.value();
        best = best.min(ub);
    }
    println!("n = 14: exact {exact}");
    println!("  lower bound n!/prod d(v)  {:.1}", lower_bound(&p).exp());
    println!("  mean of {k} samples       {:.1}", sum / k as f64);
    println!("  best forest upper bound   {:.1}", best.exp());

    let tree = Poset::from_relations(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])?;
    let (est, _, ub) = sample_with_forest(&tree, &ImportanceSpec::Descendants, &mut rng)?;
    println!(
        "binary tree on 7: sample {:.1}, lower {:.1}, upper {:.1}, exact {}",
        est.value(),
        lower_bound(&tree).exp(),
        ub.exp(),
        exact_count(&tree)?
    );

    let star = Poset::from_relations(4, &[(0, 1), (0, 2), (0, 3)])?;
    let mut freq: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let draws = 60_000;
    for _ in 0..draws {
        *freq
            .entry(sample_forest_extension_uniform(&star, &mut rng)?.order)
            .or_default() += 1;
    }
    println!("uniform draws on a 4-star:");
    for (order, c) in freq {
        println!("  {order:?}  {:.4}", c as f64 / draws as f64);
    }
    Ok(())
}
