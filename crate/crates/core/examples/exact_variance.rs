//! Exact relative variance two ways, the per-level constants A_i behind
//! the product bound, and an empirical RV converging to the exact value.
//!
//! ```text
//! cargo run --release --example exact_variance
//! ```

use linext::sis::ImportanceSpec;
use linext::variance::{empirical_rv_convergence, rv_explicit, rv_recursive, ProductBound};
use linext::Poset;

fn main() -> linext::Result<()> {
    let p = Poset::random(9, 0.3, 11);
    println!("random n=9");
    for spec in ImportanceSpec::SHIPPED {
        println!(
            "  {:<8} explicit {:.10}  recursive {:.10}",
            spec.name(),
            rv_explicit(&p, &spec)?,
            rv_recursive(&p, &spec)?
        );
    }

    println!("\nA_i over all labeled posets of size i");
    for spec in ImportanceSpec::SHIPPED {
        let bound = ProductBound::new(&spec, 5)?;
        let a: Vec<String> = bound
            .levels
            .iter()
            .map(|l| format!("{:.4}", l.a_i))
            .collect();
        println!(
            "  {:<8} [{}]  RV(P) <= {:.4} for |P| = 5",
            spec.name(),
            a.join(", "),
            bound.rv_bound(5)?
        );
    }

    println!("\nempirical RV, uniform importance");
    for k in [100, 1_000, 10_000, 100_000] {
        let r = empirical_rv_convergence(&p, &ImportanceSpec::Uniform, k, 17)?;
        println!(
            "  k = {k:>6}: {:.4} (exact {:.4})",
            r.empirical_rv.unwrap(),
            r.rv_explicit.unwrap()
        );
    }
    Ok(())
}
