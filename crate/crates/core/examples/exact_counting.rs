//! Exact counting: the downset oracle, brute-force enumeration, the forest
//! formula and the component product, all on the same inputs.
//!
//! ```text
//! cargo run --example exact_counting
//! ```

use linext::oracle::{
    count_starting_with, enumerate_extensions, enumerate_labeled_posets, exact_count, factorial,
    forest_count,
};
use linext::Poset;

fn main() -> linext::Result<()> {
    let p = Poset::random(10, 0.2, 7);
    let count = exact_count(&p)?;
    let listed = enumerate_extensions(&p)?.len();
    println!("random n=10: {count} extensions, {listed} enumerated");

    let maxes = p.maximal_elements()?;
    for &m in &maxes {
        println!("  starting with {m}: {}", count_starting_with(&p, m)?);
    }

    // Out-tree: 0 over 1,2; 1 over 3,4; 2 over 5.
    let tree = Poset::from_relations(6, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)])?;
    println!(
        "tree: n!/prod d(v) = {}, oracle = {}",
        forest_count(&tree)?,
        exact_count(&tree)?
    );

    let blocks = Poset::from_relations(7, &[(0, 1), (1, 2), (3, 4), (3, 5)])?;
    let cc = blocks.connected_components();
    println!("components of sizes {:?}", cc.sizes);
    let mut product = factorial(blocks.len());
    for members in cc.members() {
        let mut keep = linext::bitset::BitSet::new(blocks.universe());
        for v in members {
            keep.insert(v);
        }
        let part = blocks.restricted_to(&keep);
        product /= factorial(part.len());
        product *= exact_count(&part)?.0;
    }
    println!(
        "multinomial product = {product}, oracle = {}",
        exact_count(&blocks)?
    );

    for n in 0..=5 {
        println!(
            "labeled posets on {n} elements: {}",
            enumerate_labeled_posets(n)?.count()
        );
    }
    Ok(())
}
