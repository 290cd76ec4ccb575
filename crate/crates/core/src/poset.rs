//! Posets as dense strict-order closures with a liveness mask.
//!
//! Orientation: `u > v` means `u` comes before `v` in the sequences built by
//! repeatedly removing maximal elements. Row `u` of the closure holds every
//! `v` with `u > v`.

use rand::Rng;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    n: usize,
    /// `below[u]` = { v : u > v }
    below: Vec<BitSet>,
    /// `above[v]` = { u : u > v }
    above: Vec<BitSet>,
    alive: BitSet,
}

/// Cover edges `(u, v)`, `u` covering `v`, over alive elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverDag {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPartition {
    /// `assignment[v]` is the component id of alive `v`, `None` for deleted.
    pub assignment: Vec<Option<usize>>,
    pub sizes: Vec<usize>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Members of each component, in increasing element order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.sizes.len()];
        for (v, c) in self.assignment.iter().enumerate() {
            if let Some(c) = c {
                out[*c].push(v);
            }
        }
        out
    }
}

impl Poset {
    /// Builds the transitive closure of `pairs`, each `(above, below)`.
    pub fn from_relations(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut below = vec![BitSet::new(n); n];
        for &(u, v) in pairs {
            for index in [u, v] {
                if index >= n {
                    return Err(Error::Index { index, n });
                }
            }
            if u == v {
                return Err(Error::Cycle(u));
            }
            below[u].insert(v);
        }
        // Warshall over bit rows.
        for k in 0..n {
            let row_k = below[k].clone();
            for row in below.iter_mut() {
                if row.contains(k) {
                    row.union_with(&row_k);
                }
            }
        }
        if let Some(v) = (0..n).find(|&v| below[v].contains(v)) {
            return Err(Error::Cycle(v));
        }
        Ok(Self::from_closed_rows(below))
    }

    fn from_closed_rows(below: Vec<BitSet>) -> Self {
        let n = below.len();
        let mut above = vec![BitSet::new(n); n];
        for (u, row) in below.iter().enumerate() {
            for v in row.iter() {
                above[v].insert(u);
            }
        }
        Self {
            n,
            below,
            above,
            alive: BitSet::full(n),
        }
    }

    pub fn antichain(n: usize) -> Self {
        Self::from_closed_rows(vec![BitSet::new(n); n])
    }

    /// `0 > 1 > … > n-1`.
    pub fn chain(n: usize) -> Self {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_relations(n, &pairs).expect("a chain is acyclic")
    }

    /// Random order on labels `0..n`: each pair `i < j` independently gets
    /// `i > j` with probability `edge_prob`, then the result is closed.
    pub fn random(n: usize, edge_prob: f64, seed: u64) -> Self {
        assert!(
            (0.0..=1.0).contains(&edge_prob),
            "edge probability {edge_prob} outside [0, 1]"
        );
        let mut rng = rng_from_seed(seed);
        let mut direct = vec![BitSet::new(n); n];
        for (i, row) in direct.iter_mut().enumerate() {
            for j in i + 1..n {
                if rng.random::<f64>() < edge_prob {
                    row.insert(j);
                }
            }
        }
        // Labels are already a linear extension, so close from the bottom up.
        let mut below = vec![BitSet::new(n); n];
        for i in (0..n).rev() {
            let mut row = direct[i].clone();
            for j in direct[i].iter() {
                row.union_with(&below[j]);
            }
            below[i] = row;
        }
        Self::from_closed_rows(below)
    }

    /// Size of the element universe, including deleted elements.
    #[inline]
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.alive.count()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    #[inline]
    pub fn is_alive(&self, v: usize) -> bool {
        self.alive.contains(v)
    }

    pub fn alive(&self) -> &BitSet {
        &self.alive
    }

    /// `u > v` with both alive.
    pub fn greater(&self, u: usize, v: usize) -> bool {
        self.is_alive(u) && self.is_alive(v) && self.below[u].contains(v)
    }

    /// Closure row of `u` (ignores liveness).
    pub(crate) fn below_row(&self, u: usize) -> &BitSet {
        &self.below[u]
    }

    /// Closure column of `v` (ignores liveness).
    pub(crate) fn above_row(&self, v: usize) -> &BitSet {
        &self.above[v]
    }

    /// All alive `(u, v)` with `u > v`.
    pub fn relations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in self.alive.iter() {
            for v in self.below[u].iter() {
                if self.alive.contains(v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn transitive_reduction(&self) -> CoverDag {
        let mut edges = Vec::new();
        for u in self.alive.iter() {
            let mut strict = self.below[u].clone();
            strict.intersect_with(&self.alive);
            let mut skipped = BitSet::new(self.n);
            for w in strict.iter() {
                skipped.union_with(&self.below[w]);
            }
            let mut covers = strict;
            covers.difference_with(&skipped);
            edges.extend(covers.iter().map(|v| (u, v)));
        }
        CoverDag { n: self.n, edges }
    }

    pub fn maximal_elements(&self) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::EmptyPoset);
        }
        Ok(self
            .alive
            .iter()
            .filter(|&v| self.above[v].is_disjoint(&self.alive))
            .collect())
    }

    /// `d(v)`: alive elements at or below `v`, counting `v`. Zero for deleted
    /// elements.
    pub fn descendant_counts(&self) -> Vec<usize> {
        (0..self.n)
            .map(|v| {
                if self.is_alive(v) {
                    1 + self.below[v].intersection_count(&self.alive)
                } else {
                    0
                }
            })
            .collect()
    }

    /// `a(v)`: alive elements strictly above `v`.
    pub fn ancestor_counts(&self) -> Vec<usize> {
        (0..self.n)
            .map(|v| {
                if self.is_alive(v) {
                    self.above[v].intersection_count(&self.alive)
                } else {
                    0
                }
            })
            .collect()
    }

    pub fn delete_element(&mut self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::Index {
                index: v,
                n: self.n,
            });
        }
        if !self.alive.remove(v) {
            return Err(Error::AlreadyDeleted(v));
        }
        Ok(())
    }

    /// Copy whose alive set is `self.alive ∩ keep`.
    pub fn restricted_to(&self, keep: &BitSet) -> Poset {
        let mut p = self.clone();
        p.alive.intersect_with(keep);
        p
    }

    /// Renumbers alive elements to `0..len()` in increasing order. Returns the
    /// new poset and `old_index[new]`.
    pub fn compact(&self) -> (Poset, Vec<usize>) {
        let old: Vec<usize> = self.alive.iter().collect();
        let mut new_of = vec![usize::MAX; self.n];
        for (i, &v) in old.iter().enumerate() {
            new_of[v] = i;
        }
        let m = old.len();
        let mut below = vec![BitSet::new(m); m];
        for (i, &u) in old.iter().enumerate() {
            for v in self.below[u].iter() {
                if new_of[v] != usize::MAX {
                    below[i].insert(new_of[v]);
                }
            }
        }
        (Poset::from_closed_rows(below), old)
    }

    /// Components of the undirected cover graph on alive elements, via
    /// union-find. Ids are assigned in order of each component's smallest
    /// element.
    pub fn connected_components(&self) -> ComponentPartition {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (u, v) in self.transitive_reduction().edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut assignment = vec![None; self.n];
        let mut id_of_root = vec![usize::MAX; self.n];
        let mut sizes = Vec::new();
        for v in self.alive.iter() {
            let root = find(&mut parent, v);
            if id_of_root[root] == usize::MAX {
                id_of_root[root] = sizes.len();
                sizes.push(0);
            }
            let id = id_of_root[root];
            assignment[v] = Some(id);
            sizes[id] += 1;
        }
        ComponentPartition { assignment, sizes }
    }

    /// Every alive element is covered by at most one alive element.
    pub fn is_forest(&self) -> bool {
        let mut covered_by = vec![0usize; self.n];
        for (_, v) in self.transitive_reduction().edges {
            covered_by[v] += 1;
            if covered_by[v] > 1 {
                return false;
            }
        }
        true
    }
}

impl CoverDag {
    /// Re-closes the cover edges.
    pub fn closure(&self) -> Result<Poset> {
        Poset::from_relations(self.n, &self.edges)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Poset;

    pub const A: usize = 0;
    pub const B: usize = 1;
    pub const C: usize = 2;
    pub const D: usize = 3;
    pub const E: usize = 4;

    /// a > c, b > c, b > d.
    pub fn n_shape() -> Poset {
        Poset::from_relations(4, &[(A, C), (B, C), (B, D)]).unwrap()
    }

    /// a > d, b > d, b > e, c isolated.
    pub fn n_shape_isolated() -> Poset {
        Poset::from_relations(5, &[(A, D), (B, D), (B, E)]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn sorted(mut v: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
        v.sort_unstable();
        v
    }

    #[test]
    fn n_shape_closure_is_already_closed() {
        assert_eq!(sorted(n_shape().relations()), vec![(A, C), (B, C), (B, D)]);
    }

    #[test]
    fn chain_closure_adds_transitive_pair() {
        let p = Poset::from_relations(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(sorted(p.relations()), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn two_cycle_rejected() {
        assert!(matches!(
            Poset::from_relations(2, &[(0, 1), (1, 0)]),
            Err(Error::Cycle(_))
        ));
        assert!(matches!(
            Poset::from_relations(2, &[(0, 0)]),
            Err(Error::Cycle(0))
        ));
        assert!(matches!(
            Poset::from_relations(2, &[(0, 2)]),
            Err(Error::Index { index: 2, n: 2 })
        ));
    }

    #[test]
    fn reductions() {
        let chain = Poset::from_relations(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(
            sorted(chain.transitive_reduction().edges),
            vec![(0, 1), (1, 2)]
        );
        assert_eq!(
            sorted(n_shape().transitive_reduction().edges),
            vec![(A, C), (B, C), (B, D)]
        );
        assert!(Poset::antichain(5).transitive_reduction().edges.is_empty());
    }

    #[test]
    fn maximal_sets() {
        assert_eq!(n_shape().maximal_elements().unwrap(), vec![A, B]);
        assert_eq!(
            n_shape_isolated().maximal_elements().unwrap(),
            vec![A, B, C]
        );
        assert_eq!(
            Poset::antichain(4).maximal_elements().unwrap(),
            vec![0, 1, 2, 3]
        );
        let mut p = Poset::chain(1);
        p.delete_element(0).unwrap();
        assert!(matches!(p.maximal_elements(), Err(Error::EmptyPoset)));
    }

    #[test]
    fn descendant_and_ancestor_counts() {
        let d = n_shape_isolated().descendant_counts();
        assert_eq!((d[A], d[B], d[C]), (2, 3, 1));
        assert_eq!(n_shape().descendant_counts(), vec![2, 3, 1, 1]);
        assert_eq!(Poset::chain(4).descendant_counts(), vec![4, 3, 2, 1]);
        assert_eq!(n_shape().ancestor_counts(), vec![0, 0, 2, 1]);
        assert_eq!(Poset::antichain(3).ancestor_counts(), vec![0, 0, 0]);
        assert_eq!(Poset::chain(3).ancestor_counts(), vec![0, 1, 2]);
    }

    #[test]
    fn deletion() {
        let mut p = n_shape();
        p.delete_element(B).unwrap();
        assert_eq!(p.maximal_elements().unwrap(), vec![A, D]);
        assert!(matches!(p.delete_element(B), Err(Error::AlreadyDeleted(B))));
        assert!(!p.greater(B, D));

        let mut c = Poset::chain(3);
        c.delete_element(0).unwrap();
        assert_eq!(c.maximal_elements().unwrap(), vec![1]);

        let mut s = Poset::chain(1);
        s.delete_element(0).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn components() {
        let cc = n_shape_isolated().connected_components();
        assert_eq!(cc.members(), vec![vec![A, B, D, E], vec![C]]);
        let two = Poset::from_relations(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(two.connected_components().sizes, vec![2, 2]);
        assert_eq!(n_shape().connected_components().sizes, vec![4]);
    }

    #[test]
    fn random_extremes() {
        assert!(Poset::random(10, 0.0, 1).relations().is_empty());
        let full = Poset::random(10, 1.0, 1);
        assert_eq!(full.relations().len(), 45);
        assert_eq!(full, Poset::chain(10));
        assert_eq!(Poset::random(10, 0.2, 99), Poset::random(10, 0.2, 99));
    }

    #[test]
    fn forests() {
        assert!(!n_shape().is_forest());
        assert!(Poset::chain(5).is_forest());
        assert!(Poset::antichain(5).is_forest());
        let tree =
            Poset::from_relations(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]).unwrap();
        assert!(tree.is_forest());
    }

    #[test]
    fn compact_renumbers() {
        let mut p = n_shape();
        p.delete_element(A).unwrap();
        let (q, old) = p.compact();
        assert_eq!(old, vec![B, C, D]);
        assert_eq!(sorted(q.relations()), vec![(0, 1), (0, 2)]);
    }

    fn arb_poset() -> impl Strategy<Value = Poset> {
        (1usize..24, 0.0f64..=1.0, any::<u64>()).prop_map(|(n, p, s)| Poset::random(n, p, s))
    }

    proptest! {
        #[test]
        fn closure_is_idempotent(p in arb_poset()) {
            let again = Poset::from_relations(p.universe(), &p.relations()).unwrap();
            prop_assert_eq!(again, p);
        }

        #[test]
        fn reduction_recloses(p in arb_poset()) {
            prop_assert_eq!(p.transitive_reduction().closure().unwrap(), p);
        }

        #[test]
        fn relation_is_strict_order(p in arb_poset()) {
            let n = p.universe();
            for u in 0..n {
                prop_assert!(!p.greater(u, u));
                for v in 0..n {
                    prop_assert!(!(p.greater(u, v) && p.greater(v, u)));
                    for w in 0..n {
                        if p.greater(u, v) && p.greater(v, w) {
                            prop_assert!(p.greater(u, w));
                        }
                    }
                }
            }
        }

        #[test]
        fn maximal_deletion_keeps_descendant_counts(p in arb_poset(), pick in any::<usize>()) {
            let before = p.descendant_counts();
            let before_anc = p.ancestor_counts();
            let maxes = p.maximal_elements().unwrap();
            let m = maxes[pick % maxes.len()];
            let mut q = p.clone();
            q.delete_element(m).unwrap();
            let after = q.descendant_counts();
            for v in 0..p.universe() {
                if v != m {
                    prop_assert_eq!(before[v], after[v]);
                }
            }
            if !q.is_empty() {
                let mut expected: Vec<usize> = maxes.iter().copied().filter(|&v| v != m).collect();
                expected.extend((0..p.universe()).filter(|&v| before_anc[v] == 1 && p.greater(m, v)));
                expected.sort_unstable();
                prop_assert_eq!(q.maximal_elements().unwrap(), expected);
            }
        }

        #[test]
        fn components_partition_alive(p in arb_poset()) {
            let cc = p.connected_components();
            prop_assert_eq!(cc.sizes.iter().sum::<usize>(), p.len());
            for (u, v) in p.relations() {
                prop_assert_eq!(cc.assignment[u], cc.assignment[v]);
            }
        }
    }
}
