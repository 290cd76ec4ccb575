//! Exact ground truth: linear-extension counts by downset dynamic
//! programming, full enumeration for tiny posets, the closed-form count for
//! forests, and exhaustive enumeration of labeled posets.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poset::Poset;

/// Exact number of linear extensions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactCount(pub BigUint);

impl ExactCount {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Nearest `f64`; infinite past `f64::MAX`.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Natural log, accurate even when the value overflows `f64`.
    pub fn ln(&self) -> f64 {
        ln_big(&self.0)
    }
}

pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        x.to_f64().unwrap().ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

impl fmt::Display for ExactCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for ExactCount {
    fn from(v: u64) -> Self {
        ExactCount(BigUint::from(v))
    }
}

impl PartialEq<u64> for ExactCount {
    fn eq(&self, other: &u64) -> bool {
        self.0 == BigUint::from(*other)
    }
}

/// A linear extension, first-chosen (maximal) element first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Extension {
    pub order: Vec<usize>,
}

impl Extension {
    /// Checks that `order` is a permutation of the alive elements of `p` with
    /// every `u > v` placing `u` first.
    pub fn validate(&self, p: &Poset) -> Result<()> {
        let mut pos = vec![usize::MAX; p.universe()];
        for (i, &v) in self.order.iter().enumerate() {
            if v >= p.universe() || !p.is_alive(v) {
                return Err(Error::InvalidExtension(format!("{v} is not an element")));
            }
            if pos[v] != usize::MAX {
                return Err(Error::InvalidExtension(format!("{v} repeated")));
            }
            pos[v] = i;
        }
        if self.order.len() != p.len() {
            return Err(Error::InvalidExtension(format!(
                "{} of {} elements placed",
                self.order.len(),
                p.len()
            )));
        }
        for (u, v) in p.relations() {
            if pos[u] > pos[v] {
                return Err(Error::InvalidExtension(format!("{v} placed before {u}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    /// Alive elements accepted by the counting DP (hard cap 64).
    pub max_elements: usize,
    /// Memoized downsets before giving up.
    pub max_states: usize,
    /// Extensions accepted by full enumeration.
    pub max_extensions: u64,
    /// Size accepted by labeled poset enumeration.
    pub max_labeled_size: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_elements: 24,
            max_states: 1 << 22,
            max_extensions: 1_000_000,
            max_labeled_size: 5,
        }
    }
}

/// Memoized `L(S) = Σ_{m maximal in S} L(S \ m)` over remaining sets `S`,
/// which are always downsets of the compacted poset.
pub struct DownsetCounter {
    /// `above[i]`: bitmask of compact elements strictly above `i`.
    above: Vec<u64>,
    /// Original element for each compact index.
    original: Vec<usize>,
    memo: HashMap<u64, BigUint>,
    max_states: usize,
}

impl DownsetCounter {
    pub fn new(p: &Poset, limits: &OracleLimits) -> Result<Self> {
        let m = p.len();
        let cap = limits.max_elements.min(64);
        if m > cap {
            return Err(Error::SizeLimit {
                what: "elements",
                actual: m as u128,
                limit: cap as u128,
            });
        }
        let (q, original) = p.compact();
        let above = (0..m)
            .map(|v| {
                (0..m)
                    .filter(|&u| q.greater(u, v))
                    .fold(0u64, |acc, u| acc | 1 << u)
            })
            .collect();
        Ok(Self {
            above,
            original,
            memo: HashMap::new(),
            max_states: limits.max_states,
        })
    }

    pub fn full_mask(&self) -> u64 {
        match self.above.len() {
            64 => !0,
            m => (1u64 << m) - 1,
        }
    }

    /// Compact index of original element `v`.
    pub fn compact_index(&self, v: usize) -> Option<usize> {
        self.original.iter().position(|&o| o == v)
    }

    pub fn original(&self, i: usize) -> usize {
        self.original[i]
    }

    /// Maximal compact elements of the remaining set.
    pub fn maximal_in(&self, remaining: u64) -> impl Iterator<Item = usize> + '_ {
        (0..self.above.len())
            .filter(move |&i| remaining >> i & 1 == 1 && self.above[i] & remaining == 0)
    }

    pub fn count(&mut self, remaining: u64) -> Result<BigUint> {
        if remaining.count_ones() <= 1 {
            return Ok(BigUint::one());
        }
        if let Some(c) = self.memo.get(&remaining) {
            return Ok(c.clone());
        }
        let mut total = BigUint::zero();
        let maxes: Vec<usize> = self.maximal_in(remaining).collect();
        for i in maxes {
            total += self.count(remaining & !(1 << i))?;
        }
        if self.memo.len() >= self.max_states {
            return Err(Error::SizeLimit {
                what: "memoized downsets",
                actual: self.memo.len() as u128 + 1,
                limit: self.max_states as u128,
            });
        }
        self.memo.insert(remaining, total.clone());
        Ok(total)
    }
}

pub fn exact_count(p: &Poset) -> Result<ExactCount> {
    exact_count_with(p, &OracleLimits::default())
}

pub fn exact_count_with(p: &Poset, limits: &OracleLimits) -> Result<ExactCount> {
    if p.is_empty() {
        return Ok(ExactCount(BigUint::one()));
    }
    let mut dp = DownsetCounter::new(p, limits)?;
    let full = dp.full_mask();
    dp.count(full).map(ExactCount)
}

pub fn enumerate_extensions(p: &Poset) -> Result<Vec<Extension>> {
    enumerate_extensions_with(p, &OracleLimits::default())
}

pub fn enumerate_extensions_with(p: &Poset, limits: &OracleLimits) -> Result<Vec<Extension>> {
    let total = exact_count_with(p, limits)?;
    if total.0 > BigUint::from(limits.max_extensions) {
        return Err(Error::SizeLimit {
            what: "linear extensions",
            actual: total.0.to_u128().unwrap_or(u128::MAX),
            limit: limits.max_extensions as u128,
        });
    }
    let mut out = Vec::with_capacity(total.to_f64() as usize);
    let mut prefix = Vec::with_capacity(p.len());
    let mut work = p.clone();
    extend_all(&mut work, &mut prefix, &mut out);
    Ok(out)
}

fn extend_all(p: &mut Poset, prefix: &mut Vec<usize>, out: &mut Vec<Extension>) {
    if p.is_empty() {
        out.push(Extension {
            order: prefix.clone(),
        });
        return;
    }
    for m in p.maximal_elements().expect("nonempty") {
        let mut next = p.clone();
        next.delete_element(m).expect("alive");
        prefix.push(m);
        extend_all(&mut next, prefix, out);
        prefix.pop();
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// `n! / ∏ d(v)` for a forest.
pub fn forest_count(p: &Poset) -> Result<ExactCount> {
    if !p.is_forest() {
        return Err(Error::NotForest);
    }
    let denom = p
        .descendant_counts()
        .into_iter()
        .filter(|&d| d > 0)
        .fold(BigUint::one(), |acc, d| acc * d as u64);
    Ok(ExactCount(factorial(p.len()) / denom))
}

/// `n! / ∏ subtree(v)` for a forest given as parent links over the alive
/// elements of a universe of `parent.len()`.
pub fn forest_count_from_parents(parent: &[Option<usize>], alive: &[bool]) -> ExactCount {
    let n = parent.len();
    let mut size = vec![0u64; n];
    for v in (0..n).filter(|&v| alive[v]) {
        let mut cur = Some(v);
        let mut steps = 0;
        while let Some(u) = cur {
            size[u] += 1;
            cur = parent[u];
            steps += 1;
            assert!(steps <= n, "parent links contain a cycle");
        }
    }
    let m = alive.iter().filter(|&&a| a).count();
    let denom = size
        .iter()
        .filter(|&&s| s > 0)
        .fold(BigUint::one(), |acc, &s| acc * s);
    ExactCount(factorial(m) / denom)
}

/// `L_m`: extensions of `p` that begin with maximal element `m`.
pub fn count_starting_with(p: &Poset, m: usize) -> Result<ExactCount> {
    if m >= p.universe() || !p.is_alive(m) {
        return Err(Error::NotMaximal(m));
    }
    if !p.maximal_elements()?.contains(&m) {
        return Err(Error::NotMaximal(m));
    }
    let mut q = p.clone();
    q.delete_element(m)?;
    exact_count(&q)
}

/// Every labeled strict partial order on `0..n`, each exactly once.
pub fn enumerate_labeled_posets(n: usize) -> Result<LabeledPosets> {
    enumerate_labeled_posets_with(n, &OracleLimits::default())
}

pub fn enumerate_labeled_posets_with(n: usize, limits: &OracleLimits) -> Result<LabeledPosets> {
    if n > limits.max_labeled_size {
        return Err(Error::SizeLimit {
            what: "labeled poset size",
            actual: n as u128,
            limit: limits.max_labeled_size as u128,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let total = 3u64.pow(pairs.len() as u32);
    Ok(LabeledPosets {
        n,
        pairs,
        code: 0,
        total,
    })
}

/// Walks all `3^(n choose 2)` assignments of {incomparable, i > j, j > i} to
/// the unordered pairs and keeps the transitive ones.
pub struct LabeledPosets {
    n: usize,
    pairs: Vec<(usize, usize)>,
    code: u64,
    total: u64,
}

impl LabeledPosets {
    fn decode(&self, mut code: u64) -> Option<Vec<(usize, usize)>> {
        let n = self.n;
        let mut rel = vec![false; n * n];
        let mut list = Vec::new();
        for &(i, j) in &self.pairs {
            match code % 3 {
                1 => {
                    rel[i * n + j] = true;
                    list.push((i, j));
                }
                2 => {
                    rel[j * n + i] = true;
                    list.push((j, i));
                }
                _ => {}
            }
            code /= 3;
        }
        for a in 0..n {
            for b in 0..n {
                if !rel[a * n + b] {
                    continue;
                }
                for c in 0..n {
                    if rel[b * n + c] && !rel[a * n + c] {
                        return None;
                    }
                }
            }
        }
        Some(list)
    }
}

impl Iterator for LabeledPosets {
    type Item = Poset;

    fn next(&mut self) -> Option<Poset> {
        while self.code < self.total {
            let code = self.code;
            self.code += 1;
            if let Some(rel) = self.decode(code) {
                return Some(
                    Poset::from_relations(self.n, &rel).expect("transitive and antisymmetric"),
                );
            }
        }
        None
    }
}
