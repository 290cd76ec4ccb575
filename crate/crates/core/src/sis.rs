//! Sequential importance sampling over the tree of maximal-element choices.
//!
//! A single walk repeatedly takes the current set `S` of maximal elements,
//! picks `v ∈ S` with probability `r(v) / r(S)`, multiplies the estimate by
//! `r(S) / r(v)` and deletes `v`. The product is an unbiased estimate of the
//! number of linear extensions, and the probability of the produced extension
//! is exactly its reciprocal. Estimates are carried as natural logs.
//!
//! The recursive variant splits the remaining elements into connected
//! components at every level, multiplies in the multinomial number of ways to
//! interleave them, and advances each component by one selection.

use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::oracle::{forest_count_from_parents, ExactCount, Extension};
use crate::poset::Poset;
use crate::rng::{derive_seed, rng_from_seed};

/// Importance function used to weight maximal elements.
#[derive(Clone, Debug, PartialEq)]
pub enum ImportanceSpec {
    /// `r(v) = 1`: the classic Knuth estimator.
    Uniform,
    /// `r(v) = d(v)`, descendants counted including `v`.
    Descendants,
    /// Available spaces quotient, `r(v) = (i + d(v) - 1) / (i - d(v) + 1)`
    /// with `i` elements still to be placed.
    Asq,
    /// Fixed per-element weights, indexed by element.
    Table(Vec<f64>),
}

impl ImportanceSpec {
    pub const SHIPPED: [ImportanceSpec; 3] = [
        ImportanceSpec::Uniform,
        ImportanceSpec::Descendants,
        ImportanceSpec::Asq,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ImportanceSpec::Uniform => "uniform",
            ImportanceSpec::Descendants => "desc",
            ImportanceSpec::Asq => "asq",
            ImportanceSpec::Table(_) => "table",
        }
    }

    /// Importance of `v` with `d_v` descendants when `remaining` elements are
    /// left in the structure being sequenced.
    pub fn weight(&self, v: usize, d_v: usize, remaining: usize) -> Result<f64> {
        if d_v < 1 || d_v > remaining {
            return Err(Error::Domain { d: d_v, remaining });
        }
        Ok(match self {
            ImportanceSpec::Uniform => 1.0,
            ImportanceSpec::Descendants => d_v as f64,
            ImportanceSpec::Asq => (remaining + d_v - 1) as f64 / (remaining - d_v + 1) as f64,
            ImportanceSpec::Table(t) => {
                let w = *t.get(v).ok_or(Error::TableSize {
                    got: t.len(),
                    want: v + 1,
                })?;
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::NonPositiveWeight(v));
                }
                w
            }
        })
    }

    fn check_against(&self, p: &Poset) -> Result<()> {
        if let ImportanceSpec::Table(t) = self {
            if t.len() < p.universe() {
                return Err(Error::TableSize {
                    got: t.len(),
                    want: p.universe(),
                });
            }
            if let Some(v) = p
                .alive()
                .iter()
                .find(|&v| !(t[v].is_finite() && t[v] > 0.0))
            {
                return Err(Error::NonPositiveWeight(v));
            }
        }
        Ok(())
    }
}

impl FromStr for ImportanceSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(ImportanceSpec::Uniform),
            "desc" | "descendants" => Ok(ImportanceSpec::Descendants),
            "asq" => Ok(ImportanceSpec::Asq),
            other => Err(format!(
                "unknown importance `{other}` (expected uniform, desc or asq)"
            )),
        }
    }
}

/// Free-function form of [`ImportanceSpec::weight`].
pub fn importance(spec: &ImportanceSpec, v: usize, d_v: usize, remaining: usize) -> Result<f64> {
    spec.weight(v, d_v, remaining)
}

/// Natural log of one sample's estimate.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogEstimate(pub f64);

impl LogEstimate {
    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }
}

/// For every element that was not maximal at the start, the element whose
/// deletion made it maximal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledForest {
    pub parent: Vec<Option<usize>>,
    alive: Vec<bool>,
}

impl SampledForest {
    /// Exact `|Λ(F)| = n! / ∏ d_F(v)`.
    pub fn count(&self) -> ExactCount {
        forest_count_from_parents(&self.parent, &self.alive)
    }

    pub fn log_count(&self) -> f64 {
        let n = self.parent.len();
        let mut size = vec![0usize; n];
        for v in (0..n).filter(|&v| self.alive[v]) {
            let mut cur = Some(v);
            while let Some(u) = cur {
                size[u] += 1;
                cur = self.parent[u];
            }
        }
        let m = self.alive.iter().filter(|&&a| a).count();
        ln_factorial(m)
            - size
                .iter()
                .filter(|&&s| s > 0)
                .map(|&s| (s as f64).ln())
                .sum::<f64>()
    }

    /// The forest as a poset over the same universe.
    pub fn to_poset(&self) -> Poset {
        let pairs: Vec<(usize, usize)> = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|u| (u, v)))
            .collect();
        let mut p = Poset::from_relations(self.parent.len(), &pairs).expect("forest is acyclic");
        for v in (0..self.parent.len()).filter(|&v| !self.alive[v]) {
            p.delete_element(v).expect("alive in a fresh poset");
        }
        p
    }
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Lower bound `ln(n! / ∏ d(v))` on the count, and on every
/// descendants-weighted estimate.
pub fn lower_bound(p: &Poset) -> f64 {
    ln_factorial(p.len())
        - p.descendant_counts()
            .into_iter()
            .filter(|&d| d > 0)
            .map(|d| (d as f64).ln())
            .sum::<f64>()
}

/// State of one walk down the choice tree.
#[derive(Clone)]
pub(crate) struct Walk<'a> {
    poset: &'a Poset,
    spec: &'a ImportanceSpec,
    /// Descendant counts, fixed for the whole walk.
    d: Vec<usize>,
    /// Alive ancestors still undeleted.
    pending: Vec<usize>,
    /// Current maximal elements, ascending.
    maxes: Vec<usize>,
    remaining: usize,
    log_est: f64,
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
}

impl<'a> Walk<'a> {
    pub(crate) fn new(poset: &'a Poset, spec: &'a ImportanceSpec) -> Result<Self> {
        if poset.is_empty() {
            return Err(Error::EmptyPoset);
        }
        spec.check_against(poset)?;
        let pending = poset.ancestor_counts();
        let maxes = poset.maximal_elements()?;
        Ok(Self {
            poset,
            spec,
            d: poset.descendant_counts(),
            pending,
            maxes,
            remaining: poset.len(),
            log_est: 0.0,
            order: Vec::with_capacity(poset.len()),
            parent: vec![None; poset.universe()],
        })
    }

    pub(crate) fn is_done(&self) -> bool {
        self.remaining == 0
    }

    #[cfg(test)]
    pub(crate) fn maxes(&self) -> &[usize] {
        &self.maxes
    }

    pub(crate) fn weights(&self) -> Result<Vec<f64>> {
        self.maxes
            .iter()
            .map(|&v| self.spec.weight(v, self.d[v], self.remaining))
            .collect()
    }

    /// Takes `maxes[idx]` given the current weights and their sum.
    pub(crate) fn take(&mut self, idx: usize, weights: &[f64], total: f64) {
        let v = self.maxes.remove(idx);
        self.log_est += (total / weights[idx]).ln();
        self.order.push(v);
        self.remaining -= 1;
        for w in self.poset.below_row(v).iter() {
            if !self.poset.is_alive(w) {
                continue;
            }
            self.pending[w] -= 1;
            if self.pending[w] == 0 {
                self.parent[w] = Some(v);
                let at = self.maxes.binary_search(&w).unwrap_err();
                self.maxes.insert(at, w);
            }
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let weights = self.weights()?;
        let total: f64 = weights.iter().sum();
        let idx = if weights.len() == 1 {
            0
        } else {
            select(&weights, total, rng)
        };
        self.take(idx, &weights, total);
        Ok(())
    }

    /// Replays a forced choice of element `v`.
    pub(crate) fn take_element(&mut self, v: usize) -> Result<()> {
        let idx = self
            .maxes
            .binary_search(&v)
            .map_err(|_| Error::InvalidExtension(format!("{v} is not maximal when chosen")))?;
        let weights = self.weights()?;
        let total: f64 = weights.iter().sum();
        self.take(idx, &weights, total);
        Ok(())
    }

    pub(crate) fn log_estimate(&self) -> LogEstimate {
        LogEstimate(self.log_est)
    }

    fn into_extension(self) -> Extension {
        Extension { order: self.order }
    }
}

/// Cumulative scan: the first index whose running weight reaches a uniform
/// draw from `[0, total)`.
fn select<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if acc >= target {
            return i;
        }
    }
    weights.len() - 1
}

/// One non-recursive sample: the estimate and the extension it walked.
pub fn single_estimate<R: Rng + ?Sized>(
    p: &Poset,
    spec: &ImportanceSpec,
    rng: &mut R,
) -> Result<(LogEstimate, Extension)> {
    let mut walk = Walk::new(p, spec)?;
    while !walk.is_done() {
        walk.step(rng)?;
    }
    Ok((walk.log_estimate(), walk.into_extension()))
}

/// Like [`single_estimate`], also collecting the spanning forest of
/// "last ancestor deleted" edges. The third value is `ln |Λ(F)|`, an upper
/// bound on the count.
pub fn sample_with_forest<R: Rng + ?Sized>(
    p: &Poset,
    spec: &ImportanceSpec,
    rng: &mut R,
) -> Result<(LogEstimate, SampledForest, f64)> {
    let mut walk = Walk::new(p, spec)?;
    while !walk.is_done() {
        walk.step(rng)?;
    }
    let forest = SampledForest {
        parent: walk.parent.clone(),
        alive: (0..p.universe()).map(|v| p.is_alive(v)).collect(),
    };
    let upper = forest.log_count();
    Ok((walk.log_estimate(), forest, upper))
}

/// Uniformly random linear extension of a forest.
pub fn sample_forest_extension_uniform<R: Rng + ?Sized>(
    p: &Poset,
    rng: &mut R,
) -> Result<Extension> {
    if !p.is_forest() {
        return Err(Error::NotForest);
    }
    single_estimate(p, &ImportanceSpec::Descendants, rng).map(|(_, e)| e)
}

/// Alive elements of `set` reachable from `start` through comparabilities.
fn component_of(p: &Poset, set: &BitSet, start: usize) -> BitSet {
    let mut comp = BitSet::new(p.universe());
    comp.insert(start);
    let mut frontier = vec![start];
    while let Some(v) = frontier.pop() {
        for row in [p.below_row(v), p.above_row(v)] {
            for w in row.iter() {
                if set.contains(w) && comp.insert(w) {
                    frontier.push(w);
                }
            }
        }
    }
    comp
}

/// Components of `set` under comparability, ordered by smallest element.
pub(crate) fn split_components(p: &Poset, set: &BitSet) -> Vec<BitSet> {
    let mut left = set.clone();
    let mut out = Vec::new();
    while let Some(v) = left.first() {
        let comp = component_of(p, &left, v);
        left.difference_with(&comp);
        out.push(comp);
    }
    out
}

fn maxes_within(p: &Poset, set: &BitSet) -> Vec<usize> {
    set.iter()
        .filter(|&v| p.above_row(v).is_disjoint(set))
        .collect()
}

/// One sample of the recursive connected-components estimator.
pub fn recursive_estimate<R: Rng + ?Sized>(
    p: &Poset,
    spec: &ImportanceSpec,
    rng: &mut R,
) -> Result<LogEstimate> {
    if p.is_empty() {
        return Err(Error::EmptyPoset);
    }
    spec.check_against(p)?;
    let d = p.descendant_counts();
    let lnf: Vec<f64> = std::iter::once(0.0)
        .chain((1..=p.len()).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    let mut log_est = 0.0;
    let mut stack = vec![p.alive().clone()];
    while let Some(set) = stack.pop() {
        let size = set.count();
        if size <= 1 {
            continue;
        }
        let comps = split_components(p, &set);
        if comps.len() > 1 {
            log_est += lnf[size] - comps.iter().map(|c| lnf[c.count()]).sum::<f64>();
        }
        for mut comp in comps {
            let i = comp.count();
            if i == 1 {
                continue;
            }
            let maxes = maxes_within(p, &comp);
            let weights = maxes
                .iter()
                .map(|&v| spec.weight(v, d[v], i))
                .collect::<Result<Vec<f64>>>()?;
            let total: f64 = weights.iter().sum();
            let idx = if maxes.len() == 1 {
                0
            } else {
                select(&weights, total, rng)
            };
            log_est += (total / weights[idx]).ln();
            comp.remove(maxes[idx]);
            stack.push(comp);
        }
    }
    Ok(LogEstimate(log_est))
}

/// One leaf of the choice tree with its selection probability and estimate.
#[derive(Clone, Debug)]
pub struct PathOutcome {
    pub probability: f64,
    pub log_estimate: LogEstimate,
    pub extension: Extension,
}

/// Every path the non-recursive sampler can take, with its probability.
/// Exponential; meant for small posets.
pub fn enumerate_paths(p: &Poset, spec: &ImportanceSpec) -> Result<Vec<PathOutcome>> {
    let mut out = Vec::new();
    let walk = Walk::new(p, spec)?;
    descend(walk, 1.0, &mut out)?;
    Ok(out)
}

fn descend(walk: Walk<'_>, prob: f64, out: &mut Vec<PathOutcome>) -> Result<()> {
    if walk.is_done() {
        out.push(PathOutcome {
            probability: prob,
            log_estimate: walk.log_estimate(),
            extension: walk.into_extension(),
        });
        return Ok(());
    }
    let weights = walk.weights()?;
    let total: f64 = weights.iter().sum();
    for idx in 0..weights.len() {
        let mut next = walk.clone();
        next.take(idx, &weights, total);
        descend(next, prob * weights[idx] / total, out)?;
    }
    Ok(())
}

/// Full outcome distribution of [`recursive_estimate`] as
/// `(probability, log estimate)` pairs. Exponential; meant for small posets.
pub fn enumerate_recursive_outcomes(p: &Poset, spec: &ImportanceSpec) -> Result<Vec<(f64, f64)>> {
    if p.is_empty() {
        return Err(Error::EmptyPoset);
    }
    spec.check_against(p)?;
    let d = p.descendant_counts();
    recursive_outcomes(p, spec, &d, p.alive())
}

fn recursive_outcomes(
    p: &Poset,
    spec: &ImportanceSpec,
    d: &[usize],
    set: &BitSet,
) -> Result<Vec<(f64, f64)>> {
    let size = set.count();
    if size <= 1 {
        return Ok(vec![(1.0, 0.0)]);
    }
    let comps = split_components(p, set);
    let multinomial =
        ln_factorial(size) - comps.iter().map(|c| ln_factorial(c.count())).sum::<f64>();
    let mut joint = vec![(1.0, multinomial)];
    for comp in comps {
        let i = comp.count();
        let mut local = Vec::new();
        if i == 1 {
            local.push((1.0, 0.0));
        } else {
            let maxes = maxes_within(p, &comp);
            let weights = maxes
                .iter()
                .map(|&v| spec.weight(v, d[v], i))
                .collect::<Result<Vec<f64>>>()?;
            let total: f64 = weights.iter().sum();
            for (k, &v) in maxes.iter().enumerate() {
                let mut rest = comp.clone();
                rest.remove(v);
                for (q, l) in recursive_outcomes(p, spec, d, &rest)? {
                    local.push((q * weights[k] / total, l + (total / weights[k]).ln()));
                }
            }
        }
        joint = joint
            .iter()
            .flat_map(|&(pa, la)| local.iter().map(move |&(pb, lb)| (pa * pb, la + lb)))
            .collect();
    }
    Ok(joint)
}

/// Summary of a batch of samples.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchStats {
    pub samples: usize,
    /// Mean of the estimates; infinite if it overflows `f64`.
    pub mean_estimate: f64,
    /// `ln` of the mean estimate, finite even when the mean overflows.
    pub mean_log_estimate: f64,
    /// Second moment over squared mean, minus one, of the realized samples.
    pub relative_variance: f64,
    pub min_log_estimate: f64,
    pub max_log_estimate: f64,
    /// Smallest `ln |Λ(F)|` over the sampled spanning forests, when tracked.
    pub best_upper_bound_log: Option<f64>,
}

impl BatchStats {
    /// Assembles the statistics from log estimates, scaling by the largest
    /// sample so no term overflows.
    pub fn from_logs(logs: &[f64]) -> Self {
        assert!(!logs.is_empty(), "a batch needs at least one sample");
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = logs.iter().copied().fold(f64::INFINITY, f64::min);
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for &l in logs {
            let w = (l - max).exp();
            s1 += w;
            s2 += w * w;
        }
        let k = logs.len() as f64;
        let mean_log = max + (s1 / k).ln();
        let rv = (k * s2 / (s1 * s1) - 1.0).max(0.0);
        Self {
            samples: logs.len(),
            mean_estimate: mean_log.exp(),
            mean_log_estimate: mean_log,
            relative_variance: rv,
            min_log_estimate: min,
            max_log_estimate: max,
            best_upper_bound_log: None,
        }
    }

    /// Estimated standard error of the mean, from the unbiased sample
    /// variance. Zero for a single sample.
    pub fn standard_error(&self) -> f64 {
        if self.samples < 2 {
            return 0.0;
        }
        self.mean_estimate * (self.relative_variance / (self.samples as f64 - 1.0)).sqrt()
    }
}

/// `k` independent samples, sample `i` drawing from the substream
/// `derive_seed(seed, i)`. Results do not depend on the thread count. The
/// non-recursive sampler also tracks the best spanning-forest upper bound.
pub fn run_batch(
    p: &Poset,
    spec: &ImportanceSpec,
    k: usize,
    seed: u64,
    recursive: bool,
) -> Result<BatchStats> {
    assert!(k >= 1, "sample count must be positive");
    if p.is_empty() {
        return Err(Error::EmptyPoset);
    }
    let draws: Vec<(f64, Option<f64>)> = (0..k as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, i));
            if recursive {
                recursive_estimate(p, spec, &mut rng).map(|e| (e.0, None))
            } else {
                sample_with_forest(p, spec, &mut rng).map(|(e, _, ub)| (e.0, Some(ub)))
            }
        })
        .collect::<Result<_>>()?;
    let logs: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let mut stats = BatchStats::from_logs(&logs);
    stats.best_upper_bound_log = draws.iter().filter_map(|d| d.1).reduce(f64::min);
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_count, forest_count};
    use crate::poset::fixtures::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12_f64.max(1e-9 * a.abs().max(b.abs()))
    }

    #[test]
    fn importance_values() {
        let asq = ImportanceSpec::Asq;
        assert_eq!(asq.weight(A, 2, 5).unwrap(), 6.0 / 4.0);
        assert_eq!(asq.weight(B, 3, 5).unwrap(), 7.0 / 3.0);
        assert_eq!(asq.weight(C, 1, 5).unwrap(), 1.0);
        let d = n_shape_isolated().descendant_counts();
        let desc: Vec<f64> = [A, B, C]
            .iter()
            .map(|&v| ImportanceSpec::Descendants.weight(v, d[v], 5).unwrap())
            .collect();
        assert_eq!(desc, vec![2.0, 3.0, 1.0]);
        assert_eq!(ImportanceSpec::Uniform.weight(3, 2, 9).unwrap(), 1.0);
        assert!(matches!(asq.weight(0, 6, 5), Err(Error::Domain { .. })));
        assert!(matches!(asq.weight(0, 0, 5), Err(Error::Domain { .. })));
        assert!(matches!(
            ImportanceSpec::Table(vec![1.0, 0.0]).weight(1, 1, 2),
            Err(Error::NonPositiveWeight(1))
        ));
    }

    #[test]
    fn parses_spec_names() {
        assert_eq!(
            "desc".parse::<ImportanceSpec>().unwrap(),
            ImportanceSpec::Descendants
        );
        assert_eq!(
            "asq".parse::<ImportanceSpec>().unwrap(),
            ImportanceSpec::Asq
        );
        assert!("foo".parse::<ImportanceSpec>().is_err());
    }

    #[test]
    fn n_shape_uniform_path_badc_is_eight() {
        let p = n_shape();
        let spec = ImportanceSpec::Uniform;
        let mut w = Walk::new(&p, &spec).unwrap();
        for v in [B, A, D, C] {
            w.take_element(v).unwrap();
        }
        assert!(close(w.log_estimate().value(), 8.0));
    }

    #[test]
    fn n_shape_general_path_formula() {
        let p = n_shape();
        let r = [1.7, 0.4, 2.9, 0.6];
        let spec = ImportanceSpec::Table(r.to_vec());
        let mut w = Walk::new(&p, &spec).unwrap();
        for v in [B, A, D, C] {
            w.take_element(v).unwrap();
        }
        let want = (r[A] + r[B]) / r[B] * ((r[A] + r[D]) / r[A]) * ((r[C] + r[D]) / r[D]);
        assert!(close(w.log_estimate().value(), want));
    }

    #[test]
    fn n_shape_descendants_is_always_five() {
        let p = n_shape();
        let paths = enumerate_paths(&p, &ImportanceSpec::Descendants).unwrap();
        assert_eq!(paths.len(), 5);
        for path in paths {
            assert!(close(path.log_estimate.value(), 5.0));
        }
    }

    #[test]
    fn recursive_small_cases() {
        let mut rng = rng_from_seed(1);
        let two = Poset::from_relations(4, &[(0, 1), (2, 3)]).unwrap();
        for spec in ImportanceSpec::SHIPPED {
            for _ in 0..20 {
                assert!(close(
                    recursive_estimate(&two, &spec, &mut rng).unwrap().value(),
                    6.0
                ));
                assert!(close(
                    recursive_estimate(&Poset::antichain(6), &spec, &mut rng)
                        .unwrap()
                        .value(),
                    720.0
                ));
            }
        }
        assert_eq!(
            recursive_estimate(&Poset::chain(1), &ImportanceSpec::Asq, &mut rng).unwrap(),
            LogEstimate(0.0)
        );
        let mut empty = Poset::chain(1);
        empty.delete_element(0).unwrap();
        assert!(matches!(
            recursive_estimate(&empty, &ImportanceSpec::Asq, &mut rng),
            Err(Error::EmptyPoset)
        ));
        assert!(matches!(
            single_estimate(&empty, &ImportanceSpec::Asq, &mut rng),
            Err(Error::EmptyPoset)
        ));
    }

    #[test]
    fn batch_on_chain_and_n_shape() {
        let s = run_batch(&Poset::chain(9), &ImportanceSpec::Uniform, 50, 3, false).unwrap();
        assert_eq!(s.mean_estimate, 1.0);
        assert_eq!(s.relative_variance, 0.0);
        let f = run_batch(&n_shape(), &ImportanceSpec::Descendants, 200, 3, false).unwrap();
        assert!(close(f.mean_estimate, 5.0));
        assert!(f.relative_variance < 1e-12);
    }

    #[test]
    fn batch_is_deterministic() {
        let p = Poset::random(15, 0.2, 5);
        let a = run_batch(&p, &ImportanceSpec::Asq, 300, 11, true).unwrap();
        let b = run_batch(&p, &ImportanceSpec::Asq, 300, 11, true).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| run_batch(&p, &ImportanceSpec::Asq, 300, 11, true).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn stats_survive_huge_logs() {
        let s = BatchStats::from_logs(&[709.5, 709.5 + 2f64.ln()]);
        assert!(s.mean_estimate.is_infinite());
        assert!(close(s.mean_log_estimate, 709.5 + 1.5f64.ln()));
        // Samples {1, 2}: E[f^2] / E[f]^2 - 1 = 2.5 / 2.25 - 1.
        assert!(close(s.relative_variance, 2.5 / 2.25 - 1.0));
    }

    #[test]
    fn lower_bounds() {
        assert!(close(lower_bound(&n_shape()).exp(), 4.0));
        assert!(close(lower_bound(&Poset::chain(6)).exp(), 1.0));
        assert!(close(lower_bound(&Poset::antichain(6)).exp(), 720.0));
    }

    #[test]
    fn n_shape_forest_along_b_then_a() {
        let p = n_shape();
        let spec = ImportanceSpec::Descendants;
        // Find a seed whose walk starts b, a.
        let (forest, ub) = (0..200)
            .find_map(|seed| {
                let mut rng = rng_from_seed(seed);
                let mut r2 = rng_from_seed(seed);
                let (_, ext) = single_estimate(&p, &spec, &mut r2).unwrap();
                let (_, forest, ub) = sample_with_forest(&p, &spec, &mut rng).unwrap();
                (ext.order[..2] == [B, A]).then_some((forest, ub))
            })
            .unwrap();
        assert_eq!(forest.parent, vec![None, None, Some(A), Some(B)]);
        assert_eq!(forest.count(), 6u64);
        assert!(close(ub.exp(), 6.0));
    }

    #[test]
    fn forest_uniform_sampling_requires_forest() {
        let mut rng = rng_from_seed(0);
        assert!(matches!(
            sample_forest_extension_uniform(&n_shape(), &mut rng),
            Err(Error::NotForest)
        ));
        let e = sample_forest_extension_uniform(&Poset::chain(4), &mut rng).unwrap();
        assert_eq!(e.order, vec![0, 1, 2, 3]);
        let mut seen = [0usize; 2];
        for _ in 0..2000 {
            let e = sample_forest_extension_uniform(&Poset::antichain(2), &mut rng).unwrap();
            seen[e.order[0]] += 1;
        }
        assert!(seen[0] > 850 && seen[1] > 850, "{seen:?}");
    }

    fn arb_poset(max: usize) -> impl Strategy<Value = Poset> {
        (1usize..max, 0.0f64..=1.0, any::<u64>()).prop_map(|(n, p, s)| Poset::random(n, p, s))
    }

    fn arb_spec() -> impl Strategy<Value = ImportanceSpec> {
        prop_oneof![
            Just(ImportanceSpec::Uniform),
            Just(ImportanceSpec::Descendants),
            Just(ImportanceSpec::Asq),
            proptest::collection::vec(0.05f64..10.0, 24).prop_map(ImportanceSpec::Table),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn flood_fill_matches_union_find(p in arb_poset(30), drop in any::<u64>()) {
            let mut q = p.clone();
            for v in 0..q.universe() {
                if drop >> (v % 64) & 1 == 1 && v % 3 == 0 {
                    q.delete_element(v).unwrap();
                }
            }
            let mut ours: Vec<Vec<usize>> = split_components(&q, q.alive())
                .iter()
                .map(|c| c.iter().collect())
                .collect();
            let mut theirs = q.connected_components().members();
            ours.sort();
            theirs.sort();
            prop_assert_eq!(ours, theirs);
        }

        #[test]
        fn exact_expectation_is_count(p in arb_poset(8), spec in arb_spec()) {
            let l = exact_count(&p).unwrap().to_f64();
            let paths = enumerate_paths(&p, &spec).unwrap();
            prop_assert_eq!(paths.len() as f64, l);
            let mean: f64 = paths.iter().map(|o| o.probability * o.log_estimate.value()).sum();
            prop_assert!(close(mean, l), "mean {} vs {}", mean, l);
            let total_p: f64 = paths.iter().map(|o| o.probability).sum();
            prop_assert!(close(total_p, 1.0));
            for o in &paths {
                prop_assert!(close(o.probability, (-o.log_estimate.0).exp()));
                prop_assert!(o.extension.validate(&p).is_ok());
            }
        }

        #[test]
        fn recursive_expectation_is_count(p in arb_poset(8), spec in arb_spec()) {
            let l = exact_count(&p).unwrap().to_f64();
            let outcomes = enumerate_recursive_outcomes(&p, &spec).unwrap();
            let mean: f64 = outcomes.iter().map(|(q, le)| q * le.exp()).sum();
            prop_assert!(close(mean, l), "mean {} vs {}", mean, l);
        }

        #[test]
        fn uniform_factor_is_branching(p in arb_poset(20), seed in any::<u64>()) {
            let spec = ImportanceSpec::Uniform;
            let mut rng = rng_from_seed(seed);
            let mut walk = Walk::new(&p, &spec).unwrap();
            let mut knuth = 0.0;
            while !walk.is_done() {
                knuth += (walk.maxes().len() as f64).ln();
                walk.step(&mut rng).unwrap();
            }
            prop_assert!(close(walk.log_estimate().0, knuth));
        }

        #[test]
        fn descendant_samples_respect_bounds(p in arb_poset(12), seed in any::<u64>()) {
            let spec = ImportanceSpec::Descendants;
            let mut rng = rng_from_seed(seed);
            let exact = exact_count(&p).unwrap();
            let lb = lower_bound(&p);
            prop_assert!(lb <= exact.ln() + 1e-9);
            let (est, forest, ub) = sample_with_forest(&p, &spec, &mut rng).unwrap();
            prop_assert!(lb <= est.0 + 1e-9);
            prop_assert!(forest.count() >= exact);
            prop_assert!(close(ub, forest.count().ln()));
            // forest edges are relations of p, roots are the original maxes
            let maxes = p.maximal_elements().unwrap();
            for v in 0..p.universe() {
                match forest.parent[v] {
                    Some(u) => prop_assert!(p.greater(u, v)),
                    None => prop_assert!(maxes.contains(&v)),
                }
            }
        }

        #[test]
        fn forests_have_zero_variance(n in 1usize..14, seed in any::<u64>()) {
            // random forest: each node picks a parent among earlier nodes or none
            let mut rng = rng_from_seed(seed);
            let pairs: Vec<(usize, usize)> = (1..n)
                .filter_map(|v| {
                    let k = rand::Rng::random_range(&mut rng, 0..=v);
                    (k < v).then_some((k, v))
                })
                .collect();
            let p = Poset::from_relations(n, &pairs).unwrap();
            prop_assert!(p.is_forest());
            let count = forest_count(&p).unwrap();
            let (est, forest, _) = sample_with_forest(&p, &ImportanceSpec::Descendants, &mut rng).unwrap();
            prop_assert!(close(est.0, count.ln()));
            prop_assert!(close(est.0, lower_bound(&p)));
            prop_assert_eq!(forest.to_poset(), p.transitive_reduction().closure().unwrap());
            prop_assert_eq!(forest.count(), count);
        }

        #[test]
        fn caller_poset_is_untouched(p in arb_poset(20), spec in arb_spec(), seed in any::<u64>()) {
            let before = p.clone();
            let mut rng = rng_from_seed(seed);
            let (_, ext) = single_estimate(&p, &spec, &mut rng).unwrap();
            prop_assert!(ext.validate(&p).is_ok());
            recursive_estimate(&p, &spec, &mut rng).unwrap();
            prop_assert_eq!(p, before);
        }
    }
}
