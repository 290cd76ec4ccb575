//! Exact relative variance of the non-recursive estimator on small posets.
//!
//! Two independent evaluations are provided. [`rv_explicit`] sums the
//! per-extension estimates over the full list of extensions, using
//! `RV + 1 = Σ_λ f(λ) / L²`. [`rv_recursive`] instead recurses over maximal
//! elements, `RV(P) + 1 = r(M)/L² · Σ_m L_m²/r(m) · (RV(P∖m) + 1)`,
//! memoized on the remaining set. [`level_bound`] computes the per-size
//! constants `A_i` whose product bounds `RV + 1`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::oracle::{
    enumerate_extensions, enumerate_labeled_posets, exact_count, DownsetCounter, Extension,
    OracleLimits,
};
use crate::poset::Poset;
use crate::sis::{run_batch, ImportanceSpec, LogEstimate, Walk};

/// Absolute 1e-12 or relative 1e-9, whichever is looser.
pub fn within_tolerance(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12_f64.max(1e-9 * a.abs().max(b.abs()))
}

/// `ln Σ exp(x)`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Replays the sampler along `ext` and returns `ln f(ext)`.
pub fn estimate_for_extension(
    p: &Poset,
    spec: &ImportanceSpec,
    ext: &Extension,
) -> Result<LogEstimate> {
    ext.validate(p)?;
    let mut walk = Walk::new(p, spec)?;
    for &v in &ext.order {
        walk.take_element(v)?;
    }
    Ok(walk.log_estimate())
}

/// `⟨f(λ)/L⟩ − 1` over the uniform distribution on extensions.
pub fn rv_explicit(p: &Poset, spec: &ImportanceSpec) -> Result<f64> {
    let exts = enumerate_extensions(p)?;
    let logs = exts
        .iter()
        .map(|e| estimate_for_extension(p, spec, e).map(|l| l.0))
        .collect::<Result<Vec<f64>>>()?;
    let ln_l = (exts.len() as f64).ln();
    Ok((log_sum_exp(&logs) - 2.0 * ln_l).exp() - 1.0)
}

/// Evaluates the recursion with the importance of maximal element `m` in
/// the remaining set supplied by `weight(counter, remaining, m)`. Elements
/// are the counter's compact indices; `remaining` is a bitmask over them.
pub fn rv_recursive_by<F>(p: &Poset, mut weight: F) -> Result<f64>
where
    F: FnMut(&mut DownsetCounter, u64, usize) -> Result<f64>,
{
    if p.is_empty() {
        return Err(Error::EmptyPoset);
    }
    let mut counter = DownsetCounter::new(p, &OracleLimits::default())?;
    let mut memo = HashMap::new();
    let full = counter.full_mask();
    Ok(second_moment_ratio(&mut counter, &mut memo, full, &mut weight)? - 1.0)
}

/// `RV(S) + 1`.
fn second_moment_ratio<F>(
    counter: &mut DownsetCounter,
    memo: &mut HashMap<u64, f64>,
    remaining: u64,
    weight: &mut F,
) -> Result<f64>
where
    F: FnMut(&mut DownsetCounter, u64, usize) -> Result<f64>,
{
    if remaining.count_ones() <= 1 {
        return Ok(1.0);
    }
    if let Some(&g) = memo.get(&remaining) {
        return Ok(g);
    }
    let ln_l = ln_count(counter, remaining)?;
    let maxes: Vec<usize> = counter.maximal_in(remaining).collect();
    let mut weights = Vec::with_capacity(maxes.len());
    for &m in &maxes {
        weights.push(weight(counter, remaining, m)?);
    }
    let r_total: f64 = weights.iter().sum();
    let mut sum = 0.0;
    for (&m, &r) in maxes.iter().zip(&weights) {
        let rest = remaining & !(1 << m);
        let ratio = (ln_count(counter, rest)? - ln_l).exp();
        sum += ratio * ratio / r * second_moment_ratio(counter, memo, rest, weight)?;
    }
    let g = r_total * sum;
    memo.insert(remaining, g);
    Ok(g)
}

fn ln_count(counter: &mut DownsetCounter, remaining: u64) -> Result<f64> {
    Ok(crate::oracle::ln_big(&counter.count(remaining)?))
}

/// Compact-index descendant counts of `p` within the remaining mask.
fn descendants_within(counter: &DownsetCounter, m: usize, remaining: u64, p: &Poset) -> usize {
    let orig = counter.original(m);
    1 + (0..64)
        .filter(|&i| remaining >> i & 1 == 1 && i != m)
        .filter(|&i| p.greater(orig, counter.original(i)))
        .count()
}

/// Recursive evaluation of the relative variance for a shipped or table
/// importance.
pub fn rv_recursive(p: &Poset, spec: &ImportanceSpec) -> Result<f64> {
    rv_recursive_by(p, |counter, remaining, m| {
        let d = descendants_within(counter, m, remaining, p);
        spec.weight(counter.original(m), d, remaining.count_ones() as usize)
    })
}

/// `A_i` for one size and importance, with the poset and maximal element
/// attaining it.
#[derive(Clone, Debug)]
pub struct LevelBound {
    pub size: usize,
    pub a_i: f64,
    pub witness: Poset,
    pub witness_element: usize,
}

/// Maximizes `r(M)/r(m) · L_m/L` over every labeled poset of size `i` and
/// each of its maximal elements.
pub fn level_bound(i: usize, spec: &ImportanceSpec) -> Result<LevelBound> {
    let mut best: Option<LevelBound> = None;
    for p in enumerate_labeled_posets(i)? {
        if i == 0 {
            break;
        }
        let mut counter = DownsetCounter::new(&p, &OracleLimits::default())?;
        let full = counter.full_mask();
        let ln_l = ln_count(&mut counter, full)?;
        let d = p.descendant_counts();
        let maxes = p.maximal_elements()?;
        let weights = maxes
            .iter()
            .map(|&m| spec.weight(m, d[m], i))
            .collect::<Result<Vec<f64>>>()?;
        let r_total: f64 = weights.iter().sum();
        for (&m, &r) in maxes.iter().zip(&weights) {
            let rest = full & !(1 << counter.compact_index(m).expect("alive"));
            let value = r_total / r * (ln_count(&mut counter, rest)? - ln_l).exp();
            if best.as_ref().is_none_or(|b| value > b.a_i) {
                best = Some(LevelBound {
                    size: i,
                    a_i: value,
                    witness: p.clone(),
                    witness_element: m,
                });
            }
        }
    }
    best.ok_or(Error::EmptyPoset)
}

/// `A_1, …, A_k` for one importance.
#[derive(Clone, Debug)]
pub struct ProductBound {
    pub levels: Vec<LevelBound>,
}

impl ProductBound {
    pub fn new(spec: &ImportanceSpec, max_size: usize) -> Result<Self> {
        let levels = (1..=max_size)
            .map(|i| level_bound(i, spec))
            .collect::<Result<_>>()?;
        Ok(Self { levels })
    }

    /// `A_1 ⋯ A_n − 1`.
    pub fn rv_bound(&self, n: usize) -> Result<f64> {
        if n > self.levels.len() {
            return Err(Error::SizeLimit {
                what: "poset size",
                actual: n as u128,
                limit: self.levels.len() as u128,
            });
        }
        Ok(self.levels[..n].iter().map(|l| l.a_i).product::<f64>() - 1.0)
    }

    pub fn holds_for(&self, p: &Poset, spec: &ImportanceSpec) -> Result<bool> {
        let bound = self.rv_bound(p.len())?;
        Ok(rv_explicit(p, spec)? <= bound + 1e-9)
    }
}

/// Checks `RV(P) ≤ A_1 ⋯ A_n − 1` for a poset of at most five elements,
/// computing the constants from scratch.
pub fn check_product_bound(p: &Poset, spec: &ImportanceSpec) -> Result<bool> {
    let limit = OracleLimits::default().max_labeled_size;
    if p.len() > limit {
        return Err(Error::SizeLimit {
            what: "poset size",
            actual: p.len() as u128,
            limit: limit as u128,
        });
    }
    ProductBound::new(spec, p.len())?.holds_for(p, spec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RvReport {
    pub label: String,
    pub spec: String,
    pub rv_explicit: Option<f64>,
    pub rv_recursive: Option<f64>,
    pub empirical_rv: Option<f64>,
    pub samples: usize,
}

impl RvReport {
    pub const CSV_HEADER: &'static str =
        "poset,spec,rv_explicit,rv_recursive,difference,empirical_rv,samples";

    /// Exact values only.
    pub fn exact(label: &str, p: &Poset, spec: &ImportanceSpec) -> Result<Self> {
        Ok(Self {
            label: label.to_owned(),
            spec: spec.name().to_owned(),
            rv_explicit: Some(rv_explicit(p, spec)?),
            rv_recursive: Some(rv_recursive(p, spec)?),
            empirical_rv: None,
            samples: 0,
        })
    }

    pub fn difference(&self) -> Option<f64> {
        Some(self.rv_explicit? - self.rv_recursive?)
    }

    pub fn csv_row(&self) -> String {
        let f = |x: Option<f64>| x.map(|v| format!("{v:.17e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.label,
            self.spec,
            f(self.rv_explicit),
            f(self.rv_recursive),
            f(self.difference()),
            f(self.empirical_rv),
            self.samples
        )
    }
}

/// Empirical relative variance of a `k`-sample batch, paired with the exact
/// values when the poset is small enough for the oracle.
pub fn empirical_rv_convergence(
    p: &Poset,
    spec: &ImportanceSpec,
    k: usize,
    seed: u64,
) -> Result<RvReport> {
    let stats = run_batch(p, spec, k, seed, false)?;
    let exact = exact_count(p)
        .ok()
        .filter(|c| c.to_f64() <= OracleLimits::default().max_extensions as f64);
    let (rv_e, rv_r) = match exact {
        Some(_) => (Some(rv_explicit(p, spec)?), Some(rv_recursive(p, spec)?)),
        None => (None, None),
    };
    Ok(RvReport {
        label: String::new(),
        spec: spec.name().to_owned(),
        rv_explicit: rv_e,
        rv_recursive: rv_r,
        empirical_rv: Some(stats.relative_variance),
        samples: k,
    })
}
