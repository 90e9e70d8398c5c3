//! Sentence encoder association tests: effect sizes, permutation p-values
//! and Table-style reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conceptor::Conceptor;
use crate::error::{Error, Result};
use crate::interchange::EmbeddingCollection;
use crate::linalg;

pub const DEFAULT_PERMUTATIONS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;
/// Splits at or below this count are enumerated exactly.
pub const EXACT_LIMIT: u128 = 100_000;
/// Significance level used for star marking.
pub const SIGNIFICANCE: f64 = 0.01;
/// Permutations drawn per deterministic RNG stream (`seed + chunk index`).
const CHUNK: usize = 1024;

/// Named embedding set; ids are carried for error messages.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceSet {
    pub ids: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

impl SentenceSet {
    pub fn new(ids: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != vectors.len() {
            return Err(Error::param("sentence set needs one id per vector"));
        }
        Ok(SentenceSet { ids, vectors })
    }

    /// Ids are generated as `prefix0`, `prefix1`, ….
    pub fn from_vectors(prefix: &str, vectors: Vec<Vec<f64>>) -> Self {
        let ids = (0..vectors.len()).map(|i| format!("{prefix}{i}")).collect();
        SentenceSet { ids, vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    fn dim(&self) -> Option<usize> {
        self.vectors.first().map(Vec::len)
    }

    fn unit_vectors(&self) -> Result<Vec<Vec<f64>>> {
        self.ids.iter().zip(&self.vectors).map(|(id, v)| unit(id, v)).collect()
    }

    fn mapped(&self, f: &impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<SentenceSet> {
        Ok(SentenceSet {
            ids: self.ids.clone(),
            vectors: self.vectors.iter().map(|v| f(v)).collect::<Result<_>>()?,
        })
    }
}

fn unit(id: &str, v: &[f64]) -> Result<Vec<f64>> {
    let n = linalg::norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector { id: id.to_owned() });
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// Attribute sets `A`, `A′` and target sets `T`, `T′`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeatTest {
    pub name: String,
    pub attr_a: SentenceSet,
    pub attr_b: SentenceSet,
    pub target_t: SentenceSet,
    pub target_t_prime: SentenceSet,
}

impl SeatTest {
    /// Checks non-empty sets of one dimension and `|T| = |T′|`.
    pub fn new(
        name: impl Into<String>,
        attr_a: SentenceSet,
        attr_b: SentenceSet,
        target_t: SentenceSet,
        target_t_prime: SentenceSet,
    ) -> Result<Self> {
        let name = name.into();
        let sets = [
            ("A", &attr_a),
            ("A'", &attr_b),
            ("T", &target_t),
            ("T'", &target_t_prime),
        ];
        for (label, s) in sets {
            if s.is_empty() {
                return Err(Error::data(format!("{name}: set {label} is empty")));
            }
        }
        let dim = attr_a.dim().unwrap();
        for (label, s) in sets {
            if let Some(bad) = s.vectors.iter().find(|v| v.len() != dim) {
                return Err(Error::data(format!(
                    "{name}: set {label} has a vector of length {} (expected {dim})",
                    bad.len()
                )));
            }
        }
        if target_t.len() != target_t_prime.len() {
            return Err(Error::param(format!(
                "{name}: |T| = {} but |T'| = {}; the permutation scheme needs equal sizes",
                target_t.len(),
                target_t_prime.len()
            )));
        }
        Ok(SeatTest {
            name,
            attr_a,
            attr_b,
            target_t,
            target_t_prime,
        })
    }

    pub fn dim(&self) -> usize {
        self.attr_a.vectors[0].len()
    }

    /// Swaps `T` and `T′`.
    pub fn swapped_targets(&self) -> SeatTest {
        SeatTest {
            name: self.name.clone(),
            attr_a: self.attr_a.clone(),
            attr_b: self.attr_b.clone(),
            target_t: self.target_t_prime.clone(),
            target_t_prime: self.target_t.clone(),
        }
    }

    /// Applies `f` to every vector in all four sets.
    pub fn map_vectors(&self, f: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<SeatTest> {
        Ok(SeatTest {
            name: self.name.clone(),
            attr_a: self.attr_a.mapped(&f)?,
            attr_b: self.attr_b.mapped(&f)?,
            target_t: self.target_t.mapped(&f)?,
            target_t_prime: self.target_t_prime.mapped(&f)?,
        })
    }

    /// Projects every vector with `c` (pass `¬C` to debias).
    pub fn project(&self, c: &Conceptor) -> Result<SeatTest> {
        self.map_vectors(|v| c.apply(v))
    }
}

/// `c(s, A, A′)`: mean cosine with `A` minus mean cosine with `A′`.
pub fn association(s: &[f64], a: &SentenceSet, a_prime: &SentenceSet) -> Result<f64> {
    let s = unit("s", s)?;
    let a = a.unit_vectors()?;
    let b = a_prime.unit_vectors()?;
    Ok(mean_cosine(&s, &a) - mean_cosine(&s, &b))
}

fn mean_cosine(s: &[f64], set: &[Vec<f64>]) -> f64 {
    set.iter().map(|v| linalg::dot(s, v)).sum::<f64>() / set.len() as f64
}

/// Cosines between every target (rows: `T` then `T′`) and every attribute
/// (columns: `A` then `A′`).
struct CosineTable {
    n_t: usize,
    n_a: usize,
    cos: Vec<Vec<f64>>,
}

impl CosineTable {
    fn new(test: &SeatTest) -> Result<Self> {
        let targets: Vec<Vec<f64>> = test
            .target_t
            .unit_vectors()?
            .into_iter()
            .chain(test.target_t_prime.unit_vectors()?)
            .collect();
        let attrs: Vec<Vec<f64>> = test
            .attr_a
            .unit_vectors()?
            .into_iter()
            .chain(test.attr_b.unit_vectors()?)
            .collect();
        let cos = targets
            .iter()
            .map(|t| attrs.iter().map(|a| linalg::dot(t, a)).collect())
            .collect();
        Ok(CosineTable {
            n_t: test.target_t.len(),
            n_a: test.attr_a.len(),
            cos,
        })
    }

    /// `c(t, A, A′)` for every target, `T` first.
    fn target_associations(&self) -> Vec<f64> {
        self.cos
            .iter()
            .map(|row| {
                let (a, b) = row.split_at(self.n_a);
                mean(a) - mean(b)
            })
            .collect()
    }

    /// `c(a, T, T′)` for every attribute, `A` first.
    fn attribute_associations(&self) -> Vec<f64> {
        let n_attr = self.cos[0].len();
        let (t, tp) = self.cos.split_at(self.n_t);
        (0..n_attr)
            .map(|j| {
                let mt = t.iter().map(|r| r[j]).sum::<f64>() / t.len() as f64;
                let mtp = tp.iter().map(|r| r[j]).sum::<f64>() / tp.len() as f64;
                mt - mtp
            })
            .collect()
    }

    /// Per-attribute `Σ_T cos − Σ_T′ cos`; the statistic is linear in it.
    fn attribute_weights(&self) -> Vec<f64> {
        let n_attr = self.cos[0].len();
        let (t, tp) = self.cos.split_at(self.n_t);
        (0..n_attr)
            .map(|j| t.iter().map(|r| r[j]).sum::<f64>() - tp.iter().map(|r| r[j]).sum::<f64>())
            .collect()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population standard deviation.
fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Test statistic `Σ_T c(t, A, A′) − Σ_T′ c(t′, A, A′)`.
pub fn test_statistic(test: &SeatTest) -> Result<f64> {
    let table = CosineTable::new(test)?;
    let u = table.target_associations();
    let (t, tp) = u.split_at(table.n_t);
    Ok(t.iter().sum::<f64>() - tp.iter().sum::<f64>())
}

/// Effect size `d`, normalized by the population standard deviation of
/// `c(a, T, T′)` over `A ∪ A′`.
pub fn effect_size(test: &SeatTest) -> Result<f64> {
    let table = CosineTable::new(test)?;
    let u = table.target_associations();
    let (t, tp) = u.split_at(table.n_t);
    let numerator = mean(t) - mean(tp);
    let sigma = std_dev(&table.attribute_associations());
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(Error::degenerate(format!(
            "{}: attribute associations have zero spread",
            test.name
        )));
    }
    Ok(numerator / sigma)
}

/// Which labels are permuted to build the null distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResamplingSide {
    /// Re-split `T ∪ T′` into equal halves.
    #[default]
    Target,
    /// Re-split `A ∪ A′` into sets of the original sizes.
    Attribute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PermutationMethod {
    /// Exact when the number of splits is at most [`EXACT_LIMIT`].
    #[default]
    Auto,
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationConfig {
    pub n_permutations: usize,
    pub seed: u64,
    pub side: ResamplingSide,
    pub method: PermutationMethod,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            n_permutations: DEFAULT_PERMUTATIONS,
            seed: DEFAULT_SEED,
            side: ResamplingSide::Target,
            method: PermutationMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationOutcome {
    pub p_value: f64,
    /// Splits evaluated (all of them when `exact`).
    pub n_permutations: u64,
    pub exact: bool,
}

/// `n choose k`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Statistic of a split of `values` into a `k`-subset `S` and the rest:
/// `scale_in · Σ_S v − scale_out · Σ_rest v`.
struct SplitStatistic {
    values: Vec<f64>,
    total: f64,
    k: usize,
    scale_in: f64,
    scale_out: f64,
}

impl SplitStatistic {
    fn new(values: Vec<f64>, k: usize, scale_in: f64, scale_out: f64) -> Self {
        let total = values.iter().sum();
        SplitStatistic {
            values,
            total,
            k,
            scale_in,
            scale_out,
        }
    }

    fn eval(&self, subset: &[usize]) -> f64 {
        let s_in: f64 = subset.iter().map(|&i| self.values[i]).sum();
        self.scale_in * s_in - self.scale_out * (self.total - s_in)
    }
}

/// Ties are counted as "at least as extreme".
fn at_least(stat: f64, observed: f64) -> bool {
    stat >= observed - 1e-12 * (1.0 + observed.abs())
}

/// One-sided permutation p-value of the test statistic.
///
/// Exact enumeration gives `count / splits`; sampling gives
/// `(count + 1) / (n + 1)`. Sampling runs in chunks of [`CHUNK`] draws, chunk
/// `i` seeded with `seed + i`, so serial and parallel runs agree.
pub fn permutation_pvalue(test: &SeatTest, cfg: &PermutationConfig) -> Result<PermutationOutcome> {
    if cfg.n_permutations == 0 && cfg.method != PermutationMethod::Exact {
        return Err(Error::param("n_permutations must be >= 1"));
    }
    if test.target_t.len() != test.target_t_prime.len() {
        return Err(Error::param("|T| must equal |T'|"));
    }
    let table = CosineTable::new(test)?;
    let split = match cfg.side {
        ResamplingSide::Target => SplitStatistic::new(table.target_associations(), table.n_t, 1.0, 1.0),
        ResamplingSide::Attribute => {
            let n_a = table.n_a;
            let n_b = table.cos[0].len() - n_a;
            SplitStatistic::new(table.attribute_weights(), n_a, 1.0 / n_a as f64, 1.0 / n_b as f64)
        }
    };
    let n = split.values.len();
    let observed_subset: Vec<usize> = (0..split.k).collect();
    let observed = split.eval(&observed_subset);
    let splits = binomial(n, split.k);

    let exact = match cfg.method {
        PermutationMethod::Exact => true,
        PermutationMethod::Sampled => false,
        PermutationMethod::Auto => splits <= EXACT_LIMIT,
    };
    if exact {
        let mut count = 0u64;
        for_each_combination(n, split.k, |s| {
            if at_least(split.eval(s), observed) {
                count += 1;
            }
        });
        return Ok(PermutationOutcome {
            p_value: count as f64 / splits as f64,
            n_permutations: splits as u64,
            exact: true,
        });
    }

    let chunks: Vec<(u64, usize)> = (0..cfg.n_permutations.div_ceil(CHUNK))
        .map(|i| (i as u64, CHUNK.min(cfg.n_permutations - i * CHUNK)))
        .collect();
    let run_chunk = |&(i, draws): &(u64, usize)| -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i));
        let mut subset = vec![0usize; split.k];
        let mut count = 0;
        for _ in 0..draws {
            let picked = index::sample(&mut rng, n, split.k);
            for (slot, v) in subset.iter_mut().zip(picked.iter()) {
                *slot = v;
            }
            if at_least(split.eval(&subset), observed) {
                count += 1;
            }
        }
        count
    };
    #[cfg(feature = "parallel")]
    let count: u64 = {
        use rayon::prelude::*;
        chunks.par_iter().map(run_chunk).sum()
    };
    #[cfg(not(feature = "parallel"))]
    let count: u64 = chunks.iter().map(run_chunk).sum();

    Ok(PermutationOutcome {
        p_value: (count + 1) as f64 / (cfg.n_permutations + 1) as f64,
        n_permutations: cfg.n_permutations as u64,
        exact: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSizeResult {
    pub test: String,
    pub d: f64,
    pub p_value: f64,
    pub n_permutations: u64,
    pub exact: bool,
    pub seed: u64,
}

impl EffectSizeResult {
    pub fn significant(&self) -> bool {
        self.p_value < SIGNIFICANCE
    }
}

/// Effect size plus permutation p-value.
pub fn evaluate(test: &SeatTest, cfg: &PermutationConfig) -> Result<EffectSizeResult> {
    let d = effect_size(test)?;
    let perm = permutation_pvalue(test, cfg)?;
    Ok(EffectSizeResult {
        test: test.name.clone(),
        d,
        p_value: perm.p_value,
        n_permutations: perm.n_permutations,
        exact: perm.exact,
        seed: cfg.seed,
    })
}

/// Mean of `|d|`.
pub fn aggregate_abs_average(results: &[EffectSizeResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::param("cannot average an empty result list"));
    }
    Ok(results.iter().map(|r| r.d.abs()).sum::<f64>() / results.len() as f64)
}

/// Sentence ids making up one test, resolved against a sentence collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestDefinition {
    pub name: String,
    pub attribute_a: Vec<String>,
    pub attribute_a_prime: Vec<String>,
    pub target_t: Vec<String>,
    pub target_t_prime: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TestSuite {
    pub tests: Vec<TestDefinition>,
}

impl TestSuite {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl TestDefinition {
    pub fn resolve(&self, sentences: &EmbeddingCollection) -> Result<SeatTest> {
        let index: BTreeMap<&str, usize> = sentences
            .records()
            .iter()
            .enumerate()
            .map(|(i, r)| (r.key.as_str(), i))
            .rev()
            .collect();
        let set = |ids: &[String]| -> Result<SentenceSet> {
            let vectors = ids
                .iter()
                .map(|id| {
                    index
                        .get(id.as_str())
                        .map(|&i| sentences.vector_f64(i))
                        .ok_or_else(|| Error::data(format!("{}: sentence id `{id}` not in collection", self.name)))
                })
                .collect::<Result<_>>()?;
            SentenceSet::new(ids.to_vec(), vectors)
        };
        SeatTest::new(
            self.name.clone(),
            set(&self.attribute_a)?,
            set(&self.attribute_a_prime)?,
            set(&self.target_t)?,
            set(&self.target_t_prime)?,
        )
    }
}

/// One row of a report: a model variant evaluated on every test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRow {
    pub variant: String,
    pub results: Vec<EffectSizeResult>,
    pub abs_average: f64,
}

impl VariantRow {
    pub fn new(variant: impl Into<String>, results: Vec<EffectSizeResult>) -> Result<Self> {
        let abs_average = aggregate_abs_average(&results)?;
        Ok(VariantRow {
            variant: variant.into(),
            results,
            abs_average,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    /// Always `population`.
    pub sigma: String,
    pub resampling: ResamplingSide,
    pub n_permutations: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pooling: Option<String>,
}

impl ReportMetadata {
    pub fn new(cfg: &PermutationConfig, pooling: Option<String>) -> Self {
        ReportMetadata {
            sigma: "population".into(),
            resampling: cfg.side,
            n_permutations: cfg.n_permutations,
            seed: cfg.seed,
            pooling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<VariantRow>,
}

impl SeatReport {
    /// Aligned text table: one row per variant, `*` marks p < 0.01, last
    /// column is the average absolute effect size.
    pub fn to_table(&self) -> String {
        let mut header = vec!["Model".to_string()];
        if let Some(first) = self.rows.first() {
            header.extend(first.results.iter().map(|r| r.test.clone()));
        }
        header.push("Avg. Abs.".into());

        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                let mut cells = vec![row.variant.clone()];
                cells.extend(
                    row.results
                        .iter()
                        .map(|r| format!("{:.3}{}", r.d, if r.significant() { "*" } else { "" })),
                );
                cells.push(format!("{:.3}", row.abs_average));
                cells
            })
            .collect();

        let cols = header.len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| {
                std::iter::once(&header)
                    .chain(&body)
                    .filter_map(|r| r.get(c))
                    .map(|s| s.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, cells: &[String]| {
            for (c, cell) in cells.iter().enumerate() {
                if c == 0 {
                    let _ = write!(out, "{:<w$}", cell, w = widths[c]);
                } else {
                    let _ = write!(out, "  {:>w$}", cell, w = widths[c]);
                }
            }
            out.push('\n');
        };
        line(&mut out, &header);
        let rule: usize = widths.iter().sum::<usize>() + 2 * (cols - 1);
        out.push_str(&"-".repeat(rule));
        out.push('\n');
        for row in &body {
            line(&mut out, row);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(prefix: &str, v: &[&[f64]]) -> SentenceSet {
        SentenceSet::from_vectors(prefix, v.iter().map(|x| x.to_vec()).collect())
    }

    #[test]
    fn association_basics() {
        let a = set("a", &[&[1.0, 0.0]]);
        let b = set("b", &[&[0.0, 1.0]]);
        assert!((association(&[1.0, 0.0], &a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(association(&[0.3, -0.7], &a, &a).unwrap(), 0.0);
    }

    #[test]
    fn zero_vector_is_named() {
        let a = SentenceSet::new(vec!["s-zero".into()], vec![vec![0.0, 0.0]]).unwrap();
        let b = set("b", &[&[0.0, 1.0]]);
        match association(&[1.0, 0.0], &a, &b) {
            Err(Error::ZeroVector { id }) => assert_eq!(id, "s-zero"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unequal_targets_rejected() {
        let a = set("a", &[&[1.0, 0.0]]);
        let r = SeatTest::new(
            "x",
            a.clone(),
            a.clone(),
            a.clone(),
            set("t", &[&[1.0, 0.0], &[0.0, 1.0]]),
        );
        assert!(matches!(r, Err(Error::Parameter(_))));
        let r = SeatTest::new("x", a.clone(), set("e", &[]), a.clone(), a.clone());
        assert!(matches!(r, Err(Error::Data(_))));
    }

    #[test]
    fn zero_spread_is_degenerate() {
        let a = set("a", &[&[1.0, 0.0]]);
        let t = SeatTest::new("x", a.clone(), a.clone(), a.clone(), a.clone()).unwrap();
        assert!(matches!(effect_size(&t), Err(Error::Degenerate(_))));
    }

    #[test]
    fn single_identical_targets_give_p_one() {
        let a = set("a", &[&[1.0, 0.0]]);
        let b = set("b", &[&[0.0, 1.0]]);
        let t = set("t", &[&[0.6, 0.8]]);
        let test = SeatTest::new("x", a, b, t.clone(), t).unwrap();
        let out = permutation_pvalue(&test, &PermutationConfig::default()).unwrap();
        assert!(out.exact);
        assert_eq!(out.n_permutations, 2);
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(16, 8), 12_870);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(5, 0), 1);
        let mut n = 0;
        for_each_combination(6, 3, |_| n += 1);
        assert_eq!(n, 20);
    }

    #[test]
    fn aggregate() {
        let r = |d: f64| EffectSizeResult {
            test: String::new(),
            d,
            p_value: 1.0,
            n_permutations: 1,
            exact: true,
            seed: 0,
        };
        assert_eq!(aggregate_abs_average(&[r(0.5)]).unwrap(), 0.5);
        assert_eq!(aggregate_abs_average(&[r(-1.0), r(1.0)]).unwrap(), 1.0);
        assert!(aggregate_abs_average(&[]).is_err());
    }

    #[test]
    fn resolve_reports_missing_ids() {
        let mut c = EmbeddingCollection::new(2, crate::interchange::CollectionKind::Sentence);
        c.push("s1", vec![1.0, 0.0]).unwrap();
        let def = TestDefinition {
            name: "SEAT-6".into(),
            attribute_a: vec!["s1".into()],
            attribute_a_prime: vec!["s2".into()],
            target_t: vec!["s1".into()],
            target_t_prime: vec!["s1".into()],
        };
        let err = def.resolve(&c).unwrap_err().to_string();
        assert!(err.contains("s2"), "{err}");
    }
}
