//! Bias subspaces: wordlists, the percentile outlier filter, and conceptor
//! construction for the five wordlist combination modes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conceptor::{self, and_op, or_op, Conceptor, GramScaling, DEFAULT_APERTURE};
use crate::error::{Error, Result};
use crate::interchange::{CollectionKind, EmbeddingCollection};
use crate::linalg::SortedEigen;

/// Fence multiplier on the inter-range.
pub const FENCE_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordlistName {
    Pronouns,
    Extended,
    Propernouns,
    Race,
    Custom,
}

impl WordlistName {
    pub const GENDER: [WordlistName; 3] = [
        WordlistName::Pronouns,
        WordlistName::Extended,
        WordlistName::Propernouns,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WordlistName::Pronouns => "pronouns",
            WordlistName::Extended => "extended",
            WordlistName::Propernouns => "propernouns",
            WordlistName::Race => "race",
            WordlistName::Custom => "custom",
        }
    }
}

impl fmt::Display for WordlistName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WordlistName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pronouns" => WordlistName::Pronouns,
            "extended" => WordlistName::Extended,
            "propernouns" => WordlistName::Propernouns,
            "race" => WordlistName::Race,
            "custom" => WordlistName::Custom,
            other => return Err(Error::param(format!("unknown wordlist `{other}`"))),
        })
    }
}

/// Lowercased, deduplicated, non-empty set of attribute words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wordlist {
    pub name: WordlistName,
    words: BTreeSet<String>,
}

impl Wordlist {
    pub fn new<I, S>(name: WordlistName, words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: BTreeSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(Error::data(format!("wordlist `{name}` is empty")));
        }
        Ok(Wordlist { name, words })
    }

    /// One word per line; `#` starts a comment.
    pub fn parse(name: WordlistName, text: &str) -> Result<Self> {
        Wordlist::new(name, text.lines().map(|l| l.split('#').next().unwrap_or("")))
    }

    pub fn load(name: WordlistName, path: impl AsRef<Path>) -> Result<Self> {
        Wordlist::parse(name, &fs::read_to_string(path)?)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Token records whose key belongs to this list.
    pub fn select(&self, tokens: &EmbeddingCollection) -> EmbeddingCollection {
        tokens.retain(|k| self.contains(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubspaceMode {
    Pronouns,
    Extended,
    Propernouns,
    /// The three gender lists concatenated into one data matrix.
    All,
    /// OR over the three per-list conceptors.
    Or,
}

impl SubspaceMode {
    pub const ALL_MODES: [SubspaceMode; 5] = [
        SubspaceMode::Pronouns,
        SubspaceMode::Extended,
        SubspaceMode::Propernouns,
        SubspaceMode::All,
        SubspaceMode::Or,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SubspaceMode::Pronouns => "pronouns",
            SubspaceMode::Extended => "extended",
            SubspaceMode::Propernouns => "propernouns",
            SubspaceMode::All => "all",
            SubspaceMode::Or => "or",
        }
    }

    pub fn required_lists(self) -> Vec<WordlistName> {
        match self {
            SubspaceMode::Pronouns => vec![WordlistName::Pronouns],
            SubspaceMode::Extended => vec![WordlistName::Extended],
            SubspaceMode::Propernouns => vec![WordlistName::Propernouns],
            SubspaceMode::All | SubspaceMode::Or => WordlistName::GENDER.to_vec(),
        }
    }
}

impl fmt::Display for SubspaceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubspaceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SubspaceMode::ALL_MODES
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown subspace mode `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionKind {
    /// First two principal components of the word means.
    #[default]
    Pca2d,
    /// Coordinates supplied by an external tool (UMAP, t-SNE, …).
    External2d,
}

/// Recipe for one bias conceptor, e.g. `brown-0.4-or`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSpec {
    pub corpus: String,
    pub mode: SubspaceMode,
    pub percentile: f64,
    #[serde(default = "default_aperture")]
    pub aperture: f64,
    #[serde(default)]
    pub projection: ProjectionKind,
    #[serde(default)]
    pub gram: GramScaling,
}

fn default_aperture() -> f64 {
    DEFAULT_APERTURE
}

impl SubspaceSpec {
    pub fn new(corpus: impl Into<String>, mode: SubspaceMode, percentile: f64) -> Result<Self> {
        let spec = SubspaceSpec {
            corpus: corpus.into(),
            mode,
            percentile,
            aperture: DEFAULT_APERTURE,
            projection: ProjectionKind::Pca2d,
            gram: GramScaling::Mean,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_percentile(self.percentile)?;
        if !(self.aperture.is_finite() && self.aperture > 0.0) {
            return Err(Error::param(format!("aperture must be > 0, got {}", self.aperture)));
        }
        Ok(())
    }

    /// Parses `corpus-percentile-mode`, e.g. `brown-0.4-or`.
    pub fn parse_setting(setting: &str) -> Result<Self> {
        let mut parts = setting.rsplitn(3, '-');
        let (Some(mode), Some(p), Some(corpus)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::param(format!(
                "setting `{setting}` is not of the form corpus-percentile-mode"
            )));
        };
        let p: f64 = p
            .parse()
            .map_err(|_| Error::param(format!("bad percentile `{p}` in `{setting}`")))?;
        SubspaceSpec::new(corpus, mode.parse()?, p)
    }

    pub fn setting(&self) -> String {
        let p = if self.percentile.fract() == 0.0 {
            format!("{:.1}", self.percentile)
        } else {
            format!("{}", self.percentile)
        };
        format!("{}-{}-{}", self.corpus, p, self.mode)
    }
}

fn check_percentile(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("percentile must lie in (0, 1], got {p}")))
    }
}

/// Word → precomputed 2D coordinates, read from `word,x,y` CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Coords2d(pub BTreeMap<String, [f64; 2]>);

impl Coords2d {
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::data(format!("coords line {}: expected word,x,y", i + 1)));
            }
            let (x, y) = match (fields[1].parse::<f64>(), fields[2].parse::<f64>()) {
                (Ok(x), Ok(y)) => (x, y),
                // header row
                _ if i == 0 => continue,
                _ => return Err(Error::data(format!("coords line {}: bad number", i + 1))),
            };
            map.insert(fields[0].to_lowercase(), [x, y]);
        }
        Ok(Coords2d(map))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Coords2d::parse_csv(&fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Projection<'a> {
    Pca2d,
    External(&'a Coords2d),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordPoint {
    pub word: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fence {
    pub lower: f64,
    pub upper: f64,
}

/// What the outlier filter saw and decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub percentile: f64,
    pub words_before: usize,
    pub words_after: usize,
    pub tokens_before: usize,
    pub tokens_after: usize,
    /// Empty when the filter was skipped (`p = 1`).
    pub coordinates: Vec<WordPoint>,
    pub fences: Option<[Fence; 2]>,
    pub kept: Vec<String>,
    pub dropped: Vec<String>,
}

impl FilterReport {
    fn passthrough(c: &EmbeddingCollection, p: f64) -> Self {
        let words: Vec<String> = c.keys().into_iter().map(str::to_owned).collect();
        FilterReport {
            percentile: p,
            words_before: words.len(),
            words_after: words.len(),
            tokens_before: c.len(),
            tokens_after: c.len(),
            coordinates: Vec::new(),
            fences: None,
            kept: words,
            dropped: Vec::new(),
        }
    }
}

/// Linear-interpolation quantile of ascending `sorted` (`h = (n−1)q`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Fences for one axis at percentile `p`.
///
/// The inter-range spans the central band of mass `p`, from the
/// `(1−p)/2` to the `(1+p)/2` quantile: `p = 1` covers the full range,
/// `p = 0.5` is the interquartile range, and the fences widen
/// monotonically with `p`.
pub fn axis_fence(values: &[f64], p: f64) -> Fence {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q_lo = quantile(&sorted, (1.0 - p) / 2.0);
    let q_hi = quantile(&sorted, (1.0 + p) / 2.0);
    let ir = q_hi - q_lo;
    Fence {
        lower: q_lo - FENCE_FACTOR * ir,
        upper: q_hi + FENCE_FACTOR * ir,
    }
}

/// Per-word mean vectors, in first-appearance order.
pub fn word_means(c: &EmbeddingCollection) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut words = Vec::new();
    let mut sums: Vec<Vec<f64>> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for r in c.records() {
        let i = *index.entry(r.key.as_str()).or_insert_with(|| {
            words.push(r.key.clone());
            sums.push(vec![0.0; c.dim()]);
            counts.push(0);
            words.len() - 1
        });
        for (s, &v) in sums[i].iter_mut().zip(&r.vector) {
            *s += v as f64;
        }
        counts[i] += 1;
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= n as f64);
    }
    (words, sums)
}

/// Projects row vectors onto their first two principal components.
///
/// Each loading vector is signed so its largest-magnitude entry is positive.
/// Components with (numerically) zero variance give all-zero coordinates.
pub fn pca_2d(points: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let m = points.len();
    if m == 0 {
        return Vec::new();
    }
    let dim = points[0].len();
    let mut x = DMatrix::from_fn(m, dim, |i, j| points[i][j]);
    let mean = x.row_mean();
    for mut row in x.row_iter_mut() {
        row -= &mean;
    }

    // Eigen-decompose the smaller of the two Gram matrices.
    let loadings: Vec<(f64, DVector<f64>)> = if dim <= m {
        let eig = SortedEigen::new(&(x.transpose() * &x));
        (0..2.min(dim))
            .map(|k| (eig.values[k], eig.vectors.column(k).into_owned()))
            .collect()
    } else {
        let eig = SortedEigen::new(&(&x * x.transpose()));
        (0..2.min(m))
            .map(|k| {
                let v = x.transpose() * eig.vectors.column(k);
                let n = v.norm();
                let v = if n > 0.0 { v / n } else { v };
                (eig.values[k], v)
            })
            .collect()
    };

    let top = loadings.first().map(|l| l.0).unwrap_or(0.0).max(0.0);
    let mut coords = vec![[0.0; 2]; m];
    for (axis, (lambda, mut v)) in loadings.into_iter().enumerate() {
        if top == 0.0 || lambda <= 1e-12 * top {
            continue;
        }
        let lead = v
            .iter()
            .copied()
            .fold(0.0_f64, |acc, e| if e.abs() > acc.abs() { e } else { acc });
        if lead < 0.0 {
            v.neg_mut();
        }
        let proj = &x * v;
        for (c, p) in coords.iter_mut().zip(proj.iter()) {
            c[axis] = *p;
        }
    }
    coords
}

/// Drops every token of a word whose 2D coordinate falls outside the
/// percentile fences on either axis.
pub fn filter_outliers(
    embeddings: &EmbeddingCollection,
    p: f64,
    projection: Projection<'_>,
) -> Result<(EmbeddingCollection, FilterReport)> {
    check_percentile(p)?;
    if embeddings.kind() != CollectionKind::Token {
        return Err(Error::param("outlier filtering needs a token collection"));
    }
    let (words, means) = word_means(embeddings);
    if words.len() < 3 {
        return Err(Error::degenerate(format!(
            "outlier filter needs at least 3 distinct words, got {}",
            words.len()
        )));
    }
    let coords = match projection {
        Projection::Pca2d => pca_2d(&means),
        Projection::External(table) => words
            .iter()
            .map(|w| {
                table
                    .0
                    .get(w)
                    .copied()
                    .ok_or_else(|| Error::data(format!("no external coordinates for `{w}`")))
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let axis = |k: usize| coords.iter().map(|c| c[k]).collect::<Vec<f64>>();
    let fences = [axis_fence(&axis(0), p), axis_fence(&axis(1), p)];
    // Relative slack so exactly-degenerate axes are not split by round-off.
    let scale = coords
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    let tol = 1e-9 * scale;
    let inside = |c: &[f64; 2]| (0..2).all(|k| c[k] >= fences[k].lower - tol && c[k] <= fences[k].upper + tol);

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (w, c) in words.iter().zip(&coords) {
        if inside(c) {
            kept.push(w.clone());
        } else {
            dropped.push(w.clone());
        }
    }
    let keep: BTreeSet<&str> = kept.iter().map(String::as_str).collect();
    let filtered = embeddings.retain(|k| keep.contains(k));

    let report = FilterReport {
        percentile: p,
        words_before: words.len(),
        words_after: kept.len(),
        tokens_before: embeddings.len(),
        tokens_after: filtered.len(),
        coordinates: words
            .iter()
            .zip(&coords)
            .map(|(w, c)| WordPoint {
                word: w.clone(),
                x: c[0],
                y: c[1],
            })
            .collect(),
        fences: Some(fences),
        kept,
        dropped,
    };
    Ok((filtered, report))
}

/// A bias conceptor together with how it was built.
#[derive(Debug, Clone)]
pub struct BiasSubspace {
    pub conceptor: Conceptor,
    pub reports: BTreeMap<WordlistName, FilterReport>,
    /// Spectra of the per-list conceptors (populated in `or` mode).
    pub list_spectra: BTreeMap<WordlistName, Vec<f64>>,
}

fn filtered_list(
    spec: &SubspaceSpec,
    name: WordlistName,
    collections: &BTreeMap<WordlistName, EmbeddingCollection>,
    coords: Option<&Coords2d>,
) -> Result<(EmbeddingCollection, FilterReport)> {
    let c = collections
        .get(&name)
        .ok_or_else(|| Error::param(format!("no embeddings supplied for wordlist `{name}`")))?;
    if spec.percentile >= 1.0 {
        return Ok((c.clone(), FilterReport::passthrough(c, spec.percentile)));
    }
    let projection = match (spec.projection, coords) {
        (ProjectionKind::Pca2d, _) => Projection::Pca2d,
        (ProjectionKind::External2d, Some(table)) => Projection::External(table),
        (ProjectionKind::External2d, None) => {
            return Err(Error::param("external2d projection needs a coordinates file"))
        }
    };
    filter_outliers(c, spec.percentile, projection)
}

fn conceptor_of(spec: &SubspaceSpec, name: &str, c: &EmbeddingCollection) -> Result<Conceptor> {
    if c.is_empty() {
        return Err(Error::degenerate(format!(
            "no embeddings of `{name}` survive the filter at percentile {}",
            spec.percentile
        )));
    }
    conceptor::compute_conceptor_with(&c.to_data_matrix()?, spec.aperture, spec.gram)
}

/// Builds the bias conceptor described by `spec`.
///
/// `collections` maps each wordlist to its token embeddings; `coords` is
/// required when `spec.projection` is `External2d`.
pub fn build_bias_conceptor(
    spec: &SubspaceSpec,
    collections: &BTreeMap<WordlistName, EmbeddingCollection>,
    coords: Option<&Coords2d>,
) -> Result<BiasSubspace> {
    spec.validate()?;
    let lists = spec.mode.required_lists();
    let dims: BTreeSet<usize> = lists
        .iter()
        .filter_map(|n| collections.get(n).map(EmbeddingCollection::dim))
        .collect();
    if dims.len() > 1 {
        let d: Vec<usize> = dims.into_iter().collect();
        return Err(Error::DimensionMismatch {
            expected: d[0],
            actual: d[1],
        });
    }

    let filtered = map_lists(&lists, |&n| filtered_list(spec, n, collections, coords))?;
    let mut reports = BTreeMap::new();
    for (n, (_, r)) in lists.iter().zip(&filtered) {
        reports.insert(*n, r.clone());
    }

    let mut list_spectra = BTreeMap::new();
    let conceptor = match spec.mode {
        SubspaceMode::Pronouns | SubspaceMode::Extended | SubspaceMode::Propernouns => {
            conceptor_of(spec, lists[0].as_str(), &filtered[0].0)?
        }
        SubspaceMode::All => {
            let mut all = filtered[0].0.clone();
            for (c, _) in &filtered[1..] {
                all.extend_from(c)?;
            }
            conceptor_of(spec, "all", &all)?
        }
        SubspaceMode::Or => {
            let per_list = map_lists(&lists.iter().zip(&filtered).collect::<Vec<_>>(), |(n, (c, _))| {
                conceptor_of(spec, n.as_str(), c)
            })?;
            for (n, c) in lists.iter().zip(&per_list) {
                list_spectra.insert(*n, c.spectrum());
            }
            // Fixed fold order keeps results bit-stable.
            let mut acc = per_list[0].clone();
            for c in &per_list[1..] {
                acc = or_op(&acc, c)?;
            }
            acc
        }
    };
    Ok(BiasSubspace {
        conceptor,
        reports,
        list_spectra,
    })
}

#[cfg(feature = "parallel")]
fn map_lists<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_lists<T, R>(items: &[T], f: impl Fn(&T) -> Result<R>) -> Result<Vec<R>> {
    items.iter().map(f).collect()
}

/// Folds the list with AND. Negate the result downstream to debias the
/// intersection.
pub fn intersect_bias_conceptors(list: &[Conceptor]) -> Result<Conceptor> {
    if list.len() < 2 {
        return Err(Error::param(format!(
            "intersection needs at least 2 conceptors, got {}",
            list.len()
        )));
    }
    let mut acc = list[0].clone();
    for c in &list[1..] {
        acc = and_op(&acc, c)?;
    }
    Ok(acc)
}
