use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use conceptor_debias::conceptor_file::{encode_conceptor, read_conceptor, write_conceptor};
use conceptor_debias::interchange::{checksum, read_collection, write_atomic, Manifest};
use conceptor_debias::seat::{
    evaluate, PermutationConfig, ReportMetadata, SeatReport, SeatTest, TestSuite, VariantRow,
};
use conceptor_debias::subspace::{build_bias_conceptor, BiasSubspace, Coords2d, SubspaceMode, Wordlist, WordlistName};
use conceptor_debias::winobias::{winobias_metrics, WinoBiasF1};
use conceptor_debias::{and_op, negate, or_op, CollectionKind, Conceptor, EmbeddingCollection, Error, SubspaceSpec};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{config_error, required, PipelineConfig};

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Opens every collection of `kind` listed in a manifest and concatenates
/// them. For tokens, entries tagged with `corpus` win over untagged ones.
fn load_collections(manifest_path: &Path, kind: CollectionKind, corpus: Option<&str>) -> Result<EmbeddingCollection> {
    let manifest = Manifest::load(manifest_path).with_context(|| format!("reading {}", manifest_path.display()))?;
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    let of_kind: Vec<_> = manifest.collections.iter().filter(|e| e.kind == kind).collect();
    let tagged: Vec<_> = of_kind
        .iter()
        .filter(|e| corpus.is_some() && e.metadata.corpus_id.as_deref() == corpus)
        .copied()
        .collect();
    let chosen = if tagged.is_empty() {
        of_kind.into_iter().filter(|e| e.metadata.corpus_id.is_none()).collect()
    } else {
        tagged
    };
    let Some(first) = chosen.first() else {
        return Err(Error::Data(format!(
            "{}: no {kind:?} collection{}",
            manifest_path.display(),
            corpus.map(|c| format!(" for corpus `{c}`")).unwrap_or_default()
        ))
        .into());
    };
    let mut all = manifest
        .open(base, first)
        .with_context(|| format!("opening {}", first.path))?;
    for e in &chosen[1..] {
        let c = manifest.open(base, e).with_context(|| format!("opening {}", e.path))?;
        all.extend_from(&c).with_context(|| format!("merging {}", e.path))?;
    }
    Ok(all)
}

fn token_lists(cfg: &PipelineConfig, modes: &[SubspaceMode]) -> Result<BTreeMap<WordlistName, EmbeddingCollection>> {
    let tokens_path = required(&cfg.tokens, "tokens")?;
    let tokens = load_collections(tokens_path, CollectionKind::Token, Some(&cfg.spec.corpus))?;
    let mut needed: Vec<WordlistName> = modes.iter().flat_map(|m| m.required_lists()).collect();
    needed.sort();
    needed.dedup();
    let mut out = BTreeMap::new();
    for name in needed {
        let path = cfg
            .wordlists
            .get(&name)
            .ok_or_else(|| config_error(format!("wordlist `{name}` is not configured")))?;
        let list = Wordlist::load(name, path).with_context(|| format!("reading {}", path.display()))?;
        out.insert(name, list.select(&tokens));
    }
    Ok(out)
}

fn load_coords(cfg: &PipelineConfig) -> Result<Option<Coords2d>> {
    cfg.coords
        .as_ref()
        .map(|p| Coords2d::load(p).with_context(|| format!("reading {}", p.display())))
        .transpose()
}

pub fn build(cfg: &PipelineConfig) -> Result<()> {
    let lists = token_lists(cfg, &[cfg.spec.mode])?;
    let coords = load_coords(cfg)?;
    let sub = build_bias_conceptor(&cfg.spec, &lists, coords.as_ref())
        .with_context(|| format!("building {}", cfg.spec.setting()))?;
    let paths = write_build(cfg, &cfg.spec, &sub)?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

fn write_build(cfg: &PipelineConfig, spec: &SubspaceSpec, sub: &BiasSubspace) -> Result<Vec<PathBuf>> {
    create_dir(&cfg.out_dir)?;
    let setting = spec.setting();
    let c_path = cfg.out_dir.join(format!("{setting}.ccon"));
    let n_path = cfg.out_dir.join(format!("{setting}.not.ccon"));
    let s_path = cfg.out_dir.join(format!("{setting}.json"));
    let not = negate(&sub.conceptor);
    write_conceptor(&sub.conceptor, &c_path)?;
    write_conceptor(&not, &n_path)?;

    let file_name = |p: &Path| p.file_name().unwrap().to_string_lossy().into_owned();
    let sidecar = json!({
        "setting": setting,
        "spec": spec,
        "seed": cfg.seed,
        "conceptor": {
            "path": file_name(&c_path),
            "crc32": format!("{:08x}", checksum(&encode_conceptor(&sub.conceptor))),
            "spectrum": sub.conceptor.spectrum(),
        },
        "negation": {
            "path": file_name(&n_path),
            "crc32": format!("{:08x}", checksum(&encode_conceptor(&not))),
        },
        "filter_reports": sub.reports,
        "list_spectra": sub.list_spectra,
    });
    write_json(&s_path, &sidecar)?;
    Ok(vec![c_path, n_path, s_path])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ComposeOp {
    Not,
    And,
    Or,
}

pub fn compose(op: ComposeOp, inputs: &[PathBuf], output: &Path) -> Result<()> {
    let need = if op == ComposeOp::Not { 1 } else { 2 };
    if inputs.len() < need || (op == ComposeOp::Not && inputs.len() != 1) {
        return Err(config_error(format!(
            "{op:?} takes {} input(s), got {}",
            if need == 1 { "exactly 1" } else { "at least 2" },
            inputs.len()
        )));
    }
    let cs = inputs
        .iter()
        .map(|p| read_conceptor(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<Conceptor>>>()?;
    let result = match op {
        ComposeOp::Not => negate(&cs[0]),
        ComposeOp::And | ComposeOp::Or => {
            let f = if op == ComposeOp::And { and_op } else { or_op };
            let mut acc = cs[0].clone();
            for c in &cs[1..] {
                acc = f(&acc, c)?;
            }
            acc
        }
    };
    write_conceptor(&result, output).with_context(|| format!("writing {}", output.display()))?;
    println!("{}", output.display());
    Ok(())
}

/// Applies a stored conceptor to every vector of a collection.
pub fn debias(conceptor: &Path, input: &Path, output: &Path) -> Result<()> {
    let bytes = fs::read(conceptor).with_context(|| format!("reading {}", conceptor.display()))?;
    let c = conceptor_debias::conceptor_file::decode_conceptor(&bytes)
        .with_context(|| format!("reading {}", conceptor.display()))?;
    let crc = checksum(&bytes);

    let mut collection = read_collection(input).with_context(|| format!("reading {}", input.display()))?;
    // Inherit metadata from a manifest next to the input, when there is one.
    let in_dir = input.parent().unwrap_or(Path::new(""));
    let in_name = input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let in_manifest = in_dir.join("manifest.json");
    if in_manifest.is_file() {
        let m = Manifest::load(&in_manifest).with_context(|| format!("reading {}", in_manifest.display()))?;
        if let Some(e) = m.entry(&in_name) {
            collection = m.open(in_dir, e).with_context(|| format!("opening {in_name}"))?;
        }
    }
    if collection.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            actual: collection.dim(),
        })
        .with_context(|| format!("{} against {}", input.display(), conceptor.display()));
    }

    let mut out = collection.map_vectors(|v| c.apply(v))?;
    let c_name = conceptor
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.metadata.extra.insert("debias_conceptor".into(), c_name);
    out.metadata
        .extra
        .insert("debias_conceptor_crc32".into(), format!("{crc:08x}"));

    let out_dir = match output.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let out_name = output
        .file_name()
        .ok_or_else(|| config_error(format!("not a file path: {}", output.display())))?
        .to_string_lossy()
        .into_owned();
    create_dir(&out_dir)?;
    let manifest_path = out_dir.join("manifest.json");
    let mut manifest = if manifest_path.is_file() {
        Manifest::load(&manifest_path).with_context(|| format!("reading {}", manifest_path.display()))?
    } else {
        Manifest::default()
    };
    manifest.add_collection(&out_dir, &out_name, &out)?;
    manifest.save(&manifest_path)?;
    println!("{}", output.display());
    Ok(())
}

fn load_tests(cfg: &PipelineConfig) -> Result<(Vec<SeatTest>, Option<String>)> {
    let sentences_path = required(&cfg.sentences, "sentences")?;
    let tests_path = required(&cfg.tests, "tests")?;
    let sentences = load_collections(sentences_path, CollectionKind::Sentence, None)?;
    let suite = TestSuite::load(tests_path).with_context(|| format!("reading {}", tests_path.display()))?;
    if suite.tests.is_empty() {
        return Err(Error::Data(format!("{}: no tests defined", tests_path.display())).into());
    }
    let tests = suite
        .tests
        .iter()
        .map(|t| {
            t.resolve(&sentences)
                .with_context(|| format!("resolving test `{}`", t.name))
        })
        .collect::<Result<Vec<_>>>()?;
    let pooling = cfg.pooling.clone().or(sentences.metadata.pooling.clone());
    Ok((tests, pooling))
}

fn permutation_config(cfg: &PipelineConfig) -> PermutationConfig {
    PermutationConfig {
        n_permutations: cfg.n_perm,
        seed: cfg.seed,
        side: cfg.resampling,
        ..Default::default()
    }
}

fn evaluate_variant(
    name: &str,
    tests: &[SeatTest],
    c: Option<&Conceptor>,
    perm: &PermutationConfig,
) -> Result<VariantRow> {
    let results = tests
        .iter()
        .map(|t| {
            let t = match c {
                Some(c) => t.project(c)?,
                None => t.clone(),
            };
            evaluate(&t, perm)
        })
        .collect::<conceptor_debias::Result<Vec<_>>>()
        .with_context(|| format!("evaluating `{name}`"))?;
    Ok(VariantRow::new(name, results)?)
}

fn variant_name(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.strip_suffix(".ccon").map(str::to_owned).unwrap_or(name)
}

pub fn seat(cfg: &PipelineConfig) -> Result<()> {
    let (tests, pooling) = load_tests(cfg)?;
    let perm = permutation_config(cfg);
    let mut rows = vec![evaluate_variant("raw", &tests, None, &perm)?];
    for path in &cfg.conceptors {
        let c = read_conceptor(path).with_context(|| format!("reading {}", path.display()))?;
        rows.push(evaluate_variant(&variant_name(path), &tests, Some(&c), &perm)?);
    }
    let report = SeatReport {
        metadata: ReportMetadata::new(&perm, pooling),
        rows,
    };
    create_dir(&cfg.out_dir)?;
    write_json(&cfg.out_dir.join("seat.json"), &report)?;
    let table = report.to_table();
    write_text(&cfg.out_dir.join("seat.txt"), &table)?;
    print!("{table}");
    Ok(())
}

pub fn winobias(pro_male: f64, anti_male: f64, pro_female: f64, anti_female: f64, as_json: bool) -> Result<()> {
    let f1 = WinoBiasF1::new(pro_male, anti_male, pro_female, anti_female)?;
    let m = winobias_metrics(&f1);
    if as_json {
        println!("{}", serde_json::to_string_pretty(&json!({ "f1": f1, "metrics": m }))?);
    } else {
        println!("skew    {:.2}", m.skew);
        println!("stereo  {:.2}", m.stereo);
    }
    Ok(())
}

/// Every percentile from 0.1 to 1.0 crossed with `modes`; settings whose
/// filter leaves too little data are reported as skipped.
pub fn sweep(cfg: &PipelineConfig, modes: &[SubspaceMode]) -> Result<()> {
    let modes: Vec<SubspaceMode> = if modes.is_empty() {
        SubspaceMode::ALL_MODES
            .into_iter()
            .filter(|m| m.required_lists().iter().all(|l| cfg.wordlists.contains_key(l)))
            .collect()
    } else {
        modes.to_vec()
    };
    if modes.is_empty() {
        return Err(config_error("no mode has all of its wordlists configured"));
    }
    let lists = token_lists(cfg, &modes)?;
    let coords = load_coords(cfg)?;
    let (tests, pooling) = load_tests(cfg)?;
    let perm = permutation_config(cfg);

    let specs: Vec<SubspaceSpec> = modes
        .iter()
        .flat_map(|&mode| {
            (1..=10).map(move |step| SubspaceSpec {
                mode,
                percentile: step as f64 / 10.0,
                ..cfg.spec.clone()
            })
        })
        .collect();
    let outcomes: Vec<Result<VariantRow, String>> = specs
        .par_iter()
        .map(|spec| {
            let sub = match build_bias_conceptor(spec, &lists, coords.as_ref()) {
                Ok(sub) => sub,
                Err(e @ Error::Degenerate(_)) => return Ok(Err(e.to_string())),
                Err(e) => return Err(anyhow::Error::from(e).context(format!("building {}", spec.setting()))),
            };
            evaluate_variant(&spec.setting(), &tests, Some(&negate(&sub.conceptor)), &perm).map(Ok)
        })
        .collect::<Result<_>>()?;

    let mut rows = vec![evaluate_variant("raw", &tests, None, &perm)?];
    let mut skipped = Vec::new();
    for (spec, outcome) in specs.iter().zip(outcomes) {
        match outcome {
            Ok(row) => rows.push(row),
            Err(reason) => {
                eprintln!("skipped {}: {reason}", spec.setting());
                skipped.push(json!({ "setting": spec.setting(), "reason": reason }));
            }
        }
    }
    let report = SeatReport {
        metadata: ReportMetadata::new(&perm, pooling),
        rows,
    };
    create_dir(&cfg.out_dir)?;
    write_json(
        &cfg.out_dir.join("sweep.json"),
        &json!({ "spec": cfg.spec, "report": report, "skipped": skipped }),
    )?;
    let table = report.to_table();
    write_text(&cfg.out_dir.join("sweep.txt"), &table)?;
    print!("{table}");
    Ok(())
}
