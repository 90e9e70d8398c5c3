//! Pipeline configuration. Paths in the JSON file are relative to the file;
//! paths given as flags are relative to the working directory.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use conceptor_debias::seat::{ResamplingSide, DEFAULT_PERMUTATIONS, DEFAULT_SEED};
use conceptor_debias::subspace::{ProjectionKind, SubspaceMode, WordlistName};
use conceptor_debias::{GramScaling, SubspaceSpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;

/// Bad or missing configuration; exits with code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    tokens: Option<PathBuf>,
    sentences: Option<PathBuf>,
    #[serde(default)]
    wordlists: BTreeMap<WordlistName, PathBuf>,
    tests: Option<PathBuf>,
    coords: Option<PathBuf>,
    #[serde(default)]
    conceptors: Vec<PathBuf>,
    setting: Option<String>,
    corpus: Option<String>,
    mode: Option<SubspaceMode>,
    percentile: Option<f64>,
    aperture: Option<f64>,
    projection: Option<ProjectionKind>,
    #[serde(default)]
    unnormalized_gram: bool,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    pooling: Option<String>,
    resampling: Option<ResamplingSide>,
    n_perm: Option<usize>,
}

/// Flags shared by the pipeline commands; each overrides the config file.
#[derive(Debug, Default, Args)]
pub struct PipelineArgs {
    /// JSON pipeline config
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Manifest of token embedding collections
    #[arg(long)]
    pub tokens: Option<PathBuf>,
    /// Manifest of sentence embedding collections
    #[arg(long)]
    pub sentences: Option<PathBuf>,
    /// Wordlist file, as NAME=PATH (pronouns, extended, propernouns, race, custom)
    #[arg(long = "wordlist", value_name = "NAME=PATH")]
    pub wordlists: Vec<String>,
    /// SEAT test definitions (JSON)
    #[arg(long)]
    pub tests: Option<PathBuf>,
    /// CSV of precomputed 2D word coordinates (word,x,y)
    #[arg(long)]
    pub coords: Option<PathBuf>,
    /// Setting string corpus-percentile-mode, e.g. brown-0.4-or
    #[arg(long)]
    pub setting: Option<String>,
    #[arg(long)]
    pub corpus: Option<String>,
    /// pronouns, extended, propernouns, all or or
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub percentile: Option<f64>,
    #[arg(long)]
    pub aperture: Option<f64>,
    /// pca2d or external2d
    #[arg(long)]
    pub projection: Option<String>,
    /// Use XXᵀ instead of XXᵀ/n
    #[arg(long)]
    pub unnormalized_gram: bool,
    /// Recorded in reports; sentence pooling happens at extraction time
    #[arg(long)]
    pub pooling: Option<String>,
    /// target or attribute
    #[arg(long)]
    pub resampling: Option<String>,
    #[arg(long)]
    pub n_perm: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub tokens: Option<PathBuf>,
    pub sentences: Option<PathBuf>,
    pub wordlists: BTreeMap<WordlistName, PathBuf>,
    pub tests: Option<PathBuf>,
    pub coords: Option<PathBuf>,
    pub conceptors: Vec<PathBuf>,
    pub spec: SubspaceSpec,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub pooling: Option<String>,
    pub resampling: ResamplingSide,
    pub n_perm: usize,
}

fn parse_enum<T: DeserializeOwned>(what: &str, s: &str) -> anyhow::Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_owned()))
        .map_err(|_| config_error(format!("unknown {what} `{s}`")))
}

impl PipelineConfig {
    pub fn load(args: &PipelineArgs, extra_conceptors: &[PathBuf]) -> anyhow::Result<Self> {
        let (file, base) = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
                let file: ConfigFile =
                    serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (file, base)
            }
            None => (ConfigFile::default(), PathBuf::new()),
        };
        let rel = |p: Option<PathBuf>| p.map(|p| base.join(p));

        let mut wordlists: BTreeMap<WordlistName, PathBuf> =
            file.wordlists.into_iter().map(|(k, v)| (k, base.join(v))).collect();
        for item in &args.wordlists {
            let (name, path) = item
                .split_once('=')
                .ok_or_else(|| config_error(format!("--wordlist expects NAME=PATH, got `{item}`")))?;
            let name: WordlistName = name.parse().map_err(|e| config_error(format!("{e}")))?;
            wordlists.insert(name, PathBuf::from(path));
        }

        let mut spec = match args.setting.as_ref().or(file.setting.as_ref()) {
            Some(s) => SubspaceSpec::parse_setting(s).map_err(|e| config_error(e.to_string()))?,
            None => SubspaceSpec {
                corpus: "corpus".into(),
                mode: SubspaceMode::Or,
                percentile: 1.0,
                aperture: conceptor_debias::conceptor::DEFAULT_APERTURE,
                projection: ProjectionKind::Pca2d,
                gram: GramScaling::Mean,
            },
        };
        if let Some(c) = args.corpus.clone().or(file.corpus) {
            spec.corpus = c;
        }
        match &args.mode {
            Some(m) => spec.mode = m.parse().map_err(|e| config_error(format!("{e}")))?,
            None => spec.mode = file.mode.unwrap_or(spec.mode),
        }
        if let Some(p) = args.percentile.or(file.percentile) {
            spec.percentile = p;
        }
        if let Some(a) = args.aperture.or(file.aperture) {
            spec.aperture = a;
        }
        match &args.projection {
            Some(p) => spec.projection = parse_enum("projection", p)?,
            None => spec.projection = file.projection.unwrap_or(spec.projection),
        }
        if args.unnormalized_gram || file.unnormalized_gram {
            spec.gram = GramScaling::Sum;
        }
        spec.validate().map_err(|e| config_error(e.to_string()))?;

        let resampling = match &args.resampling {
            Some(s) => parse_enum("resampling side", s)?,
            None => file.resampling.unwrap_or_default(),
        };
        let n_perm = args.n_perm.or(file.n_perm).unwrap_or(DEFAULT_PERMUTATIONS);
        if n_perm == 0 {
            return Err(config_error("n_perm must be positive"));
        }

        let mut conceptors: Vec<PathBuf> = file.conceptors.into_iter().map(|p| base.join(p)).collect();
        conceptors.extend(extra_conceptors.iter().cloned());

        let cfg = PipelineConfig {
            tokens: args.tokens.clone().or(rel(file.tokens)),
            sentences: args.sentences.clone().or(rel(file.sentences)),
            wordlists,
            tests: args.tests.clone().or(rel(file.tests)),
            coords: args.coords.clone().or(rel(file.coords)),
            conceptors,
            spec,
            out_dir: args
                .out_dir
                .clone()
                .or(rel(file.out_dir))
                .unwrap_or_else(|| PathBuf::from(".")),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            pooling: args.pooling.clone().or(file.pooling),
            resampling,
            n_perm,
        };
        cfg.check_files()?;
        Ok(cfg)
    }

    fn check_files(&self) -> anyhow::Result<()> {
        let mut paths: Vec<&PathBuf> = [&self.tokens, &self.sentences, &self.tests, &self.coords]
            .into_iter()
            .flatten()
            .collect();
        paths.extend(self.wordlists.values());
        paths.extend(&self.conceptors);
        for p in paths {
            if !p.is_file() {
                return Err(config_error(format!("file not found: {}", p.display())));
            }
        }
        Ok(())
    }
}

pub fn required<'a>(field: &'a Option<PathBuf>, name: &str) -> anyhow::Result<&'a PathBuf> {
    field
        .as_ref()
        .ok_or_else(|| config_error(format!("`{name}` is not set (config file or --{name})")))
}
