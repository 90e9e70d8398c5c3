#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use conceptor_debias::interchange::{EmbeddingCollection, Manifest};
use conceptor_debias::seat::TestSuite;
use conceptor_debias::synthetic::{PlantedBias, PlantedBiasConfig};

pub fn cdebias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdebias"))
        .args(args)
        .output()
        .expect("failed to run cdebias")
}

pub fn ok(args: &[&str]) -> String {
    let out = cdebias(args);
    assert!(
        out.status.success(),
        "cdebias {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn code(args: &[&str]) -> i32 {
    cdebias(args).status.code().expect("killed by signal")
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn write_manifest(dir: &Path, file: &str, c: &EmbeddingCollection) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let mut m = Manifest::default();
    m.add_collection(dir, file, c).unwrap();
    let path = dir.join("manifest.json");
    m.save(&path).unwrap();
    path
}

pub fn write_lines(path: &Path, words: &[String]) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, words.join("\n") + "\n").unwrap();
}

/// Planted-bias data laid out as a pipeline: token and sentence manifests,
/// three wordlists splitting the gendered words, tests and a config file.
pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub planted: PlantedBias,
}

impl Fixture {
    pub fn new(cfg: &PlantedBiasConfig) -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let planted = PlantedBias::generate(cfg).unwrap();
        let root = dir.path();
        let mut tokens = planted.tokens.clone();
        tokens.metadata.corpus_id = Some("synthetic".into());
        write_manifest(&root.join("tokens"), "tokens.cemb", &tokens);
        let mut sentences = planted.sentences.clone();
        sentences.metadata.pooling = Some("mean".into());
        write_manifest(&root.join("sentences"), "sentences.cemb", &sentences);

        let words = |range: std::ops::Range<usize>| -> Vec<String> {
            range.flat_map(|i| [format!("male{i}"), format!("female{i}")]).collect()
        };
        let n = cfg.words_per_side;
        let third = n / 3;
        write_lines(&root.join("lists/pronouns.txt"), &words(0..third));
        write_lines(&root.join("lists/extended.txt"), &words(third..2 * third));
        write_lines(&root.join("lists/propernouns.txt"), &words(2 * third..n));

        let suite = TestSuite {
            tests: vec![planted.definition.clone()],
        };
        fs::write(root.join("tests.json"), suite.to_json().unwrap()).unwrap();
        fs::write(
            root.join("pipeline.json"),
            r#"{
  "tokens": "tokens/manifest.json",
  "sentences": "sentences/manifest.json",
  "tests": "tests.json",
  "wordlists": {
    "pronouns": "lists/pronouns.txt",
    "extended": "lists/extended.txt",
    "propernouns": "lists/propernouns.txt"
  },
  "setting": "synthetic-0.5-or",
  "out_dir": "out",
  "n_perm": 2000
}
"#,
        )
        .unwrap();
        Fixture { dir, planted }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn config(&self) -> PathBuf {
        self.path("pipeline.json")
    }
}
