mod common;

use std::fs;

use common::*;
use conceptor_debias::conceptor_file::write_conceptor;
use conceptor_debias::interchange::{checksum, read_collection, Manifest};
use conceptor_debias::seat::{SeatReport, TestDefinition, TestSuite};
use conceptor_debias::synthetic::{gaussian, PlantedBiasConfig};
use conceptor_debias::{CollectionKind, Conceptor, EmbeddingCollection};
use rand_chacha::rand_core::SeedableRng;

fn random_sentences(seed: u64, n: usize, dim: usize) -> EmbeddingCollection {
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut c = EmbeddingCollection::new(dim, CollectionKind::Sentence);
    for i in 0..n {
        c.push_f64(format!("s{i}"), &gaussian(&mut r, dim, 1.0)).unwrap();
    }
    c
}

#[test]
fn debias_with_identity_is_bitwise_and_zero_gives_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f);
    let c = random_sentences(1, 30, 6);
    fs::create_dir_all(p("in")).unwrap();
    conceptor_debias::interchange::write_collection(&c, p("in/s.cemb")).unwrap();
    write_conceptor(&Conceptor::identity(6), p("i.ccon")).unwrap();
    write_conceptor(&Conceptor::zero(6), p("z.ccon")).unwrap();

    ok(&[
        "debias",
        "--conceptor",
        s(&p("i.ccon")),
        "--input",
        s(&p("in/s.cemb")),
        "-o",
        s(&p("out/id.cemb")),
    ]);
    ok(&[
        "debias",
        "--conceptor",
        s(&p("z.ccon")),
        "--input",
        s(&p("in/s.cemb")),
        "-o",
        s(&p("out/zero.cemb")),
    ]);

    let id = read_collection(p("out/id.cemb")).unwrap();
    for (a, b) in c.records().iter().zip(id.records()) {
        assert_eq!(a.key, b.key);
        let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.vector), bits(&b.vector));
    }
    let zero = read_collection(p("out/zero.cemb")).unwrap();
    assert!(zero.records().iter().all(|r| r.vector.iter().all(|&x| x == 0.0)));

    let m = Manifest::load(p("out/manifest.json")).unwrap();
    m.verify(p("out")).unwrap();
    assert_eq!(m.collections.len(), 2);
    let e = m.entry("id.cemb").unwrap();
    assert_eq!(
        e.metadata.extra["debias_conceptor_crc32"],
        format!("{:08x}", checksum(&fs::read(p("i.ccon")).unwrap()))
    );
    assert_eq!(e.metadata.extra["debias_conceptor"], "i.ccon");
}

#[test]
fn debias_keeps_input_manifest_metadata() {
    let fx = Fixture::new(&PlantedBiasConfig::default());
    write_conceptor(&Conceptor::identity(50), fx.path("i.ccon")).unwrap();
    ok(&[
        "debias",
        "--conceptor",
        s(&fx.path("i.ccon")),
        "--input",
        s(&fx.path("sentences/sentences.cemb")),
        "-o",
        s(&fx.path("debiased/sentences.cemb")),
    ]);
    let m = Manifest::load(fx.path("debiased/manifest.json")).unwrap();
    assert_eq!(m.collections[0].metadata.pooling.as_deref(), Some("mean"));
}

#[test]
fn seat_with_identical_attributes_gives_zero_effects() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_manifest(&root.join("sentences"), "s.cemb", &random_sentences(2, 40, 8));
    let ids = |r: std::ops::Range<usize>| r.map(|i| format!("s{i}")).collect::<Vec<_>>();
    let suite = TestSuite {
        tests: (0..3)
            .map(|k| TestDefinition {
                name: format!("same{k}"),
                attribute_a: ids(0..10),
                attribute_a_prime: ids(0..10),
                target_t: ids(10 + 5 * k..15 + 5 * k),
                target_t_prime: ids(25 + 5 * k..30 + 5 * k),
            })
            .collect(),
    };
    fs::write(root.join("tests.json"), suite.to_json().unwrap()).unwrap();
    let table = ok(&[
        "seat",
        "--sentences",
        s(&root.join("sentences/manifest.json")),
        "--tests",
        s(&root.join("tests.json")),
        "--out-dir",
        s(&root.join("out")),
    ]);
    let report: SeatReport = serde_json::from_slice(&fs::read(root.join("out/seat.json")).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 1);
    for r in &report.rows[0].results {
        assert_eq!(r.d, 0.0);
        assert_eq!(r.p_value, 1.0);
    }
    assert_eq!(report.metadata.seed, 42);
    assert!(table.contains("same2") && table.contains("Avg. Abs."));
    assert_eq!(fs::read_to_string(root.join("out/seat.txt")).unwrap(), table);
}

#[test]
fn seat_planted_rows_before_and_after() {
    let fx = Fixture::new(&PlantedBiasConfig::default());
    ok(&["build", "--config", s(&fx.config())]);
    let table = ok(&[
        "seat",
        "--config",
        s(&fx.config()),
        "--conceptor",
        s(&fx.path("out/synthetic-0.5-or.not.ccon")),
    ]);
    let report: SeatReport = serde_json::from_slice(&fs::read(fx.path("out/seat.json")).unwrap()).unwrap();
    let names: Vec<&str> = report.rows.iter().map(|r| r.variant.as_str()).collect();
    assert_eq!(names, ["raw", "synthetic-0.5-or.not"]);
    let (before, after) = (&report.rows[0].results[0], &report.rows[1].results[0]);
    assert!(before.d.abs() >= 1.5 && before.p_value < 0.01, "{before:?}");
    assert!(after.d.abs() <= 0.1 && after.p_value > 0.1, "{after:?}");
    assert_eq!(report.metadata.pooling.as_deref(), Some("mean"));
    assert_eq!(report.metadata.n_permutations, 2000);
    assert!(table.lines().nth(2).unwrap().contains('*'));
}

#[test]
fn seat_is_deterministic() {
    let fx = Fixture::new(&PlantedBiasConfig {
        sentence_bias: 0.2,
        ..Default::default()
    });
    let run = |out: &str| {
        ok(&["seat", "--config", s(&fx.config()), "--out-dir", s(&fx.path(out))]);
        fs::read(fx.path(&format!("{out}/seat.json"))).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn sweep_covers_every_percentile() {
    let fx = Fixture::new(&PlantedBiasConfig::default());
    let table = ok(&[
        "sweep",
        "--config",
        s(&fx.config()),
        "--modes",
        "pronouns,or",
        "--n-perm",
        "200",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&fs::read(fx.path("out/sweep.json")).unwrap()).unwrap();
    let rows = v["report"]["rows"].as_array().unwrap();
    let skipped = v["skipped"].as_array().unwrap();
    assert_eq!(rows.len() + skipped.len(), 1 + 20);
    assert_eq!(rows[0]["variant"], "raw");
    assert!(table.contains("synthetic-1.0-or"));
    assert!(table.contains("synthetic-0.5-pronouns"));
}

#[test]
fn winobias_prints_metrics() {
    let out = ok(&[
        "winobias",
        "--pro-male",
        "66.4",
        "--anti-male",
        "58.9",
        "--pro-female",
        "31.8",
        "--anti-female",
        "17.0",
    ]);
    assert_eq!(out, "skew    38.25\nstereo  11.15\n");
    let out = ok(&[
        "winobias",
        "--pro-male",
        "69.5",
        "--anti-male",
        "48.1",
        "--pro-female",
        "52.8",
        "--anti-female",
        "20.1",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["metrics"]["skew"].as_f64().unwrap() - 22.35).abs() < 1e-9);
    assert!((v["metrics"]["stereo"].as_f64().unwrap() - 27.05).abs() < 1e-9);
}
