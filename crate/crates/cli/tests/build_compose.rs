mod common;

use std::fs;

use common::*;
use conceptor_debias::conceptor_file::{read_conceptor, write_conceptor};
use conceptor_debias::interchange::checksum;
use conceptor_debias::linalg::max_abs_diff;
use conceptor_debias::synthetic::{gaussian, PlantedBiasConfig};
use conceptor_debias::{and_op, negate, or_op, CollectionKind, Conceptor, EmbeddingCollection};
use rand_chacha::rand_core::SeedableRng;

fn tiny_fixture(dir: &std::path::Path) -> std::path::PathBuf {
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut c = EmbeddingCollection::new(8, CollectionKind::Token);
    for w in ["he", "she", "him"] {
        for _ in 0..4 {
            c.push_f64(w, &gaussian(&mut r, 8, 1.0)).unwrap();
        }
    }
    write_manifest(&dir.join("tokens"), "tokens.cemb", &c);
    write_lines(&dir.join("pronouns.txt"), &["he".into(), "she".into(), "him".into()]);
    let cfg = dir.join("tiny.json");
    fs::write(
        &cfg,
        r#"{"tokens": "tokens/manifest.json", "wordlists": {"pronouns": "pronouns.txt"}, "setting": "tiny-0.5-pronouns"}"#,
    )
    .unwrap();
    cfg
}

#[test]
fn build_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_fixture(dir.path());
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        ok(&["build", "--config", s(&cfg), "--out-dir", s(&out)]);
        let files: Vec<Vec<u8>> = [
            "tiny-0.5-pronouns.ccon",
            "tiny-0.5-pronouns.not.ccon",
            "tiny-0.5-pronouns.json",
        ]
        .iter()
        .map(|f| fs::read(out.join(f)).unwrap())
        .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let sidecar: serde_json::Value = serde_json::from_slice(&outputs[0][2]).unwrap();
    assert_eq!(sidecar["seed"], 42);
    assert_eq!(sidecar["spec"]["mode"], "pronouns");
    assert_eq!(sidecar["filter_reports"]["pronouns"]["words_before"], 3);
}

#[test]
fn or_sidecar_records_three_spectra() {
    let fx = Fixture::new(&PlantedBiasConfig::default());
    ok(&["build", "--config", s(&fx.config())]);
    let sidecar: serde_json::Value =
        serde_json::from_slice(&fs::read(fx.path("out/synthetic-0.5-or.json")).unwrap()).unwrap();
    let spectra = sidecar["list_spectra"].as_object().unwrap();
    assert_eq!(spectra.len(), 3);
    for name in ["pronouns", "extended", "propernouns"] {
        assert_eq!(spectra[name].as_array().unwrap().len(), 50);
        assert!(sidecar["filter_reports"][name]["fences"].is_array());
    }
    let c = read_conceptor(fx.path("out/synthetic-0.5-or.ccon")).unwrap();
    let not = read_conceptor(fx.path("out/synthetic-0.5-or.not.ccon")).unwrap();
    assert!(max_abs_diff(negate(&c).matrix(), not.matrix()) == 0.0);
    assert_eq!(
        sidecar["conceptor"]["crc32"],
        format!(
            "{:08x}",
            checksum(&fs::read(fx.path("out/synthetic-0.5-or.ccon")).unwrap())
        )
    );
}

/// Checksums of the seed-42 planted build, frozen from a reference run.
/// Set UPDATE_GOLDEN=1 to regenerate after an intended numerical change.
#[test]
fn golden_build_under_seed_42() {
    let fx = Fixture::new(&PlantedBiasConfig::default());
    ok(&["build", "--config", s(&fx.config())]);
    let crc = |f: &str| format!("{:08x}", checksum(&fs::read(fx.path(&format!("out/{f}"))).unwrap()));
    let got = serde_json::json!({
        "setting": "synthetic-0.5-or",
        "ccon_crc32": crc("synthetic-0.5-or.ccon"),
        "not_ccon_crc32": crc("synthetic-0.5-or.not.ccon"),
    });
    let golden = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/build_seed42.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(golden, serde_json::to_string_pretty(&got).unwrap() + "\n").unwrap();
    }
    let want: serde_json::Value = serde_json::from_str(&fs::read_to_string(golden).unwrap()).unwrap();
    assert_eq!(got, want);
}

#[test]
fn compose_matches_library_algebra() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f);
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let make = |r: &mut rand_chacha::ChaCha8Rng| {
        let cols: Vec<Vec<f64>> = (0..12).map(|_| gaussian(r, 5, 1.0)).collect();
        conceptor_debias::compute_conceptor(&conceptor_debias::DataMatrix::from_columns(&cols).unwrap(), 1.0).unwrap()
    };
    let (a, b) = (make(&mut r), make(&mut r));
    write_conceptor(&a, p("a.ccon")).unwrap();
    write_conceptor(&b, p("b.ccon")).unwrap();
    write_conceptor(&Conceptor::identity(5), p("i.ccon")).unwrap();

    ok(&["compose", "not", s(&p("a.ccon")), "-o", s(&p("na.ccon"))]);
    ok(&["compose", "not", s(&p("na.ccon")), "-o", s(&p("nna.ccon"))]);
    assert!(max_abs_diff(read_conceptor(p("nna.ccon")).unwrap().matrix(), a.matrix()) <= 1e-15);

    ok(&[
        "compose",
        "and",
        s(&p("a.ccon")),
        s(&p("i.ccon")),
        "-o",
        s(&p("ai.ccon")),
    ]);
    assert!(max_abs_diff(read_conceptor(p("ai.ccon")).unwrap().matrix(), a.matrix()) <= 1e-6);

    // ¬(A ∨ B) from files against ¬A ∧ ¬B from the library.
    ok(&[
        "compose",
        "or",
        s(&p("a.ccon")),
        s(&p("b.ccon")),
        "-o",
        s(&p("aob.ccon")),
    ]);
    ok(&["compose", "not", s(&p("aob.ccon")), "-o", s(&p("naob.ccon"))]);
    let lhs = read_conceptor(p("naob.ccon")).unwrap();
    let rhs = and_op(&negate(&a), &negate(&b)).unwrap();
    assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) <= 1e-6);
    assert!(
        max_abs_diff(
            read_conceptor(p("aob.ccon")).unwrap().matrix(),
            or_op(&a, &b).unwrap().matrix()
        ) == 0.0
    );
}

#[test]
fn compose_rejects_bad_arity_and_dims() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f);
    write_conceptor(&Conceptor::identity(3), p("i3.ccon")).unwrap();
    write_conceptor(&Conceptor::identity(4), p("i4.ccon")).unwrap();
    assert_eq!(code(&["compose", "and", s(&p("i3.ccon")), "-o", s(&p("x.ccon"))]), 2);
    assert_eq!(
        code(&[
            "compose",
            "not",
            s(&p("i3.ccon")),
            s(&p("i4.ccon")),
            "-o",
            s(&p("x.ccon"))
        ]),
        2
    );
    assert_eq!(code(&["compose", "xor", s(&p("i3.ccon")), "-o", s(&p("x.ccon"))]), 2);
    assert_eq!(
        code(&[
            "compose",
            "or",
            s(&p("i3.ccon")),
            s(&p("i4.ccon")),
            "-o",
            s(&p("x.ccon"))
        ]),
        3
    );
    assert!(!p("x.ccon").exists());
}
