use std::path::Path;

use etc_core::cipher::{self, CipherSpec, KeyMode, Steps};
use etc_core::evaluation::{self, compression_report, leakage_report, Summary};
use etc_core::exec::Execution;
use etc_core::io::{self, CorpusImage};
use etc_core::keying::MasterKey;

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/corpus");

fn corpus() -> Vec<CorpusImage> {
    io::load_corpus(Path::new(CORPUS), None).unwrap()
}

fn key() -> MasterKey {
    MasterKey::new([0x1234, 0x5678, 0x9abc, 0xdef0])
}

#[test]
fn corpus_is_sorted_and_block_aligned() {
    let c = corpus();
    assert_eq!(c.len(), 120);
    assert!(c.windows(2).all(|w| w[0].name < w[1].name));
    assert!(c
        .iter()
        .all(|i| i.image.width() % 16 == 0 && i.image.height() % 16 == 0));
}

#[test]
fn wrong_key_does_not_recover_plaintext() {
    let c = corpus();
    let spec = CipherSpec::default();
    let wrong = MasterKey::new([0x1235, 0x5679, 0x9abd, 0xdef1]);
    let scores: Vec<f64> = c
        .iter()
        .map(|item| {
            let enc = cipher::encrypt(&item.image, &key(), &spec).unwrap();
            let dec = cipher::decrypt(&enc, &wrong).unwrap();
            evaluation::ssim(&item.image, &dec).unwrap()
        })
        .collect();
    let s = Summary::of(&scores).unwrap();
    assert!(s.mean < 0.2, "wrong-key mean SSIM {}", s.mean);
}

#[test]
fn encrypted_images_survive_jpeg() {
    let c = corpus();
    let mut scores = Vec::new();
    for item in &c {
        let enc = cipher::encrypt(&item.image, &key(), &CipherSpec::default()).unwrap();
        let rt = evaluation::jpeg_roundtrip(&enc.image, 85).unwrap();
        assert_eq!(
            (rt.decoded.width(), rt.decoded.height()),
            (enc.image.width(), enc.image.height())
        );
        let lossy = cipher::decrypt(
            &cipher::EncryptedImage {
                image: rt.decoded,
                spec: enc.spec,
            },
            &key(),
        )
        .unwrap();
        scores.push(evaluation::ssim(&item.image, &lossy).unwrap());
    }
    // Chroma subsampling mixes shuffled color planes, so lossy decryption
    // trails plain JPEG, but the content must come back.
    let s = Summary::of(&scores).unwrap();
    assert!(s.mean > 0.8 && s.min > 0.5, "{s:?}");
}

#[test]
fn lower_quality_is_smaller() {
    let report = compression_report(
        &corpus(),
        &key(),
        &CipherSpec::default(),
        &[80, 85],
        Execution::Parallel,
    )
    .unwrap();
    let (p80, e80) = report.totals(Some(80)).unwrap();
    let (p85, e85) = report.totals(Some(85)).unwrap();
    assert!(p80 <= p85 && e80 <= e85);
    let (plain_png, etc_png) = report.totals(None).unwrap();
    assert!(plain_png > 0 && etc_png > 0);
}

#[test]
fn execution_modes_agree() {
    let c: Vec<CorpusImage> = corpus().into_iter().take(12).collect();
    let spec = CipherSpec::default();
    let seq = compression_report(&c, &key(), &spec, &[85], Execution::Sequential).unwrap();
    let par = compression_report(&c, &key(), &spec, &[85], Execution::Parallel).unwrap();
    assert_eq!(seq.to_json_lines(), par.to_json_lines());
    let seq = leakage_report(&c, &key(), &spec, Execution::Sequential).unwrap();
    let par = leakage_report(&c, &key(), &spec, Execution::Parallel).unwrap();
    assert_eq!(seq.to_json_lines(), par.to_json_lines());
}

#[test]
fn scrambling_alone_leaks_more() {
    let c = corpus();
    let full = leakage_report(&c, &key(), &CipherSpec::default(), Execution::Parallel).unwrap();
    let scramble_only = Steps {
        scramble: true,
        ..Steps::NONE
    };
    let partial = leakage_report(
        &c,
        &key(),
        &CipherSpec::new(16, KeyMode::PerBlock, scramble_only),
        Execution::Parallel,
    )
    .unwrap();
    assert!(partial.summary.mean > full.summary.mean);
}

#[test]
fn json_lines_parse() {
    let c: Vec<CorpusImage> = corpus().into_iter().take(3).collect();
    let report = compression_report(
        &c,
        &key(),
        &CipherSpec::default(),
        &[85],
        Execution::Sequential,
    )
    .unwrap();
    let lines: Vec<serde_json::Value> = report
        .to_json_lines()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.first().unwrap()["record"], "header");
    assert_eq!(lines.last().unwrap()["record"], "total");
    assert_eq!(
        lines.iter().filter(|v| v["record"] == "image").count(),
        3 * 2
    );
    assert_eq!(lines.iter().filter(|v| v["record"] == "total").count(), 2);
}
