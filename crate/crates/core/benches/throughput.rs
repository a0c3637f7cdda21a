//! Sequential vs. parallel execution of the corpus-level workloads.
//!
//! Build with `--no-default-features` to measure the fallback path alone;
//! `Parallel` then runs sequentially too.

use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use etc_core::blocks::RasterImage;
use etc_core::cipher::{self, CipherSpec};
use etc_core::embedding::EmbeddingParams;
use etc_core::evaluation::compression_report;
use etc_core::exec::Execution;
use etc_core::io;
use etc_core::keying::MasterKey;
use etc_core::probe;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn corpus() -> Vec<io::CorpusImage> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus");
    io::load_corpus(&dir, None).expect("fixture corpus")
}

fn key() -> MasterKey {
    MasterKey::new([0x1234, 0x5678, 0x9abc, 0xdef0])
}

fn encrypt_corpus(c: &mut Criterion) {
    let images: Vec<RasterImage> = corpus().into_iter().map(|i| i.image).collect();
    let spec = CipherSpec::default();
    let key = key();
    let mut g = c.benchmark_group("encrypt_corpus");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                exec.try_map(&images, |img| cipher::encrypt(black_box(img), &key, &spec))
                    .unwrap()
            })
        });
    }
    g.finish();

    // Block-level parallelism inside one large image.
    let big = RasterImage::from_fn(1024, 768, |x, y| {
        [(x ^ y) as u8, (x * 3) as u8, (y * 5) as u8]
    });
    let mut g = c.benchmark_group("encrypt_1024x768");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| cipher::encrypt_with(black_box(&big), &key, &spec, exec).unwrap())
        });
    }
    g.finish();
}

fn featurize(c: &mut Criterion) {
    let images: Vec<RasterImage> = corpus().into_iter().map(|i| i.image).collect();
    let mut g = c.benchmark_group("featurize_corpus");
    for dim in [16, 64] {
        let params = EmbeddingParams::random(16, 16, dim, 1);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, dim), &params, |b, p| {
                b.iter(|| probe::featurize_all(&images, p, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn report(c: &mut Criterion) {
    let corpus = corpus();
    let key = key();
    let mut g = c.benchmark_group("compression_report_qf85");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                compression_report(&corpus, &key, &CipherSpec::default(), &[85], exec).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, encrypt_corpus, featurize, report);
criterion_main!(benches);
