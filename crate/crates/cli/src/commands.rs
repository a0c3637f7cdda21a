use std::fs;
use std::path::{Path, PathBuf};

use etc_core::cipher::{self, CipherSpec, EncryptedImage, KeyMode};
use etc_core::dataset::{self, LabeledDataset};
use etc_core::embedding::{self, EmbeddingParams};
use etc_core::evaluation::{compression_report, leakage_report};
use etc_core::exec::Execution;
use etc_core::io;
use etc_core::keying::MasterKey;
use etc_core::probe::{self, Hyper, ParityConfig};
use etc_core::{Error, Result};
use serde_json::json;

use crate::{CipherArgs, CompressionArgs, CorpusArgs, EmbedCheckArgs, Outcome, ProbeArgs};

fn load_key(path: &Path) -> Result<MasterKey> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    MasterKey::parse_key_file(&text)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn keygen(out: &Path, force: bool, seeds: Option<&[u64]>) -> Result<Outcome> {
    if out.exists() && !force {
        return Err(Error::Usage(format!(
            "{} exists; pass --force to overwrite",
            out.display()
        )));
    }
    let key = match seeds {
        Some(s) => MasterKey::new(s.try_into().map_err(|_| {
            Error::Usage(format!("--from-seeds needs four seeds, got {}", s.len()))
        })?),
        None => entropy_key()?,
    };
    write_file(out, key.to_key_file().as_bytes())?;
    Ok(Outcome::Done)
}

fn entropy_key() -> Result<MasterKey> {
    loop {
        let mut bytes = [0u8; 32];
        getrandom::fill(&mut bytes)
            .map_err(|e| Error::Usage(format!("OS entropy unavailable: {e}")))?;
        let seeds: [u64; 4] = std::array::from_fn(|i| {
            u64::from_le_bytes(bytes[i * 8..i * 8 + 8].try_into().unwrap())
        });
        if seeds.iter().any(|&s| s != 0) {
            return Ok(MasterKey::new(seeds));
        }
    }
}

/// Absolute form of `path`, resolving symlinks in the part that exists.
fn resolve(path: &Path) -> PathBuf {
    let abs = std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf());
    let mut existing = abs.as_path();
    let mut rest = Vec::new();
    while !existing.exists() {
        match (existing.parent(), existing.file_name()) {
            (Some(p), Some(name)) => {
                rest.push(name.to_os_string());
                existing = p;
            }
            _ => return abs,
        }
    }
    let mut out = fs::canonicalize(existing).unwrap_or_else(|_| existing.to_path_buf());
    out.extend(rest.iter().rev());
    out
}

/// Input/output pairs for a single file or a directory tree.
fn jobs(input: &Path, output: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let (src, dst) = (resolve(input), resolve(output));
    if input.is_dir() {
        if dst.starts_with(&src) {
            return Err(Error::Usage(format!(
                "output directory {} lies inside input directory {}",
                output.display(),
                input.display()
            )));
        }
        let rels = io::list_images(input)?;
        if rels.is_empty() {
            return Err(Error::Usage(format!("no images below {}", input.display())));
        }
        Ok(rels
            .into_iter()
            .map(|rel| (input.join(&rel), output.join(rel.with_extension("png"))))
            .collect())
    } else {
        if src == dst {
            return Err(Error::Usage("output would overwrite the input".into()));
        }
        if output
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
            != Some("png")
        {
            return Err(Error::Usage(format!(
                "{} must be a .png file; ciphertexts are stored losslessly",
                output.display()
            )));
        }
        Ok(vec![(input.to_path_buf(), output.to_path_buf())])
    }
}

fn run_jobs(
    args: &CipherArgs,
    exec: Execution,
    step: impl Fn(
            etc_core::blocks::RasterImage,
            &MasterKey,
            &CipherSpec,
        ) -> Result<etc_core::blocks::RasterImage>
        + Sync
        + Send,
) -> Result<Outcome> {
    let key = load_key(&args.key)?;
    let spec = args.spec.spec();
    let jobs = jobs(&args.input, &args.output)?;
    exec.try_map(&jobs, |(src, dst)| {
        let mut img = io::load_image(src)?;
        if args.center_crop {
            img = img.center_crop(spec.block_size)?;
        }
        io::save_png(dst, &step(img, &key, &spec)?)
    })?;
    for (_, dst) in &jobs {
        println!("{}", dst.display());
    }
    Ok(Outcome::Done)
}

pub fn encrypt(args: &CipherArgs, exec: Execution) -> Result<Outcome> {
    run_jobs(args, exec, |img, key, spec| {
        Ok(cipher::encrypt(&img, key, spec)?.image)
    })
}

pub fn decrypt(args: &CipherArgs, exec: Execution) -> Result<Outcome> {
    run_jobs(args, exec, |image, key, spec| {
        cipher::decrypt(&EncryptedImage { image, spec: *spec }, key)
    })
}

pub fn embed_check(args: &EmbedCheckArgs) -> Result<Outcome> {
    if args.trials == 0 {
        return Err(Error::Usage("--trials must be positive".into()));
    }
    let key = load_key(&args.key)?;
    let spec = CipherSpec::new(args.patch, args.mode, args.steps);
    let mut img = io::load_image(&args.input)?;
    if args.center_crop {
        img = img.center_crop(args.patch)?;
    }
    let n = cipher::block_count(img.width(), img.height(), &spec)?;
    if spec.mode != KeyMode::Uniform {
        return Err(Error::Mode(
            "embedding adaptation is exact only for uniform keys; rerun with --mode uniform".into(),
        ));
    }
    let mut worst = 0.0f64;
    for t in 0..args.trials {
        let params = EmbeddingParams::random(args.patch, n, args.dim, args.seed.wrapping_add(t));
        let adapted = embedding::adapt_params(&params, &key, &spec)?;
        if t == 0 {
            if let Some(dir) = &args.dump {
                dump_matrices(dir, &params, &adapted, &key, &spec, n)?;
            }
        }
        worst = worst.max(embedding::equivalence_deviation(
            &img, &params, &adapted, &key, &spec,
        )?);
    }
    let pass = worst < args.tolerance;
    if args.json_lines {
        let rec = json!({
            "record": "embed_check",
            "patch": args.patch,
            "dim": args.dim,
            "patches": n,
            "trials": args.trials,
            "max_deviation": worst,
            "tolerance": args.tolerance,
            "pass": pass,
        });
        println!("{rec}");
    } else {
        println!(
            "{} trials, {} patches, dim {}: max deviation {:.3e} (tolerance {:e}) {}",
            args.trials,
            n,
            args.dim,
            worst,
            args.tolerance,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(if pass {
        Outcome::Done
    } else {
        Outcome::Violated
    })
}

fn dump_matrices(
    dir: &Path,
    params: &EmbeddingParams,
    adapted: &EmbeddingParams,
    key: &MasterKey,
    spec: &CipherSpec,
    n: usize,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let (e1, e2) = embedding::key_matrices(key, spec, n)?;
    let files = [
        ("E1.txt", e1.to_matrix()),
        ("E2.txt", e2.to_matrix()),
        ("E.txt", params.projection().clone()),
        ("E_pos.txt", params.positions().clone()),
        ("E_adapted.txt", adapted.projection().clone()),
        ("E_pos_adapted.txt", adapted.positions().clone()),
    ];
    for (name, m) in files {
        write_file(&dir.join(name), embedding::format_matrix(&m).as_bytes())?;
    }
    Ok(())
}

fn load_corpus(args: &CorpusArgs) -> Result<(Vec<io::CorpusImage>, MasterKey, CipherSpec)> {
    let spec = args.spec.spec();
    let crop = args.center_crop.then_some(spec.block_size);
    Ok((
        io::load_corpus(&args.corpus, crop)?,
        load_key(&args.key)?,
        spec,
    ))
}

pub fn report_compression(args: &CompressionArgs, exec: Execution) -> Result<Outcome> {
    let (corpus, key, spec) = load_corpus(&args.corpus)?;
    let report = compression_report(&corpus, &key, &spec, &args.qf, exec)?;
    if args.corpus.json_lines {
        print!("{}", report.to_json_lines());
    } else {
        print!("{}", report.to_table());
    }
    Ok(Outcome::Done)
}

pub fn report_leakage(args: &CorpusArgs, exec: Execution) -> Result<Outcome> {
    let (corpus, key, spec) = load_corpus(args)?;
    let report = leakage_report(&corpus, &key, &spec, exec)?;
    if args.json_lines {
        print!("{}", report.to_json_lines());
    } else {
        print!("{}", report.to_table());
    }
    Ok(Outcome::Done)
}

pub fn probe(args: &ProbeArgs, exec: Execution) -> Result<Outcome> {
    let key = load_key(&args.key)?;
    let ds: LabeledDataset = match (&args.corpus, args.synthetic) {
        (Some(dir), _) => dataset::load_class_dirs(dir, args.patch, args.seed)?.0,
        (None, Some(count)) => dataset::synthetic_shapes(count, args.size, args.seed)?,
        (None, None) => unreachable!("clap requires one data source"),
    };
    let hyper = Hyper {
        learning_rate: args.lr,
        epochs: args.epochs,
        batch_size: args.batch,
        seed: args.seed,
    };
    let cfg = ParityConfig {
        patch_size: args.patch,
        dim: args.dim,
        hyper,
        params_seed: args.seed.wrapping_add(1),
        fresh_params_seed: args.seed.wrapping_add(2),
        steps: args.steps,
    };
    let report = probe::parity_experiment(&ds, &key, &cfg, exec)?;
    if args.json_lines {
        print!("{}", report.to_json_lines(&hyper));
    } else {
        print!("{}", report.to_table());
    }
    let parity = report.prediction_mismatches == 0 && report.feature_deviation < args.tolerance;
    Ok(if parity {
        Outcome::Done
    } else {
        Outcome::Violated
    })
}
