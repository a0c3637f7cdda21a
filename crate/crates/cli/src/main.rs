use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use etc_core::cipher::{CipherSpec, KeyMode, Steps};
use etc_core::exec::{self, Execution};

mod commands;

/// Block-scrambling image encryption toolkit.
#[derive(Parser)]
#[command(name = "etc", version)]
struct Cli {
    /// Maximum worker threads (1 runs everything sequentially).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a new key file.
    Keygen(KeygenArgs),
    /// Encrypt an image, or every image below a directory.
    Encrypt(CipherArgs),
    /// Decrypt an image or directory written by `encrypt`.
    Decrypt(CipherArgs),
    /// Check the adapted-embedding identity on one image.
    EmbedCheck(EmbedCheckArgs),
    /// Corpus reports.
    #[command(subcommand)]
    Report(Report),
    /// Linear-probe parity experiment.
    Probe(ProbeArgs),
}

#[derive(Args)]
struct KeygenArgs {
    out: PathBuf,
    /// Overwrite an existing file.
    #[arg(long)]
    force: bool,
    /// Use these four seeds instead of OS entropy (decimal or 0x-prefixed hex).
    #[arg(long, value_delimiter = ',', value_parser = parse_seed)]
    from_seeds: Option<Vec<u64>>,
}

#[derive(Args, Clone)]
struct SpecArgs {
    #[arg(long, default_value_t = CipherSpec::JPEG_BLOCK)]
    block: usize,
    #[arg(long, default_value_t = KeyMode::PerBlock)]
    mode: KeyMode,
    /// Comma-separated subset of scramble,dihedral,negpos,colorshuffle, or all/none.
    #[arg(long, default_value_t = Steps::ALL)]
    steps: Steps,
}

impl SpecArgs {
    fn spec(&self) -> CipherSpec {
        CipherSpec::new(self.block, self.mode, self.steps)
    }
}

#[derive(Args)]
struct CipherArgs {
    #[arg(long)]
    key: PathBuf,
    #[command(flatten)]
    spec: SpecArgs,
    /// Crop inputs to the largest centered region divisible by the block size.
    #[arg(long)]
    center_crop: bool,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Args)]
struct EmbedCheckArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long, default_value_t = CipherSpec::JPEG_BLOCK)]
    patch: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = KeyMode::Uniform)]
    mode: KeyMode,
    #[arg(long, default_value_t = Steps::ALL)]
    steps: Steps,
    /// Seed of the first trial's random embedding; trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long)]
    center_crop: bool,
    /// Write the first trial's matrices as text files into this directory.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long)]
    json_lines: bool,
    input: PathBuf,
}

#[derive(Subcommand)]
enum Report {
    /// Plain vs. encrypted file sizes under JPEG and PNG.
    Compression(CompressionArgs),
    /// SSIM between each plain image and its ciphertext.
    Leakage(CorpusArgs),
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    key: PathBuf,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    center_crop: bool,
    /// Emit JSON records, one per line, instead of a table.
    #[arg(long)]
    json_lines: bool,
}

#[derive(Args)]
struct CompressionArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// JPEG quality factors.
    #[arg(long, value_delimiter = ',', default_value = "85")]
    qf: Vec<u8>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("data").required(true).args(["corpus", "synthetic"])))]
struct ProbeArgs {
    /// Directory with one subdirectory of images per class.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Generate this many synthetic shape images instead.
    #[arg(long)]
    synthetic: Option<usize>,
    /// Side length of synthetic images.
    #[arg(long, default_value_t = 32)]
    size: usize,
    #[arg(long)]
    key: PathBuf,
    #[arg(long, default_value_t = CipherSpec::JPEG_BLOCK)]
    patch: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    lr: f64,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = Steps::ALL)]
    steps: Steps,
    /// Seeds the synthetic data, the split, the embeddings and training order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long)]
    json_lines: bool,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("bad seed `{s}`: {e}"))
}

/// How a command finished when it did not hit an error.
#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Done,
    /// A checked property did not hold.
    Violated,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = match cli.threads {
        Some(0) => {
            eprintln!("etc: --threads must be positive");
            return ExitCode::from(2);
        }
        Some(1) => Execution::Sequential,
        Some(n) => {
            if let Err(e) = exec::limit_threads(n) {
                eprintln!("etc: {e}");
                return ExitCode::from(2);
            }
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let result = match cli.command {
        Command::Keygen(a) => commands::keygen(&a.out, a.force, a.from_seeds.as_deref()),
        Command::Encrypt(a) => commands::encrypt(&a, exec),
        Command::Decrypt(a) => commands::decrypt(&a, exec),
        Command::EmbedCheck(a) => commands::embed_check(&a),
        Command::Report(Report::Compression(a)) => commands::report_compression(&a, exec),
        Command::Report(Report::Leakage(a)) => commands::report_leakage(&a, exec),
        Command::Probe(a) => commands::probe(&a, exec),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(1),
        Err(e) => {
            eprintln!("etc: {e}");
            ExitCode::from(2)
        }
    }
}
