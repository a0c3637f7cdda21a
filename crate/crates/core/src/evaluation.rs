//! Compressibility and visual-leakage measurements.
//!
//! JPEG files are produced by one fixed encoder configuration (baseline,
//! 4:2:0 chroma subsampling, standard Huffman tables) and PNG stands in for a
//! lossless codec. Absolute byte counts depend on the encoder; the reports are
//! meant for plain-vs-encrypted ratios.

use std::fmt::Write as _;

use jpeg_encoder::{ColorType, Encoder, SamplingFactor};
use serde::Serialize;

use crate::blocks::{RasterImage, CHANNELS};
use crate::cipher::{self, CipherSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::{self, CorpusImage};
use crate::keying::MasterKey;

pub const JPEG_ENCODER: &str = "jpeg-encoder 0.6 baseline";
pub const JPEG_CHROMA: &str = "4:2:0";
pub const LOSSLESS_CODEC: &str = "png (image crate defaults)";

/// SSIM window side length.
pub const SSIM_WINDOW: usize = 8;
const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Encoded JPEG bytes and the image they decode to.
#[derive(Clone, Debug)]
pub struct JpegRoundtrip {
    pub encoded: Vec<u8>,
    pub decoded: RasterImage,
}

impl JpegRoundtrip {
    pub fn size(&self) -> usize {
        self.encoded.len()
    }
}

pub fn encode_jpeg(image: &RasterImage, quality: u8) -> Result<Vec<u8>> {
    if !(1..=100).contains(&quality) {
        return Err(Error::Range(format!(
            "JPEG quality {quality} is not in 1..=100"
        )));
    }
    let (w, h) = (image.width(), image.height());
    let (w16, h16) = match (u16::try_from(w), u16::try_from(h)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return Err(Error::Shape(format!("{w}x{h} exceeds JPEG limits"))),
    };
    let mut out = Vec::new();
    let mut encoder = Encoder::new(&mut out, quality);
    encoder.set_sampling_factor(SamplingFactor::R_4_2_0);
    encoder
        .encode(image.pixels(), w16, h16, ColorType::Rgb)
        .map_err(|e| Error::codec("<jpeg encoder>", e))?;
    Ok(out)
}

pub fn jpeg_roundtrip(image: &RasterImage, quality: u8) -> Result<JpegRoundtrip> {
    let encoded = encode_jpeg(image, quality)?;
    let decoded = io::decode_image(&encoded, "<jpeg roundtrip>")?;
    if decoded.width() != image.width() || decoded.height() != image.height() {
        return Err(Error::codec(
            "<jpeg roundtrip>",
            format!(
                "decoded {}x{} from a {}x{} input",
                decoded.width(),
                decoded.height(),
                image.width(),
                image.height()
            ),
        ));
    }
    Ok(JpegRoundtrip { encoded, decoded })
}

pub fn jpeg_roundtrip_size(image: &RasterImage, quality: u8) -> Result<usize> {
    Ok(jpeg_roundtrip(image, quality)?.size())
}

pub fn png_size(image: &RasterImage) -> Result<usize> {
    Ok(io::encode_png(image)?.len())
}

/// Summed-area table over one channel plane with a zero first row and column.
struct Integral {
    stride: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn new(width: usize, height: usize, value: impl Fn(usize, usize) -> f64) -> Self {
        let stride = width + 1;
        let mut sums = vec![0.0; stride * (height + 1)];
        for y in 0..height {
            let mut row = 0.0;
            for x in 0..width {
                row += value(x, y);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Integral { stride, sums }
    }

    fn window(&self, x: usize, y: usize, n: usize) -> f64 {
        let s = self.stride;
        self.sums[(y + n) * s + x + n] - self.sums[y * s + x + n] - self.sums[(y + n) * s + x]
            + self.sums[y * s + x]
    }
}

/// Mean SSIM over every 8x8 window position (stride 1) with uniform weights,
/// computed per channel and averaged over R, G, B. Window statistics use the
/// population variance. Constants are `C1 = (0.01*255)^2`, `C2 = (0.03*255)^2`.
pub fn ssim(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    let (w, h) = (a.width(), a.height());
    if (w, h) != (b.width(), b.height()) {
        return Err(Error::Shape(format!(
            "SSIM of {w}x{h} and {}x{} images",
            b.width(),
            b.height()
        )));
    }
    let n = SSIM_WINDOW;
    if w < n || h < n {
        return Err(Error::Shape(format!(
            "SSIM needs at least {n}x{n} pixels, got {w}x{h}"
        )));
    }
    let (pa, pb) = (a.pixels(), b.pixels());
    let count = (n * n) as f64;
    let windows = (w - n + 1) * (h - n + 1);
    let mut total = 0.0;
    for c in 0..CHANNELS {
        let at = |p: &[u8], x: usize, y: usize| p[(y * w + x) * CHANNELS + c] as f64;
        // Integer-valued sums are exact in f64, which keeps the score symmetric in (a, b).
        let sa = Integral::new(w, h, |x, y| at(pa, x, y));
        let sb = Integral::new(w, h, |x, y| at(pb, x, y));
        let saa = Integral::new(w, h, |x, y| at(pa, x, y) * at(pa, x, y));
        let sbb = Integral::new(w, h, |x, y| at(pb, x, y) * at(pb, x, y));
        let sab = Integral::new(w, h, |x, y| at(pa, x, y) * at(pb, x, y));
        let mut channel = 0.0;
        for y in 0..=h - n {
            for x in 0..=w - n {
                let ma = sa.window(x, y, n) / count;
                let mb = sb.window(x, y, n) / count;
                let va = saa.window(x, y, n) / count - ma * ma;
                let vb = sbb.window(x, y, n) / count - mb * mb;
                let cov = sab.window(x, y, n) / count - ma * mb;
                channel += ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
                    / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2));
            }
        }
        total += channel / windows as f64;
    }
    Ok(total / CHANNELS as f64)
}

/// Five-number summary plus mean. Quartiles interpolate linearly between
/// order statistics (position `q * (n - 1)`), the usual box-plot convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Summary {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct JpegSizes {
    pub quality: u8,
    pub plain: usize,
    pub encrypted: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageSizes {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub uncompressed: usize,
    pub plain_png: usize,
    pub encrypted_png: usize,
    pub jpeg: Vec<JpegSizes>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionReport {
    pub spec: CipherSpec,
    pub qualities: Vec<u8>,
    pub images: Vec<ImageSizes>,
}

/// One line of machine-readable report output. Fields serialize in declaration order.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum CompressionRecord {
    Header {
        jpeg_encoder: &'static str,
        chroma: &'static str,
        lossless: &'static str,
        block_size: usize,
        mode: String,
        steps: String,
        images: usize,
    },
    Image {
        name: String,
        codec: String,
        plain_bytes: usize,
        encrypted_bytes: usize,
    },
    Total {
        codec: String,
        plain_bytes: usize,
        encrypted_bytes: usize,
        ratio: f64,
    },
}

fn codec_label(quality: Option<u8>) -> String {
    match quality {
        Some(q) => format!("jpeg_qf{q}"),
        None => "png".to_string(),
    }
}

impl CompressionReport {
    /// `(plain, encrypted)` byte totals for a JPEG quality, or PNG when `None`.
    pub fn totals(&self, quality: Option<u8>) -> Option<(usize, usize)> {
        match quality {
            None => Some((
                self.images.iter().map(|i| i.plain_png).sum(),
                self.images.iter().map(|i| i.encrypted_png).sum(),
            )),
            Some(q) => self.qualities.contains(&q).then(|| {
                self.images
                    .iter()
                    .flat_map(|i| i.jpeg.iter().filter(|j| j.quality == q))
                    .fold((0, 0), |(p, e), j| (p + j.plain, e + j.encrypted))
            }),
        }
    }

    pub fn uncompressed_total(&self) -> usize {
        self.images.iter().map(|i| i.uncompressed).sum()
    }

    /// Encrypted total divided by plain total.
    pub fn ratio(&self, quality: Option<u8>) -> Option<f64> {
        self.totals(quality).map(|(p, e)| e as f64 / p as f64)
    }

    fn codecs(&self) -> Vec<Option<u8>> {
        self.qualities
            .iter()
            .map(|&q| Some(q))
            .chain([None])
            .collect()
    }

    /// Header, then per-image records (sorted by name, codecs in request order,
    /// PNG last), then one total per codec.
    pub fn records(&self) -> Vec<CompressionRecord> {
        let mut out = vec![CompressionRecord::Header {
            jpeg_encoder: JPEG_ENCODER,
            chroma: JPEG_CHROMA,
            lossless: LOSSLESS_CODEC,
            block_size: self.spec.block_size,
            mode: self.spec.mode.to_string(),
            steps: self.spec.steps.to_string(),
            images: self.images.len(),
        }];
        for img in &self.images {
            for j in &img.jpeg {
                out.push(CompressionRecord::Image {
                    name: img.name.clone(),
                    codec: codec_label(Some(j.quality)),
                    plain_bytes: j.plain,
                    encrypted_bytes: j.encrypted,
                });
            }
            out.push(CompressionRecord::Image {
                name: img.name.clone(),
                codec: codec_label(None),
                plain_bytes: img.plain_png,
                encrypted_bytes: img.encrypted_png,
            });
        }
        for q in self.codecs() {
            let (p, e) = self.totals(q).expect("requested codec");
            out.push(CompressionRecord::Total {
                codec: codec_label(q),
                plain_bytes: p,
                encrypted_bytes: e,
                ratio: e as f64 / p as f64,
            });
        }
        out
    }

    pub fn to_json_lines(&self) -> String {
        json_lines(&self.records())
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let raw = self.uncompressed_total();
        let _ = writeln!(
            s,
            "{} images, block {}, mode {}, steps {}",
            self.images.len(),
            self.spec.block_size,
            self.spec.mode,
            self.spec.steps
        );
        let _ = writeln!(
            s,
            "{JPEG_ENCODER} {JPEG_CHROMA}; lossless: {LOSSLESS_CODEC}"
        );
        let _ = writeln!(
            s,
            "{:<12} {:>14} {:>14} {:>8}",
            "codec", "plain", "encrypted", "ratio"
        );
        let _ = writeln!(s, "{:<12} {:>14} {:>14} {:>8.4}", "raw", raw, raw, 1.0);
        for q in self.codecs() {
            let (p, e) = self.totals(q).expect("requested codec");
            let _ = writeln!(
                s,
                "{:<12} {:>14} {:>14} {:>8.4}",
                codec_label(q),
                p,
                e,
                e as f64 / p as f64
            );
        }
        s
    }
}

fn json_lines<T: Serialize>(records: &[T]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}

fn image_sizes(
    item: &CorpusImage,
    key: &MasterKey,
    spec: &CipherSpec,
    qualities: &[u8],
) -> Result<ImageSizes> {
    let with_name = |e: Error| match e {
        Error::Codec { message, .. } => Error::Codec {
            path: item.name.clone(),
            message,
        },
        Error::Dimension { .. } => Error::Shape(format!("{}: {e}", item.name)),
        other => other,
    };
    let plain = &item.image;
    let enc = cipher::encrypt(plain, key, spec).map_err(with_name)?.image;
    let jpeg = qualities
        .iter()
        .map(|&q| {
            Ok(JpegSizes {
                quality: q,
                plain: jpeg_roundtrip_size(plain, q)?,
                encrypted: jpeg_roundtrip_size(&enc, q)?,
            })
        })
        .collect::<Result<_>>()
        .map_err(with_name)?;
    Ok(ImageSizes {
        name: item.name.clone(),
        width: plain.width(),
        height: plain.height(),
        uncompressed: plain.pixels().len(),
        plain_png: png_size(plain).map_err(with_name)?,
        encrypted_png: png_size(&enc).map_err(with_name)?,
        jpeg,
    })
}

/// Sizes every corpus image before and after encryption. Images are sorted by
/// name in the report regardless of scheduling.
pub fn compression_report(
    corpus: &[CorpusImage],
    key: &MasterKey,
    spec: &CipherSpec,
    qualities: &[u8],
    exec: Execution,
) -> Result<CompressionReport> {
    if corpus.is_empty() {
        return Err(Error::Usage(
            "compression report needs at least one image".into(),
        ));
    }
    if let Some(&q) = qualities.iter().find(|q| !(1..=100).contains(*q)) {
        return Err(Error::Range(format!("JPEG quality {q} is not in 1..=100")));
    }
    let mut images = exec.try_map(corpus, |item| image_sizes(item, key, spec, qualities))?;
    images.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(CompressionReport {
        spec: *spec,
        qualities: qualities.to_vec(),
        images,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SsimScore {
    pub name: String,
    pub ssim: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SsimReport {
    pub spec: CipherSpec,
    pub scores: Vec<SsimScore>,
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LeakageRecord {
    Header {
        metric: &'static str,
        window: usize,
        block_size: usize,
        mode: String,
        steps: String,
        images: usize,
    },
    Image {
        name: String,
        ssim: f64,
    },
    Summary {
        #[serde(flatten)]
        summary: Summary,
    },
}

impl SsimReport {
    pub fn records(&self) -> Vec<LeakageRecord> {
        let mut out = vec![LeakageRecord::Header {
            metric: "ssim",
            window: SSIM_WINDOW,
            block_size: self.spec.block_size,
            mode: self.spec.mode.to_string(),
            steps: self.spec.steps.to_string(),
            images: self.scores.len(),
        }];
        out.extend(self.scores.iter().map(|s| LeakageRecord::Image {
            name: s.name.clone(),
            ssim: s.ssim,
        }));
        out.push(LeakageRecord::Summary {
            summary: self.summary,
        });
        out
    }

    pub fn to_json_lines(&self) -> String {
        json_lines(&self.records())
    }

    pub fn to_table(&self) -> String {
        let s = &self.summary;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "SSIM(plain, encrypted) over {} images, block {}, mode {}, steps {}",
            self.scores.len(),
            self.spec.block_size,
            self.spec.mode,
            self.spec.steps
        );
        let _ = writeln!(
            out,
            "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "min", "q1", "median", "q3", "max", "mean"
        );
        let _ = writeln!(
            out,
            "{:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            s.min, s.q1, s.median, s.q3, s.max, s.mean
        );
        out
    }
}

/// SSIM between each plaintext and its ciphertext.
pub fn leakage_report(
    corpus: &[CorpusImage],
    key: &MasterKey,
    spec: &CipherSpec,
    exec: Execution,
) -> Result<SsimReport> {
    if corpus.is_empty() {
        return Err(Error::Usage(
            "leakage report needs at least one image".into(),
        ));
    }
    let mut scores = exec.try_map(corpus, |item| {
        let enc = cipher::encrypt(&item.image, key, spec)?;
        Ok::<_, Error>(SsimScore {
            name: item.name.clone(),
            ssim: ssim(&item.image, &enc.image)?,
        })
    })?;
    scores.sort_by(|a, b| a.name.cmp(&b.name));
    let values: Vec<f64> = scores.iter().map(|s| s.ssim).collect();
    Ok(SsimReport {
        spec: *spec,
        summary: Summary::of(&values).expect("nonempty corpus"),
        scores,
    })
}
