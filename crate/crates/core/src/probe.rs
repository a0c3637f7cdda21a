//! Linear softmax probe on mean-pooled patch embeddings.
//!
//! The probe measures how much class information survives in the embedding of
//! plain and encrypted images. Mean pooling over patches is invariant to the
//! order of the patches, so the block scramble has no effect on features
//! computed with adapted parameters.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::blocks::RasterImage;
use crate::cipher::{self, CipherSpec, KeyMode, Steps};
use crate::dataset::LabeledDataset;
use crate::embedding::{self, EmbeddingParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::keying::{KeyStream, MasterKey, SubkeyId};

/// Mean of the patch embeddings of `image`.
pub fn featurize(image: &RasterImage, params: &EmbeddingParams) -> Result<DVector<f64>> {
    let z = embedding::embed(image, params)?;
    Ok(z.row_mean().transpose())
}

pub fn featurize_all(
    images: &[RasterImage],
    params: &EmbeddingParams,
    exec: Execution,
) -> Result<Vec<DVector<f64>>> {
    exec.try_map(images, |img| featurize(img, params))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Hyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            learning_rate: 0.5,
            epochs: 200,
            batch_size: 32,
            seed: 0,
        }
    }
}

/// Gradient of the mean cross-entropy with respect to the probe parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

/// Logits are `weights^T x + bias` with `weights` of shape `D x K`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProbe {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub hyper: Hyper,
}

fn softmax(logits: &DVector<f64>) -> DVector<f64> {
    let max = logits.max();
    let e = logits.map(|l| (l - max).exp());
    let sum = e.sum();
    e / sum
}

impl LinearProbe {
    pub fn zeros(dim: usize, classes: usize) -> Self {
        LinearProbe {
            weights: DMatrix::zeros(dim, classes),
            bias: DVector::zeros(classes),
            hyper: Hyper::default(),
        }
    }

    /// Weights and bias uniform in `[-scale, scale]` from a seeded stream.
    pub fn random(dim: usize, classes: usize, scale: f64, seed: u64) -> Self {
        let mut s = KeyStream::new(SubkeyId::K4, seed);
        let mut unit =
            move || ((s.next_raw() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0) * scale;
        LinearProbe {
            weights: DMatrix::from_fn(dim, classes, |_, _| unit()),
            bias: DVector::from_fn(classes, |_, _| unit()),
            hyper: Hyper::default(),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn logits(&self, x: &DVector<f64>) -> DVector<f64> {
        self.weights.tr_mul(x) + &self.bias
    }

    /// Index of the largest logit; ties resolve to the lowest class.
    pub fn predict(&self, x: &DVector<f64>) -> usize {
        let l = self.logits(x);
        (0..l.len()).fold(0, |best, k| if l[k] > l[best] { k } else { best })
    }

    /// Mean cross-entropy over `(xs, ys)` and its analytic gradient.
    pub fn loss_and_gradient(&self, xs: &[&DVector<f64>], ys: &[usize]) -> (f64, Gradient) {
        let n = xs.len().max(1) as f64;
        let mut gw = DMatrix::zeros(self.weights.nrows(), self.weights.ncols());
        let mut gb = DVector::zeros(self.bias.len());
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let mut p = softmax(&self.logits(x));
            loss -= p[y].max(f64::MIN_POSITIVE).ln();
            p[y] -= 1.0;
            gw.ger(1.0, x, &p, 1.0);
            gb += &p;
        }
        (
            loss / n,
            Gradient {
                weights: gw / n,
                bias: gb / n,
            },
        )
    }

    pub fn loss(&self, xs: &[&DVector<f64>], ys: &[usize]) -> f64 {
        self.loss_and_gradient(xs, ys).0
    }

    /// Weights (column-major) followed by bias.
    pub fn parameters(&self) -> Vec<f64> {
        self.weights
            .iter()
            .chain(self.bias.iter())
            .copied()
            .collect()
    }

    pub fn set_parameters(&mut self, values: &[f64]) {
        let nw = self.weights.len();
        assert_eq!(values.len(), nw + self.bias.len(), "parameter count");
        self.weights.as_mut_slice().copy_from_slice(&values[..nw]);
        self.bias.as_mut_slice().copy_from_slice(&values[nw..]);
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().iter().all(|v| v.is_finite())
    }

    pub fn accuracy(&self, xs: &[DVector<f64>], ys: &[usize]) -> f64 {
        if xs.is_empty() {
            return 0.0;
        }
        let correct = xs
            .iter()
            .zip(ys)
            .filter(|(x, &y)| self.predict(x) == y)
            .count();
        correct as f64 / xs.len() as f64
    }
}

impl Gradient {
    pub fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .chain(self.bias.iter())
            .copied()
            .collect()
    }
}

/// Mini-batch gradient descent on softmax cross-entropy. Each epoch visits the
/// samples in an order drawn from `hyper.seed`, so training is deterministic.
pub fn train_on_features(
    xs: &[DVector<f64>],
    ys: &[usize],
    num_classes: usize,
    hyper: Hyper,
) -> Result<LinearProbe> {
    if num_classes < 2 {
        return Err(Error::Usage("training needs at least two classes".into()));
    }
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::Usage(
            "training needs a nonempty, fully labeled split".into(),
        ));
    }
    if ys.iter().all(|&y| y == ys[0]) {
        return Err(Error::Usage(
            "training split contains a single class".into(),
        ));
    }
    if hyper.batch_size == 0 {
        return Err(Error::Range("batch size must be positive".into()));
    }
    let dim = xs[0].len();
    let mut probe = LinearProbe::zeros(dim, num_classes);
    probe.hyper = hyper;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = KeyStream::new(SubkeyId::K1, hyper.seed);
    for _ in 0..hyper.epochs {
        for i in (1..order.len()).rev() {
            order.swap(i, rng.uniform_below(i as u64 + 1) as usize);
        }
        for batch in order.chunks(hyper.batch_size) {
            let bx: Vec<&DVector<f64>> = batch.iter().map(|&i| &xs[i]).collect();
            let by: Vec<usize> = batch.iter().map(|&i| ys[i]).collect();
            let (_, g) = probe.loss_and_gradient(&bx, &by);
            probe.weights -= g.weights * hyper.learning_rate;
            probe.bias -= g.bias * hyper.learning_rate;
        }
        if !probe.is_finite() {
            return Err(Error::Range(format!(
                "training diverged at learning rate {}",
                hyper.learning_rate
            )));
        }
    }
    Ok(probe)
}

fn split_features(
    ds: &LabeledDataset,
    idx: &[usize],
    features: &[DVector<f64>],
) -> (Vec<DVector<f64>>, Vec<usize>) {
    (
        idx.iter().map(|&i| features[i].clone()).collect(),
        idx.iter().map(|&i| ds.labels[i]).collect(),
    )
}

/// Featurizes the training split with `params` and fits a probe.
pub fn train(ds: &LabeledDataset, params: &EmbeddingParams, hyper: Hyper) -> Result<LinearProbe> {
    let images: Vec<RasterImage> = ds.train.iter().map(|&i| ds.images[i].clone()).collect();
    let xs = featurize_all(&images, params, Execution::default())?;
    let ys: Vec<usize> = ds.train.iter().map(|&i| ds.labels[i]).collect();
    train_on_features(&xs, &ys, ds.num_classes, hyper)
}

/// Test-split accuracy of `probe` on features computed with `params`.
pub fn evaluate(probe: &LinearProbe, ds: &LabeledDataset, params: &EmbeddingParams) -> Result<f64> {
    let images: Vec<RasterImage> = ds.test.iter().map(|&i| ds.images[i].clone()).collect();
    let xs = featurize_all(&images, params, Execution::default())?;
    let ys: Vec<usize> = ds.test.iter().map(|&i| ds.labels[i]).collect();
    Ok(probe.accuracy(&xs, &ys))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParityReport {
    pub classes: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub dim: usize,
    pub chance: f64,
    /// Plain-trained probe on plain test features.
    pub plain: f64,
    /// The same probe on uniform-key ciphertexts embedded with adapted parameters.
    pub adapted: f64,
    /// A probe trained and tested on per-block-key ciphertexts with fresh parameters.
    pub encrypted_direct: f64,
    /// Largest feature difference between the plain and adapted-ciphertext arms.
    pub feature_deviation: f64,
    /// Test samples whose predicted class differs between the plain and adapted arms.
    pub prediction_mismatches: usize,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ParityRecord<'a> {
    Header {
        classes: usize,
        train_size: usize,
        test_size: usize,
        dim: usize,
        chance: f64,
        #[serde(flatten)]
        hyper: &'a Hyper,
    },
    Arm {
        arm: &'static str,
        accuracy: f64,
    },
    Parity {
        feature_deviation: f64,
        prediction_mismatches: usize,
    },
}

impl ParityReport {
    pub fn to_json_lines(&self, hyper: &Hyper) -> String {
        let records = [
            ParityRecord::Header {
                classes: self.classes,
                train_size: self.train_size,
                test_size: self.test_size,
                dim: self.dim,
                chance: self.chance,
                hyper,
            },
            ParityRecord::Arm {
                arm: "plain",
                accuracy: self.plain,
            },
            ParityRecord::Arm {
                arm: "adapted",
                accuracy: self.adapted,
            },
            ParityRecord::Arm {
                arm: "encrypted_direct",
                accuracy: self.encrypted_direct,
            },
            ParityRecord::Parity {
                feature_deviation: self.feature_deviation,
                prediction_mismatches: self.prediction_mismatches,
            },
        ];
        records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} classes, {} train / {} test, dim {}, chance {:.4}",
            self.classes, self.train_size, self.test_size, self.dim, self.chance
        );
        let _ = writeln!(s, "{:<34} {:>8}", "arm", "accuracy");
        let _ = writeln!(s, "{:<34} {:>8.4}", "plain / plain", self.plain);
        let _ = writeln!(
            s,
            "{:<34} {:>8.4}",
            "adapted params / uniform-key EtC", self.adapted
        );
        let _ = writeln!(
            s,
            "{:<34} {:>8.4}",
            "trained on per-block-key EtC", self.encrypted_direct
        );
        let _ = writeln!(
            s,
            "feature deviation {:.3e}, prediction mismatches {}",
            self.feature_deviation, self.prediction_mismatches
        );
        s
    }
}

/// Settings for [`parity_experiment`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParityConfig {
    pub patch_size: usize,
    pub dim: usize,
    pub hyper: Hyper,
    /// Seed of the embedding parameters shared by the plain and adapted arms.
    pub params_seed: u64,
    /// Seed of the fresh parameters used by the directly-trained encrypted arm.
    pub fresh_params_seed: u64,
    pub steps: Steps,
}

impl Default for ParityConfig {
    fn default() -> Self {
        ParityConfig {
            patch_size: 16,
            dim: 64,
            hyper: Hyper::default(),
            params_seed: 1,
            fresh_params_seed: 2,
            steps: Steps::ALL,
        }
    }
}

fn encrypt_all(
    images: &[RasterImage],
    key: &MasterKey,
    spec: &CipherSpec,
    exec: Execution,
) -> Result<Vec<RasterImage>> {
    exec.try_map(images, |img| {
        Ok::<_, Error>(cipher::encrypt(img, key, spec)?.image)
    })
}

/// Runs the three probe arms.
pub fn parity_experiment(
    ds: &LabeledDataset,
    key: &MasterKey,
    cfg: &ParityConfig,
    exec: Execution,
) -> Result<ParityReport> {
    let (w, h) = ds
        .image_size()
        .ok_or_else(|| Error::Usage("empty dataset".into()))?;
    let n = cipher::block_count(
        w,
        h,
        &CipherSpec::new(cfg.patch_size, KeyMode::Uniform, cfg.steps),
    )?;
    let params = EmbeddingParams::random(cfg.patch_size, n, cfg.dim, cfg.params_seed);

    let plain_features = featurize_all(&ds.images, &params, exec)?;
    let (train_x, train_y) = split_features(ds, &ds.train, &plain_features);
    let (test_x, test_y) = split_features(ds, &ds.test, &plain_features);
    let probe = train_on_features(&train_x, &train_y, ds.num_classes, cfg.hyper)?;
    let plain = probe.accuracy(&test_x, &test_y);

    let uniform = CipherSpec::new(cfg.patch_size, KeyMode::Uniform, cfg.steps);
    let adapted_params = embedding::adapt_params(&params, key, &uniform)?;
    let uniform_enc = encrypt_all(&ds.images, key, &uniform, exec)?;
    let adapted_features = featurize_all(&uniform_enc, &adapted_params, exec)?;
    let feature_deviation = plain_features
        .iter()
        .zip(&adapted_features)
        .map(|(a, b)| (a - b).amax())
        .fold(0.0, f64::max);
    let (adapted_x, _) = split_features(ds, &ds.test, &adapted_features);
    let adapted = probe.accuracy(&adapted_x, &test_y);
    let prediction_mismatches = test_x
        .iter()
        .zip(&adapted_x)
        .filter(|(a, b)| probe.predict(a) != probe.predict(b))
        .count();

    let per_block = CipherSpec::new(cfg.patch_size, KeyMode::PerBlock, cfg.steps);
    let fresh = EmbeddingParams::random(cfg.patch_size, n, cfg.dim, cfg.fresh_params_seed);
    let per_block_enc = encrypt_all(&ds.images, key, &per_block, exec)?;
    let enc_features = featurize_all(&per_block_enc, &fresh, exec)?;
    let (etrain_x, etrain_y) = split_features(ds, &ds.train, &enc_features);
    let (etest_x, etest_y) = split_features(ds, &ds.test, &enc_features);
    let enc_probe = train_on_features(&etrain_x, &etrain_y, ds.num_classes, cfg.hyper)?;
    let encrypted_direct = enc_probe.accuracy(&etest_x, &etest_y);

    Ok(ParityReport {
        classes: ds.num_classes,
        train_size: ds.train.len(),
        test_size: ds.test.len(),
        dim: cfg.dim,
        chance: 1.0 / ds.num_classes as f64,
        plain,
        adapted,
        encrypted_direct,
        feature_deviation,
        prediction_mismatches,
    })
}
