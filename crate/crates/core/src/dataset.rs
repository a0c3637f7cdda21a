//! Labeled image sets for the linear probe.

use std::fs;
use std::path::Path;

use crate::blocks::RasterImage;
use crate::error::{Error, Result};
use crate::io;
use crate::keying::{KeyStream, SubkeyId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledDataset {
    pub images: Vec<RasterImage>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub split_seed: u64,
}

impl LabeledDataset {
    /// Shuffles indices with `split_seed` and holds out `test_fraction` of them.
    pub fn new(
        images: Vec<RasterImage>,
        labels: Vec<usize>,
        num_classes: usize,
        test_fraction: f64,
        split_seed: u64,
    ) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::Range(format!(
                "label {l} with {num_classes} classes"
            )));
        }
        if let Some(first) = images.first() {
            if images
                .iter()
                .any(|i| (i.width(), i.height()) != (first.width(), first.height()))
            {
                return Err(Error::Shape("dataset images differ in size".into()));
            }
        }
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::Range(format!("test fraction {test_fraction}")));
        }
        let mut order: Vec<usize> = (0..images.len()).collect();
        let mut s = KeyStream::new(SubkeyId::K1, split_seed);
        for i in (1..order.len()).rev() {
            order.swap(i, s.uniform_below(i as u64 + 1) as usize);
        }
        let n_test = (images.len() as f64 * test_fraction).round() as usize;
        let test = order[..n_test].to_vec();
        let train = order[n_test..].to_vec();
        Ok(LabeledDataset {
            images,
            labels,
            num_classes,
            train,
            test,
            split_seed,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image_size(&self) -> Option<(usize, usize)> {
        self.images.first().map(|i| (i.width(), i.height()))
    }
}

pub const SHAPE_CLASSES: usize = 4;
const CLASS_NAMES: [&str; SHAPE_CLASSES] = ["square", "disc", "hbar", "vbar"];
/// Base color of each class. Shapes jitter around it.
const CLASS_COLORS: [[f64; 3]; SHAPE_CLASSES] = [
    [210.0, 60.0, 50.0],
    [60.0, 190.0, 70.0],
    [50.0, 80.0, 215.0],
    [215.0, 200.0, 50.0],
];

pub fn shape_class_name(label: usize) -> &'static str {
    CLASS_NAMES[label]
}

struct Unit(KeyStream);

impl Unit {
    fn next(&mut self) -> f64 {
        (self.0.next_raw() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

/// Colored geometric shapes on a noisy gray background.
///
/// Class `k` draws shape `k` (square, disc, horizontal bar, vertical bar) in a
/// jittered version of the class color at a random position and size. Labels
/// cycle through the classes so the set is balanced.
pub fn synthetic_shapes(count: usize, size: usize, seed: u64) -> Result<LabeledDataset> {
    if size < 8 {
        return Err(Error::Range(format!(
            "shape images must be at least 8 pixels, got {size}"
        )));
    }
    let mut rng = Unit(KeyStream::new(SubkeyId::K2, seed));
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    let s = size as f64;
    for i in 0..count {
        let label = i % SHAPE_CLASSES;
        let bg = rng.range(40.0, 200.0);
        let base = CLASS_COLORS[label];
        let color: Vec<f64> = base
            .iter()
            .map(|c| (c + rng.range(-35.0, 35.0)).clamp(0.0, 255.0))
            .collect();
        let (cx, cy) = (rng.range(0.3, 0.7) * s, rng.range(0.3, 0.7) * s);
        let half = rng.range(0.18, 0.32) * s;
        let thin = rng.range(0.06, 0.12) * s;
        let noise_seed = rng.0.next_raw();
        let mut noise = Unit(KeyStream::new(SubkeyId::K3, noise_seed));
        let image = RasterImage::from_fn(size, size, |x, y| {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            let inside = match label {
                0 => dx.abs() <= half && dy.abs() <= half,
                1 => dx * dx + dy * dy <= half * half,
                2 => dy.abs() <= thin && dx.abs() <= 1.6 * half,
                _ => dx.abs() <= thin && dy.abs() <= 1.6 * half,
            };
            let mut px = [0u8; 3];
            for (c, p) in px.iter_mut().enumerate() {
                let v = if inside { color[c] } else { bg } + noise.range(-12.0, 12.0);
                *p = v.round().clamp(0.0, 255.0) as u8;
            }
            px
        });
        images.push(image);
        labels.push(label);
    }
    LabeledDataset::new(images, labels, SHAPE_CLASSES, 0.25, seed)
}

/// Loads a directory with one subdirectory per class. Classes are numbered in
/// sorted subdirectory order; images are center-cropped to multiples of `crop`
/// and then cut to the smallest size found so all share one shape.
pub fn load_class_dirs(
    dir: &Path,
    crop: usize,
    split_seed: u64,
) -> Result<(LabeledDataset, Vec<String>)> {
    let mut classes: Vec<String> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_ok_and(|t| t.is_dir()))
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    classes.sort();
    if classes.len() < 2 {
        return Err(Error::Usage(format!(
            "{} needs at least two class subdirectories",
            dir.display()
        )));
    }
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (label, class) in classes.iter().enumerate() {
        for item in io::load_corpus(&dir.join(class), Some(crop))? {
            images.push(item.image);
            labels.push(label);
        }
    }
    if images.is_empty() {
        return Err(Error::Usage(format!("no images below {}", dir.display())));
    }
    let w = images.iter().map(|i| i.width()).min().unwrap();
    let h = images.iter().map(|i| i.height()).min().unwrap();
    let images = images.into_iter().map(|img| crop_to(&img, w, h)).collect();
    Ok((
        LabeledDataset::new(images, labels, classes.len(), 0.25, split_seed)?,
        classes,
    ))
}

fn crop_to(img: &RasterImage, w: usize, h: usize) -> RasterImage {
    let (x0, y0) = ((img.width() - w) / 2, (img.height() - h) / 2);
    RasterImage::from_fn(w, h, |x, y| img.pixel(x0 + x, y0 + y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_are_balanced_and_deterministic() {
        let a = synthetic_shapes(40, 32, 7).unwrap();
        let b = synthetic_shapes(40, 32, 7).unwrap();
        assert_eq!(a, b);
        for k in 0..SHAPE_CLASSES {
            assert_eq!(a.labels.iter().filter(|&&l| l == k).count(), 10);
        }
        assert_eq!(a.test.len(), 10);
        assert_eq!(a.train.len(), 30);
        let mut all: Vec<usize> = a.train.iter().chain(&a.test).copied().collect();
        all.sort();
        assert_eq!(all, (0..40).collect::<Vec<_>>());
        assert_ne!(synthetic_shapes(40, 32, 8).unwrap().images, a.images);
    }

    #[test]
    fn dataset_validation() {
        let img = RasterImage::filled(16, 16, [0, 0, 0]);
        assert!(LabeledDataset::new(vec![img.clone()], vec![], 2, 0.0, 0).is_err());
        assert!(LabeledDataset::new(vec![img.clone()], vec![2], 2, 0.0, 0).is_err());
        let other = RasterImage::filled(32, 16, [0, 0, 0]);
        assert!(LabeledDataset::new(vec![img, other], vec![0, 1], 2, 0.0, 0).is_err());
        assert!(synthetic_shapes(4, 4, 0).is_err());
    }

    #[test]
    fn class_dirs_loader() {
        let dir = tempfile::tempdir().unwrap();
        let shapes = synthetic_shapes(8, 32, 1).unwrap();
        for (i, (img, &l)) in shapes.images.iter().zip(&shapes.labels).enumerate() {
            let p = dir
                .path()
                .join(shape_class_name(l))
                .join(format!("{i}.png"));
            io::save_png(&p, img).unwrap();
        }
        let (ds, names) = load_class_dirs(dir.path(), 16, 3).unwrap();
        assert_eq!(names, vec!["disc", "hbar", "square", "vbar"]);
        assert_eq!(ds.len(), 8);
        assert_eq!(ds.num_classes, 4);
    }
}
