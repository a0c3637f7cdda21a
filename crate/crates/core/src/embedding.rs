//! Patch embedding and its adaptation to encrypted inputs.
//!
//! Patches are row vectors: for the flattened, normalized patch `x_i` at grid
//! position `i` the embedding is `z_i = x_i E + e_pos_i`, with `E` of shape
//! `(P*P*C) x D` and the positional table `E_pos` of shape `N x D`.
//!
//! Under uniform-key encryption every normalized ciphertext patch is
//! `c_p = M x_{perm[p]}` for a single signed permutation `M` (steps 2-4) and
//! the block permutation `perm` (step 1). Replacing `E` by `M E` and `E_pos`
//! by `P1 E_pos`, where `P1` has a one at `(p, perm[p])`, makes the ciphertext
//! embedding equal to `P1` applied to the plaintext embedding.

use nalgebra::DMatrix;

use crate::blocks::{self, RasterImage, CHANNELS};
use crate::cipher::{self, BlockTransform, CipherPlan, CipherSpec, KeyMode};
use crate::error::{Error, Result};
use crate::keying::{KeyStream, MasterKey, SubkeyId};

/// A square matrix with exactly one `±1` per row and column.
///
/// Row `i` has its nonzero entry `signs[i]` in column `perm[i]`, so
/// `(M v)[i] = signs[i] * v[perm[i]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        SignedPermutation {
            perm: (0..n).collect(),
            signs: vec![1; n],
        }
    }

    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        blocks::check_permutation(&perm, perm.len())?;
        if signs.len() != perm.len() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Shape("signs must be ±1, one per row".into()));
        }
        Ok(SignedPermutation { perm, signs })
    }

    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        Self::new(perm, vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Every sign flipped.
    pub fn negated(&self) -> Self {
        SignedPermutation {
            perm: self.perm.clone(),
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &SignedPermutation) -> SignedPermutation {
        assert_eq!(self.len(), rhs.len(), "size mismatch");
        let perm = self.perm.iter().map(|&j| rhs.perm[j]).collect();
        let signs = self
            .perm
            .iter()
            .zip(&self.signs)
            .map(|(&j, &s)| s * rhs.signs[j])
            .collect();
        SignedPermutation { perm, signs }
    }

    /// Transpose, which is also the inverse.
    pub fn transpose(&self) -> SignedPermutation {
        let n = self.len();
        let mut perm = vec![0; n];
        let mut signs = vec![1; n];
        for (i, (&j, &s)) in self.perm.iter().zip(&self.signs).enumerate() {
            perm[j] = i;
            signs[j] = s;
        }
        SignedPermutation { perm, signs }
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &SignedPermutation) -> SignedPermutation {
        let m = rhs.len();
        let mut perm = Vec::with_capacity(self.len() * m);
        let mut signs = Vec::with_capacity(self.len() * m);
        for (&a, &sa) in self.perm.iter().zip(&self.signs) {
            for (&b, &sb) in rhs.perm.iter().zip(&rhs.signs) {
                perm.push(a * m + b);
                signs.push(sa * sb);
            }
        }
        SignedPermutation { perm, signs }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, (&j, &s)) in self.perm.iter().zip(&self.signs).enumerate() {
            m[(i, j)] = s as f64;
        }
        m
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.len(), "size mismatch");
        self.perm
            .iter()
            .zip(&self.signs)
            .map(|(&j, &s)| s as f64 * v[j])
            .collect()
    }

    /// `self * a`: row `i` of the result is `signs[i]` times row `perm[i]` of `a`.
    pub fn apply_rows(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(a.nrows(), self.len(), "size mismatch");
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, c| {
            self.signs[i] as f64 * a[(self.perm[i], c)]
        })
    }
}

/// Maps an 8-bit value to `[-1, 1]`: `(v/255 - 0.5) / 0.5`.
///
/// Evaluated as `(2v - 255) / 255`, the same real number, so that
/// `normalize(255 - v) == -normalize(v)` holds bit for bit.
#[inline]
pub fn normalize(v: u8) -> f64 {
    (2.0 * v as f64 - 255.0) / 255.0
}

/// Normalized flattened patch.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedPatch {
    pub values: Vec<f64>,
}

pub fn normalize_patch(patch: &blocks::FlatPatch) -> NormalizedPatch {
    NormalizedPatch {
        values: patch.values.iter().map(|&v| normalize(v)).collect(),
    }
}

/// Patch projection `E` and positional table `E_pos`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingParams {
    patch_size: usize,
    projection: DMatrix<f64>,
    positions: DMatrix<f64>,
}

impl EmbeddingParams {
    pub fn new(
        patch_size: usize,
        projection: DMatrix<f64>,
        positions: DMatrix<f64>,
    ) -> Result<Self> {
        let rows = patch_size * patch_size * CHANNELS;
        if patch_size == 0 || projection.nrows() != rows {
            return Err(Error::Shape(format!(
                "projection needs {rows} rows for patch size {patch_size}, got {}",
                projection.nrows()
            )));
        }
        if positions.ncols() != projection.ncols() {
            return Err(Error::Shape(format!(
                "positional table has {} columns, projection has {}",
                positions.ncols(),
                projection.ncols()
            )));
        }
        Ok(EmbeddingParams {
            patch_size,
            projection,
            positions,
        })
    }

    /// Zero-mean uniform entries drawn from a SplitMix64 stream seeded with `seed`.
    /// Projection entries lie in `±1/sqrt(P*P*C)`, positional entries in `±0.1`.
    pub fn random(patch_size: usize, num_patches: usize, dim: usize, seed: u64) -> Self {
        let rows = patch_size * patch_size * CHANNELS;
        let mut s = KeyStream::new(SubkeyId::K1, seed);
        let mut unit = move || (s.next_raw() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        let scale = 1.0 / (rows as f64).sqrt();
        let projection = DMatrix::from_fn(rows, dim, |_, _| unit() * scale);
        let positions = DMatrix::from_fn(num_patches, dim, |_, _| unit() * 0.1);
        EmbeddingParams {
            patch_size,
            projection,
            positions,
        }
    }

    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    pub fn dim(&self) -> usize {
        self.projection.ncols()
    }

    pub fn num_patches(&self) -> usize {
        self.positions.nrows()
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    pub fn positions(&self) -> &DMatrix<f64> {
        &self.positions
    }
}

/// Row `p` is the normalized flattened patch at grid position `p`.
pub fn patch_matrix(image: &RasterImage, patch_size: usize) -> Result<DMatrix<f64>> {
    let grid = blocks::split(image, patch_size, patch_size)?;
    let cols = patch_size * patch_size * CHANNELS;
    let mut m = DMatrix::zeros(grid.len(), cols);
    for (p, block) in grid.blocks().iter().enumerate() {
        for (c, &v) in blocks::flatten(block).values.iter().enumerate() {
            m[(p, c)] = normalize(v);
        }
    }
    Ok(m)
}

/// Embeds every patch: an `N x D` matrix whose row `i` is `normalize(x_i) E + e_pos_i`.
pub fn embed(image: &RasterImage, params: &EmbeddingParams) -> Result<DMatrix<f64>> {
    let patches = patch_matrix(image, params.patch_size).map_err(|e| match e {
        Error::Dimension { .. } => Error::Shape(e.to_string()),
        other => other,
    })?;
    if patches.nrows() != params.num_patches() {
        return Err(Error::Shape(format!(
            "image has {} patches, positional table has {}",
            patches.nrows(),
            params.num_patches()
        )));
    }
    Ok(patches * &params.projection + &params.positions)
}

/// `E1`: the block scramble drawn from K1, as a row permutation with a one at `(p, perm[p])`.
pub fn position_permutation(key: &MasterKey, n: usize) -> SignedPermutation {
    let perm = cipher::scramble_permutation(&mut key.stream(SubkeyId::K1), n);
    SignedPermutation::from_permutation(perm).expect("Fisher-Yates yields a permutation")
}

/// One clockwise quarter turn on `size*size` pixel indices.
fn quarter_turn(size: usize) -> SignedPermutation {
    let perm = (0..size * size)
        .map(|i| {
            let (y, x) = (i / size, i % size);
            (size - 1 - x) * size + y
        })
        .collect();
    SignedPermutation::from_permutation(perm).unwrap()
}

fn mirror(size: usize) -> SignedPermutation {
    let perm = (0..size * size)
        .map(|i| (i / size) * size + size - 1 - i % size)
        .collect();
    SignedPermutation::from_permutation(perm).unwrap()
}

/// `E2`: the signed permutation with
/// `flatten(normalize(apply_transform(b, t))) == E2 * flatten(normalize(b))`
/// for every `patch_size`-square RGB block `b`.
///
/// Built from the generators (quarter turn, mirror, channel permutation, sign)
/// rather than from the pixel-domain transform.
pub fn block_transform_matrix(t: &BlockTransform, patch_size: usize) -> SignedPermutation {
    let turn = quarter_turn(patch_size);
    let mut spatial = SignedPermutation::identity(patch_size * patch_size);
    for _ in 0..t.dihedral.quarter_turns() {
        spatial = turn.compose(&spatial);
    }
    if t.dihedral.flipped() {
        spatial = mirror(patch_size).compose(&spatial);
    }
    let channels = SignedPermutation::from_permutation(t.colors.sources().to_vec()).unwrap();
    let m = channels.kron(&spatial);
    if t.negate {
        m.negated()
    } else {
        m
    }
}

fn require_uniform(spec: &CipherSpec) -> Result<()> {
    match spec.mode {
        KeyMode::Uniform => Ok(()),
        KeyMode::PerBlock => Err(Error::Mode(
            "embedding adaptation is exact only for uniform-key encryption".into(),
        )),
    }
}

fn require_patch_matches(params: &EmbeddingParams, spec: &CipherSpec) -> Result<()> {
    if params.patch_size != spec.block_size {
        return Err(Error::Shape(format!(
            "patch size {} differs from cipher block size {}",
            params.patch_size, spec.block_size
        )));
    }
    Ok(())
}

/// The pair `(E1, E2)` for a uniform-key spec over `n` blocks.
pub fn key_matrices(
    key: &MasterKey,
    spec: &CipherSpec,
    n: usize,
) -> Result<(SignedPermutation, SignedPermutation)> {
    require_uniform(spec)?;
    let plan = CipherPlan::derive(key, spec, n);
    let e1 = SignedPermutation::from_permutation(plan.permutation)?;
    let t = plan.transforms.first().copied().unwrap_or_default();
    Ok((e1, block_transform_matrix(&t, spec.block_size)))
}

/// Parameters that, applied to uniform-key ciphertexts, reproduce the plaintext
/// embedding up to the `E1` row permutation: `E' = E2 E`, `E'_pos = E1 E_pos`.
pub fn adapt_params(
    params: &EmbeddingParams,
    key: &MasterKey,
    spec: &CipherSpec,
) -> Result<EmbeddingParams> {
    require_uniform(spec)?;
    require_patch_matches(params, spec)?;
    let (e1, e2) = key_matrices(key, spec, params.num_patches())?;
    Ok(EmbeddingParams {
        patch_size: params.patch_size,
        projection: e2.apply_rows(&params.projection),
        positions: e1.apply_rows(&params.positions),
    })
}

/// `max |embed(encrypt(image), adapted) - E1 * embed(image, params)|` for any mode.
///
/// `E1` is taken from the scramble step of `spec` (identity when disabled).
pub fn equivalence_deviation(
    image: &RasterImage,
    params: &EmbeddingParams,
    adapted: &EmbeddingParams,
    key: &MasterKey,
    spec: &CipherSpec,
) -> Result<f64> {
    require_patch_matches(params, spec)?;
    let enc = cipher::encrypt(image, key, spec)?;
    let n = cipher::block_count(image.width(), image.height(), spec)?;
    let e1 = SignedPermutation::from_permutation(CipherPlan::derive(key, spec, n).permutation)?;
    let lhs = embed(&enc.image, adapted)?;
    let rhs = e1.apply_rows(&embed(image, params)?);
    Ok((lhs - rhs).amax())
}

/// Checks the adaptation on one instance. Only defined for uniform-key specs.
pub fn verify_equivalence(
    image: &RasterImage,
    params: &EmbeddingParams,
    key: &MasterKey,
    spec: &CipherSpec,
) -> Result<f64> {
    let adapted = adapt_params(params, key, spec)?;
    equivalence_deviation(image, params, &adapted, key, spec)
}

/// Writes a matrix as plain text: a `rows cols` header line, then one
/// whitespace-separated row per line in `{:e}` round-trip notation.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:e}", m[(r, c)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Shape("empty matrix dump".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Shape(format!("bad header `{header}`")))
        })
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Shape(format!("bad header `{header}`")));
    };
    let values: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Shape(format!("bad number `{t}`")))
        })
        .collect::<Result<_>>()?;
    if values.len() != rows * cols {
        return Err(Error::Shape(format!(
            "expected {} values, found {}",
            rows * cols,
            values.len()
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::testutil::{noise_block, noise_image};
    use crate::cipher::{apply_transform, ColorPerm, Dihedral, Steps};
    use proptest::prelude::*;

    fn uniform(steps: Steps) -> CipherSpec {
        CipherSpec::new(4, KeyMode::Uniform, steps)
    }

    #[test]
    fn normalize_endpoints() {
        assert_eq!(normalize(0), -1.0);
        assert_eq!(normalize(255), 1.0);
        assert!((normalize(51) + 0.6).abs() < 1e-15);
        assert!((normalize(204) - 0.6).abs() < 1e-15);
        assert_eq!(normalize(204), -normalize(51));
    }

    #[test]
    fn normalize_negation_exact() {
        for v in 0..=255u8 {
            assert_eq!(normalize(255 - v), -normalize(v), "v = {v}");
        }
    }

    #[test]
    fn normalize_matches_affine_form() {
        for v in 0..=255u8 {
            let direct = (v as f64 / 255.0 - 0.5) / 0.5;
            assert!((normalize(v) - direct).abs() <= 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn signed_permutation_algebra() {
        let a = SignedPermutation::new(vec![2, 0, 1], vec![1, -1, 1]).unwrap();
        let b = SignedPermutation::new(vec![1, 2, 0], vec![-1, -1, 1]).unwrap();
        assert_eq!(a.compose(&b).to_matrix(), a.to_matrix() * b.to_matrix());
        assert_eq!(a.transpose().to_matrix(), a.to_matrix().transpose());
        assert_eq!(a.compose(&a.transpose()), SignedPermutation::identity(3));
        let v = [1.0, 2.0, 3.0];
        assert_eq!(a.apply(&v), vec![3.0, -1.0, 2.0]);
        assert!(SignedPermutation::new(vec![0, 0], vec![1, 1]).is_err());
        assert!(SignedPermutation::new(vec![0, 1], vec![1, 2]).is_err());
    }

    #[test]
    fn kron_matches_dense() {
        let a = SignedPermutation::new(vec![1, 0], vec![1, -1]).unwrap();
        let b = SignedPermutation::new(vec![2, 0, 1], vec![-1, 1, 1]).unwrap();
        assert_eq!(
            a.kron(&b).to_matrix(),
            a.to_matrix().kronecker(&b.to_matrix())
        );
    }

    #[test]
    fn position_permutation_golden() {
        let e1 = position_permutation(&MasterKey::default(), 4);
        // Block 0 moves to position 2.
        let m = e1.to_matrix();
        assert_eq!(m[(2, 0)], 1.0);
        assert_eq!(e1.perm(), &[2, 1, 0, 3]);
        for i in 0..4 {
            assert_eq!(m.row(i).sum(), 1.0);
            assert_eq!(m.column(i).sum(), 1.0);
        }
        assert_eq!(
            position_permutation(&MasterKey::new([7; 4]), 1),
            SignedPermutation::identity(1)
        );
    }

    #[test]
    fn transform_matrix_special_cases() {
        assert_eq!(
            block_transform_matrix(&BlockTransform::IDENTITY, 4),
            SignedPermutation::identity(48)
        );
        let neg = BlockTransform {
            negate: true,
            ..BlockTransform::IDENTITY
        };
        assert_eq!(
            block_transform_matrix(&neg, 4),
            SignedPermutation::identity(48).negated()
        );
    }

    fn normalized_flat(b: &blocks::Block) -> Vec<f64> {
        normalize_patch(&blocks::flatten(b)).values
    }

    #[test]
    fn transform_matrix_matches_pixels_small() {
        for t in BlockTransform::all() {
            for seed in 0..3 {
                let b = noise_block(3, seed);
                let lhs = normalized_flat(&apply_transform(&b, t).unwrap());
                let rhs = block_transform_matrix(&t, 3).apply(&normalized_flat(&b));
                assert_eq!(lhs, rhs, "{t:?}");
            }
        }
    }

    #[test]
    fn transform_matrix_homomorphism() {
        for t1 in BlockTransform::all() {
            for t2 in BlockTransform::all() {
                let composed = block_transform_matrix(&t1.then(t2), 2);
                let product =
                    block_transform_matrix(&t2, 2).compose(&block_transform_matrix(&t1, 2));
                assert_eq!(composed, product);
            }
        }
    }

    #[test]
    fn embed_zero_params() {
        let p = EmbeddingParams::new(4, DMatrix::zeros(48, 5), DMatrix::zeros(4, 5)).unwrap();
        let z = embed(&noise_image(8, 8, 1), &p).unwrap();
        assert_eq!(z, DMatrix::zeros(4, 5));
    }

    #[test]
    fn embed_selects_pixel_zero() {
        let mut e = DMatrix::zeros(48, 1);
        e[(0, 0)] = 1.0;
        let pos = DMatrix::from_element(1, 1, 0.25);
        let p = EmbeddingParams::new(4, e, pos).unwrap();
        let img = noise_image(4, 4, 3);
        let z = embed(&img, &p).unwrap();
        assert_eq!(z[(0, 0)], normalize(img.pixels()[0]) + 0.25);
    }

    #[test]
    fn embed_shape_errors() {
        let p = EmbeddingParams::random(4, 4, 3, 0);
        assert!(matches!(
            embed(&noise_image(12, 8, 0), &p),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            embed(&noise_image(10, 8, 0), &p),
            Err(Error::Shape(_))
        ));
        assert!(EmbeddingParams::new(4, DMatrix::zeros(47, 2), DMatrix::zeros(4, 2)).is_err());
        assert!(EmbeddingParams::new(4, DMatrix::zeros(48, 2), DMatrix::zeros(4, 3)).is_err());
    }

    #[test]
    fn adapt_identity_and_negation() {
        let key = MasterKey::new([1, 2, 3, 4]);
        let p = EmbeddingParams::random(4, 6, 5, 9);
        assert_eq!(adapt_params(&p, &key, &uniform(Steps::NONE)).unwrap(), p);

        let steps = Steps {
            negpos: true,
            scramble: true,
            ..Steps::NONE
        };
        // Find a key whose single K3 draw is 1.
        let key = (0..)
            .map(|s| MasterKey::new([5, 0, s, 0]))
            .find(|k| k.stream(SubkeyId::K3).bernoulli_half())
            .unwrap();
        let a = adapt_params(&p, &key, &uniform(steps)).unwrap();
        assert_eq!(a.projection(), &(-p.projection()));
        let e1 = position_permutation(&key, 6);
        assert_eq!(a.positions(), &e1.apply_rows(p.positions()));
    }

    #[test]
    fn adapt_rejects_per_block() {
        let p = EmbeddingParams::random(4, 4, 3, 0);
        let spec = CipherSpec::new(4, KeyMode::PerBlock, Steps::ALL);
        let key = MasterKey::default();
        assert!(matches!(adapt_params(&p, &key, &spec), Err(Error::Mode(_))));
        assert!(matches!(
            verify_equivalence(&noise_image(8, 8, 0), &p, &key, &spec),
            Err(Error::Mode(_))
        ));
    }

    #[test]
    fn steps_disabled_zero_deviation() {
        let p = EmbeddingParams::random(4, 6, 8, 1);
        let d = verify_equivalence(
            &noise_image(12, 8, 2),
            &p,
            &MasterKey::new([3; 4]),
            &uniform(Steps::NONE),
        )
        .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn single_color_step_matrix() {
        let t = BlockTransform {
            colors: ColorPerm::new(5).unwrap(),
            dihedral: Dihedral::IDENTITY,
            negate: false,
        };
        let m = block_transform_matrix(&t, 1);
        assert_eq!(m.perm(), &[2, 1, 0]);
    }

    #[test]
    fn matrix_dump_roundtrip() {
        let p = EmbeddingParams::random(2, 3, 4, 5);
        let text = format_matrix(p.projection());
        assert!(text.starts_with("12 4\n"));
        assert_eq!(&parse_matrix(&text).unwrap(), p.projection());
        assert!(parse_matrix("2 2\n1 2 3\n").is_err());
    }

    proptest! {
        #[test]
        fn signed_permutations_orthogonal(seed: u64, n in 1usize..40) {
            let mut s = KeyStream::new(SubkeyId::K2, seed);
            let perm = cipher::scramble_permutation(&mut s, n);
            let signs = (0..n).map(|_| if s.bernoulli_half() { -1 } else { 1 }).collect();
            let m = SignedPermutation::new(perm, signs).unwrap();
            let dense = m.to_matrix();
            prop_assert_eq!(&dense * dense.transpose(), DMatrix::identity(n, n));
            prop_assert_eq!(m.compose(&m.transpose()), SignedPermutation::identity(n));
        }

        #[test]
        fn uniform_equivalence_small(seed: u64, k: [u64; 4], bits in 0u8..16, cols in 1usize..4, rows in 1usize..4) {
            let spec = uniform(Steps::from_bits(bits));
            let img = noise_image(cols * 4, rows * 4, seed);
            let p = EmbeddingParams::random(4, cols * rows, 6, seed ^ 1);
            let d = verify_equivalence(&img, &p, &MasterKey::new(k), &spec).unwrap();
            prop_assert!(d < 1e-12, "deviation {}", d);
        }
    }
}
