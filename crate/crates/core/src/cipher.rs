//! Block-wise encryption-then-compression (EtC) cipher.
//!
//! The image is cut into square blocks and four keyed steps are applied:
//!
//! 1. block scrambling: a Fisher-Yates permutation of block positions (K1)
//! 2. rotation and flip: one of the 8 symmetries of the square per block (K2)
//! 3. negative-positive transform: `v -> 255 - v` on all channels of a block (K3)
//! 4. color shuffle: one of the 6 permutations of (R, G, B) per block (K4)
//!
//! Steps 2-4 attach to grid positions after scrambling: the transform drawn for
//! position `i` is applied to whichever block step 1 moved there. In
//! [`KeyMode::PerBlock`] each position gets its own draw; in
//! [`KeyMode::Uniform`] a single draw per step is shared by every block.
//!
//! The tape is materialized into a [`CipherPlan`] before any pixel work, so the
//! per-block stage can run in parallel without touching the key streams.

use std::fmt;
use std::str::FromStr;

use crate::blocks::{self, Block, BlockGrid, BlockGridShape, RasterImage, CHANNELS};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::keying::{KeyStream, MasterKey, SubkeyId};

/// One of the 8 symmetries of a square block.
///
/// State `s` rotates clockwise by `s % 4` quarter turns and then, when
/// `s >= 4`, mirrors horizontally (left-right).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Dihedral(u8);

impl Dihedral {
    pub const IDENTITY: Dihedral = Dihedral(0);

    pub fn new(state: u8) -> Result<Self> {
        if state >= 8 {
            return Err(Error::Range(format!(
                "dihedral state {state} is not in 0..8"
            )));
        }
        Ok(Dihedral(state))
    }

    pub fn all() -> impl Iterator<Item = Dihedral> {
        (0..8).map(Dihedral)
    }

    pub fn state(self) -> u8 {
        self.0
    }

    pub fn quarter_turns(self) -> u8 {
        self.0 & 3
    }

    pub fn flipped(self) -> bool {
        self.0 >= 4
    }

    /// Source coordinate `(row, col)` that lands on `(y, x)` in a `size`x`size` block.
    #[inline]
    pub fn source(self, size: usize, y: usize, x: usize) -> (usize, usize) {
        let m = size - 1;
        let x = if self.flipped() { m - x } else { x };
        match self.quarter_turns() {
            0 => (y, x),
            1 => (m - x, y),
            2 => (m - y, m - x),
            _ => (x, m - y),
        }
    }

    /// The symmetry equal to applying `self` and then `next`.
    pub fn then(self, next: Dihedral) -> Dihedral {
        // Probe a 2x2 grid; its four corners identify the group element.
        let composed = |y, x| {
            let (y1, x1) = next.source(2, y, x);
            self.source(2, y1, x1)
        };
        Dihedral::all()
            .find(|d| (0..2).all(|y| (0..2).all(|x| d.source(2, y, x) == composed(y, x))))
            .expect("dihedral group is closed")
    }

    pub fn inverse(self) -> Dihedral {
        Dihedral::all()
            .find(|d| self.then(*d) == Dihedral::IDENTITY)
            .expect("every element has an inverse")
    }
}

/// A permutation of the three color channels, indexed 0..6 in lexicographic
/// order: RGB, RBG, GRB, GBR, BRG, BGR.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ColorPerm(u8);

const COLOR_TABLE: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

impl ColorPerm {
    pub const IDENTITY: ColorPerm = ColorPerm(0);

    pub fn new(index: u8) -> Result<Self> {
        if index >= 6 {
            return Err(Error::Range(format!(
                "color permutation index {index} is not in 0..6"
            )));
        }
        Ok(ColorPerm(index))
    }

    pub fn all() -> impl Iterator<Item = ColorPerm> {
        (0..6).map(ColorPerm)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// `sources()[c]` is the input channel that becomes output channel `c`.
    pub fn sources(self) -> [usize; 3] {
        COLOR_TABLE[self.0 as usize]
    }

    pub fn inverse(self) -> ColorPerm {
        let src = self.sources();
        let mut inv = [0; 3];
        for (c, &s) in src.iter().enumerate() {
            inv[s] = c;
        }
        Self::from_sources(inv)
    }

    /// Applying `self` and then `next`.
    pub fn then(self, next: ColorPerm) -> ColorPerm {
        let (a, b) = (self.sources(), next.sources());
        Self::from_sources([a[b[0]], a[b[1]], a[b[2]]])
    }

    fn from_sources(src: [usize; 3]) -> ColorPerm {
        let i = COLOR_TABLE
            .iter()
            .position(|t| *t == src)
            .expect("valid permutation");
        ColorPerm(i as u8)
    }
}

/// Steps 2-4 for one block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BlockTransform {
    pub dihedral: Dihedral,
    pub negate: bool,
    pub colors: ColorPerm,
}

impl BlockTransform {
    pub const IDENTITY: BlockTransform = BlockTransform {
        dihedral: Dihedral::IDENTITY,
        negate: false,
        colors: ColorPerm::IDENTITY,
    };

    /// All 8 x 2 x 6 = 96 transforms.
    pub fn all() -> impl Iterator<Item = BlockTransform> {
        Dihedral::all().flat_map(|dihedral| {
            [false, true].into_iter().flat_map(move |negate| {
                ColorPerm::all().map(move |colors| BlockTransform {
                    dihedral,
                    negate,
                    colors,
                })
            })
        })
    }

    /// The transform equal to applying `self` and then `next`. The three
    /// components act on independent axes (space, value, channel) so they
    /// compose separately.
    pub fn then(self, next: BlockTransform) -> BlockTransform {
        BlockTransform {
            dihedral: self.dihedral.then(next.dihedral),
            negate: self.negate ^ next.negate,
            colors: self.colors.then(next.colors),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum KeyMode {
    /// Independent draws for every block.
    #[default]
    PerBlock,
    /// One draw per step, shared by every block.
    Uniform,
}

impl FromStr for KeyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-block" => Ok(KeyMode::PerBlock),
            "uniform" => Ok(KeyMode::Uniform),
            _ => Err(Error::Usage(format!(
                "unknown mode `{s}` (per-block|uniform)"
            ))),
        }
    }
}

impl fmt::Display for KeyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeyMode::PerBlock => "per-block",
            KeyMode::Uniform => "uniform",
        })
    }
}

/// Which of the four cipher steps run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Steps {
    pub scramble: bool,
    pub dihedral: bool,
    pub negpos: bool,
    pub color_shuffle: bool,
}

impl Steps {
    pub const ALL: Steps = Steps {
        scramble: true,
        dihedral: true,
        negpos: true,
        color_shuffle: true,
    };
    pub const NONE: Steps = Steps {
        scramble: false,
        dihedral: false,
        negpos: false,
        color_shuffle: false,
    };

    /// Builds a subset from a 4-bit mask (bit 0 = scramble ... bit 3 = color shuffle).
    pub fn from_bits(bits: u8) -> Steps {
        Steps {
            scramble: bits & 1 != 0,
            dihedral: bits & 2 != 0,
            negpos: bits & 4 != 0,
            color_shuffle: bits & 8 != 0,
        }
    }

    /// All 16 subsets.
    pub fn subsets() -> impl Iterator<Item = Steps> {
        (0..16).map(Steps::from_bits)
    }
}

impl Default for Steps {
    fn default() -> Self {
        Steps::ALL
    }
}

impl FromStr for Steps {
    type Err = Error;

    /// Comma-separated list of `scramble`, `dihedral`, `negpos`, `colorshuffle`;
    /// `none` or an empty string disables everything.
    fn from_str(s: &str) -> Result<Self> {
        let mut steps = Steps::NONE;
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "scramble" => steps.scramble = true,
                "dihedral" => steps.dihedral = true,
                "negpos" => steps.negpos = true,
                "colorshuffle" => steps.color_shuffle = true,
                "none" => {}
                "all" => steps = Steps::ALL,
                _ => return Err(Error::Usage(format!("unknown cipher step `{name}`"))),
            }
        }
        Ok(steps)
    }
}

impl fmt::Display for Steps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [
            (self.scramble, "scramble"),
            (self.dihedral, "dihedral"),
            (self.negpos, "negpos"),
            (self.color_shuffle, "colorshuffle"),
        ]
        .into_iter()
        .filter_map(|(on, n)| on.then_some(n))
        .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join(","))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CipherSpec {
    pub block_size: usize,
    pub mode: KeyMode,
    pub steps: Steps,
}

impl CipherSpec {
    pub const JPEG_BLOCK: usize = 16;

    pub fn new(block_size: usize, mode: KeyMode, steps: Steps) -> Self {
        CipherSpec {
            block_size,
            mode,
            steps,
        }
    }
}

impl Default for CipherSpec {
    fn default() -> Self {
        CipherSpec::new(Self::JPEG_BLOCK, KeyMode::PerBlock, Steps::ALL)
    }
}

/// The fully drawn tape for one image geometry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipherPlan {
    /// Ciphertext position `p` holds plaintext block `permutation[p]`.
    pub permutation: Vec<usize>,
    /// Transform applied at each ciphertext position.
    pub transforms: Vec<BlockTransform>,
}

impl CipherPlan {
    /// Draws the plan for `n_blocks` blocks. Streams of disabled steps are not consumed.
    pub fn derive(key: &MasterKey, spec: &CipherSpec, n_blocks: usize) -> CipherPlan {
        let permutation = if spec.steps.scramble {
            scramble_permutation(&mut key.stream(SubkeyId::K1), n_blocks)
        } else {
            (0..n_blocks).collect()
        };

        let draws = match spec.mode {
            KeyMode::PerBlock => n_blocks,
            KeyMode::Uniform => n_blocks.min(1),
        };
        let mut dihedrals = vec![Dihedral::IDENTITY; draws];
        let mut negates = vec![false; draws];
        let mut colors = vec![ColorPerm::IDENTITY; draws];
        if spec.steps.dihedral {
            let mut s = key.stream(SubkeyId::K2);
            for d in &mut dihedrals {
                *d = Dihedral(s.uniform_below(8) as u8);
            }
        }
        if spec.steps.negpos {
            let mut s = key.stream(SubkeyId::K3);
            for r in &mut negates {
                *r = s.bernoulli_half();
            }
        }
        if spec.steps.color_shuffle {
            let mut s = key.stream(SubkeyId::K4);
            for c in &mut colors {
                *c = ColorPerm(s.uniform_below(6) as u8);
            }
        }
        let drawn: Vec<BlockTransform> = (0..draws)
            .map(|i| BlockTransform {
                dihedral: dihedrals[i],
                negate: negates[i],
                colors: colors[i],
            })
            .collect();
        let transforms = match spec.mode {
            KeyMode::PerBlock => drawn,
            KeyMode::Uniform => vec![drawn.first().copied().unwrap_or_default(); n_blocks],
        };

        CipherPlan {
            permutation,
            transforms,
        }
    }

    pub fn inverse_permutation(&self) -> Vec<usize> {
        let mut inv = vec![0; self.permutation.len()];
        for (p, &i) in self.permutation.iter().enumerate() {
            inv[i] = p;
        }
        inv
    }
}

/// Fisher-Yates over `0..n`, drawing `uniform_below(i + 1)` for `i = n-1 down to 1`.
pub fn scramble_permutation(stream: &mut KeyStream, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = stream.uniform_below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    order
}

/// Step 1 on its own. Returns the scrambled grid and the permutation used.
pub fn scramble_blocks(grid: &BlockGrid, stream: &mut KeyStream) -> (BlockGrid, Vec<usize>) {
    let order = scramble_permutation(stream, grid.len());
    let scrambled = grid
        .permuted(&order)
        .expect("Fisher-Yates yields a permutation");
    (scrambled, order)
}

fn require_square(block: &Block) -> Result<()> {
    if !block.is_square() {
        return Err(Error::Shape(format!(
            "rotation needs a square block, got {}x{}",
            block.width(),
            block.height()
        )));
    }
    Ok(())
}

pub fn apply_dihedral(block: &Block, d: Dihedral) -> Result<Block> {
    require_square(block)?;
    let n = block.width();
    let src = block.data();
    let mut out = vec![0u8; src.len()];
    for y in 0..n {
        for x in 0..n {
            let (sy, sx) = d.source(n, y, x);
            let (o, i) = ((y * n + x) * CHANNELS, (sy * n + sx) * CHANNELS);
            out[o..o + CHANNELS].copy_from_slice(&src[i..i + CHANNELS]);
        }
    }
    Block::new(n, n, out)
}

pub fn invert_dihedral(block: &Block, d: Dihedral) -> Result<Block> {
    require_square(block)?;
    let n = block.width();
    let src = block.data();
    let mut out = vec![0u8; src.len()];
    for y in 0..n {
        for x in 0..n {
            let (sy, sx) = d.source(n, y, x);
            let (o, i) = ((sy * n + sx) * CHANNELS, (y * n + x) * CHANNELS);
            out[o..o + CHANNELS].copy_from_slice(&src[i..i + CHANNELS]);
        }
    }
    Block::new(n, n, out)
}

/// Negative-positive transform: every value `v` becomes `255 - v` when `flip` is set.
pub fn negpos(block: &Block, flip: bool) -> Block {
    let mut out = block.clone();
    if flip {
        out.data_mut().iter_mut().for_each(|v| *v ^= 0xff);
    }
    out
}

fn permute_channels(block: &Block, perm: ColorPerm) -> Block {
    let src = perm.sources();
    let mut out = block.clone();
    for (o, i) in out
        .data_mut()
        .chunks_exact_mut(CHANNELS)
        .zip(block.data().chunks_exact(CHANNELS))
    {
        *o.first_chunk_mut::<3>().unwrap() = [i[src[0]], i[src[1]], i[src[2]]];
    }
    out
}

pub fn shuffle_colors(block: &Block, index: u8) -> Result<Block> {
    Ok(permute_channels(block, ColorPerm::new(index)?))
}

pub fn unshuffle_colors(block: &Block, index: u8) -> Result<Block> {
    Ok(permute_channels(block, ColorPerm::new(index)?.inverse()))
}

/// Steps 2, 3 and 4 in order.
pub fn apply_transform(block: &Block, t: BlockTransform) -> Result<Block> {
    let b = apply_dihedral(block, t.dihedral)?;
    let b = negpos(&b, t.negate);
    Ok(permute_channels(&b, t.colors))
}

/// Undoes [`apply_transform`]: steps 4, 3 and 2.
pub fn invert_transform(block: &Block, t: BlockTransform) -> Result<Block> {
    let b = permute_channels(block, t.colors.inverse());
    let b = negpos(&b, t.negate);
    invert_dihedral(&b, t.dihedral)
}

/// Ciphertext pixels together with the parameters needed to decrypt them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedImage {
    pub image: RasterImage,
    pub spec: CipherSpec,
}

pub fn encrypt(image: &RasterImage, key: &MasterKey, spec: &CipherSpec) -> Result<EncryptedImage> {
    encrypt_with(image, key, spec, Execution::default())
}

pub fn encrypt_with(
    image: &RasterImage,
    key: &MasterKey,
    spec: &CipherSpec,
    exec: Execution,
) -> Result<EncryptedImage> {
    let grid = blocks::split(image, spec.block_size, spec.block_size)?;
    let plan = CipherPlan::derive(key, spec, grid.len());
    let mut scrambled = grid.permuted(&plan.permutation)?;
    let needs_transform = spec.steps.dihedral || spec.steps.negpos || spec.steps.color_shuffle;
    if needs_transform {
        exec.for_each_mut(scrambled.blocks_mut(), |p, b| {
            *b = apply_transform(b, plan.transforms[p]).expect("blocks are square");
        });
    }
    Ok(EncryptedImage {
        image: blocks::merge(&scrambled),
        spec: *spec,
    })
}

/// Inverts [`encrypt`]. A wrong key or spec is not detected; the output is
/// then a deterministic scramble of the ciphertext.
pub fn decrypt(enc: &EncryptedImage, key: &MasterKey) -> Result<RasterImage> {
    decrypt_with(enc, key, Execution::default())
}

pub fn decrypt_with(enc: &EncryptedImage, key: &MasterKey, exec: Execution) -> Result<RasterImage> {
    let spec = &enc.spec;
    let mut grid = blocks::split(&enc.image, spec.block_size, spec.block_size)?;
    let plan = CipherPlan::derive(key, spec, grid.len());
    if spec.steps.dihedral || spec.steps.negpos || spec.steps.color_shuffle {
        exec.for_each_mut(grid.blocks_mut(), |p, b| {
            *b = invert_transform(b, plan.transforms[p]).expect("blocks are square");
        });
    }
    let plain = grid.permuted(&plan.inverse_permutation())?;
    Ok(blocks::merge(&plain))
}

/// Number of blocks `spec` cuts an image of the given size into.
pub fn block_count(width: usize, height: usize, spec: &CipherSpec) -> Result<usize> {
    Ok(BlockGridShape::for_image(width, height, spec.block_size, spec.block_size)?.len())
}
