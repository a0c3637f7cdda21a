//! Raster images and their decomposition into non-overlapping blocks.
//!
//! Pixels are stored row-major with interleaved RGB channels. When a block is
//! flattened into a patch vector the order is channel-major, then row, then
//! column: element `(c, y, x)` of a `w`x`h` block lands at `c*w*h + y*w + x`.

use crate::error::{Error, Result};

pub const CHANNELS: usize = 3;

/// An 8-bit RGB image.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height * CHANNELS {
            return Err(Error::Shape(format!(
                "{width}x{height} RGB image needs {} bytes, got {}",
                width * height * CHANNELS,
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let pixels = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * CHANNELS)
            .collect();
        RasterImage {
            width,
            height,
            pixels,
        }
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Self {
        let mut pixels = Vec::with_capacity(width * height * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        RasterImage {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Crops the centered region whose sides are the largest multiples of `multiple`.
    pub fn center_crop(&self, multiple: usize) -> Result<RasterImage> {
        if multiple == 0 {
            return Err(Error::Range("crop multiple must be positive".into()));
        }
        let w = self.width / multiple * multiple;
        let h = self.height / multiple * multiple;
        if w == 0 || h == 0 {
            return Err(Error::Dimension {
                width: self.width,
                height: self.height,
                block_w: multiple,
                block_h: multiple,
            });
        }
        let x0 = (self.width - w) / 2;
        let y0 = (self.height - h) / 2;
        let mut pixels = Vec::with_capacity(w * h * CHANNELS);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * CHANNELS;
            pixels.extend_from_slice(&self.pixels[start..start + w * CHANNELS]);
        }
        Ok(RasterImage {
            width: w,
            height: h,
            pixels,
        })
    }
}

/// One `width`x`height` RGB block, interleaved and row-major like [`RasterImage`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Block {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * CHANNELS {
            return Err(Error::Shape(format!(
                "{width}x{height} block needs {} bytes, got {}",
                width * height * CHANNELS,
                data.len()
            )));
        }
        Ok(Block {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }
}

/// An image cut into blocks, enumerated row-major over the grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockGrid {
    block_w: usize,
    block_h: usize,
    cols: usize,
    rows: usize,
    blocks: Vec<Block>,
}

impl BlockGrid {
    pub fn block_w(&self) -> usize {
        self.block_w
    }

    pub fn block_h(&self) -> usize {
        self.block_h
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    /// Replaces the block list. Every block must match the grid's block size.
    pub fn with_blocks(&self, blocks: Vec<Block>) -> Result<BlockGrid> {
        if blocks.len() != self.blocks.len() {
            return Err(Error::Shape(format!(
                "grid holds {} blocks, got {}",
                self.blocks.len(),
                blocks.len()
            )));
        }
        if let Some(b) = blocks
            .iter()
            .find(|b| b.width != self.block_w || b.height != self.block_h)
        {
            return Err(Error::Shape(format!(
                "expected {}x{} blocks, got {}x{}",
                self.block_w, self.block_h, b.width, b.height
            )));
        }
        Ok(BlockGrid { blocks, ..*self })
    }

    /// Reorders blocks so position `p` holds the block previously at `order[p]`.
    pub fn permuted(&self, order: &[usize]) -> Result<BlockGrid> {
        check_permutation(order, self.blocks.len())?;
        Ok(BlockGrid {
            blocks: order.iter().map(|&i| self.blocks[i].clone()).collect(),
            ..*self
        })
    }
}

/// Grid geometry without pixel payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockGridShape {
    pub block_w: usize,
    pub block_h: usize,
    pub cols: usize,
    pub rows: usize,
}

impl BlockGridShape {
    pub fn for_image(width: usize, height: usize, block_w: usize, block_h: usize) -> Result<Self> {
        if block_w == 0
            || block_h == 0
            || !width.is_multiple_of(block_w)
            || !height.is_multiple_of(block_h)
        {
            return Err(Error::Dimension {
                width,
                height,
                block_w,
                block_h,
            });
        }
        Ok(BlockGridShape {
            block_w,
            block_h,
            cols: width / block_w,
            rows: height / block_h,
        })
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::Shape(format!(
            "permutation of length {} applied to {n} items",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Shape(format!("not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// Cuts `image` into `block_w`x`block_h` blocks. Fails unless both dimensions divide evenly.
pub fn split(image: &RasterImage, block_w: usize, block_h: usize) -> Result<BlockGrid> {
    let shape = BlockGridShape::for_image(image.width, image.height, block_w, block_h)?;
    let row_bytes = block_w * CHANNELS;
    let mut blocks = Vec::with_capacity(shape.len());
    for gy in 0..shape.rows {
        for gx in 0..shape.cols {
            let mut data = Vec::with_capacity(block_w * block_h * CHANNELS);
            for y in gy * block_h..(gy + 1) * block_h {
                let start = (y * image.width + gx * block_w) * CHANNELS;
                data.extend_from_slice(&image.pixels[start..start + row_bytes]);
            }
            blocks.push(Block {
                width: block_w,
                height: block_h,
                data,
            });
        }
    }
    Ok(BlockGrid {
        block_w,
        block_h,
        cols: shape.cols,
        rows: shape.rows,
        blocks,
    })
}

/// Reassembles blocks into an image; the inverse of [`split`].
pub fn merge(grid: &BlockGrid) -> RasterImage {
    let width = grid.cols * grid.block_w;
    let height = grid.rows * grid.block_h;
    let row_bytes = grid.block_w * CHANNELS;
    let mut pixels = vec![0u8; width * height * CHANNELS];
    for (i, block) in grid.blocks.iter().enumerate() {
        let (gx, gy) = (i % grid.cols, i / grid.cols);
        for (by, src) in block.data.chunks_exact(row_bytes).enumerate() {
            let y = gy * grid.block_h + by;
            let start = (y * width + gx * grid.block_w) * CHANNELS;
            pixels[start..start + row_bytes].copy_from_slice(src);
        }
    }
    RasterImage {
        width,
        height,
        pixels,
    }
}

/// A block flattened in channel-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatPatch {
    pub values: Vec<u8>,
}

#[inline]
pub(crate) fn flat_index(c: usize, y: usize, x: usize, width: usize, height: usize) -> usize {
    c * width * height + y * width + x
}

pub fn flatten(block: &Block) -> FlatPatch {
    let (w, h) = (block.width, block.height);
    let mut values = vec![0u8; w * h * CHANNELS];
    for y in 0..h {
        for x in 0..w {
            for c in 0..CHANNELS {
                values[flat_index(c, y, x, w, h)] = block.data[(y * w + x) * CHANNELS + c];
            }
        }
    }
    FlatPatch { values }
}

pub fn unflatten(patch: &FlatPatch, width: usize, height: usize) -> Result<Block> {
    if patch.values.len() != width * height * CHANNELS {
        return Err(Error::Shape(format!(
            "patch of length {} cannot form a {width}x{height} block",
            patch.values.len()
        )));
    }
    let mut data = vec![0u8; width * height * CHANNELS];
    for y in 0..height {
        for x in 0..width {
            for c in 0..CHANNELS {
                data[(y * width + x) * CHANNELS + c] =
                    patch.values[flat_index(c, y, x, width, height)];
            }
        }
    }
    Ok(Block {
        width,
        height,
        data,
    })
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn block_counts() {
        assert_eq!(split(&noise_image(32, 32, 1), 16, 16).unwrap().len(), 4);
        let g = split(&noise_image(224, 224, 2), 16, 16).unwrap();
        assert_eq!(g.len(), 196);
        assert_eq!((g.cols(), g.rows()), (14, 14));
        let g = split(&noise_image(64, 32, 3), 16, 8).unwrap();
        assert_eq!((g.cols(), g.rows()), (4, 4));
    }

    #[test]
    fn indivisible_is_error() {
        let err = split(&noise_image(33, 32, 1), 16, 16).unwrap_err();
        assert!(matches!(err, Error::Dimension { width: 33, .. }));
        assert!(split(&noise_image(32, 32, 1), 0, 16).is_err());
    }

    #[test]
    fn row_major_block_order() {
        let img = RasterImage::from_fn(4, 4, |x, y| [(x / 2 + 2 * (y / 2)) as u8, 0, 0]);
        let grid = split(&img, 2, 2).unwrap();
        for (i, b) in grid.blocks().iter().enumerate() {
            assert!(b.data().chunks(3).all(|p| p[0] == i as u8));
        }
    }

    #[test]
    fn merge_split_roundtrip() {
        let img = noise_image(64, 48, 9);
        assert_eq!(merge(&split(&img, 16, 16).unwrap()), img);
    }

    #[test]
    fn single_block_identity() {
        let img = noise_image(16, 16, 4);
        let grid = split(&img, 16, 16).unwrap();
        assert_eq!(grid.blocks()[0].data(), img.pixels());
        assert_eq!(merge(&grid), img);
    }

    #[test]
    fn flatten_rgb_pixel() {
        let b = Block::new(1, 1, vec![7, 8, 9]).unwrap();
        assert_eq!(flatten(&b).values, vec![7, 8, 9]);
    }

    #[test]
    fn flatten_golden_2x2() {
        // Channel 0 holds [[1,2],[3,4]], channels 1 and 2 hold 10+ and 20+.
        let data = vec![1, 11, 21, 2, 12, 22, 3, 13, 23, 4, 14, 24];
        let b = Block::new(2, 2, data).unwrap();
        assert_eq!(
            flatten(&b).values,
            vec![1, 2, 3, 4, 11, 12, 13, 14, 21, 22, 23, 24]
        );
    }

    #[test]
    fn unflatten_length_mismatch() {
        let p = FlatPatch {
            values: vec![0; 11],
        };
        assert!(matches!(unflatten(&p, 2, 2), Err(Error::Shape(_))));
    }

    #[test]
    fn center_crop_to_multiple() {
        let img = RasterImage::from_fn(37, 20, |x, y| [x as u8, y as u8, 0]);
        let c = img.center_crop(16).unwrap();
        assert_eq!((c.width(), c.height()), (32, 16));
        assert_eq!(c.pixel(0, 0), [2, 2, 0]);
        assert!(img.center_crop(64).is_err());
    }

    #[test]
    fn permuted_rejects_non_permutation() {
        let grid = split(&noise_image(32, 32, 1), 16, 16).unwrap();
        assert!(grid.permuted(&[0, 1, 1, 3]).is_err());
        assert!(grid.permuted(&[0, 1, 2]).is_err());
        assert!(grid.permuted(&[3, 2, 1, 0]).is_ok());
    }

    fn image_strategy() -> impl Strategy<Value = (RasterImage, usize, usize)> {
        (1usize..6, 1usize..6, 1usize..9, 1usize..9, any::<u64>()).prop_map(
            |(cols, rows, bw, bh, seed)| (noise_image(cols * bw, rows * bh, seed), bw, bh),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn split_merge_inverse((img, bw, bh) in image_strategy()) {
            let grid = split(&img, bw, bh).unwrap();
            prop_assert_eq!(grid.len(), img.width() * img.height() / (bw * bh));
            prop_assert_eq!(merge(&grid), img);
        }

        #[test]
        fn permutation_then_inverse((img, bw, bh) in image_strategy(), seed: u64) {
            let grid = split(&img, bw, bh).unwrap();
            let n = grid.len();
            let mut s = crate::keying::KeyStream::new(crate::keying::SubkeyId::K1, seed);
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                order.swap(i, s.uniform_below(i as u64 + 1) as usize);
            }
            let mut inverse = vec![0; n];
            for (p, &i) in order.iter().enumerate() {
                inverse[i] = p;
            }
            let back = grid.permuted(&order).unwrap().permuted(&inverse).unwrap();
            prop_assert_eq!(merge(&back), img);
        }

        #[test]
        fn flatten_unflatten_inverse(w in 1usize..17, h in 1usize..17, seed: u64) {
            let img = noise_image(w, h, seed);
            let b = Block::new(w, h, img.into_pixels()).unwrap();
            prop_assert_eq!(unflatten(&flatten(&b), w, h).unwrap(), b);
        }
    }
}
