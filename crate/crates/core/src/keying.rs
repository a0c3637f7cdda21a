//! Subkey streams for the cipher.
//!
//! Each of the four subkeys seeds an independent SplitMix64 generator. The raw
//! 64-bit output sequence of a stream (its "tape") is the only source of
//! randomness for encryption, so any implementation that reproduces SplitMix64
//! and the sampling rules below produces bit-identical ciphertexts.

use std::fmt;

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function applied to an already-advanced state.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubkeyId {
    K1,
    K2,
    K3,
    K4,
}

impl SubkeyId {
    pub const ALL: [SubkeyId; 4] = [SubkeyId::K1, SubkeyId::K2, SubkeyId::K3, SubkeyId::K4];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SubkeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K{}", self.index() + 1)
    }
}

/// Four independent 64-bit seeds, one per subkey.
///
/// K1 drives block scrambling, K2 the block rotation/flip, K3 the
/// negative-positive flag and K4 the color shuffle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct MasterKey {
    pub seeds: [u64; 4],
}

impl MasterKey {
    pub const fn new(seeds: [u64; 4]) -> Self {
        MasterKey { seeds }
    }

    pub fn seed(&self, id: SubkeyId) -> u64 {
        self.seeds[id.index()]
    }

    pub fn stream(&self, id: SubkeyId) -> KeyStream {
        KeyStream::new(id, self.seed(id))
    }

    /// Serializes to the key-file format: one `K<i>=<16 lowercase hex>` line per subkey.
    pub fn to_key_file(&self) -> String {
        SubkeyId::ALL
            .iter()
            .map(|&id| format!("{id}={:016x}\n", self.seed(id)))
            .collect()
    }

    /// Parses the key-file format. Lines must appear in order K1..K4; a missing
    /// final newline is tolerated.
    pub fn parse_key_file(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let lines: Vec<&str> = body.split('\n').collect();
        if lines.len() != 4 {
            return Err(Error::KeyFormat(format!(
                "expected 4 lines, found {}",
                lines.len()
            )));
        }
        let mut seeds = [0u64; 4];
        for (i, (line, id)) in lines.iter().zip(SubkeyId::ALL).enumerate() {
            let prefix = format!("{id}=");
            let hex = line.strip_prefix(&prefix).ok_or_else(|| {
                Error::KeyFormat(format!("line {}: expected prefix `{prefix}`", i + 1))
            })?;
            let valid = hex.len() == 16
                && hex
                    .bytes()
                    .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
            if !valid {
                return Err(Error::KeyFormat(format!(
                    "line {}: expected 16 lowercase hex digits, found `{hex}`",
                    i + 1
                )));
            }
            seeds[i] = u64::from_str_radix(hex, 16).expect("validated hex");
        }
        Ok(MasterKey { seeds })
    }
}

/// A sequential SplitMix64 generator bound to one subkey.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyStream {
    subkey: SubkeyId,
    state: u64,
    draws: u64,
}

impl KeyStream {
    pub fn new(subkey: SubkeyId, seed: u64) -> Self {
        KeyStream {
            subkey,
            state: seed,
            draws: 0,
        }
    }

    pub fn subkey(&self) -> SubkeyId {
        self.subkey
    }

    /// Number of raw 64-bit values consumed so far, including rejected ones.
    pub fn draw_count(&self) -> u64 {
        self.draws
    }

    #[inline]
    pub fn next_raw(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        self.draws += 1;
        mix64(self.state)
    }

    /// Uniform integer in `[0, n)` by bitmask rejection.
    ///
    /// # Panics
    ///
    /// Panics if `n == 0`.
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        sample_below(n, || self.next_raw())
    }

    /// Least significant bit of one raw draw.
    pub fn bernoulli_half(&mut self) -> bool {
        self.next_raw() & 1 == 1
    }
}

/// Draws from `raw` until the value masked to the bit width of `n - 1` is below `n`.
pub(crate) fn sample_below(n: u64, mut raw: impl FnMut() -> u64) -> u64 {
    assert!(n >= 1, "uniform_below requires n >= 1");
    let mask = if n > (1 << 63) {
        u64::MAX
    } else {
        n.next_power_of_two() - 1
    };
    loop {
        let v = raw() & mask;
        if v < n {
            return v;
        }
    }
}

/// One stream per subkey, in K1..K4 order.
pub fn derive_streams(master: &MasterKey) -> [KeyStream; 4] {
    SubkeyId::ALL.map(|id| master.stream(id))
}
