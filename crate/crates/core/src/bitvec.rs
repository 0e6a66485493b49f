//! Plain bitvector with rank and select directories.
//!
//! Positions are 1-based on the public surface: `access(i)` reads the i-th
//! bit, `rank1(i)` counts ones in `1..=i` and `select1(j)` returns the
//! position of the j-th one.
//!
//! Rank uses a two-level directory: an absolute count per 512-bit superblock
//! and a 16-bit count per word relative to its superblock. Select samples the
//! word holding every 256th one, narrows to a superblock by binary search
//! between two samples and finishes with an in-word scan.

use crate::error::{Error, Result};

const WORD: usize = 64;
const WORDS_PER_SUPERBLOCK: usize = 8;
const SELECT_SAMPLE: usize = 256;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
    ones: usize,
    superblocks: Vec<u64>,
    blocks: Vec<u16>,
    select_samples: Vec<u32>,
}

impl BitVector {
    /// Builds from packed little-endian words; bits past `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(WORD), 0);
        if !len.is_multiple_of(WORD) {
            let last = words.len() - 1;
            words[last] &= (1u64 << (len % WORD)) - 1;
        }
        let mut bv = BitVector {
            words,
            len,
            ..Default::default()
        };
        bv.build_directories();
        bv
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut builder = BitBuilder::new();
        for b in bits {
            builder.push(b);
        }
        builder.finish()
    }

    fn build_directories(&mut self) {
        let n_words = self.words.len();
        self.superblocks = Vec::with_capacity(n_words / WORDS_PER_SUPERBLOCK + 1);
        self.blocks = Vec::with_capacity(n_words);
        self.select_samples.clear();

        let mut total = 0u64;
        let mut next_sample = 1u64;
        for (w, &word) in self.words.iter().enumerate() {
            if w % WORDS_PER_SUPERBLOCK == 0 {
                self.superblocks.push(total);
            }
            let base = *self.superblocks.last().unwrap();
            self.blocks.push((total - base) as u16);
            let c = word.count_ones() as u64;
            while next_sample <= total + c {
                self.select_samples.push(w as u32);
                next_sample += SELECT_SAMPLE as u64;
            }
            total += c;
        }
        if self.superblocks.is_empty() {
            self.superblocks.push(0);
        }
        self.ones = total as usize;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn access(&self, i: usize) -> Result<bool> {
        if i == 0 || i > self.len {
            return Err(Error::PositionOutOfRange { pos: i, len: self.len });
        }
        Ok(self.get(i - 1))
    }

    pub fn rank1(&self, i: usize) -> Result<usize> {
        if i > self.len {
            return Err(Error::RankOutOfRange { pos: i, len: self.len });
        }
        Ok(self.rank(i))
    }

    pub fn select1(&self, j: usize) -> Result<usize> {
        if j == 0 || j > self.ones {
            return Err(Error::SelectOutOfRange {
                ordinal: j,
                ones: self.ones,
            });
        }
        Ok(self.select(j))
    }

    /// 0-based bit read.
    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    /// Ones in the first `i` bits; caller guarantees `i <= len`.
    #[inline]
    pub(crate) fn rank(&self, i: usize) -> usize {
        debug_assert!(i <= self.len);
        if i == self.len {
            return self.ones;
        }
        let w = i / WORD;
        let in_word = (self.words[w] & ((1u64 << (i % WORD)) - 1)).count_ones() as usize;
        self.superblocks[w / WORDS_PER_SUPERBLOCK] as usize + self.blocks[w] as usize + in_word
    }

    /// 1-based position of the j-th one; caller guarantees `1 <= j <= ones`.
    #[inline]
    pub(crate) fn select(&self, j: usize) -> usize {
        debug_assert!(j >= 1 && j <= self.ones);
        let target = j as u64;
        let s = (j - 1) / SELECT_SAMPLE;
        let lo = self.select_samples[s] as usize / WORDS_PER_SUPERBLOCK;
        let hi = match self.select_samples.get(s + 1) {
            Some(&w) => (w as usize / WORDS_PER_SUPERBLOCK + 2).min(self.superblocks.len()),
            None => self.superblocks.len(),
        };
        let sb = lo + self.superblocks[lo..hi].partition_point(|&c| c < target) - 1;

        let base = self.superblocks[sb];
        let first = sb * WORDS_PER_SUPERBLOCK;
        let last = (first + WORDS_PER_SUPERBLOCK).min(self.words.len());
        let w = first + self.blocks[first..last].partition_point(|&c| base + (c as u64) < target) - 1;

        let r = (target - base - self.blocks[w] as u64) as u32;
        w * WORD + select_in_word(self.words[w], r) + 1
    }
}

/// 0-based offset of the r-th (1-based) set bit of `word`.
#[inline]
fn select_in_word(mut word: u64, r: u32) -> usize {
    for _ in 1..r {
        word &= word - 1;
    }
    word.trailing_zeros() as usize
}

/// Append-only builder used when the final length is not known up front.
#[derive(Debug, Default)]
pub struct BitBuilder {
    words: Vec<u64>,
    len: usize,
}

impl BitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1u64 << (self.len % WORD);
        }
        self.len += 1;
    }

    /// Appends `zeros` zero bits followed by a single one.
    pub fn push_unary(&mut self, zeros: usize) {
        for _ in 0..zeros {
            self.push(false);
        }
        self.push(true);
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn finish(self) -> BitVector {
        BitVector::from_words(self.words, self.len)
    }
}
