//! Relative Lempel-Ziv parsing against a fixed reference, and the
//! per-object trajectory log built from the phrases.

use crate::bitvec::{BitBuilder, BitVector};
use crate::error::{Error, Result};
use crate::geom::{BoundingBox, Position};
use crate::reference::{MovementSymbol, Reference};
use crate::rmq::{Extremum, RangeExtremumIndex};

/// One factor: `len` symbols copied from 1-based reference position `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phrase {
    pub start: usize,
    pub len: usize,
}

impl Phrase {
    pub const fn new(start: usize, len: usize) -> Self {
        Phrase { start, len }
    }
}

/// Suffix array over the reference text plus a range-minimum index over it,
/// so the leftmost occurrence of a matched prefix is one query away.
#[derive(Debug, Clone)]
pub struct Factorizer<T> {
    text: Vec<T>,
    sa: Vec<u32>,
    leftmost: Option<RangeExtremumIndex>,
}

impl<T: Ord + Clone> Factorizer<T> {
    pub fn new(text: Vec<T>) -> Self {
        let sa = suffix_array(&text);
        let leftmost = if sa.is_empty() {
            None
        } else {
            Some(
                RangeExtremumIndex::build(sa.iter().map(|&s| s as i64).collect(), Extremum::Min)
                    .expect("non-empty"),
            )
        };
        Factorizer { text, sa, leftmost }
    }

    pub fn text(&self) -> &[T] {
        &self.text
    }

    /// Longest prefix of `pattern` occurring in the text, as
    /// `(leftmost 1-based position, length)`; `None` if even the first
    /// symbol is absent.
    pub fn longest_match(&self, pattern: &[T]) -> Option<Phrase> {
        let (mut lo, mut hi) = (0usize, self.sa.len());
        let mut matched = 0;
        let mut best = None;
        while matched < pattern.len() {
            let c = &pattern[matched];
            let slice = &self.sa[lo..hi];
            let at = |s: u32| self.text.get(s as usize + matched);
            let a = lo + slice.partition_point(|&s| at(s).is_none_or(|x| x < c));
            let b = lo + slice.partition_point(|&s| at(s).is_none_or(|x| x <= c));
            if a == b {
                break;
            }
            (lo, hi) = (a, b);
            matched += 1;
            best = Some((lo, hi));
        }
        let (lo, hi) = best?;
        let rmq = self.leftmost.as_ref()?;
        let start = rmq.extreme_value(lo + 1, hi) as usize + 1;
        Some(Phrase::new(start, matched))
    }

    /// Greedy leftmost-longest factorization of `source`.
    pub fn parse(&self, source: &[T]) -> Result<Vec<Phrase>> {
        let mut phrases = Vec::new();
        let mut pos = 0;
        while pos < source.len() {
            let ph = self
                .longest_match(&source[pos..])
                .ok_or(Error::SymbolNotInReference { offset: pos })?;
            pos += ph.len;
            phrases.push(ph);
        }
        Ok(phrases)
    }
}

/// Concatenates the referenced substrings.
pub fn decompress<T: Clone>(phrases: &[Phrase], text: &[T]) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(phrases.iter().map(|p| p.len).sum());
    for ph in phrases {
        if ph.start == 0 || ph.len == 0 || ph.start + ph.len - 1 > text.len() {
            return Err(Error::PhraseOutOfBounds {
                p: ph.start,
                l: ph.len,
                m: text.len(),
            });
        }
        out.extend_from_slice(&text[ph.start - 1..ph.start - 1 + ph.len]);
    }
    Ok(out)
}

/// Prefix doubling; `O(n log^2 n)`, ample for reference sizes in play here.
fn suffix_array<T: Ord>(text: &[T]) -> Vec<u32> {
    let n = text.len();
    let mut sa: Vec<usize> = (0..n).collect();
    if n == 0 {
        return Vec::new();
    }
    sa.sort_by(|&a, &b| text[a].cmp(&text[b]));
    let mut rank = vec![0usize; n];
    for w in 1..n {
        rank[sa[w]] = rank[sa[w - 1]] + usize::from(text[sa[w]] != text[sa[w - 1]]);
    }
    let mut k = 1;
    let mut tmp = vec![0usize; n];
    while rank[sa[n - 1]] < n - 1 {
        let key = |i: usize| (rank[i], if i + k < n { rank[i + k] + 1 } else { 0 });
        sa.sort_unstable_by_key(|&i| key(i));
        tmp[sa[0]] = 0;
        for w in 1..n {
            tmp[sa[w]] = tmp[sa[w - 1]] + usize::from(key(sa[w]) != key(sa[w - 1]));
        }
        std::mem::swap(&mut rank, &mut tmp);
        k *= 2;
    }
    sa.into_iter().map(|i| i as u32).collect()
}

/// An object's positions at consecutive timestamps starting at `t_start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTrajectory {
    pub id: u64,
    pub t_start: u64,
    pub positions: Vec<Position>,
}

impl RawTrajectory {
    /// From `(timestamp, position)` samples sorted by timestamp; rejects gaps
    /// and repeated timestamps.
    pub fn from_samples(id: u64, samples: &[(u64, Position)]) -> Result<Self> {
        let Some(&(t_start, _)) = samples.first() else {
            return Err(Error::EmptyInput("trajectory samples"));
        };
        for (w, &(t, _)) in samples.iter().enumerate() {
            if t != t_start + w as u64 {
                return Err(Error::TimestampGap { id, t });
            }
        }
        Ok(RawTrajectory {
            id,
            t_start,
            positions: samples.iter().map(|&(_, p)| p).collect(),
        })
    }

    pub fn t_end(&self) -> u64 {
        self.t_start + self.positions.len() as u64 - 1
    }

    pub fn movements(&self) -> Vec<MovementSymbol> {
        self.positions
            .windows(2)
            .map(|w| MovementSymbol::between(w[0], w[1]))
            .collect()
    }
}

/// Per-phrase absolute extrema with their range-extremum indexes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseBoxes {
    pub x_min: RangeExtremumIndex,
    pub x_max: RangeExtremumIndex,
    pub y_min: RangeExtremumIndex,
    pub y_max: RangeExtremumIndex,
}

impl PhraseBoxes {
    /// Box over phrases `ws..=we` (1-based).
    pub fn range(&self, ws: usize, we: usize) -> BoundingBox {
        BoundingBox {
            x_min: self.x_min.extreme_value(ws, we),
            y_min: self.y_min.extreme_value(ws, we),
            x_max: self.x_max.extreme_value(ws, we),
            y_max: self.y_max.extreme_value(ws, we),
        }
    }
}

/// One object's compressed movement log.
///
/// Offsets are 1-based movement numbers: offset `o` is the movement that
/// takes the object from time `t_start + o - 1` to `t_start + o`. Bit `o` of
/// `boundaries` is set where a phrase begins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryLog {
    object_id: u64,
    t_start: u64,
    start: Position,
    starts: Vec<u32>,
    boundaries: BitVector,
    prev: Vec<Position>,
    boxes: Option<PhraseBoxes>,
}

impl TrajectoryLog {
    pub fn build(
        traj: &RawTrajectory,
        reference: &Reference,
        factorizer: &Factorizer<MovementSymbol>,
    ) -> Result<Self> {
        let Some(&start) = traj.positions.first() else {
            return Err(Error::EmptyInput("trajectory positions"));
        };
        let moves = traj.movements();
        let phrases = factorizer.parse(&moves)?;

        let mut boundaries = BitBuilder::new();
        let mut prev = Vec::with_capacity(phrases.len());
        let mut cols: [Vec<i64>; 4] = Default::default();
        let mut offset = 0;
        for ph in &phrases {
            debug_assert!(ph.start + ph.len - 1 <= reference.len());
            prev.push(traj.positions[offset]);
            let mut bb = BoundingBox::point(traj.positions[offset + 1]);
            for o in offset + 1..=offset + ph.len {
                bb.include(traj.positions[o]);
                boundaries.push(o == offset + 1);
            }
            for (col, v) in cols.iter_mut().zip([bb.x_min, bb.x_max, bb.y_min, bb.y_max]) {
                col.push(v);
            }
            offset += ph.len;
        }

        let boxes = if phrases.is_empty() {
            None
        } else {
            let [x_min, x_max, y_min, y_max] = cols;
            Some(PhraseBoxes {
                x_min: RangeExtremumIndex::build(x_min, Extremum::Min)?,
                x_max: RangeExtremumIndex::build(x_max, Extremum::Max)?,
                y_min: RangeExtremumIndex::build(y_min, Extremum::Min)?,
                y_max: RangeExtremumIndex::build(y_max, Extremum::Max)?,
            })
        };

        Ok(TrajectoryLog {
            object_id: traj.id,
            t_start: traj.t_start,
            start,
            starts: phrases.iter().map(|p| p.start as u32).collect(),
            boundaries: boundaries.finish(),
            prev,
            boxes,
        })
    }

    pub fn from_parts(
        object_id: u64,
        t_start: u64,
        start: Position,
        starts: Vec<u32>,
        boundaries: BitVector,
        prev: Vec<Position>,
        boxes: Option<PhraseBoxes>,
    ) -> Result<Self> {
        let z = starts.len();
        let box_len = boxes.as_ref().map(|b| {
            [&b.x_min, &b.x_max, &b.y_min, &b.y_max]
                .iter()
                .all(|r| r.len() == z)
        });
        let consistent = boundaries.count_ones() == z
            && prev.len() == z
            && (z == 0 || boundaries.access(1).unwrap_or(false))
            && match box_len {
                Some(ok) => ok && z > 0,
                None => z == 0,
            };
        if !consistent {
            return Err(Error::Format(format!("inconsistent log for object {object_id}")));
        }
        Ok(TrajectoryLog {
            object_id,
            t_start,
            start,
            starts,
            boundaries,
            prev,
            boxes,
        })
    }

    pub fn object_id(&self) -> u64 {
        self.object_id
    }

    pub fn t_start(&self) -> u64 {
        self.t_start
    }

    pub fn t_end(&self) -> u64 {
        self.t_start + self.movement_count() as u64
    }

    pub fn start_position(&self) -> Position {
        self.start
    }

    pub fn movement_count(&self) -> usize {
        self.boundaries.len()
    }

    pub fn phrase_count(&self) -> usize {
        self.starts.len()
    }

    pub fn phrase_starts(&self) -> &[u32] {
        &self.starts
    }

    pub fn boundaries(&self) -> &BitVector {
        &self.boundaries
    }

    pub fn previous_positions(&self) -> &[Position] {
        &self.prev
    }

    pub fn boxes(&self) -> Option<&PhraseBoxes> {
        self.boxes.as_ref()
    }

    pub fn is_active(&self, t: u64) -> bool {
        self.t_start <= t && t <= self.t_end()
    }

    /// Reference position where 1-based phrase `j` starts.
    #[inline]
    pub fn phrase_reference_start(&self, j: usize) -> usize {
        self.starts[j - 1] as usize
    }

    /// Position held before phrase `j` begins.
    #[inline]
    pub fn phrase_origin(&self, j: usize) -> Position {
        self.prev[j - 1]
    }

    /// First movement offset of phrase `j`.
    #[inline]
    pub fn phrase_first_offset(&self, j: usize) -> usize {
        self.boundaries.select(j)
    }

    /// Last movement offset of phrase `j`.
    #[inline]
    pub fn phrase_last_offset(&self, j: usize) -> usize {
        if j < self.phrase_count() {
            self.boundaries.select(j + 1) - 1
        } else {
            self.movement_count()
        }
    }

    /// Phrase containing movement offset `o` (`1 <= o <= n`).
    #[inline]
    pub fn phrase_of(&self, o: usize) -> usize {
        self.boundaries.rank(o)
    }

    /// Phrases lying entirely inside offsets `o1..=o2`, possibly empty.
    pub fn covered_phrases(&self, o1: usize, o2: usize) -> (usize, usize) {
        let ws = self.boundaries.rank(o1 - 1) + 1;
        let ends_here = o2 == self.movement_count() || self.boundaries.get(o2);
        let we = self.boundaries.rank(o2) - usize::from(!ends_here);
        (ws, we)
    }

    /// Position after `o` movements.
    pub fn position_at_offset(&self, o: usize, reference: &Reference) -> Position {
        if o == 0 {
            return self.start;
        }
        let j = self.phrase_of(o);
        let k = o - self.phrase_first_offset(j);
        let p = self.phrase_reference_start(j);
        self.phrase_origin(j) + reference.movement_unchecked(p - 1, p + k)
    }

    /// Rebuilds the movement sequence from the reference.
    pub fn movements(&self, reference: &Reference) -> Vec<MovementSymbol> {
        (1..=self.phrase_count())
            .flat_map(|j| {
                let p = self.phrase_reference_start(j);
                let len = self.phrase_last_offset(j) - self.phrase_first_offset(j) + 1;
                reference.symbols()[p - 1..p - 1 + len].iter().copied()
            })
            .collect()
    }

    pub fn phrases(&self) -> Vec<Phrase> {
        (1..=self.phrase_count())
            .map(|j| {
                Phrase::new(
                    self.phrase_reference_start(j),
                    self.phrase_last_offset(j) - self.phrase_first_offset(j) + 1,
                )
            })
            .collect()
    }
}
