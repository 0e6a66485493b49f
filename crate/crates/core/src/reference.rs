//! The artificial reference movement sequence and its query overlays.
//!
//! Every step is written in unary into two bitmaps per axis: a step with
//! `dx = v >= 0` appends `v` zeros and a one to `x_pos` and a bare one to
//! `x_neg` (mirrored for negative `v`). The zeros before the t-th one of a
//! bitmap are `select1(t) - t`, so the displacement over steps `i+1..=j` is
//! a difference of four selects.
//!
//! For bounding boxes each axis keeps one [`ExtremaIndex`] per direction
//! that marks interior valleys (or peaks) of the cumulative coordinate and
//! answers range-extremum queries over the marked values only.

use std::collections::{BTreeSet, HashMap};

use crate::bitvec::{BitBuilder, BitVector};
use crate::error::{Error, Result};
use crate::geom::{BoundingBox, Position};
use crate::rmq::{Extremum, RangeExtremumIndex};

pub const DEFAULT_BLOCK_LEN: usize = 8;
pub const DEFAULT_REF_FRACTION: (u32, u32) = (1, 10);

/// Per-timestamp displacement of one object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MovementSymbol {
    pub dx: i32,
    pub dy: i32,
}

impl MovementSymbol {
    pub const fn new(dx: i32, dy: i32) -> Self {
        MovementSymbol { dx, dy }
    }

    pub fn between(from: Position, to: Position) -> Self {
        MovementSymbol::new((to.x - from.x) as i32, (to.y - from.y) as i32)
    }

    pub fn as_offset(self) -> Position {
        Position::new(self.dx as i64, self.dy as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceConfig {
    pub block_len: usize,
    /// Target reference length as a fraction `num / den` of all movements.
    pub ref_fraction: (u32, u32),
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            block_len: DEFAULT_BLOCK_LEN,
            ref_fraction: DEFAULT_REF_FRACTION,
        }
    }
}

impl ReferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_len == 0 {
            return Err(Error::InvalidConfig("block length must be positive".into()));
        }
        if self.ref_fraction.1 == 0 {
            return Err(Error::InvalidConfig("ref fraction denominator is zero".into()));
        }
        Ok(())
    }
}

/// Sampled local extrema of one cumulative coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremaIndex {
    marks: BitVector,
    ext: Option<RangeExtremumIndex>,
}

impl ExtremaIndex {
    /// Marks step `t` (`2 <= t < m`) where `coord[t]` strictly improves on
    /// `coord[t-1]` and is not beaten by `coord[t+1]`. `coord[0]` is the
    /// origin, `coord[t]` the position after step `t`.
    fn build(coord: &[i64], mode: Extremum) -> Result<Self> {
        let m = coord.len() - 1;
        let better = |a: i64, b: i64| match mode {
            Extremum::Min => a < b,
            Extremum::Max => a > b,
        };
        let mut marks = BitBuilder::new();
        let mut values = Vec::new();
        for t in 1..=m {
            let marked = t >= 2
                && t < m
                && better(coord[t], coord[t - 1])
                && !better(coord[t + 1], coord[t]);
            marks.push(marked);
            if marked {
                values.push(coord[t]);
            }
        }
        let ext = if values.is_empty() {
            None
        } else {
            Some(RangeExtremumIndex::build(values, mode)?)
        };
        Ok(ExtremaIndex {
            marks: marks.finish(),
            ext,
        })
    }

    pub fn from_parts(marks: BitVector, ext: Option<RangeExtremumIndex>) -> Result<Self> {
        let n = ext.as_ref().map_or(0, |e| e.len());
        if n != marks.count_ones() {
            return Err(Error::Format("extrema marks disagree with extremum index".into()));
        }
        Ok(ExtremaIndex { marks, ext })
    }

    pub fn marks(&self) -> &BitVector {
        &self.marks
    }

    pub fn extremum_index(&self) -> Option<&RangeExtremumIndex> {
        self.ext.as_ref()
    }

    /// Best value of `value(t)` over `t` in `[i, j]`, probing the two
    /// boundaries and the best marked step strictly between them.
    fn extreme_over(&self, i: usize, j: usize, mode: Extremum, value: impl Fn(usize) -> i64) -> i64 {
        let choose = |a: i64, b: i64| match mode {
            Extremum::Min => a.min(b),
            Extremum::Max => a.max(b),
        };
        let mut best = choose(value(i), value(j));
        if let Some(ext) = &self.ext {
            let s = self.marks.rank(i - 1) + 1;
            let e = self.marks.rank(j);
            if s <= e {
                let step = self.marks.select(ext.query_unchecked(s, e));
                best = choose(best, value(step));
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reference {
    symbols: Vec<MovementSymbol>,
    x_pos: BitVector,
    x_neg: BitVector,
    y_pos: BitVector,
    y_neg: BitVector,
    x_min: ExtremaIndex,
    x_max: ExtremaIndex,
    y_min: ExtremaIndex,
    y_max: ExtremaIndex,
}

/// Bitmaps and extrema indexes, in serialization order.
pub struct ReferenceParts {
    pub x_pos: BitVector,
    pub x_neg: BitVector,
    pub y_pos: BitVector,
    pub y_neg: BitVector,
    pub x_min: ExtremaIndex,
    pub x_max: ExtremaIndex,
    pub y_min: ExtremaIndex,
    pub y_max: ExtremaIndex,
}

impl Reference {
    /// Assembles a reference from frequent fixed-length blocks of the
    /// dataset, then appends any movement symbol still missing so every
    /// sequence in the dataset can be parsed against it.
    pub fn build(dataset: &[Vec<MovementSymbol>], config: &ReferenceConfig) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyInput("reference dataset"));
        }
        config.validate()?;
        let total: usize = dataset.iter().map(Vec::len).sum();
        let (num, den) = config.ref_fraction;
        let target = (total as u128 * num as u128).div_ceil(den as u128) as usize;

        // blocks numbered by first appearance
        let mut ids: HashMap<&[MovementSymbol], usize> = HashMap::new();
        let mut blocks: Vec<&[MovementSymbol]> = Vec::new();
        let mut freq: Vec<usize> = Vec::new();
        let mut follows: HashMap<(usize, usize), usize> = HashMap::new();
        for seq in dataset {
            let mut prev = None;
            for block in seq.chunks(config.block_len) {
                let id = *ids.entry(block).or_insert_with(|| {
                    blocks.push(block);
                    freq.push(0);
                    blocks.len() - 1
                });
                freq[id] += 1;
                if let Some(p) = prev {
                    *follows.entry((p, id)).or_insert(0) += 1;
                }
                prev = Some(id);
            }
        }

        let mut ranked: Vec<usize> = (0..blocks.len()).collect();
        ranked.sort_by_key(|&b| std::cmp::Reverse(freq[b]));
        let mut chosen = vec![false; blocks.len()];
        let mut len = 0;
        for b in ranked {
            if len >= target {
                break;
            }
            len += blocks[b].len();
            chosen[b] = true;
        }

        // Lay chosen blocks out as chains, each block followed by its most
        // frequent chosen successor, so shared routes stay contiguous.
        let mut successors: Vec<Vec<(usize, usize)>> = vec![Vec::new(); blocks.len()];
        for (&(a, b), &c) in &follows {
            if chosen[a] && chosen[b] {
                successors[a].push((c, b));
            }
        }
        for s in &mut successors {
            s.sort_unstable_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        }
        let mut placed = vec![false; blocks.len()];
        let mut symbols: Vec<MovementSymbol> = Vec::with_capacity(len + 16);
        for head in 0..blocks.len() {
            if !chosen[head] || placed[head] {
                continue;
            }
            let mut cur = Some(head);
            while let Some(b) = cur {
                placed[b] = true;
                symbols.extend_from_slice(blocks[b]);
                cur = successors[b].iter().map(|&(_, s)| s).find(|&s| !placed[s]);
            }
        }
        let present: BTreeSet<MovementSymbol> = symbols.iter().copied().collect();
        let alphabet: BTreeSet<MovementSymbol> = dataset.iter().flatten().copied().collect();
        symbols.extend(alphabet.difference(&present));

        Self::from_symbols(symbols)
    }

    /// Builds the overlays for an explicit symbol sequence.
    pub fn from_symbols(symbols: Vec<MovementSymbol>) -> Result<Self> {
        let mut x_pos = BitBuilder::new();
        let mut x_neg = BitBuilder::new();
        let mut y_pos = BitBuilder::new();
        let mut y_neg = BitBuilder::new();
        let mut xs = Vec::with_capacity(symbols.len() + 1);
        let mut ys = Vec::with_capacity(symbols.len() + 1);
        let (mut x, mut y) = (0i64, 0i64);
        xs.push(x);
        ys.push(y);
        for s in &symbols {
            push_unary_pair(&mut x_pos, &mut x_neg, s.dx);
            push_unary_pair(&mut y_pos, &mut y_neg, s.dy);
            x += s.dx as i64;
            y += s.dy as i64;
            xs.push(x);
            ys.push(y);
        }
        Ok(Reference {
            symbols,
            x_pos: x_pos.finish(),
            x_neg: x_neg.finish(),
            y_pos: y_pos.finish(),
            y_neg: y_neg.finish(),
            x_min: ExtremaIndex::build(&xs, Extremum::Min)?,
            x_max: ExtremaIndex::build(&xs, Extremum::Max)?,
            y_min: ExtremaIndex::build(&ys, Extremum::Min)?,
            y_max: ExtremaIndex::build(&ys, Extremum::Max)?,
        })
    }

    /// Reassembles a deserialized reference, checking the overlays agree
    /// with the symbols.
    pub fn from_parts(symbols: Vec<MovementSymbol>, parts: ReferenceParts) -> Result<Self> {
        let m = symbols.len();
        let bitmaps = [&parts.x_pos, &parts.x_neg, &parts.y_pos, &parts.y_neg];
        let marks = [&parts.x_min, &parts.x_max, &parts.y_min, &parts.y_max];
        if bitmaps.iter().any(|b| b.count_ones() != m) || marks.iter().any(|e| e.marks.len() != m) {
            return Err(Error::Format("reference overlays do not match symbol count".into()));
        }
        let r = Reference {
            symbols,
            x_pos: parts.x_pos,
            x_neg: parts.x_neg,
            y_pos: parts.y_pos,
            y_neg: parts.y_neg,
            x_min: parts.x_min,
            x_max: parts.x_max,
            y_min: parts.y_min,
            y_max: parts.y_max,
        };
        if m > 0 && r.movement_unchecked(0, m) != r.symbols.iter().fold(Position::default(), |a, s| a + s.as_offset()) {
            return Err(Error::Format("reference bitmaps do not match symbols".into()));
        }
        Ok(r)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[MovementSymbol] {
        &self.symbols
    }

    /// Symbol of 1-based step `i`.
    #[inline]
    pub fn step(&self, i: usize) -> MovementSymbol {
        self.symbols[i - 1]
    }

    pub fn unary_bitmaps(&self) -> [&BitVector; 4] {
        [&self.x_pos, &self.x_neg, &self.y_pos, &self.y_neg]
    }

    pub fn extrema(&self) -> [&ExtremaIndex; 4] {
        [&self.x_min, &self.x_max, &self.y_min, &self.y_max]
    }

    /// Displacement accumulated over steps `i+1..=j`.
    pub fn movement(&self, i: usize, j: usize) -> Result<Position> {
        if i > j || j > self.len() {
            return Err(Error::InvalidRange {
                start: i,
                end: j,
                len: self.len(),
            });
        }
        Ok(self.movement_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn movement_unchecked(&self, i: usize, j: usize) -> Position {
        let d = |b: &BitVector| unary_prefix(b, j) - unary_prefix(b, i);
        Position::new(d(&self.x_pos) - d(&self.x_neg), d(&self.y_pos) - d(&self.y_neg))
    }

    /// Bounding box of the positions after steps `i..=j`, relative to the
    /// position before step `i`.
    pub fn mbb(&self, i: usize, j: usize) -> Result<BoundingBox> {
        if i == 0 || i > j || j > self.len() {
            return Err(Error::InvalidRange {
                start: i,
                end: j,
                len: self.len(),
            });
        }
        Ok(self.mbb_unchecked(i, j))
    }

    pub(crate) fn mbb_unchecked(&self, i: usize, j: usize) -> BoundingBox {
        let origin = |axis: &BitVector, neg: &BitVector, t: usize| {
            (unary_prefix(axis, t) - unary_prefix(axis, i - 1)) - (unary_prefix(neg, t) - unary_prefix(neg, i - 1))
        };
        let x = |t: usize| origin(&self.x_pos, &self.x_neg, t);
        let y = |t: usize| origin(&self.y_pos, &self.y_neg, t);
        BoundingBox {
            x_min: self.x_min.extreme_over(i, j, Extremum::Min, x),
            y_min: self.y_min.extreme_over(i, j, Extremum::Min, y),
            x_max: self.x_max.extreme_over(i, j, Extremum::Max, x),
            y_max: self.y_max.extreme_over(i, j, Extremum::Max, y),
        }
    }
}

/// Zeros before the t-th one; zero for `t = 0`.
#[inline]
fn unary_prefix(b: &BitVector, t: usize) -> i64 {
    if t == 0 {
        0
    } else {
        (b.select(t) - t) as i64
    }
}

fn push_unary_pair(pos: &mut BitBuilder, neg: &mut BitBuilder, v: i32) {
    if v >= 0 {
        pos.push_unary(v as usize);
        neg.push_unary(0);
    } else {
        pos.push_unary(0);
        neg.push_unary(v.unsigned_abs() as usize);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(dx: i32, dy: i32) -> MovementSymbol {
        MovementSymbol::new(dx, dy)
    }

    fn bits(b: &BitVector) -> String {
        (1..=b.len()).map(|i| if b.access(i).unwrap() { '1' } else { '0' }).collect()
    }

    fn prefix(symbols: &[MovementSymbol]) -> Vec<Position> {
        let mut acc = vec![Position::default()];
        for s in symbols {
            acc.push(*acc.last().unwrap() + s.as_offset());
        }
        acc
    }

    fn brute_mbb(symbols: &[MovementSymbol], i: usize, j: usize) -> BoundingBox {
        let pre = prefix(symbols);
        let mut b = BoundingBox::point(pre[i] - pre[i - 1]);
        for t in i..=j {
            b.include(pre[t] - pre[i - 1]);
        }
        b
    }

    fn random_symbols(rng: &mut ChaCha8Rng, m: usize) -> Vec<MovementSymbol> {
        // runs of a held direction give the cumulative coordinates real valleys and peaks
        let mut out = Vec::with_capacity(m);
        let mut cur = sym(1, 0);
        for _ in 0..m {
            if rng.gen_bool(0.3) {
                cur = sym(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
            }
            out.push(cur);
        }
        out
    }

    #[test]
    fn unary_encoding_of_two_right() {
        let r = Reference::from_symbols(vec![sym(2, 0)]).unwrap();
        let [xp, xn, _, _] = r.unary_bitmaps();
        assert_eq!(bits(xp), "001");
        assert_eq!(bits(xn), "1");
        assert_eq!(r.movement(0, 1).unwrap(), Position::new(2, 0));
    }

    #[test]
    fn empty_range_has_no_movement() {
        let r = Reference::from_symbols(vec![sym(2, -1), sym(-3, 1), sym(0, 0)]).unwrap();
        for i in 0..=3 {
            assert_eq!(r.movement(i, i).unwrap(), Position::default());
        }
        assert!(r.movement(2, 1).is_err());
        assert!(r.movement(0, 4).is_err());
    }

    #[test]
    fn mbb_worked_example() {
        let steps = [sym(1, 1), sym(1, -1), sym(1, -1), sym(1, 1)];
        let r = Reference::from_symbols(steps.to_vec()).unwrap();
        assert_eq!(
            r.mbb(1, 4).unwrap(),
            BoundingBox {
                x_min: 1,
                y_min: -1,
                x_max: 4,
                y_max: 1
            }
        );
        assert!(r.mbb(0, 1).is_err());
        assert!(r.mbb(3, 2).is_err());
        assert!(r.mbb(1, 5).is_err());
    }

    #[test]
    fn mbb_index_arithmetic_example() {
        // y after each step: 0 -1 -2 -1 0 -1 -3 -2 -1 -2 -1 0; valleys at steps 3, 7, 10
        let dys = [0, -1, -1, 1, 1, -1, -2, 1, 1, -1, 1, 1];
        let steps: Vec<_> = dys.iter().map(|&dy| sym(0, dy)).collect();
        let r = Reference::from_symbols(steps.clone()).unwrap();
        let marks = r.extrema()[2].marks();
        assert_eq!(marks.rank1(4).unwrap() + 1, 2);
        assert_eq!(marks.rank1(11).unwrap(), 3);
        let ext = r.extrema()[2].extremum_index().unwrap();
        assert_eq!(ext.query(2, 3).unwrap(), 2);
        assert_eq!(marks.select1(2).unwrap(), 7);
        let y = |t: usize| r.movement(4, t).unwrap().y;
        let expected = y(5).min(y(7)).min(y(11));
        assert_eq!(r.mbb(5, 11).unwrap().y_min, expected);
        assert_eq!(expected, brute_mbb(&steps, 5, 11).y_min);
    }

    #[test]
    fn single_step_mbb() {
        let steps = vec![sym(3, -2), sym(-1, 1)];
        let r = Reference::from_symbols(steps).unwrap();
        for i in 1..=2 {
            let d = r.movement(i - 1, i).unwrap();
            assert_eq!(r.mbb(i, i).unwrap(), BoundingBox::point(d));
        }
    }

    #[test]
    fn movement_and_mbb_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let m = rng.gen_range(1..300);
            let steps = random_symbols(&mut rng, m);
            let pre = prefix(&steps);
            let r = Reference::from_symbols(steps.clone()).unwrap();
            for _ in 0..200 {
                let a = rng.gen_range(0..=m);
                let b = rng.gen_range(0..=m);
                let (i, j) = (a.min(b), a.max(b));
                assert_eq!(r.movement(i, j).unwrap(), pre[j] - pre[i]);
                if i >= 1 {
                    assert_eq!(r.mbb(i, j).unwrap(), brute_mbb(&steps, i, j));
                }
            }
        }
    }

    #[test]
    fn every_interior_leftmost_minimum_is_marked() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let steps = random_symbols(&mut rng, 500);
        let xs: Vec<i64> = prefix(&steps).iter().map(|p| p.x).collect();
        let r = Reference::from_symbols(steps).unwrap();
        let marks = r.extrema()[0].marks();
        for t in 2..500 {
            let strict_valley = xs[t] < xs[t - 1] && xs[t] <= xs[t + 1];
            assert_eq!(marks.access(t).unwrap(), strict_valley);
        }
        assert!(!marks.access(1).unwrap() && !marks.access(500).unwrap());
    }

    #[test]
    fn unary_bitmap_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let steps = random_symbols(&mut rng, 400);
        let r = Reference::from_symbols(steps.clone()).unwrap();
        let [xp, xn, yp, yn] = r.unary_bitmaps();
        for b in [xp, xn, yp, yn] {
            assert_eq!(b.count_ones(), 400);
        }
        let zeros = |b: &BitVector| (b.len() - b.count_ones()) as i64;
        let total = prefix(&steps)[400];
        assert_eq!(zeros(xp) - zeros(xn), total.x);
        assert_eq!(zeros(yp) - zeros(yn), total.y);
    }

    #[test]
    fn build_keeps_repeated_sequence_verbatim() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let seq: Vec<_> = (0..100).map(|_| sym(rng.gen_range(-3..=3), rng.gen_range(-3..=3))).collect();
        let dataset = vec![seq.clone(); 50];
        let r = Reference::build(&dataset, &ReferenceConfig::default()).unwrap();
        assert!(r.len() >= 100);
        assert!(r.symbols().windows(100).any(|w| w == seq.as_slice()));
    }

    #[test]
    fn build_closes_alphabet() {
        let r = Reference::build(&[vec![sym(1, 2)]], &ReferenceConfig::default()).unwrap();
        assert!(r.symbols().contains(&sym(1, 2)));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dataset: Vec<Vec<_>> = (0..10)
            .map(|_| (0..rng.gen_range(0..60)).map(|_| sym(rng.gen_range(-2..=2), rng.gen_range(-2..=2))).collect())
            .collect();
        let r = Reference::build(&dataset, &ReferenceConfig::default()).unwrap();
        for s in dataset.iter().flatten() {
            assert!(r.symbols().contains(s));
        }
    }

    #[test]
    fn build_rejects_empty_and_bad_config() {
        assert!(Reference::build(&[], &ReferenceConfig::default()).is_err());
        let bad = ReferenceConfig {
            block_len: 0,
            ..Default::default()
        };
        assert!(Reference::build(&[vec![sym(0, 0)]], &bad).is_err());
    }

    #[test]
    fn additivity_and_monotone_growth() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let steps = random_symbols(&mut rng, 200);
        let r = Reference::from_symbols(steps).unwrap();
        for _ in 0..500 {
            let mut v = [rng.gen_range(0..=200), rng.gen_range(0..=200), rng.gen_range(0..=200)];
            v.sort_unstable();
            let [i, j, k] = v;
            assert_eq!(r.movement(i, j).unwrap() + r.movement(j, k).unwrap(), r.movement(i, k).unwrap());
            if i >= 1 && k < 200 {
                assert!(r.mbb(i, k).unwrap().within(&r.mbb(i, k + 1).unwrap()));
            }
        }
    }
}
