//! Binary index file.
//!
//! Layout, all fixed-width integers little-endian, every variable-length
//! array prefixed by its element count:
//!
//! ```text
//! "RCT1" | version u16
//! config:     period u64 | k u32 | ref_fraction num u32, den u32 | block u32
//! grid:       max_x i64 | max_y i64
//! speed_max   i64
//! reference:  m u64 | alphabet [(dx i32, dy i32)] | symbol ids [varint]
//!             x_pos x_neg y_pos y_neg bitmaps
//!             x_min x_max y_min y_max extrema (marks bitmap, optional rmq)
//! logs:       [object_id u64 | t_s u64 | start (i64, i64) | p [varint]
//!              | l bitmap | prev [(zigzag, zigzag)] | 4 rmq when p non-empty]
//! snapshots:  [timestamp u64 | side u64 | k u32 | T, L, cell_starts bitmaps
//!              | ids [varint]]
//! appearances: [[varint]]
//! ```
//!
//! A bitmap is its bit length (u64) followed by the packed 64-bit words.
//! An rmq is a mode byte (0 min, 1 max), its length (u64) and the zigzag
//! varint values; the sparse table is rebuilt on load.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::geom::Position;
use crate::index::{IndexConfig, IndexParts, RctIndex};
use crate::k2tree::Snapshot;
use crate::reference::{ExtremaIndex, MovementSymbol, Reference, ReferenceConfig, ReferenceParts};
use crate::rlz::{PhraseBoxes, TrajectoryLog};
use crate::rmq::{Extremum, RangeExtremumIndex};

pub const MAGIC: &[u8; 4] = b"RCT1";
pub const VERSION: u16 = 1;

#[derive(Default)]
struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i32(&mut self, v: i32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn varint(&mut self, mut v: u64) {
        while v >= 0x80 {
            self.buf.push((v as u8) | 0x80);
            v >>= 7;
        }
        self.buf.push(v as u8);
    }
    fn zigzag(&mut self, v: i64) {
        self.varint(((v << 1) ^ (v >> 63)) as u64);
    }
    fn len(&mut self, n: usize) {
        self.u64(n as u64);
    }
    fn bits(&mut self, b: &BitVector) {
        self.len(b.len());
        for &w in b.words() {
            self.u64(w);
        }
    }
    fn rmq(&mut self, r: &RangeExtremumIndex) {
        self.u8(match r.mode() {
            Extremum::Min => 0,
            Extremum::Max => 1,
        });
        self.len(r.len());
        for &v in r.values() {
            self.zigzag(v);
        }
    }
}

struct Decoder<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Decoder<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| truncated(self.at))?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn varint(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.u8()?;
            v |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(Error::Format(format!("overlong varint at byte {}", self.at)))
    }
    fn zigzag(&mut self) -> Result<i64> {
        let v = self.varint()?;
        Ok(((v >> 1) as i64) ^ -((v & 1) as i64))
    }
    /// Element count, bounded by the remaining bytes so corrupt input
    /// cannot trigger huge allocations.
    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        if n > (self.buf.len() - self.at) as u64 * 8 + 64 {
            return Err(Error::Format(format!("implausible length {n} at byte {}", self.at)));
        }
        Ok(n as usize)
    }
    fn bits(&mut self) -> Result<BitVector> {
        let n = self.len()?;
        let words = (0..n.div_ceil(64)).map(|_| self.u64()).collect::<Result<Vec<_>>>()?;
        Ok(BitVector::from_words(words, n))
    }
    fn rmq(&mut self) -> Result<RangeExtremumIndex> {
        let mode = match self.u8()? {
            0 => Extremum::Min,
            1 => Extremum::Max,
            m => return Err(Error::Format(format!("unknown rmq mode {m}"))),
        };
        let n = self.len()?;
        let values = (0..n).map(|_| self.zigzag()).collect::<Result<Vec<_>>>()?;
        RangeExtremumIndex::build(values, mode)
    }
}

fn truncated(at: usize) -> Error {
    Error::Format(format!("unexpected end of file at byte {at}"))
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidConfig(format!("{what} {v} does not fit the file format")))
}

pub fn encode(index: &RctIndex) -> Result<Vec<u8>> {
    let mut e = Encoder::default();
    e.buf.extend_from_slice(MAGIC);
    e.u16(VERSION);

    let cfg = index.config();
    e.u64(cfg.period);
    e.u32(cfg.arity);
    e.u32(cfg.reference.ref_fraction.0);
    e.u32(cfg.reference.ref_fraction.1);
    e.u32(to_u32(cfg.reference.block_len, "block length")?);
    let (max_x, max_y) = index.grid();
    e.i64(max_x);
    e.i64(max_y);
    e.i64(index.speed_max());

    let reference = index.reference();
    let mut alphabet: Vec<MovementSymbol> = reference.symbols().to_vec();
    alphabet.sort_unstable();
    alphabet.dedup();
    let ids: HashMap<MovementSymbol, u64> = alphabet.iter().enumerate().map(|(i, &s)| (s, i as u64)).collect();
    e.len(reference.len());
    e.len(alphabet.len());
    for s in &alphabet {
        e.i32(s.dx);
        e.i32(s.dy);
    }
    for s in reference.symbols() {
        e.varint(ids[s]);
    }
    for b in reference.unary_bitmaps() {
        e.bits(b);
    }
    for x in reference.extrema() {
        e.bits(x.marks());
        match x.extremum_index() {
            Some(r) => {
                e.u8(1);
                e.rmq(r);
            }
            None => e.u8(0),
        }
    }

    e.len(index.logs().len());
    for log in index.logs() {
        e.u64(log.object_id());
        e.u64(log.t_start());
        e.i64(log.start_position().x);
        e.i64(log.start_position().y);
        e.len(log.phrase_count());
        for &p in log.phrase_starts() {
            e.varint(p as u64);
        }
        e.bits(log.boundaries());
        for p in log.previous_positions() {
            e.zigzag(p.x);
            e.zigzag(p.y);
        }
        if let Some(b) = log.boxes() {
            for r in [&b.x_min, &b.x_max, &b.y_min, &b.y_max] {
                e.rmq(r);
            }
        }
    }

    e.len(index.snapshots().len());
    for sn in index.snapshots() {
        e.u64(sn.timestamp());
        e.u64(sn.side());
        e.u32(sn.arity());
        e.bits(sn.tree_bits());
        e.bits(sn.leaf_bits());
        e.bits(sn.cell_starts());
        e.len(sn.ids().len());
        for &id in sn.ids() {
            e.varint(id);
        }
    }

    e.len(index.appearances().len());
    for ids in index.appearances() {
        e.len(ids.len());
        for &id in ids {
            e.varint(id);
        }
    }
    Ok(e.buf)
}

pub fn decode(bytes: &[u8]) -> Result<RctIndex> {
    let mut d = Decoder { buf: bytes, at: 0 };
    if d.take(4).ok() != Some(&MAGIC[..]) {
        return Err(Error::Format("bad magic; not an index file".into()));
    }
    let version = d.u16()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }

    let period = d.u64()?;
    let arity = d.u32()?;
    let num = d.u32()?;
    let den = d.u32()?;
    let block_len = d.u32()? as usize;
    let max_x = d.i64()?;
    let max_y = d.i64()?;
    let speed_max = d.i64()?;
    let config = IndexConfig {
        period,
        arity,
        reference: ReferenceConfig {
            block_len,
            ref_fraction: (num, den),
        },
        grid: Some((max_x, max_y)),
    };

    let m = d.len()?;
    let n_alpha = d.len()?;
    let alphabet = (0..n_alpha)
        .map(|_| Ok(MovementSymbol::new(d.i32()?, d.i32()?)))
        .collect::<Result<Vec<_>>>()?;
    let symbols = (0..m)
        .map(|_| {
            let id = d.varint()? as usize;
            alphabet.get(id).copied().ok_or_else(|| Error::Format(format!("symbol id {id} outside alphabet")))
        })
        .collect::<Result<Vec<_>>>()?;
    let [x_pos, x_neg, y_pos, y_neg] = [d.bits()?, d.bits()?, d.bits()?, d.bits()?];
    let mut extrema = Vec::with_capacity(4);
    for _ in 0..4 {
        let marks = d.bits()?;
        let ext = match d.u8()? {
            0 => None,
            1 => Some(d.rmq()?),
            f => return Err(Error::Format(format!("bad presence flag {f}"))),
        };
        extrema.push(ExtremaIndex::from_parts(marks, ext)?);
    }
    let [x_min, x_max, y_min, y_max]: [ExtremaIndex; 4] = extrema.try_into().unwrap();
    let reference = Reference::from_parts(
        symbols,
        ReferenceParts {
            x_pos,
            x_neg,
            y_pos,
            y_neg,
            x_min,
            x_max,
            y_min,
            y_max,
        },
    )?;

    let n_logs = d.len()?;
    let mut logs = Vec::with_capacity(n_logs);
    for _ in 0..n_logs {
        let id = d.u64()?;
        let t_start = d.u64()?;
        let start = Position::new(d.i64()?, d.i64()?);
        let z = d.len()?;
        let starts = (0..z)
            .map(|_| {
                let p = d.varint()?;
                if p == 0 || p > reference.len() as u64 {
                    return Err(Error::Format(format!("phrase start {p} outside reference")));
                }
                Ok(p as u32)
            })
            .collect::<Result<Vec<_>>>()?;
        let boundaries = d.bits()?;
        let prev = (0..z)
            .map(|_| Ok(Position::new(d.zigzag()?, d.zigzag()?)))
            .collect::<Result<Vec<_>>>()?;
        let boxes = if z > 0 {
            Some(PhraseBoxes {
                x_min: d.rmq()?,
                x_max: d.rmq()?,
                y_min: d.rmq()?,
                y_max: d.rmq()?,
            })
        } else {
            None
        };
        logs.push(TrajectoryLog::from_parts(id, t_start, start, starts, boundaries, prev, boxes)?);
    }

    let n_snap = d.len()?;
    let mut snapshots = Vec::with_capacity(n_snap);
    for _ in 0..n_snap {
        let ts = d.u64()?;
        let side = d.u64()?;
        let k = d.u32()?;
        let tree = d.bits()?;
        let leaves = d.bits()?;
        let cell_starts = d.bits()?;
        let n = d.len()?;
        let ids = (0..n).map(|_| d.varint()).collect::<Result<Vec<_>>>()?;
        snapshots.push(Snapshot::from_parts(ts, k, side, tree, leaves, cell_starts, ids)?);
    }

    let n_app = d.len()?;
    let mut appearances = Vec::with_capacity(n_app);
    for _ in 0..n_app {
        let n = d.len()?;
        appearances.push((0..n).map(|_| d.varint()).collect::<Result<Vec<_>>>()?);
    }
    if d.at != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - d.at)));
    }

    RctIndex::from_parts(IndexParts {
        config,
        max_x,
        max_y,
        speed_max,
        reference,
        logs,
        snapshots,
        appearances,
    })
}

/// Writes the index and returns its size in bytes.
pub fn save(index: &RctIndex, path: &Path) -> Result<usize> {
    let bytes = encode(index)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(bytes.len())
}

pub fn load(path: &Path) -> Result<RctIndex> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rlz::RawTrajectory;

    fn sample() -> RctIndex {
        let data = vec![
            RawTrajectory {
                id: 1,
                t_start: 0,
                positions: (0..20).map(|i| Position::new(i, 2 * i % 7)).collect(),
            },
            RawTrajectory {
                id: 9,
                t_start: 5,
                positions: vec![Position::new(3, 3)],
            },
        ];
        RctIndex::build(
            &data,
            IndexConfig {
                period: 4,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_identical() {
        let idx = sample();
        let bytes = encode(&idx).unwrap();
        let back = decode(&bytes).unwrap();
        assert_eq!(back.reference(), idx.reference());
        assert_eq!(back.logs(), idx.logs());
        assert_eq!(back.snapshots(), idx.snapshots());
        assert_eq!(back.appearances(), idx.appearances());
        assert_eq!(encode(&back).unwrap(), bytes);
    }

    #[test]
    fn rejects_bad_magic_version_and_truncation() {
        let bytes = encode(&sample()).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(decode(&bad), Err(Error::Format(m)) if m.contains("version")));
        for cut in [0, 3, 6, bytes.len() / 2, bytes.len() - 1] {
            assert!(decode(&bytes[..cut]).is_err());
        }
        let mut extra = bytes;
        extra.push(0);
        assert!(decode(&extra).is_err());
    }

    #[test]
    fn varint_edges() {
        let mut e = Encoder::default();
        for v in [0, 1, 127, 128, u64::MAX] {
            e.varint(v);
        }
        for v in [0, -1, i64::MIN, i64::MAX] {
            e.zigzag(v);
        }
        let mut d = Decoder { buf: &e.buf, at: 0 };
        for v in [0, 1, 127, 128, u64::MAX] {
            assert_eq!(d.varint().unwrap(), v);
        }
        for v in [0, -1, i64::MIN, i64::MAX] {
            assert_eq!(d.zigzag().unwrap(), v);
        }
    }
}
