//! k²-tree snapshot of object positions at one timestamp.
//!
//! The grid is padded to a power of `k`. Internal levels live in `tree`,
//! the last level (single cells) in `leaves`; both in level order with the
//! k² children of a node laid out row-major. The children of the node at
//! bit `p` of the concatenated `tree ++ leaves` start at `rank1(tree, p+1) * k²`.
//!
//! Object ids hang off occupied leaf cells: `ids` lists them cell by cell in
//! leaf order (sorted within a cell) and `cell_starts` marks the first id of
//! every cell, so the c-th occupied cell owns
//! `ids[select1(cell_starts, c) - 1 .. select1(cell_starts, c + 1) - 1]`.

use std::collections::HashSet;

use crate::bitvec::{BitBuilder, BitVector};
use crate::error::{Error, Result};
use crate::geom::{Position, Region};

pub const DEFAULT_ARITY: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    timestamp: u64,
    k: u32,
    side: u64,
    tree: BitVector,
    leaves: BitVector,
    cell_starts: BitVector,
    ids: Vec<u64>,
}

struct Node {
    x0: i64,
    y0: i64,
    points: Vec<(u64, Position)>,
}

impl Snapshot {
    pub fn build(
        timestamp: u64,
        points: &[(u64, Position)],
        max_x: i64,
        max_y: i64,
        k: u32,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidConfig(format!("k2-tree arity must be >= 2, got {k}")));
        }
        if max_x < 0 || max_y < 0 {
            return Err(Error::InvalidConfig("grid bounds must be non-negative".into()));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for &(id, p) in points {
            if p.x < 0 || p.y < 0 || p.x > max_x || p.y > max_y {
                return Err(Error::OutOfGrid {
                    id,
                    t: timestamp,
                    x: p.x,
                    y: p.y,
                    max_x,
                    max_y,
                });
            }
            if !seen.insert(id) {
                return Err(Error::DuplicateObject(id));
            }
        }

        let extent = max_x.max(max_y) as u64 + 1;
        let mut side = k as u64;
        while side < extent {
            side *= k as u64;
        }

        let k = k as i64;
        let mut tree = BitBuilder::new();
        let mut leaves = BitBuilder::new();
        let mut cell_starts = BitBuilder::new();
        let mut ids = Vec::with_capacity(points.len());

        let mut level = vec![Node {
            x0: 0,
            y0: 0,
            points: points.to_vec(),
        }];
        let mut size = side as i64;
        while size > 1 {
            let child = size / k;
            let last_level = child == 1;
            let mut next = Vec::new();
            for node in level {
                let mut buckets: Vec<Vec<(u64, Position)>> = vec![Vec::new(); (k * k) as usize];
                for (id, p) in node.points {
                    let cx = (p.x - node.x0) / child;
                    let cy = (p.y - node.y0) / child;
                    buckets[(cy * k + cx) as usize].push((id, p));
                }
                for (c, mut bucket) in buckets.into_iter().enumerate() {
                    let occupied = !bucket.is_empty();
                    if last_level {
                        leaves.push(occupied);
                        if occupied {
                            bucket.sort_unstable_by_key(|&(id, _)| id);
                            for (n, (id, _)) in bucket.iter().enumerate() {
                                cell_starts.push(n == 0);
                                ids.push(*id);
                            }
                        }
                    } else {
                        tree.push(occupied);
                        if occupied {
                            let c = c as i64;
                            next.push(Node {
                                x0: node.x0 + (c % k) * child,
                                y0: node.y0 + (c / k) * child,
                                points: bucket,
                            });
                        }
                    }
                }
            }
            level = next;
            size = child;
        }

        Ok(Snapshot {
            timestamp,
            k: k as u32,
            side,
            tree: tree.finish(),
            leaves: leaves.finish(),
            cell_starts: cell_starts.finish(),
            ids,
        })
    }

    pub fn from_parts(
        timestamp: u64,
        k: u32,
        side: u64,
        tree: BitVector,
        leaves: BitVector,
        cell_starts: BitVector,
        ids: Vec<u64>,
    ) -> Result<Self> {
        let kk = (k as usize).pow(2);
        if k < 2
            || side < k as u64
            || !tree.len().is_multiple_of(kk)
            || !leaves.len().is_multiple_of(kk)
            || leaves.len() != (tree.count_ones() + 1) * kk - tree.len()
            || cell_starts.len() != ids.len()
            || cell_starts.count_ones() != leaves.count_ones()
        {
            return Err(Error::Format("inconsistent k2-tree snapshot".into()));
        }
        Ok(Snapshot {
            timestamp,
            k,
            side,
            tree,
            leaves,
            cell_starts,
            ids,
        })
    }

    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }

    pub fn arity(&self) -> u32 {
        self.k
    }

    pub fn side(&self) -> u64 {
        self.side
    }

    pub fn tree_bits(&self) -> &BitVector {
        &self.tree
    }

    pub fn leaf_bits(&self) -> &BitVector {
        &self.leaves
    }

    pub fn cell_starts(&self) -> &BitVector {
        &self.cell_starts
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn object_count(&self) -> usize {
        self.ids.len()
    }

    /// Objects whose position lies in the closed region, sorted by id.
    pub fn report_region(&self, region: &Region) -> Result<Vec<(u64, Position)>> {
        let region = Region::new(region.x1, region.y1, region.x2, region.y2)?;
        let mut out = Vec::new();
        self.visit(0, 0, 0, self.side as i64, &region, &mut out);
        out.sort_unstable_by_key(|&(id, _)| id);
        Ok(out)
    }

    fn visit(&self, base: usize, x0: i64, y0: i64, size: i64, r: &Region, out: &mut Vec<(u64, Position)>) {
        let k = self.k as i64;
        let child = size / k;
        for c in 0..k * k {
            let cx = x0 + (c % k) * child;
            let cy = y0 + (c / k) * child;
            if cx > r.x2 || cx + child - 1 < r.x1 || cy > r.y2 || cy + child - 1 < r.y1 {
                continue;
            }
            let pos = base + c as usize;
            if pos < self.tree.len() {
                if self.tree.get(pos) {
                    let next = self.tree.rank(pos + 1) * (k * k) as usize;
                    self.visit(next, cx, cy, child, r, out);
                }
            } else {
                let leaf = pos - self.tree.len();
                if self.leaves.get(leaf) {
                    let cell = self.leaves.rank(leaf + 1);
                    let start = self.cell_starts.select(cell) - 1;
                    let end = if cell < self.cell_starts.count_ones() {
                        self.cell_starts.select(cell + 1) - 1
                    } else {
                        self.ids.len()
                    };
                    let at = Position::new(cx, cy);
                    out.extend(self.ids[start..end].iter().map(|&id| (id, at)));
                }
            }
        }
    }
}
