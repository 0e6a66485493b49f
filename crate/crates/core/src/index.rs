//! The trajectory index: snapshots every `period` timestamps, one shared
//! reference, and one RLZ log per object.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::geom::{BoundingBox, Position, Region};
use crate::k2tree::{Snapshot, DEFAULT_ARITY};
use crate::query::{Query, QueryResult};
use crate::reference::{Reference, ReferenceConfig};
use crate::rlz::{Factorizer, RawTrajectory, TrajectoryLog};

pub const DEFAULT_PERIOD: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexConfig {
    /// Distance between consecutive snapshots.
    pub period: u64,
    pub arity: u32,
    pub reference: ReferenceConfig,
    /// Inclusive grid bounds; taken from the data when `None`.
    pub grid: Option<(i64, i64)>,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            period: DEFAULT_PERIOD,
            arity: DEFAULT_ARITY,
            reference: ReferenceConfig::default(),
            grid: None,
        }
    }
}

impl IndexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::InvalidConfig("snapshot period must be positive".into()));
        }
        if self.arity < 2 {
            return Err(Error::InvalidConfig("k2-tree arity must be >= 2".into()));
        }
        self.reference.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexStats {
    pub objects: usize,
    pub movements: usize,
    pub reference_len: usize,
    pub phrases: usize,
    pub snapshots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RctIndex {
    config: IndexConfig,
    max_x: i64,
    max_y: i64,
    speed_max: i64,
    reference: Reference,
    // sorted by object id
    logs: Vec<TrajectoryLog>,
    snapshots: Vec<Snapshot>,
    // ids whose first timestamp falls strictly inside each period
    appearances: Vec<Vec<u64>>,
}

/// Deserialized components, see [`RctIndex::from_parts`].
pub struct IndexParts {
    pub config: IndexConfig,
    pub max_x: i64,
    pub max_y: i64,
    pub speed_max: i64,
    pub reference: Reference,
    pub logs: Vec<TrajectoryLog>,
    pub snapshots: Vec<Snapshot>,
    pub appearances: Vec<Vec<u64>>,
}

impl RctIndex {
    pub fn build(dataset: &[RawTrajectory], config: IndexConfig) -> Result<Self> {
        config.validate()?;
        if dataset.is_empty() {
            return Err(Error::EmptyInput("trajectory dataset"));
        }
        let mut trajs: Vec<&RawTrajectory> = dataset.iter().collect();
        trajs.sort_unstable_by_key(|t| t.id);
        for w in trajs.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::DuplicateObject(w[0].id));
            }
        }
        if let Some(t) = trajs.iter().find(|t| t.positions.is_empty()) {
            return Err(Error::InvalidConfig(format!("object {} has no positions", t.id)));
        }

        let (max_x, max_y) = match config.grid {
            Some(g) => g,
            None => trajs.iter().flat_map(|t| &t.positions).fold((0, 0), |(mx, my), p| (mx.max(p.x), my.max(p.y))),
        };
        for t in &trajs {
            for (o, p) in t.positions.iter().enumerate() {
                if p.x < 0 || p.y < 0 || p.x > max_x || p.y > max_y {
                    return Err(Error::OutOfGrid {
                        id: t.id,
                        t: t.t_start + o as u64,
                        x: p.x,
                        y: p.y,
                        max_x,
                        max_y,
                    });
                }
            }
        }

        let moves: Vec<_> = trajs.iter().map(|t| t.movements()).collect();
        let speed_max = moves
            .iter()
            .flatten()
            .map(|s| (s.dx.unsigned_abs()).max(s.dy.unsigned_abs()) as i64)
            .max()
            .unwrap_or(0);

        let reference = Reference::build(&moves, &config.reference)?;
        let factorizer = Factorizer::new(reference.symbols().to_vec());
        let logs = trajs
            .iter()
            .map(|t| TrajectoryLog::build(t, &reference, &factorizer))
            .collect::<Result<Vec<_>>>()?;

        let t_max = trajs.iter().map(|t| t.t_end()).max().unwrap();
        let periods = (t_max / config.period + 1) as usize;
        let mut snapshots = Vec::with_capacity(periods);
        for k in 0..periods as u64 {
            let ts = k * config.period;
            let points: Vec<(u64, Position)> = trajs
                .iter()
                .filter(|t| t.t_start <= ts && ts <= t.t_end())
                .map(|t| (t.id, t.positions[(ts - t.t_start) as usize]))
                .collect();
            snapshots.push(Snapshot::build(ts, &points, max_x, max_y, config.arity)?);
        }
        let mut appearances = vec![Vec::new(); periods];
        for t in &trajs {
            if t.t_start % config.period != 0 {
                appearances[(t.t_start / config.period) as usize].push(t.id);
            }
        }

        Ok(RctIndex {
            config: IndexConfig {
                grid: Some((max_x, max_y)),
                ..config
            },
            max_x,
            max_y,
            speed_max,
            reference,
            logs,
            snapshots,
            appearances,
        })
    }

    pub fn from_parts(parts: IndexParts) -> Result<Self> {
        parts.config.validate()?;
        let sorted = parts.logs.windows(2).all(|w| w[0].object_id() < w[1].object_id());
        if !sorted || parts.appearances.len() != parts.snapshots.len() {
            return Err(Error::Format("index sections are inconsistent".into()));
        }
        Ok(RctIndex {
            config: parts.config,
            max_x: parts.max_x,
            max_y: parts.max_y,
            speed_max: parts.speed_max,
            reference: parts.reference,
            logs: parts.logs,
            snapshots: parts.snapshots,
            appearances: parts.appearances,
        })
    }

    /// Build configuration with the grid resolved.
    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn grid(&self) -> (i64, i64) {
        (self.max_x, self.max_y)
    }

    pub fn speed_max(&self) -> i64 {
        self.speed_max
    }

    pub fn reference(&self) -> &Reference {
        &self.reference
    }

    pub fn logs(&self) -> &[TrajectoryLog] {
        &self.logs
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn appearances(&self) -> &[Vec<u64>] {
        &self.appearances
    }

    pub fn object_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.logs.iter().map(|l| l.object_id())
    }

    /// Last timestamp at which any object is active.
    pub fn t_max(&self) -> u64 {
        self.logs.iter().map(|l| l.t_end()).max().unwrap_or(0)
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            objects: self.logs.len(),
            movements: self.logs.iter().map(|l| l.movement_count()).sum(),
            reference_len: self.reference.len(),
            phrases: self.logs.iter().map(|l| l.phrase_count()).sum(),
            snapshots: self.snapshots.len(),
        }
    }

    pub fn log(&self, id: u64) -> Result<&TrajectoryLog> {
        self.logs
            .binary_search_by_key(&id, |l| l.object_id())
            .map(|i| &self.logs[i])
            .map_err(|_| Error::UnknownObject(id))
    }

    pub fn run(&self, q: &Query) -> Result<QueryResult> {
        Ok(match *q {
            Query::SearchObject { id, t } => QueryResult::Position(self.search_object(id, t)?),
            Query::Trajectory { id, from, to } => QueryResult::Trajectory(self.trajectory(id, from, to)?),
            Query::TimeSlice { region, t } => QueryResult::Objects(self.time_slice(&region, t)?),
            Query::TimeInterval { region, from, to } => QueryResult::Ids(self.time_interval(&region, from, to)?),
        })
    }

    /// Position of `id` at `t`, or `None` outside its active period.
    pub fn search_object(&self, id: u64, t: u64) -> Result<Option<Position>> {
        let log = self.log(id)?;
        if !log.is_active(t) {
            return Ok(None);
        }
        Ok(Some(log.position_at_offset((t - log.t_start()) as usize, &self.reference)))
    }

    pub fn trajectory(&self, id: u64, from: u64, to: u64) -> Result<Vec<(u64, Position)>> {
        if from > to {
            return Err(Error::InvalidInterval { from, to });
        }
        let log = self.log(id)?;
        let lo = from.max(log.t_start());
        let hi = to.min(log.t_end());
        if lo > hi {
            return Ok(Vec::new());
        }
        let first = (lo - log.t_start()) as usize;
        let last = (hi - log.t_start()) as usize;
        let mut pos = log.position_at_offset(first, &self.reference);
        let mut out = Vec::with_capacity(last - first + 1);
        out.push((lo, pos));
        if first == last {
            return Ok(out);
        }

        let mut j = log.phrase_of(first + 1);
        let mut o = first + 1;
        while o <= last {
            let phrase_first = log.phrase_first_offset(j);
            let phrase_last = log.phrase_last_offset(j).min(last);
            let p = log.phrase_reference_start(j);
            for step in p + (o - phrase_first)..=p + (phrase_last - phrase_first) {
                pos = pos + self.reference.step(step).as_offset();
                out.push((log.t_start() + o as u64, pos));
                o += 1;
            }
            j += 1;
        }
        Ok(out)
    }

    /// Objects at `t` inside `region`, sorted by id.
    pub fn time_slice(&self, region: &Region, t: u64) -> Result<Vec<(u64, Position)>> {
        let region = Region::new(region.x1, region.y1, region.x2, region.y2)?;
        let mut out = Vec::new();
        for id in self.candidates(&region, t, t)? {
            if let Some(p) = self.search_object(id, t)? {
                if region.contains(p) {
                    out.push((id, p));
                }
            }
        }
        Ok(out)
    }

    /// Objects possibly inside `region` at some instant of `[from, to]`,
    /// which must lie within one snapshot period. Sorted, deduplicated.
    pub fn candidates(&self, region: &Region, from: u64, to: u64) -> Result<Vec<u64>> {
        let period = self.config.period;
        debug_assert!(from <= to && from / period == to / period);
        let k = (from / period) as usize;
        let Some(snapshot) = self.snapshots.get(k) else {
            return Ok(Vec::new());
        };
        let grow = self.speed_max.saturating_mul((to - snapshot.timestamp()) as i64);
        let mut ids = BTreeSet::new();
        if let Some(expanded) = region.expand_clamped(grow, self.max_x, self.max_y) {
            ids.extend(snapshot.report_region(&expanded)?.into_iter().map(|(id, _)| id));
        }
        ids.extend(self.appearances[k].iter().copied());
        Ok(ids.into_iter().collect())
    }

    /// Ids of objects inside `region` at any instant of `[from, to]`.
    pub fn time_interval(&self, region: &Region, from: u64, to: u64) -> Result<Vec<u64>> {
        let region = Region::new(region.x1, region.y1, region.x2, region.y2)?;
        if from > to {
            return Err(Error::InvalidInterval { from, to });
        }
        let period = self.config.period;
        let to = to.min(self.t_max());
        let mut found = HashSet::new();
        let mut start = from;
        while start <= to {
            let end = (start / period * period + period - 1).min(to);
            for id in self.candidates(&region, start, end)? {
                if found.contains(&id) {
                    continue;
                }
                if self.visits(self.log(id)?, &region, start, end) {
                    found.insert(id);
                }
            }
            start = end + 1;
        }
        let mut ids: Vec<u64> = found.into_iter().collect();
        ids.sort_unstable();
        Ok(ids)
    }

    /// Whether the object is inside `region` at some instant of `[from, to]`.
    fn visits(&self, log: &TrajectoryLog, region: &Region, from: u64, to: u64) -> bool {
        let lo = from.max(log.t_start());
        let hi = to.min(log.t_end());
        if lo > hi {
            return false;
        }
        let mut o1 = (lo - log.t_start()) as usize;
        let o2 = (hi - log.t_start()) as usize;
        if o1 == 0 {
            if region.contains(log.start_position()) {
                return true;
            }
            o1 = 1;
        }
        if o1 > o2 {
            return false;
        }

        let (ws, we) = log.covered_phrases(o1, o2);
        if ws > we {
            // no phrase fully inside: at most two partial pieces
            let j1 = log.phrase_of(o1);
            let j2 = log.phrase_of(o2);
            if j1 == j2 {
                return self.visits_in_phrase(log, j1, o1, o2, region);
            }
            return self.visits_in_phrase(log, j1, o1, log.phrase_last_offset(j1), region)
                || self.visits_in_phrase(log, j2, log.phrase_first_offset(j2), o2, region);
        }

        if self.visits_phrases(log, ws, we, region) {
            return true;
        }
        let first = log.phrase_first_offset(ws);
        if o1 < first && self.visits_in_phrase(log, ws - 1, o1, first - 1, region) {
            return true;
        }
        let last = log.phrase_last_offset(we);
        last < o2 && self.visits_in_phrase(log, we + 1, last + 1, o2, region)
    }

    /// Halves the phrase range `ws..=we` while its box straddles `region`.
    fn visits_phrases(&self, log: &TrajectoryLog, ws: usize, we: usize, region: &Region) -> bool {
        let bb = log.boxes().expect("log with phrases").range(ws, we);
        if bb.inside(region) {
            return true;
        }
        if bb.disjoint(region) {
            return false;
        }
        if ws == we {
            return self.visits_in_phrase(log, ws, log.phrase_first_offset(ws), log.phrase_last_offset(ws), region);
        }
        let mid = (ws + we) / 2;
        self.visits_phrases(log, ws, mid, region) || self.visits_phrases(log, mid + 1, we, region)
    }

    /// Offsets `o1..=o2` all belong to phrase `j`; search its reference
    /// steps by halving.
    fn visits_in_phrase(&self, log: &TrajectoryLog, j: usize, o1: usize, o2: usize, region: &Region) -> bool {
        let p = log.phrase_reference_start(j);
        let first = log.phrase_first_offset(j);
        let i = p + (o1 - first);
        let k = p + (o2 - first);
        let origin = log.phrase_origin(j) + self.reference.movement_unchecked(p - 1, i - 1);
        self.visits_reference(i, k, origin, region)
    }

    /// `origin` is the absolute position before reference step `i`.
    fn visits_reference(&self, i: usize, j: usize, origin: Position, region: &Region) -> bool {
        let bb: BoundingBox = self.reference.mbb_unchecked(i, j).translate(origin);
        if bb.inside(region) {
            return true;
        }
        if bb.disjoint(region) || i == j {
            return false;
        }
        let mid = (i + j) / 2;
        self.visits_reference(i, mid, origin, region)
            || self.visits_reference(mid + 1, j, origin + self.reference.movement_unchecked(i - 1, mid), region)
    }
}
