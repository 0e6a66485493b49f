//! Latency measurement over a seeded random query workload.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Region;
use crate::index::RctIndex;
use crate::query::Query;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workload {
    Object,
    Slice,
    Interval,
}

impl Workload {
    pub const ALL: [Workload; 3] = [Workload::Object, Workload::Slice, Workload::Interval];
}

impl FromStr for Workload {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "object" => Ok(Workload::Object),
            "slice" => Ok(Workload::Slice),
            "interval" => Ok(Workload::Interval),
            _ => Err(Error::InvalidConfig(format!("unknown workload `{s}`"))),
        }
    }
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Workload::Object => "object",
            Workload::Slice => "slice",
            Workload::Interval => "interval",
        })
    }
}

/// Deterministic query set for `seed`. Regions cover roughly a tenth of
/// each grid axis; intervals span up to 64 timestamps.
pub fn make_queries(index: &RctIndex, workload: Workload, n: usize, seed: u64) -> Vec<Query> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<u64> = index.object_ids().collect();
    let (max_x, max_y) = index.grid();
    let t_max = index.t_max();
    let region = |rng: &mut ChaCha8Rng| {
        let w = (max_x / 10).max(1);
        let h = (max_y / 10).max(1);
        let x = rng.gen_range(0..=max_x);
        let y = rng.gen_range(0..=max_y);
        Region::new(x, y, (x + w).min(max_x), (y + h).min(max_y)).expect("ordered bounds")
    };
    (0..n)
        .map(|_| match workload {
            Workload::Object => Query::SearchObject {
                id: ids[rng.gen_range(0..ids.len())],
                t: rng.gen_range(0..=t_max),
            },
            Workload::Slice => Query::TimeSlice {
                region: region(&mut rng),
                t: rng.gen_range(0..=t_max),
            },
            Workload::Interval => {
                let from = rng.gen_range(0..=t_max);
                Query::TimeInterval {
                    region: region(&mut rng),
                    from,
                    to: (from + rng.gen_range(0..64)).min(t_max),
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatencyReport {
    pub workload: Workload,
    pub count: usize,
    pub p50: Option<Duration>,
    pub p95: Option<Duration>,
    pub max: Option<Duration>,
}

impl fmt::Display for LatencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let us = |d: Option<Duration>| d.map_or("-".to_string(), |d| format!("{:.3}", d.as_secs_f64() * 1e6));
        write!(
            f,
            "{} count={} p50_us={} p95_us={} max_us={}",
            self.workload,
            self.count,
            us(self.p50),
            us(self.p95),
            us(self.max)
        )
    }
}

pub fn run(index: &RctIndex, workload: Workload, n: usize, seed: u64) -> Result<LatencyReport> {
    let queries = make_queries(index, workload, n, seed);
    let mut times = Vec::with_capacity(n);
    for q in &queries {
        let t0 = Instant::now();
        std::hint::black_box(index.run(q)?);
        times.push(t0.elapsed());
    }
    times.sort_unstable();
    let pct = |p: usize| (!times.is_empty()).then(|| times[((times.len() - 1) * p).div_ceil(100)]);
    Ok(LatencyReport {
        workload,
        count: times.len(),
        p50: pct(50),
        p95: pct(95),
        max: times.last().copied(),
    })
}
