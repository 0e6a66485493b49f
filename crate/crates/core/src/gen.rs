//! Synthetic fleets: objects follow one of a few shared routes, each step
//! replaced by a random movement with a fixed probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Position;
use crate::rlz::RawTrajectory;

pub const MAX_SPEED: i64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub objects: usize,
    /// Movements per object.
    pub steps: usize,
    /// Grid side; coordinates lie in `0..grid`.
    pub grid: i64,
    pub routes: usize,
    pub mutation_rate: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            objects: 50,
            steps: 1000,
            grid: 1024,
            routes: 4,
            mutation_rate: 0.01,
            seed: 1,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.objects == 0 || self.routes == 0 {
            return Err(Error::InvalidConfig("objects and routes must be positive".into()));
        }
        if self.grid < 16 {
            return Err(Error::InvalidConfig(format!("grid side {} is below 16", self.grid)));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidConfig(format!("mutation rate {} outside [0, 1]", self.mutation_rate)));
        }
        Ok(())
    }
}

struct Route {
    origin: Position,
    moves: Vec<Position>,
}

fn random_move(rng: &mut ChaCha8Rng) -> Position {
    Position::new(rng.gen_range(-MAX_SPEED..=MAX_SPEED), rng.gen_range(-MAX_SPEED..=MAX_SPEED))
}

/// Moves `p` by `d`, bouncing off `[lo, hi]` on each axis.
fn bounce(p: Position, d: Position, lo: i64, hi: i64) -> Position {
    let axis = |v: i64, dv: i64| {
        let n = v + dv;
        if n < lo || n > hi {
            (v - dv).clamp(lo, hi)
        } else {
            n
        }
    };
    Position::new(axis(p.x, d.x), axis(p.y, d.y))
}

fn make_route(rng: &mut ChaCha8Rng, steps: usize, lo: i64, hi: i64) -> Route {
    let origin = Position::new(rng.gen_range(lo..=hi), rng.gen_range(lo..=hi));
    let mut heading = random_move(rng);
    let mut at = origin;
    let mut moves = Vec::with_capacity(steps);
    for _ in 0..steps {
        if rng.gen_bool(0.05) {
            heading = random_move(rng);
        }
        // wobble around the heading so long straight runs do not repeat verbatim
        let mut step = heading;
        if rng.gen_bool(0.5) {
            let nudge = if rng.gen_bool(0.5) { 1 } else { -1 };
            if rng.gen_bool(0.5) {
                step.x = (step.x + nudge).clamp(-MAX_SPEED, MAX_SPEED);
            } else {
                step.y = (step.y + nudge).clamp(-MAX_SPEED, MAX_SPEED);
            }
        }
        let next = bounce(at, step, lo, hi);
        if next - at != step {
            heading = next - at;
        }
        moves.push(next - at);
        at = next;
    }
    Route { origin, moves }
}

pub fn generate(cfg: &GenConfig) -> Result<Vec<RawTrajectory>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let margin = (cfg.grid / 8).max(4);
    let (lo, hi) = (margin, cfg.grid - 1 - margin);
    let routes: Vec<Route> = (0..cfg.routes).map(|_| make_route(&mut rng, cfg.steps, lo, hi)).collect();
    let jitter = (margin / 2).min(4);

    let mut out = Vec::with_capacity(cfg.objects);
    for id in 0..cfg.objects {
        let route = &routes[id % cfg.routes];
        let t_start = rng.gen_range(0..=(cfg.steps as u64 / 10));
        let mut at = route.origin + Position::new(rng.gen_range(-jitter..=jitter), rng.gen_range(-jitter..=jitter));
        let mut positions = Vec::with_capacity(cfg.steps + 1);
        positions.push(at);
        for &d in &route.moves {
            let d = if cfg.mutation_rate > 0.0 && rng.gen_bool(cfg.mutation_rate) {
                random_move(&mut rng)
            } else {
                d
            };
            at = bounce(at, d, 0, cfg.grid - 1);
            positions.push(at);
        }
        out.push(RawTrajectory {
            id: id as u64 + 1,
            t_start,
            positions,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let cfg = GenConfig {
            objects: 5,
            steps: 50,
            ..Default::default()
        };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
    }

    #[test]
    fn unmutated_single_route_shares_movements() {
        let cfg = GenConfig {
            objects: 10,
            steps: 300,
            routes: 1,
            mutation_rate: 0.0,
            ..Default::default()
        };
        let trajs = generate(&cfg).unwrap();
        let first = trajs[0].movements();
        for t in &trajs {
            assert_eq!(t.movements(), first);
        }
    }

    #[test]
    fn stays_in_grid_with_bounded_speed() {
        let cfg = GenConfig {
            objects: 20,
            steps: 400,
            grid: 64,
            mutation_rate: 0.5,
            ..Default::default()
        };
        for t in generate(&cfg).unwrap() {
            for p in &t.positions {
                assert!((0..64).contains(&p.x) && (0..64).contains(&p.y));
            }
            for m in t.movements() {
                assert!(m.dx.abs() <= 3 && m.dy.abs() <= 3);
            }
        }
    }

    #[test]
    fn rejects_bad_flags() {
        for cfg in [
            GenConfig { objects: 0, ..Default::default() },
            GenConfig { routes: 0, ..Default::default() },
            GenConfig { grid: 4, ..Default::default() },
            GenConfig { mutation_rate: 1.5, ..Default::default() },
        ] {
            assert!(generate(&cfg).is_err());
        }
    }
}
