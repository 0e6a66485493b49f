//! Brute-force answers straight from the raw positions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::query::{Query, QueryResult};
use crate::rlz::RawTrajectory;

#[derive(Debug, Clone, Default)]
pub struct RawStore {
    objects: BTreeMap<u64, RawTrajectory>,
}

impl RawStore {
    pub fn new(trajectories: Vec<RawTrajectory>) -> Self {
        RawStore {
            objects: trajectories.into_iter().map(|t| (t.id, t)).collect(),
        }
    }

    pub fn get(&self, id: u64) -> Option<&RawTrajectory> {
        self.objects.get(&id)
    }

    pub fn trajectories(&self) -> impl Iterator<Item = &RawTrajectory> {
        self.objects.values()
    }

    pub fn run(&self, q: &Query) -> Result<QueryResult> {
        match *q {
            Query::SearchObject { id, t } => {
                let traj = self.get(id).ok_or(Error::UnknownObject(id))?;
                Ok(QueryResult::Position(position_at(traj, t)))
            }
            Query::Trajectory { id, from, to } => {
                if from > to {
                    return Err(Error::InvalidInterval { from, to });
                }
                let traj = self.get(id).ok_or(Error::UnknownObject(id))?;
                let rows = (from..=to)
                    .filter_map(|t| position_at(traj, t).map(|p| (t, p)))
                    .collect();
                Ok(QueryResult::Trajectory(rows))
            }
            Query::TimeSlice { region, t } => {
                let rows = self
                    .objects
                    .values()
                    .filter_map(|traj| position_at(traj, t).map(|p| (traj.id, p)))
                    .filter(|&(_, p)| region.contains(p))
                    .collect();
                Ok(QueryResult::Objects(rows))
            }
            Query::TimeInterval { region, from, to } => {
                if from > to {
                    return Err(Error::InvalidInterval { from, to });
                }
                let ids = self
                    .objects
                    .values()
                    .filter(|traj| {
                        traj.positions.iter().enumerate().any(|(o, &p)| {
                            let t = traj.t_start + o as u64;
                            from <= t && t <= to && region.contains(p)
                        })
                    })
                    .map(|traj| traj.id)
                    .collect();
                Ok(QueryResult::Ids(ids))
            }
        }
    }
}

fn position_at(traj: &RawTrajectory, t: u64) -> Option<crate::geom::Position> {
    let o = t.checked_sub(traj.t_start)?;
    traj.positions.get(o as usize).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Position, Region};

    fn store() -> RawStore {
        RawStore::new(vec![
            RawTrajectory {
                id: 1,
                t_start: 0,
                positions: vec![Position::new(5, 5); 10],
            },
            RawTrajectory {
                id: 2,
                t_start: 3,
                positions: vec![Position::new(0, 0), Position::new(1, 0), Position::new(2, 0)],
            },
        ])
    }

    #[test]
    fn stationary_search() {
        let s = store();
        for t in 0..10 {
            assert_eq!(
                s.run(&Query::SearchObject { id: 1, t }).unwrap(),
                QueryResult::Position(Some(Position::new(5, 5)))
            );
        }
        assert_eq!(s.run(&Query::SearchObject { id: 1, t: 10 }).unwrap(), QueryResult::Position(None));
        assert!(s.run(&Query::SearchObject { id: 9, t: 0 }).is_err());
    }

    #[test]
    fn whole_grid_slice_and_degenerate_interval() {
        let s = store();
        let all = Region::new(0, 0, 10, 10).unwrap();
        let slice = s.run(&Query::TimeSlice { region: all, t: 4 }).unwrap();
        assert_eq!(slice, QueryResult::Objects(vec![(1, Position::new(5, 5)), (2, Position::new(1, 0))]));
        let interval = s.run(&Query::TimeInterval { region: all, from: 4, to: 4 }).unwrap();
        assert_eq!(interval, QueryResult::Ids(vec![1, 2]));
    }

    #[test]
    fn trajectory_clips_to_active_period() {
        let s = store();
        let r = s.run(&Query::Trajectory { id: 2, from: 0, to: 4 }).unwrap();
        assert_eq!(r, QueryResult::Trajectory(vec![(3, Position::new(0, 0)), (4, Position::new(1, 0))]));
    }
}
