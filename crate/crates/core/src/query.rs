//! Query and result types shared by the index and the brute-force oracle.

use std::fmt::Write;

use crate::geom::{Position, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    SearchObject { id: u64, t: u64 },
    Trajectory { id: u64, from: u64, to: u64 },
    TimeSlice { region: Region, t: u64 },
    TimeInterval { region: Region, from: u64, to: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryResult {
    /// `None` when the object is not active at the instant.
    Position(Option<Position>),
    /// `(t, position)` for every active instant in the range.
    Trajectory(Vec<(u64, Position)>),
    /// `(id, position)` sorted by id.
    Objects(Vec<(u64, Position)>),
    /// Sorted ids.
    Ids(Vec<u64>),
}

impl QueryResult {
    /// Line-oriented text form: positions as `id t x y`, id sets as one id
    /// per line, an inactive object as `inactive`.
    pub fn render(&self, query: &Query) -> String {
        let mut out = String::new();
        match (self, query) {
            (QueryResult::Position(Some(p)), Query::SearchObject { id, t }) => {
                writeln!(out, "{id} {t} {} {}", p.x, p.y).unwrap();
            }
            (QueryResult::Position(None), _) => out.push_str("inactive\n"),
            (QueryResult::Trajectory(rows), Query::Trajectory { id, .. }) => {
                for (t, p) in rows {
                    writeln!(out, "{id} {t} {} {}", p.x, p.y).unwrap();
                }
            }
            (QueryResult::Objects(rows), Query::TimeSlice { t, .. }) => {
                for (id, p) in rows {
                    writeln!(out, "{id} {t} {} {}", p.x, p.y).unwrap();
                }
            }
            (QueryResult::Ids(ids), _) => {
                for id in ids {
                    writeln!(out, "{id}").unwrap();
                }
            }
            _ => unreachable!("result kind does not match query"),
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_formats() {
        let q = Query::SearchObject { id: 7, t: 3 };
        assert_eq!(QueryResult::Position(Some(Position::new(5, 5))).render(&q), "7 3 5 5\n");
        assert_eq!(QueryResult::Position(None).render(&q), "inactive\n");
        let r = Region::new(0, 0, 1, 1).unwrap();
        let q = Query::TimeInterval { region: r, from: 0, to: 1 };
        assert_eq!(QueryResult::Ids(vec![1, 4]).render(&q), "1\n4\n");
        let q = Query::TimeSlice { region: r, t: 9 };
        assert_eq!(QueryResult::Objects(vec![]).render(&q), "");
    }
}
