//! CSV ingestion: rows of `object_id,timestamp,x,y`, header optional,
//! in any order.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geom::Position;
use crate::rlz::RawTrajectory;

struct Row {
    line: u64,
    id: u64,
    t: u64,
    pos: Position,
}

/// Parses and validates a dataset; returns trajectories sorted by id and the
/// number of data rows read.
pub fn read_csv<R: Read>(input: R) -> Result<(Vec<RawTrajectory>, usize)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);

    let mut rows = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(n as u64 + 1, |p| p.line());
        if n == 0 && record.iter().all(|f| f.parse::<i64>().is_err()) {
            continue;
        }
        if record.len() != 4 {
            return Err(Error::BadRow {
                row: line,
                msg: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let field = |i: usize, name: &str| -> Result<&str> {
            record.get(i).filter(|s| !s.is_empty()).ok_or_else(|| Error::BadRow {
                row: line,
                msg: format!("missing {name}"),
            })
        };
        let bad = |name: &str, v: &str| Error::BadRow {
            row: line,
            msg: format!("{name} `{v}` is not a valid integer"),
        };
        let id_s = field(0, "object_id")?;
        let t_s = field(1, "timestamp")?;
        let x_s = field(2, "x")?;
        let y_s = field(3, "y")?;
        rows.push(Row {
            line,
            id: id_s.parse().map_err(|_| bad("object_id", id_s))?,
            t: t_s.parse().map_err(|_| bad("timestamp", t_s))?,
            pos: Position::new(
                x_s.parse().map_err(|_| bad("x", x_s))?,
                y_s.parse().map_err(|_| bad("y", y_s))?,
            ),
        });
    }
    let count = rows.len();
    rows.sort_by_key(|r| (r.id, r.t, r.line));

    let mut grouped: BTreeMap<u64, Vec<&Row>> = BTreeMap::new();
    for r in &rows {
        grouped.entry(r.id).or_default().push(r);
    }
    let mut out = Vec::with_capacity(grouped.len());
    for (id, rs) in grouped {
        for w in rs.windows(2) {
            if w[1].t == w[0].t {
                return Err(Error::BadRow {
                    row: w[1].line,
                    msg: format!("duplicate (object {id}, timestamp {}) also on row {}", w[1].t, w[0].line),
                });
            }
            if w[1].t != w[0].t + 1 {
                return Err(Error::BadRow {
                    row: w[1].line,
                    msg: format!("object {id} jumps from t={} to t={}; timestamps must be consecutive", w[0].t, w[1].t),
                });
            }
        }
        out.push(RawTrajectory {
            id,
            t_start: rs[0].t,
            positions: rs.iter().map(|r| r.pos).collect(),
        });
    }
    Ok((out, count))
}

pub fn write_csv<W: Write>(trajectories: &[RawTrajectory], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["object_id", "timestamp", "x", "y"])?;
    for traj in trajectories {
        for (o, p) in traj.positions.iter().enumerate() {
            let t = traj.t_start + o as u64;
            w.write_record(&[traj.id.to_string(), t.to_string(), p.x.to_string(), p.y.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsorted_rows_with_header() {
        let csv = "object_id,timestamp,x,y\n2,5,1,1\n1,1,0,0\n2,4,0,1\n1,0,3,3\n";
        let (trajs, rows) = read_csv(csv.as_bytes()).unwrap();
        assert_eq!(rows, 4);
        assert_eq!(trajs.len(), 2);
        assert_eq!(trajs[0].id, 1);
        assert_eq!(trajs[0].t_start, 0);
        assert_eq!(trajs[0].positions, vec![Position::new(3, 3), Position::new(0, 0)]);
        assert_eq!(trajs[1].t_start, 4);
    }

    #[test]
    fn headerless() {
        let (trajs, _) = read_csv("7,0,1,2\n".as_bytes()).unwrap();
        assert_eq!(trajs[0].positions, vec![Position::new(1, 2)]);
    }

    #[test]
    fn errors_name_the_row() {
        let gap = "1,0,0,0\n1,2,0,0\n";
        let e = read_csv(gap.as_bytes()).unwrap_err();
        assert!(matches!(e, Error::BadRow { row: 2, .. }), "{e}");

        let dup = "1,0,0,0\n1,1,0,0\n1,0,5,5\n";
        assert!(matches!(read_csv(dup.as_bytes()), Err(Error::BadRow { row: 3, .. })));

        let junk = "1,0,0,0\n1,1,zz,0\n";
        let e = read_csv(junk.as_bytes()).unwrap_err();
        assert!(e.to_string().contains("row 2"), "{e}");

        let short = "1,0,0\n";
        assert!(matches!(read_csv(short.as_bytes()), Err(Error::BadRow { row: 1, .. })));

        let neg_t = "1,-1,0,0\n";
        assert!(read_csv(neg_t.as_bytes()).is_err());
    }

    #[test]
    fn write_then_read() {
        let trajs = vec![RawTrajectory {
            id: 3,
            t_start: 2,
            positions: vec![Position::new(1, 1), Position::new(2, 1)],
        }];
        let mut buf = Vec::new();
        write_csv(&trajs, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap().0, trajs);
    }
}
