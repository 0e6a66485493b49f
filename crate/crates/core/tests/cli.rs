use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn rct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rct")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn build(dir: &TempDir, csv: &Path, extra: &[&str]) -> PathBuf {
    let idx = dir.path().join("out.rct");
    let mut args = vec!["build", s(csv), s(&idx)];
    args.extend_from_slice(extra);
    let o = rct(&args);
    assert!(o.status.success(), "build failed: {}", stderr(&o));
    idx
}

#[test]
fn build_prints_stats_line() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "d.csv", "object_id,timestamp,x,y\n1,0,0,0\n1,1,1,0\n1,2,2,0\n2,1,5,5\n2,2,5,6\n");
    let idx = dir.path().join("d.rct");
    let o = rct(&["build", s(&csv), s(&idx), "--period", "2", "--k", "3", "--ref-fraction", "1/2", "--block", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    for key in ["objects=2 ", "movements=3 ", "reference=", "phrases=", "index_bytes=", "input_bytes=80 ", "ratio="] {
        assert!(line.contains(key), "missing {key} in {line}");
    }
    let bytes = std::fs::metadata(&idx).unwrap().len();
    assert!(line.contains(&format!("index_bytes={bytes} ")));
}

#[test]
fn single_object_single_position() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "one.csv", "4,9,5,5\n");
    let idx = dir.path().join("one.rct");
    let o = rct(&["build", s(&csv), s(&idx)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("movements=0 "));
    assert!(stdout(&o).contains("phrases=0 "));

    let q = rct(&["query", s(&idx), "search-object", "--id", "4", "--t", "9"]);
    assert_eq!(stdout(&q), "4 9 5 5\n");
    let q = rct(&["query", s(&idx), "search-object", "--id", "4", "--t", "10"]);
    assert_eq!(stdout(&q), "inactive\n");
}

#[test]
fn malformed_rows_name_the_row() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("gap.csv", "1,0,0,0\n1,1,0,0\n1,3,0,0\n", "row 3"),
        ("dup.csv", "x,t,a,b\n1,0,0,0\n1,0,1,1\n", "row 3"),
        ("junk.csv", "1,0,0,0\n1,1,0,zz\n", "row 2"),
        ("short.csv", "1,0,0,0\n1,1,0\n", "row 2"),
    ];
    for (name, body, needle) in cases {
        let csv = write(&dir, name, body);
        let o = rct(&["build", s(&csv), s(&dir.path().join("x.rct"))]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(stderr(&o).contains(needle), "{name}: {}", stderr(&o));
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "d.csv", "1,0,2,2\n1,1,3,3\n");
    let idx = build(&dir, &csv, &[]);

    assert_eq!(rct(&["--help"]).status.code(), Some(0));
    assert_eq!(rct(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(rct(&["build", s(&csv), "x.rct", "--period", "0"]).status.code(), Some(1));
    assert_eq!(rct(&["build", s(&csv), "x.rct", "--ref-fraction", "abc"]).status.code(), Some(1));
    assert_eq!(rct(&["build", "/nonexistent/in.csv", "x.rct"]).status.code(), Some(2));

    let o = rct(&["query", s(&idx), "time-slice", "--region", "5,5,1,1", "--t", "0"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = rct(&["query", s(&idx), "time-slice", "--region", "1,2,3", "--t", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = rct(&["query", s(&idx), "search-object", "--id", "99", "--t", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert_ne!(rct(&["query", s(&csv), "search-object", "--id", "1", "--t", "0"]).status.code(), Some(0));

    let o = rct(&["query", s(&idx), "time-slice", "--region", "-10,-10,-1,-1", "--t", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "");
}

#[test]
fn oracle_output_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let gen = rct(&["gen", "--objects", "12", "--steps", "300", "--grid", "128", "--mutation-rate", "0.2", "--seed", "3"]);
    assert!(gen.status.success());
    let csv = write(&dir, "fleet.csv", &stdout(&gen));
    let idx = build(&dir, &csv, &["--period", "16", "--block", "4"]);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut nonempty = 0;
    for n in 0..80 {
        let region = {
            let (x, y) = (rng.gen_range(0..128), rng.gen_range(0..128));
            format!("{x},{y},{},{}", x + rng.gen_range(0..40), y + rng.gen_range(0..40))
        };
        let id = rng.gen_range(1..=12).to_string();
        let (a, b) = (rng.gen_range(0..340u32), rng.gen_range(0..340u32));
        let (from, to) = (a.min(b).to_string(), a.max(b).to_string());
        let args: Vec<&str> = match n % 4 {
            0 => vec!["search-object", "--id", &id, "--t", &from],
            1 => vec!["trajectory", "--id", &id, "--from", &from, "--to", &to],
            2 => vec!["time-slice", "--region", &region, "--t", &from],
            _ => vec!["time-interval", "--region", &region, "--from", &from, "--to", &to],
        };
        let mut via_index = vec!["query", s(&idx)];
        via_index.extend(&args);
        let mut via_oracle = vec!["query", s(&csv), "--oracle"];
        via_oracle.extend(&args);
        let (a, b) = (rct(&via_index), rct(&via_oracle));
        assert!(a.status.success() && b.status.success(), "{args:?}: {}{}", stderr(&a), stderr(&b));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        if !a.stdout.is_empty() {
            nonempty += 1;
        }
    }
    assert!(nonempty > 20);
}

#[test]
fn gen_is_deterministic_and_validated() {
    let args = ["gen", "--objects", "5", "--steps", "50", "--seed", "9"];
    let (a, b) = (rct(&args), rct(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, rct(&["gen", "--objects", "5", "--steps", "50", "--seed", "10"]).stdout);
    assert_eq!(stdout(&a).lines().count(), 1 + 5 * 51);

    assert_eq!(rct(&["gen", "--mutation-rate", "2"]).status.code(), Some(1));
    assert_eq!(rct(&["gen", "--routes", "0"]).status.code(), Some(1));
}

#[test]
fn bench_and_stats() {
    let dir = TempDir::new().unwrap();
    let gen = rct(&["gen", "--objects", "6", "--steps", "100", "--grid", "64"]);
    let csv = write(&dir, "f.csv", &stdout(&gen));
    let idx = build(&dir, &csv, &[]);

    let o = rct(&["bench", s(&idx), "--queries", "0"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3);
    assert!(out.lines().all(|l| l.contains("count=0")));

    let o = rct(&["bench", s(&idx), "--queries", "50", "--workload", "interval"]);
    assert!(o.status.success());
    let line = stdout(&o);
    for key in ["interval", "count=50", "p50_us=", "p95_us=", "max_us="] {
        assert!(line.contains(key), "{line}");
    }
    assert_eq!(rct(&["bench", s(&idx), "--workload", "nope"]).status.code(), Some(1));

    let o = rct(&["stats", s(&idx)]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("objects=6 movements=600 "));
}
