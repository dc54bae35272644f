use std::path::PathBuf;
use std::process::{Command, Output};

use boxcalc_cli::grid::GridTable;
use serde_json::Value;

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Scratch {
        let dir = std::env::temp_dir().join(format!("boxcalc-cli-{}-{name}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, contents).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

const A2: &str = r#"{"dim": 2, "X": [[1,0],[0,1],[1,1]]}"#;
const E2: &str = r#"{"dim": 2, "X": [[1,0],[0,1]], "labels": ["e1","e2"]}"#;
const OMEGA: &str = r#"{"dim": 1, "X": [[1]]}"#;
const TWO_OMEGA: &str = r#"{"dim": 1, "X": [[2]]}"#;
const OMEGA3: &str = r#"{"dim": 1, "X": [[1],[1],[1]]}"#;

fn boxcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boxcalc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn describe_text_and_json() {
    let dir = Scratch::new("describe");
    let a2 = dir.file("a2.json", A2);
    let o = boxcalc(&["describe", s(&a2)]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("N = 3, n = 2"));
    assert!(text.contains("admissible hyperplanes: 3"));
    assert!(text.contains("zonotope volume: 3"));
    assert!(text.contains("dim D(X): 3"));

    let e2 = dir.file("e2.json", E2);
    let o = boxcalc(&["describe", s(&e2), "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["vectors"], 2);
    assert_eq!(v["bases"], 1);
    assert_eq!(v["zonotope_volume"], "1");
    assert_eq!(v["hyperplanes"].as_array().unwrap().len(), 2);
    let cocircuits = v["cocircuits"].to_string();
    assert!(cocircuits.contains("e1") && cocircuits.contains("e2"));
}

#[test]
fn bad_configs_exit_two() {
    let dir = Scratch::new("badconfig");
    let single = dir.file("single.json", r#"{"dim": 2, "X": [[1,0]]}"#);
    let o = boxcalc(&["describe", s(&single)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).to_lowercase().contains("span"), "{}", stderr(&o));

    let flat = dir.file("flat.json", r#"{"dim": 2, "X": [[1,0],[2,0]]}"#);
    let o = boxcalc(&["describe", s(&flat)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("error:"));

    let broken = dir.file("broken.json", "{\"dim\": 2,\n \"X\": [[1,0],[0]]}");
    let o = boxcalc(&["describe", s(&broken)]);
    assert_eq!(code(&o), 2);

    let unknown = dir.file("unknown.json", r#"{"dim": 1, "X": [[1]], "extra": 3}"#);
    assert_eq!(code(&boxcalc(&["describe", s(&unknown)])), 2);

    let o = boxcalc(&["describe", s(&dir.path("missing.json"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn evaluation_commands() {
    let dir = Scratch::new("eval");
    let a2 = dir.file("a2.json", A2);
    let omega = dir.file("omega.json", OMEGA);
    let two = dir.file("two.json", TWO_OMEGA);

    let o = boxcalc(&["eval-box", s(&a2), "--point", "1/2,1/3"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "1/3"));
    let o = boxcalc(&["eval-box", s(&a2), "--point", "0.5,0.25", "--subset", "0,1"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "1"));
    assert_eq!(code(&boxcalc(&["eval-box", s(&a2), "--point", "1/2"])), 2);
    assert_eq!(code(&boxcalc(&["eval-box", s(&a2), "--point", "1/2,1/3", "--subset", "7"])), 2);

    // W for one vector is the sawtooth 1/2 - {t}
    let o = boxcalc(&["eval-w", s(&omega), "--point", "3/10"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "1/5"));
    let o = boxcalc(&["eval-w", s(&omega), "--point", "13/10"]);
    assert_eq!(stdout(&o).trim(), "1/5");
    assert_eq!(code(&boxcalc(&["eval-w", s(&omega), "--point", "1"])), 2);
    assert_eq!(code(&boxcalc(&["eval-w", s(&omega)])), 2);
    let o = boxcalc(&["eval-w", s(&omega), "--closed-form"]);
    assert_eq!(code(&o), 0);
    assert!(!stdout(&o).trim().is_empty());

    let o = boxcalc(&["dm-basis", s(&a2)]);
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), vec!["1", "v1", "v2"]);

    let o = boxcalc(&["toric-vertices", s(&two)]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("g = (1/2)"));
}

fn report(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_theorem1_and_dm_corollary() {
    let dir = Scratch::new("verify");
    let a2 = dir.file("a2.json", A2);
    let out = dir.path("t1.json");
    let o = boxcalc(&["verify", "theorem1", s(&a2), "--poly", "v1^2", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("seed: 1009"));
    let r = report(&out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["points"].as_array().unwrap().len(), 20);
    for p in r["points"].as_array().unwrap() {
        assert_eq!(p["pass"], true);
        assert_eq!(p["difference"], p["rhs_total"]);
    }

    // same seed, same report
    let again = dir.path("t1b.json");
    boxcalc(&["verify", "theorem1", s(&a2), "--poly", "v1^2", "--out", s(&again)]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
    let other = dir.path("t1c.json");
    boxcalc(&["verify", "theorem1", s(&a2), "--poly", "v1^2", "--seed", "7", "--out", s(&other)]);
    assert_ne!(std::fs::read(&out).unwrap(), std::fs::read(&other).unwrap());

    let dm = dir.path("dm.json");
    let o = boxcalc(&["verify", "dm-corollary", s(&a2), "--points", "5", "--out", s(&dm)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&dm);
    assert_eq!(r["pass"], true);
    // three basis polynomials at five points
    assert_eq!(r["points"].as_array().unwrap().len(), 15);
    let polys: std::collections::BTreeSet<String> =
        r["points"].as_array().unwrap().iter().map(|p| p["polynomial"].to_string()).collect();
    assert_eq!(polys.len(), 3);

    assert_eq!(code(&boxcalc(&["verify", "theorem1", s(&a2)])), 2);
    assert_eq!(code(&boxcalc(&["verify", "theorem1", s(&a2), "--poly", "v3"])), 2);
}

#[test]
fn verify_twisted_and_one_dimensional() {
    let dir = Scratch::new("twisted");
    let two = dir.file("two.json", TWO_OMEGA);
    let omega3 = dir.file("omega3.json", OMEGA3);
    let a2 = dir.file("a2.json", A2);

    let o = boxcalc(&["verify", "twisted-corollary", s(&two), "--g", "1/2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = boxcalc(&["verify", "twisted-corollary", s(&two), "--g", "1/3", "--poly", "1"]);
    assert_eq!(code(&o), 2);

    let o = boxcalc(&["verify", "theorem2-1d", s(&omega3), "--g", "1/3", "--poly", "t^2", "--points", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&boxcalc(&["verify", "theorem2-1d", s(&omega3), "--g", "0", "--poly", "t"])), 2);
    assert_eq!(code(&boxcalc(&["verify", "theorem2-1d", s(&a2), "--g", "1/2,0", "--poly", "v1"])), 2);
}

#[test]
fn verify_at_explicit_points() {
    let dir = Scratch::new("at");
    let a2 = dir.file("a2.json", A2);
    let out = dir.path("at.json");
    let o = boxcalc(&["verify", "theorem1", s(&a2), "--poly", "v1*v2", "--at", "1/3,1/5;-0.25,0.6", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(report(&out)["points"].as_array().unwrap().len(), 2);

    // a point on a hyperplane is reported as a failed check
    let o = boxcalc(&["verify", "theorem1", s(&a2), "--poly", "v1", "--at", "1/2,1/2", "--out", s(&out)]);
    assert_eq!(code(&o), 1);
    let r = report(&out);
    assert_eq!(r["pass"], false);
    assert!(r["points"][0]["error"].is_string());
}

#[test]
fn grids() {
    let dir = Scratch::new("grid");
    let omega = dir.file("omega.json", OMEGA);
    let a2 = dir.file("a2.json", A2);

    let o = boxcalc(&["grid", "box", s(&omega), "--lo", "-0.5", "--hi", "1.5", "--step", "0.5"]);
    assert_eq!(code(&o), 0);
    let t = GridTable::parse_csv(&stdout(&o)).unwrap();
    let values: Vec<f64> = t.rows.iter().map(|r| r.value).collect();
    assert_eq!(values, vec![0.0, 1.0, 0.0]);
    assert_eq!(t.skipped, 2);

    let out = dir.path("w.csv");
    let o = boxcalc(&["grid", "w", s(&omega), "--lo", "1/10", "--hi", "9/10", "--step", "1/5", "--exact", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let t = GridTable::parse_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(t.exact);
    assert_eq!(t.rows.len(), 5);
    for r in &t.rows {
        assert!((r.value - (0.5 - r.point[0])).abs() < 1e-12);
    }
    assert_eq!(t.to_csv(), std::fs::read_to_string(&out).unwrap());

    let grid = |f: &str| {
        let o = boxcalc(&["grid", f, s(&a2), "--lo", "-0.4,0.1", "--hi", "0.6,1.1", "--step", "0.25", "--poly", "v1^2", "--exact"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        GridTable::parse_csv(&stdout(&o)).unwrap()
    };
    let diff = grid("theorem1-diff");
    let rhs = grid("theorem1-rhs");
    assert!(!diff.rows.is_empty());
    assert_eq!(diff.rows, rhs.rows);
    assert!(diff.rows.iter().any(|r| r.exact.as_ref().is_some_and(|x| *x != num::zero())));

    // indicator of [0,1) at step 1/100; the jumps at 0 and 1 are skipped
    let o = boxcalc(&["grid", "box", s(&omega), "--lo", "-1/2", "--hi", "3/2", "--step", "1/100"]);
    let t = GridTable::parse_csv(&stdout(&o)).unwrap();
    assert_eq!((t.rows.len(), t.skipped), (199, 2));
    for r in &t.rows {
        let inside = r.point[0] > 0.0 && r.point[0] < 1.0;
        assert_eq!(r.value, if inside { 1.0 } else { 0.0 });
    }

    // sawtooth 1/2 - t + floor(t) on [0, 2]
    let o = boxcalc(&["grid", "w", s(&omega), "--lo", "0", "--hi", "2", "--step", "1/100", "--exact"]);
    let t = GridTable::parse_csv(&stdout(&o)).unwrap();
    assert_eq!((t.rows.len(), t.skipped), (198, 3));
    for r in &t.rows {
        let x = r.point[0];
        assert!((r.value - (0.5 - x + x.floor())).abs() < 1e-9, "{x}");
    }

    // unit cell, f = v1^2: two runs write equal files and agree with the RHS grid
    let run = |f: &str, name: &str| {
        let out = dir.path(name);
        let o = boxcalc(&["grid", f, s(&a2), "--lo", "0,0", "--hi", "1,1", "--step", "1/8", "--poly", "v1^2", "--exact", "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read_to_string(out).unwrap()
    };
    let first = run("theorem1-diff", "d1.csv");
    assert_eq!(first, run("theorem1-diff", "d2.csv"));
    assert_eq!(first, run("theorem1-rhs", "r.csv"));
    assert_eq!(GridTable::parse_csv(&first).unwrap().to_csv(), first);

    assert_eq!(code(&boxcalc(&["grid", "box", s(&omega), "--lo", "0", "--hi", "1", "--step", "0"])), 2);
    assert_eq!(code(&boxcalc(&["grid", "box", s(&omega), "--lo", "0", "--hi", "1"])), 2);
}
