use std::path::Path;
use std::process::{Command, Output};

use bexdep::sim::planted_functional;
use serde_json::Value;

fn bexdep(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bexdep")).current_dir(dir).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn column_csv(name: &str, v: impl Iterator<Item = f64>) -> String {
    let mut s = format!("{name}\n");
    for x in v {
        s += &format!("{x}\n");
    }
    s
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

#[test]
fn identical_samples_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let body = column_csv("v", (0..200).map(|i| ((i * 37) % 200) as f64));
    write(d, "x.csv", &body);
    write(d, "y.csv", &body);
    for method in ["multifit", "beret", "bet"] {
        let v = json(&bexdep(d, &["test", "x.csv", "y.csv", "--method", method]));
        assert_eq!(v["rejected"], true, "{method}");
        assert_eq!(v["method"], method);
        assert!(v["global_p"].as_f64().unwrap() < 1e-6);
        assert!(v.get("wall_time_ms").is_none());
    }
}

#[test]
fn malformed_row_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "x.csv", "a,b\n1,2\n3,4\n5\n");
    write(d, "y.csv", "a\n1\n2\n3\n");
    let out = bexdep(d, &["test", "x.csv", "y.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));

    write(d, "x.csv", "a\n1\nzz\n3\n");
    let out = bexdep(d, &["test", "x.csv", "y.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3") && stderr(&out).contains("zz"), "{}", stderr(&out));
}

#[test]
fn bad_arguments_exit_with_input_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "x.csv", &column_csv("a", (0..20).map(f64::from)));
    write(d, "x2.csv", "a,b\n1,2\n2,1\n3,3\n4,5\n");
    write(d, "y2.csv", "c\n1\n2\n3\n4\n");
    write(d, "bad.conf", "alpha = 0.1\nwidth = 3\n");

    let unknown_scenario = bexdep(d, &["simulate", "--scenario", "spiral", "--out", "o"]);
    assert_eq!(unknown_scenario.status.code(), Some(2));
    assert!(stderr(&unknown_scenario).contains("spiral"));

    let unknown_key = bexdep(d, &["test", "x.csv", "x.csv", "--config", "bad.conf"]);
    assert_eq!(unknown_key.status.code(), Some(2));
    assert!(stderr(&unknown_key).contains("line 2"), "{}", stderr(&unknown_key));

    let bet = bexdep(d, &["test", "x2.csv", "y2.csv", "--method", "bet"]);
    assert_eq!(bet.status.code(), Some(2));

    assert_eq!(bexdep(d, &["test", "x.csv", "x.csv", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(bexdep(d, &["test", "missing.csv", "x.csv"]).status.code(), Some(2));
    assert_eq!(bexdep(d, &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let v =
        json(&bexdep(d, &["simulate", "--scenario", "null", "--reps", "40", "--n", "64", "--seed", "5", "--out", "o"]));
    let files: Vec<&str> = v["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert_eq!(files, ["power_multifit_marginal.csv", "power_beret_marginal.csv"]);
    for f in files {
        let body = std::fs::read_to_string(d.join("o").join(f)).unwrap();
        let rows: Vec<&str> = body.lines().skip(1).collect();
        assert_eq!(rows.len(), 20);
        for row in rows {
            let power: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
            // 40 null replicates at alpha 0.05: 9 rejections is far in the tail
            assert!(power <= 0.225, "{f}: {row}");
        }
    }
}

#[test]
fn klproject_reports_energy_and_rank() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let grid: Vec<f64> = (0..21).map(|i| i as f64 / 20.0).collect();
    let mut rank2 = grid.iter().map(f64::to_string).collect::<Vec<_>>().join(",") + "\n";
    let mut flat = rank2.clone();
    for i in 0..30 {
        let (a, b) = ((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos());
        let row: Vec<String> = grid.iter().map(|t| (a * t + b * t * t).to_string()).collect();
        rank2 += &(row.join(",") + "\n");
        flat += &(vec!["2.5"; grid.len()].join(",") + "\n");
    }
    write(d, "rank2.csv", &rank2);
    write(d, "flat.csv", &flat);

    let v = json(&bexdep(d, &["klproject", "rank2.csv", "--k", "2", "--out", "z.csv"]));
    assert_eq!(v["rank"], 2);
    assert!((v["energy_fraction"].as_f64().unwrap() - 1.0).abs() <= 1e-8);
    let scores = std::fs::read_to_string(d.join("z.csv")).unwrap();
    assert!(scores.starts_with("Z1,Z2\n"));
    assert_eq!(scores.lines().count(), 31);

    let too_many = bexdep(d, &["klproject", "rank2.csv", "--k", "3", "--out", "z.csv"]);
    assert_eq!(too_many.status.code(), Some(2));
    assert!(stderr(&too_many).contains("rank 2"), "{}", stderr(&too_many));

    let constant = bexdep(d, &["klproject", "flat.csv", "--out", "z.csv"]);
    assert_eq!(constant.status.code(), Some(2));
    assert!(stderr(&constant).contains("zero variance"), "{}", stderr(&constant));
}

#[test]
fn functional_test_matches_projected_scores() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (cs, y) = planted_functional(150, 31, Some(1), 41).unwrap();
    let mut curves = Vec::new();
    bexdep::io::write_curves(&cs, &mut curves).unwrap();
    std::fs::write(d.join("curves.csv"), curves).unwrap();
    write(d, "y.csv", &column_csv("y", y.iter().copied()));

    json(&bexdep(d, &["klproject", "curves.csv", "--k", "2", "--out", "z.csv"]));
    let direct = json(&bexdep(d, &["test", "curves.csv", "y.csv", "--functional-x", "--k", "2"]));
    let staged = json(&bexdep(d, &["test", "z.csv", "y.csv"]));
    let (a, b) = (direct["global_p"].as_f64().unwrap(), staged["global_p"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    assert_eq!(direct["kl"]["x"]["k"], 2);
    assert_eq!(direct["rejected"], true);
}
