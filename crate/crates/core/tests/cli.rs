use std::fs;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kappa-psi")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn corr_examples() {
    let o = bin(&["corr", "--g", "1", "--kappas", "1:1", "--taus", "0", "--engine", "all"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1/24\n1/24\n1/24\n1/24\n");
    let o = bin(&["corr", "--g", "0", "--kappas", "-", "--taus", "0,0,0", "--engine", "INVERTED"]);
    assert_eq!(stdout(&o), "1\n");
    let o = bin(&["corr", "--g", "1", "--kappas", "-", "--taus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("genus"), "{}", stderr(&o));
    let o = bin(&["corr", "--g", "2", "--kappas", "1:1,2:1", "--taus", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["agree"], true);
    assert_eq!(v["values"].as_object().unwrap().len(), 3);
}

#[test]
fn usage_errors_exit_one() {
    for args in [&["corr"][..], &["corr", "--g", "1", "--taus", "a"], &["volume", "--g", "1", "--n", "1", "--format", "xml"]] {
        let o = bin(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn output_is_byte_stable() {
    let args = ["verify", "--suite", "propositions", "--trials", "30", "--seed", "5", "--format", "tsv"];
    let a = bin(&args);
    let b = bin(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("name\tparams\tstatus\tchecked\tskipped_bounds\tskipped_genus\n"));
    assert_eq!(text.lines().count(), 4);
    let v1 = bin(&["volume", "--g", "1", "--n", "2", "--format", "json"]);
    let v2 = bin(&["volume", "--g", "1", "--n", "2", "--format", "json"]);
    assert_eq!(v1.stdout, v2.stdout);
}

#[test]
fn cache_round_trip_gains_hits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("memo.txt");
    let p = path.to_str().unwrap();
    let args = ["--cache", p, "--stats", "corr", "--g", "2", "--kappas", "1:2", "--taus", "3,0"];
    let first = bin(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let saved = fs::read_to_string(&path).unwrap();
    assert!(saved.starts_with("kappa-psi-cache v1\n"));
    let second = bin(&args);
    assert_eq!(first.stdout, second.stdout);
    let stat = |o: &Output, name: &str| -> f64 {
        let s = stderr(o);
        let field = s.split_whitespace().find(|w| w.starts_with(name)).unwrap();
        field[name.len()..].parse().unwrap()
    };
    let rate = |o: &Output| stat(o, "hits=") / (stat(o, "hits=") + stat(o, "misses="));
    // a warm start answers every lookup from the file
    assert!(stat(&first, "misses=") > 0.0);
    assert_eq!(stat(&second, "misses="), 0.0, "{}", stderr(&second));
    assert!(rate(&second) > rate(&first));
    // saving again is idempotent
    assert_eq!(fs::read_to_string(&path).unwrap(), saved);
}

#[test]
fn corrupt_cache_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "kappa-psi-cache v1\ng=1;k=-;t=1;v=2/4\n").unwrap();
    let o = bin(&["--cache", path.to_str().unwrap(), "corr", "--g", "0", "--taus", "0,0,0"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    fs::write(&path, "not a cache\n").unwrap();
    let o = bin(&["--cache", path.to_str().unwrap(), "beta", "--max", "3"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn tables_and_verify() {
    let o = bin(&["volume", "--g", "0", "--n", "4"]);
    assert_eq!(stdout(&o), "2 * pi^2\n1/2 * L4^2\n1/2 * L3^2\n1/2 * L2^2\n1/2 * L1^2\n");
    let o = bin(&["alpha", "--max-weight", "15"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("# 684 entries, all positive\n"));
    let o = bin(&["verify", "--suite", "virasoro", "--t-max", "5", "--s-max", "3", "--degree-max", "5", "--g-max", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for line in stdout(&o).lines() {
        assert!(line.starts_with("CHECK ") && line.contains(" PASS checked="), "{line}");
    }
}
