use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn rtnc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtnc")).args(args).output().expect("spawn rtnc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("rtnc-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn decompose_star() {
    let o = rtnc(&["decompose", "--graph", &data("star.txt")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "block 0 type linestar edges 0,1,2\n");
}

#[test]
fn decompose_unicast_session() {
    let o = rtnc(&["decompose", "--graph", &data("unicast.txt"), "--session", "unicast"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 5, "{s}");
    assert!(s.lines().all(|l| l.contains("type line ")), "{s}");
}

#[test]
fn mincut_star() {
    let o = rtnc(&["mincut", "--graph", &data("star.txt")]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("pair 1 2 1\n"));
    assert!(s.contains("rest 3 1\n"));
    assert!(s.ends_with("h 1\n"));
}

#[test]
fn mincut_two_sources() {
    let o = rtnc(&["mincut", "--graph", &data("line3.txt")]);
    assert_eq!(stdout(&o), "pair 1 3 1\n");
}

#[test]
fn transform_writes_file() {
    let dir = scratch("transform");
    let o = rtnc(&["transform", "--graph", &data("star.txt"), "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.join("wired.txt")).unwrap();
    assert!(!text.is_empty());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sources_override() {
    let o = rtnc(&["mincut", "--graph", &data("line3.txt"), "--sources", "1,2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "pair 1 2 1\n");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&rtnc(&["bogus"])), 1);
    assert_eq!(code(&rtnc(&["mincut"])), 1);
    assert_eq!(code(&rtnc(&["mincut", "--graph", "/nonexistent/graph.txt"])), 1);
    let sync = rtnc(&["simulate", "--graph", &data("star.txt"), "--mode", "sync", "--delay-bound", "2"]);
    assert_eq!(code(&sync), 1);
    assert_eq!(code(&rtnc(&["--help"])), 0);
}

#[test]
fn malformed_graph_exit_1_with_line() {
    let dir = scratch("malformed");
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.txt");
    std::fs::write(&f, "nodes 3 sources 1,2,3 capacity 8\nedge 1 9\n").unwrap();
    let o = rtnc(&["mincut", "--graph", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"), "{:?}", o.stderr);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn infeasible_exit_2() {
    let o = rtnc(&["simulate", "--graph", &data("disconnected.txt")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_outputs_and_determinism() {
    let args = ["simulate", "--graph", &data("ring_plus_star.txt"), "--seed", "7", "--delay-bound", "3"];
    let a = rtnc(&args);
    let b = rtnc(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let dir = scratch("simulate");
    let mut with_out = args.to_vec();
    let d = dir.to_str().unwrap().to_string();
    with_out.extend(["--out", &d]);
    assert_eq!(code(&rtnc(&with_out)), 0);
    let trace = std::fs::read(dir.join("trace.txt")).unwrap();
    assert_eq!(trace, a.stdout);
    let counters = std::fs::read_to_string(dir.join("counters.csv")).unwrap();
    assert!(counters.starts_with("n,p,seed,metric,value,exact_flag\n"));
    assert!(counters.contains(",rt_ok,1,"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sync_line_trace() {
    let o = rtnc(&["simulate", "--graph", &data("line3.txt"), "--mode", "sync", "--horizon", "20"]);
    assert_eq!(code(&o), 0);
    assert!(!o.stdout.is_empty());
}

#[test]
fn experiment_outputs_and_determinism() {
    let run = |tag: &str| {
        let dir = scratch(tag);
        let o = rtnc(&[
            "experiment", "--session", "unicast", "--sizes", "8,16", "--graphs", "3", "--seed", "5", "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let csv = std::fs::read(dir.join("experiment.csv")).unwrap();
        assert!(dir.join("averages.dat").exists());
        assert!(dir.join("meta.txt").exists());
        let _ = std::fs::remove_dir_all(&dir);
        csv
    };
    let a = run("exp-a");
    let b = run("exp-b");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,p,seed,metric,value,exact_flag"));
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 6, "{l}");
        assert!(f[5] == "exact" || f[5] == "heuristic", "{l}");
    }
}
