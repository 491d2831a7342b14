use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jobshop")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const T1: &str = "# instance t1\n2 2\n0 3 1 2\n1 2 0 4\n";

#[test]
fn solve_and_exact_on_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t1.txt");
    fs::write(&path, T1).unwrap();
    let p = path.to_str().unwrap();
    for rule in ["spt", "mwr", "mor", "sb", "dd"] {
        let text = stdout(&run(&["solve", p, "--rule", rule, "--refine"]));
        assert!(text.contains("makespan 7"), "{rule}: {text}");
    }
    for method in ["full", "bnb", "astar"] {
        assert!(stdout(&run(&["exact", p, "--method", method])).contains("optimum 7"));
    }
}

#[test]
fn gen_then_bench_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout(&run(&["gen", "--jobs", "3", "--machines", "3", "--count", "2", "--out", d]));
    let a = dir.path().join("rand3x3_s0.txt");
    let b = dir.path().join("rand3x3_s1.txt");
    let text = stdout(&run(&[
        "bench",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--rule",
        "spt,mor",
        "--optima",
        "exact",
        "--format",
        "csv",
        "--workers",
        "2",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("rand3x3_s0,SPT,"));
    assert!(lines[4].starts_with("rand3x3_s1,MOR,"));
}

#[test]
fn export_writes_lp_and_start_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t1.txt");
    fs::write(&path, T1).unwrap();
    let prefix = dir.path().join("t1model");
    stdout(&run(&["export", path.to_str().unwrap(), "--start", "--rule", "mor", "--out", prefix.to_str().unwrap()]));
    let lp = fs::read_to_string(prefix.with_extension("lp")).unwrap();
    assert!(lp.contains("Binaries\n x_0_0_1_1\n x_0_1_1_0\nEnd\n"));
    let start = fs::read_to_string(prefix.with_extension("start")).unwrap();
    assert!(start.starts_with("# name value\n"));
    assert!(start.ends_with("Cmax 7\n"));
}

#[test]
fn errors_exit_nonzero() {
    assert!(!run(&["solve", "/no/such/file.txt"]).status.success());
    assert!(!run(&["bench", "--rule", "spt"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2 2\n0 3 1\n").unwrap();
    let out = run(&["solve", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}
