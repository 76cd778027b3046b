use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_conhalving")).current_dir(dir).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const UNIFORM: &str = "conhalving-instance 1\ndomain 0 1\nbound 1\nagent 0 1 | 1\n";

#[test]
fn constant_gate_encodes_to_two_agents() {
    let dir = TempDir::new().unwrap();
    file(&dir, "c.txt", "nodes 1\nconst - - 0 0.5\n");
    let r = run(dir.path(), &["encode", "--circuit", "c.txt", "--eps", "1/5", "-o", "c.inst"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("agents 2"));
    assert!(r.stdout.contains("domain [0/1, 6/1]"));
}

#[test]
fn constant_gate_pipeline_decodes_near_one_half() {
    let dir = TempDir::new().unwrap();
    file(&dir, "c.txt", "nodes 1\nconst - - 0 1/2\n");
    assert_eq!(run(dir.path(), &["encode", "--circuit", "c.txt", "--eps", "0.2", "-o", "c.inst"]).code, 0);
    let r = run(dir.path(), &["solve", "c.inst", "-o", "c.part"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("cuts 2"));
    assert_eq!(run(dir.path(), &["verify", "c.inst", "c.part"]).code, 0);
    let r = run(dir.path(), &["decode", "c.inst", "c.part"]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    let x: f64 = r.stdout.lines().find_map(|l| l.strip_prefix("x0 ")).unwrap().split("(~").nth(1).unwrap().trim_end_matches(')').parse().unwrap();
    assert!((x - 0.5).abs() <= 0.2, "{x}");
}

#[test]
fn partition_on_stdout_is_a_valid_file() {
    let dir = TempDir::new().unwrap();
    file(&dir, "u.inst", UNIFORM);
    let r = run(dir.path(), &["solve", "u.inst", "--eps", "0.1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    file(&dir, "u.part", &r.stdout);
    let v = run(dir.path(), &["verify", "u.inst", "u.part", "--eps", "0.1"]);
    assert_eq!(v.code, 0, "{}", v.stdout);
}

#[test]
fn walk_writes_trace_and_plot() {
    let dir = TempDir::new().unwrap();
    file(&dir, "u.inst", UNIFORM);
    let r = run(dir.path(), &["solve", "u.inst", "--eps", "0.1", "--strategy", "walk", "--trace", "t.txt", "--plot", "p.txt", "-o", "u.part"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("walk length"));
    let trace = std::fs::read_to_string(dir.path().join("t.txt")).unwrap();
    assert!(trace.starts_with("conhalving-trace 1\nstep 0 kind alternating"));
    let plot = std::fs::read_to_string(dir.path().join("p.txt")).unwrap();
    assert!(plot.contains("density 0 0 1 1"));
    assert_eq!(plot.lines().filter(|l| l.starts_with("cut ")).count(), 1);
}

#[test]
fn oracle_without_cuts_is_not_found() {
    let dir = TempDir::new().unwrap();
    file(&dir, "u.inst", UNIFORM);
    let r = run(dir.path(), &["solve", "u.inst", "--eps", "0.4", "--strategy", "oracle", "--cuts", "0", "--grid", "10"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.starts_with("NOT_FOUND"));
    let r = run(dir.path(), &["solve", "u.inst", "--eps", "0.4", "--strategy", "oracle", "--cuts", "1", "--grid", "10"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn verify_names_worst_agent() {
    let dir = TempDir::new().unwrap();
    file(&dir, "i.inst", "conhalving-instance 1\ndomain 0 1\nbound 2\nagent 0 1 | 1\nagent 0 1/2 1 | 2 0\n");
    file(&dir, "p.part", "conhalving-partition 1\nleftmost +\ncuts 1/2\n");
    let ok = run(dir.path(), &["verify", "i.inst", "p.part", "--eps", "1"]);
    assert_eq!(ok.code, 0);
    let bad = run(dir.path(), &["verify", "i.inst", "p.part", "--eps", "1/10"]);
    assert_eq!(bad.code, 1);
    assert!(bad.stdout.contains("FAIL: agent 1 has discrepancy 1/1"), "{}", bad.stdout);
}

#[test]
fn cross_version_file_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    file(&dir, "u.inst", UNIFORM);
    file(&dir, "p.part", "conhalving-partition 2\nleftmost +\ncuts 1/2\n");
    let r = run(dir.path(), &["verify", "u.inst", "p.part", "--eps", "0.1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 1") && r.stderr.contains("version"), "{}", r.stderr);
    file(&dir, "v.inst", &UNIFORM.replace("instance 1", "instance 0"));
    assert_eq!(run(dir.path(), &["solve", "v.inst", "--eps", "0.1"]).code, 2);
}

#[test]
fn malformed_gate_arity_names_the_gate() {
    let dir = TempDir::new().unwrap();
    file(&dir, "c.txt", "nodes 3\nconst - - 0 1/2\nadd 0 - 2 -\n");
    let r = run(dir.path(), &["encode", "--circuit", "c.txt", "--eps", "0.2"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 3") && r.stderr.contains("gate 'add'"), "{}", r.stderr);
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(dir.path(), &["solve"]).code, 2);
    assert_eq!(run(dir.path(), &["frobnicate"]).code, 2);
    file(&dir, "u.inst", UNIFORM);
    assert_eq!(run(dir.path(), &["solve", "u.inst"]).code, 2, "eps is required without meta");
    assert_eq!(run(dir.path(), &["solve", "u.inst", "--eps", "0", "--grid", "4"]).code, 2);
}

#[test]
fn single_clause_cnf_pipeline() {
    let dir = TempDir::new().unwrap();
    file(&dir, "f.cnf", "c one clause\np cnf 1 1\n1 0\n");
    let r = run(dir.path(), &["encode", "--cnf", "f.cnf", "--eps", "1/10", "-o", "f.inst"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("cut budget"));
    // A partition with the wrong cut count cannot be decoded.
    file(&dir, "bad.part", "conhalving-partition 1\nleftmost +\ncuts 1\n");
    let d = run(dir.path(), &["decode", "f.inst", "bad.part"]);
    assert_eq!(d.code, 1);
    assert!(d.stdout.starts_with("DECODE_FAIL") && d.stdout.contains("block"), "{}", d.stdout);
}

#[test]
fn satisfiable_cnf_witness_decodes_to_its_assignment() {
    use conhalving_cli::formats::{parse_instance, write_partition, Meta};
    let dir = TempDir::new().unwrap();
    file(&dir, "f.cnf", "p cnf 2 2\n1 -2 0\n2 0\n");
    assert_eq!(run(dir.path(), &["encode", "--cnf", "f.cnf", "--eps", "1/10", "-o", "f.inst"]).code, 0);
    let parsed = parse_instance(&std::fs::read_to_string(dir.path().join("f.inst")).unwrap()).unwrap();
    let Some(Meta::Sat { formula, eps, eps_prime }) = parsed.meta else { panic!("sat meta expected") };
    let red = conhalving::sat::encode_sat(&formula, &eps, &eps_prime).unwrap();
    let p = conhalving::sat::witness_partition(&red, &[true, true]).unwrap();
    file(&dir, "w.part", &write_partition(&p));
    let v = run(dir.path(), &["verify", "f.inst", "w.part"]);
    assert_eq!(v.code, 0, "{}", v.stdout);
    assert!(v.stdout.contains(&format!("cuts {}", red.cut_budget())));
    let d = run(dir.path(), &["decode", "f.inst", "w.part"]);
    assert_eq!(d.code, 0, "{}", d.stdout);
    assert!(d.stdout.contains("x1 true\nx2 true\nOK"), "{}", d.stdout);
}
