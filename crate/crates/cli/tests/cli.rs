use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_platonic-dd"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn pulse_lines(o: &Output) -> usize {
    stdout(o).lines().filter(|l| !l.starts_with('#')).count()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("platonic-dd-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

const SMALL_SCAN: &str =
    "family = gue\nspins = 1\naxis = tau_norm log 1e-3 1e-2 4\nsequences = nodd, tedd\nsamples = 10\n";

#[test]
fn sequence_word_and_pulses() {
    let o = run(&["sequence", "--group", "tedd", "--format", "word"]);
    assert!(o.status.success());
    let w = stdout(&o);
    assert_eq!(w.trim().len(), 24);
    assert!(w.trim().chars().all(|c| c == 'a' || c == 'b'));

    let o = run(&["sequence", "--group", "edd", "--format", "pulses", "--tau0", "1e-6"]);
    assert!(o.status.success());
    assert_eq!(pulse_lines(&o), 8);
    assert!(stdout(&o).lines().filter(|l| !l.starts_with('#')).all(|l| l.starts_with("0.000001 ")));

    assert_eq!(pulse_lines(&run(&["sequence", "--group", "tedd", "--tt-dagger"])), 48);

    let o = run(&["sequence", "--group", "tedd", "--reference"]);
    assert_eq!(stdout(&o).trim(), "abaababbbaababbbaababbaa");

    let o = run(&["sequence", "--group", "oedd", "--dcg"]);
    let w = stdout(&o);
    assert_eq!(w.trim().len(), 72);
    assert!(w.trim().ends_with('e'));
}

#[test]
fn sequence_errors() {
    assert_eq!(run(&["sequence", "--group", "pedd"]).status.code(), Some(2));
    assert_eq!(run(&["sequence", "--group", "tedd", "--tau0", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["sequence", "--group", "tedd", "--tt-dagger", "--format", "word"]).status.code(), Some(2));
    let o = run(&["sequence", "--group", "tedd", "--out", "/nonexistent-dir/seq.txt"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sequence_written_to_file_runs_in_a_scan() {
    let d = scratch("custom");
    let seq = d.join("mine.seq");
    let o = run(&["sequence", "--group", "tedd", "--format", "pulses", "--out", seq.to_str().unwrap()]);
    assert!(o.status.success());
    let conf = d.join("scan.conf");
    std::fs::write(&conf, SMALL_SCAN.replace("nodd, tedd", "tedd, file:mine.seq")).unwrap();
    let o = run(&["scan", conf.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    let dist = |name: &str| -> Vec<String> {
        csv.lines()
            .filter(|l| l.split(',').nth(1) == Some(name))
            .map(|l| l.split(',').nth(2).unwrap().to_string())
            .collect()
    };
    // same pulses and spacing, so the same distances
    assert_eq!(dist("tedd"), dist("mine"));
    assert_eq!(dist("tedd").len(), 4);
}

#[test]
fn verify_multipole_ranks() {
    let o = run(&["verify", "--group", "tedd", "--lmax", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("decoupled"));
    let o = run(&["verify", "--group", "tedd", "--lmax", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("L=3 invariant dimension 1"));
    assert_eq!(run(&["verify", "--group", "iedd", "--lmax", "5"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--group", "iedd", "--lmax", "6"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--group", "iedd"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--group", "q", "--lmax", "1"]).status.code(), Some(2));
}

#[test]
fn verify_hamiltonian_files() {
    let dip = example("dipolar_pair.ham");
    let iso = example("heisenberg_pair.ham");
    assert_eq!(run(&["verify", "--group", "oedd", "--hamiltonian", dip.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--group", "tedd", "--hamiltonian", dip.to_str().unwrap()]).status.code(), Some(0));
    // D2 keeps rank-2 invariants
    assert_eq!(run(&["verify", "--group", "edd", "--hamiltonian", dip.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--group", "oedd", "--hamiltonian", iso.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--group", "oedd", "--hamiltonian", "/nonexistent.ham"]).status.code(), Some(3));
    let d = scratch("badham");
    let bad = d.join("bad.ham");
    std::fs::write(&bad, "spins = 1/2\n[term]\nsites = 0 1\ntensor = 1 2\n").unwrap();
    assert_eq!(run(&["verify", "--group", "oedd", "--hamiltonian", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn detect_reports() {
    let o = run(&["detect", example("jz.op").to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("C-inf about (0,0,1)"));

    let o = run(&["detect", example("octahedral.op").to_str().unwrap()]);
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("O"));
    assert_eq!(out.lines().filter(|l| l.starts_with("axis C4")).count(), 3);
    assert!(out.contains("L=4 stars"));

    let o = run(&["detect", example("identity.op").to_str().unwrap()]);
    assert_eq!(stdout(&o).lines().next(), Some("SO(3) (identity multiple)"));

    let d = scratch("detect");
    let bad = d.join("bad.op");
    std::fs::write(&bad, "dim 2\n1,0 0,0\n").unwrap();
    assert_eq!(run(&["detect", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["detect", "/nonexistent.op"]).status.code(), Some(3));
}

#[test]
fn detect_two_spin_operator() {
    let d = scratch("twospin");
    let f = d.join("zz.op");
    // σz⊗σz: a C-inf axis along z with a perpendicular C2
    std::fs::write(&f, "dim 4\n1,0 0,0 0,0 0,0\n0,0 -1,0 0,0 0,0\n0,0 0,0 -1,0 0,0\n0,0 0,0 0,0 1,0\n").unwrap();
    let o = run(&["detect", f.to_str().unwrap(), "--spins", "1/2,1/2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().next(), Some("D-inf about (0,0,1)"));
}

#[test]
fn scan_is_reproducible_and_fits() {
    let d = scratch("scan");
    let conf = d.join("s.conf");
    std::fs::write(&conf, SMALL_SCAN).unwrap();
    let c = conf.to_str().unwrap();
    let a = run(&["scan", c, "--seed", "7"]);
    let b = bin().args(["scan", c, "--seed", "7"]).env("DD_THREADS", "3").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, run(&["scan", c, "--seed", "8"]).stdout);

    let out = d.join("out.csv");
    let o = run(&["scan", c, "--fit", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("tau_norm,sequence,mean_distance,stddev,samples,seed\n"));
    assert_eq!(csv.lines().filter(|l| l.starts_with("#fit,tau_norm,,")).count(), 2);
}

#[test]
fn scan_errors() {
    let d = scratch("scanerr");
    let conf = d.join("bad.conf");
    std::fs::write(&conf, "family = gue\nspins = 1\nsequences = xedd\n").unwrap();
    assert_eq!(run(&["scan", conf.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&conf, SMALL_SCAN).unwrap();
    let o = bin().args(["scan", conf.to_str().unwrap()]).env("DD_THREADS", "many").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["scan", "/nonexistent.conf"]).status.code(), Some(3));
}

#[test]
fn recipes_parse() {
    for entry in std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "conf") {
            let text = std::fs::read_to_string(&p).unwrap();
            platonic_dd::io::parse_scan_config(&text, p.parent().unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        }
    }
}
