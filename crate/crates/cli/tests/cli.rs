use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use linsan::formats::{load_joint, parse_mechanism};
use linsan::sweep::{build_mechanism, parse_tsv};
use linsan::{verify_realization, Alpha, DistortionMatrix, Family, LogBase};
use tempfile::TempDir;

const CONDITIONAL: &str = "#P_S\n1,0.3\n2,0.7\n#P_X|S\ns,a,b,c,d\n1,0.2,0.1,0.5,0.2\n2,0.5,0.3,0.1,0.1\n";

fn linsan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linsan")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn field(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}\t")))
        .unwrap_or_else(|| panic!("no `{key}` in report"))
        .to_string()
}

fn num(report: &str, key: &str) -> f64 {
    field(report, key).parse().unwrap()
}

#[test]
fn inspect_worked_example() {
    let dir = TempDir::new().unwrap();
    let cond = write(&dir, "ex.csv", CONDITIONAL);
    let joint = write(
        &dir,
        "joint.csv",
        "s,x,prob\n1,a,0.06\n1,b,0.03\n1,c,0.15\n1,d,0.06\n2,a,0.35\n2,b,0.21\n2,c,0.07\n2,d,0.07\n",
    );
    for path in [&cond, &joint] {
        let out = stdout(&linsan(&["inspect", s(path)]));
        assert!((num(&out, "ldp") - 2.321928).abs() < 1e-6);
        assert!((num(&out, "log_lift") - 1.263034).abs() < 1e-6);
        assert_eq!(field(&out, "log_lift_at"), "y=b,s=1");
        assert_eq!(field(&out, "p_x"), "0.41,0.24,0.22,0.13");
    }
    let nats = stdout(&linsan(&["inspect", s(&cond), "--base", "nats"]));
    assert!((num(&nats, "ldp") - 5f64.ln()).abs() < 1e-8);
}

#[test]
fn inspect_independent_and_records() {
    let dir = TempDir::new().unwrap();
    let ind = write(&dir, "ind.csv", "s,x,prob\nu,a,0.12\nu,b,0.28\nv,a,0.18\nv,b,0.42\n");
    let out = stdout(&linsan(&["inspect", s(&ind)]));
    // Conditionals are recovered by division, so zero holds up to round-off.
    assert!(num(&out, "ldp").abs() < 1e-12);
    assert!(num(&out, "log_lift").abs() < 1e-12);

    let recs = write(&dir, "recs.csv", "s,x\nu,a\nu,b\nv,a\nv,a\n");
    let out = stdout(&linsan(&["inspect", s(&recs)]));
    assert_eq!(field(&out, "p_s"), "0.5,0.5");
    assert_eq!(field(&out, "p_x"), "0.75,0.25");
    assert_eq!(num(&out, "ldp"), f64::INFINITY);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let ex = write(&dir, "ex.csv", CONDITIONAL);
    let bad = write(&dir, "bad.csv", "s,x,prob\n1,a,0.5,9\n");
    let unsure = write(&dir, "unsure.csv", "1,a,0.5\n2,b,0.5\n");
    let short = write(&dir, "short.csv", "s,x,prob\n1,a,0.5\n");
    let code = |args: &[&str]| linsan(args).status.code().unwrap();
    assert_eq!(code(&["inspect", s(&bad)]), 2);
    assert_eq!(code(&["inspect", s(&unsure)]), 2);
    assert_eq!(code(&["inspect", s(&unsure), "--format", "joint"]), 0);
    assert_eq!(code(&["inspect", s(&short)]), 3);
    assert_eq!(code(&["inspect", "/nonexistent/file.csv"]), 2);
    assert_eq!(code(&["inspect"]), 2);
    assert_eq!(code(&["mechanize", s(&ex), "--alpha", "0", "--family", "markov"]), 3);
    assert_eq!(code(&["mechanize", s(&ex), "--alpha", "1.5", "--family", "markov"]), 3);
    assert_eq!(code(&["mechanize", s(&ex), "--alpha", "0.5", "--family", "nonmarkov_distortion"]), 2);
    assert_eq!(code(&["mechanize", s(&ex), "--alpha", "0.5", "--family", "bogus"]), 2);
    assert_eq!(code(&["sweep", s(&ex), "--grid", "0:1:0.1"]), 3);
    assert_eq!(code(&["sweep", s(&ex), "--grid", "0.1:1"]), 2);
}

fn mechanize(dir: &TempDir, input: &Path, alpha: &str, family: &str) -> linsan::formats::MechanismFile {
    let out = dir.path().join(format!("{family}-{alpha}.csv"));
    stdout(&linsan(&["mechanize", s(input), "--alpha", alpha, "--family", family, "--out", s(&out)]));
    parse_mechanism(&fs::read_to_string(out).unwrap()).unwrap()
}

#[test]
fn mechanize_diagonals() {
    let dir = TempDir::new().unwrap();
    let ex = write(&dir, "ex.csv", CONDITIONAL);
    let j = load_joint(CONDITIONAL, None).unwrap();
    let alpha = Alpha::new(0.5).unwrap();

    let mk = mechanize(&dir, &ex, "0.5", "markov");
    assert_eq!(mk.meta.family, Family::Markov);
    assert_eq!(mk.meta.alpha, 0.5);
    assert_eq!(mk.meta.rng, "chacha20");
    assert_eq!(mk.meta.input_sha256, linsan::formats::sha256_hex(CONDITIONAL.as_bytes()));
    for s in 0..2 {
        for (x, want) in [0.705, 0.62, 0.61, 0.565].into_iter().enumerate() {
            assert!((mk.mechanism.prob(x, s, x) - want).abs() < 1e-12);
        }
    }
    assert!(verify_realization(&mk.mechanism, &j, alpha).unwrap().passes());

    let tv = mechanize(&dir, &ex, "0.5", "nonmarkov_tv");
    let diag: Vec<f64> = (0..4).map(|x| tv.mechanism.prob(x, 0, x)).collect();
    assert_eq!(diag, vec![1.0, 1.0, 0.72, 0.825]);
    assert!(verify_realization(&tv.mechanism, &j, alpha).unwrap().passes());
}

#[test]
fn mechanize_with_distortion_file() {
    let dir = TempDir::new().unwrap();
    let ex = write(&dir, "ex.csv", CONDITIONAL);
    let d = write(&dir, "d.csv", "x_in,a,b,c,d\na,0,1,2,3\nb,1,0,1,2\nc,2,1,0,1\nd,3,2,1,0\n");
    let out = dir.path().join("m.csv");
    stdout(&linsan(&[
        "mechanize", s(&ex), "--alpha", "0.5", "--family", "nonmarkov_distortion", "--distortion", s(&d), "--out",
        s(&out),
    ]));
    let m = parse_mechanism(&fs::read_to_string(&out).unwrap()).unwrap();
    let j = load_joint(CONDITIONAL, None).unwrap();
    assert!(verify_realization(&m.mechanism, &j, Alpha::new(0.5).unwrap()).unwrap().passes());
    // On the line metric, c's surplus goes to b first (distance 1), d's to b.
    assert!(m.mechanism.prob(1, 0, 2) > 0.0);

    let wrong = write(&dir, "wrong.csv", "x_in,a,b\na,0,1\nb,1,0\n");
    let code = linsan(&["mechanize", s(&ex), "--alpha", "0.5", "--family", "nonmarkov_distortion", "--distortion", s(&wrong)])
        .status
        .code();
    assert_eq!(code, Some(2));
}

fn sweep_text(input: &Path, extra: &[&str]) -> String {
    let mut args = vec!["sweep", s(input), "--grid", "0.011:1:0.05"];
    args.extend_from_slice(extra);
    stdout(&linsan(&args))
}

#[test]
fn sweep_rows() {
    let dir = TempDir::new().unwrap();
    let ex = write(&dir, "ex.csv", CONDITIONAL);
    let text = sweep_text(&ex, &[]);
    let (base, rows) = parse_tsv(&text).unwrap();
    assert_eq!(base, LogBase::Bits);
    assert_eq!(rows.len(), 42);
    let markov_0511 = rows.iter().find(|r| r.family == Family::Markov && (r.alpha - 0.511).abs() < 1e-12).unwrap();
    assert!((markov_0511.dtv_full - 0.724598).abs() < 1e-5);
    for r in rows.iter().filter(|r| r.alpha == 1.0) {
        assert_eq!((r.ldp_y, r.loglift_y), (0.0, 0.0));
    }
    for r in rows.iter().filter(|r| r.family == Family::NonmarkovTv) {
        assert!((r.dtv_half - 0.21 * r.alpha).abs() < 1e-9);
    }
    let alphas: Vec<f64> = rows.iter().filter(|r| r.family == Family::Markov).map(|r| r.alpha).collect();
    assert!(alphas.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn sweep_rows_reverify() {
    let dir = TempDir::new().unwrap();
    let ex = write(&dir, "ex.csv", CONDITIONAL);
    let d = write(&dir, "d.csv", "x_in,a,b,c,d\na,0,1,2,3\nb,1,0,1,2\nc,2,1,0,1\nd,3,2,1,0\n");
    let text = sweep_text(&ex, &["--distortion", s(&d)]);
    let (_, rows) = parse_tsv(&text).unwrap();
    assert_eq!(rows.len(), 63);
    let j = load_joint(CONDITIONAL, None).unwrap();
    let dm = DistortionMatrix::new(vec![
        vec![0.0, 1.0, 2.0, 3.0],
        vec![1.0, 0.0, 1.0, 2.0],
        vec![2.0, 1.0, 0.0, 1.0],
        vec![3.0, 2.0, 1.0, 0.0],
    ])
    .unwrap();
    for r in &rows {
        let alpha = Alpha::new(r.alpha).unwrap();
        let m = build_mechanism(&j, alpha, r.family, Some(&dm)).unwrap();
        assert!(verify_realization(&m, &j, alpha).unwrap().passes(), "{r:?}");
    }
    let best = |f: Family, a: f64| {
        rows.iter().find(|r| r.family == f && r.alpha == a).unwrap().expected_distortion
    };
    assert!(best(Family::NonmarkovDistortion, 1.0) <= best(Family::NonmarkovTv, 1.0) + 1e-9);
}

#[test]
fn sweep_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let ex = write(&dir, "ex.csv", CONDITIONAL);
    let first = sweep_text(&ex, &[]);
    let golden = include_str!("golden/example_sweep.tsv");
    assert_eq!(first, golden);
    let single = Command::new(env!("CARGO_BIN_EXE_linsan"))
        .args(["sweep", s(&ex), "--grid", "0.011:1:0.05"])
        .env("LINSAN_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&single), first);
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_linsan"))
        .args(["sweep", s(&ex), "--grid", "0.5"])
        .env("LINSAN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

fn example_records(n: usize) -> String {
    // Deterministic interleaving with the example's joint frequencies (per 100).
    let cells = [
        ("1", "a", 6),
        ("1", "b", 3),
        ("1", "c", 15),
        ("1", "d", 6),
        ("2", "a", 35),
        ("2", "b", 21),
        ("2", "c", 7),
        ("2", "d", 7),
    ];
    let block: Vec<String> = cells
        .iter()
        .flat_map(|&(s, x, k)| std::iter::repeat_n(format!("{s},{x}"), k))
        .collect();
    let mut out = String::from("s,x\n");
    for i in 0..n {
        out.push_str(&block[(i * 37) % 100]);
        out.push('\n');
    }
    out
}

#[test]
fn sanitize_full_privacy_and_determinism() {
    let dir = TempDir::new().unwrap();
    let ex = write(&dir, "ex.csv", CONDITIONAL);
    let mech = dir.path().join("m.csv");
    stdout(&linsan(&["mechanize", s(&ex), "--alpha", "1", "--family", "markov", "--out", s(&mech)]));
    let recs = write(&dir, "recs.csv", &example_records(100_000));
    let run = |out: &str| {
        let p = dir.path().join(out);
        stdout(&linsan(&["sanitize", s(&recs), "--mechanism", s(&mech), "--seed", "42", "--out", s(&p)]));
        fs::read(p).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# seed=42 rng=chacha20 family=markov alpha=1");
    assert_eq!(lines.next().unwrap(), "s,y");
    let ys: Vec<&str> = lines.map(|l| l.split_once(',').unwrap().1).collect();
    assert_eq!(ys.len(), 100_000);
    for (label, p) in [("a", 0.41), ("b", 0.24), ("c", 0.22), ("d", 0.13)] {
        let f = ys.iter().filter(|&&y| y == label).count() as f64 / 1e5;
        assert!((f - p).abs() <= 0.01, "{label}: {f}");
    }
    let other = stdout(&linsan(&["sanitize", s(&recs), "--mechanism", s(&mech), "--seed", "43"]));
    assert_ne!(other.as_bytes(), text.as_bytes());
}

#[test]
fn sanitize_unknown_label() {
    let dir = TempDir::new().unwrap();
    let ex = write(&dir, "ex.csv", CONDITIONAL);
    let mech = dir.path().join("m.csv");
    stdout(&linsan(&["mechanize", s(&ex), "--alpha", "0.5", "--family", "nonmarkov_tv", "--out", s(&mech)]));
    let bad_x = write(&dir, "bx.csv", "s,x\n1,a\n1,z\n");
    let bad_s = write(&dir, "bs.csv", "s,x\n3,a\n");
    for recs in [&bad_x, &bad_s] {
        let o = linsan(&["sanitize", s(recs), "--mechanism", s(&mech), "--seed", "1"]);
        assert_eq!(o.status.code(), Some(5));
        assert!(o.stdout.is_empty());
    }
}
