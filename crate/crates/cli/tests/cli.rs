use std::fs;
use std::process::{Command, Output};

fn cmsurvey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmsurvey")).args(args).output().expect("spawn cmsurvey")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: [&str; 6] = ["--max-disc", "1000", "--max-conductor", "1", "--profile", "desk"];

#[test]
fn run_writes_spot_value() {
    let mut args = vec!["run", "--p", "71", "--family", "odd=maximal,hodd"];
    args.extend(SMALL);
    let out = cmsurvey(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("# p=71\nfactor,odd\n"));
    assert!(text.contains("\nx + 23,1\n"), "{text}");
}

#[test]
fn run_is_independent_of_workers_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("polys.tsv");
    let cache = cache.to_str().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3", "2"] {
        let out_path = dir.path().join(format!("t{workers}.md"));
        let mut args = vec![
            "run", "--p", "41", "--family", "all", "--family", "8||D,odd(f)", "--format", "markdown",
            "--max-disc", "800", "--max-conductor", "6", "--workers", workers, "--cache", cache, "--out",
        ];
        args.push(out_path.to_str().unwrap());
        let o = cmsurvey(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(&out_path).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    assert!(fs::read_to_string(dir.path().join("polys.tsv")).unwrap().lines().count() > 50);
}

#[test]
fn compare_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    fs::write(&a, "# p=71\nfactor,odd\nx + 23,1\n").unwrap();
    fs::write(&b, "# p=71\nfactor,odd\nx + 23,2\n").unwrap();
    fs::write(&c, "# p=59\nfactor,odd\nx,1\n").unwrap();
    let p = |x: &std::path::Path| x.to_str().unwrap().to_string();
    let same = cmsurvey(&["compare", &p(&a), &p(&a)]);
    assert_eq!(same.status.code(), Some(0));
    let diff = cmsurvey(&["compare", &p(&a), &p(&b)]);
    assert_eq!(diff.status.code(), Some(1));
    assert!(stdout(&diff).contains("x + 23 / odd: 1 vs 2"));
    let mismatch = cmsurvey(&["compare", &p(&a), &p(&c)]);
    assert_eq!(mismatch.status.code(), Some(3));
}

#[test]
fn config_errors_exit_3() {
    assert_eq!(cmsurvey(&["run", "--p", "71"]).status.code(), Some(3));
    assert_eq!(cmsurvey(&["run", "--p", "71", "--family", "7||q"]).status.code(), Some(3));
    assert_eq!(cmsurvey(&["run", "--p", "15", "--family", "all"]).status.code(), Some(3));
    assert_eq!(cmsurvey(&["run", "--p", "71", "--family", "all", "--format", "xml"]).status.code(), Some(3));
    assert_eq!(cmsurvey(&["run", "--p", "71", "--family", "all", "--profile", "huge"]).status.code(), Some(3));
    assert_eq!(cmsurvey(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(cmsurvey(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_small_scan_passes() {
    let out = cmsurvey(&["verify", "--p", "71", "--max-disc", "600", "--max-conductor", "6", "--max-h", "20"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("linear count mismatches: 0"));
    assert!(text.contains("pairing over"));
}

#[test]
fn columns_from_fixture() {
    let out = cmsurvey(&["run", "--p", "71", "--columns-from", "p71-parity", "--max-disc", "200", "--max-conductor", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("factor,\"maximal,hodd\",\"maximal,heven\""));
    assert_eq!(cmsurvey(&["run", "--p", "71", "--columns-from", "nope"]).status.code(), Some(3));
}
