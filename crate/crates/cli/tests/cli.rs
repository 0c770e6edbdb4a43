//! End-to-end runs of the `cdgl` binary on the repository models.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cdgl_core::surface::{parse_file, parse_game};
use cdgl_core::syntax::Game;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn cdgl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdgl")).args(args).env("CDGL_COLOR", "0").output().expect("run cdgl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn push_pull_proof_checks_with_nothing_assumed() {
    let o = cdgl(&["check", &model("pp.cdgl"), "--proof", "ppSafe"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().last(), Some("VERDICT ACCEPTED 0"));
}

#[test]
fn inline_prints_the_mirroring_system() {
    let o = cdgl(&["inline", &model("pp.cdgl"), "--proof", "ppSafe"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let got = parse_game(stdout(&o).trim()).unwrap();
    let want =
        parse_game("{{L:=-1; R:=1; {x'=L+R & x_l <= x & x <= x_r}} ++ {L:=1; R:=-1; {x'=L+R & x_l <= x & x <= x_r}}}*")
            .unwrap();
    assert_eq!(got, want);
    assert!(got.is_system());
}

#[test]
fn emitted_certificates_check() {
    let o = cdgl(&["inline", &model("pp.cdgl"), "--proof", "ppSafe", "--emit-transfer", "--emit-refinement"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.cdgl");
    std::fs::write(&path, stdout(&o)).unwrap();
    let path = path.to_string_lossy();

    let t = cdgl(&["check", &path, "--proof", "ppSafe_transfer"]);
    assert_eq!(t.status.code(), Some(0), "{}{}", stdout(&t), stderr(&t));
    assert_eq!(stdout(&t).lines().last(), Some("VERDICT ACCEPTED 0"));
    let r = cdgl(&["refine", &path, "--derivation", "ppSafe_refinement"]);
    assert_eq!(r.status.code(), Some(0), "{}{}", stdout(&r), stderr(&r));

    let file = parse_file(&stdout(&o)).unwrap();
    let system: &Game = file.game("ppSafe_system").unwrap();
    assert!(system.is_system());
}

#[test]
fn fmt_is_idempotent_on_repository_models() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(models()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "cdgl") {
            continue;
        }
        let once = cdgl(&["fmt", &path.to_string_lossy()]);
        assert_eq!(once.status.code(), Some(0), "{}: {}", path.display(), stderr(&once));
        let tmp = dir.path().join(path.file_name().unwrap());
        std::fs::write(&tmp, stdout(&once)).unwrap();
        let twice = cdgl(&["fmt", &tmp.to_string_lossy()]);
        assert_eq!(stdout(&once), stdout(&twice), "{}", path.display());
        let check = cdgl(&["fmt", "--check", &tmp.to_string_lossy()]);
        assert_eq!(check.status.code(), Some(0));
    }
}

#[test]
fn refinement_examples_check() {
    for name in ["swap", "pick"] {
        let o = cdgl(&["refine", &model("laws.cdgl"), "--derivation", name]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}{}", stdout(&o), stderr(&o));
    }
}

#[test]
fn scripted_run_holds_on_the_inlined_system() {
    let args = ["simulate", &model("pp_system.cdgl"), "--system", "PPsys", "--init", &model("pp.init")];
    let script = model("pp.script");
    let mut exact = args.to_vec();
    exact.extend(["--script", &script, "--post", "x = x0"]);
    let o = cdgl(&exact);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().last(), Some("VERDICT POSTCONDITION HOLDS"));
    assert!(out.lines().all(|l| l.starts_with("VERDICT") || l.split('\t').count() >= 3));

    let mut rk4 = exact.clone();
    rk4.push("--rk4");
    assert_eq!(cdgl(&rk4).status.code(), Some(0));

    let mut wrong = args.to_vec();
    wrong.extend(["--script", &script, "--post", "x > x0"]);
    let o = cdgl(&wrong);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("VERDICT POSTCONDITION FAILS"));
}

#[test]
fn random_demons_are_reproducible() {
    let run = |seed: &str| {
        cdgl(&[
            "simulate",
            &model("pp_system.cdgl"),
            "--system",
            "PPsys",
            "--init",
            &model("pp.init"),
            "--random",
            "20",
            "--seed",
            seed,
            "--post",
            "x = x0",
        ])
    };
    let a = run("3");
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(stdout(&a).lines().last(), Some("HOLDS 20/20"));
    assert_eq!(stdout(&a), stdout(&run("3")));
}

#[test]
fn games_with_duals_are_not_simulated() {
    let o = cdgl(&[
        "simulate",
        &model("pp.cdgl"),
        "--system",
        "PP",
        "--init",
        &model("pp.init"),
        "--script",
        &model("pp.script"),
        "--post",
        "x = x0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not a system"));
}

#[test]
fn exit_codes_separate_usage_parse_and_rejection() {
    assert_eq!(cdgl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cdgl(&["check", &model("pp.cdgl")]).status.code(), Some(2));
    assert_eq!(cdgl(&["check", &model("pp.cdgl"), "--proof", "missing"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.cdgl");
    std::fs::write(&broken, "game G := {x:=1 ++\n").unwrap();
    let o = cdgl(&["check", &broken.to_string_lossy(), "--proof", "p"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("broken.cdgl:"), "{}", stderr(&o));

    let wrong = dir.path().join("wrong.cdgl");
    std::fs::write(&wrong, "proof p : |- [x:=1] x = 2 := asgn(y, x, e => qe(x = 2))\n").unwrap();
    let o = cdgl(&["check", &wrong.to_string_lossy(), "--proof", "p"]);
    assert_eq!(o.status.code(), Some(1), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("REFUTED") || stdout(&o).contains("REJECTED"));
}

#[test]
fn corpus_command_reports_full_pipeline() {
    let o = cdgl(&["corpus", "--count", "10", "--seed", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("generated\t10\n"));
}
