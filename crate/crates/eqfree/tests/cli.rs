use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_eqfree");

fn write_structure(dir: &std::path::Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN)
        .args(args)
        .env_remove("EQFREE_SEED")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn cli_round_trip() {
    let dir = std::env::temp_dir().join(format!("eqfree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let one = write_structure(
        &dir,
        "one.json",
        r#"{"vocabulary":{"relations":{"P":1}},"domain":["a"],"relations":{"P":[["a"]]}}"#,
    );
    let two = write_structure(
        &dir,
        "two.json",
        r#"{"vocabulary":{"relations":{"P":1}},"domain":["u","v"],"relations":{"P":[["u"],["v"]]}}"#,
    );
    let half = write_structure(
        &dir,
        "half.json",
        r#"{"vocabulary":{"relations":{"P":1}},"domain":["u","v"],"relations":{"P":[["u"]]}}"#,
    );

    let (code, out, _) = run(&["eval", &one, "exists x. P(x)"]);
    assert_eq!((code, out.trim()), (0, "true"));
    let (code, out, _) = run(&["eval", &one, "exists>=2 x. P(x)"]);
    assert_eq!((code, out.trim()), (1, "false"));

    let (code, out, _) = run(&["weakiso", &one, &two]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "a~u a~v");
    let (code, out, _) = run(&["weakiso", &one, &half]);
    assert_eq!(code, 1);
    assert_eq!(out.trim(), "none");

    let (code, out, _) = run(&["ef", &one, &half, "--rounds", "1"]);
    assert_eq!(code, 1);
    assert!(out.contains("distinguishable"));
    let (code, _, _) = run(&["ef", &one, &two, "--rounds", "2"]);
    assert_eq!(code, 0);

    // reducing the two-point structure collapses it to a point
    let (code, out, _) = run(&["reduce", &two]);
    assert_eq!(code, 0);
    let reduced = dir.join("reduced.json");
    std::fs::write(&reduced, &out).unwrap();
    let (code, _, _) = run(&["weakiso", reduced.to_str().unwrap(), &one]);
    assert_eq!(code, 0);

    // blow-ups are seed-deterministic and identical json output repeats
    let (c1, b1, _) = run(&["blowup", &one, "--size", "4", "--seed", "9", "--json"]);
    let (c2, b2, _) = run(&["blowup", &one, "--size", "4", "--seed", "9", "--json"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(b1, b2);

    let (code, out, _) = run(&["normalform", "exists>=2 x. P(x) & exists y. !P(y)", "--Y", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "E[2,oo)P & E[1,oo)!P");

    let (code, out, _) = run(&["definable", "--r", "2", "--Y", "2"]);
    assert_eq!((code, out.trim()), (0, "yes"));
    let (code, out, _) = run(&["definable", "--r", "3", "--Y", "2"]);
    assert_eq!((code, out.trim()), (1, "no"));

    let (code, out, _) = run(&["emit-theory", "game", &one]);
    assert_eq!(code, 0);
    assert!(out.contains("I(c0,"));

    // usage errors exit 2
    let (code, _, err) = run(&["eval", &one, "x = y"]);
    assert_eq!(code, 2);
    assert!(err.contains("equality"));
    let (code, _, _) = run(&["check", "--suite", "no-such-suite"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["eval", dir.join("missing.json").to_str().unwrap(), "P(x)"]);
    assert_eq!(code, 2);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cli_check_single_suite() {
    let (code, out, _) = run(&["check", "--suite", "counting-nonclosure", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
}
