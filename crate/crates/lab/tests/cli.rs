use std::process::Command;

fn kleinflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kleinflow"))
}

#[test]
fn lists_builtins_and_catalog() {
    let out = kleinflow().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.contains("tangent-identity"));
    let out = kleinflow().arg("catalog").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("534 ")));
}

#[test]
fn exit_code_follows_verdicts() {
    let dir = std::env::temp_dir().join(format!("kleinflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.toml");
    std::fs::write(
        &good,
        "id = \"c\"\npipeline = \"Commensurability\"\nseed = 1\n[parameters]\ntol = 1e-9\nmax_denominator = 100\n\
         [[parameters.cases]]\nl1 = 1.0\nl2 = 2.0\nexpect = \"1/2\"\n",
    )
    .unwrap();
    let out = kleinflow().args(["--out", dir.to_str().unwrap(), "run", good.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.join("c/commensurability.csv").exists());
    assert!(dir.join("manifest.json").exists());

    let bad = dir.join("bad.toml");
    std::fs::write(&bad, std::fs::read_to_string(&good).unwrap().replace("\"1/2\"", "\"independent\"")).unwrap();
    let out = kleinflow().args(["--out", dir.to_str().unwrap(), "run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = kleinflow().args(["run", dir.join("missing.toml").to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = kleinflow().args(["--tol-profile", "loose", "catalog"]).output().unwrap();
    assert!(!out.status.success());
    let _ = std::fs::remove_dir_all(&dir);
}
