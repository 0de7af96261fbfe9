use std::process::Command;

fn grunsky(args: &[&str]) -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_grunsky")).args(args).output().expect("binary runs");
    (out.status.success(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn domain_and_grunsky_pass() {
    let (ok, text) = grunsky(&["domain", "--family", "square", "--n", "128"]);
    assert!(ok, "{text}");
    assert!(text.contains("PASS"));
    let (ok, text) = grunsky(&["grunsky", "--family", "joukowski:0.5", "--n", "32", "--threads", "1"]);
    assert!(ok, "{text}");
}

#[test]
fn experiment_preset_and_listing() {
    let dir = std::env::temp_dir().join(format!("grunsky-cli-{}", std::process::id()));
    let (ok, text) = grunsky(&["experiment", "lemma44-integral", "--out", dir.to_str().unwrap()]);
    assert!(ok, "{text}");
    assert!(dir.join("lemma44-integral-integral.csv").exists());
    let (ok, text) = grunsky(&["experiment", "--list"]);
    assert!(ok && text.contains("thm16-pommerenke-slope"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn bad_input_fails() {
    assert!(!grunsky(&["experiment", "thm99"]).0);
    assert!(!grunsky(&["domain", "--precision", "dd"]).0);
    assert!(!grunsky(&["coulomb", "--family", "polygon:2"]).0);
}
