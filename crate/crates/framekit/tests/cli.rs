//! End-to-end tests of the `framekit` binary: exit codes, strict config
//! parsing, and byte-stable reports.

use std::process::Command;

fn framekit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_framekit"))
}

fn write_scenario(dir: &std::path::Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_is_byte_stable_for_fixed_seed() {
    let dir = std::env::temp_dir().join("framekit-cli-stable");
    std::fs::create_dir_all(&dir).unwrap();
    let config = write_scenario(
        &dir,
        "s.toml",
        "masses = [\"1\", \"1\", \"1\"]\nanalyses = [\"dirac-bracket\"]\n",
    );
    let run = || {
        let out = framekit()
            .args(["run", "--config"])
            .arg(&config)
            .args(["--emit", "json", "--seed", "11"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn run_reports_exact_dirac_entries() {
    let dir = std::env::temp_dir().join("framekit-cli-dirac");
    std::fs::create_dir_all(&dir).unwrap();
    let config = write_scenario(
        &dir,
        "s.toml",
        "masses = [\"1\", \"1\", \"1\"]\nanalyses = [\"dirac-bracket\"]\noutput = \"json\"\n",
    );
    let out = framekit().args(["run", "--config"]).arg(&config).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let matrix = &json["analyses"][0]["data"]["dirac_matrix"];
    // Unit masses: {q1, p1} = 2/3 and {q1, p2} = -1/3, as exact strings.
    assert_eq!(matrix[0][3], "2/3");
    assert_eq!(matrix[0][4], "-1/3");
    assert_eq!(json["analyses"][0]["passed"], true);
}

#[test]
fn unknown_key_and_bad_rational_abort_with_code_2() {
    let dir = std::env::temp_dir().join("framekit-cli-strict");
    std::fs::create_dir_all(&dir).unwrap();
    for body in [
        // unknown key
        "masses = [\"1\", \"1\", \"1\"]\nanalyses = [\"frames\"]\nunknown = 1\n",
        // malformed rational
        "masses = [\"1\", \"x/2\", \"1\"]\nanalyses = [\"frames\"]\n",
        // nonpositive mass
        "masses = [\"1\", \"-2\", \"1\"]\nanalyses = [\"frames\"]\n",
        // empty analyses
        "masses = [\"1\", \"1\", \"1\"]\nanalyses = []\n",
        // unknown analysis
        "masses = [\"1\", \"1\", \"1\"]\nanalyses = [\"plotting\"]\n",
    ] {
        let config = write_scenario(&dir, "bad.toml", body);
        let out = framekit().args(["run", "--config"]).arg(&config).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "config: {body}");
    }
}

#[test]
fn verify_subset_and_full_exit_codes() {
    let out = framekit()
        .args(["verify", "--only", "lagrangian", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("lagrangian identity ... PASS"), "{text}");
    assert!(text.contains("ALL PASS"));
}

#[test]
fn run_with_rational_masses() {
    let dir = std::env::temp_dir().join("framekit-cli-rational");
    std::fs::create_dir_all(&dir).unwrap();
    let config = write_scenario(
        &dir,
        "s.toml",
        "masses = [\"1/2\", \"3/4\", \"5\"]\nanalyses = [\"consistency\", \"frames\", \"transformations\"]\n",
    );
    let out = framekit()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--emit", "text"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("overall: ALL PASS"), "{text}");
}
