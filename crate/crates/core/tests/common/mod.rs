//! Helpers for driving the `eegsel` binary inside scratch directories.

#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

/// Four 40 s recordings, two folds, two set-ups, a few epochs.
pub const SMALL_CONFIG: &str = r#"{
  "synth": {"duration_s": 40.0},
  "n_recordings": 4,
  "train": {"epochs": 5},
  "eval": {"k_folds": 2},
  "setups": ["CzOz", "Fp1Fp2"]
}"#;

pub fn eegsel(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eegsel"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn eegsel")
}

/// Runs a command that must succeed and returns its stdout.
pub fn ok(dir: &Path, args: &[&str]) -> String {
    let out = eegsel(dir, args);
    assert!(
        out.status.success(),
        "eegsel {args:?} failed with {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<PathBuf, String>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            walk(root, &path, acc);
        } else {
            let digest = Sha256::digest(fs::read(&path).unwrap());
            acc.insert(path.strip_prefix(root).unwrap().to_path_buf(), hex::encode(digest));
        }
    }
}

/// SHA-256 of every file under `dir`, keyed by relative path.
pub fn tree_hashes(dir: &Path) -> BTreeMap<PathBuf, String> {
    let mut acc = BTreeMap::new();
    walk(dir, dir, &mut acc);
    acc
}

pub fn first_recording(dir: &Path) -> PathBuf {
    let mut csvs: Vec<PathBuf> = fs::read_dir(dir.join("data"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    csvs.sort();
    csvs.remove(0)
}

/// Runs every subcommand once inside `dir` with `config`.
pub fn run_all_commands(dir: &Path, config: &str) {
    fs::write(dir.join("run.json"), config).unwrap();
    let c = ["--config", "run.json"];
    let with = |extra: &[&str]| -> Vec<String> { c.iter().chain(extra).map(|s| s.to_string()).collect() };
    let call = |args: Vec<String>| {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        ok(dir, &refs);
    };
    call(with(&["synth"]));
    let rec = first_recording(dir);
    let rec = rec.strip_prefix(dir).unwrap().to_str().unwrap().to_owned();
    call(with(&["featurize", "--setup", "Fp1Fp2"]));
    call(with(&["train", "--setup", "CzOz"]));
    call(with(&["score", "--model", "models/CzOz_alpha.json", "--recording", &rec]));
    call(with(&["sweep"]));
    call(with(&["baseline"]));
    call(with(&["report"]));
}
