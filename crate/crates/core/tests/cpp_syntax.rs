//! Emitted C++ compiles against Eigen. Skipped without g++ or Eigen headers.

mod corpus;

use std::path::Path;
use std::process::Command;

const EIGEN: &str = "/usr/include/eigen3";

#[test]
fn cpp_units_compile() {
    let gxx = Command::new("g++").arg("--version").output().is_ok_and(|o| o.status.success());
    if !gxx || !Path::new(EIGEN).join("Eigen").exists() {
        eprintln!("skipped: g++ or Eigen not found");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for e in corpus::entries() {
        for u in corpus::compile(&e).unwrap() {
            if u.file_name.ends_with(".cpp") {
                let f = dir.path().join(&u.file_name);
                std::fs::write(&f, &u.text).unwrap();
                files.push(f);
            }
        }
    }
    // One compiler per unit; Eigen headers are slow to parse.
    let bad: Vec<String> = std::thread::scope(|s| {
        let jobs: Vec<_> = files
            .iter()
            .map(|f| s.spawn(move || Command::new("g++").args(["-std=c++17", "-fsyntax-only", "-Wall", "-I", EIGEN]).arg(f).output().unwrap()))
            .collect();
        jobs.into_iter()
            .zip(&files)
            .filter_map(|(j, f)| {
                let o = j.join().unwrap();
                (!o.status.success()).then(|| format!("{}:\n{}", f.display(), String::from_utf8_lossy(&o.stderr)))
            })
            .collect()
    });
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}
