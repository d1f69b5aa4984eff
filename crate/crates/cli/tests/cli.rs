use std::io::Write;
use std::process::{Command, Output, Stdio};

fn revca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revca"))
        .args(args)
        .output()
        .expect("spawn revca")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn gen_patterns_fixed_radii() {
    let o = revca(&["gen-patterns", "--left", "1", "--right", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0X011\n0X110\n1X001\n1X100\n# count: 4\n");
}

#[test]
fn gen_patterns_counts_by_diameter() {
    assert_eq!(stdout(&revca(&["gen-patterns", "--diameter", "3"])), "# count: 0\n");
    let o = revca(&["gen-patterns", "--diameter", "10"]);
    assert!(stdout(&o).ends_with("# count: 2556\n"));
    assert_eq!(stdout(&o).lines().count(), 2557);
}

#[test]
fn gen_patterns_rejects_incomplete_radii() {
    assert_eq!(revca(&["gen-patterns", "--left", "1"]).status.code(), Some(2));
}

#[test]
fn gen_extended_lists_padded_patterns() {
    let o = revca(&["gen-extended", "--diameter", "5"]);
    let out = stdout(&o);
    assert!(out.ends_with("# count: 8\n"));
    assert!(out.lines().any(|l| l == "10X1a"));
}

#[test]
fn counts_json_rows() {
    let o = revca(&["counts", "--max-diameter", "10", "--json"]);
    assert!(o.status.success());
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    let table: Vec<(u64, u64, u64)> = rows
        .iter()
        .map(|r| {
            (
                r["diameter"].as_u64().unwrap(),
                r["injective_patterns"].as_u64().unwrap(),
                r["extended_patterns"].as_u64().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        table,
        vec![
            (3, 0, 0),
            (4, 4, 0),
            (5, 14, 8),
            (6, 52, 40),
            (7, 148, 162),
            (8, 408, 528),
            (9, 1040, 1562),
            (10, 2556, 4268),
        ]
    );
}

#[test]
fn counts_text_and_range() {
    let o = revca(&["counts", "--max-diameter", "8"]);
    assert!(stdout(&o).lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == ["7", "148", "162"]));
    assert_eq!(revca(&["counts", "--max-diameter", "2"]).status.code(), Some(2));
}

#[test]
fn induce_with_verification() {
    let o = revca(&["induce", "0X011", "--verify"]);
    assert!(o.status.success());
    let entries = json_lines(&o);
    assert_eq!(entries.len(), 1);
    let e = &entries[0];
    assert_eq!(e["wolfram_decimal"], "4278253320");
    assert_eq!(e["table_hex"], "ff00f708");
    assert_eq!(e["verified_debruijn"], true);
    assert_eq!(e["verified_periodic_to"], 12);
    assert_eq!(e["classification"], "nontrivial");
    assert!(e.get("created_at").is_none());
}

#[test]
fn induce_x_is_flagged_trivial() {
    let e = &json_lines(&revca(&["induce", "X"]))[0];
    assert_eq!(e["diameter"], 1);
    assert_eq!(e["wolfram_decimal"], "1");
    assert_eq!(e["classification"], "complement(0)");
}

#[test]
fn induce_rejects_dependent_patterns() {
    let o = revca(&["induce", "0X011", "0X110"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("0X011") && err.contains("0X110"), "{err}");
}

#[test]
fn verify_reports() {
    let o = revca(&["verify", "-d", "3", "-w", "240"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("verdict: injective"));
    assert!(out.contains("classification: projection(0)"));
    let o = revca(&["verify", "-d", "3", "-w", "204"]);
    assert!(stdout(&o).contains("classification: projection(1)"));
    let o = revca(&["verify", "-d", "3", "-w", "90"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness:"));
    assert_eq!(revca(&["verify", "-d", "3", "-w", "zz"]).status.code(), Some(2));
    assert_eq!(revca(&["verify", "-d", "3", "-w", "256"]).status.code(), Some(2));
}

#[test]
fn enumerate_small_diameters() {
    let o = revca(&["enumerate", "-d", "3", "--exclude-trivial"]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let entries = json_lines(&revca(&["enumerate", "-d", "4", "--exclude-trivial"]));
    let numbers: Vec<&str> = entries.iter().map(|e| e["wolfram_decimal"].as_str().unwrap()).collect();
    assert_eq!(numbers, ["3915", "11535", "13155", "14643", "50892", "52380", "54000", "61620"]);
    assert_eq!(json_lines(&revca(&["enumerate", "-d", "4"])).len(), 16);
}

#[test]
fn enumerate_refuses_large_diameters() {
    assert_ne!(revca(&["enumerate", "-d", "5"]).status.code(), Some(0));
    assert_ne!(revca(&["enumerate", "-d", "6", "--allow-long"]).status.code(), Some(0));
}

#[test]
fn enumerate_resumable_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let progress = dir.path().join("progress.json");
    let results = dir.path().join("results.jsonl");
    let args = [
        "enumerate",
        "-d",
        "4",
        "--exclude-trivial",
        "--progress",
        progress.to_str().unwrap(),
        "--results",
        results.to_str().unwrap(),
    ];
    assert!(revca(&args).status.success());
    assert!(revca(&args).status.success());
    let text = std::fs::read_to_string(&results).unwrap();
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn simulate_prints_rows() {
    let o = revca(&["simulate", "-d", "5", "--pattern", "0X011", "--init", "00011", "--steps", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "00011\n01011\n00011\n");
    let o = revca(&["simulate", "-d", "3", "--wolfram", "240", "--anchor", "1", "--init", "0011", "--steps", "1"]);
    assert_eq!(stdout(&o), "0011\n1001\n");
    assert_ne!(revca(&["simulate", "-d", "3", "-w", "240", "--init", ""]).status.code(), Some(0));
}

#[test]
fn simulate_writes_pbm() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("st.pbm");
    let o = revca(&[
        "simulate",
        "-p",
        "0X011",
        "--init",
        "000110",
        "--steps",
        "2",
        "--pbm",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let pbm = std::fs::read_to_string(&path).unwrap();
    let mut lines = pbm.lines();
    assert_eq!(lines.next(), Some("P1"));
    assert_eq!(lines.next(), Some("6 3"));
}

#[test]
fn output_is_byte_deterministic() {
    for args in [
        vec!["gen-patterns", "-d", "8"],
        vec!["gen-extended", "-d", "7"],
        vec!["counts", "--json"],
        vec!["induce", "0X011", "--verify"],
        vec!["enumerate", "-d", "4"],
    ] {
        assert_eq!(revca(&args).stdout, revca(&args).stdout, "{args:?}");
    }
    let single = Command::new(env!("CARGO_BIN_EXE_revca"))
        .args(["enumerate", "-d", "4"])
        .env("REVCA_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(single.stdout, revca(&["enumerate", "-d", "4"]).stdout);
}

#[test]
fn catalog_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = dir.path().join("catalog.jsonl");
    let c = catalog.to_str().unwrap();
    let first = revca(&["induce", "0X011", "--verify", "--catalog", c]);
    let second = revca(&["induce", "a10X1", "--verify", "--catalog", c]);
    assert!(first.status.success() && second.status.success());
    let stored: Vec<serde_json::Value> = std::fs::read_to_string(&catalog)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(stored.len(), 2);
    for (entry, printed) in stored.iter().zip(json_lines(&first).iter().chain(json_lines(&second).iter())) {
        assert!(entry["created_at"].is_string());
        for key in ["diameter", "anchor", "wolfram_decimal", "table_hex", "provenance"] {
            assert_eq!(entry[key], printed[key], "{key}");
        }
        let n: u64 = entry["wolfram_decimal"].as_str().unwrap().parse().unwrap();
        assert_eq!(u64::from_str_radix(entry["table_hex"].as_str().unwrap(), 16).unwrap(), n);
    }
}

fn pipe_patterns_through_induce(generator: &[&str]) -> (usize, Vec<serde_json::Value>) {
    let listing = stdout(&revca(generator));
    let expected = listing.lines().filter(|l| !l.starts_with('#')).count();
    let mut child = Command::new(env!("CARGO_BIN_EXE_revca"))
        .args(["induce", "--batch", "-", "--verify"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(listing.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (expected, json_lines(&out))
}

#[test]
fn piped_generation_verifies_everything() {
    for n in 1..=8 {
        for generator in [vec!["gen-patterns", "-d"], vec!["gen-extended", "-d"]] {
            let d = n.to_string();
            let mut args = generator.clone();
            args.push(&d);
            let (expected, entries) = pipe_patterns_through_induce(&args);
            assert_eq!(entries.len(), expected, "{args:?}");
            for e in &entries {
                assert_eq!(e["verified_debruijn"], true, "{e}");
                assert_eq!(e["verified_periodic_to"], 12, "{e}");
            }
        }
    }
}
