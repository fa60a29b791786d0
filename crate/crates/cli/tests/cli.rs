//! End-to-end tests of the `condensation` binary: each test drives the real
//! executable through a temp directory and checks files, schemas, and exit
//! codes rather than library internals.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condensation"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary failed to launch")
}

fn assert_code(out: &Output, want: i32) {
    let got = out.status.code().expect("killed by signal");
    assert_eq!(
        got,
        want,
        "exit {got}, wanted {want}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&read(path)).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Writes a tiny two-blob point cloud: k tight points at the origin and k at
/// (10, 10), far enough apart that every method separates them.
fn write_pair_blobs(path: &Path, k: usize) {
    let mut text = String::new();
    for i in 0..k {
        text.push_str(&format!("{},0.0\n", i as f64 * 0.01));
    }
    for i in 0..k {
        text.push_str(&format!("{},10.0\n", 10.0 + i as f64 * 0.01));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn gen_data_is_deterministic_and_descriptors_regenerate_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |out: &str| {
        run_in(
            dir.path(),
            &[
                "gen-data",
                "--kind",
                "noisy-moons",
                "--n",
                "80",
                "--seed",
                "9",
                "--out",
                out,
            ],
        )
    };
    assert_code(&gen("a.csv"), 0);
    assert_code(&gen("b.csv"), 0);
    let a = read(&dir.path().join("a.csv"));
    assert_eq!(a, read(&dir.path().join("b.csv")), "same seed, same bytes");
    assert_eq!(a.lines().count(), 80);

    // labels and a descriptor ride along
    let labels = read(&dir.path().join("a.labels.csv"));
    assert_eq!(labels.lines().count(), 80);
    let regen = run_in(
        dir.path(),
        &["gen-data", "--from-descriptor", "a.descriptor.json", "--out", "c.csv"],
    );
    assert_code(&regen, 0);
    assert_eq!(a, read(&dir.path().join("c.csv")));
    assert_eq!(labels, read(&dir.path().join("c.labels.csv")));

    // the manifest lists every output
    let manifest = read_json(&dir.path().join("a.manifest.json"));
    let outputs: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(outputs, ["a.csv", "a.labels.csv", "a.descriptor.json"]);
}

#[test]
fn unknown_kind_is_a_usage_error_and_help_is_not() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(&run_in(dir.path(), &["gen-data", "--kind", "bogus"]), 1);
    assert_code(&run_in(dir.path(), &["--help"]), 0);
    assert_code(&run_in(dir.path(), &["condense", "--help"]), 0);
    assert_code(&run_in(dir.path(), &["--version"]), 0);
}

#[test]
fn condense_writes_the_trace_schema_and_merges_duplicates_at_iteration_one() {
    let dir = tempfile::tempdir().unwrap();
    // two exact duplicate pairs, far apart
    std::fs::write(dir.path().join("dup.csv"), "0,0\n0,0\n9,9\n9,9\n").unwrap();
    let out = run_in(
        dir.path(),
        &["condense", "dup.csv", "--epsilon", "1.0", "--out", "run/trace.json"],
    );
    assert_code(&out, 0);

    let doc = read_json(&dir.path().join("run/trace.json"));
    let object = doc.as_object().unwrap();
    let mut keys: Vec<&String> = object.keys().collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "config",
            "epsilon_schedule",
            "halt_reason",
            "labels_per_iteration",
            "merges",
            "snapshot_files"
        ]
    );
    assert!(doc["merges"]
        .as_array()
        .unwrap()
        .iter()
        .any(|m| m["iteration"] == 1));
    assert_eq!(doc["labels_per_iteration"][0], serde_json::json!([0, 1, 2, 3]));

    // every listed snapshot file exists, relative to the trace
    let snapshots = doc["snapshot_files"].as_array().unwrap();
    assert!(!snapshots.is_empty());
    for pair in snapshots {
        let rel = pair[1].as_str().unwrap();
        assert!(dir.path().join("run").join(rel).exists(), "{rel} missing");
    }

    // byte-identical on rerun with the same flags
    let first = read(&dir.path().join("run/trace.json"));
    assert_code(
        &run_in(
            dir.path(),
            &["condense", "dup.csv", "--epsilon", "1.0", "--out", "run2/trace.json"],
        ),
        0,
    );
    assert_eq!(first, read(&dir.path().join("run2/trace.json")));
}

#[test]
fn condense_records_auto_epsilon_and_reruns_from_the_manifest_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    write_pair_blobs(&dir.path().join("pts.csv"), 4);
    let out = run_in(
        dir.path(),
        &["condense", "pts.csv", "--out", "run/trace.json"],
    );
    assert_code(&out, 0);

    let manifest = read_json(&dir.path().join("run/trace.manifest.json"));
    assert_eq!(manifest["config"]["epsilon0"], "auto");
    let resolved = manifest["resolved_epsilon"].as_f64().unwrap();
    assert!(resolved > 0.0);
    assert_eq!(manifest["halt_reason"], "single-cluster");
    assert_eq!(manifest["artifact_version"], 1);

    let rerun = run_in(
        dir.path(),
        &[
            "condense",
            "--from-manifest",
            "run/trace.manifest.json",
            "--out",
            "rerun/trace.json",
        ],
    );
    assert_code(&rerun, 0);
    assert_eq!(
        read(&dir.path().join("run/trace.json")),
        read(&dir.path().join("rerun/trace.json"))
    );
}

#[test]
fn condense_exhausting_the_budget_exits_two_but_still_writes_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    write_pair_blobs(&dir.path().join("pts.csv"), 4);
    let out = run_in(
        dir.path(),
        &[
            "condense",
            "pts.csv",
            "--max-iterations",
            "2",
            "--out",
            "trace.json",
        ],
    );
    assert_code(&out, 2);
    let doc = read_json(&dir.path().join("trace.json"));
    assert_eq!(doc["halt_reason"], "max-iterations");
    assert_eq!(doc["labels_per_iteration"].as_array().unwrap().len(), 3);
}

#[test]
fn condense_rejects_bad_input_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "1,2\n3,oops\n").unwrap();
    let out = run_in(dir.path(), &["condense", "bad.csv", "--out", "t.json"]);
    assert_code(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("row 2") && stderr.contains("column 2"),
        "no location in: {stderr}"
    );
    assert_code(
        &run_in(dir.path(), &["condense", "missing.csv", "--out", "t.json"]),
        1,
    );
}

#[test]
fn spectra_exports_the_requested_families() {
    let dir = tempfile::tempdir().unwrap();
    write_pair_blobs(&dir.path().join("pts.csv"), 4);
    assert_code(
        &run_in(dir.path(), &["condense", "pts.csv", "--out", "trace.json"]),
        0,
    );
    assert_code(
        &run_in(
            dir.path(),
            &[
                "spectra",
                "trace.json",
                "--top",
                "3",
                "--families",
                "step,cumulative,power",
                "--out",
                "spectra.csv",
            ],
        ),
        0,
    );
    let text = read(&dir.path().join("spectra.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("family,iteration,index,value"));
    let mut families: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    families.dedup();
    assert_eq!(families, ["step", "cumulative", "power"]);

    // single-family export and the bad-name rejection
    assert_code(
        &run_in(
            dir.path(),
            &["spectra", "trace.json", "--top", "3", "--families", "power", "--out", "p.csv"],
        ),
        0,
    );
    let text = read(&dir.path().join("p.csv"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("power,")));
    assert_code(
        &run_in(
            dir.path(),
            &["spectra", "trace.json", "--families", "step,bogus", "--out", "x.csv"],
        ),
        1,
    );
}

#[test]
fn sankey_conserves_mass_and_rejects_out_of_range_windows() {
    let dir = tempfile::tempdir().unwrap();
    write_pair_blobs(&dir.path().join("pts.csv"), 5);
    assert_code(
        &run_in(dir.path(), &["condense", "pts.csv", "--out", "trace.json"]),
        0,
    );
    assert_code(
        &run_in(
            dir.path(),
            &[
                "sankey",
                "trace.json",
                "--persistence-out",
                "persistence.csv",
                "--out",
                "sankey.json",
            ],
        ),
        0,
    );

    let doc = read_json(&dir.path().join("sankey.json"));
    let iterations = doc["iterations"].as_array().unwrap();
    assert!(!iterations.is_empty());
    for it in iterations {
        let total: u64 = it["nodes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|n| n["size"].as_u64().unwrap())
            .sum();
        assert_eq!(total, 10, "mass leaked at iteration {}", it["t"]);
    }

    let persistence = read(&dir.path().join("persistence.csv"));
    assert_eq!(
        persistence.lines().next(),
        Some("cluster_id,birth,death,persistence,size")
    );
    assert!(persistence.lines().count() > 1);

    let out = run_in(
        dir.path(),
        &["sankey", "trace.json", "--from", "0", "--to", "9999", "--out", "s.json"],
    );
    assert_code(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("final iteration"), "no range in: {stderr}");
}

#[test]
fn velocity_arrows_on_a_symmetric_pair_point_at_each_other() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pair.csv"), "0,0\n1,0\n").unwrap();
    assert_code(
        &run_in(
            dir.path(),
            &["condense", "pair.csv", "--epsilon", "1.0", "--out", "trace.json"],
        ),
        0,
    );
    assert_code(
        &run_in(
            dir.path(),
            &["velocity", "trace.json", "--iteration", "0", "--out", "vel.csv"],
        ),
        0,
    );

    let text = read(&dir.path().join("vel.csv"));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "x0,x1,v0,v1");
    assert_eq!(rows.len(), 3);
    let parse = |line: &str| -> Vec<f64> {
        line.split(',').map(|c| c.parse().unwrap()).collect()
    };
    let (a, b) = (parse(rows[1]), parse(rows[2]));
    assert!(a[2] > 0.0, "left point must move right, got {}", a[2]);
    assert!((a[2] + b[2]).abs() < 1e-12, "arrows must be equal and opposite");
    assert!((a[3]).abs() < 1e-12 && (b[3]).abs() < 1e-12);

    let out = run_in(
        dir.path(),
        &["velocity", "trace.json", "--iteration", "9999", "--out", "v.csv"],
    );
    assert_code(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("0..="), "no valid range in: {stderr}");
}

#[test]
fn embed_graph_separates_two_triangles_and_supports_the_laplacian_basis() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for i in 0..6 {
        let row: Vec<&str> = (0..6)
            .map(|j| {
                if i != j && (i < 3) == (j < 3) {
                    "1"
                } else {
                    "0"
                }
            })
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(dir.path().join("adj.csv"), text).unwrap();

    for (flag, out) in [(None, "emb.csv"), (Some("--laplacian"), "lap.csv")] {
        let mut args = vec!["embed-graph", "adj.csv", "--dims", "2"];
        if let Some(f) = flag {
            args.push(f);
        }
        args.extend(["--out", out]);
        assert_code(&run_in(dir.path(), &args), 0);
    }

    let coords = read(&dir.path().join("emb.csv"));
    let rows: Vec<Vec<f64>> = coords
        .lines()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].len(), 2);
    // same clique, same coordinates; different cliques differ somewhere
    for i in 1..3 {
        assert!((rows[i][0] - rows[0][0]).abs() < 1e-8);
        assert!((rows[i][1] - rows[0][1]).abs() < 1e-8);
    }
    assert!(
        (rows[3][0] - rows[0][0]).abs() > 1e-6 || (rows[3][1] - rows[0][1]).abs() > 1e-6,
        "cliques must separate"
    );
    assert_ne!(coords, read(&dir.path().join("lap.csv")));
}

#[test]
fn compare_reports_six_methods_and_omits_ari_without_labels() {
    let dir = tempfile::tempdir().unwrap();
    write_pair_blobs(&dir.path().join("pts.csv"), 6);
    let labels: String = (0..12).map(|i| if i < 6 { "0\n" } else { "1\n" }).collect();
    std::fs::write(dir.path().join("truth.csv"), labels).unwrap();

    assert_code(
        &run_in(
            dir.path(),
            &[
                "compare",
                "pts.csv",
                "--labels",
                "truth.csv",
                // within-blob sized, so the run dwells at two clusters
                // instead of collapsing across the gap on the first pass
                "--epsilon",
                "0.001",
                "--seed",
                "3",
                "--out",
                "cmp.json",
            ],
        ),
        0,
    );
    let doc = read_json(&dir.path().join("cmp.json"));
    let methods: Vec<&str> = doc["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["method"].as_str().unwrap())
        .collect();
    assert_eq!(
        methods,
        [
            "condensation-early",
            "condensation-late",
            "kmeans",
            "minibatch-kmeans",
            "ward",
            "average"
        ]
    );
    // a trivially separated pair of blobs: every method nails it
    for entry in doc["entries"].as_array().unwrap() {
        assert_eq!(entry["ari"].as_f64().unwrap(), 1.0, "{}", entry["method"]);
    }

    assert_code(
        &run_in(dir.path(), &["compare", "pts.csv", "--out", "cmp2.json"]),
        0,
    );
    let doc = read_json(&dir.path().join("cmp2.json"));
    assert!(doc["entries"][0]["ari"].is_null());
}

#[test]
fn default_outputs_land_in_the_directory_named_by_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    write_pair_blobs(&dir.path().join("pts.csv"), 4);
    let outdir: PathBuf = dir.path().join("artifacts");
    let out = bin()
        .args(["condense", "pts.csv"])
        .current_dir(dir.path())
        .env("CONDENSATION_OUT_DIR", &outdir)
        .output()
        .unwrap();
    assert_code(&out, 0);
    assert!(outdir.join("trace.json").exists());
    assert!(outdir.join("trace.manifest.json").exists());
}
