use std::path::{Path, PathBuf};
use std::process::Command;

use stitlab::cli::config::ExperimentConfig;
use stitlab::cli::main_with_args;
use stitlab::geometry::{segment_in_ball, Point};
use stitlab::mnw::Tessellation;

const SIMULATE_SMALL: &str = r#"{
  "experiment": "simulate",
  "dimension": 2,
  "window": {"kind": "ball", "radius": 2},
  "t": 3,
  "seed": 7,
  "checkpoints": [1, 2],
  "output": {"stem": "small", "stroke_by_birth": true}
}"#;

const VERIFY_SMALL: &str = r#"{
  "experiment": "verify",
  "dimension": 2,
  "window": {"kind": "box", "lo": [0, 0], "hi": [4, 4]},
  "t": 2,
  "replicates": 40,
  "seed": 3,
  "output": {"stem": "verify-small"}
}"#;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compares with the stored file; `STITLAB_BLESS=1` rewrites it instead.
fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var("STITLAB_BLESS").is_ok_and(|v| v == "1") {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from the golden file");
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stitlab(args: &[&str]) -> i32 {
    let mut v = vec!["stitlab"];
    v.extend_from_slice(args);
    main_with_args(v)
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn config_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::from_file(&path).unwrap();
        let again = ExperimentConfig::from_json_str(&cfg.to_json_pretty()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
    }
}

#[test]
fn config_errors_are_reported() {
    let e =
        ExperimentConfig::from_json_str("{\n  \"experiment\": \"verify\",\n  oops\n}").unwrap_err();
    assert!(e.to_string().contains("line 3"), "{e}");
    let bad_t = VERIFY_SMALL.replace("\"t\": 2", "\"t\": -1");
    assert!(ExperimentConfig::from_json_str(&bad_t).is_err());
    let unknown = VERIFY_SMALL.replace("\"seed\": 3", "\"seed\": 3, \"colour\": 1");
    assert!(ExperimentConfig::from_json_str(&unknown).is_err());
    let bad_dim = VERIFY_SMALL.replace("\"dimension\": 2", "\"dimension\": 4");
    assert!(ExperimentConfig::from_json_str(&bad_dim).is_err());
}

#[test]
fn simulate_and_render_match_golden_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sim.json", SIMULATE_SMALL);
    let out = tmp.path().to_str().unwrap();
    assert_eq!(
        stitlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out]),
        0
    );
    let tess = tmp.path().join("small.tessellation.json");
    assert_eq!(
        stitlab(&[
            "render",
            "--input",
            tess.to_str().unwrap(),
            "--format",
            "svg",
            "--stroke-by-birth",
            "--out",
            out
        ]),
        0
    );
    check_golden("small.svg", &read(tmp.path().join("small.svg")));
    let y = Tessellation::<f64>::from_json(&read(&tess)).unwrap();
    assert!((y.cell_volume_sum() - 16.0).abs() < 1e-9);
    let svg = read(tmp.path().join("small.svg"));
    let hits = y
        .i_facets
        .iter()
        .filter(|f| {
            segment_in_ball(
                &f.facet.vertices[0],
                &f.facet.vertices[1],
                &Point::zero(),
                2.0,
            ) > 0.0
        })
        .count();
    assert!(hits > 0);
    assert_eq!(svg.matches("<line").count(), hits);
    assert_eq!(svg.matches("<circle").count(), 1);
}

#[test]
fn verify_report_matches_golden_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "v.json", VERIFY_SMALL);
    let out = tmp.path().to_str().unwrap();
    let code = stitlab(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out,
        "--threads",
        "1",
    ]);
    assert!(code == 0 || code == 1);
    check_golden(
        "verify-small.csv",
        &read(tmp.path().join("verify-small.csv")),
    );
    check_golden(
        "verify-small.json",
        &read(tmp.path().join("verify-small.json")),
    );
    let metrics: serde_json::Value =
        serde_json::from_str(&read(tmp.path().join("verify-small.metrics.json"))).unwrap();
    assert_eq!(metrics["threads"], 1);
}

#[test]
fn outputs_do_not_depend_on_the_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "v.json", VERIFY_SMALL);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let dir = tmp.path().join(threads);
        let d = dir.to_str().unwrap();
        stitlab(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d,
            "--threads",
            threads,
        ]);
        outputs.push((
            read(dir.join("verify-small.csv")),
            read(dir.join("verify-small.json")),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sim.json", SIMULATE_SMALL);
    let c = cfg.to_str().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    stitlab(&["simulate", "--config", c, "--out", a.to_str().unwrap()]);
    stitlab(&[
        "simulate",
        "--config",
        c,
        "--seed",
        "8",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_ne!(
        read(a.join("small.tessellation.json")),
        read(b.join("small.tessellation.json"))
    );
}

#[test]
fn exit_codes() {
    let bin = env!("CARGO_BIN_EXE_stitlab");
    let tmp = tempfile::tempdir().unwrap();
    let status = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .output()
            .unwrap()
            .status
            .code()
            .unwrap()
    };
    // missing config file, malformed config, wrong subcommand for the kind
    assert_eq!(status(&["verify", "--config", "/nonexistent.json"]), 2);
    let bad = write_config(tmp.path(), "bad.json", "{ not json");
    assert_eq!(status(&["verify", "--config", bad.to_str().unwrap()]), 2);
    let v = write_config(tmp.path(), "v.json", VERIFY_SMALL);
    assert_eq!(status(&["clt", "--config", v.to_str().unwrap()]), 2);
    assert_eq!(status(&["no-such-command"]), 2);
    // a deliberately wrong target cannot be hit: a tiny z_max fails any nonzero z
    let strict = write_config(
        tmp.path(),
        "s.json",
        &VERIFY_SMALL.replace("\"seed\": 3", "\"seed\": 3, \"z_max\": 1e-9"),
    );
    let out = tmp.path().join("o");
    assert_eq!(
        status(&[
            "verify",
            "--config",
            strict.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        1
    );
    assert_eq!(
        status(&[
            "verify",
            "--config",
            v.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    let dump = Command::new(bin)
        .args(["formulas", "dump"])
        .output()
        .unwrap();
    assert_eq!(dump.status.code(), Some(0));
    assert!(String::from_utf8(dump.stdout)
        .unwrap()
        .starts_with("id,params,value,provenance\n"));
}

#[test]
fn ply_has_one_face_per_facet() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s3.json",
        r#"{"experiment": "simulate", "dimension": 3,
            "window": {"kind": "box", "lo": [0, 0, 0], "hi": [2, 2, 2]},
            "t": 2, "seed": 1, "output": {"stem": "s3"}}"#,
    );
    let out = tmp.path().to_str().unwrap();
    assert_eq!(
        stitlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out]),
        0
    );
    let tess = tmp.path().join("s3.tessellation.json");
    assert_eq!(
        stitlab(&[
            "render",
            "--input",
            tess.to_str().unwrap(),
            "--format",
            "ply",
            "--out",
            out
        ]),
        0
    );
    let y = Tessellation::<f64>::from_json(&read(&tess)).unwrap();
    let ply = read(tmp.path().join("s3.ply"));
    let header = format!("element face {}\n", y.i_facets.len());
    assert!(ply.contains(&header));
    let body = ply.split("end_header\n").nth(1).unwrap();
    let nv: usize = y.i_facets.iter().map(|f| f.facet.vertices.len()).sum();
    assert_eq!(body.lines().count(), nv + y.i_facets.len());
    // SVG needs a planar tessellation
    assert_eq!(
        stitlab(&[
            "render",
            "--input",
            tess.to_str().unwrap(),
            "--format",
            "svg",
            "--out",
            out
        ]),
        2
    );
}

#[test]
fn empty_tessellation_renders_the_outline_only() {
    let tmp = tempfile::tempdir().unwrap();
    // t so small that no split happens with overwhelming probability
    let body = r#"{"experiment": "simulate", "dimension": 2,
        "window": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
        "t": 1e-9, "seed": 1, "output": {"stem": "empty"}}"#;
    let cfg = write_config(tmp.path(), "e.json", body);
    let out = tmp.path().to_str().unwrap();
    assert_eq!(
        stitlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out]),
        0
    );
    let tess = tmp.path().join("empty.tessellation.json");
    let y = Tessellation::<f64>::from_json(&read(&tess)).unwrap();
    assert!(y.i_facets.is_empty());
    assert_eq!(
        stitlab(&[
            "render",
            "--input",
            tess.to_str().unwrap(),
            "--format",
            "svg",
            "--out",
            out
        ]),
        0
    );
    let svg = read(tmp.path().join("empty.svg"));
    // the four sides of the square and nothing else
    assert_eq!(svg.matches("<line").count(), 4);
}
