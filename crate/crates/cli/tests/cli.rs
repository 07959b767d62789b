use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn visval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_visval")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn sample(dir: &Path, seed: &str) -> PathBuf {
    let out = dir.join(format!("scene_{seed}.json"));
    let o = visval(&["--seed", seed, "sample", s(&configs().join("city.json")), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

/// Small OC protocol on the street preset.
fn protocol(dir: &Path) -> PathBuf {
    let path = dir.join("oc.json");
    let text = r#"{
        "model": "OC",
        "source": { "simulate": { "preset": "street" } },
        "render": { "width": 48, "height": 36, "samples_per_pixel": 2 },
        "theta_w": [{ "name": "illumination_level", "values": [0.5, 2.0] }],
        "sides": [3, 5],
        "patches_per_cell": 4
    }"#;
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn sampling_replays_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = fs::read(sample(dir.path(), "5")).unwrap();
    let again = dir.path().join("again.json");
    visval(&["--seed", "5", "sample", s(&configs().join("city.json")), "--out", s(&again)]);
    assert_eq!(a, fs::read(&again).unwrap());
    assert_ne!(a, fs::read(sample(dir.path(), "6")).unwrap());
    assert!(dir.path().join("scene_5.manifest.json").is_file());
}

#[test]
fn renders_replay_and_ground_truth_ignores_spp() {
    let dir = tempfile::tempdir().unwrap();
    let scene = sample(dir.path(), "1");
    let render = |name: &str, spp: &str| {
        let out = dir.path().join(name);
        let o = visval(&[
            "--seed", "3", "render", s(&scene), "--spp", spp, "--width", "32", "--height", "24", "--frames", "0..1",
            "--out-dir", s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b, c) = (render("a", "2"), render("b", "2"), render("c", "4"));
    for f in ["frame_0000.pfm", "frame_0000.ppm", "frame_0001.ppm"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_ne!(fs::read(a.join("frame_0000.pfm")).unwrap(), fs::read(c.join("frame_0000.pfm")).unwrap());
    for f in ["frame_0000.depth.pfm", "frame_0000.normal.pfm", "frame_0000.reflectance.pfm", "frame_0000.ids.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(c.join(f)).unwrap(), "{f}");
    }

    let sidecar: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("frame_0001.json")).unwrap()).unwrap();
    assert_eq!(sidecar["frame"], 1);
    assert_eq!(sidecar["seed"], 3);
    assert_eq!(sidecar["render"]["samples_per_pixel"], 2);
    for file in sidecar["files"].as_object().unwrap().values() {
        assert!(a.join(file.as_str().unwrap()).is_file(), "{file}");
    }
    assert!(sidecar["files"].get("flow").is_none(), "last frame has no successor");
    let first: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("frame_0000.json")).unwrap()).unwrap();
    assert!(first["files"].get("flow").is_some());
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let scene = sample(dir.path(), "2");
    let out = dir.path().join("dry");
    let o = visval(&["--dry-run", "--porcelain", "render", s(&scene), "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!(!out.exists());
    let listed = String::from_utf8(o.stdout).unwrap();
    assert!(listed.lines().any(|l| l.ends_with("frame_0000.ppm")));
    assert!(listed.lines().any(|l| l.ends_with("manifest.json")));

    let o = visval(&["--dry-run", "--porcelain", "sweep", s(&protocol(dir.path())), "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0);
    let plan: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(plan["cells"], 2);
    assert!(!out.exists());
}

#[test]
fn resumed_sweeps_match_fresh_ones() {
    let dir = tempfile::tempdir().unwrap();
    let p = protocol(dir.path());
    let out = dir.path().join("run");
    assert_eq!(code(&visval(&["sweep", s(&p), "--out-dir", s(&out)])), 0);
    let first = fs::read(out.join("manifold.csv")).unwrap();
    // drop one cached cell so the second run recomputes it and reuses the other
    let cells: Vec<_> = fs::read_dir(out.join("cells")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(cells.len(), 2);
    fs::remove_file(&cells[0]).unwrap();
    assert_eq!(code(&visval(&["sweep", s(&p), "--out-dir", s(&out)])), 0);
    assert_eq!(first, fs::read(out.join("manifold.csv")).unwrap());
    let fresh = dir.path().join("fresh");
    assert_eq!(code(&visval(&["sweep", s(&p), "--out-dir", s(&fresh), "--no-cache"])), 0);
    assert_eq!(first, fs::read(fresh.join("manifold.csv")).unwrap());
}

#[test]
fn comparing_a_manifold_with_itself() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(code(&visval(&["sweep", s(&protocol(dir.path())), "--out-dir", s(&out)])), 0);
    let m = out.join("manifold.csv");
    let o = visval(&["compare", s(&m), s(&m)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["comparison"]["correlation"], 1.0);

    // a manifold missing one context cannot be compared label for label
    let text = fs::read_to_string(&m).unwrap();
    let dropped = report["comparison"]["labels"][0].as_str().unwrap().to_string();
    let fewer: String = text.lines().filter(|l| !l.starts_with(&format!("OC,{dropped},"))).map(|l| format!("{l}\n")).collect();
    let other = dir.path().join("fewer.csv");
    fs::write(&other, fewer).unwrap();
    let o = visval(&["compare", s(&m), s(&other)]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));

    let rep = dir.path().join("report");
    let o = visval(&["report", s(&m), "--out-dir", s(&rep), "--marginalize", "illumination_level"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(rep.join("report.json").is_file());
}

#[test]
fn exit_codes_follow_failure_kind() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{ "model": "OC", "source": { "simulate": { "preset": "street" } }, "sides": [4] }"#).unwrap();
    assert_eq!(code(&visval(&["sweep", s(&bad), "--out-dir", s(&dir.path().join("x"))])), 2);
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&visval(&["sample", s(&bad), "--out", s(&dir.path().join("y.json"))])), 2);

    // a building far larger than the world cannot be placed
    let text = fs::read_to_string(configs().join("city.json")).unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&text).unwrap();
    cfg["world_bounds"]["max"] = serde_json::json!([8.0, 8.0]);
    cfg["roads"] = serde_json::json!([]);
    cfg.as_object_mut().unwrap().remove("camera");
    fs::write(&bad, cfg.to_string()).unwrap();
    let o = visval(&["sample", s(&bad), "--out", s(&dir.path().join("z.json"))]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(code(&visval(&["render", s(&dir.path().join("missing.json")), "--out-dir", s(dir.path())])), 1);
}
