use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn orthoview(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orthoview"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn shape(dir: &Path, name: &str, kind: &str, seed: u64) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap();
    let o = orthoview(&[
        "generate",
        "shape",
        kind,
        "--out",
        p,
        "--points",
        "1500",
        "--seed",
        &seed.to_string(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    p.to_owned()
}

#[test]
fn feature_writes_feat_file_and_views() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = shape(dir.path(), "box.pcd", "box:4,2,1", 3);
    let views = dir.path().join("views");
    let o = orthoview(&["feature", &cloud, "--views", views.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("box.feat")).unwrap();
    let values: Vec<f64> = text.split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert_eq!(values.len(), 8 * 8 * 10);
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-9);
    for v in ["front", "top", "right"] {
        let pgm = std::fs::read(views.join(format!("box.{v}.pgm"))).unwrap();
        assert!(pgm.starts_with(b"P5\n64 64\n255\n"));
    }
}

#[test]
fn feature_on_collinear_cloud_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.xyz");
    let text: String = (0..10).map(|i| format!("{i} 0 0\n")).collect();
    std::fs::write(&path, text).unwrap();
    let o = orthoview(&["feature", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate reference frame"));
}

#[test]
fn malformed_cloud_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.pcd");
    std::fs::write(&path, "VERSION .7\nFIELDS x y z\nPOINTS 3\nDATA ascii\n1 2 3\n").unwrap();
    let o = orthoview(&["feature", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn teach_session_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mug = shape(dir.path(), "mug.ply", "cylinder:1,1.5", 1);
    let pen = shape(dir.path(), "pen.xyz", "cylinder:0.1,3", 2);
    let memory = dir.path().join("memory.json");
    let script = format!(
        "teach mug {mug}\nteach pen {pen}\nask {mug}\nforget cup\nstats\nforget pen\nstats\nsave {}\nquit\nask {mug}\n",
        memory.display()
    );
    let mut child = Command::new(env!("CARGO_BIN_EXE_orthoview"))
        .arg("teach")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(script.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines[0], "taught mug (1 instances)");
    assert_eq!(lines[1], "taught pen (1 instances)");
    assert_eq!(lines[2], "mug (distance 0.0000)");
    assert_eq!(lines[3], "error: unknown label");
    assert_eq!(lines[4], "2 categories, 2 instances, 1.00 per category: mug=1 pen=1");
    assert_eq!(lines[5], "forgot pen");
    assert_eq!(lines[6], "1 categories, 1 instances, 1.00 per category: mug=1");
    assert!(lines[7].starts_with("saved "));
    assert_eq!(lines.len(), 8, "nothing after quit");

    // Reloading the snapshot restores the memory.
    let mut child = Command::new(env!("CARGO_BIN_EXE_orthoview"))
        .args(["teach", "--memory", memory.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(format!("ask {pen}\n").as_bytes())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(stdout(&o).starts_with("mug (distance "));
}

#[test]
fn teach_reports_unknown_past_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let mug = shape(dir.path(), "mug.pcd", "cylinder:1,1.5", 1);
    let plank = shape(dir.path(), "plank.pcd", "box:6,1,0.2", 2);
    let mut child = Command::new(env!("CARGO_BIN_EXE_orthoview"))
        .args(["teach", "--tau-unknown", "0.01"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(format!("teach mug {mug}\nask {plank}\n").as_bytes())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(stdout(&o).lines().nth(1), Some("unknown"));
}

#[test]
fn grasp_learn_then_query() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = shape(dir.path(), "box.pcd", "box:4,2,1", 5);
    let other = shape(dir.path(), "can.pcd", "cylinder:1,3", 6);
    let store = dir.path().join("grasps.json");
    let store = store.to_str().unwrap();
    let o = orthoview(&[
        "grasp", "learn", &cloud, "--store", store, "--label", "pinch", "--pose", "0.5", "-0.25", "0.5", "1", "0", "0",
        "0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = orthoview(&["grasp", "query", &cloud, "--store", store]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let fields: Vec<&str> = out.split_whitespace().collect();
    assert_eq!(fields.len(), 9);
    assert_eq!(fields[0], "pinch");
    let expected = [0.5, -0.25, 0.5, 1.0, 0.0, 0.0, 0.0];
    for (f, e) in fields[1..8].iter().zip(expected) {
        assert!((f.parse::<f64>().unwrap() - e).abs() < 1e-6, "{out}");
    }
    assert!((fields[8].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);

    let o = orthoview(&["grasp", "query", &other, "--store", store, "--tau", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("not familiar"));
}

#[test]
fn protocol_writes_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let o = orthoview(&[
        "generate",
        "dataset",
        "--out",
        data.to_str().unwrap(),
        "--categories",
        "3",
        "--instances",
        "8",
        "--points",
        "800",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        "# three shapes\ndataset = data\nresolution = 32\nblocks = 4\nseeds = 1,2\nout = out_a\n",
    )
    .unwrap();
    let o = orthoview(&["protocol", "--config", config.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);

    let out_b = dir.path().join("out_b");
    let o = orthoview(&[
        "protocol",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_b.to_str().unwrap(),
    ]);
    assert!(o.status.success());

    let out_a = dir.path().join("out_a");
    for seed in [1, 2] {
        let a = std::fs::read(out_a.join(format!("events_seed{seed}.jsonl"))).unwrap();
        let b = std::fs::read(out_b.join(format!("events_seed{seed}.jsonl"))).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b);
        let report = std::fs::read_to_string(out_a.join(format!("report_seed{seed}.json"))).unwrap();
        assert!(report.contains("\"termination\""));
    }
    let csv = std::fs::read_to_string(out_a.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("seed,termination,"));
    assert!(out_a.join("summary.json").is_file());
}

#[test]
fn protocol_missing_dataset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let o = orthoview(&["protocol", "--dataset", missing.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does not exist"));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(orthoview(&["feature"]).status.code(), Some(2));
    assert_eq!(orthoview(&["protocol", "--metric", "manhattan"]).status.code(), Some(2));
}

#[test]
fn feature_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = shape(dir.path(), "can.ply", "cylinder:1,3", 4);
    let a = dir.path().join("a.feat");
    let b = dir.path().join("b.feat");
    for out in [&a, &b] {
        assert!(orthoview(&["feature", &cloud, "--out", out.to_str().unwrap()])
            .status
            .success());
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn feature_on_sphere_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = shape(dir.path(), "sphere.pcd", "sphere:1", 2);
    let o = orthoview(&["feature", &cloud]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate reference frame"));
}

#[test]
fn ask_on_empty_memory_is_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = shape(dir.path(), "x.pcd", "box:4,2,1", 1);
    let mut child = Command::new(env!("CARGO_BIN_EXE_orthoview"))
        .arg("teach")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(format!("ask {cloud}\nbogus\nask /no/such.pcd\n").as_bytes())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "unknown");
    assert!(lines[1].starts_with("error: "));
    assert!(lines[2].starts_with("error: "));
}
