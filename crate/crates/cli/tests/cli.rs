use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use handforge::dataset::DatasetManifest;
use handforge::eval::{AblationTable, Metrics, MetricReport, ModelIdentity};
use handforge::{Camera, DatasetPreset, RandomizationConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_handforge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Config with a small camera plus extra TOML appended verbatim.
fn small_config(dir: &Path, extra: &str) -> PathBuf {
    config_with_backgrounds(dir, None, extra)
}

fn config_with_backgrounds(dir: &Path, backgrounds: Option<&Path>, extra: &str) -> PathBuf {
    let r = RandomizationConfig {
        camera: Camera::default().with_size(48, 36),
        backgrounds_dir: backgrounds.map(Path::to_path_buf),
        ..Default::default()
    };
    let mut doc = toml::Table::new();
    doc.insert("randomization".into(), toml::Value::try_from(&r).unwrap());
    let path = dir.join("cfg.toml");
    std::fs::write(&path, format!("{}\n{extra}", toml::to_string(&doc).unwrap())).unwrap();
    path
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["generate", "--preset", "A", "--bogus", "--out", "x"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "--preset", "A", "--count", "0", "--out", "x"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "--preset", "Z", "--out", "x"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "--out", "x"]).status.code(), Some(1));
    assert_eq!(run(&["train", "--data", "x", "--lr", "1e-4", "--lr-search"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["train", "--data", s(&tmp.path().join("missing"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
}

#[test]
fn help_documents_every_flag() {
    let expected: &[(&str, &[&str])] = &[
        ("generate", &["--preset", "--count", "--seed", "--out", "--jobs", "--train-fraction", "--force", "--config"]),
        ("train", &["--data", "--lr", "--lr-search", "--lr-grid", "--patience", "--max-epochs", "--pixels-per-image", "--seed", "--out"]),
        ("eval", &["--model", "--ground-truth", "--data", "--split", "--out"]),
        ("ablate", &["--reports", "--run", "--count", "--seed", "--lr", "--patience", "--max-epochs", "--jobs", "--out"]),
        ("annotate", &["--images", "--port", "--host", "--out", "--ui"]),
        ("preview", &["--preset", "--seed", "--index", "--out"]),
    ];
    for (cmd, flags) in expected {
        let help = ok(&[cmd, "--help"]);
        for f in *flags {
            assert!(help.contains(f), "{cmd} --help lacks {f}");
        }
    }
}

#[test]
fn generate_is_repeatable_and_reports_split() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let mut runs = Vec::new();
    for (name, jobs) in [("a", "1"), ("b", "3")] {
        let out = tmp.path().join(name);
        let stdout = ok(&["--config", s(&cfg), "generate", "--preset", "D", "--count", "10", "--seed", "4", "--jobs", jobs, "--out", s(&out)]);
        assert!(stdout.contains("10 images (8 train, 2 val)"), "{stdout}");
        runs.push(files(&out));
    }
    assert_eq!(runs[0], runs[1]);
    // a second run into the same directory needs --force
    let again = run(&["--config", s(&cfg), "generate", "--preset", "D", "--count", "10", "--out", s(&tmp.path().join("a"))]);
    assert_eq!(again.status.code(), Some(1));
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "[generate]\npreset = \"B\"\ncount = 3\nseed = 9\n");
    let a = tmp.path().join("from_config");
    ok(&["--config", s(&cfg), "generate", "--out", s(&a)]);
    let m = DatasetManifest::read(&a).unwrap();
    assert_eq!((m.records.len(), m.seed, m.name.as_str()), (3, Some(9), "set_b"));

    let b = tmp.path().join("from_flags");
    ok(&["--config", s(&cfg), "generate", "--count", "2", "--preset", "C", "--out", s(&b)]);
    let m = DatasetManifest::read(&b).unwrap();
    assert_eq!((m.records.len(), m.seed, m.name.as_str()), (2, Some(9), "set_c"));

    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "[generate]\ncolour = 1\n").unwrap();
    assert_eq!(run(&["--config", s(&bad), "generate", "--preset", "A", "--out", s(&tmp.path().join("c"))]).status.code(), Some(1));
}

fn small_dataset(tmp: &Path, preset: &str, count: &str) -> (PathBuf, PathBuf) {
    let cfg = small_config(tmp, "");
    let data = tmp.join(format!("set_{preset}"));
    ok(&["--config", s(&cfg), "generate", "--preset", preset, "--count", count, "--seed", "1", "--out", s(&data)]);
    (cfg, data)
}

fn header_value(log: &str, key: &str) -> Option<String> {
    log.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
}

#[test]
fn train_defaults_and_zero_lr_sanity_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, data) = small_dataset(tmp.path(), "A", "10");
    let out = tmp.path().join("t0");
    let stdout = ok(&["train", "--data", s(&data), "--lr", "0", "--pixels-per-image", "64", "--out", s(&out)]);
    assert!(stdout.contains("patience 15 max_epochs 150"), "{stdout}");
    let log = std::fs::read_to_string(out.join("training_log.csv")).unwrap();
    assert_eq!(header_value(&log, "patience").as_deref(), Some("15"));
    assert_eq!(header_value(&log, "max_epochs").as_deref(), Some("150"));

    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(log.as_bytes());
    let totals: Vec<f64> = rd.records().map(|r| r.unwrap()[7].parse().unwrap()).collect();
    assert_eq!(totals.len(), 16, "no improvement after epoch 1");
    assert!(totals.iter().all(|&v| v == totals[0]), "flat history: {totals:?}");
    assert!(out.join("checkpoint.json").exists());
}

#[test]
fn lr_search_writes_per_rate_table() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, data) = small_dataset(tmp.path(), "A", "10");
    let out = tmp.path().join("search");
    let stdout = ok(&[
        "train", "--data", s(&data), "--lr-search", "--lr-grid", "1e-4,1e-3", "--patience", "2", "--max-epochs", "4",
        "--pixels-per-image", "64", "--out", s(&out),
    ]);
    assert!(stdout.contains("val_iou"), "{stdout}");
    let table = std::fs::read_to_string(out.join("lr_search.csv")).unwrap();
    let lrs: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(lrs, ["0.0001", "0.001"]);
    let out_of_range = run(&["train", "--data", s(&data), "--lr-search", "--lr-grid", "1e-2"]);
    assert_eq!(out_of_range.status.code(), Some(1));
}

#[test]
fn eval_ground_truth_is_perfect_and_missing_images_are_named() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, data) = small_dataset(tmp.path(), "B", "10");
    let gt = tmp.path().join("gt");
    ok(&["eval", "--ground-truth", "--data", s(&data), "--out", s(&gt)]);
    let r: MetricReport = serde_json::from_str(&std::fs::read_to_string(gt.join("report.json")).unwrap()).unwrap();
    assert_eq!((r.mean.iou, r.mean.precision, r.mean.recall), (1.0, 1.0, 1.0));
    assert_eq!(r.images.len(), 2, "defaults to the val split");
    for f in ["report.csv", "report.txt"] {
        assert!(gt.join(f).exists());
    }

    let model = tmp.path().join("model");
    ok(&["train", "--data", s(&data), "--max-epochs", "2", "--patience", "1", "--pixels-per-image", "32", "--out", s(&model)]);
    let victim = &r.images[0].image_id;
    std::fs::remove_file(data.join("images").join(format!("{victim}.png"))).unwrap();
    let out = run(&["eval", "--model", s(&model.join("checkpoint.json")), "--data", s(&data), "--out", s(&tmp.path().join("e"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(victim.as_str()));
}

fn fake_report(dir: &Path, name: &str, dataset: &str, preset: Option<DatasetPreset>, iou: f64) -> PathBuf {
    let r = MetricReport {
        dataset: dataset.into(),
        model: ModelIdentity { name: "m".into(), train_preset: preset },
        images: vec![],
        mean: Metrics { iou, precision: iou, recall: iou },
    };
    let p = dir.join(format!("{name}.json"));
    std::fs::write(&p, serde_json::to_string(&r).unwrap()).unwrap();
    p
}

#[test]
fn ablate_orders_rows_and_roundtrips_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let reports = [
        fake_report(d, "f", "real", Some(DatasetPreset::RealBackgrounds), 0.4),
        fake_report(d, "a", "real", Some(DatasetPreset::SolidBgHand), 0.1),
        fake_report(d, "c", "real", Some(DatasetPreset::PerlinNoise), 0.3),
        fake_report(d, "a2", "set_a", Some(DatasetPreset::SolidBgHand), 0.9),
    ];
    let out = d.join("grid");
    let mut args = vec!["ablate", "--out", s(&out), "--reports"];
    args.extend(reports.iter().map(|p| s(p)));
    ok(&args);
    let csv = std::fs::read_to_string(out.join("ablation.csv")).unwrap();
    let table = AblationTable::from_csv(&csv).unwrap();
    assert_eq!(table.rows.iter().map(|r| r.train.as_str()).collect::<Vec<_>>(), ["A", "C", "F"]);
    assert_eq!(table.to_csv(), csv);
}

#[test]
fn ablate_run_fills_the_full_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let bg = tmp.path().join("bg");
    std::fs::create_dir(&bg).unwrap();
    image::RgbImage::from_pixel(24, 18, image::Rgb([10, 120, 200])).save(bg.join("wall.png")).unwrap();
    let cfg = config_with_backgrounds(tmp.path(), Some(&bg), "");
    let out = tmp.path().join("abl");
    ok(&[
        "--config", s(&cfg), "ablate", "--run", "--count", "5", "--max-epochs", "2", "--patience", "1",
        "--pixels-per-image", "16", "--jobs", "1", "--out", s(&out),
    ]);
    let table = AblationTable::from_csv(&std::fs::read_to_string(out.join("ablation.csv")).unwrap()).unwrap();
    assert_eq!(table.rows.iter().map(|r| r.train.as_str()).collect::<Vec<_>>(), ["A", "B", "C", "D", "E", "F"]);
    assert_eq!(table.eval_sets, ["set_a", "set_b", "set_c", "set_d", "set_e", "set_f"]);
    assert!(table.rows.iter().all(|r| r.cells.iter().all(Option::is_some)));
}

#[test]
fn preview_writes_exactly_three_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out = tmp.path().join("p");
    ok(&["--config", s(&cfg), "preview", "--preset", "E", "--seed", "2", "--index", "5", "--out", s(&out)]);
    let mut names: Vec<_> = files(&out).into_iter().map(|(p, _)| p.to_str().unwrap().to_string()).collect();
    names.sort();
    assert_eq!(names, ["mask.png", "overlay.png", "rgb.png"]);
    let first = files(&out);
    ok(&["--config", s(&cfg), "preview", "--preset", "E", "--seed", "2", "--index", "5", "--out", s(&out)]);
    assert_eq!(files(&out), first);
}

fn http(addr: &str, method: &str, path: &str, body: &str) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut resp = String::new();
    stream.read_to_string(&mut resp).unwrap();
    let status = resp.split(' ').nth(1).unwrap().parse().unwrap();
    (status, resp.split_once("\r\n\r\n").map(|(_, b)| b.to_string()).unwrap_or_default())
}

fn spawn_annotate(images: &Path, out: &Path) -> (std::process::Child, String) {
    let mut child = bin()
        .args(["annotate", "--images", s(images), "--port", "0", "--out", s(out)])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.as_mut().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").expect(&line).to_string();
    (child, addr)
}

#[test]
fn annotate_serves_and_shuts_down_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let (mut child, addr) = spawn_annotate(&empty, &tmp.path().join("a0"));
    assert_eq!(http(&addr, "GET", "/api/images", ""), (200, "[]".into()));
    child.kill().unwrap();
    child.wait().unwrap();

    let images = tmp.path().join("imgs");
    std::fs::create_dir(&images).unwrap();
    image::RgbImage::from_pixel(20, 10, image::Rgb([1, 2, 3])).save(images.join("cam_01.png")).unwrap();
    let out = tmp.path().join("a1");
    let (mut child, addr) = spawn_annotate(&images, &out);
    let doc = r#"{"image_id":"cam_01","rings":[[[2,2],[12,2],[12,8],[2,8]]]}"#;
    assert_eq!(http(&addr, "PUT", "/api/annotations/cam_01", doc).0, 200);
    assert_eq!(http(&addr, "POST", "/api/export", "").0, 200);

    let status = Command::new("kill").args(["-INT", &child.id().to_string()]).status().unwrap();
    assert!(status.success());
    let exit = child.wait().unwrap();
    assert_eq!(exit.code(), Some(0));

    let session = handforge_annotate::AnnotationSession::open(&images, &out.join("store"), &out.join("annotations.json")).unwrap();
    let a = session.get_annotation("cam_01").unwrap().unwrap();
    assert_eq!(a.state, handforge_annotate::AnnotationState::Committed);
    assert_eq!(a.area, 60);
    let m = DatasetManifest::read(&out).unwrap();
    assert_eq!(m.records.len(), 1);
}

#[test]
fn annotate_on_a_busy_port_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port().to_string();
    let out = run(&["annotate", "--images", s(tmp.path()), "--port", &port, "--out", s(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bind"));
}
