use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use freqgan_core::io::{load_png, save_png};
use freqgan_core::ImageGrid;
use freqgan_train::{DatasetSpec, TrainConfig};

fn freqgan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqgan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = freqgan(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn fails_with(args: &[&str], kind: &str) -> String {
    let out = freqgan(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    let lines: Vec<&str> = err.lines().filter(|l| l.starts_with("error: ")).collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with(&format!("error: {kind}: ")), "{err}");
    err
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tiny_config(steps: usize) -> TrainConfig {
    TrainConfig {
        steps,
        batch: 4,
        latent_dim: 8,
        width: 4,
        dataset_samples: 16,
        eval_samples: 8,
        bias_samples: 8,
        export_samples: 2,
        checkpoint_every: 0,
        seed: 3,
        dataset: DatasetSpec::Synthetic {
            alpha: 2.0,
            edge_density: 0.3,
            size: 16,
        },
        ..TrainConfig::default()
    }
}

fn write_config(dir: &Path, cfg: &TrainConfig) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, cfg.to_text()).unwrap();
    path
}

#[test]
fn decompose_then_mix_reproduces_input() {
    let dir = tempfile::tempdir().unwrap();
    let x = ImageGrid::from_fn(16, 16, 1, |_, i, j| {
        0.4 * (i as f64 * 0.7).sin() * (j as f64 * 0.3).cos() + 0.1 * ((i * j) % 5) as f64 / 5.0
    })
    .unwrap();
    let input = dir.path().join("x.png");
    save_png(&x, &input).unwrap();
    let before = fs::read(&input).unwrap();

    let parts = dir.path().join("parts");
    ok(&[
        "decompose",
        "--in",
        s(&input),
        "--radius",
        "4",
        "--out",
        s(&parts),
    ]);
    let ranges = fs::read_to_string(parts.join("ranges.txt")).unwrap();
    assert!(ranges.contains("clamped = false"), "{ranges}");

    let mixed = dir.path().join("mixed.png");
    ok(&[
        "mix",
        "--low",
        s(&parts.join("low.png")),
        "--high",
        s(&parts.join("high.png")),
        "--radius",
        "4",
        "--out",
        s(&mixed),
    ]);
    let err = load_png(&mixed)
        .unwrap()
        .max_abs_diff(&load_png(&input).unwrap());
    assert!(err <= 1.0 / 127.5, "{err}");
    assert_eq!(fs::read(&input).unwrap(), before);
}

#[test]
fn bias_of_a_directory_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    ok(&[
        "synth",
        "--n",
        "6",
        "--size",
        "16",
        "--seed",
        "2",
        "--out",
        s(&corpus),
    ]);
    let csv = dir.path().join("bias.csv");
    let plot = dir.path().join("bias.png");
    ok(&[
        "bias",
        "--real",
        s(&corpus),
        "--fake",
        s(&corpus),
        "--out",
        s(&csv),
        "--plot",
        s(&plot),
    ]);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bin,bias_db"));
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 12);
    assert!(values.iter().all(|&v| v == 0.0));
    assert!(plot.exists());
}

#[test]
fn spectrum_and_rps_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    ok(&["synth", "--n", "3", "--size", "16", "--out", s(&corpus)]);
    let first = corpus.join("synth_00000.png");
    let ps = dir.path().join("ps.csv");
    ok(&["spectrum", "--in", s(&first), "--out", s(&ps)]);
    assert_eq!(fs::read_to_string(&ps).unwrap().lines().count(), 1 + 256);
    let rps = dir.path().join("rps.csv");
    ok(&["rps", "--in", s(&corpus), "--out", s(&rps)]);
    let text = fs::read_to_string(&rps).unwrap();
    assert!(text.starts_with("bin,power_db,count\n0,"));
    assert_eq!(text.lines().count(), 1 + 12);
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&[
            "synth",
            "--n",
            "4",
            "--size",
            "16",
            "--seed",
            "9",
            "--alpha",
            "1.5",
            "--out",
            s(out),
        ]);
    }
    for k in 0..4 {
        let name = format!("synth_{k:05}.png");
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap()
        );
    }
}

#[test]
fn train_echo_probe_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(1);
    let config = write_config(dir.path(), &cfg);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["train", "--config", s(&config), "--out", s(&a)]);
    ok(&["train", "--config", s(&config), "--out", s(&b)]);
    assert_eq!(
        fs::read(a.join("config.txt")).unwrap(),
        fs::read(&config).unwrap()
    );
    for f in [
        "metrics.csv",
        "bias_curve.csv",
        "summary.txt",
        "checkpoints/final.ckpt",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }

    let corpus = dir.path().join("reals");
    ok(&["synth", "--n", "5", "--size", "16", "--out", s(&corpus)]);
    let probe_csv = dir.path().join("probe.csv");
    ok(&[
        "probe",
        "--checkpoint",
        s(&a.join("checkpoints/final.ckpt")),
        "--primary",
        s(&corpus),
        "--donor",
        s(&a.join("samples")),
        "--radii",
        "1,4,12",
        "--out",
        s(&probe_csv),
    ]);
    let text = fs::read_to_string(&probe_csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    for v in &last[2..5] {
        assert!((v - last[1]).abs() <= 1e-10);
    }
}

#[test]
fn experiment_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &tiny_config(2));
    let csv = dir.path().join("grid.csv");
    ok(&[
        "experiment",
        "--config",
        s(&config),
        "--radii",
        "2,12",
        "--placements",
        "fake_only,all",
        "--out",
        s(&csv),
    ]);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
    assert!(dir.path().join("grid_summary.txt").exists());
}

#[test]
fn errors_are_single_prefixed_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    fails_with(&["synth", "--bogus", "1", "--out", s(&out)], "usage");
    fails_with(&["frobnicate"], "usage");
    fails_with(
        &[
            "decompose",
            "--in",
            s(&dir.path().join("missing.png")),
            "--radius",
            "2",
            "--out",
            s(&out),
        ],
        "input",
    );
    let img = dir.path().join("x.png");
    save_png(&ImageGrid::zeros(8, 8, 1).unwrap(), &img).unwrap();
    fails_with(
        &[
            "decompose",
            "--in",
            s(&img),
            "--radius",
            "-1",
            "--out",
            s(&out),
        ],
        "usage",
    );
    assert!(!out.exists());

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "steps = 10\nwarp_drive = on\n").unwrap();
    let msg = fails_with(&["train", "--config", s(&bad), "--out", s(&out)], "config");
    assert!(msg.contains("warp_drive"));
    fails_with(
        &[
            "train",
            "--config",
            s(&dir.path().join("nope.cfg")),
            "--out",
            s(&out),
        ],
        "input",
    );
    fails_with(
        &[
            "experiment",
            "--config",
            s(&bad),
            "--radii",
            "2",
            "--placements",
            "sideways",
            "--out",
            s(&out.join("e.csv")),
        ],
        "usage",
    );
    assert!(!out.exists());
}

#[test]
fn help_exits_zero() {
    let out = freqgan(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("decompose"));
}
