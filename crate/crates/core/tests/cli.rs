use std::path::{Path, PathBuf};
use std::process::Command;

use wavelet_vlasov::error::Error;
use wavelet_vlasov::grid::{Axis, NodeKind, PhaseGrid};
use wavelet_vlasov::io::driver::{execute, Overrides};
use wavelet_vlasov::io::output::{
    read_mesh, read_snapshot, read_timeseries, write_mesh, write_snapshot, SNAPSHOT_HEADER,
};
use wavelet_vlasov::io::{parse_config, RunConfig};
use wavelet_vlasov::mra::Boundary;
use wavelet_vlasov::mra2d::{Grid2, SparseRep};
use wavelet_vlasov::scenarios::ScenarioConfig;
use wavelet_vlasov::semilag::Splitting;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wavelet-vlasov"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = "scenario = \"two_stream\"\nj0 = 2\nj1 = 5\ndt = 0.125\nn_steps = 3\n";

#[test]
fn empty_run_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), &SMALL.replace("n_steps = 3", "n_steps = 0"));
    let status = bin().arg("run").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let rows = read_timeseries(&out.join("timeseries.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].t, 0.0);
    assert_eq!(rows[0].ratio, 1.0);
    assert!(out.join("snapshot_000000.csv").exists());
}

#[test]
fn adaptive_run_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}output_dir = \"unused\"\n"));
    let out = dir.path().join("adaptive");
    let status = bin()
        .args(["run"])
        .arg(&cfg)
        .args(["--eps", "1e-4", "--steps", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(!dir.path().join("unused").exists());
    let rows = read_timeseries(&out.join("timeseries.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.t).collect::<Vec<_>>(), vec![0.0, 0.125, 0.25]);
    assert!(rows.iter().all(|r| r.ratio > 0.0 && r.ratio <= 1.0));
    for name in ["snapshot_000000.csv", "snapshot_000002.csv", "mesh_000000.csv", "mesh_000002.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let mesh = read_mesh(&out.join("mesh_000002.csv")).unwrap();
    assert_eq!(mesh.len(), rows[2].active);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}eps = 1e-5\n"));
    let read = |name: &str| {
        let out = dir.path().join(name);
        assert!(bin().arg("run").arg(&cfg).arg("--out").arg(&out).status().unwrap().success());
        std::fs::read(out.join("timeseries.csv")).unwrap()
    };
    let (a, b) = (read("a"), read("b"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert!(!a.contains(&b'\r'));
}

#[test]
fn missing_config_is_a_config_error() {
    let out = bin().args(["run", "/nonexistent/missing.cfg"]).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("config error"), "{stderr}");
    assert_eq!(stderr.trim_end().lines().count(), 1);
}

#[test]
fn bad_key_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("j1 = 5", "j1 = 2"));
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2") && stderr.contains("`j0`"), "{stderr}");
}

#[test]
fn transform_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = PhaseGrid::new(
        Axis::new(0.0, 1.0, 1, Boundary::Periodic),
        Axis::new(0.0, 1.0, 1, Boundary::Periodic),
        4,
        7,
        1,
    )
    .unwrap();
    let f = Grid2::from_fn(128, 128, |i, j| ((i * 7 + j * 13) % 17) as f64 / 17.0 - 0.3);
    let input = dir.path().join("in.csv");
    let output = dir.path().join("out.csv");
    let mesh = dir.path().join("mesh.csv");
    write_snapshot(&grid, &f, &input).unwrap();
    let status = bin()
        .arg("transform")
        .arg(&input)
        .arg(&output)
        .args(["--j0", "4", "--j1", "7", "--n", "1", "--eps", "0", "--mesh"])
        .arg(&mesh)
        .status()
        .unwrap();
    assert!(status.success());
    let a = read_snapshot(&input).unwrap();
    let b = read_snapshot(&output).unwrap();
    assert_eq!(a.len(), b.len());
    for (p, q) in a.iter().zip(&b) {
        assert_eq!((p.x, p.v), (q.x, q.v));
        assert!((p.f - q.f).abs() <= 1e-12);
    }
    assert_eq!(read_mesh(&mesh).unwrap().len(), 128 * 128);
}

#[test]
fn transform_rejects_bad_levels() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, format!("{SNAPSHOT_HEADER}\n0,0,1\n0,1,1\n1,0,1\n1,1,1\n")).unwrap();
    let out = bin()
        .arg("transform")
        .arg(&input)
        .arg(dir.path().join("o.csv"))
        .args(["--j0", "1", "--j1", "3"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("numerical error"));
}

#[test]
fn coarse_only_mesh_dump() {
    let dir = tempfile::tempdir().unwrap();
    let grid = PhaseGrid::new(
        Axis::new(0.0, 1.0, 1, Boundary::Periodic),
        Axis::new(0.0, 1.0, 1, Boundary::Periodic),
        4,
        6,
        1,
    )
    .unwrap();
    let rep = SparseRep::from_dense(&grid, &Grid2::from_fn(64, 64, |_, _| 0.5), 1e-8).unwrap();
    let path = dir.path().join("mesh.csv");
    write_mesh(&rep, &path).unwrap();
    let rows = read_mesh(&path).unwrap();
    assert_eq!(rows.len(), 256);
    assert!(rows.iter().all(|r| r.kind == NodeKind::Coarse && r.level == 4 && r.value == 0.5));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("level,k1,k2,kind,value,detail\n"));
}

#[test]
fn snapshot_round_trips_at_nine_digits() {
    let dir = tempfile::tempdir().unwrap();
    let sc = ScenarioConfig::two_stream_default();
    let grid = sc.phase_grid(3, 5, 1).unwrap();
    let f = sc.sample(&grid);
    let path = dir.path().join("s.csv");
    write_snapshot(&grid, &f, &path).unwrap();
    let rows = read_snapshot(&path).unwrap();
    assert_eq!(rows.len(), 32 * 32);
    for (i, r) in rows.iter().enumerate() {
        let (x, v) = grid.fine_coords((i / 32, i % 32));
        let exact = f.data[i];
        assert!((r.x - x).abs() <= 5e-9 * x.abs().max(1e-300));
        assert!((r.v - v).abs() <= 5e-9 * v.abs());
        assert!((r.f - exact).abs() <= 5e-9 * exact.abs());
    }
    // rewriting truncates
    write_snapshot(&grid, &Grid2::zeros(32, 32), &path).unwrap();
    assert!(read_snapshot(&path).unwrap().iter().all(|r| r.f == 0.0));
}

#[test]
fn io_errors_carry_the_path() {
    let grid = ScenarioConfig::cylinder().phase_grid(2, 3, 1).unwrap();
    let path = Path::new("/nonexistent-dir/x/snap.csv");
    match write_snapshot(&grid, &Grid2::zeros(8, 8), path).unwrap_err() {
        e @ Error::Io { .. } => {
            assert!(e.to_string().contains("/nonexistent-dir/x/snap.csv"));
            assert_eq!(e.category(), "I/O error");
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn override_precedence() {
    let base = parse_config(&format!("{SMALL}eps = 1e-3\noutput_dir = \"cfg\"\n")).unwrap();
    assert_eq!(base.eps, Some(1e-3));
    let keep = Overrides::default().apply(base.clone()).unwrap();
    assert_eq!(keep, base);
    let o = Overrides {
        out: Some("cli".into()),
        eps: Some(1e-6),
        dense: false,
        steps: Some(9),
    };
    let c = o.apply(base.clone()).unwrap();
    assert_eq!((c.eps, c.n_steps, c.output.dir.clone()), (Some(1e-6), 9, PathBuf::from("cli")));
    let d = Overrides { dense: true, ..o }.apply(base).unwrap();
    assert_eq!(d.eps, None);
    let defaults = RunConfig::new(ScenarioConfig::cylinder(), 4, 8, 0.1, 1);
    assert_eq!(defaults.splitting, Splitting::Lie);
    assert_eq!(defaults.output.dir, PathBuf::from("output"));
    let bad = Overrides { eps: Some(-1.0), ..Overrides::default() }.apply(defaults);
    assert!(matches!(bad, Err(Error::Config { .. })));
}

#[test]
fn execute_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::new(ScenarioConfig::cylinder(), 3, 5, 0.05, 4);
    config.eps = Some(1e-3);
    config.output.dir = dir.path().join("cyl");
    config.output.diag_every = 2;
    let summary = execute(&config).unwrap();
    assert_eq!(summary.final_state.step, 4);
    assert_eq!(summary.records.len(), 3);
    let rows = read_timeseries(&config.output.dir.join("timeseries.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!((rows[2].t - 0.2).abs() < 1e-12);
}
