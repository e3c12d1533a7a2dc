use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn qgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgraph")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn fails_with_one_line(out: &Output, needle: &str) {
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains(needle), "{err}");
}

#[test]
fn free_case_spectrum_has_only_localization_points() {
    let csv = stdout(&qgraph(&["t3-spectrum", "--omega", "pi/2", "--kr", "0", "--lambda", "0", "--mu", "0", "--N", "4", "--window", "0", "40"]));
    assert!(csv.starts_with("E_lo,E_hi,label,source\n"));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 8);
    for r in &rows {
        assert_eq!(r[0], r[1]);
        assert_ne!(r[2], "Sigma1");
        let c2 = num(&r[0]).sqrt().cos().powi(2);
        assert!([0.0, 1.0 / 3.0, 1.0].iter().any(|t| (c2 - t).abs() < 1e-9), "{r:?}");
    }
    assert!(rows.iter().any(|r| r[2] == "Dirichlet") && rows.iter().any(|r| r[3] == "ab-level"));
}

#[test]
fn output_is_deterministic() {
    let args = ["t3-spectrum", "--omega", "pi/3", "--kr", "0.4", "--N", "6", "--window", "0", "20"];
    assert_eq!(stdout(&qgraph(&args)), stdout(&qgraph(&args)));
    let args = ["susy-check", "--random", "10", "--seed", "5"];
    assert_eq!(stdout(&qgraph(&args)), stdout(&qgraph(&args)));
}

#[test]
fn susy_check_reports_every_case() {
    let out = qgraph(&["susy-check", "--random", "50"]);
    let rows = rows(&stdout(&out));
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r[7] == "true" && num(&r[4]) <= 1e-9));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max deviation"));
}

#[test]
fn susy_check_reads_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.txt");
    std::fs::write(&path, "# rank one\n1 2i\n2 4i\n").unwrap();
    let csv = stdout(&qgraph(&["susy-check", "--matrix", path.to_str().unwrap(), "--m", "0.5"]));
    let r = &rows(&csv)[0];
    assert_eq!((r[5].as_str(), r[6].as_str(), r[7].as_str()), ("true", "true", "true"));
    std::fs::write(&path, "1 2\n3\n").unwrap();
    fails_with_one_line(&qgraph(&["susy-check", "--matrix", path.to_str().unwrap()]), "expected 2 entries");
}

#[test]
fn flatband_map_finds_the_magic_grid() {
    let csv = stdout(&qgraph(&["t3-flatband-map", "--omega-grid", "8", "--kr-grid", "8", "--N", "auto"]));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 64);
    let near = |x: f64, y: f64| (x - y).abs() < 1e-9;
    for r in &rows {
        let (w, k) = (num(&r[0]), num(&r[1]));
        let magic = (near(w, PI / 2.0) || near(w, 3.0 * PI / 2.0)) && (near(k, 0.0) || near(k, PI));
        assert_eq!(r[4] == "true", magic, "{r:?}");
        if !magic {
            assert!(num(&r[3]) > 1e-3);
        }
    }
}

#[test]
fn flatband_map_skips_incommensurate_points() {
    let out = qgraph(&["t3-flatband-map", "--omega-grid", "4", "--kr-grid", "2", "--N", "4"]);
    let rows = rows(&stdout(&out));
    assert_eq!(rows.len(), 8);
    let out = qgraph(&["t3-flatband-map", "--omega-grid", "6", "--kr-grid", "2", "--N", "4"]);
    assert_eq!(self::rows(&stdout(&out)).len(), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("notice: skipping"));
    fails_with_one_line(&qgraph(&["t3-flatband-map", "--omega-grid", "1"]), "at least 2");
}

#[test]
fn butterfly_dataset() {
    let csv = stdout(&qgraph(&["t3-butterfly", "--q", "4", "--N", "4"]));
    assert!(csv.starts_with("omega,N,eigenvalue_index,value,kind\n"));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 4 * 32);
    for r in rows.iter().filter(|r| (num(&r[0]) - PI / 2.0).abs() < 1e-9) {
        assert!((num(&r[3]) - 6.0).abs() < 1e-9 && r[4] == "flat");
    }
    let out = qgraph(&["t3-butterfly", "--omega", "0,pi/2,pi/3", "--N", "4"]);
    assert_eq!(self::rows(&stdout(&out)).len(), 2 * 32);
    assert!(String::from_utf8_lossy(&out.stderr).contains("notice: skipping"));
}

#[test]
fn json_mirrors_csv() {
    let args = ["t3-spectrum", "--omega", "pi/2", "--N", "4", "--window", "0", "40"];
    let csv = stdout(&qgraph(&args));
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&qgraph(&json_args))).unwrap();
    let json_rows = v["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), rows(&csv).len());
    assert_eq!(v["N"], 4);
    let lowest = json_rows[0]["e_lo"].as_f64().unwrap();
    assert!((lowest - (1.0 / 3f64.sqrt()).acos().powi(2)).abs() < 1e-10);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "command = t3-spectrum\nomega = pi/2\nN = 4\nwindow = 0 40\n").unwrap();
    let from_file = stdout(&qgraph(&["--config", cfg.to_str().unwrap()]));
    assert_eq!(rows(&from_file).len(), 8);
    let narrowed = stdout(&qgraph(&["--config", cfg.to_str().unwrap(), "--window", "0", "10"]));
    assert_eq!(rows(&narrowed).len(), 4);
}

#[test]
fn writes_output_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bf.csv");
    let plot = dir.path().join("bf.gp");
    let out = qgraph(&["t3-butterfly", "--q", "2", "--N", "2", "-o", data.to_str().unwrap(), "--plot", plot.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert!(std::fs::read_to_string(&data).unwrap().starts_with("omega,"));
    let script = std::fs::read_to_string(&plot).unwrap();
    assert!(script.contains(data.to_str().unwrap()) && script.contains("using 1:4"));
    fails_with_one_line(&qgraph(&["t3-butterfly", "--q", "2", "--N", "2", "--plot", plot.to_str().unwrap()]), "--plot needs --output");
}

#[test]
fn edge_bands_and_samples() {
    let hi = format!("{}", PI * PI / 4.0);
    let csv = stdout(&qgraph(&["edge-bands", "--eps", "3", "--window", "0", &hi, "--samples"]));
    let last = rows(&csv).pop().unwrap();
    assert!((num(&last[5]) - 6.0 / PI).abs() < 1e-10);
    let csv = stdout(&qgraph(&["edge-bands", "--window", "0", "50"]));
    let rows = rows(&csv);
    let dirichlet: Vec<f64> = rows.iter().filter(|r| r[2] == "dirichlet").map(|r| num(&r[0])).collect();
    assert_eq!(dirichlet.len(), 2);
    assert!((dirichlet[0] - PI * PI).abs() < 1e-9 && (dirichlet[1] - 4.0 * PI * PI).abs() < 1e-9);
    let band: Vec<&Vec<String>> = rows.iter().filter(|r| r[2] == "band").collect();
    assert_eq!(band.len(), 1);
    assert_eq!((num(&band[0][0]), num(&band[0][1])), (0.0, 50.0));
}

#[test]
fn graph_scan_presets_and_files() {
    let csv = stdout(&qgraph(&["graph-scan", "--preset", "four-cycle", "--window", "-1", "45"]));
    let energies: Vec<f64> = rows(&csv).iter().map(|r| num(&r[0])).collect();
    assert_eq!(energies.len(), 5);
    for (k, e) in energies.iter().enumerate() {
        assert!((e - (k as f64 * PI / 2.0).powi(2)).abs() < 1e-7, "{energies:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("interval.graph");
    std::fs::write(&g, "vertex a 0 0 0\nvertex b 1 0 0\nedge a b\n").unwrap();
    let csv = stdout(&qgraph(&["graph-scan", "--graph", g.to_str().unwrap(), "--window", "-1", "20"]));
    let energies: Vec<f64> = rows(&csv).iter().map(|r| num(&r[0])).collect();
    assert_eq!(energies.len(), 2);
    assert!(energies[0].abs() < 1e-7 && (energies[1] - PI * PI).abs() < 1e-7);
}

#[test]
fn validation_errors_are_one_line() {
    fails_with_one_line(&qgraph(&["frobnicate"]), "frobnicate");
    fails_with_one_line(&qgraph(&["t3-spectrum", "--omega", "pi/3", "--N", "4", "--window", "0", "1"]), "commensurate");
    fails_with_one_line(&qgraph(&["t3-spectrum", "--omega", "pi/2", "--window", "3", "1"]), "window");
    fails_with_one_line(
        &qgraph(&["t3-spectrum", "--omega", "pi/2", "--potential", "/nonexistent/u.txt", "--window", "0", "1"]),
        "cannot load potential file",
    );
    fails_with_one_line(&qgraph(&["t3-spectrum", "--omega", "pie", "--window", "0", "1"]), "invalid angle");
    fails_with_one_line(&qgraph(&["graph-scan", "--graph", "/nonexistent.graph", "--window", "0", "1"]), "cannot load graph");
    assert!(!Path::new("/nonexistent.graph").exists());
}
