use std::path::PathBuf;
use std::process::{Command, Output};

fn wqpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wqpe")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header row followed by data rows, manifest lines dropped.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn model_path() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/thirring_n4.json").display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wqpe-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn windows_dump_row_counts() {
    let (header, rows) = table(&stdout(&wqpe(&["windows", "dump", "--m", "6", "--kind", "cosine"])));
    assert_eq!(header, ["x", "re_window", "im_window", "q", "re_filter", "im_filter", "abs2_filter"]);
    assert_eq!(rows.iter().filter(|r| !r[0].is_empty()).count(), 64);
    assert_eq!(rows.iter().filter(|r| !r[3].is_empty()).count(), 64);
    let norm: f64 = rows.iter().filter(|r| !r[0].is_empty()).map(|r| r[1].parse::<f64>().unwrap().powi(2)).sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn error_rate_table_orders_windows() {
    let args = ["qpe", "error-rate", "--t", "10", "--delta2m", "-0.3", "--p-min", "1", "--p-max", "8", "--window", "both"];
    let (header, rows) = table(&stdout(&wqpe(&args)));
    assert_eq!(header, ["p", "e_rect", "e_cos"]);
    assert_eq!(rows.len(), 8);
    for row in &rows[1..] {
        assert!(row[2].parse::<f64>().unwrap() < row[1].parse::<f64>().unwrap());
    }
}

#[test]
fn single_window_leaves_other_column_empty() {
    let (_, rows) = table(&stdout(&wqpe(&["qpe", "error-rate", "--t", "4", "--delta2m", "0.1", "--window", "cos"])));
    assert!(rows.iter().all(|r| r[1].is_empty() && !r[2].is_empty()));
}

#[test]
fn qubit_counts() {
    let (_, rows) = table(&stdout(&wqpe(&["qpe", "qubits", "--e", "0.001", "--t", "10"])));
    assert_eq!(rows[0], ["rect", "0.001", "9", "10", "19"]);
    assert_eq!(rows[1], ["cos", "0.001", "3", "10", "13"]);
}

#[test]
fn prepare_model_file_rows() {
    let model = model_path();
    let args = ["prepare", "--model", &model, "--d", "1", "--m", "8", "--r-max", "6", "--window", "both"];
    let (header, rows) = table(&stdout(&wqpe(&args)));
    assert_eq!(header, ["r", "window", "success_prob", "cum_Pr", "epsilon", "sigma_chi"]);
    assert_eq!(rows.len(), 12);
    assert_eq!(rows.iter().filter(|r| r[1] == "cos").count(), 6);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = scratch("repro");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        let out = wqpe(&["prepare", "--m", "6", "--r-max", "2", "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap().replace("b.csv", "a.csv");
    assert_eq!(ta, tb);
    assert!(ta.contains("# seed: 7"));
    let again = dir.join("a.csv");
    wqpe(&["prepare", "--m", "6", "--r-max", "2", "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&again).unwrap(), ta);
    assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn qpe_run_on_matrix_file() {
    let dir = scratch("run");
    let input = dir.join("h.json");
    std::fs::write(&input, r#"{"model":"matrix","hamiltonian":{"re":[[-1,0],[0,1]]},"state":{"re":[1,0]}}"#).unwrap();
    let (header, rows) = table(&stdout(&wqpe(&["qpe", "run", "--input", input.to_str().unwrap(), "--m", "4", "--window", "rect"])));
    assert_eq!(header, ["window", "q", "phase", "energy", "probability"]);
    assert_eq!(rows.len(), 16);
    // lambda = 1/4 puts E = -1 exactly on q = -4.
    let peak = rows.iter().find(|r| r[1] == "-4").unwrap();
    assert!((peak[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
    assert!((peak[3].parse::<f64>().unwrap() + 1.0).abs() < 1e-12);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn qpe_run_oracles_agree() {
    let model = model_path();
    let spectral = stdout(&wqpe(&["qpe", "run", "--input", &model, "--m", "5", "--oracle", "spectral"]));
    let repeated = stdout(&wqpe(&["qpe", "run", "--input", &model, "--m", "5", "--oracle", "repeated"]));
    let (_, a) = table(&spectral);
    let (_, b) = table(&repeated);
    for (x, y) in a.iter().zip(&b) {
        let d = x[4].parse::<f64>().unwrap() - y[4].parse::<f64>().unwrap();
        assert!(d.abs() < 1e-10);
    }
}

#[test]
fn cbar_cosine_below_rect_at_six() {
    let (_, rows) = table(&stdout(&wqpe(&["qpe", "cbar", "--m-min", "6", "--m-max", "6"])));
    assert!(rows[0][2].parse::<f64>().unwrap() < rows[0][1].parse::<f64>().unwrap());
}

#[test]
fn varprep_reports_improved_overlap() {
    let (_, rows) = table(&stdout(&wqpe(&["varprep"])));
    let get = |k: &str| rows.iter().find(|r| r[0] == k).unwrap()[1].parse::<f64>().unwrap();
    assert!(get("overlap") > get("reference_overlap"));
    assert!(rows.iter().any(|r| r[0] == "gamma_2"));
}

#[test]
fn bounds_check_passes() {
    let (_, rows) = table(&stdout(&wqpe(&["bounds", "check"])));
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[6] == "true"));
}

#[test]
fn exit_codes() {
    assert_eq!(wqpe(&["qpe", "nope"]).status.code(), Some(2));
    assert_eq!(wqpe(&["windows", "dump", "--m", "6", "--kind", "hann"]).status.code(), Some(2));
    assert_eq!(wqpe(&["qpe", "run", "--input", "/no/such/file.json", "--m", "3"]).status.code(), Some(2));
    assert_eq!(wqpe(&["prepare", "--sites", "3"]).status.code(), Some(1));
    assert_eq!(wqpe(&["windows", "dump", "--m", "20", "--kind", "cos"]).status.code(), Some(1));
    assert_eq!(wqpe(&["qpe", "qubits", "--e", "2"]).status.code(), Some(1));
    assert_eq!(wqpe(&["--help"]).status.code(), Some(0));
}

#[test]
fn amplitude_cap_is_enforced() {
    let out = Command::new(env!("CARGO_BIN_EXE_wqpe"))
        .args(["qpe", "run", "--input", &model_path(), "--m", "8"])
        .env("WQPE_MAX_AMPLITUDES", "1024")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("WQPE_MAX_AMPLITUDES"));
}
