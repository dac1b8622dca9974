use std::fs;
use std::process::Command;

fn shapeopt(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_shapeopt")).args(args).output().expect("binary runs")
}

#[test]
fn compute_disk_prints_f1() {
    let o = shapeopt(&["compute", "--domain", "disk", "--q", "1", "--mesh-level", "32", "--extrapolate"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let f = v["report"]["f_q"].as_f64().unwrap();
    assert!((f - 0.722898).abs() < 1e-5, "{f}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("F_1 = 0.7228"));
}

#[test]
fn verify_polya_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("polya.csv");
    let o = shapeopt(&["verify", "polya", "--samples", "20", "--seed", "7", "--mesh-level", "8", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(String::from_utf8_lossy(&o.stdout).contains("20/20 pass"));
}

#[test]
fn sweep_has_one_row_per_q() {
    let o = shapeopt(&["sweep", "--q", "1.1:10:0.5", "--modes", "2", "--seed", "1", "--mesh-level", "4", "--max-evals", "3", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 19);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(shapeopt(&["sweep", "--q", "3:1:0.5"]).status.code(), Some(1));
    assert_eq!(shapeopt(&["verify", "nonsense"]).status.code(), Some(1));
    assert_eq!(shapeopt(&["capacitary", "--potential", "wave:1:2"]).status.code(), Some(1));
    assert_eq!(shapeopt(&["--help"]).status.code(), Some(0));
}

#[test]
fn capacitary_and_stability_outputs() {
    let o = shapeopt(&["capacitary", "--potential", "constant:0", "--dim", "1", "--grid", "199", "--format", "csv"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    assert!((row[1] - 1.0 / 12.0).abs() < 1e-4 && (row[2] - std::f64::consts::PI.powi(2)).abs() < 1e-3);

    let o = shapeopt(&["stability", "--amplitudes", "0.01,0.02", "--modes", "2,3", "--mesh-level", "8"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["sample_count"], 4);
    assert_eq!(v["valid"], true);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let ini = dir.path().join("run.ini");
    fs::write(&ini, "command = optimize\nq = 4\nmodes = 3\nmax-evals = 12\nmesh-level = 5\nformat = csv\n").unwrap();
    let o = shapeopt(&["--config", ini.to_str().unwrap(), "--max-evals", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(text.starts_with("eval_index,a2,a3,b2,b3,"));
    assert_eq!(text.lines().count(), 8);
}
