use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meso-ent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn summary(text: &str, key: &str) -> String {
    let prefix = format!("# summary: {key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no summary `{key}` in\n{text}"))
        .to_string()
}

fn data_rows(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_string)
        .collect()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("meso-ent-cli-test-{}-{name}", std::process::id()))
}

#[test]
fn table1_matches_fixture() {
    let o = run(&["table1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"f1,2\",13,1,13,match"));
    assert!(text.contains("\"f2,3,4\",403,3,403,match"));
    assert_eq!(summary(&text, "matched"), "8");
}

#[test]
fn table1_cap_is_marked() {
    let o = run(&["table1", "--n-cap", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"f1,2\",capped,1,13,capped"));
}

#[test]
fn table1_mismatch_exits_with_two() {
    let path = temp_path("fixture.csv");
    std::fs::write(&path, "spec,max_n\n\"1,2\",14\n").unwrap();
    let o = run(&["table1", "--fixture", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("\"f1,2\",13,1,14,mismatch"));
}

#[test]
fn region_full_grid_diagonal_count() {
    let o = run(&["region", "--spec", "1,2,3", "--grid", "130x130"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(summary(&text, "diagonal_detected"), "114");
    assert_eq!(summary(&text, "max_n"), "114");
    assert_eq!(data_rows(&text).len(), 130 * 130);
}

#[test]
fn region_single_cell() {
    let text = stdout(&run(&["region", "--grid", "1x1"]));
    assert_eq!(data_rows(&text), vec!["0,0,0,".to_string()]);
}

#[test]
fn region_weights_are_sub_probability() {
    let text = stdout(&run(&["region", "--spec", "1,2", "--grid", "40x40", "--alpha", "0.8"]));
    let sum: f64 = summary(&text, "weight_sum").parse().unwrap();
    assert!(sum <= 1.0 && sum > 0.99);
    let p: f64 = summary(&text, "apriori_probability").parse().unwrap();
    assert!(p > 0.0 && p < sum);
}

#[test]
fn distribution_presets() {
    for preset in ["ideal", "loss50", "eff90", "gauss2"] {
        let o = run(&["distribution", "--n", "10", "--m", "10", "--model", preset]);
        assert_eq!(o.status.code(), Some(0), "{preset}");
        let text = stdout(&o);
        let sum: f64 = summary(&text, "sum").parse().unwrap();
        assert!((sum - 1.0).abs() < 1e-9, "{preset}: {sum}");
        if preset == "ideal" {
            for row in data_rows(&text) {
                let (r, p) = row.split_once(',').unwrap();
                if r.parse::<u64>().unwrap() % 2 == 1 {
                    assert_eq!(p, "0");
                }
            }
        }
        if preset == "loss50" {
            let mean: f64 = summary(&text, "mean").parse().unwrap();
            assert!((mean - 5.0).abs() < 1e-9);
        }
    }
}

#[test]
fn sweeps() {
    let text = stdout(&run(&["sweep", "sigma", "--spec", "1,2,3", "--values", "5,6"]));
    let closure: f64 = summary(&text, "closure_sigma").parse().unwrap();
    assert!((closure - 5.35).abs() < 0.05, "{closure}");

    let text = stdout(&run(&["sweep", "efficiency", "--spec", "1,2", "--values", "1,0.9"]));
    assert_eq!(data_rows(&text)[0], "1,1,13");

    let text = stdout(&run(&["sweep", "apriori", "--spec", "1,2", "--values", "0,0.5"]));
    assert_eq!(data_rows(&text)[0], "0,0");
}

#[test]
fn quadrature_reports() {
    let text = stdout(&run(&["quadrature", "duan-number", "--n", "1", "--m", "1"]));
    assert_eq!(summary(&text, "total"), "6");
    assert_eq!(summary(&text, "entangled_detected"), "0");

    let text = stdout(&run(&["quadrature", "duan-gaussian", "--alpha", "1", "--eta", "0.51"]));
    let total: f64 = summary(&text, "total").parse().unwrap();
    assert!((total - 0.5316).abs() < 1e-4);
    assert_eq!(summary(&text, "entangled_detected"), "1");
    assert_eq!(summary(&text, "lossy_entangled_detected"), "1");

    let text = stdout(&run(&["quadrature", "richter-demo", "--state", "0,1", "--seed", "7"]));
    let n_row = data_rows(&text).into_iter().find(|r| r.starts_with("1,1,")).unwrap();
    assert!(n_row.ends_with(",1"), "{n_row}");
}

#[test]
fn output_is_deterministic() {
    let args = ["quadrature", "richter-demo", "--state", "1,1", "--samples", "50000", "--seed", "3"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["region", "--spec", "1,2,3", "--grid", "30x30", "--model", "eff:0.9"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn json_and_file_output() {
    let path = temp_path("region.json");
    let o = run(&["region", "--grid", "3x2", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 6);
    assert_eq!(doc["config"]["grid"], "3x2");
    let detected = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["detected"] == true)
        .count();
    assert_eq!(doc["summary"]["detected_cells"], detected as u64);
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["region", "--model", "bogus"],
        vec!["region", "--grid", "0x5"],
        vec!["region", "--spec", "0,1"],
        vec!["distribution", "--n", "1", "--m", "1", "--model", "eff:1.5"],
        vec!["table1", "--tail-eps", "2"],
        vec!["nonsense"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = run(&["region", "--grid", "2x2", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-dir/x.csv"));
}
