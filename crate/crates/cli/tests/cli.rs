use bgsemi::determinacy::{self, VerdictReport};
use bgsemi::BernsteinFunction;
use std::path::Path;
use std::process::{Command, Output};

fn bgsemi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bgsemi")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let i = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[i].to_string()).collect()
}

#[test]
fn threshold_of_identity() {
    let o = bgsemi(&["threshold", "--family", "identity"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, serde_json::json!({ "lower": 2.0, "upper": 2.0, "sharp": true }));
}

#[test]
fn threshold_of_log_family_is_infinite() {
    let o = bgsemi(&["threshold", "--family", "log", "--lambda", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["lower"], "inf");
    assert_eq!(v["upper"], "inf");
}

#[test]
fn factorial_moments() {
    let o = bgsemi(&["moments", "--family", "identity", "--t", "1", "--nmax", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_column(&stdout(&o), "moment"), ["1", "1", "2", "6", "24"]);
}

#[test]
fn exponential_density_at_one() {
    let o = bgsemi(&["density", "--family", "identity", "--t", "1", "--x", "1", "--tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "x,t,n,value,abs_error,contour_c,contour_B");
    let v: f64 = csv_column(&text, "value")[0].parse().unwrap();
    assert!((v - 0.367_879_44).abs() <= 1e-8);
}

#[test]
fn unknown_subcommand_prints_usage() {
    let o = bgsemi(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn parameter_error_record() {
    let o = bgsemi(&["phi", "--family", "power_shifted", "--alpha", "1.5", "--x", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let line = stderr(&o);
    assert!(line.starts_with("code=parameter op=power_shifted detail="), "{line}");
    assert_eq!(line.lines().count(), 1);
}

#[test]
fn missing_family_is_a_parameter_error() {
    let o = bgsemi(&["moments"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("code=parameter op=config"));
}

#[test]
fn convergence_failure_exits_three() {
    let o = bgsemi(&["density", "--family", "identity", "--x", "1", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3));
    let line = stderr(&o);
    assert!(line.starts_with("code=convergence op=mellin_barnes_density detail=achieved="), "{line}");
}

#[test]
fn grid_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let args = [
            "density", "--family", "gamma_ratio", "--alpha", "0.5", "--a", "1.5", "--b", "1", "--xmin", "0.1",
            "--xmax", "4", "--count", "12", "--spacing", "log", "--out",
        ];
        let mut all: Vec<&str> = args.to_vec();
        let p = path.to_str().unwrap().to_string();
        all.push(&p);
        assert_eq!(bgsemi(&all).status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 13);
}

#[test]
fn verdict_json_round_trips() {
    for (family, extra, t) in [
        ("identity", vec![], "2.5"),
        ("gamma_ratio", vec!["--alpha", "1", "--a", "1", "--b", "0.3"], "2.5"),
        ("log", vec!["--lambda", "1"], "7"),
    ] {
        let mut args = vec!["verdict", "--family", family, "--t", t];
        args.extend(extra);
        let o = bgsemi(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let parsed: VerdictReport = serde_json::from_str(&stdout(&o)).unwrap();
        let phi = match family {
            "identity" => BernsteinFunction::identity(),
            "gamma_ratio" => BernsteinFunction::gamma_ratio(1.0, 1.0, 0.3).unwrap(),
            _ => BernsteinFunction::log(1.0).unwrap(),
        };
        let v = determinacy::verdict(&phi, t.parse().unwrap()).unwrap();
        assert_eq!(parsed, VerdictReport::new(&phi, &v));
    }
}

#[test]
fn power_verdict_csv() {
    let o = bgsemi(&["power-verdict", "--family", "power_shifted", "--alpha", "0.5", "--t", "5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_column(&stdout(&o), "verdict"), ["indeterminate"]);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_file_forms() {
    let dir = tempfile::tempdir().unwrap();
    let one_line = write(dir.path(), "a.cfg", "family = \"power_shifted\", alpha = 0.5, m = 0, t = 1, nmax = 3\n");
    let o = bgsemi(&["moments", "--config", &one_line]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // φ(k) = √k
    let m: Vec<f64> = csv_column(&stdout(&o), "moment").iter().map(|s| s.parse().unwrap()).collect();
    assert!((m[3] - 6f64.sqrt()).abs() < 1e-14);

    let doc = write(dir.path(), "b.toml", "family = \"triplet\"\nd = 1\nv = \"exp_over_y\"\nlambda = 1.0\nx = 2\n");
    let o = bgsemi(&["phi", "--config", &doc]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let phi: f64 = csv_column(&stdout(&o), "phi")[0].parse().unwrap();
    assert!((phi - (2.0 + 3f64.ln())).abs() < 1e-10);

    // flags win over the file
    let o = bgsemi(&["moments", "--config", &one_line, "--nmax", "1"]);
    assert_eq!(csv_column(&stdout(&o), "moment").len(), 2);

    let bad = write(dir.path(), "c.cfg", "family = \"identity\", colour = 3\n");
    assert_eq!(bgsemi(&["moments", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn asym_report_columns() {
    let o = bgsemi(&["asym", "--family", "identity", "--t", "2", "--xmin", "25", "--xmax", "400", "--count", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "x,exact,asymptotic,ratio,t,n,family");
    for r in csv_column(&text, "ratio") {
        assert!((r.parse::<f64>().unwrap() - 1.0).abs() < 0.05);
    }
}

#[test]
fn wgamma_reports_constants() {
    let o = bgsemi(&["wgamma", "--family", "identity", "--x", "5", "--t", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["points"][0]["W"].as_f64().unwrap() - 24.0).abs() < 1e-9);
    assert!((v["points"][0]["W_t"].as_f64().unwrap() - 576.0).abs() < 1e-7);
    assert!((v["gamma_phi"]["value"].as_f64().unwrap() - 0.577_215_664_9).abs() < 1e-6);
    assert!((v["C_phi"]["value"].as_f64().unwrap() - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-6);
}

#[test]
fn examples_table_matches_references() {
    let o = bgsemi(&["examples"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let (computed, reference): (f64, f64) = (rec[3].parse().unwrap(), rec[4].parse().unwrap());
        let diff: f64 = rec[5].parse().unwrap();
        assert!(diff <= 1e-6 * reference.abs().max(1e-4) || computed == reference, "{rec:?}");
        n += 1;
    }
    assert!(n >= 10);
}

#[test]
fn selftest_passes() {
    let o = bgsemi(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("criterion")).count(), 12);
}
