use std::path::Path;
use std::process::{Command, Output};

use fasmon::expcli::{parse_csv, CSV_HEADER};

fn fasmon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fasmon")).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, extra: &[&str]) -> (Output, std::path::PathBuf) {
    let out = dir.join(name);
    let mut args = vec!["run", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (fasmon(&args), out)
}

const SMALL: [&str; 8] = [
    "--set",
    "experiment=custom",
    "--set",
    "sweep_variable=n_ports",
    "--set",
    "sweep_values=2,4,8",
    "--set",
    "schemes=ProposedBisect,Passive,ConventionalSingle",
];

#[test]
fn run_writes_parseable_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("plot.svg");
    let mut extra = SMALL.to_vec();
    extra.extend(["--svg", svg.to_str().unwrap()]);
    let (o, csv) = run_to(dir.path(), "a.csv", &extra);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = parse_csv(&csv).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.rate_mc_mean.is_none() && r.rate_analytic >= 0.0));
    assert!(text.lines().skip(1).all(|l| l.contains(",,,")));

    let plot = std::fs::read_to_string(&svg).unwrap();
    assert!(plot.starts_with("<svg"));
    assert_eq!(plot.matches("<polyline").count(), 3);
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut extra = SMALL.to_vec();
    extra.extend(["--set", "mc_samples=20000", "--set", "seed=11"]);
    let (o1, a) = run_to(dir.path(), "a.csv", &extra);
    let (o2, b) = run_to(dir.path(), "b.csv", &extra);
    assert!(o1.status.success() && o2.status.success());
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);

    *extra.last_mut().unwrap() = "seed=12";
    let (_, c) = run_to(dir.path(), "c.csv", &extra);
    assert_ne!(a, std::fs::read(c).unwrap());
}

#[test]
fn config_file_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let kv = dir.path().join("run.conf");
    std::fs::write(
        &kv,
        "# ratio sweep\nexperiment = custom\nsweep_variable = ratio_db\nsweep_values = -10:5:0\nschemes = Passive\n",
    )
    .unwrap();
    let json = dir.path().join("run.json");
    std::fs::write(
        &json,
        r#"{"experiment": "custom", "sweep_variable": "ratio_db", "sweep_values": "-10:5:0", "schemes": ["Passive"]}"#,
    )
    .unwrap();
    let (o1, a) = run_to(dir.path(), "a.csv", &["--config", kv.to_str().unwrap()]);
    let (o2, b) = run_to(dir.path(), "b.csv", &["--config", json.to_str().unwrap()]);
    assert!(o1.status.success() && o2.status.success());
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn configuration_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    for (set, key) in [("delta=0", "delta"), ("n_ports=1", "n_ports"), ("colour=blue", "colour"), ("p_s_db=loud", "p_s_db")] {
        let (o, csv) = run_to(dir.path(), "x.csv", &["--set", set]);
        assert_eq!(o.status.code(), Some(2), "{set}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(key), "{set}");
        assert!(!csv.exists());
    }
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "p_s_db = 20\n\nsigma_h2 = -1\n").unwrap();
    let (o, _) = run_to(dir.path(), "x.csv", &["--config", conf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sigma_h2") && err.contains('3'), "{err}");
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run_to(dir.path(), "missing/dir/x.csv", &SMALL);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validate_passes_and_detects_the_literal_mixing_weight() {
    let ok = fasmon(&["validate"]);
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(ok.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().all(|l| !l.starts_with("FAIL")));

    let bad = fasmon(&["validate", "--mixing", "literal"]);
    assert_eq!(bad.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("simulation vs quadrature"));
}
