use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_potts-csg"));
    c.env_remove("POTTS_CSG_THREADS");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate_small(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "simulate", "--K", "2", "--q", "1e-1", "--branching", "random-pair", "--temps", "0.5:1.5:0.5",
        "--sizes", "8,16,32", "--seed", "7", "--batches", "2", "--chains-per-batch", "4",
        "--out", out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn simulate_writes_grid_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = simulate_small(&a, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = simulate_small(&b, &["--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));

    let results = fs::read_to_string(a.join("results.csv")).unwrap();
    let chi_rows = results.lines().filter(|l| l.starts_with("chi_tilde,")).count();
    assert_eq!(chi_rows, 3 * 3);
    for name in ["results.csv", "correlations.csv", "histogram.csv", "samples.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert!(a.join("manifest.json").exists());
}

#[test]
fn grid_contract_for_twenty_temperatures() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate", "--K", "2", "--q", "1e-1", "--branching", "random-pair", "--temps", "0.1:2.0:0.1",
        "--sizes", "4,8,16", "--seed", "7", "--batches", "2", "--chains-per-batch", "2", "--no-samples",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let results = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    for obs in ["M", "chi_tilde"] {
        let rows = results.lines().filter(|l| l.starts_with(&format!("{obs},"))).count();
        assert_eq!(rows, 20 * 3, "{obs}");
    }
    assert!(!dir.path().join("samples.csv").exists());
}

#[test]
fn rerun_from_manifest_reproduces_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(simulate_small(&a, &[]).status.success());
    let o = run(&[
        "simulate", "--from-manifest", a.join("manifest.json").to_str().unwrap(), "--out", b.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(a.join("results.csv")).unwrap(), fs::read(b.join("results.csv")).unwrap());
}

#[test]
fn config_file_runs_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out");
    fs::write(
        &cfg,
        format!(
            "[plan]\ntemperatures = [0.8, 1.2]\nsizes = [8, 16]\nq_values = [0.1]\nmaster_seed = 3\n\
             [plan.base]\nK = 3\n[plan.ensemble]\nbatches = 2\nchains_per_batch = 2\n\
             [output]\ndir = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let samples = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert!(samples.lines().next().unwrap().ends_with("count_1,count_2,count_3"));

    fs::write(&cfg, "bogus = 1\n[plan]\ntemperatures = [1.0]\nsizes = [8]\nq_values = [0.1]\n").unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    let o = run(&["simulate", "--K", "2", "--sizes", "16"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--temps"), "{}", stderr(&o));

    let o = run(&["simulate", "--K", "1", "--temps", "1", "--sizes", "16"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = run(&["simulate", "--temps", "1:0:1", "--sizes", "16"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fss_recovers_synthetic_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "fss", "--input", fixture("synthetic_collapse.csv").to_str().unwrap(), "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("collapse.json")).unwrap()).unwrap();
    for (key, want) in [("tc", 1.0), ("nu", 2.0), ("gamma", 1.5)] {
        let got = report[key].as_f64().unwrap();
        assert!((got - want).abs() / want < 0.02, "{key} = {got}");
    }
    assert!(report["residual"].as_f64().unwrap() < 1e-3);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("nu ="), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("collapse.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,N,temperature"));
    assert_eq!(csv.lines().count(), 85);
}

#[test]
fn fss_single_size_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("synthetic_collapse.csv")).unwrap();
    let single: Vec<&str> =
        text.lines().enumerate().filter(|(i, l)| *i == 0 || l.contains(",16,")).map(|(_, l)| l).collect();
    let input = dir.path().join("single.csv");
    fs::write(&input, single.join("\n") + "\n").unwrap();
    let o = run(&["fss", "--input", input.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("collapse infeasible"), "{}", stderr(&o));
}

#[test]
fn fss_malformed_range_exits_two() {
    let input = fixture("synthetic_collapse.csv");
    for bad in ["1.5:0.5", "abc", "1:"] {
        let o = run(&["fss", "--input", input.to_str().unwrap(), "--nu", bad]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
}

#[test]
fn fss_missing_input_exits_one() {
    let o = run(&["fss", "--input", "/nonexistent/results.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

fn binder_csv(sizes: &[usize]) -> String {
    let mut s = String::from("observable,K,J,q,t,s,r_minus,r_plus,branching,temperature,N,value,stderr,n_samples\n");
    for (k, &n) in sizes.iter().enumerate() {
        for i in 0..5 {
            let t = 0.8 + 0.1 * i as f64;
            let u = 0.5 - (k as f64 + 1.0) * (t - 0.95);
            s += &format!("binder,2,1,0.01,0,0.9,0.25,0.25,random-pair,{t},{n},{u},0.01,100\n");
        }
    }
    s
}

#[test]
fn crossings_one_row_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("results.csv");
    fs::write(&input, binder_csv(&[32, 64])).unwrap();
    let o = run(&["analyze", "--mode", "crossings", "--input", input.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = fs::read_to_string(dir.path().join("crossings.csv")).unwrap();
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let fields: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(&fields[8..10], &["32", "64"]);
    assert!((fields[10].parse::<f64>().unwrap() - 0.95).abs() < 1e-9);
    assert_eq!(fields[12], "crossing");
}

#[test]
fn boundary_fits_quadratic_across_q() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = String::from("observable,K,J,q,t,s,r_minus,r_plus,branching,temperature,N,value,stderr,n_samples\n");
    for (k, q) in [0.001, 0.01, 0.1].into_iter().enumerate() {
        let edge = 0.75 + 0.1 * k as f64;
        for i in 0..8 {
            let t = 0.6 + 0.05 * i as f64;
            for n in [32usize, 64, 128, 256] {
                let chi = if t < edge { (n as f64).powf(0.9) } else { 2.0 };
                s += &format!("chi_tilde,2,1,{q},0,0.9,0.25,0.25,random-pair,{t},{n},{chi},0.1,100\n");
            }
        }
    }
    let input = dir.path().join("results.csv");
    fs::write(&input, s).unwrap();
    let o = run(&["analyze", "--mode", "boundary", "--input", input.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("boundary.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("boundary.json")).unwrap()).unwrap();
    assert!(report["quadratic"].is_array());
    assert!(dir.path().join("boundary_fits.csv").exists());
}

#[test]
fn histogram_and_windowed_zipf_from_samples() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert!(simulate_small(&sim, &[]).status.success());
    let samples = sim.join("samples.csv");

    let o = run(&["analyze", "--mode", "histogram", "--delta-m", "0.1", "--input", samples.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let hist = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    // 11 bins for each of 3 temperatures x 3 sizes
    assert_eq!(hist.lines().count(), 1 + 11 * 9);

    let o = run(&["analyze", "--mode", "zipf", "--mag-window", "0:1", "--input", samples.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let zipf = fs::read_to_string(dir.path().join("zipf.csv")).unwrap();
    assert_eq!(zipf.lines().count(), 1 + 2 * 9);
    assert!(zipf.lines().next().unwrap().ends_with("temperature,N,rank,frequency,n_sentences"));

    let o = run(&["analyze", "--mode", "zipf", "--mag-window", "0.3:0.1", "--input", samples.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
