use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::Rng;
use slackfm_core::binopt::text::{parse_qubo, write_qubo};
use slackfm_core::data::{write_records, ResponseRecord};
use slackfm_core::seed::rng_from;
use slackfm_core::{brute_force, FmModel, QuboModel};
use tempfile::TempDir;

fn slackfm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slackfm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{text}"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn zero_model_has_zero_energy() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "zero.txt", "n 4\n");
    let out = slackfm(&["solve-qubo", s(&model), "--reads", "10", "--sweeps", "10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(field(&text, "energy").parse::<f64>().unwrap(), 0.0);
    assert_eq!(field(&text, "assignment").len(), 4);
}

#[test]
fn annealed_solution_matches_exhaustive_search() {
    let dir = TempDir::new().unwrap();
    let mut rng = rng_from(31);
    let mut q = QuboModel::new(10);
    for i in 0..10 {
        q.add_linear(i, rng.random_range(-1.0..1.0)).unwrap();
        for j in i + 1..10 {
            q.add_quadratic(i, j, rng.random_range(-1.0..1.0)).unwrap();
        }
    }
    let model = write(&dir, "q10.txt", &write_qubo(&q));
    let exact = brute_force(&parse_qubo(&fs::read_to_string(&model).unwrap()).unwrap(), &[]).unwrap();

    for extra in [&[][..], &["--brute-force"][..]] {
        let mut args = vec!["solve-qubo", s(&model), "--seed", "3", "--reads", "200"];
        args.extend_from_slice(extra);
        let out = slackfm(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        let text = stdout(&out);
        let energy: f64 = field(&text, "energy").parse().unwrap();
        assert!(
            (energy - exact.best_energy).abs() < 1e-9,
            "{energy} vs {}",
            exact.best_energy
        );
        assert_eq!(field(&text, "feasible"), "true");
    }
}

#[test]
fn one_hot_groups_are_respected() {
    let dir = TempDir::new().unwrap();
    // Every bit wants to be on; the group allows only one of 0..=2.
    let model = write(&dir, "q.txt", "0 -1\n1 -2\n2 -1\n3 -1\n");
    let out = slackfm(&["solve-qubo", s(&model), "--one-hot", "0-2", "--reads", "20"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(field(&text, "assignment"), "0101");
    assert_eq!(field(&text, "feasible"), "true");
}

#[test]
fn missing_model_file_fails() {
    let out = slackfm(&["solve-qubo", "/nonexistent/model.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "bad.txt", "0 1.0\n# fine\n0 1 oops\n");
    let out = slackfm(&["solve-qubo", s(&model)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn unknown_config_keys_are_all_listed() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "seed = 1\nbogus = 2\n[train]\nk = 2\nlr = 0.1\n");
    let out = slackfm(&["run-scenario", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("bogus") && err.contains("train.lr"), "{err}");
}

fn dose_matrix_csv(dir: &TempDir) -> PathBuf {
    let mut records = Vec::new();
    for a in 0..8 {
        for b in 0..8 {
            records.push(ResponseRecord {
                drug_a: "A".into(),
                drug_b: "B".into(),
                cell_line: "L1".into(),
                conc_a_level: a,
                conc_b_level: b,
                response: (a * b) as f64 / 7.0 + a as f64 * 0.3 - b as f64 * 0.1,
            });
        }
    }
    let p = dir.path().join("dose.csv");
    write_records(fs::File::create(&p).unwrap(), &records).unwrap();
    p
}

#[test]
fn oversized_extra_training_cells_are_rejected() {
    let dir = TempDir::new().unwrap();
    let data = dose_matrix_csv(&dir);
    let out = slackfm(&[
        "run-scenario",
        "--scenario",
        "dose-matrix",
        "--data",
        s(&data),
        "--n-values",
        "65",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("65"), "{}", stderr(&out));
}

#[test]
fn dose_matrix_scenario_writes_hashed_results() {
    let dir = TempDir::new().unwrap();
    let data = dose_matrix_csv(&dir);
    let out_csv = dir.path().join("out/results.csv");
    let out = slackfm(&[
        "run-scenario",
        "--scenario",
        "dose-matrix",
        "--data",
        s(&data),
        "--n-values",
        "10,20",
        "--m-values",
        "0,2",
        "--i-max",
        "2",
        "--epochs",
        "100",
        "--reads",
        "20",
        "--sweeps",
        "50",
        "--output",
        s(&out_csv),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&out_csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config-hash: "));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("scenario,n_1,m,seed,pearson,spearman"));
    assert_eq!(lines.count(), 4);
}

fn synthetic_config(dir: &TempDir, seed: u64) -> PathBuf {
    write(
        dir,
        &format!("syn{seed}.toml"),
        &format!(
            "seed = {seed}\nn_values = [50]\nm_values = [0, 4]\ni_max = 2\n\
             [synthetic]\ncases = 1\nn_test = 30\n[train]\nepochs = 80\n[anneal]\nnum_reads = 20\nsweeps_per_read = 40\n"
        ),
    )
}

#[test]
fn scenario_runs_are_byte_identical_and_seed_sensitive() {
    let dir = TempDir::new().unwrap();
    let run = |cfg: &Path, name: &str| {
        let p = dir.path().join(name);
        let out = slackfm(&["run-scenario", "-c", s(cfg), "-o", s(&p)]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read(p).unwrap()
    };
    let cfg = synthetic_config(&dir, 5);
    let a = run(&cfg, "a.csv");
    assert_eq!(a, run(&cfg, "b.csv"));
    assert_ne!(a, run(&synthetic_config(&dir, 6), "c.csv"));
}

fn planted_qubo(dir: &TempDir) -> PathBuf {
    let mut rng = rng_from(5);
    let mut m = FmModel::random(8, 2, 0.8, &mut rng).unwrap();
    m.w = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    write(dir, "planted.txt", &write_qubo(&m.to_qubo()))
}

fn optimize_config(dir: &TempDir, model: &Path, extra: &str) -> PathBuf {
    write(
        dir,
        "opt.toml",
        &format!(
            "n_initial = 120\nepsilon = 0.05\nseed = 4\n{extra}\n\
             [blackbox]\nkind = \"polynomial\"\nmodel = \"{}\"\n\
             [train]\nk = 2\nlearning_rate = 0.02\nbeta1 = 0.0\nbeta2 = 0.0\nepochs = 1500\nbatch_size = 16\n\
             init_scale = 0.1\ntolerance = 1e-12\npatience = 30\n\
             [anneal]\nnum_reads = 100\nsweeps_per_read = 200\n",
            model.display()
        ),
    )
}

#[test]
fn fmqubo_converges_on_planted_qubo() {
    let dir = TempDir::new().unwrap();
    let model = planted_qubo(&dir);
    let cfg = optimize_config(&dir, &model, "optimizer = \"fmqubo\"");
    let trace = dir.path().join("trace.csv");
    let out = slackfm(&["run-optimize", "-c", s(&cfg), "-o", s(&trace)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(field(&text, "converged"), "true", "{text}");
    let q = parse_qubo(&fs::read_to_string(&model).unwrap()).unwrap();
    let exact = brute_force(&q, &[]).unwrap();
    let y_true: f64 = field(&text, "y_true").parse().unwrap();
    assert!((y_true - exact.best_energy).abs() < 1e-9);
    let rows = fs::read_to_string(&trace).unwrap();
    assert!(rows.lines().last().unwrap().ends_with(",true"));
}

#[test]
fn single_iteration_trace_has_one_row() {
    let dir = TempDir::new().unwrap();
    let model = planted_qubo(&dir);
    let cfg = optimize_config(&dir, &model, "optimizer = \"fmqubos\"\nm_slack = 2");
    let trace = dir.path().join("trace.csv");
    let out = slackfm(&[
        "run-optimize",
        "-c",
        s(&cfg),
        "-o",
        s(&trace),
        "--i-max",
        "1",
        "--epochs",
        "50",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = fs::read_to_string(&trace).unwrap();
    // Hash comment, header, one iteration.
    assert_eq!(rows.lines().count(), 3, "{rows}");
    assert_eq!(rows.lines().nth(2).unwrap().split(',').nth(2).unwrap().len(), 2);
}

#[test]
fn unknown_optimizer_is_a_usage_error() {
    let out = slackfm(&["run-optimize", "--optimizer", "gradient-descent"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("gradient-descent") || stderr(&out).contains("optimizer"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn synthetic_generator_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let gen = |name: &str| {
        let samples = dir.path().join(format!("{name}.csv"));
        let hubo = dir.path().join(format!("{name}.hubo"));
        let out = slackfm(&[
            "gen-synthetic",
            "--orders",
            "2,3",
            "--seed",
            "9",
            "--samples",
            "25",
            "-o",
            s(&samples),
            "--hubo-out",
            s(&hubo),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        (stdout(&out), fs::read(samples).unwrap(), fs::read(hubo).unwrap())
    };
    let a = gen("a");
    assert_eq!(a, gen("b"));
    let spec: serde_json::Value = serde_json::from_str(&a.0).unwrap();
    assert_eq!(spec["n_groups"], 3);
    assert_eq!(String::from_utf8(a.1).unwrap().lines().count(), 27);
}

#[test]
fn help_exits_zero_and_bad_flags_exit_one() {
    assert_eq!(slackfm(&["--help"]).status.code(), Some(0));
    assert_eq!(slackfm(&["solve-qubo", "--no-such-flag"]).status.code(), Some(1));
}
