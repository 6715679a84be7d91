use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn hubsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hubsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn hubsim")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn config(degree_file: &str, r: f64, policy: &str, budget: u32, reps: u32) -> String {
    format!(
        "[network]\nkind = \"dc\"\ndegree_file = \"{degree_file}\"\np = 0.5\n\
         [disease]\nr_mean = {r}\nr_sd = 0.0\n\
         [intervention]\nkind = \"{policy}\"\nbudget = {budget}\n\
         [experiment]\nreplications = {reps}\nmax_days = 200\nregenerate_network = true\n\
         [rng]\nmaster_seed = 17\n"
    )
}

fn surrogate(dir: &Path) {
    let out = hubsim(dir, &["surrogate", "--out", "data"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn help_and_version_succeed() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&hubsim(d.path(), &["--help"])), 0);
    assert_eq!(code(&hubsim(d.path(), &["--version"])), 0);
    assert_eq!(code(&hubsim(d.path(), &["simulate", "--help"])), 0);
}

#[test]
fn bad_invocations_exit_one() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&hubsim(d.path(), &[])), 1);
    assert_eq!(code(&hubsim(d.path(), &["frobnicate"])), 1);
    // Neither --xmin nor --auto-xmin.
    assert_eq!(code(&hubsim(d.path(), &["fit", "x.txt"])), 1);
    write(d.path(), "d.txt", "2\n2\n2\n");
    // Degree-calibrated generation needs --p.
    assert_eq!(code(&hubsim(d.path(), &["netgen", "d.txt", "--out", "g"])), 1);
    let out = hubsim(d.path(), &["netgen", "d.txt", "--p", "1.5", "--out", "g"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(!d.path().join("g.edges").exists());
}

#[test]
fn data_errors_exit_two() {
    let d = TempDir::new().unwrap();
    let out = hubsim(d.path(), &["fit", "missing.txt", "--xmin", "3"]);
    assert_eq!(code(&out), 2);
    write(d.path(), "zero.txt", "4\n0\n3\n");
    let out = hubsim(d.path(), &["fit", "zero.txt", "--xmin", "3"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    write(d.path(), "junk.txt", "4\nmany\n");
    assert_eq!(code(&hubsim(d.path(), &["fit", "junk.txt", "--xmin", "3"])), 2);
}

#[test]
fn fit_rejects_xmin_above_data() {
    let d = TempDir::new().unwrap();
    write(d.path(), "d.txt", "1\n5\n9\n40\n");
    let out = hubsim(d.path(), &["fit", "d.txt", "--xmin", "999999"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("xmin=999999"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn fit_recovers_stand_in_tail() {
    let d = TempDir::new().unwrap();
    surrogate(d.path());
    let out = hubsim(d.path(), &["fit", "data/diary.txt", "--xmin", "19"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["xmin"], 19);
    assert_eq!(v["n_tail"], 175);
    let alpha = v["alpha"].as_f64().unwrap();
    assert!((alpha - 5.1).abs() < 0.05, "{alpha}");
    assert!(v.get("p_value").is_none());
}

#[test]
fn fit_with_goodness_of_fit() {
    let d = TempDir::new().unwrap();
    surrogate(d.path());
    let args = ["fit", "data/diary.txt", "--xmin", "19", "--gof", "100", "--seed", "4"];
    let out = hubsim(d.path(), &args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = v["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert_eq!(hubsim(d.path(), &args).stdout, out.stdout);
    let few = hubsim(d.path(), &["fit", "data/diary.txt", "--xmin", "19", "--gof", "10"]);
    assert_eq!(code(&few), 1);
}

#[test]
fn netgen_three_twos_is_a_triangle() {
    let d = TempDir::new().unwrap();
    write(d.path(), "tiny3.txt", "2\n2\n2\n");
    let out = hubsim(d.path(), &["netgen", "tiny3.txt", "--p", "0.3", "--out", "net/tri"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let edges = fs::read_to_string(d.path().join("net/tri.edges")).unwrap();
    assert_eq!(edges, "# nodes=3\n0 1\n0 2\n1 2\n");
    let metrics = fs::read_to_string(d.path().join("net/tri.metrics.csv")).unwrap();
    let row = metrics.lines().nth(1).unwrap();
    assert_eq!(row, "2.000000,2.000000,0.000000,1.000000,NA,1.000000,1");
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("net/tri.report.json")).unwrap()).unwrap();
    assert_eq!(rep["generator"]["deficit_total"], 0);
}

#[test]
fn netgen_random_graph() {
    let d = TempDir::new().unwrap();
    let out = hubsim(d.path(), &["netgen", "--n", "400", "--avg-degree", "6", "--seed", "2", "--out", "er"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let edges = fs::read_to_string(d.path().join("er.edges")).unwrap();
    let m = edges.lines().filter(|l| !l.starts_with('#')).count();
    let mean = 2.0 * m as f64 / 400.0;
    assert!((mean - 6.0).abs() < 0.8, "{mean}");

    surrogate(d.path());
    let out = hubsim(d.path(), &["netgen", "data/diary.txt", "--er", "--out", "matched"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("matched.report.json")).unwrap()).unwrap();
    assert_eq!(rep["generator"]["n"], 2029);
}

#[test]
fn netgen_with_job_extras() {
    let d = TempDir::new().unwrap();
    surrogate(d.path());
    let args = [
        "netgen", "data/diary.txt", "--job-extras", "data/job_extras.txt", "--p", "0", "--out", "combined",
    ];
    let out = hubsim(d.path(), &args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("combined.report.json")).unwrap()).unwrap();
    let targets = rep["generator"]["target_degrees"].as_array().unwrap();
    let mean = targets.iter().map(|t| t.as_f64().unwrap()).sum::<f64>() / targets.len() as f64;
    assert!((mean - 14.80).abs() < 0.01, "{mean}");
}

#[test]
fn zero_transmission_infects_only_seeds() {
    let d = TempDir::new().unwrap();
    surrogate(d.path());
    write(d.path(), "c.toml", &config("data/diary.txt", 0.0, "none", 0, 3));
    let out = hubsim(d.path(), &["simulate", "c.toml", "--out", "res"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = fs::read_to_string(d.path().join("res/summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[4..], ["5", "5", "5"]);
    for i in 0..3 {
        let t = fs::read_to_string(d.path().join(format!("res/trajectories/run_{i:03}.csv"))).unwrap();
        let last = t.lines().last().unwrap();
        assert_eq!(last.split(',').nth(6), Some("5"), "{last}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let d = TempDir::new().unwrap();
    surrogate(d.path());
    write(d.path(), "c.toml", &config("data/diary.txt", 0.05, "hub_target", 5, 6));
    let a = hubsim(d.path(), &["simulate", "c.toml", "--out", "a"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = hubsim(d.path(), &["simulate", "c.toml", "--out", "b", "--threads", "1"]);
    assert_eq!(code(&b), 0, "{}", stderr(&b));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("a/manifest.json")).unwrap()).unwrap();
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert_eq!(files.len(), 6 + 3);
    assert_eq!(manifest["master_seed"], 17);
    for f in files.iter().filter(|f| f.ends_with(".csv")) {
        let x = fs::read(d.path().join("a").join(f)).unwrap();
        let y = fs::read(d.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let bands = fs::read_to_string(d.path().join("a/bands.csv")).unwrap();
    assert_eq!(bands.lines().filter(|l| l.starts_with("day")).count(), 1);
}

#[test]
fn rerun_replaces_previous_output() {
    let d = TempDir::new().unwrap();
    surrogate(d.path());
    write(d.path(), "c.toml", &config("data/diary.txt", 0.0, "none", 0, 4));
    assert_eq!(code(&hubsim(d.path(), &["simulate", "c.toml", "--out", "res"])), 0);
    write(d.path(), "c.toml", &config("data/diary.txt", 0.0, "none", 0, 2));
    assert_eq!(code(&hubsim(d.path(), &["simulate", "c.toml", "--out", "res"])), 0);
    let runs = fs::read_dir(d.path().join("res/trajectories")).unwrap().count();
    assert_eq!(runs, 2);
}

#[test]
fn refuses_to_overwrite_unrelated_directory() {
    let d = TempDir::new().unwrap();
    surrogate(d.path());
    write(d.path(), "c.toml", &config("data/diary.txt", 0.0, "none", 0, 2));
    let out = hubsim(d.path(), &["simulate", "c.toml", "--out", "data"]);
    assert_eq!(code(&out), 1);
    assert!(d.path().join("data/diary.txt").exists());
}

#[test]
fn config_errors_are_listed_together() {
    let d = TempDir::new().unwrap();
    write(d.path(), "c.toml", "[network]\nkind = \"dc\"\n[disease]\nr_mean = \"high\"\n[extra]\nx = 1\n");
    let out = hubsim(d.path(), &["simulate", "c.toml", "--out", "res"]);
    assert_eq!(code(&out), 1);
    let msg = stderr(&out);
    for key in [
        "network.degree_file",
        "network.p",
        "disease.r_mean: expected a number",
        "disease.r_sd",
        "intervention.kind",
        "intervention.budget",
        "experiment.replications",
        "experiment.max_days",
        "experiment.regenerate_network",
        "rng.master_seed",
        "extra: unknown section",
    ] {
        assert!(msg.contains(key), "{key} missing from:\n{msg}");
    }
    assert!(!d.path().join("res").exists());
}

#[test]
fn failed_run_leaves_no_output() {
    let d = TempDir::new().unwrap();
    write(d.path(), "c.toml", &config("nowhere.txt", 0.05, "none", 0, 2));
    let out = hubsim(d.path(), &["simulate", "c.toml", "--out", "res"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    write(d.path(), "bad.txt", "3\n-1\n");
    write(d.path(), "c.toml", &config("bad.txt", 0.05, "none", 0, 2));
    assert_eq!(code(&hubsim(d.path(), &["simulate", "c.toml", "--out", "res"])), 2);
    let names: Vec<_> = fs::read_dir(d.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn degree_file_resolves_against_config_directory() {
    let d = TempDir::new().unwrap();
    surrogate(d.path());
    fs::create_dir(d.path().join("cfg")).unwrap();
    write(d.path(), "cfg/c.toml", &config("../data/diary.txt", 0.0, "none", 0, 1));
    let out = hubsim(d.path(), &["simulate", "cfg/c.toml", "--out", "res"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn durations_profiles() {
    let d = TempDir::new().unwrap();
    write(d.path(), "c.csv", "respondent_id,duration_category\nb,1\na,5\na,3\n");
    let out = hubsim(d.path(), &["durations", "c.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["respondent_id"], "a");
    assert_eq!(v[0]["n_contacts"], 2);
    assert_eq!(v[0]["total_minutes"], 262.5);
    assert_eq!(v[1]["average_minutes"], 2.5);
    write(d.path(), "bad.csv", "respondent_id,duration_category\na,9\n");
    assert_eq!(code(&hubsim(d.path(), &["durations", "bad.csv"])), 2);
}
