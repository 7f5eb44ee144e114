use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_langevin-bench"));
    c.env_remove("LANGEVIN_BENCH_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn langevin-bench")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("langevin-bench-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const SMALL_CONVERGE: &[&str] = &[
    "converge",
    "--potential",
    "gaussian",
    "--d",
    "2",
    "--T",
    "1",
    "--h-list",
    "2^-5,2^-6,2^-7",
    "--href",
    "2^-11",
    "--samples",
    "200",
];

#[test]
fn unknown_study_is_a_usage_error() {
    assert_eq!(run(&["sample"]).status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn constants_table() {
    let o = run(&["constants", "--potential", "gaussian"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert!(lines.next().unwrap().starts_with("# langevin-bench"));
    assert_eq!(lines.next().unwrap(), "name,value");
    assert!(s.lines().any(|l| l == "m2,20"), "{s}");
}

#[test]
fn off_grid_stepsize_rejected_before_running() {
    let o = run(&["converge", "--h-list", "0.03", "--href", "2^-12"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn increasing_ladder_rejected() {
    let o = run(&["converge", "--h-list", "2^-6,2^-5", "--href", "2^-10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stepsize_above_cap_needs_force() {
    let mut args = SMALL_CONVERGE.to_vec();
    args[8] = "2^-3,2^-4";
    assert_eq!(run(&args).status.code(), Some(2));
    args.push("--force");
    assert_eq!(run(&args).status.code(), Some(0));
}

#[test]
fn converge_is_reproducible_and_fits() {
    let a = tmp("a.csv");
    let b = tmp("b.csv");
    let mut args = SMALL_CONVERGE.to_vec();
    args.extend(["--seed", "7", "--out", a.to_str().unwrap()]);
    assert_eq!(run(&args).status.code(), Some(0));
    let n = args.len();
    args[n - 1] = b.to_str().unwrap();
    assert_eq!(run(&args).status.code(), Some(0));
    let ra = std::fs::read(&a).unwrap();
    assert_eq!(ra, std::fs::read(&b).unwrap());

    let text = String::from_utf8(ra).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert!(lines[0].starts_with("# ") && lines[0].contains("seed=7"));
    assert_eq!(
        lines[1],
        "kind,h,href,T,d,M,mse,ci,weak_bias,weak_ci,diverged"
    );
    assert_eq!(lines.len(), 5);

    let fit = std::fs::read_to_string(a.with_file_name("a.fit.csv")).unwrap();
    let row = fit.lines().find(|l| l.starts_with("rmse,")).unwrap();
    let slope: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((slope - 1.0).abs() < 0.25, "slope {slope}");
}

#[test]
fn jobs_do_not_change_results() {
    let mut one = SMALL_CONVERGE.to_vec();
    one.extend(["--jobs", "1"]);
    let mut two = SMALL_CONVERGE.to_vec();
    two.extend(["--jobs", "3"]);
    let (a, b) = (run(&one), run(&two));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn seed_changes_results_and_env_is_a_fallback() {
    let base = stdout(&run(SMALL_CONVERGE));
    let env = bin()
        .args(SMALL_CONVERGE)
        .env("LANGEVIN_BENCH_SEED", "99")
        .output()
        .unwrap();
    let env = stdout(&env);
    assert_ne!(base, env);
    assert!(env.lines().next().unwrap().contains("seed=99"));

    let mut flag = SMALL_CONVERGE.to_vec();
    flag.extend(["--seed", "99"]);
    assert_eq!(stdout(&run(&flag)), env);

    let over = bin()
        .args(&flag)
        .env("LANGEVIN_BENCH_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(stdout(&over), env);
}

#[test]
fn single_stepsize_gives_no_fit() {
    let o = run(&[
        "converge",
        "--potential",
        "gaussian",
        "--d",
        "2",
        "--T",
        "1",
        "--h",
        "2^-5",
        "--href",
        "2^-9",
        "--samples",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(!s.contains("quantity,slope"), "{s}");
}

#[test]
fn zero_drift_rejects_fit() {
    let o = run(&[
        "converge",
        "--potential",
        "zero",
        "--d",
        "2",
        "--T",
        "1",
        "--h-list",
        "2^-5,2^-6,2^-7",
        "--href",
        "2^-11",
        "--samples",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("quantity,slope"));
}

#[test]
fn config_file_with_flag_override() {
    let cfg = tmp("study.conf");
    std::fs::write(
        &cfg,
        "# small run\npotential = gaussian\nd = 3\nT = 1\nh-list = 2^-5,2^-6\nhref = 2^-10\nsamples = 40\nseed = 11\n",
    )
    .unwrap();
    let o = run(&["converge", "--config", cfg.to_str().unwrap(), "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let head = s.lines().next().unwrap();
    assert!(head.contains(" d=2 ") && head.contains("seed=11"), "{head}");

    std::fs::write(&cfg, "dim = 3\n").unwrap();
    assert_eq!(
        run(&["converge", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn moments_stay_under_bound() {
    let o = run(&["moments", "--d", "2", "--T", "2", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().nth(1).unwrap(), "t,mean_sq,ci,bound");
    for l in s.lines().skip(2) {
        let f: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(f[1] <= f[3]);
    }
}

#[test]
fn stability_lmc_blows_up_prlmc_does_not() {
    let o = run(&["stability", "--T", "5", "--samples", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let last = s.lines().last().unwrap();
    let f: Vec<&str> = last.split(',').collect();
    assert_eq!(f[2], "1");
    assert_eq!(f[3], "0");
    assert_eq!(f[4], "inf");
    assert!(f[5].parse::<f64>().unwrap() < 10.0);
}

#[test]
fn onestep_rejects_random_start() {
    assert_eq!(run(&["onestep", "--x0", "gauss"]).status.code(), Some(2));
}
