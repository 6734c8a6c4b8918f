use std::process::{Command, Output};

use qsalloc_core::rational::{parse_rational, to_decimal_string};

const BIN: &str = env!("CARGO_BIN_EXE_qsalloc");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("spawn qsalloc")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn eval_prints_exact_rate() {
    let out = run(&[
        "eval",
        "--n",
        "30",
        "--m",
        "2",
        "--fixed-r",
        "5",
        "--alpha",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("1/3"), "{}", stdout(&out));
}

#[test]
fn invalid_inputs_exit_2() {
    let cases: &[&[&str]] = &[
        &[
            "eval",
            "--n",
            "30",
            "--m",
            "2",
            "--fixed-r",
            "5",
            "--alpha",
            "6",
        ],
        &[
            "eval",
            "--n",
            "30",
            "--m",
            "2",
            "--fixed-r",
            "5",
            "--alpha",
            "0",
        ],
        &[
            "eval",
            "--n",
            "4",
            "--m",
            "5",
            "--fixed-r",
            "2",
            "--alpha",
            "1",
        ],
        &[
            "eval", "--n", "30", "--m", "2", "--prob-p", "1.5", "--alpha", "1",
        ],
        &[
            "eval",
            "--n",
            "30",
            "--m",
            "2",
            "--fixed-r",
            "31",
            "--alpha",
            "1",
        ],
        &[
            "eval",
            "--n",
            "30",
            "--m",
            "2",
            "--fixed-r",
            "5",
            "--prob-p",
            "0.5",
            "--alpha",
            "1",
        ],
        &[
            "simulate",
            "--n",
            "30",
            "--m",
            "2",
            "--fixed-r",
            "5",
            "--alpha",
            "1",
            "--trials",
            "0",
            "--seed",
            "1",
        ],
        &["oracle", "--n", "25", "--m", "2", "--fixed-r", "5"],
        &["reproduce", "fig9"],
        &[
            "sweep",
            "--n",
            "30",
            "--m",
            "2",
            "--fixed-r",
            "5",
            "--sweep",
            "p",
            "--values",
            "0.1",
        ],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(
            code(&out),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn oracle_matches() {
    let out = run(&["oracle", "--n", "12", "--m", "2", "--fixed-r", "5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(
        text.contains("MATCH") && !text.contains("MISMATCH"),
        "{text}"
    );
    let out = run(&[
        "oracle", "--n", "10", "--m", "3", "--prob-p", "1/4", "--alpha", "2",
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(
        &path,
        "# small system\nn = 30\nm = 2\nmu = 1\naccess = fixed\nr = 5\n",
    )
    .unwrap();
    let cfg = path.to_str().unwrap();

    let from_file = run(&["eval", "--config", cfg, "--alpha", "1"]);
    assert_eq!(code(&from_file), 0);
    assert!(stdout(&from_file).contains("1/3"));

    // m = 3 from the command line wins over the file: 3*5/30 = 1/2.
    let overridden = run(&["eval", "--config", cfg, "--m", "3", "--alpha", "1"]);
    assert_eq!(code(&overridden), 0);
    assert!(
        stdout(&overridden).contains("1/2"),
        "{}",
        stdout(&overridden)
    );

    std::fs::write(&path, "n = thirty\n").unwrap();
    assert_eq!(code(&run(&["eval", "--config", cfg, "--alpha", "1"])), 2);
}

#[test]
fn sweep_is_byte_identical_and_floats_follow_exact() {
    let args = [
        "sweep", "--n", "30", "--m", "2", "--prob-p", "0.3", "--sweep", "m", "--values", "1,2,3,4",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let text = stdout(&a);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        for (exact, float) in [("P_s_exact", "P_s_float"), ("mu_s_exact", "mu_s_float")] {
            let value = parse_rational(cells[col(exact)]).unwrap();
            assert_eq!(to_decimal_string(&value, 12), cells[col(float)], "{line}");
        }
        rows += 1;
    }
    // alpha runs to N/m under probabilistic access.
    assert_eq!(rows, 30 + 15 + 10 + 7);
}

#[test]
fn sweep_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--n",
        "30",
        "--m",
        "2",
        "--fixed-r",
        "5",
        "--sweep",
        "alpha",
        "--values",
        "2,1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let alphas: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(alphas, ["2", "1"]);
}

#[test]
fn simulate_reports_missing_strata() {
    let base = [
        "simulate",
        "--n",
        "30",
        "--m",
        "2",
        "--fixed-r",
        "5",
        "--alpha",
        "2",
        "--trials",
        "2000",
        "--seed",
        "7",
    ];
    let ok = run(&base);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).starts_with("k,count,"));

    // k = 4 has probability about 1.7e-4, so 2000 trials cannot reach 100 samples.
    let mut starved = base.to_vec();
    starved.extend(["--strata", "2,4"]);
    assert_eq!(code(&run(&starved)), 3);

    let mut reachable = base.to_vec();
    reachable.extend(["--strata", "2"]);
    assert_eq!(code(&run(&reachable)), 0);
}

#[test]
fn simulate_out_puts_summary_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strata.csv");
    let out = run(&[
        "simulate",
        "--n",
        "20",
        "--m",
        "2",
        "--prob-p",
        "0.5",
        "--alpha",
        "1",
        "--trials",
        "5000",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("trials,alpha,combined_rate"));
    assert!(std::fs::read_to_string(&path)
        .unwrap()
        .starts_with("k,count,"));
}

#[test]
fn optimal_reports_alpha_one() {
    let out = run(&["optimal", "--n", "30", "--m", "2", "--fixed-r", "5"]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "optimal",
        "--n",
        "1",
        "--m",
        "1",
        "--fixed-r",
        "1",
        "--grid-max-n",
        "8",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("warnings = 0"), "{}", stdout(&out));
}

#[test]
fn reproduce_all_writes_every_figure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "all", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    for (fig, rows) in [("fig2", 30), ("fig3", 30), ("fig4", 150), ("fig5", 150)] {
        let text = std::fs::read_to_string(dir.path().join(format!("{fig}.csv"))).unwrap();
        assert_eq!(text.lines().count(), rows + 1, "{fig}");
    }
    let single = run(&["reproduce", "fig2"]);
    let from_all = std::fs::read(dir.path().join("fig2.csv")).unwrap();
    assert_eq!(single.stdout, from_all);
}
