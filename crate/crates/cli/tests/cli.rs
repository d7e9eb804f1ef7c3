use std::path::PathBuf;
use std::process::{Command, Output};

use ruin_cli::{builtin_config, TABLE_IDS};

fn ruin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruin")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_tmp(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn builtin_file(id: &str) -> PathBuf {
    write_tmp(&format!("builtin_{id}.cfg"), &builtin_config(id).unwrap().to_text())
}

/// Value of the last data row, column `col`.
fn last_value(o: &Output, col: usize) -> f64 {
    let text = stdout(o);
    let line = text.lines().last().unwrap();
    line.split(',').nth(col).unwrap().parse().unwrap()
}

const PAIR: &str = "\
[model]
lambda = 0.5
c = 3
claims = exp
rate = 1
[model2]
lambda = 0.5
c = 3
claims = hyperexp
weights = 0.5, 0.5
rates = 1.25, 0.8333333333333334
";

#[test]
fn table_4_matches_with_exit_zero() {
    let o = ruin(&["table", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "table,cell,quantity,computed,published,abs_dev,tolerance,flag");
    assert_eq!(rows.len(), 32);
    assert!(rows[1..].iter().all(|r| r.ends_with(",MATCH")));
    let cell = text.lines().find(|l| l.starts_with("4,n=5 k=0.4,iterate,")).unwrap();
    let v: f64 = cell.split(',').nth(3).unwrap().parse().unwrap();
    assert!((v - 0.3325717).abs() <= 5e-7, "{cell}");
}

#[test]
fn mismatching_config_exits_one() {
    let mut cfg = builtin_config("4").unwrap();
    cfg.diffusion = Some(0.2);
    cfg.model.c = 0.4;
    let p = write_tmp("mismatch.cfg", &cfg.to_text());
    let o = ruin(&["table", "4", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains(",MISMATCH"));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(code(&ruin(&["table", "9"])), 2);
    assert_eq!(code(&ruin(&["config", "9"])), 2);
    assert_eq!(code(&ruin(&["frobnicate"])), 2);
    assert_eq!(code(&ruin(&["bound", "dk1", "--config", "/nonexistent/file.cfg"])), 2);

    let p = write_tmp("malformed.cfg", "[model]\nlambda = 0.5\nc = oops\n");
    let o = ruin(&["bound", "dk1", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3, column 5"), "{}", stderr(&o));

    let p = write_tmp("pair_dk2.cfg", PAIR);
    let o = ruin(&["bound", "dk2", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "dk2 without --y");
    let o = ruin(&["eval", "ruin", "--config", p.to_str().unwrap(), "--u", "a,b"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn preconditions_exit_three() {
    let mut cfg = builtin_config("3").unwrap();
    cfg.diffusion = Some(0.1);
    cfg.diffusion2 = Some(1.0);
    let p = write_tmp("dk3_swapped.cfg", &cfg.to_text());
    let o = ruin(&["bound", "dk3", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("D ≥ D̃"), "{}", stderr(&o));

    let p = write_tmp("no_profit.cfg", "[model]\nlambda = 2\nc = 1\nclaims = exp\nrate = 1\n");
    let o = ruin(&["eval", "ruin", "--config", p.to_str().unwrap(), "--u", "0"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("net profit"));

    let p = write_tmp("premium.cfg", &PAIR.replacen("c = 3", "c = 4", 1));
    let o = ruin(&["bound", "dk1", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("c = c̃"));

    // Erlang iterates at a point need beta = c/D; the operator path takes over
    let p = write_tmp("iterate_general.cfg", "[model]\nlambda = 0.5\nc = 0.5\nclaims = exp\nrate = 3\n[diffusion]\nD = 0.25\n");
    let o = ruin(&["eval", "iterate", "--config", p.to_str().unwrap(), "--u", "1", "--k0", "0", "--n", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn numerical_failure_exits_four() {
    let text = format!("{PAIR}[numeric]\nabs_tol = 1e-300\nrel_tol = 1e-300\nmax_subdivisions = 1\n");
    let p = write_tmp("tight.cfg", &text);
    let o = ruin(&["bound", "dk1", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"));
}

#[test]
fn bound_rows() {
    let p = write_tmp("same.cfg", &PAIR.replace("claims = hyperexp\nweights = 0.5, 0.5\nrates = 1.25, 0.8333333333333334", "claims = exp\nrate = 1"));
    let o = ruin(&["bound", "dk1", "--config", p.to_str().unwrap(), "--gamma", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(last_value(&o, 1), 0.0);
    let header = stdout(&o).lines().next().unwrap().to_string();
    assert_eq!(header, "bound,value,prefactor,contraction_modulus,nu_next,nu_ml,intensity");

    let mut cfg = builtin_config("3").unwrap();
    cfg.diffusion = Some(2.0);
    cfg.diffusion2 = Some(1.0);
    let p = write_tmp("dk3_row4.cfg", &cfg.to_text());
    let o = ruin(&["bound", "dk3", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!((last_value(&o, 1) - 0.2837).abs() <= 1e-4);
}

#[test]
fn eval_points() {
    let p = builtin_file("4");
    let o = ruin(&["eval", "iterate", "--config", p.to_str().unwrap(), "--k0", "0.4", "--n", "5", "--u", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("u,value\n1,"));
    assert!((last_value(&o, 1) - 0.3325717).abs() <= 5e-7);

    let p = write_tmp("pair_ruin.cfg", PAIR);
    let o = ruin(&["eval", "ruin", "--config", p.to_str().unwrap(), "--u", "0:1:0.5"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    // phi = lambda mu / c = 1/6
    assert!(text.lines().nth(1).unwrap().starts_with("0,0.1666667"));
}

#[test]
fn monte_carlo_is_deterministic() {
    let p = write_tmp("pair_mc.cfg", PAIR);
    let args = ["eval", "mc", "--config", p.to_str().unwrap(), "--quantity", "psi", "--u", "1", "--samples", "1000000", "--seed", "42"];
    let (a, b) = (ruin(&args), ruin(&args));
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("u,value,se\n1,"));
}

#[test]
fn builtin_configs_round_trip_to_identical_tables() {
    for id in TABLE_IDS {
        let dumped = ruin(&["config", id]);
        assert_eq!(code(&dumped), 0);
        let p = write_tmp(&format!("roundtrip_{id}.cfg"), &stdout(&dumped));
        let a = ruin(&["table", id]);
        let b = ruin(&["table", id, "--config", p.to_str().unwrap()]);
        assert_eq!(code(&a), code(&b), "table {id}");
        assert_eq!(a.stdout, b.stdout, "table {id}");
    }
}
