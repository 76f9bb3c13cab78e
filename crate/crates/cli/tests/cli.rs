use std::process::Command;

use tailbound::bounds::{bh, pin};
use tailbound::distributions::BoundParams;
use tailbound_cli::run;

fn call(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tailbound").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn table(csv: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = csv.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn eval_bh_at_zero_is_one() {
    let (code, out, _) = call(&[
        "eval", "--bound", "bh", "--sigma", "1", "--y", "1", "--x", "0",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "bound,x,value\nbh,0.000000000000e0,1.000000000000e0\n");
}

#[test]
fn compare_reproduces_bentkus_pinelis_gap() {
    let (code, out, _) = call(&[
        "compare", "--sigma", "1", "--y", "1", "--eps", "0.1", "--x-max", "4", "--points", "50",
    ]);
    assert_eq!(code, 0);
    assert!(!out.contains('\r'));
    let (header, rows) = table(&out);
    assert_eq!(
        header,
        [
            "x",
            "BH",
            "PU",
            "Be",
            "Pin",
            "Ca",
            "EN",
            "log10_Be_BH",
            "log10_Pin_BH",
            "log10_PU_BH"
        ]
    );
    assert_eq!(rows.len(), 50);
    let last = rows.last().unwrap();
    assert_eq!(last[0], 4.0);
    let gap = last[7] - last[8];
    assert!((gap - 9.93f64.log10()).abs() < 0.01, "gap {gap}");
    for r in &rows {
        let (bh, pu, be, pin, ca) = (r[1], r[2], r[3], r[4], r[5]);
        assert!(pin <= pu * (1.0 + 1e-8));
        assert!(pu <= bh * (1.0 + 1e-12));
        assert!(be <= ca.min(bh) * (1.0 + 1e-8));
    }
}

#[test]
fn csv_round_trips_to_twelve_digits() {
    let (_, out, _) = call(&[
        "sweep", "--bound", "pin", "--sigma", "1.3", "--y", "0.7", "--eps", "0.3", "--x-min",
        "0.2", "--x-max", "5", "--points", "7",
    ]);
    let p = BoundParams::new(1.3, 0.7, 0.3).unwrap();
    let (_, rows) = table(&out);
    for r in rows {
        let exact = pin(&p, r[0]).unwrap().value;
        assert!((r[1] - exact).abs() <= 1e-12 * exact);
    }
    let (_, out, _) = call(&[
        "eval", "--bound", "bh", "--sigma", "2", "--y", "0.5", "--x", "3.3",
    ]);
    let v: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let exact = bh(2.0, 0.5, 3.3).unwrap().value;
    assert!((v - exact).abs() <= 1e-12 * exact);
}

#[test]
fn parametric_sweep_lies_on_the_curve() {
    let (code, out, _) = call(&[
        "sweep",
        "--bound",
        "pin",
        "--sigma",
        "1",
        "--y",
        "1",
        "--eps",
        "0.1",
        "--x-min",
        "0.5",
        "--x-max",
        "6",
        "--points",
        "9",
        "--parametric",
    ]);
    assert_eq!(code, 0);
    let p = BoundParams::new(1.0, 1.0, 0.1).unwrap();
    let (_, rows) = table(&out);
    assert!((rows[0][0] - 0.5).abs() < 1e-9 && (rows[8][0] - 6.0).abs() < 1e-9);
    for r in rows {
        let direct = pin(&p, r[0]).unwrap().value;
        assert!((r[1] - direct).abs() <= 1e-8 * direct, "{r:?} vs {direct}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = [
        "extremal",
        "--sigma",
        "1",
        "--y",
        "1",
        "--eps",
        "0.1",
        "--m",
        "50",
        "--x",
        "2",
        "--samples",
        "100000",
        "--seed",
        "9",
    ];
    assert_eq!(call(&args).1, call(&args).1);
    let args = [
        "compare", "--sigma", "2", "--y", "0.5", "--eps", "0.6", "--x-max", "8", "--points", "16",
    ];
    assert_eq!(call(&args).1, call(&args).1);
}

#[test]
fn usage_and_domain_errors_exit_two() {
    let (code, out, err) = call(&[
        "eval", "--bound", "nope", "--sigma", "1", "--y", "1", "--x", "1",
    ]);
    assert_eq!(code, 2);
    assert!(out.is_empty() && !err.is_empty());
    assert_eq!(
        call(&["eval", "--bound", "pu", "--sigma", "-1", "--y", "1", "--x", "1"]).0,
        2
    );
    assert_eq!(
        call(&[
            "sweep", "--bound", "bh", "--sigma", "1", "--y", "1", "--x-min", "2", "--x-max", "1"
        ])
        .0,
        2
    );
    assert_eq!(
        call(&[
            "sweep",
            "--bound",
            "bh",
            "--sigma",
            "1",
            "--y",
            "1",
            "--x-min",
            "1",
            "--x-max",
            "2",
            "--parametric"
        ])
        .0,
        2
    );
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn validate_quick_passes() {
    let (code, out, _) = call(&["validate", "--suite", "quick", "--seed", "7"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().count(), 15);
}

#[test]
fn binary_honours_tolerance_variable() {
    let bin = env!("CARGO_BIN_EXE_tailbound");
    let args = [
        "eval", "--bound", "pin", "--sigma", "1", "--y", "1", "--x", "2",
    ];
    let bad = Command::new(bin)
        .args(args)
        .env("TAILBOUND_TOL_REL", "5")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let good = Command::new(bin)
        .args(args)
        .env("TAILBOUND_TOL_REL", "1e-8")
        .output()
        .unwrap();
    assert_eq!(good.status.code(), Some(0));
    assert!(String::from_utf8(good.stdout)
        .unwrap()
        .starts_with("bound,x,value\npin,"));
}
