use std::path::PathBuf;
use std::process::Command;

use proptest::prelude::*;
use tower_dimers::kernels::FiniteKernel;
use tower_dimers::lattice::{build_tower, parse_rational, LatticeCoord};
use tower_dimers::limitshape::arctic_curve;
use tower_dimers::shuffle::sample_tower;
use towerdimer::config::{Overrides, RunConfig};
use towerdimer::render::{arctic_svg, matching_svg};
use towerdimer::table::{emit_csv, read_csv, Table};
use towerdimer::verify::{run_criterion, Level, VerifyReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_towerdimer"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("towerdimer-test-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

proptest! {
    #[test]
    fn csv_floats_round_trip(vals in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..20)) {
        let mut t = Table::new(["i", "v"]);
        for (i, &v) in vals.iter().enumerate() {
            t.push(vec![(i as i64).into(), v.into()]);
        }
        let text = t.to_csv_string().unwrap();
        let mut r = csv::Reader::from_reader(text.as_bytes());
        for (rec, &v) in r.records().zip(&vals) {
            let back: f64 = rec.unwrap()[1].parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}

#[test]
fn empty_table_is_header_only() {
    let p = scratch("empty.csv");
    emit_csv(&Table::new(["a", "b"]), &p).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\r\n");
    let (h, rows) = read_csv(&p).unwrap();
    assert_eq!(h, ["a", "b"]);
    assert!(rows.is_empty());
}

#[test]
fn ragged_rows_are_rejected() {
    let mut t = Table::new(["a", "b"]);
    t.push(vec![1i64.into()]);
    assert!(t.to_csv_string().is_err());
}

#[test]
fn kernel_csv_matches_the_library() {
    let p = scratch("kernel.csv");
    let st = bin()
        .args(["kernel", "-n", "2", "--alpha", "2", "--beta", "1/2", "--pair", "0,0:1,0", "--pair", "3,-1:2,0", "--csv"])
        .arg(&p)
        .status()
        .unwrap();
    assert!(st.success());
    let fk = FiniteKernel::new(2, 2.0, 0.5).unwrap();
    let (h, rows) = read_csv(&p).unwrap();
    assert_eq!(h, ["white_x", "white_u", "black_x", "black_u", "re", "im"]);
    assert_eq!(rows.len(), 2);
    for r in rows {
        let n: Vec<i64> = r[..4].iter().map(|s| s.parse().unwrap()).collect();
        let v = fk.eval(LatticeCoord::new(n[0], n[1]), LatticeCoord::new(n[2], n[3])).unwrap().value;
        assert_eq!(r[4].parse::<f64>().unwrap(), v.re);
        assert_eq!(r[5].parse::<f64>().unwrap(), v.im);
    }
}

#[test]
fn matching_svg_is_deterministic_and_complete() {
    let one = parse_rational("1").unwrap();
    let g = build_tower(2, &one, &one).unwrap();
    let m = sample_tower(2, &one, &one, 11).unwrap();
    let a = matching_svg(&g, &m);
    assert_eq!(a, matching_svg(&g, &m));
    assert_eq!(a.matches("class=\"white\"").count(), g.whites.len());
    assert_eq!(a.matches("class=\"black\"").count(), g.blacks.len());
    assert_eq!(a.matches("class=\"dimer\"").count(), g.whites.len());
    assert_eq!(a.matches("class=\"edge\"").count(), g.edges.len());
}

#[test]
fn arctic_svg_stays_in_the_viewbox() {
    let s = arctic_svg(&arctic_curve(1.0, 1.0, 32).unwrap());
    let vb: Vec<f64> = s.split("viewBox=\"").nth(1).unwrap().split('"').next().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
    let d = s.split("class=\"arctic\" d=\"").nth(1).unwrap().split('"').next().unwrap();
    let mut n = 0;
    for tok in d.split(' ').filter(|t| *t != "Z") {
        let (x, y) = tok[1..].split_once(',').unwrap();
        let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
        assert!(x >= vb[0] && x <= vb[2] && y >= vb[1] && y <= vb[3], "{tok}");
        n += 1;
    }
    assert!(n >= 16);
}

#[test]
fn verify_report_round_trips() {
    let r = VerifyReport { level: Level::Fast, passed: true, criteria: vec![run_criterion(7), run_criterion(12)], runtime_s: 0.5 };
    let back: VerifyReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn flags_override_the_config_file() {
    let p = scratch("run.json");
    std::fs::write(&p, r#"{"n": 3, "alpha": "2", "beta": "1/3", "seed": 9}"#).unwrap();
    let c = RunConfig::resolve(Some(&p), Overrides { n: Some(4), ..Overrides::default() }).unwrap();
    assert_eq!((c.n, c.alpha.as_str(), c.beta.as_str(), c.seed), (4, "2", "1/3", 9));
    std::fs::write(&p, r#"{"n": 3, "colour": 1}"#).unwrap();
    assert!(RunConfig::resolve(Some(&p), Overrides::default()).is_err());
    let bad = Overrides { alpha: Some("-1".into()), ..Overrides::default() };
    assert!(RunConfig::resolve(None, bad).is_err());
}

#[test]
fn sample_is_reproducible_and_renders_the_same() {
    let (j1, j2, s1, s2) = (scratch("m1.json"), scratch("m2.json"), scratch("m1.svg"), scratch("m2.svg"));
    for (j, s) in [(&j1, &s1), (&j2, &s2)] {
        let st = bin().args(["sample", "-n", "3", "--seed", "5", "-o"]).arg(j).arg("--svg").arg(s).status().unwrap();
        assert!(st.success());
    }
    assert_eq!(std::fs::read(&j1).unwrap(), std::fs::read(&j2).unwrap());
    let r = scratch("m3.svg");
    assert!(bin().args(["render", "--kind", "matching", "--input"]).arg(&j1).arg("--svg").arg(&r).status().unwrap().success());
    assert_eq!(std::fs::read(&s1).unwrap(), std::fs::read(&r).unwrap());
}

#[test]
fn bad_input_exits_with_two() {
    let out = bin().args(["kernel", "-n", "0", "--pair", "0,0:1,0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N must be at least 1"));
    let out = bin().args(["isoradial", "--z0", "0.5,0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn limitshape_point_reports_the_uniform_center() {
    let out = bin().args(["limitshape", "--point", "0.5,0"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["label"], "liquid");
    assert!((v["z"][0].as_f64().unwrap() + 0.5).abs() < 1e-12);
    assert!((v["z"][1].as_f64().unwrap() - 7f64.sqrt() / 2.0).abs() < 1e-12);
}
