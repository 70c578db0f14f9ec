//! Replays the checked-in fuzz seeds through the same invariants the fuzz
//! targets assert, so regressions show up without a nightly toolchain.

use std::fs;
use std::path::PathBuf;

use fraclift::lifted::LiftedSeq;
use fraclift::parser::{parse, to_series};
use fraclift::rl::differintegrate;
use fraclift::series::GenSeries;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn parse_expr_seeds() {
    for (name, data) in seeds("parse_expr") {
        let e = parse(std::str::from_utf8(&data).unwrap()).unwrap_or_else(|err| panic!("{name}: {err}"));
        assert_eq!(parse(&e.to_string()).unwrap(), e, "{name}");
    }
}

#[test]
fn to_series_seeds() {
    for (name, data) in seeds("to_series") {
        let (&order, rest) = data.split_first().unwrap();
        let e = parse(std::str::from_utf8(rest).unwrap()).unwrap_or_else(|err| panic!("{name}: {err}"));
        for basepoint in [0.0, 1.0, -2.5] {
            if let Ok(s) = to_series(&e, basepoint, usize::from(order % 24)) {
                GenSeries::from_json(&s.to_json()).unwrap();
            }
        }
    }
}

#[test]
fn series_json_seeds() {
    for (name, data) in seeds("series_json") {
        let f = GenSeries::from_json(std::str::from_utf8(&data).unwrap())
            .unwrap_or_else(|err| panic!("{name}: {err}"));
        let back = GenSeries::from_json(&f.to_json()).unwrap();
        assert_eq!((back.basepoint(), back.terms()), (f.basepoint(), f.terms()), "{name}");
        let _ = differintegrate(&f, 0.5);
    }
}

#[test]
fn lifted_json_seeds() {
    for (name, data) in seeds("lifted_json") {
        let r = LiftedSeq::from_json(std::str::from_utf8(&data).unwrap())
            .unwrap_or_else(|err| panic!("{name}: {err}"));
        assert_eq!(LiftedSeq::from_json(&r.to_json()).unwrap(), r, "{name}");
        let _ = r.shift(0.5).project();
    }
}
