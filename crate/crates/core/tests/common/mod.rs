//! Fixture loading shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// `key=value` lines, `#` comments.
pub fn key_values(name: &str) -> BTreeMap<String, String> {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    text.lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap_or_else(|| panic!("{name}: malformed line {l:?}"));
            (k.trim().to_string(), v.trim().to_string())
        })
        .collect()
}

pub fn get_f64(map: &BTreeMap<String, String>, key: &str) -> f64 {
    map.get(key).unwrap_or_else(|| panic!("fixture key {key} missing")).parse().unwrap()
}

/// Rows of a headed CSV as field vectors.
pub fn csv_rows(name: &str) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    text.lines().skip(1).filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

/// `(form, d, L)` computed by PARI.
pub fn pari_lvalues() -> Vec<(String, i64, f64)> {
    csv_rows("pari_lvalues.csv")
        .into_iter()
        .map(|r| (r[0].clone(), r[1].parse().unwrap(), r[2].replace(' ', "").parse().unwrap()))
        .collect()
}

pub fn pari_lvalue(form: &str, d: i64) -> f64 {
    pari_lvalues()
        .into_iter()
        .find(|(f, dd, _)| f == form && *dd == d)
        .unwrap_or_else(|| panic!("no PARI value for {form} at {d}"))
        .2
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}
