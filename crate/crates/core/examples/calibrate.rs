//! Regenerates `tests/fixtures/calibration.txt`: empirical constants and
//! regression values that the integration tests pin.
//!
//! Run with `cargo run --release -p twistlab-core --example calibrate`.

use std::fmt::Write as _;

use twistlab::apps::{coeff_decorrelation_sum, isotropy_statistic, HalfIntegralForm, TwistBsdData};
use twistlab::arith::enumerate_family;
use twistlab::moments::{
    b_count_from, decorrelation_diagnostics, exponent_sweep, lemma21_check, moment_report, tail_comparison,
    FamilyValues, MomentRequest, RangePolicy, LITTLEWOOD_C,
};
use twistlab::proxy::{calibrate_majorant, rankin_selberg_sum};
use twistlab::report::fmt_f64;
use twistlab::{hecke, AfeParams, HeckeForm, Result};

fn main() -> Result<()> {
    let afe = AfeParams::default();
    let delta = HeckeForm::delta();
    let e11 = HeckeForm::builtin("11a1").unwrap();
    let e37 = HeckeForm::builtin("37b1").unwrap();
    let mut out = String::from("# regression constants frozen by examples/calibrate.rs\n");
    let mut put = |k: &str, v: String| {
        eprintln!("{k}={v}");
        writeln!(out, "{k}={v}").unwrap();
    };

    let slice = enumerate_family(10_000, 1, 1, 8)?;
    let cal = calibrate_majorant(&delta, &slice, &afe)?;
    put("c_cal.Delta.10000", fmt_f64(cal.c_cal));
    put("c_cal.Delta.10000.worst_d", cal.worst_d.map_or("-".into(), |d| d.to_string()));
    put("c_cal.Delta.10000.excluded", cal.excluded.to_string());

    let values = FamilyValues::compute(&[delta.clone()], &slice, &afe)?;
    let rep = moment_report(&values, &[1.0], 10_000)?;
    put("moment.Delta.10000.l1", fmt_f64(rep.mixed_moment));
    put("moment.Delta.10000.size", rep.family_size.to_string());

    let slice3 = enumerate_family(1_000, 1, 1, 8)?;
    let values3 = FamilyValues::compute(&[delta.clone()], &slice3, &afe)?;
    let grid = [-6.0, -4.0, -2.0, 0.0, 1.0];
    let b = b_count_from(&values3, &[1.0], &grid)?;
    put("b.Delta.1000.counts", b.counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
    put("b.Delta.1000.excluded", b.excluded.to_string());

    for big_d in [1_000u64, 10_000, 100_000] {
        let req = MomentRequest::auto(vec![(delta.clone(), 1.0), (e11.clone(), 1.0)], big_d, 1, afe.clone())?;
        let rep = decorrelation_diagnostics(&req)?;
        put(&format!("ratio.Delta_11a1.{big_d}"), fmt_f64(rep.decorrelation_ratio.unwrap()));
        put(&format!("corr.Delta_11a1.{big_d}"), fmt_f64(rep.log_corr[0][1]));
        put(&format!("moment.Delta_11a1.{big_d}"), fmt_f64(rep.mixed_moment));
    }

    let g_delta = HalfIntegralForm::new("g_Delta", delta.clone(), 1.0)?;
    let g_e11 = HalfIntegralForm::new("g_11a1", e11.clone(), 1.0)?;
    let g_e37 = HalfIntegralForm::new("g_37b1", e37.clone(), 1.0)?;
    for big_d in [1_000u64, 10_000] {
        let s = enumerate_family(big_d, 1, 1, 8)?;
        put(&format!("coeffsum.Delta.{big_d}"), fmt_f64(coeff_decorrelation_sum(&[g_delta.clone()], &s, &afe)?.value));
        let s = enumerate_family(big_d, -1, 13, 88)?;
        put(&format!("coeffsum.11a1.{big_d}"), fmt_f64(coeff_decorrelation_sum(&[g_e11.clone()], &s, &afe)?.value));
        let s = enumerate_family(big_d, -1, 13, 3256)?;
        let pair = coeff_decorrelation_sum(&[g_e11.clone(), g_e37.clone()], &s, &afe)?;
        put(&format!("coeffsum.11a1_37b1.{big_d}"), fmt_f64(pair.value));
        put(&format!("coeffsum.11a1_37b1.{big_d}.size"), pair.family_size.to_string());
    }

    let tw11 = TwistBsdData::builtin("11a1").unwrap();
    let tw37 = TwistBsdData::builtin("37b1").unwrap();
    for big_d in [1_000u64, 10_000, 100_000] {
        let s = enumerate_family(big_d, 1, 1, 88)?;
        put(&format!("isotropy.11a1.{big_d}"), fmt_f64(isotropy_statistic(&[tw11.clone()], &s, &afe)?.value));
    }
    for big_d in [1_000u64, 10_000] {
        let s = enumerate_family(big_d, 1, 1, 296)?;
        put(&format!("isotropy.37b1.{big_d}"), fmt_f64(isotropy_statistic(&[tw37.clone()], &s, &afe)?.value));
    }

    let req = MomentRequest::auto(vec![(delta.clone(), 1.0)], 10_000, 1, afe.clone())?;
    let lld = (1e4f64).ln().ln();
    let (lo, hi) = (lld.sqrt(), LITTLEWOOD_C * (1e4f64).ln() / lld);
    let v_grid: Vec<f64> = (0..8).map(|i| lo + (hi - lo) * i as f64 / 7.0).collect();
    let rows = tail_comparison(&req, &v_grid, 1e6)?;
    let worst = rows.iter().map(|r| r.a_count as f64 / r.bound.value).fold(0.0, f64::max);
    put("tail.Delta.10000.max_ratio", fmt_f64(worst));

    let tau = hecke::tau_table(100)?;
    let mut worst = 0.0f64;
    for big_d in [2_000u64, 4_000, 8_000, 16_000] {
        for sigma in [1, -1] {
            let s = enumerate_family(big_d, sigma, 1, 8)?;
            for x in [2.0, 3.0, 5.0, 7.0, 11.0, 13.0] {
                let c = lemma21_check(&s, 1, x, |p| tau.lambda_p(p).unwrap(), RangePolicy::Flag)?;
                worst = worst.max(c.lhs / c.rhs);
            }
        }
    }
    put("lemma21.max_ratio", fmt_f64(worst));

    put("rankin.Delta_11a1.1e6", fmt_f64(rankin_selberg_sum(&delta, &e11, 1e6)?));

    for (name, forms) in [
        ("Delta.l1", vec![(delta.clone(), 1.0)]),
        ("Delta.l2", vec![(delta.clone(), 2.0)]),
        ("Delta_11a1.l11", vec![(delta.clone(), 1.0), (e11.clone(), 1.0)]),
    ] {
        let t = MomentRequest { a: 1, n0: 88, ..MomentRequest::auto(forms, 1_000, 1, afe.clone())? };
        let sw = exponent_sweep(&t, &[1_000, 10_000, 100_000])?;
        put(&format!("sweep.{name}.slope"), fmt_f64(sw.slope));
        put(&format!("sweep.{name}.predicted"), fmt_f64(sw.predicted));
    }

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/calibration.txt");
    std::fs::write(path, out)?;
    Ok(())
}
