use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twistlab::apps::{coeff_decorrelation_sum, coeff_rows, isotropy_statistic, sha_rows, write_coeff_csv, write_sha_csv};
use twistlab::arith::{enumerate_family, is_fundamental, kronecker, sieve_primes};
use twistlab::hecke::{tau_by_recurrence, EigenvalueTable};
use twistlab::lfunc::{central_value, central_values, write_lvalues_csv};
use twistlab::moments::{
    b_count_from, exponent_sweep, gaussian_integral_identity, gaussian_integral_quadrature, large_value_count, moment_report,
    tail_comparison, write_moment_summary, write_tail_comparison_csv, write_tail_csv, FamilyValues, MomentRequest,
    DEFAULT_EPSILON,
};
use twistlab::proxy::{proxy_rows, write_proxy_csv, ProxyParams};
use twistlab::report::{fmt_f64, write_summary};
use twistlab::{Discriminant, Error, HeckeForm, Result};

use crate::config::RunConfig;
use crate::output::Artifacts;

const SLICE_KEYS: [&str; 5] = ["D", "sigma", "a", "n0", "forms"];
const AFE_KEYS: [&str; 4] = ["afe.trunc_multiplier", "afe.rel_tolerance", "afe.max_doublings", "afe.smoothing"];

fn keys<'a>(groups: &[&[&'a str]]) -> Vec<&'a str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

pub fn sieve(cfg: &RunConfig) -> Result<Artifacts> {
    cfg.check_keys("sieve", &SLICE_KEYS)?;
    let forms = cfg.optional_forms()?;
    let slice = cfg.slice(&forms)?;
    let n0 = slice.spec.n0 as i64;
    let mut csv = String::from("d,abs_d,residue\n");
    for d in &slice.members {
        writeln!(csv, "{},{},{}", d.value(), d.abs(), d.value().rem_euclid(n0)).unwrap();
    }
    let mut out = Artifacts::default();
    out.add("sieve.csv", csv.into_bytes());
    Ok(out)
}

pub fn lvalues(cfg: &RunConfig) -> Result<Artifacts> {
    cfg.check_keys("lvalues", &keys(&[&SLICE_KEYS, &AFE_KEYS, &["ds"]]))?;
    let forms = cfg.forms()?;
    let afe = cfg.afe()?;
    let ds: Vec<Discriminant> = match cfg.list::<i64>("ds")? {
        Some(list) => list.into_iter().map(Discriminant::new).collect::<Result<_>>()?,
        None => cfg.slice(&forms)?.members,
    };
    let mut rows = Vec::with_capacity(ds.len() * forms.len());
    for f in &forms {
        rows.extend(central_values(f, &ds, &afe)?);
    }
    let mut out = Artifacts::default();
    out.render("lvalues.csv", |w| write_lvalues_csv(w, &rows))?;
    Ok(out)
}

fn moment_request(cfg: &RunConfig) -> Result<MomentRequest> {
    let forms = cfg.forms()?;
    let ells = cfg.ells(forms.len())?;
    let sigma: i32 = cfg.parsed_required("sigma")?;
    let (a, n0) = cfg.residue(&forms, sigma)?;
    let req = MomentRequest {
        forms: forms.into_iter().zip(ells).collect(),
        big_d: cfg.parsed_required("D")?,
        sigma,
        a,
        n0,
        epsilon_run: cfg.parsed("epsilon")?.unwrap_or(DEFAULT_EPSILON),
        afe: cfg.afe()?,
    };
    req.validate()?;
    Ok(req)
}

pub fn moments(cfg: &RunConfig) -> Result<Artifacts> {
    cfg.check_keys("moments", &keys(&[&SLICE_KEYS, &AFE_KEYS, &["ells", "mode", "d_grid", "epsilon", "v_grid"]]))?;
    let req = moment_request(cfg)?;
    let mut out = Artifacts::default();
    match cfg.get("mode").unwrap_or("moment") {
        mode @ ("moment" | "decorrelation") => {
            if mode == "decorrelation" && req.forms.len() < 2 {
                return Err(Error::Config("decorrelation mode needs at least two forms".into()));
            }
            let slice = req.slice()?;
            let forms: Vec<HeckeForm> = req.forms.iter().map(|(f, _)| f.clone()).collect();
            let values = FamilyValues::compute(&forms, &slice, &req.afe)?;
            let rep = moment_report(&values, &req.ells(), req.big_d)?;
            out.render("moments.txt", |w| write_moment_summary(w, &rep))?;
            let rows: Vec<_> = values.values.iter().flatten().cloned().collect();
            out.render("lvalues.csv", |w| write_lvalues_csv(w, &rows))?;
            if let Some(grid) = cfg.list::<f64>("v_grid")? {
                let tc = b_count_from(&values, &req.ells(), &grid)?;
                out.render("b_tail.csv", |w| write_tail_csv(w, &tc))?;
            }
        }
        "sweep" => {
            let grid: Vec<u64> = cfg.list("d_grid")?.ok_or_else(|| Error::Config("sweep mode needs `d_grid`".into()))?;
            let sw = exponent_sweep(&req, &grid)?;
            let mut csv = String::from("D,family_size,mixed_moment,loglogD,log_moment_per_member,residual\n");
            for (p, r) in sw.points.iter().zip(&sw.residuals) {
                writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    p.big_d,
                    p.family_size,
                    fmt_f64(p.mixed_moment),
                    fmt_f64(p.regressor),
                    fmt_f64(p.response),
                    fmt_f64(*r)
                )
                .unwrap();
            }
            out.add("sweep.csv", csv.into_bytes());
            out.render("sweep.txt", |w| {
                write_summary(w, [("slope", fmt_f64(sw.slope)), ("intercept", fmt_f64(sw.intercept)), ("predicted", fmt_f64(sw.predicted))])
            })?;
        }
        other => return Err(Error::Config(format!("unknown moments mode `{other}` (moment, decorrelation, sweep)"))),
    }
    Ok(out)
}

pub fn proxy(cfg: &RunConfig) -> Result<Artifacts> {
    cfg.check_keys(
        "proxy",
        &keys(&[&SLICE_KEYS, &AFE_KEYS, &["ells", "x", "y", "z", "v_grid", "x_cap", "epsilon", "compare"]]),
    )?;
    let forms = cfg.forms()?;
    let ells = cfg.ells(forms.len())?;
    let slice = cfg.slice(&forms)?;
    let weights: Vec<(HeckeForm, f64)> = forms.iter().cloned().zip(ells.iter().copied()).filter(|(_, l)| *l > 0.0).collect();
    let x: f64 = cfg.parsed_required("x")?;
    let base = ProxyParams::for_family(x, slice.spec.big_d, weights)?;
    let params = ProxyParams::new(x, cfg.parsed("y")?.unwrap_or(base.y), cfg.parsed("z")?.unwrap_or(base.z), base.weights)?;
    let rows = proxy_rows(&slice, &params)?;
    let mut out = Artifacts::default();
    out.render("proxy.csv", |w| write_proxy_csv(w, &rows))?;
    let grid = cfg.list::<f64>("v_grid")?;
    if let Some(grid) = &grid {
        let tc = large_value_count(&slice, &params, grid)?;
        out.render("a_tail.csv", |w| write_tail_csv(w, &tc))?;
    }
    if cfg.parsed::<bool>("compare")?.unwrap_or(false) {
        let grid = grid.ok_or_else(|| Error::Config("compare=true needs `v_grid`".into()))?;
        let req = moment_request(cfg)?;
        let table = tail_comparison(&req, &grid, cfg.parsed("x_cap")?.unwrap_or(1e6))?;
        out.render("tail_comparison.csv", |w| write_tail_comparison_csv(w, &table))?;
    }
    Ok(out)
}

pub fn apps(cfg: &RunConfig) -> Result<Artifacts> {
    cfg.check_keys("apps", &keys(&[&SLICE_KEYS, &AFE_KEYS, &["mode", "kappa", "curves", "u_tilde", "local.*"]]))?;
    let afe = cfg.afe()?;
    let mut out = Artifacts::default();
    match cfg.get("mode").unwrap_or("coeff") {
        "coeff" => {
            let gforms = cfg.half_integral_forms()?;
            let lifts: Vec<HeckeForm> = gforms.iter().map(|g| g.shimura_lift.clone()).collect();
            let slice = cfg.slice(&lifts)?;
            let rows = coeff_rows(&gforms, &slice, &afe)?;
            out.render("coeff.csv", |w| write_coeff_csv(w, &gforms, &rows))?;
            let s = coeff_decorrelation_sum(&gforms, &slice, &afe)?;
            let mut entries = vec![
                ("D", s.big_d.to_string()),
                ("family_size", s.family_size.to_string()),
                ("value", fmt_f64(s.value)),
                ("ratio", s.ratio.map_or("-".into(), fmt_f64)),
                ("clamped", s.clamped.to_string()),
            ];
            let single_keys: Vec<String> = gforms.iter().map(|g| format!("single.{}", g.label)).collect();
            entries.extend(single_keys.iter().map(String::as_str).zip(s.singles.iter().map(|v| fmt_f64(*v))));
            out.render("coeff_summary.txt", |w| write_summary(w, entries))?;
        }
        "sha" => {
            if cfg.get("forms").is_some() {
                return Err(Error::Config("sha mode takes `curves`, not `forms`".into()));
            }
            let curves = cfg.bsd_curves()?;
            let forms: Vec<HeckeForm> = curves.iter().map(|c| c.form.clone()).collect();
            let slice = cfg.slice(&forms)?;
            let rows = sha_rows(&curves, &slice, &afe)?;
            out.render("sha.csv", |w| write_sha_csv(w, &curves, &rows))?;
            let stat = isotropy_statistic(&curves, &slice, &afe)?;
            let mut entries = vec![
                ("D", stat.big_d.to_string()),
                ("family_size", stat.family_size.to_string()),
                ("value", fmt_f64(stat.value)),
            ];
            let rank_keys: Vec<String> = curves.iter().map(|c| format!("rank0.{}", c.form.label)).collect();
            entries.extend(rank_keys.iter().map(String::as_str).zip(stat.rank0_counts.iter().map(usize::to_string)));
            let provider_keys: Vec<String> = curves.iter().map(|c| format!("local_provider.{}", c.form.label)).collect();
            entries.extend(provider_keys.iter().map(String::as_str).zip(curves.iter().map(|c| c.local.tag().to_string())));
            let warnings = stat.warnings.join("; ");
            if !warnings.is_empty() {
                entries.push(("warnings", warnings));
            }
            out.render("isotropy.txt", |w| write_summary(w, entries))?;
        }
        other => return Err(Error::Config(format!("unknown apps mode `{other}` (coeff, sha)"))),
    }
    Ok(out)
}

/// Quick end-to-end checks; the sampled AFE cases depend on `seed`.
pub fn selftest(cfg: &RunConfig, seed: u64) -> Result<(Artifacts, bool)> {
    cfg.check_keys("selftest", &[])?;
    let mut lines: Vec<(String, bool)> = Vec::new();

    let primes = sieve_primes(500)?;
    let mut euler = true;
    for d in -100i64..=100 {
        if d == 0 || !is_fundamental(d)? {
            continue;
        }
        for &p in primes.primes().iter().filter(|&&p| p > 2) {
            let r = pow_mod(d.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
            let e = if r == 0 { 0 } else if r == 1 { 1 } else { -1 };
            euler &= kronecker(d, p as i64) == e;
        }
    }
    lines.push(("kronecker_euler_criterion".into(), euler));

    let tau = tau_by_recurrence(6)?;
    lines.push(("tau_small_values".into(), tau[2] == -24 && tau[3] == 252 && tau[5] == 4830 && tau[6] == tau[2] * tau[3]));

    let e11 = HeckeForm::builtin("11a1").expect("bundled");
    let t = EigenvalueTable::build(&e11, 13)?;
    let aps: Vec<f64> = [2u64, 3, 5, 7, 13].iter().map(|&p| (t.lambda_p(p).unwrap() * (p as f64).sqrt()).round()).collect();
    lines.push(("e11_ap".into(), aps == [-2.0, -1.0, 1.0, -2.0, 4.0]));

    let afe = twistlab::AfeParams::default();
    let l = central_value(&e11, Discriminant::new(1)?, &afe)?;
    lines.push(("e11_central_value".into(), (l.value - 0.253842).abs() < 1e-4));

    let g = gaussian_integral_identity(1.5)?;
    lines.push(("gaussian_identity".into(), (gaussian_integral_quadrature(1.5)? - g).abs() < 1e-8 * g));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<Discriminant> = enumerate_family(1000, 1, 1, 8)?.members;
    let loose = twistlab::AfeParams { trunc_multiplier: 6.0, ..afe };
    let mut stable = true;
    for &d in pool.choose_multiple(&mut rng, 5) {
        let a = central_value(&HeckeForm::delta(), d, &afe)?;
        let b = central_value(&HeckeForm::delta(), d, &loose)?;
        stable &= (a.value - b.value).abs() <= a.err_bound + b.err_bound;
    }
    lines.push(("afe_truncation_stability".into(), stable));

    let all = lines.iter().all(|(_, ok)| *ok);
    let mut text = String::new();
    for (name, ok) in &lines {
        writeln!(text, "{name}={}", if *ok { "PASS" } else { "FAIL" }).unwrap();
    }
    let mut out = Artifacts::default();
    out.add("selftest.txt", text.into_bytes());
    Ok((out, all))
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}
