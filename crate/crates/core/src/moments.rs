//! Family statistics of twisted central values: mixed moments, tail counts of
//! `log L` and of the prime proxy, the closed-form evaluators that bound them,
//! and decorrelation diagnostics.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::arith::{enumerate_family, Discriminant, FamilySlice};
use crate::error::{Error, Result};
use crate::hecke::{check_admissible, find_admissible_residue, HeckeForm};
use crate::lfunc::{central_values, AfeParams, LValue};
use crate::numeric::quadrature::simpson;
use crate::numeric::CompensatedSum;
use crate::proxy::{character_at, PrimePolynomial, ProxyParams};
use crate::report::fmt_f64;

/// Default `ε` for the run; keeps `εV` small on desk-scale grids.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// `C` in the Littlewood-type range `V ≤ C log D / log log D`.
pub const LITTLEWOOD_C: f64 = 2.0;

/// A mixed-moment computation over one family slice.
#[derive(Debug, Clone)]
pub struct MomentRequest {
    /// `(f_i, ℓ_i)`; `ℓ_i = 0` is accepted as a validation mode.
    pub forms: Vec<(HeckeForm, f64)>,
    pub big_d: u64,
    pub sigma: i32,
    pub a: i64,
    pub n0: u64,
    pub epsilon_run: f64,
    pub afe: AfeParams,
}

impl MomentRequest {
    /// Uses the smallest admissible residue class for `forms` and `sigma`.
    pub fn auto(forms: Vec<(HeckeForm, f64)>, big_d: u64, sigma: i32, afe: AfeParams) -> Result<Self> {
        let just_forms: Vec<HeckeForm> = forms.iter().map(|(f, _)| f.clone()).collect();
        let (a, n0) = find_admissible_residue(&just_forms, sigma)?.ok_or_else(|| {
            Error::config(format!("no residue class makes every twisted root number +1 for sigma = {sigma}"))
        })?;
        let req = Self { forms, big_d, sigma, a: a as i64, n0, epsilon_run: DEFAULT_EPSILON, afe };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        if self.forms.is_empty() {
            return Err(Error::config("at least one (form, ℓ) pair is required"));
        }
        for (f, l) in &self.forms {
            if !(*l >= 0.0) || !l.is_finite() {
                return Err(Error::config(format!("ℓ for {} must be a nonnegative real, got {l}", f.label)));
            }
        }
        if !(self.epsilon_run > 0.0 && self.epsilon_run < 0.5) {
            return Err(Error::config(format!("epsilon_run must lie in (0, 0.5), got {}", self.epsilon_run)));
        }
        self.afe.validate()?;
        let forms: Vec<HeckeForm> = self.forms.iter().map(|(f, _)| f.clone()).collect();
        check_admissible(&forms, self.sigma, self.a, self.n0)
    }

    pub fn slice(&self) -> Result<FamilySlice> {
        enumerate_family(self.big_d, self.sigma, self.a, self.n0)
    }

    pub fn ells(&self) -> Vec<f64> {
        self.forms.iter().map(|(_, l)| *l).collect()
    }

    /// Same forms and residue class at another `D`.
    pub fn at(&self, big_d: u64) -> Self {
        Self { big_d, ..self.clone() }
    }
}

/// Central values of every form over one slice, `values[i][j]` for form `i`
/// and member `j`.
#[derive(Debug, Clone)]
pub struct FamilyValues {
    pub members: Vec<Discriminant>,
    pub labels: Vec<String>,
    pub values: Vec<Vec<LValue>>,
}

impl FamilyValues {
    pub fn compute(forms: &[HeckeForm], slice: &FamilySlice, afe: &AfeParams) -> Result<Self> {
        let values = forms
            .iter()
            .map(|f| central_values(f, &slice.members, afe))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members: slice.members.clone(), labels: forms.iter().map(|f| f.label.clone()).collect(), values })
    }
}

/// `L` as it enters moments: forced zeros stay zero and slightly negative
/// outputs, which lie within their error bound of zero, are clamped to it.
fn moment_value(lv: &LValue) -> f64 {
    if lv.eps_twist == -1 {
        0.0
    } else {
        lv.value.max(0.0)
    }
}

/// Label-then-`ℓ` order, so reductions do not depend on how the caller listed forms.
fn canonical_order(labels: &[String], ells: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..labels.len()).collect();
    idx.sort_by(|&i, &j| labels[i].cmp(&labels[j]).then(ells[i].total_cmp(&ells[j])));
    idx
}

/// Per-form statistics over a slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FormStats {
    pub label: String,
    pub ell: f64,
    /// `(1/D) Σ L^ℓ`
    pub moment: f64,
    /// `(1/#family) Σ L^ℓ`
    pub moment_per_member: f64,
    /// Mean of `log L` over resolved members.
    pub log_mean: f64,
    /// Population variance of `log L` over resolved members.
    pub log_var: f64,
    /// Members whose value does not exceed its error bound.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub big_d: u64,
    pub family_size: usize,
    /// `(1/D) Σ_d Π L(1/2, f_i ⊗ χ_d)^{ℓ_i}`
    pub mixed_moment: f64,
    /// The same sum over the family size.
    pub mixed_moment_per_member: f64,
    /// Canonical (label, ℓ) order.
    pub per_form: Vec<FormStats>,
    /// Pairwise covariance of `log L`, each entry over members resolved for both forms.
    pub log_cov: Vec<Vec<f64>>,
    pub log_corr: Vec<Vec<f64>>,
    /// Members with some `ℓ_i > 0` value unresolved, so `log Π L^{ℓ_i}` is undefined.
    pub excluded_zero_count: usize,
    /// Per-member mixed moment over the product of per-member single moments.
    pub decorrelation_ratio: Option<f64>,
    pub warnings: Vec<String>,
}

/// Builds the report from precomputed values.
pub fn moment_report(values: &FamilyValues, ells: &[f64], big_d: u64) -> Result<MomentReport> {
    let m = values.labels.len();
    if ells.len() != m {
        return Err(Error::config(format!("{} forms but {} exponents", m, ells.len())));
    }
    let n = values.members.len();
    if n == 0 {
        return Err(Error::config(format!("empty family slice at D = {big_d}")));
    }
    let order = canonical_order(&values.labels, ells);
    let big = big_d as f64;

    let mut mixed = CompensatedSum::new();
    for j in 0..n {
        let mut prod = 1.0;
        for &i in &order {
            prod *= moment_value(&values.values[i][j]).powf(ells[i]);
        }
        mixed.add(prod);
    }

    let logs: Vec<Vec<Option<f64>>> = order
        .iter()
        .map(|&i| values.values[i].iter().map(|lv| lv.is_resolved().then(|| lv.value.ln())).collect())
        .collect();
    let mut per_form = Vec::with_capacity(m);
    for (k, &i) in order.iter().enumerate() {
        let sum: CompensatedSum = values.values[i].iter().map(|lv| moment_value(lv).powf(ells[i])).collect();
        let resolved: Vec<f64> = logs[k].iter().flatten().copied().collect();
        let (log_mean, log_var) = mean_var(&resolved);
        per_form.push(FormStats {
            label: values.labels[i].clone(),
            ell: ells[i],
            moment: sum.value() / big,
            moment_per_member: sum.value() / n as f64,
            log_mean,
            log_var,
            excluded: n - resolved.len(),
        });
    }

    let mut log_cov = vec![vec![f64::NAN; m]; m];
    let mut log_corr = vec![vec![f64::NAN; m]; m];
    for a in 0..m {
        for b in a..m {
            let pairs: Vec<(f64, f64)> = logs[a].iter().zip(&logs[b]).filter_map(|(x, y)| Some(((*x)?, (*y)?))).collect();
            let (cov, corr) = cov_corr(&pairs);
            log_cov[a][b] = cov;
            log_cov[b][a] = cov;
            log_corr[a][b] = corr;
            log_corr[b][a] = corr;
        }
    }

    let excluded_zero_count = (0..n)
        .filter(|&j| order.iter().enumerate().any(|(k, &i)| ells[i] > 0.0 && logs[k][j].is_none()))
        .count();

    let per_member = mixed.value() / n as f64;
    let decorrelation_ratio = (m >= 2).then(|| per_member / per_form.iter().map(|s| s.moment_per_member).product::<f64>());

    let mut warnings = Vec::new();
    let mut seen: Vec<&str> = values.labels.iter().map(String::as_str).collect();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() < m {
        warnings.push("repeated form: distinctness hypothesis does not hold, statistics are a control".to_string());
    }

    Ok(MomentReport {
        big_d,
        family_size: n,
        mixed_moment: mixed.value() / big,
        mixed_moment_per_member: per_member,
        per_form,
        log_cov,
        log_corr,
        excluded_zero_count,
        decorrelation_ratio,
        warnings,
    })
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).collect::<CompensatedSum>().value() / n;
    (mean, var)
}

fn cov_corr(pairs: &[(f64, f64)]) -> (f64, f64) {
    if pairs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).collect::<CompensatedSum>().value() / n;
    let my = pairs.iter().map(|p| p.1).collect::<CompensatedSum>().value() / n;
    let sxy = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).collect::<CompensatedSum>().value();
    let sxx = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).collect::<CompensatedSum>().value();
    let syy = pairs.iter().map(|p| (p.1 - my) * (p.1 - my)).collect::<CompensatedSum>().value();
    (sxy / n, sxy / (sxx * syy).sqrt())
}

fn request_values(req: &MomentRequest) -> Result<(FamilySlice, FamilyValues)> {
    req.validate()?;
    let slice = req.slice()?;
    let forms: Vec<HeckeForm> = req.forms.iter().map(|(f, _)| f.clone()).collect();
    let values = FamilyValues::compute(&forms, &slice, &req.afe)?;
    Ok((slice, values))
}

/// Empirical mixed moment over the request's slice.
pub fn mixed_moment(req: &MomentRequest) -> Result<MomentReport> {
    let (_, values) = request_values(req)?;
    moment_report(&values, &req.ells(), req.big_d)
}

/// [`mixed_moment`] for two or more forms, including log covariances and the
/// decorrelation ratio.
pub fn decorrelation_diagnostics(req: &MomentRequest) -> Result<MomentReport> {
    if req.forms.len() < 2 {
        return Err(Error::config("decorrelation diagnostics need at least two forms"));
    }
    mixed_moment(req)
}

/// Which of `A(V; x)` and `B(V)` a [`TailCount`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailKind {
    AProxy,
    BLogL,
}

impl fmt::Display for TailKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailKind::AProxy => "A_PROXY",
            TailKind::BLogL => "B_LOGL",
        })
    }
}

/// `#{d : value(d) > V}` along a grid of thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCount {
    pub kind: TailKind,
    pub v_grid: Vec<f64>,
    pub counts: Vec<usize>,
    /// Members with no defined value.
    pub excluded: usize,
}

fn check_grid(v_grid: &[f64]) -> Result<()> {
    if v_grid.windows(2).any(|w| !(w[0] < w[1])) || v_grid.iter().any(|v| v.is_nan()) {
        return Err(Error::config("V grid must be strictly increasing"));
    }
    Ok(())
}

/// Counts of `values > V` for each `V`, one sort for the whole grid.
pub fn tail_counts(values: &[f64], v_grid: &[f64]) -> Result<Vec<usize>> {
    check_grid(v_grid)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(v_grid.iter().map(|&v| sorted.len() - sorted.partition_point(|&x| x <= v)).collect())
}

/// `A(V; x) = #{d : P(d; x, x) > V}`.
pub fn large_value_count(slice: &FamilySlice, params: &ProxyParams, v_grid: &[f64]) -> Result<TailCount> {
    check_grid(v_grid)?;
    let poly = PrimePolynomial::new(params)?;
    let values: Vec<f64> = slice.members.par_iter().map(|&d| poly.eval(d, params.x)).collect();
    Ok(TailCount { kind: TailKind::AProxy, v_grid: v_grid.to_vec(), counts: tail_counts(&values, v_grid)?, excluded: 0 })
}

/// `log Π L(1/2, f_i ⊗ χ_d)^{ℓ_i}` per member; `None` where some `ℓ_i > 0`
/// value is unresolved.
pub fn log_products(values: &FamilyValues, ells: &[f64]) -> Vec<Option<f64>> {
    let order = canonical_order(&values.labels, ells);
    (0..values.members.len())
        .map(|j| {
            let mut acc = 0.0;
            for &i in &order {
                if ells[i] == 0.0 {
                    continue;
                }
                let lv = &values.values[i][j];
                if !lv.is_resolved() {
                    return None;
                }
                acc += ells[i] * lv.value.ln();
            }
            Some(acc)
        })
        .collect()
}

/// `B(V) = #{d : log Π L^{ℓ_i} > V}`; unresolved members are excluded and counted.
pub fn b_count(slice: &FamilySlice, forms: &[(HeckeForm, f64)], afe: &AfeParams, v_grid: &[f64]) -> Result<TailCount> {
    check_grid(v_grid)?;
    let just_forms: Vec<HeckeForm> = forms.iter().map(|(f, _)| f.clone()).collect();
    let ells: Vec<f64> = forms.iter().map(|(_, l)| *l).collect();
    let values = FamilyValues::compute(&just_forms, slice, afe)?;
    b_count_from(&values, &ells, v_grid)
}

pub fn b_count_from(values: &FamilyValues, ells: &[f64], v_grid: &[f64]) -> Result<TailCount> {
    let logs = log_products(values, ells);
    let defined: Vec<f64> = logs.iter().flatten().copied().collect();
    Ok(TailCount {
        kind: TailKind::BLogL,
        v_grid: v_grid.to_vec(),
        counts: tail_counts(&defined, v_grid)?,
        excluded: logs.len() - defined.len(),
    })
}

fn log_log(big_d: f64) -> Result<f64> {
    let ll = big_d.ln().ln();
    if !(ll > 0.0) || !ll.is_finite() {
        return Err(Error::domain(format!("log log D must be positive, D = {big_d}")));
    }
    Ok(ll)
}

/// `σ²(D) = (Σ ℓ_i²) log log D`.
pub fn sigma_sq(ells: &[f64], big_d: f64) -> Result<f64> {
    Ok(ells.iter().map(|l| l * l).sum::<f64>() * log_log(big_d)?)
}

/// `η(D) = (−1/2 + ε)(Σ ℓ_i) log log D`.
pub fn eta(ells: &[f64], big_d: f64, epsilon_run: f64) -> Result<f64> {
    Ok((-0.5 + epsilon_run) * ells.iter().sum::<f64>() * log_log(big_d)?)
}

/// Which moment parameter `r` the tail estimate uses at a given `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `V ≤ (ε/10) σ² log log D`, `r = ⌊V₁²/(2σ²)⌋`.
    Gaussian,
    /// Otherwise, `r = ⌊εV/10⌋`.
    LargeV,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Gaussian => "GAUSSIAN",
            Regime::LargeV => "LARGE_V",
        })
    }
}

/// The tail bound at one `V` with the parameter choices behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub v: f64,
    /// `D (e^{−(1−2ε)V²/(2σ²)} (log log D)³ + e^{−(ε/11) V log V})`
    pub value: f64,
    /// `√(log log D) ≤ V ≤ C log D / log log D`
    pub in_range: bool,
    pub regime: Regime,
    pub r: u64,
    /// `x = D^{1/(εV)}`
    pub x: f64,
    /// `z = x^{1/log log D}`
    pub z: f64,
}

pub fn tail_bound_formula(v: f64, big_d: f64, ells: &[f64], epsilon_run: f64) -> Result<TailBound> {
    let ll = log_log(big_d)?;
    let s2 = sigma_sq(ells, big_d)?;
    let eps = epsilon_run;
    let value = big_d * ((-(1.0 - 2.0 * eps) * v * v / (2.0 * s2)).exp() * ll.powi(3) + (-(eps / 11.0) * v * v.ln()).exp());
    let in_range = ll.sqrt() <= v && v <= LITTLEWOOD_C * big_d.ln() / ll;
    let (regime, r) = if v <= eps / 10.0 * s2 * ll {
        let v1 = (1.0 - eps) * v;
        (Regime::Gaussian, (v1 * v1 / (2.0 * s2)).floor().max(0.0) as u64)
    } else {
        (Regime::LargeV, (eps * v / 10.0).floor().max(0.0) as u64)
    };
    let x = big_d.powf(1.0 / (eps * v));
    Ok(TailBound { v, value, in_range, regime, r, x, z: x.powf(1.0 / ll) })
}

/// `∫ e^{−x²/(2σ²) + x} dx = √(2π) σ e^{σ²/2}`.
pub fn gaussian_integral_identity(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("sigma > 0 required, got {sigma}")));
    }
    Ok((2.0 * std::f64::consts::PI).sqrt() * sigma * (sigma * sigma / 2.0).exp())
}

/// Composite Simpson value of the same integral over `σ² ± 40σ`, the window
/// around the integrand's peak.
pub fn gaussian_integral_quadrature(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("sigma > 0 required, got {sigma}")));
    }
    let c = sigma * sigma;
    let f = |x: f64| (-x * x / (2.0 * c) + x).exp();
    Ok(simpson(f, c - 40.0 * sigma, c + 40.0 * sigma, 20_000))
}

/// Whether [`lemma21_check`] rejects or flags `x > D^{1/(10r)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangePolicy {
    Strict,
    Flag,
}

/// Both sides of the large-sieve moment bound for one `(D, r, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma21Check {
    /// `Σ_d (Σ_{p≤x} a_p χ_d(p)/√p)^{2r}`
    pub lhs: f64,
    /// `(2r)!/(r! 2^r) · D · (Σ_{p≤x} a_p²/p)^r`
    pub rhs: f64,
    /// `x ≤ D^{1/(10r)}`
    pub in_range: bool,
    pub primes: usize,
}

pub fn lemma21_check(slice: &FamilySlice, r: u32, x: f64, coeffs: impl Fn(u64) -> f64, policy: RangePolicy) -> Result<Lemma21Check> {
    if r == 0 {
        return Err(Error::domain("r >= 1 required"));
    }
    let big_d = slice.spec.big_d as f64;
    let in_range = x <= big_d.powf(1.0 / (10.0 * r as f64));
    if !in_range && policy == RangePolicy::Strict {
        return Err(Error::domain(format!("x = {x} exceeds D^(1/(10r)) = {}", big_d.powf(1.0 / (10.0 * r as f64)))));
    }
    let primes: Vec<u64> = if x >= 2.0 {
        crate::arith::sieve_primes(x.floor() as u64)?.primes().to_vec()
    } else {
        Vec::new()
    };
    let a: Vec<f64> = primes.iter().map(|&p| coeffs(p)).collect();
    let lhs_terms: Vec<f64> = slice
        .members
        .par_iter()
        .map(|&d| {
            let chis = character_at(d, &primes);
            let inner: CompensatedSum = primes.iter().zip(&a).zip(&chis).map(|((&p, &ap), &c)| ap * c as f64 / (p as f64).sqrt()).collect();
            inner.value().powi(2 * r as i32)
        })
        .collect();
    let lhs = lhs_terms.into_iter().collect::<CompensatedSum>().value();
    let diag = primes.iter().zip(&a).map(|(&p, &ap)| ap * ap / p as f64).collect::<CompensatedSum>().value();
    // (2r)!/(r! 2^r) = (2r − 1)!!
    let double_factorial: f64 = (1..=r).map(|j| (2 * j - 1) as f64).product();
    let rhs = double_factorial * big_d * diag.powi(r as i32);
    Ok(Lemma21Check { lhs, rhs, in_range, primes: primes.len() })
}

/// One `D` of an exponent sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub big_d: u64,
    pub family_size: usize,
    pub mixed_moment: f64,
    /// `log log D`
    pub regressor: f64,
    /// `log(mixed_moment · D / family_size)`
    pub response: f64,
}

/// Least-squares fit of `response = intercept + slope · log log D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSweep {
    pub points: Vec<SweepPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// `Σ ℓ_i(ℓ_i − 1)/2`
    pub predicted: f64,
}

pub fn exponent_sweep(template: &MomentRequest, d_grid: &[u64]) -> Result<ExponentSweep> {
    if d_grid.len() < 3 || d_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("exponent sweep needs at least three strictly increasing D values"));
    }
    let mut points = Vec::with_capacity(d_grid.len());
    for &big_d in d_grid {
        let rep = mixed_moment(&template.at(big_d))?;
        if !(rep.mixed_moment_per_member > 0.0) {
            return Err(Error::domain(format!("mixed moment vanishes at D = {big_d}; log-linear fit undefined")));
        }
        points.push(SweepPoint {
            big_d,
            family_size: rep.family_size,
            mixed_moment: rep.mixed_moment,
            regressor: log_log(big_d as f64)?,
            response: rep.mixed_moment_per_member.ln(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.regressor).sum::<f64>() / n;
    let my = points.iter().map(|p| p.response).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.regressor - mx) * (p.response - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.regressor - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = points.iter().map(|p| p.response - intercept - slope * p.regressor).collect();
    let predicted = template.forms.iter().map(|(_, l)| l * (l - 1.0) / 2.0).sum();
    Ok(ExponentSweep { points, slope, intercept, residuals, predicted })
}

/// One row comparing the empirical tails with the closed-form bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TailComparisonRow {
    pub bound: TailBound,
    /// Polynomial length actually used: `min(x, x_cap)`.
    pub x_used: f64,
    /// `A(V; x_used)`
    pub a_count: usize,
    /// `B(V + η(D))`
    pub b_count: usize,
}

/// `A(V; D^{1/(εV)})`, `B(V + η)` and the tail bound along `v_grid`.
pub fn tail_comparison(req: &MomentRequest, v_grid: &[f64], x_cap: f64) -> Result<Vec<TailComparisonRow>> {
    check_grid(v_grid)?;
    let (slice, values) = request_values(req)?;
    let ells = req.ells();
    let weights: Vec<(HeckeForm, f64)> = req.forms.iter().filter(|(_, l)| *l > 0.0).cloned().collect();
    let big = req.big_d as f64;
    let shift = eta(&ells, big, req.epsilon_run)?;
    let logs: Vec<f64> = log_products(&values, &ells).into_iter().flatten().collect();
    let mut rows = Vec::with_capacity(v_grid.len());
    for &v in v_grid {
        let bound = tail_bound_formula(v, big, &ells, req.epsilon_run)?;
        let x_used = bound.x.min(x_cap).max(10.0);
        let params = ProxyParams::new(x_used, x_used, x_used, weights.clone())?;
        let a = large_value_count(&slice, &params, &[v])?;
        let b = tail_counts(&logs, &[v + shift])?;
        rows.push(TailComparisonRow { bound, x_used, a_count: a.counts[0], b_count: b[0] });
    }
    Ok(rows)
}

/// Key=value summary of a moment report.
pub fn write_moment_summary(w: impl Write, rep: &MomentReport) -> Result<()> {
    let mut entries: Vec<(String, String)> = vec![
        ("D".into(), rep.big_d.to_string()),
        ("family_size".into(), rep.family_size.to_string()),
        ("mixed_moment".into(), fmt_f64(rep.mixed_moment)),
        ("mixed_moment_per_member".into(), fmt_f64(rep.mixed_moment_per_member)),
        ("excluded_zero_count".into(), rep.excluded_zero_count.to_string()),
    ];
    if let Some(r) = rep.decorrelation_ratio {
        entries.push(("decorrelation_ratio".into(), fmt_f64(r)));
    }
    for (k, s) in rep.per_form.iter().enumerate() {
        entries.push((format!("form.{k}.label"), s.label.clone()));
        entries.push((format!("form.{k}.ell"), fmt_f64(s.ell)));
        entries.push((format!("form.{k}.moment"), fmt_f64(s.moment)));
        entries.push((format!("form.{k}.log_mean"), fmt_f64(s.log_mean)));
        entries.push((format!("form.{k}.log_var"), fmt_f64(s.log_var)));
        entries.push((format!("form.{k}.excluded"), s.excluded.to_string()));
    }
    for (a, row) in rep.log_corr.iter().enumerate() {
        for (b, c) in row.iter().enumerate().skip(a + 1) {
            entries.push((format!("log_corr.{a}.{b}"), fmt_f64(*c)));
        }
    }
    for (k, w) in rep.warnings.iter().enumerate() {
        entries.push((format!("warning.{k}"), w.clone()));
    }
    crate::report::write_summary(w, entries.iter().map(|(k, v)| (k.as_str(), v.clone())))
}

/// CSV `kind,V,count,excluded`, one row per grid point.
pub fn write_tail_csv(mut w: impl Write, tc: &TailCount) -> Result<()> {
    writeln!(w, "kind,V,count,excluded")?;
    for (v, c) in tc.v_grid.iter().zip(&tc.counts) {
        writeln!(w, "{},{},{},{}", tc.kind, fmt_f64(*v), c, tc.excluded)?;
    }
    Ok(())
}

/// CSV of [`tail_comparison`] rows.
pub fn write_tail_comparison_csv(mut w: impl Write, rows: &[TailComparisonRow]) -> Result<()> {
    writeln!(w, "V,in_range,regime,r,x,x_used,z,a_count,b_count,bound")?;
    for row in rows {
        let b = &row.bound;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(b.v),
            b.in_range,
            b.regime,
            b.r,
            fmt_f64(b.x),
            fmt_f64(row.x_used),
            fmt_f64(b.z),
            row.a_count,
            row.b_count,
            fmt_f64(b.value)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_and_eta_at_e_to_e() {
        let ee = std::f64::consts::E.exp();
        assert!((sigma_sq(&[1.0], ee).unwrap() - 1.0).abs() < 1e-12);
        assert!((eta(&[1.0], ee, 0.0).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(eta(&[1.0, 2.0], 1e6, 0.5).unwrap(), 0.0);
        assert!(sigma_sq(&[1.0], 2.0).is_err());
    }

    #[test]
    fn tail_counts_edges() {
        let vals = [0.5, -1.0, 2.0, 2.0];
        assert_eq!(tail_counts(&vals, &[-5.0, 0.0, 2.0, 3.0]).unwrap(), [4, 3, 0, 0]);
        assert_eq!(tail_counts(&vals, &[f64::NEG_INFINITY]).unwrap(), [4]);
        assert!(tail_counts(&vals, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn regime_switches_with_v() {
        let small = tail_bound_formula(1.0, 1e6, &[1.0], 0.1).unwrap();
        assert_eq!(small.regime, Regime::LargeV);
        let s2 = sigma_sq(&[1.0], 1e6).unwrap();
        let ll = 1e6f64.ln().ln();
        let v = 0.5 * 0.1 / 10.0 * s2 * ll;
        assert_eq!(tail_bound_formula(v, 1e6, &[1.0], 0.1).unwrap().regime, Regime::Gaussian);
        assert!(!small.in_range);
    }

    #[test]
    fn large_sieve_strict_rejects_long_polynomial() {
        let slice = enumerate_family(2000, 1, 1, 8).unwrap();
        assert!(lemma21_check(&slice, 1, 13.0, |_| 1.0, RangePolicy::Strict).is_err());
        let c = lemma21_check(&slice, 1, 13.0, |_| 1.0, RangePolicy::Flag).unwrap();
        assert!(!c.in_range);
        assert_eq!(c.primes, 6);
    }

    #[test]
    fn large_sieve_single_prime_counts_odd_members() {
        let slice = enumerate_family(2000, 1, 1, 8).unwrap();
        let c = lemma21_check(&slice, 1, 2.0, |_| 1.0, RangePolicy::Strict).unwrap();
        let odd = slice.members.iter().filter(|d| d.value() % 2 != 0).count();
        assert!((c.lhs - odd as f64 / 2.0).abs() < 1e-12 * odd as f64);
        assert_eq!(c.rhs, 2000.0 / 2.0);
    }
}
