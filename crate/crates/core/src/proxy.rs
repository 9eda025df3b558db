//! Short prime sums standing in for `log L(1/2, f ⊗ χ_d)`: the Chandee
//! majorant, the weighted prime polynomial `P(d; x, y)`, the split of the
//! majorant into its prime and symmetric-square parts, and the coefficient
//! sums that control their variance.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::arith::{gcd, kronecker, Discriminant, FamilySlice, QuadraticCharacter};
use crate::error::{Error, Result};
use crate::hecke::{eigen_table, EigenvalueTable, HeckeForm};
use crate::numeric::CompensatedSum;
use crate::report::fmt_f64;

/// Lengths and weights of the prime polynomial.
#[derive(Debug, Clone)]
pub struct ProxyParams {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub weights: Vec<(HeckeForm, f64)>,
}

impl ProxyParams {
    pub fn new(x: f64, y: f64, z: f64, weights: Vec<(HeckeForm, f64)>) -> Result<Self> {
        let p = Self { x, y, z, weights };
        p.validate()?;
        Ok(p)
    }

    /// `y = x` and `z = x^{1/log log D}` clamped into `[2, x]`.
    pub fn for_family(x: f64, big_d: u64, weights: Vec<(HeckeForm, f64)>) -> Result<Self> {
        let lld = (big_d as f64).ln().ln();
        if !(lld > 0.0) {
            return Err(Error::domain(format!("log log D must be positive, D = {big_d}")));
        }
        let z = x.powf(1.0 / lld).clamp(2.0, x.max(2.0));
        Self::new(x, x, z, weights)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x >= 10.0) || !self.x.is_finite() {
            return Err(Error::config(format!("x >= 10 required, got {}", self.x)));
        }
        if !(2.0 <= self.y && self.y <= self.x) {
            return Err(Error::config(format!("2 <= y <= x required, got y = {}", self.y)));
        }
        if !(2.0 <= self.z && self.z <= self.x) {
            return Err(Error::config(format!("2 <= z <= x required, got z = {}", self.z)));
        }
        if self.weights.is_empty() {
            return Err(Error::config("at least one (form, ℓ) pair is required"));
        }
        for (f, l) in &self.weights {
            if !(*l > 0.0) || !l.is_finite() {
                return Err(Error::config(format!("ℓ for {} must be positive, got {l}", f.label)));
            }
        }
        Ok(())
    }
}

fn floor_u64(x: f64) -> u64 {
    x.floor() as u64
}

fn table_covering(form: &HeckeForm, x: f64) -> Result<Arc<EigenvalueTable>> {
    eigen_table(form, floor_u64(x).max(2))
}

/// `χ_d(p)` for each `p`, through a period table when that is cheaper than
/// per-prime Kronecker reductions.
pub(crate) fn character_at(d: Discriminant, primes: &[u64]) -> Vec<i8> {
    if d.abs() <= 16 * primes.len() as u64 + 1024 {
        let chi = QuadraticCharacter::new(d.value());
        primes.iter().map(|&p| chi.eval(p) as i8).collect()
    } else {
        primes.iter().map(|&p| kronecker(d.value(), p as i64) as i8).collect()
    }
}

fn check_coprime(form: &HeckeForm, d: Discriminant) -> Result<()> {
    if gcd(d.abs(), form.level) != 1 {
        return Err(Error::domain(format!("gcd(d, N) = 1 required for {} and d = {d}", form.label)));
    }
    Ok(())
}

/// Primes of `table` up to `bound` with their eigenvalues.
fn primes_upto(table: &EigenvalueTable, bound: u64) -> Result<(&[u64], &[f64])> {
    if bound > table.limit() {
        return Err(Error::capacity(format!(
            "eigenvalue table for {} covers primes <= {}, requested {bound}",
            table.form().label,
            table.limit()
        )));
    }
    let k = table.primes().partition_point(|&p| p <= bound);
    Ok((&table.primes()[..k], &table.lambda_primes()[..k]))
}

/// One summand `Λ_f(p^n) χ_d(p^n) / (n p^{n(1/2 + 1/log x)}) · log(x/p^n)/log x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantTerm {
    pub p: u64,
    pub n: u32,
    /// `log(x/p^n)/log x`
    pub cutoff: f64,
    pub value: f64,
}

/// Every term of the Chandee majorant, ordered by `p` then `n`.
pub fn majorant_terms(table: &EigenvalueTable, d: Discriminant, x: f64) -> Result<Vec<MajorantTerm>> {
    let form = table.form();
    if !(x > 10.0) {
        return Err(Error::domain(format!("x > 10 required, got {x}")));
    }
    check_coprime(form, d)?;
    let bound = floor_u64(x);
    let (primes, lambdas) = primes_upto(table, bound)?;
    let log_x = x.ln();
    let s = 0.5 + 1.0 / log_x;
    let chis = character_at(d, primes);
    let mut out = Vec::new();
    for ((&p, &l), &chi) in primes.iter().zip(lambdas).zip(&chis) {
        let chi = chi as f64;
        let bad = form.is_bad(p);
        let (mut pn, mut n) = (p, 1u32);
        // s_n = α^n + β^n; at bad p only one Satake root, equal to λ(p)
        let (mut s_prev, mut s_cur) = (2.0, l);
        let (mut chi_n, mut bad_pow) = (chi, l);
        loop {
            let lambda_pn = if bad { bad_pow } else { s_cur };
            let lp = (pn as f64).ln();
            let cutoff = (log_x - lp) / log_x;
            let value = lambda_pn * chi_n * (-(n as f64) * s * (p as f64).ln()).exp() / n as f64 * cutoff;
            out.push(MajorantTerm { p, n, cutoff, value });
            match pn.checked_mul(p) {
                Some(next) if next <= bound => pn = next,
                _ => break,
            }
            n += 1;
            (s_prev, s_cur) = (s_cur, l * s_cur - s_prev);
            chi_n *= chi;
            bad_pow *= l;
        }
    }
    Ok(out)
}

/// `Σ_{p^n ≤ x} Λ_f(p^n) χ_d(p^n) / (n p^{n(1/2+1/log x)}) · log(x/p^n)/log x`,
/// without the `O(log|d|/log x + 1)` term.
pub fn chandee_majorant(form: &HeckeForm, d: Discriminant, x: f64) -> Result<f64> {
    chandee_majorant_with(&*table_covering(form, x)?, d, x)
}

pub fn chandee_majorant_with(table: &EigenvalueTable, d: Discriminant, x: f64) -> Result<f64> {
    let terms = majorant_terms(table, d, x)?;
    Ok(terms.iter().map(|t| t.value).collect::<CompensatedSum>().value())
}

/// The majorant split into primes, prime squares and higher powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantParts {
    /// `Σ_{p≤x} λ(p)χ_d(p) p^{−(1/2+1/log x)} log(x/p)/log x`
    pub prime_part: f64,
    /// `½ Σ_{p≤√x} (λ_{sym²}(p) − 1) δ_{p∤d} p^{−(1+2/log x)} log(x/p²)/log x`
    pub sym2_part: f64,
    /// Terms with `n ≥ 3`.
    pub remainder: f64,
}

impl MajorantParts {
    pub fn total(&self) -> f64 {
        self.prime_part + self.sym2_part + self.remainder
    }
}

/// Prime, symmetric-square and higher-power parts of the majorant, each
/// summed from its own closed form.
pub fn decompose_majorant(form: &HeckeForm, d: Discriminant, x: f64) -> Result<MajorantParts> {
    decompose_majorant_with(&*table_covering(form, x)?, d, x)
}

pub fn decompose_majorant_with(table: &EigenvalueTable, d: Discriminant, x: f64) -> Result<MajorantParts> {
    let form = table.form();
    if !(x > 10.0) {
        return Err(Error::domain(format!("x > 10 required, got {x}")));
    }
    check_coprime(form, d)?;
    let (primes, lambdas) = primes_upto(table, floor_u64(x))?;
    let log_x = x.ln();
    let mut prime_part = CompensatedSum::new();
    let mut sym2_part = CompensatedSum::new();
    let chis = character_at(d, primes);
    for ((&p, &l), &chi) in primes.iter().zip(lambdas).zip(&chis) {
        let lp = (p as f64).ln();
        let chi = chi as f64;
        prime_part.add(l * chi * (-(0.5 + 1.0 / log_x) * lp).exp() * (log_x - lp) / log_x);
        if p.checked_mul(p).is_some_and(|p2| p2 as f64 <= x) && !d.divisible_by(p) {
            // λ_{sym²}(p) − 1 = λ(p)² − 2 at good p; Λ_f(p²) = λ(p)² at bad p
            let coeff = if form.is_bad(p) { l * l } else { l * l - 2.0 };
            sym2_part.add(0.5 * coeff * (-(1.0 + 2.0 / log_x) * lp).exp() * (log_x - 2.0 * lp) / log_x);
        }
    }
    let remainder = majorant_terms(table, d, x)?
        .iter()
        .filter(|t| t.n >= 3)
        .map(|t| t.value)
        .collect::<CompensatedSum>()
        .value();
    Ok(MajorantParts { prime_part: prime_part.value(), sym2_part: sym2_part.value(), remainder })
}

/// `c(p) = Σᵢ ℓᵢ λ_{fᵢ}(p)` for `p ≤ x`, with the smoothing weight
/// `p^{−(1/2+1/log x)} (1 − log p/log x)` folded in.
#[derive(Debug, Clone)]
pub struct PrimePolynomial {
    x: f64,
    primes: Vec<u64>,
    coeffs: Vec<f64>,
    weighted: Vec<f64>,
}

impl PrimePolynomial {
    pub fn new(params: &ProxyParams) -> Result<Self> {
        params.validate()?;
        let bound = floor_u64(params.x);
        let tables = params
            .weights
            .iter()
            .map(|(f, _)| table_covering(f, params.x))
            .collect::<Result<Vec<_>>>()?;
        let (primes, _) = primes_upto(&tables[0], bound)?;
        let primes = primes.to_vec();
        let mut coeffs = vec![0.0; primes.len()];
        for (t, (_, ell)) in tables.iter().zip(&params.weights) {
            let (ps, ls) = primes_upto(t, bound)?;
            debug_assert_eq!(ps, primes.as_slice());
            for (c, &l) in coeffs.iter_mut().zip(ls) {
                *c += ell * l;
            }
        }
        let log_x = params.x.ln();
        let weighted = primes
            .iter()
            .zip(&coeffs)
            .map(|(&p, &c)| {
                let lp = (p as f64).ln();
                c * (-(0.5 + 1.0 / log_x) * lp).exp() * (1.0 - lp / log_x)
            })
            .collect();
        Ok(Self { x: params.x, primes, coeffs, weighted })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `Σᵢ ℓᵢ λ_{fᵢ}(p)` aligned with [`primes`](Self::primes).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `P(d; x, y)`.
    pub fn eval(&self, d: Discriminant, y: f64) -> f64 {
        let k = self.primes.partition_point(|&p| p as f64 <= y);
        let chis = character_at(d, &self.primes[..k]);
        let mut acc = CompensatedSum::new();
        for (&c, &w) in chis.iter().zip(&self.weighted) {
            acc.add(w * c as f64);
        }
        acc.value()
    }
}

fn check_weights_coprime(params: &ProxyParams, d: Discriminant) -> Result<()> {
    params.weights.iter().try_for_each(|(f, _)| check_coprime(f, d))
}

/// `P(d; x, y) = Σ_{p≤y} c(p) χ_d(p) p^{−(1/2+1/log x)} (1 − log p/log x)`.
pub fn p_poly(d: Discriminant, params: &ProxyParams) -> Result<f64> {
    check_weights_coprime(params, d)?;
    Ok(PrimePolynomial::new(params)?.eval(d, params.y))
}

/// `Σ_{y<p≤x} (Σᵢ ℓᵢ λ_{fᵢ}(p))² δ_{p∤d} / p`.
pub fn coefficient_sum(params: &ProxyParams, d: Discriminant, y: f64, x: f64) -> Result<f64> {
    if !(2.0 <= y && y <= x) {
        return Err(Error::domain(format!("2 <= y <= x required, got y = {y}, x = {x}")));
    }
    let tables = params
        .weights
        .iter()
        .map(|(f, _)| table_covering(f, x))
        .collect::<Result<Vec<_>>>()?;
    let bound = floor_u64(x);
    let (primes, _) = primes_upto(&tables[0], bound)?;
    let lambdas = tables
        .iter()
        .map(|t| primes_upto(t, bound).map(|(_, l)| l))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = CompensatedSum::new();
    for (i, &p) in primes.iter().enumerate() {
        if p as f64 <= y || d.divisible_by(p) {
            continue;
        }
        let c: f64 = params.weights.iter().zip(&lambdas).map(|((_, ell), l)| ell * l[i]).sum();
        acc.add(c * c / p as f64);
    }
    Ok(acc.value())
}

/// `Σ_{2<p≤x} λ_f(p) λ_g(p) / p`.
pub fn rankin_selberg_sum(f: &HeckeForm, g: &HeckeForm, x: f64) -> Result<f64> {
    if !(x >= 3.0) {
        return Err(Error::domain(format!("x >= 3 required, got {x}")));
    }
    let (tf, tg) = (table_covering(f, x)?, table_covering(g, x)?);
    let bound = floor_u64(x);
    let (primes, lf) = primes_upto(&tf, bound)?;
    let (_, lg) = primes_upto(&tg, bound)?;
    let mut acc = CompensatedSum::new();
    for ((&p, &a), &b) in primes.iter().zip(lf).zip(lg) {
        if p > 2 {
            acc.add(a * b / p as f64);
        }
    }
    Ok(acc.value())
}

/// One row of the proxy dump; majorant columns are `ℓ`-weighted over forms.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxyRow {
    pub d: Discriminant,
    pub p_full: f64,
    pub p_short: f64,
    pub chandee: f64,
    pub prime_part: f64,
    pub sym2_part: f64,
    pub remainder: f64,
}

/// Proxy rows for every member of `slice`, in slice order.
pub fn proxy_rows(slice: &FamilySlice, params: &ProxyParams) -> Result<Vec<ProxyRow>> {
    let poly = PrimePolynomial::new(params)?;
    let tables = params
        .weights
        .iter()
        .map(|(f, _)| table_covering(f, params.x))
        .collect::<Result<Vec<_>>>()?;
    slice
        .members
        .par_iter()
        .map(|&d| {
            check_weights_coprime(params, d)?;
            let mut row = ProxyRow {
                d,
                p_full: poly.eval(d, params.x),
                p_short: poly.eval(d, params.z),
                chandee: 0.0,
                prime_part: 0.0,
                sym2_part: 0.0,
                remainder: 0.0,
            };
            for (t, (_, ell)) in tables.iter().zip(&params.weights) {
                let parts = decompose_majorant_with(t, d, params.x)?;
                row.chandee += ell * chandee_majorant_with(t, d, params.x)?;
                row.prime_part += ell * parts.prime_part;
                row.sym2_part += ell * parts.sym2_part;
                row.remainder += ell * parts.remainder;
            }
            Ok(row)
        })
        .collect()
}

/// CSV with header `d,p_xx,p_xz,chandee,prime_part,sym2_part,remainder`.
pub fn write_proxy_csv(mut w: impl Write, rows: &[ProxyRow]) -> Result<()> {
    writeln!(w, "d,p_xx,p_xz,chandee,prime_part,sym2_part,remainder")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.d,
            fmt_f64(r.p_full),
            fmt_f64(r.p_short),
            fmt_f64(r.chandee),
            fmt_f64(r.prime_part),
            fmt_f64(r.sym2_part),
            fmt_f64(r.remainder)
        )?;
    }
    Ok(())
}

/// Smallest `c` with `log L ≤ majorant + c·(log|d|/log x + 1)` over a slice.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantCalibration {
    pub c_cal: f64,
    /// Member attaining `c_cal`, if any resolved value exists.
    pub worst_d: Option<Discriminant>,
    pub members: usize,
    /// Members whose central value does not exceed its error bound.
    pub excluded: usize,
}

/// Fits `c_cal` over `slice` with `x = |d|` for each member.
pub fn calibrate_majorant(form: &HeckeForm, slice: &FamilySlice, afe: &crate::lfunc::AfeParams) -> Result<MajorantCalibration> {
    let values = crate::lfunc::central_values(form, &slice.members, afe)?;
    let x_max = slice.members.iter().map(|d| d.abs()).max().unwrap_or(11) as f64;
    let table = table_covering(form, x_max.max(11.0))?;
    let gaps = slice
        .members
        .par_iter()
        .zip(&values)
        .map(|(&d, lv)| {
            if !lv.is_resolved() {
                return Ok(None);
            }
            let x = d.abs() as f64;
            let m = chandee_majorant_with(&table, d, x)?;
            let scale = (d.abs() as f64).ln() / x.ln() + 1.0;
            Ok(Some((lv.value.ln() - m) / scale))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cal = MajorantCalibration { c_cal: 0.0, worst_d: None, members: slice.len(), excluded: 0 };
    for (&d, g) in slice.members.iter().zip(gaps) {
        match g {
            None => cal.excluded += 1,
            Some(g) if cal.worst_d.is_none() || g > cal.c_cal => {
                cal.c_cal = g;
                cal.worst_d = Some(d);
            }
            Some(_) => {}
        }
    }
    Ok(cal)
}
