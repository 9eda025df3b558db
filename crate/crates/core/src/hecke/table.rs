use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::curve::ap_point_count;
use super::form::{EigenSource, HeckeForm};
use super::tau::normalized_tau;
use crate::arith::{sieve_primes, FactorTable};
use crate::error::{Error, Result};

/// Slack on the Deligne and bad-prime bounds for rounding in `a_p/√p`.
const BOUND_SLACK: f64 = 1e-12;

/// Normalized eigenvalues `λ(n)` of one form for every `n ≤ limit`.
#[derive(Debug, Clone)]
pub struct EigenvalueTable {
    form: HeckeForm,
    limit: u64,
    primes: Vec<u64>,
    lambda_primes: Vec<f64>,
    dense: Vec<f64>,
    scaled: Vec<f64>,
}

impl EigenvalueTable {
    pub fn build(form: &HeckeForm, limit: u64) -> Result<Self> {
        let limit = limit.max(2);
        let primes = sieve_primes(limit)?.primes().to_vec();
        let (lambda_primes, dense) = match &form.source {
            EigenSource::TauRecurrence => {
                let dense = normalized_tau(limit)?;
                let lp = primes.iter().map(|&p| dense[p as usize]).collect();
                (lp, dense)
            }
            EigenSource::EllipticPointCount(curve) => {
                let lp: Vec<f64> = primes
                    .par_iter()
                    .map(|&p| {
                        let ap = if form.is_bad(p) {
                            *curve.bad_ap.get(&p).ok_or_else(|| Error::DataGap {
                                curve: curve.label.clone(),
                                d: 1,
                                detail: format!("no tabulated ap_{p} at a bad prime"),
                            })?
                        } else {
                            ap_point_count(curve, p)?
                        };
                        Ok(ap as f64 / (p as f64).sqrt())
                    })
                    .collect::<Result<_>>()?;
                let dense = multiplicative_extension(form, &primes, &lp, limit)?;
                (lp, dense)
            }
            EigenSource::TableFile(data) => {
                let top = primes.last().copied().unwrap_or(2);
                if data.max_prime() < top {
                    return Err(Error::capacity(format!(
                        "table file for {} covers primes up to {}, requested {limit}",
                        form.label,
                        data.max_prime()
                    )));
                }
                let lp: Vec<f64> = primes
                    .iter()
                    .map(|&p| {
                        data.get(p).ok_or_else(|| {
                            Error::capacity(format!("table file for {} has no entry for p = {p}", form.label))
                        })
                    })
                    .collect::<Result<_>>()?;
                let dense = multiplicative_extension(form, &primes, &lp, limit)?;
                (lp, dense)
            }
        };
        check_bounds(form, &primes, &lambda_primes)?;
        let scaled = dense
            .iter()
            .enumerate()
            .map(|(n, &l)| if n == 0 { 0.0 } else { l / (n as f64).sqrt() })
            .collect();
        Ok(Self { form: form.clone(), limit, primes, lambda_primes, dense, scaled })
    }

    pub fn form(&self) -> &HeckeForm {
        &self.form
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `λ(p)` aligned with [`Self::primes`].
    pub fn lambda_primes(&self) -> &[f64] {
        &self.lambda_primes
    }

    /// `λ(n)` for `0 ≤ n ≤ limit`, with `λ(0) = 0`.
    pub fn dense(&self) -> &[f64] {
        &self.dense
    }

    /// `λ(n)/√n` for `0 ≤ n ≤ limit`.
    pub fn scaled(&self) -> &[f64] {
        &self.scaled
    }

    pub fn lambda_p(&self, p: u64) -> Result<f64> {
        if p > self.limit {
            return Err(self.beyond(p));
        }
        match self.primes.binary_search(&p) {
            Ok(i) => Ok(self.lambda_primes[i]),
            Err(_) => Err(Error::domain(format!("{p} is not prime"))),
        }
    }

    pub fn lambda_n(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::domain("λ(n) needs n >= 1"));
        }
        if n <= self.limit {
            return Ok(self.dense[n as usize]);
        }
        let mut m = n;
        let mut value = 1.0;
        for &p in &self.primes {
            if p * p > m {
                break;
            }
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                value *= self.prime_power(p, e)?;
            }
        }
        if m > 1 {
            value *= self.lambda_p(m)?;
        }
        Ok(value)
    }

    fn prime_power(&self, p: u64, e: u32) -> Result<f64> {
        let l = self.lambda_p(p)?;
        if self.form.is_bad(p) {
            return Ok(l.powi(e as i32));
        }
        let (mut prev, mut cur) = (1.0, l);
        for _ in 1..e {
            (prev, cur) = (cur, l * cur - prev);
        }
        Ok(if e == 0 { 1.0 } else { cur })
    }

    /// `α(p)^n + β(p)^n` by `s_n = λ(p)s_{n−1} − s_{n−2}`.
    pub fn big_lambda(&self, p: u64, n: u32) -> Result<f64> {
        self.require_good(p)?;
        let l = self.lambda_p(p)?;
        Ok(power_sum(l, n))
    }

    /// `λ_{sym² f}(p) = λ(p)² − 1`.
    pub fn sym2_lambda(&self, p: u64) -> Result<f64> {
        self.require_good(p)?;
        let l = self.lambda_p(p)?;
        Ok(l * l - 1.0)
    }

    fn require_good(&self, p: u64) -> Result<()> {
        if self.form.is_bad(p) {
            return Err(Error::domain(format!(
                "{} has level divisible by {p}; Satake parameters are defined only for p ∤ N",
                self.form.label
            )));
        }
        Ok(())
    }

    fn beyond(&self, p: u64) -> Error {
        Error::capacity(format!("eigenvalue table for {} covers n <= {}, requested {p}", self.form.label, self.limit))
    }

    /// Writes the `#form` header and one `p λ(p)` line per prime.
    pub fn write_table_file(&self, mut w: impl Write) -> Result<()> {
        let f = &self.form;
        writeln!(w, "#form {} weight {} level {} eps {:+}", f.label, f.weight, f.level, f.root_number)?;
        for (&p, &l) in self.primes.iter().zip(&self.lambda_primes) {
            writeln!(w, "{p} {l:.16e}")?;
        }
        Ok(())
    }
}

/// `s_n` with `s_0 = 2`, `s_1 = λ`.
pub(crate) fn power_sum(l: f64, n: u32) -> f64 {
    let (mut prev, mut cur) = (2.0, l);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        (prev, cur) = (cur, l * cur - prev);
    }
    cur
}

fn check_bounds(form: &HeckeForm, primes: &[u64], lp: &[f64]) -> Result<()> {
    for (&p, &l) in primes.iter().zip(lp) {
        let bound = if form.is_bad(p) { 1.0 } else { 2.0 };
        if !(l.abs() <= bound + BOUND_SLACK) {
            return Err(Error::domain(format!(
                "{}: |λ({p})| = {} exceeds {bound}; eigenvalue provider is inconsistent",
                form.label,
                l.abs()
            )));
        }
    }
    Ok(())
}

/// Extends `λ(p)` to `λ(n)` through the Hecke relations, walking a
/// smallest-prime-factor sieve in increasing `n`.
fn multiplicative_extension(form: &HeckeForm, primes: &[u64], lp: &[f64], limit: u64) -> Result<Vec<f64>> {
    let ft = FactorTable::new(limit)?;
    let n = limit as usize;
    let mut dense = vec![0.0f64; n + 1];
    dense[1] = 1.0;
    for (&p, &l) in primes.iter().zip(lp) {
        dense[p as usize] = l;
    }
    // prime_part[n] = largest power of spf(n) dividing n
    let mut prime_part = vec![0u32; n + 1];
    for m in 2..=n {
        let p = ft.spf(m) as usize;
        let q = m / p;
        prime_part[m] = if q % p == 0 { prime_part[q] * p as u32 } else { p as u32 };
        let pk = prime_part[m] as usize;
        if pk == m {
            if q == 1 {
                continue;
            }
            let l = dense[p];
            dense[m] = if form.is_bad(p as u64) {
                l * dense[q]
            } else {
                l * dense[q] - dense[q / p]
            };
        } else {
            dense[m] = dense[pk] * dense[m / pk];
        }
    }
    Ok(dense)
}

/// Contents of an eigenvalue table file.
#[derive(Debug, Clone, PartialEq)]
pub struct TableFileData {
    pub label: String,
    pub weight: u32,
    pub level: u64,
    pub root_number: i32,
    entries: Vec<(u64, f64)>,
}

impl TableFileData {
    pub fn get(&self, p: u64) -> Option<f64> {
        self.entries.binary_search_by_key(&p, |e| e.0).ok().map(|i| self.entries[i].1)
    }

    pub fn max_prime(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.0)
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }
}

pub fn parse_table_file(text: &str, source_name: &str) -> Result<TableFileData> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(source_name, 1, "empty table file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || Error::parse(source_name, 1, "expected `#form <label> weight <k> level <N> eps <±1>`");
    if h.len() != 8 || h[0] != "#form" || h[2] != "weight" || h[4] != "level" || h[6] != "eps" {
        return Err(bad_header());
    }
    let weight = h[3].parse().map_err(|_| bad_header())?;
    let level = h[5].parse().map_err(|_| bad_header())?;
    let root_number: i32 = h[7].parse().map_err(|_| bad_header())?;
    let mut entries: Vec<(u64, f64)> = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parsed = (|| {
            let p: u64 = it.next()?.parse().ok()?;
            let l: f64 = it.next()?.parse().ok()?;
            it.next().is_none().then_some((p, l))
        })();
        let (p, l) = parsed.ok_or_else(|| Error::parse(source_name, i + 1, "expected `<prime> <lambda>`"))?;
        if entries.last().is_some_and(|&(q, _)| q >= p) {
            return Err(Error::parse(source_name, i + 1, "primes must be strictly increasing"));
        }
        entries.push((p, l));
    }
    Ok(TableFileData { label: h[1].to_string(), weight, level, root_number, entries })
}

type CacheKey = (String, &'static str, u32, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<EigenvalueTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<EigenvalueTable>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Shared table covering at least `limit`; rebuilt only when a larger
/// limit is requested. Values for a given `n` do not depend on the limit.
pub fn eigen_table(form: &HeckeForm, limit: u64) -> Result<Arc<EigenvalueTable>> {
    let key = (form.label.clone(), form.source.tag(), form.weight, form.level);
    if let Some(t) = cache().lock().expect("cache lock").get(&key) {
        if t.limit >= limit && t.form == *form {
            return Ok(Arc::clone(t));
        }
    }
    let table = Arc::new(EigenvalueTable::build(form, limit)?);
    let mut guard = cache().lock().expect("cache lock");
    let entry = guard.entry(key).or_insert_with(|| Arc::clone(&table));
    if entry.limit < table.limit || entry.form != *form {
        *entry = Arc::clone(&table);
    }
    Ok(table)
}

/// `τ(p)/p^{11/2}` table for `Δ`.
pub fn tau_table(limit: u64) -> Result<Arc<EigenvalueTable>> {
    eigen_table(&HeckeForm::delta(), limit)
}
