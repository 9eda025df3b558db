//! Central values `L(1/2, f ⊗ χ_d)` by the smoothed approximate functional
//! equation `L(1/2) = (1 + ε) Σ λ(n) χ_d(n) n^{-1/2} V(n/√C)` with
//! `V(y) = Q(k/2, 2πy)` and a certified bound on the discarded tail.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::arith::{gcd, Discriminant, QuadraticCharacter};
use crate::error::{Error, Result};
use crate::hecke::{eigen_table, root_number_twist, EigenvalueTable, HeckeForm};
use crate::numeric::gamma::{upper_regularized_integer, upper_regularized_tail_integral};
use crate::numeric::CompensatedSum;
use crate::report::fmt_f64;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Share of the tolerance budget granted to truncation; the rest absorbs rounding.
const TRUNCATION_SHARE: f64 = 1e-2;

/// `e^{-z}` is advanced by multiplication and re-anchored at this stride.
const EXP_ANCHOR: u64 = 64;

/// Per-term relative rounding allowance, in units of machine epsilon.
const ROUNDING_ULPS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    IncompleteGamma,
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("INCOMPLETE_GAMMA")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfeParams {
    /// Cap `M = trunc_multiplier·√C·max(1, ln C)` on the number of terms.
    pub trunc_multiplier: f64,
    pub rel_tolerance: f64,
    pub smoothing: Smoothing,
    /// Times `M` may double when the certified tail still misses the tolerance.
    pub max_doublings: u32,
}

impl Default for AfeParams {
    fn default() -> Self {
        Self { trunc_multiplier: 3.0, rel_tolerance: 1e-8, smoothing: Smoothing::IncompleteGamma, max_doublings: 4 }
    }
}

impl AfeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.trunc_multiplier >= 1.0) || !self.trunc_multiplier.is_finite() {
            return Err(Error::config(format!("trunc_multiplier must be >= 1, got {}", self.trunc_multiplier)));
        }
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1e-3) {
            return Err(Error::config(format!("rel_tolerance must lie in (0, 1e-3), got {}", self.rel_tolerance)));
        }
        Ok(())
    }
}

/// Diagnostic flags attached to a computed value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LFlags {
    /// `ε = +1` but `value ≤ err_bound`.
    pub vanishing: bool,
    /// `value < −err_bound`.
    pub negative: bool,
    /// The certified error exceeds `rel_tolerance·max(1, |value|)`.
    pub tolerance_missed: bool,
}

impl fmt::Display for LFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.vanishing, "vanishing"), (self.negative, "negative"), (self.tolerance_missed, "tolerance_missed")]
            .into_iter()
            .filter_map(|(on, name)| on.then_some(name))
            .collect();
        if names.is_empty() {
            f.write_str("ok")
        } else {
            f.write_str(&names.join("|"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LValue {
    pub value: f64,
    pub err_bound: f64,
    pub eps_twist: i32,
    pub d: Discriminant,
    pub form_label: String,
    /// Number of Dirichlet coefficients summed.
    pub terms: u64,
    pub flags: LFlags,
}

impl LValue {
    /// Value exceeds its error bound, so its logarithm is meaningful.
    pub fn is_resolved(&self) -> bool {
        self.eps_twist == 1 && self.value > self.err_bound
    }
}

/// `N·d²`.
pub fn conductor(form: &HeckeForm, d: Discriminant) -> Result<u64> {
    if gcd(d.abs(), form.level) != 1 {
        return Err(Error::domain(format!("conductor of {} ⊗ χ_{d}: gcd(d, {}) > 1", form.label, form.level)));
    }
    d.abs()
        .checked_mul(d.abs())
        .and_then(|d2| d2.checked_mul(form.level))
        .ok_or_else(|| Error::capacity(format!("conductor of {} ⊗ χ_{d} overflows 64 bits", form.label)))
}

/// `V(y) = Γ(k/2, 2πy)/Γ(k/2)` for `y > 0` and even `k ≥ 2`.
pub fn afe_kernel(y: f64, k: u32) -> f64 {
    debug_assert!(k >= 2 && k % 2 == 0);
    if y <= 0.0 {
        return 1.0;
    }
    upper_regularized_integer(k / 2, TWO_PI * y)
}

/// Truncation plan for one twist.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Plan {
    sqrt_c: f64,
    terms: u64,
    trunc_bound: f64,
    target_met: bool,
}

/// Tail bound after `n` terms: `|λ(m)|/√m ≤ d(m)/√m ≤ 2` and the monotone
/// kernel give `2·2·(√C/2π)·∫_{z}^∞ Q(k/2, t) dt` with `z = 2πn/√C`.
fn tail_bound(n: u64, sqrt_c: f64, half_k: u32) -> f64 {
    let z = TWO_PI * n as f64 / sqrt_c;
    4.0 * sqrt_c / TWO_PI * upper_regularized_tail_integral(half_k, z)
}

fn plan(form: &HeckeForm, d: Discriminant, params: &AfeParams) -> Result<Plan> {
    let c = conductor(form, d)? as f64;
    let sqrt_c = c.sqrt();
    let half_k = form.weight / 2;
    let target = params.rel_tolerance * TRUNCATION_SHARE;
    // smallest z with bound ≤ target, by bisection on the decreasing tail
    let bound_at = |z: f64| 4.0 * sqrt_c / TWO_PI * upper_regularized_tail_integral(half_k, z);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while bound_at(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if bound_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let certified = (hi * sqrt_c / TWO_PI).ceil().max(1.0) as u64;
    let cap = (params.trunc_multiplier * sqrt_c * c.ln().max(1.0)).ceil() as u64;
    let max_cap = cap.saturating_mul(1u64 << params.max_doublings.min(32));
    let mut terms = certified;
    let mut target_met = true;
    if certified > cap {
        // double the cap until it reaches the certified length or runs out
        let mut m = cap;
        while m < certified && m < max_cap {
            m = m.saturating_mul(2);
        }
        terms = m.min(certified);
        target_met = terms >= certified;
    }
    Ok(Plan { sqrt_c, terms, trunc_bound: tail_bound(terms, sqrt_c, half_k), target_met })
}

/// Dirichlet coefficients needed for `f ⊗ χ_d` under `params`.
pub fn required_terms(form: &HeckeForm, d: Discriminant, params: &AfeParams) -> Result<u64> {
    params.validate()?;
    Ok(plan(form, d, params)?.terms)
}

/// `L(1/2, f ⊗ χ_d)` with a certified error bound.
pub fn central_value(form: &HeckeForm, d: Discriminant, params: &AfeParams) -> Result<LValue> {
    params.validate()?;
    let need = if root_number_twist(form, d)? == 1 { plan(form, d, params)?.terms } else { 2 };
    let table = eigen_table(form, need)?;
    central_value_with(&table, d, params)
}

/// As [`central_value`], against a prebuilt eigenvalue table.
pub fn central_value_with(table: &EigenvalueTable, d: Discriminant, params: &AfeParams) -> Result<LValue> {
    let form = table.form();
    let eps = root_number_twist(form, d)?;
    let mut lv = LValue { value: 0.0, err_bound: 0.0, eps_twist: eps, d, form_label: form.label.clone(), terms: 0, flags: LFlags::default() };
    if eps == -1 {
        return Ok(lv);
    }
    let plan = plan(form, d, params)?;
    if plan.terms > table.limit() {
        return Err(Error::capacity(format!(
            "{} ⊗ χ_{d} needs {} coefficients, table covers {}",
            form.label,
            plan.terms,
            table.limit()
        )));
    }
    let chi = QuadraticCharacter::new(d.value());
    let (sum, abs_sum) = afe_sum(table.scaled(), chi.period(), form.weight / 2, plan.sqrt_c, plan.terms);
    let value = 2.0 * sum;
    let rounding = 2.0 * ROUNDING_ULPS * f64::EPSILON * abs_sum;
    lv.value = value;
    lv.err_bound = plan.trunc_bound + rounding;
    lv.terms = plan.terms;
    lv.flags = LFlags {
        vanishing: value <= lv.err_bound,
        negative: value < -lv.err_bound,
        tolerance_missed: !plan.target_met || lv.err_bound > params.rel_tolerance * value.abs().max(1.0),
    };
    Ok(lv)
}

/// `Σ_{n ≤ terms} (λ(n)/√n) χ(n) V(n/√C)` in ascending `n` with compensated
/// accumulation; also returns `Σ |term|`.
fn afe_sum(scaled: &[f64], chi: &[i8], half_k: u32, sqrt_c: f64, terms: u64) -> (f64, f64) {
    // Σ_{j<a} z^j/j!, highest degree first
    let mut poly = vec![1.0f64; half_k as usize];
    for j in 1..poly.len() {
        poly[j] = poly[j - 1] / j as f64;
    }
    poly.reverse();
    macro_rules! fixed {
        ($($k:literal)*) => {
            match half_k {
                $($k => afe_sum_fixed::<$k>(scaled, chi, poly.as_slice().try_into().expect("length k/2"), sqrt_c, terms),)*
                _ => afe_sum_generic(scaled, chi, &poly, sqrt_c, terms),
            }
        };
    }
    fixed!(1 2 3 4 5 6 7 8 9 10 11 12)
}

fn afe_sum_fixed<const A: usize>(scaled: &[f64], chi: &[i8], poly: &[f64; A], sqrt_c: f64, terms: u64) -> (f64, f64) {
    afe_sum_generic(scaled, chi, poly, sqrt_c, terms)
}

#[inline(always)]
fn afe_sum_generic(scaled: &[f64], chi: &[i8], poly: &[f64], sqrt_c: f64, terms: u64) -> (f64, f64) {
    let h = TWO_PI / sqrt_c;
    let step = (-h).exp();
    let q = chi.len();
    let scaled = &scaled[..=terms as usize];
    let mut r = 0usize;
    let mut e = 1.0f64;
    let mut acc = CompensatedSum::new();
    let mut abs_acc = 0.0f64;
    for n in 1..=terms {
        r += 1;
        if r == q {
            r = 0;
        }
        if n % EXP_ANCHOR == 0 {
            e = (-(n as f64) * h).exp();
        } else {
            e *= step;
        }
        let z = n as f64 * h;
        let v = e * poly.iter().fold(0.0, |a, &c| a * z + c);
        // χ(n) as a factor keeps the loop free of data-dependent branches
        let t = scaled[n as usize] * v * chi[r] as f64;
        abs_acc += t.abs();
        acc.add(t);
    }
    (acc.value(), abs_acc)
}

/// `ln L(1/2, f ⊗ χ_d)`, or `None` when the value does not exceed its error bound.
pub fn log_central_value(form: &HeckeForm, d: Discriminant, params: &AfeParams) -> Result<Option<f64>> {
    let lv = central_value(form, d, params)?;
    Ok(lv.is_resolved().then(|| lv.value.ln()))
}

/// Eigenvalue table large enough for every member of `ds` under `params`.
pub fn table_for(form: &HeckeForm, ds: &[Discriminant], params: &AfeParams) -> Result<Arc<EigenvalueTable>> {
    params.validate()?;
    let mut need = 2u64;
    for &d in ds {
        if root_number_twist(form, d)? == 1 {
            need = need.max(plan(form, d, params)?.terms);
        }
    }
    eigen_table(form, need)
}

/// Central values over a list of discriminants, in input order.
pub fn central_values(form: &HeckeForm, ds: &[Discriminant], params: &AfeParams) -> Result<Vec<LValue>> {
    let table = table_for(form, ds, params)?;
    ds.par_iter().map(|&d| central_value_with(&table, d, params)).collect()
}

/// CSV with header `form,d,eps,value,err,flags`, rows in the given order.
pub fn write_lvalues_csv(mut w: impl Write, rows: &[LValue]) -> Result<()> {
    writeln!(w, "form,d,eps,value,err,flags")?;
    for lv in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            lv.form_label,
            lv.d,
            lv.eps_twist,
            fmt_f64(lv.value),
            fmt_f64(lv.err_bound),
            lv.flags
        )?;
    }
    Ok(())
}
