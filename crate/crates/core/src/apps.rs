//! Arithmetic read-outs of twisted central values: magnitudes of
//! half-integral-weight Fourier coefficients through the Kohnen–Zagier formula,
//! and analytic orders of Tate–Shafarevich groups of quadratic twists under BSD.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::arith::{gcd, Discriminant, FamilySlice};
use crate::error::{Error, Result};
use crate::hecke::{check_admissible, EllipticCurveSpec, HeckeForm};
use crate::lfunc::{central_value, AfeParams, LValue};
use crate::moments::FamilyValues;
use crate::numeric::CompensatedSum;
use crate::report::fmt_f64;

/// A weight `k + 1/2` eigenform in the Kohnen plus space, known through its
/// Shimura lift of weight `2k`.
#[derive(Debug, Clone)]
pub struct HalfIntegralForm {
    pub label: String,
    pub shimura_lift: HeckeForm,
    pub k: u32,
    /// `(k−1)!/π^k · ⟨g,g⟩/⟨f,f⟩`, supplied by the caller.
    pub kappa: f64,
}

impl HalfIntegralForm {
    pub fn new(label: impl Into<String>, shimura_lift: HeckeForm, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::config(format!("kappa must be a positive real, got {kappa}")));
        }
        if shimura_lift.weight % 2 != 0 {
            return Err(Error::config(format!("Shimura lift {} must have even weight", shimura_lift.label)));
        }
        let k = shimura_lift.weight / 2;
        Ok(Self { label: label.into(), shimura_lift, k, kappa })
    }

    /// `(−1)^k`: the sign `d` must carry for `c(|d|)` to be a plus-space coefficient.
    pub fn sign(&self) -> i32 {
        if self.k % 2 == 0 {
            1
        } else {
            -1
        }
    }

    fn check_discriminant(&self, d: Discriminant) -> Result<()> {
        if d.sigma() != self.sign() {
            let m = (self.sign() as i64 * d.abs() as i64).rem_euclid(4);
            return Err(Error::domain(format!(
                "{}: (−1)^k |d| = {} ≡ {m} (mod 4), so c(|d|) vanishes identically on the plus space (k = {})",
                self.label,
                self.sign() as i64 * d.abs() as i64,
                self.k
            )));
        }
        if gcd(d.abs(), 4 * self.shimura_lift.level) != 1 {
            return Err(Error::domain(format!("gcd(d, 4N) = 1 required for {} and d = {d}", self.label)));
        }
        Ok(())
    }
}

/// `|c(|d|)|` with the central value it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeff {
    pub value: f64,
    pub lvalue: LValue,
    /// Set when a negative computed `L` was replaced by zero.
    pub clamped: bool,
}

/// `|c(|d|)| = √(κ · max(0, L(1/2, f ⊗ χ_d)))`.
pub fn fourier_coeff(g: &HalfIntegralForm, d: Discriminant, afe: &AfeParams) -> Result<FourierCoeff> {
    g.check_discriminant(d)?;
    let lv = central_value(&g.shimura_lift, d, afe)?;
    Ok(coeff_from(g, lv))
}

fn coeff_from(g: &HalfIntegralForm, lvalue: LValue) -> FourierCoeff {
    let clamped = lvalue.eps_twist == 1 && lvalue.value < 0.0;
    let l = if lvalue.eps_twist == 1 { lvalue.value.max(0.0) } else { 0.0 };
    FourierCoeff { value: (g.kappa * l).sqrt(), lvalue, clamped }
}

/// Averages of coefficient products over a slice.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSum {
    pub big_d: u64,
    pub family_size: usize,
    /// `(1/D) Σ_d Π_i |c_i(|d|)|`
    pub value: f64,
    /// `(1/D) Σ_d |c_i(|d|)|` per form, in input order.
    pub singles: Vec<f64>,
    /// Per-member product average over the product of per-member single averages.
    pub ratio: Option<f64>,
    pub clamped: usize,
}

/// `(1/D) Σ_d Π_i |c_i(|d|)|` over `slice`.
pub fn coeff_decorrelation_sum(gforms: &[HalfIntegralForm], slice: &FamilySlice, afe: &AfeParams) -> Result<CoeffSum> {
    let rows = coeff_rows(gforms, slice, afe)?;
    let big = slice.spec.big_d as f64;
    let n = slice.len();
    let order = label_order(gforms.iter().map(|g| g.label.as_str()));
    let mut total = CompensatedSum::new();
    let mut singles = vec![CompensatedSum::new(); gforms.len()];
    let mut clamped = 0;
    for row in &rows {
        total.add(order.iter().map(|&i| row[i].value).product());
        for (s, c) in singles.iter_mut().zip(row) {
            s.add(c.value);
            clamped += c.clamped as usize;
        }
    }
    let singles: Vec<f64> = singles.iter().map(|s| s.value() / big).collect();
    let value = total.value() / big;
    let ratio = if gforms.len() >= 2 && n > 0 {
        let denom: f64 = order.iter().map(|&i| singles[i] * big / n as f64).product();
        (denom > 0.0).then(|| value * big / n as f64 / denom)
    } else {
        None
    };
    Ok(CoeffSum { big_d: slice.spec.big_d, family_size: n, value, singles, ratio, clamped })
}

/// `|c_i(|d|)|` for every member (outer) and form (inner).
pub fn coeff_rows(gforms: &[HalfIntegralForm], slice: &FamilySlice, afe: &AfeParams) -> Result<Vec<Vec<FourierCoeff>>> {
    if gforms.is_empty() {
        return Err(Error::config("at least one half-integral weight form is required"));
    }
    let mut labels: Vec<&str> = gforms.iter().map(|g| g.shimura_lift.label.as_str()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("Shimura lifts must be pairwise distinct"));
    }
    if gforms.iter().any(|g| g.sign() != slice.spec.sigma) {
        return Err(Error::config(format!(
            "mixed sign conditions: every form needs (−1)^k = sigma = {} on this slice",
            slice.spec.sigma
        )));
    }
    for &d in &slice.members {
        for g in gforms {
            g.check_discriminant(d)?;
        }
    }
    let lifts: Vec<HeckeForm> = gforms.iter().map(|g| g.shimura_lift.clone()).collect();
    let values = FamilyValues::compute(&lifts, slice, afe)?;
    Ok((0..slice.len())
        .map(|j| gforms.iter().zip(&values.values).map(|(g, col)| coeff_from(g, col[j].clone())).collect())
        .collect())
}

fn label_order<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<usize> {
    let labels: Vec<&str> = labels.collect();
    let mut idx: Vec<usize> = (0..labels.len()).collect();
    idx.sort_by_key(|&i| labels[i]);
    idx
}

/// Local BSD data of one twist `E^{(d)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalData {
    pub tamagawa: u64,
    pub torsion: u64,
    /// `ũ` in `Ω(E^{(d)}) = ũ Ω_±(E)/√|d|`.
    pub u_tilde: f64,
}

/// Per-twist local data read from a `d tamagawa_product torsion u_tilde` file.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDataTable {
    pub curve: String,
    entries: BTreeMap<i64, LocalData>,
}

impl LocalDataTable {
    /// Bundled tables for the bundled curves.
    pub fn builtin(label: &str) -> Option<Self> {
        let text = match label {
            "11a1" => include_str!("../data/11a1.local"),
            "37b1" => include_str!("../data/37b1.local"),
            _ => return None,
        };
        Some(Self::parse(text, &format!("{label}.local"), label).expect("bundled local data parses"))
    }

    pub fn from_file(path: &Path, curve: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string(), curve)
    }

    pub fn parse(text: &str, source_name: &str, curve: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::parse(source_name, i + 1, m);
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(err(format!("expected `d tamagawa_product torsion u_tilde`, got {} fields", fields.len())));
            }
            let d: i64 = fields[0].parse().map_err(|_| err(format!("bad discriminant {:?}", fields[0])))?;
            let tamagawa: u64 = fields[1].parse().map_err(|_| err(format!("bad Tamagawa product {:?}", fields[1])))?;
            let torsion: u64 = fields[2].parse().map_err(|_| err(format!("bad torsion order {:?}", fields[2])))?;
            let u_tilde = parse_half_integer(fields[3]).ok_or_else(|| err(format!("u_tilde {:?} is not a positive element of ½ℤ", fields[3])))?;
            if tamagawa == 0 || torsion == 0 {
                return Err(err("Tamagawa product and torsion order must be positive".into()));
            }
            if entries.insert(d, LocalData { tamagawa, torsion, u_tilde }).is_some() {
                return Err(err(format!("duplicate entry for d = {d}")));
            }
        }
        Ok(Self { curve: curve.to_string(), entries })
    }

    pub fn get(&self, d: i64) -> Option<LocalData> {
        self.entries.get(&d).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Positive `p`, `p/2` or decimal in `½ℤ`.
fn parse_half_integer(s: &str) -> Option<f64> {
    let v = match s.split_once('/') {
        Some((p, q)) => p.parse::<f64>().ok()? / q.parse::<f64>().ok()?,
        None => s.parse::<f64>().ok()?,
    };
    (v > 0.0 && (2.0 * v).fract() == 0.0).then_some(v)
}

/// Where a twist's Tamagawa product, torsion and `ũ` come from.
#[derive(Debug, Clone)]
pub enum LocalProvider {
    TableFile(Arc<LocalDataTable>),
    /// Every `c_p = 1`, torsion 1, and the curve-level `ũ`.
    ConstantOverride,
}

impl LocalProvider {
    pub fn tag(&self) -> &'static str {
        match self {
            LocalProvider::TableFile(_) => "TABLE_FILE",
            LocalProvider::ConstantOverride => "CONSTANT_OVERRIDE",
        }
    }
}

/// A curve with the data needed to read `#Ш` of its twists off `L(1/2)`.
#[derive(Debug, Clone)]
pub struct TwistBsdData {
    pub form: HeckeForm,
    /// `ũ` used by [`LocalProvider::ConstantOverride`].
    pub u_tilde: f64,
    pub local: LocalProvider,
    pub warnings: Vec<String>,
}

impl TwistBsdData {
    pub fn new(curve: EllipticCurveSpec, u_tilde: f64, local: LocalProvider) -> Result<Self> {
        if !(u_tilde > 0.0 && (2.0 * u_tilde).fract() == 0.0) {
            return Err(Error::config(format!("u_tilde must be a positive element of ½ℤ, got {u_tilde}")));
        }
        let mut warnings = Vec::new();
        if ![0.5, 1.0, 2.0].contains(&u_tilde) {
            warnings.push(format!("u_tilde = {u_tilde} lies outside the usual range {{1/2, 1, 2}}"));
        }
        Ok(Self { form: HeckeForm::elliptic(curve)?, u_tilde, local, warnings })
    }

    /// Bundled curve with its bundled local-data table.
    pub fn builtin(label: &str) -> Option<Self> {
        let curve = EllipticCurveSpec::builtin(label)?;
        let table = LocalDataTable::builtin(label)?;
        Self::new(curve, 1.0, LocalProvider::TableFile(Arc::new(table))).ok()
    }

    pub fn curve(&self) -> &EllipticCurveSpec {
        self.form.curve().expect("constructed from a curve")
    }

    pub fn local_data(&self, d: Discriminant) -> Result<LocalData> {
        match &self.local {
            LocalProvider::ConstantOverride => Ok(LocalData { tamagawa: 1, torsion: 1, u_tilde: self.u_tilde }),
            LocalProvider::TableFile(t) => t.get(d.value()).ok_or_else(|| Error::DataGap {
                curve: self.form.label.clone(),
                d: d.value(),
                detail: format!(
                    "no Tamagawa/torsion/ũ entry; primes needing local data: {}",
                    bad_primes_of_twist(self.curve(), d)
                ),
            }),
        }
    }
}

fn bad_primes_of_twist(curve: &EllipticCurveSpec, d: Discriminant) -> String {
    let mut ps: Vec<u64> = Vec::new();
    let mut m = d.abs() * curve.conductor;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            ps.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        ps.push(m);
    }
    ps.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

/// Analytic `#Ш` of a twist with the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ShaValue {
    pub sha_an: f64,
    /// `ε = +1` and `L` exceeds its error bound.
    pub rank0: bool,
    pub lvalue: LValue,
    pub local: Option<LocalData>,
}

impl ShaValue {
    /// Nearest perfect square `s²` when `sha_an` is within 1% of it.
    pub fn near_square(&self) -> Option<u64> {
        if !self.rank0 {
            return None;
        }
        let s = self.sha_an.sqrt().round().max(1.0);
        ((self.sha_an - s * s).abs() <= 0.01 * s * s).then_some((s * s) as u64)
    }
}

/// `L · tors² √|d| / (ũ Ω_± Π c_p)`.
pub fn sha_from_parts(l: f64, local: &LocalData, abs_d: u64, omega: f64) -> f64 {
    let t = local.torsion as f64;
    let num = l * (t * t) * (abs_d as f64).sqrt();
    let den = local.u_tilde * omega * local.tamagawa as f64;
    num / den
}

/// `#Ш(E^{(d)})` predicted by BSD in rank 0; zero when the twist does not
/// have analytic rank 0.
pub fn analytic_sha(tw: &TwistBsdData, d: Discriminant, afe: &AfeParams) -> Result<ShaValue> {
    let n = tw.curve().conductor;
    if gcd(d.abs(), 2 * n) != 1 {
        return Err(Error::domain(format!("gcd(d, 2N) = 1 required for {} and d = {d}", tw.form.label)));
    }
    let lv = central_value(&tw.form, d, afe)?;
    sha_from_lvalue(tw, d, lv)
}

fn sha_from_lvalue(tw: &TwistBsdData, d: Discriminant, lv: LValue) -> Result<ShaValue> {
    let rank0 = lv.eps_twist == 1 && lv.value > lv.err_bound;
    if !rank0 {
        return Ok(ShaValue { sha_an: 0.0, rank0, lvalue: lv, local: None });
    }
    let local = tw.local_data(d)?;
    let omega = tw.curve().period_for_sign(d.sigma())?;
    Ok(ShaValue { sha_an: sha_from_parts(lv.value, &local, d.abs(), omega), rank0, lvalue: lv, local: Some(local) })
}

/// Isotropy average over a slice.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyStat {
    pub big_d: u64,
    pub family_size: usize,
    /// `(1/D) Σ_d Π_i δ_{r=0} √(#Ш(E_i^{(d)})) / |d|^{1/4}`
    pub value: f64,
    /// Rank-0 twists per curve, in input order.
    pub rank0_counts: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Analytic `#Ш` of every curve's twist by every member (outer index).
pub fn sha_rows(curves: &[TwistBsdData], slice: &FamilySlice, afe: &AfeParams) -> Result<Vec<Vec<ShaValue>>> {
    if curves.is_empty() {
        return Err(Error::config("at least one curve is required"));
    }
    let forms: Vec<HeckeForm> = curves.iter().map(|c| c.form.clone()).collect();
    check_admissible(&forms, slice.spec.sigma, slice.spec.a as i64, slice.spec.n0)?;
    for &d in &slice.members {
        for c in curves {
            if gcd(d.abs(), 2 * c.curve().conductor) != 1 {
                return Err(Error::domain(format!("gcd(d, 2N) = 1 required for {} and d = {d}", c.form.label)));
            }
        }
    }
    let values = FamilyValues::compute(&forms, slice, afe)?;
    (0..slice.len())
        .map(|j| {
            curves
                .iter()
                .zip(&values.values)
                .map(|(c, col)| sha_from_lvalue(c, slice.members[j], col[j].clone()))
                .collect()
        })
        .collect()
}

/// `(1/D) Σ_d Π_i δ_{r(E_i^{(d)})=0} #H(E_i^{(d)}) / |d|^{1/4}` with `#H = √(#Ш_an)`.
pub fn isotropy_statistic(curves: &[TwistBsdData], slice: &FamilySlice, afe: &AfeParams) -> Result<IsotropyStat> {
    let rows = sha_rows(curves, slice, afe)?;
    let order = label_order(curves.iter().map(|c| c.form.label.as_str()));
    let mut total = CompensatedSum::new();
    let mut rank0_counts = vec![0; curves.len()];
    for (row, &d) in rows.iter().zip(&slice.members) {
        let scale = (d.abs() as f64).powf(0.25);
        total.add(order.iter().map(|&i| row[i].sha_an.sqrt() / scale).product());
        for (c, s) in rank0_counts.iter_mut().zip(row) {
            *c += s.rank0 as usize;
        }
    }
    let mut warnings = Vec::new();
    let mut labels: Vec<&str> = curves.iter().map(|c| c.form.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() < curves.len() {
        warnings.push("repeated curve: distinctness hypothesis does not hold, statistic is a control".to_string());
    }
    for c in curves {
        warnings.extend(c.warnings.iter().cloned());
    }
    Ok(IsotropyStat {
        big_d: slice.spec.big_d,
        family_size: slice.len(),
        value: total.value() / slice.spec.big_d as f64,
        rank0_counts,
        warnings,
    })
}

/// CSV `form,d,eps,L,err,coeff,clamped`, members outer, forms inner.
pub fn write_coeff_csv(mut w: impl Write, gforms: &[HalfIntegralForm], rows: &[Vec<FourierCoeff>]) -> Result<()> {
    writeln!(w, "form,d,eps,L,err,coeff,clamped")?;
    for row in rows {
        for (g, c) in gforms.iter().zip(row) {
            let lv = &c.lvalue;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                g.label,
                lv.d,
                lv.eps_twist,
                fmt_f64(lv.value),
                fmt_f64(lv.err_bound),
                fmt_f64(c.value),
                c.clamped
            )?;
        }
    }
    Ok(())
}

/// CSV `curve,d,eps,L,err,tamagawa,torsion,u_tilde,sha_an,rank0,near_square,scaling_ok`.
///
/// `scaling_ok` recomputes `#Ш` with doubled Tamagawa product, doubled
/// torsion and doubled `ũ` and checks the exact factors `1/2`, `4`, `1/2`.
pub fn write_sha_csv(mut w: impl Write, curves: &[TwistBsdData], rows: &[Vec<ShaValue>]) -> Result<()> {
    writeln!(w, "curve,d,eps,L,err,tamagawa,torsion,u_tilde,sha_an,rank0,near_square,scaling_ok")?;
    for row in rows {
        for (c, s) in curves.iter().zip(row) {
            let lv = &s.lvalue;
            let (tam, tors, u, scaling) = match &s.local {
                Some(loc) => {
                    let omega = c.curve().period_for_sign(lv.d.sigma())?;
                    (loc.tamagawa.to_string(), loc.torsion.to_string(), fmt_f64(loc.u_tilde), scaling_holds(lv.value, loc, lv.d.abs(), omega))
                }
                None => ("-".into(), "-".into(), "-".into(), true),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                c.form.label,
                lv.d,
                lv.eps_twist,
                fmt_f64(lv.value),
                fmt_f64(lv.err_bound),
                tam,
                tors,
                u,
                fmt_f64(s.sha_an),
                s.rank0,
                s.near_square().map_or("-".to_string(), |q| q.to_string()),
                scaling
            )?;
        }
    }
    Ok(())
}

/// Exact rational rescalings of [`sha_from_parts`] under doubling of each input.
pub fn scaling_holds(l: f64, local: &LocalData, abs_d: u64, omega: f64) -> bool {
    let base = sha_from_parts(l, local, abs_d, omega);
    let c2 = sha_from_parts(l, &LocalData { tamagawa: 2 * local.tamagawa, ..*local }, abs_d, omega);
    let t2 = sha_from_parts(l, &LocalData { torsion: 2 * local.torsion, ..*local }, abs_d, omega);
    let u2 = sha_from_parts(l, &LocalData { u_tilde: 2.0 * local.u_tilde, ..*local }, abs_d, omega);
    c2 * 2.0 == base && t2 == 4.0 * base && u2 * 2.0 == base
}
