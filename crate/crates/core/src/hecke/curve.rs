//! Elliptic curves over `Q` given by minimal Weierstrass models, and their
//! Frobenius traces `a_p`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::arith::{isqrt, kronecker};
use crate::error::{Error, Result};

/// Largest prime accepted by [`ap_point_count`]; field products stay in `u64`.
pub const AP_CEILING: u64 = 1 << 31;

/// Below this, the character sum over `F_p` is cheaper than baby-step giant-step.
const NAIVE_BELOW: u64 = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticCurveSpec {
    pub label: String,
    /// `[a1, a2, a3, a4, a6]`.
    pub coeffs: [i64; 5],
    pub conductor: u64,
    pub torsion_order: u64,
    pub root_number: i32,
    /// Real period `Ω_+` entering BSD for `E` itself.
    pub real_period: f64,
    /// `√|d|·Ω(E^{(d)})` for odd `d < 0`.
    pub real_period_neg: Option<f64>,
    pub tamagawa: BTreeMap<u64, u64>,
    /// `a_p` at primes of bad reduction.
    pub bad_ap: BTreeMap<u64, i64>,
}

const BUILTIN_11A1: &str = include_str!("../../data/11a1.curve");
const BUILTIN_37B1: &str = include_str!("../../data/37b1.curve");

impl EllipticCurveSpec {
    pub fn builtin(label: &str) -> Option<Self> {
        let text = match label {
            "11a1" => BUILTIN_11A1,
            "37b1" => BUILTIN_37B1,
            _ => return None,
        };
        Some(Self::parse(text, label).expect("bundled curve metadata is well formed"))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `key=value` metadata; `#` starts a comment.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source_name, i + 1, "expected key=value"))?;
            kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
        }
        let get = |k: &str| -> Result<&(usize, String)> {
            kv.get(k)
                .ok_or_else(|| Error::parse(source_name, 0, format!("missing key `{k}`")))
        };
        fn num<T: std::str::FromStr>(src: &str, (line, v): &(usize, String)) -> Result<T> {
            v.parse()
                .map_err(|_| Error::parse(src, *line, format!("cannot parse `{v}`")))
        }
        let mut coeffs = [0i64; 5];
        for (slot, key) in coeffs.iter_mut().zip(["a1", "a2", "a3", "a4", "a6"]) {
            *slot = num(source_name, get(key)?)?;
        }
        let mut tamagawa = BTreeMap::new();
        let mut bad_ap = BTreeMap::new();
        for (k, entry) in &kv {
            if let Some(p) = k.strip_prefix("tamagawa_") {
                let p: u64 = num(source_name, &(entry.0, p.to_string()))?;
                tamagawa.insert(p, num(source_name, entry)?);
            } else if let Some(p) = k.strip_prefix("ap_") {
                let p: u64 = num(source_name, &(entry.0, p.to_string()))?;
                bad_ap.insert(p, num(source_name, entry)?);
            }
        }
        let spec = Self {
            label: get("label")?.1.clone(),
            coeffs,
            conductor: num(source_name, get("conductor")?)?,
            torsion_order: num(source_name, get("torsion")?)?,
            root_number: num(source_name, get("root_number")?)?,
            real_period: num(source_name, get("real_period")?)?,
            real_period_neg: kv.get("real_period_neg").map(|e| num(source_name, e)).transpose()?,
            tamagawa,
            bad_ap,
        };
        spec.validate(source_name)?;
        Ok(spec)
    }

    fn validate(&self, source_name: &str) -> Result<()> {
        let bad = |msg: String| Error::parse(source_name, 0, msg);
        let disc = self.discriminant();
        if disc == 0 {
            return Err(bad("singular model (discriminant 0)".into()));
        }
        if self.root_number.abs() != 1 {
            return Err(bad(format!("root_number must be ±1, got {}", self.root_number)));
        }
        for p in prime_divisors(self.conductor) {
            if disc % p as i128 != 0 {
                return Err(bad(format!("conductor prime {p} does not divide the discriminant {disc}")));
            }
            let ap = self.bad_ap.get(&p).ok_or_else(|| bad(format!("missing ap_{p}")))?;
            if ap.abs() > 1 {
                return Err(bad(format!("ap_{p} = {ap} is not in {{-1, 0, 1}}")));
            }
            if !self.tamagawa.contains_key(&p) {
                return Err(bad(format!("missing tamagawa_{p}")));
            }
        }
        Ok(())
    }

    /// `[b2, b4, b6, b8]`.
    pub fn b_invariants(&self) -> [i128; 4] {
        let [a1, a2, a3, a4, a6] = self.coeffs.map(i128::from);
        [
            a1 * a1 + 4 * a2,
            2 * a4 + a1 * a3,
            a3 * a3 + 4 * a6,
            a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4,
        ]
    }

    /// `[c4, c6]`.
    pub fn c_invariants(&self) -> [i128; 2] {
        let [b2, b4, b6, _] = self.b_invariants();
        [b2 * b2 - 24 * b4, -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6]
    }

    pub fn discriminant(&self) -> i128 {
        let [b2, b4, b6, b8] = self.b_invariants();
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    pub fn has_good_reduction(&self, p: u64) -> bool {
        self.discriminant() % p as i128 != 0
    }

    /// Real period matching the sign of `d`, before the `1/√|d|` scaling.
    pub fn period_for_sign(&self, sigma: i32) -> Result<f64> {
        if sigma > 0 {
            Ok(self.real_period)
        } else {
            self.real_period_neg.ok_or_else(|| {
                Error::DataGap {
                    curve: self.label.clone(),
                    d: -1,
                    detail: "no real_period_neg entry for negative twists".into(),
                }
            })
        }
    }
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `a_p = p + 1 − #E(F_p)` at a prime of good reduction.
pub fn ap_point_count(curve: &EllipticCurveSpec, p: u64) -> Result<i64> {
    if p > AP_CEILING {
        return Err(Error::capacity(format!("point counting supports p <= {AP_CEILING}, got {p}")));
    }
    if p < 2 || !is_prime_u64(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if !curve.has_good_reduction(p) {
        return Err(Error::domain(format!(
            "{} has bad reduction at {p}; use the tabulated ap_{p}",
            curve.label
        )));
    }
    let ap = if p < NAIVE_BELOW { ap_naive(curve, p) } else { ap_bsgs(curve, p).unwrap_or_else(|| ap_naive(curve, p)) };
    debug_assert!((ap * ap) as u64 <= 4 * p);
    Ok(ap)
}

fn is_prime_u64(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Direct count: brute force over `F_2`, otherwise the character sum of the
/// completed square `(2y + a1x + a3)² = 4x³ + b2x² + 2b4x + b6`.
pub(crate) fn ap_naive(curve: &EllipticCurveSpec, p: u64) -> i64 {
    let [a1, a2, a3, a4, a6] = curve.coeffs.map(|c| c.rem_euclid(p as i64) as u64);
    if p == 2 {
        let mut count = 1;
        for x in 0..2u64 {
            for y in 0..2u64 {
                let lhs = y * y + a1 * x * y + a3 * y;
                let rhs = x * x * x + a2 * x * x + a4 * x + a6;
                if (lhs + rhs) % 2 == 0 {
                    count += 1;
                }
            }
        }
        return 3 - count;
    }
    let [b2, b4, b6, _] = curve.b_invariants().map(|b| b.rem_euclid(p as i128) as u64);
    let mut s: i64 = 0;
    for x in 0..p {
        let v = ((4 * x % p * x % p * x % p) + b2 * x % p * x % p + 2 * b4 % p * x % p + b6) % p;
        s += kronecker(v as i64, p as i64) as i64;
    }
    -s
}

/// Arithmetic on `y² = x³ + a·x + b` over `F_p`, affine, `None` at infinity.
#[derive(Clone, Copy)]
struct ShortCurve {
    p: u64,
    a: u64,
}

type Pt = Option<(u64, u64)>;

impl ShortCurve {
    #[inline]
    fn mul(&self, x: u64, y: u64) -> u64 {
        x * y % self.p
    }

    fn inv(&self, x: u64) -> u64 {
        let (mut r0, mut r1) = (self.p as i64, x as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        t0.rem_euclid(self.p as i64) as u64
    }

    fn add(&self, u: Pt, v: Pt) -> Pt {
        let ((x1, y1), (x2, y2)) = match (u, v) {
            (None, _) => return v,
            (_, None) => return u,
            (Some(a), Some(b)) => (a, b),
        };
        let p = self.p;
        let lam = if x1 == x2 {
            if (y1 + y2) % p == 0 {
                return None;
            }
            let num = (3 * self.mul(x1, x1) + self.a) % p;
            self.mul(num, self.inv(2 * y1 % p))
        } else {
            self.mul((y2 + p - y1) % p, self.inv((x2 + p - x1) % p))
        };
        let x3 = (self.mul(lam, lam) + 2 * p - x1 - x2) % p;
        let y3 = (self.mul(lam, (x1 + p - x3) % p) + p - y1) % p;
        Some((x3, y3))
    }

    fn scalar(&self, mut n: u64, u: Pt) -> Pt {
        let mut acc = None;
        let mut base = u;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            n >>= 1;
        }
        acc
    }

    /// Every `t ∈ [lo, hi]` with `t·P = O`, ascending.
    fn annihilators(&self, pt: Pt, lo: u64, hi: u64) -> Vec<u64> {
        let s = isqrt((hi - lo + 1) / 2) + 1;
        let mut baby: Vec<(u64, u64, u64)> = Vec::with_capacity(s as usize);
        let mut cur = None;
        for j in 1..=s {
            cur = self.add(cur, pt);
            match cur {
                None => {
                    // order is exactly j
                    return (lo.div_ceil(j) * j..=hi).step_by(j as usize).collect();
                }
                Some((x, y)) => baby.push((x, y, j)),
            }
        }
        baby.sort_unstable();
        let stride = 2 * s + 1;
        let giant = self.scalar(stride, pt);
        let mut c = lo + s;
        let mut q = self.scalar(c, pt);
        let mut out = Vec::new();
        loop {
            match q {
                None => out.push(c),
                Some((qx, qy)) => {
                    let start = baby.partition_point(|&(x, _, _)| x < qx);
                    for &(_, y, j) in baby[start..].iter().take_while(|&&(x, _, _)| x == qx) {
                        // c·P = j·P gives t = c − j; c·P = −j·P gives t = c + j
                        if y == qy {
                            out.push(c - j);
                        }
                        if (y + qy) % self.p == 0 {
                            out.push(c + j);
                        }
                    }
                }
            }
            if c + s >= hi {
                break;
            }
            c += stride;
            q = self.add(q, giant);
        }
        out.retain(|&t| (lo..=hi).contains(&t));
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Shanks–Mestre: points of `E` and of its quadratic twist both pin down
/// `#E(F_p)` inside the Hasse interval. `None` if the search stalls.
fn ap_bsgs(curve: &EllipticCurveSpec, p: u64) -> Option<i64> {
    let [c4, c6] = curve.c_invariants();
    let pi = p as i128;
    // y² = x³ − 27c4·x − 54c6 is isomorphic to E over F_p for p ≥ 5
    let a = (-27 * c4).rem_euclid(pi) as u64;
    let b = (-54 * c6).rem_euclid(pi) as u64;
    let w = isqrt(4 * p);
    let (lo, hi) = (p + 1 - w, p + 1 + w);
    let mut cand: Option<Vec<u64>> = None;
    for x in 0..p.min(400) {
        let f = (x * x % p * x % p + a * x % p + b) % p;
        if f == 0 {
            continue;
        }
        let twist = kronecker(f as i64, p as i64) < 0;
        // (x·f, f²) lies on y² = x³ + a f² x + b f³, isomorphic to E or its twist
        let curve_f = ShortCurve { p, a: a * (f * f % p) % p };
        let pt = Some((x * f % p, f * f % p));
        let to_n = |t: u64| if twist { 2 * p + 2 - t } else { t };
        let next: Vec<u64> = match &cand {
            Some(c) if c.len() <= 16 => c
                .iter()
                .copied()
                .filter(|&n| curve_f.scalar(to_n(n), pt).is_none())
                .collect(),
            _ => {
                let mut found: Vec<u64> = curve_f.annihilators(pt, lo, hi).into_iter().map(to_n).collect();
                found.sort_unstable();
                if let Some(c) = &cand {
                    found.retain(|n| c.binary_search(n).is_ok());
                }
                found
            }
        };
        match next.len() {
            0 => return None,
            1 => return Some(p as i64 + 1 - next[0] as i64),
            _ => cand = Some(next),
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e11() -> EllipticCurveSpec {
        EllipticCurveSpec::builtin("11a1").unwrap()
    }

    /// Count affine solutions of the long Weierstrass equation directly.
    fn brute_count(curve: &EllipticCurveSpec, p: u64) -> i64 {
        let [a1, a2, a3, a4, a6] = curve.coeffs.map(|c| c.rem_euclid(p as i64) as u64);
        let mut count = 1i64;
        for x in 0..p {
            for y in 0..p {
                let lhs = (y * y + a1 * x % p * y + a3 * y) % p;
                let rhs = (x * x % p * x + a2 * x % p * x + a4 * x + a6) % p;
                if lhs == rhs {
                    count += 1;
                }
            }
        }
        p as i64 + 1 - count
    }

    #[test]
    fn bundled_metadata() {
        let e = e11();
        assert_eq!(e.discriminant(), -161_051);
        assert_eq!(e.c_invariants(), [496, 20_008]);
        let e37 = EllipticCurveSpec::builtin("37b1").unwrap();
        assert_eq!(e37.discriminant(), 50_653);
        assert_eq!(e37.bad_ap[&37], 1);
        assert!(EllipticCurveSpec::builtin("nope").is_none());
    }

    #[test]
    fn small_primes_by_enumeration() {
        let e = e11();
        let expect = [(2, -2), (3, -1), (5, 1), (7, -2), (13, 4)];
        for (p, ap) in expect {
            assert_eq!(brute_count(&e, p), ap);
            assert_eq!(ap_point_count(&e, p).unwrap(), ap);
        }
        let e37 = EllipticCurveSpec::builtin("37b1").unwrap();
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 41, 43] {
            assert_eq!(ap_point_count(&e37, p).unwrap(), brute_count(&e37, p), "p={p}");
        }
    }

    #[test]
    fn bad_prime_is_domain_error() {
        assert!(matches!(ap_point_count(&e11(), 11), Err(Error::Domain(_))));
        assert!(matches!(ap_point_count(&e11(), 15), Err(Error::Domain(_))));
    }

    #[test]
    fn bsgs_matches_character_sum() {
        for label in ["11a1", "37b1"] {
            let e = EllipticCurveSpec::builtin(label).unwrap();
            for p in (NAIVE_BELOW..12_000).filter(|&p| is_prime_u64(p)) {
                let fast = ap_bsgs(&e, p).expect("bsgs settles");
                assert_eq!(fast, ap_naive(&e, p), "{label} p={p}");
            }
        }
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = EllipticCurveSpec::parse("label=x\na1=zero\n", "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let missing = EllipticCurveSpec::parse(&BUILTIN_11A1.replace("ap_11=1", ""), "t").unwrap_err();
        assert!(missing.to_string().contains("ap_11"));
    }
}
