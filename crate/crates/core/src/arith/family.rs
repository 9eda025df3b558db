use super::discriminant::Discriminant;
use super::primes::{gcd, isqrt};
use crate::error::{Error, Result};

const SEGMENT: u64 = 1 << 18;

/// Validated parameters of a slice `D ≤ σd ≤ 2D`, `d ≡ a (mod N0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilySpec {
    pub big_d: u64,
    pub sigma: i32,
    /// Reduced representative in `[0, N0)`.
    pub a: u64,
    pub n0: u64,
}

impl FamilySpec {
    pub fn new(big_d: u64, sigma: i32, a: i64, n0: u64) -> Result<Self> {
        if big_d < 2 {
            return Err(Error::config(format!("D >= 2 required, got {big_d}")));
        }
        if sigma != 1 && sigma != -1 {
            return Err(Error::config(format!("sigma must be +1 or -1, got {sigma}")));
        }
        if n0 == 0 || n0 % 8 != 0 {
            return Err(Error::config(format!("8 | N0 required, got N0 = {n0}")));
        }
        let a_red = a.rem_euclid(n0 as i64) as u64;
        if a_red % 4 != 1 {
            return Err(Error::config(format!("a ≡ 1 (mod 4) required, got a = {a}")));
        }
        if gcd(a_red, n0) != 1 {
            return Err(Error::config(format!("gcd(a, N0) = 1 required, got a = {a}, N0 = {n0}")));
        }
        if big_d.checked_mul(2).is_none_or(|x| x > i64::MAX as u64) {
            return Err(Error::capacity(format!("D = {big_d} overflows the discriminant range")));
        }
        Ok(Self { big_d, sigma, a: a_red, n0 })
    }

    /// Residue of `|d|` modulo `N0` for members of this slice.
    fn abs_residue(&self) -> u64 {
        if self.sigma > 0 {
            self.a
        } else {
            (self.n0 - self.a) % self.n0
        }
    }
}

/// A materialized family slice, ascending by `|d|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySlice {
    pub spec: FamilySpec,
    pub members: Vec<Discriminant>,
}

impl FamilySlice {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn enumerate_family(big_d: u64, sigma: i32, a: i64, n0: u64) -> Result<FamilySlice> {
    let spec = FamilySpec::new(big_d, sigma, a, n0)?;
    Ok(FamilySlice { spec, members: family_iter(spec).collect() })
}

pub fn family_iter(spec: FamilySpec) -> FamilyIter {
    let primes = small_primes(isqrt(2 * spec.big_d));
    FamilyIter { spec, primes, next_lo: spec.big_d, buf: Vec::new(), pos: 0 }
}

/// Streams a slice segment by segment, holding `O(√D + segment)` memory.
#[derive(Debug, Clone)]
pub struct FamilyIter {
    spec: FamilySpec,
    primes: Vec<u64>,
    next_lo: u64,
    buf: Vec<Discriminant>,
    pos: usize,
}

impl FamilyIter {
    fn fill(&mut self) -> bool {
        let hi_all = 2 * self.spec.big_d;
        while self.pos >= self.buf.len() {
            if self.next_lo > hi_all {
                return false;
            }
            let lo = self.next_lo;
            let hi = (lo + SEGMENT - 1).min(hi_all);
            self.next_lo = hi + 1;
            let mask = squarefree_mask(lo, hi, &self.primes);
            let r = self.spec.abs_residue();
            let n0 = self.spec.n0;
            let first = lo + (r + n0 - lo % n0) % n0;
            self.buf.clear();
            self.pos = 0;
            let sign = self.spec.sigma as i64;
            let mut m = first;
            while m <= hi {
                if mask[(m - lo) as usize] && m != 1 {
                    self.buf.push(Discriminant::new_unchecked(sign * m as i64));
                }
                m += n0;
            }
        }
        true
    }
}

impl Iterator for FamilyIter {
    type Item = Discriminant;

    fn next(&mut self) -> Option<Discriminant> {
        if !self.fill() {
            return None;
        }
        let d = self.buf[self.pos];
        self.pos += 1;
        Some(d)
    }
}

fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// `mask[i]` iff `lo + i` is squarefree; `primes` must cover `√hi`.
fn squarefree_mask(lo: u64, hi: u64, primes: &[u64]) -> Vec<bool> {
    let mut mask = vec![true; (hi - lo + 1) as usize];
    for &p in primes {
        let sq = p * p;
        if sq > hi {
            break;
        }
        let mut m = lo.div_ceil(sq) * sq;
        while m <= hi {
            mask[(m - lo) as usize] = false;
            m += sq;
        }
    }
    if lo == 0 {
        mask[0] = false;
    }
    mask
}

/// All squarefree `n ∈ [lo, hi]`, sieving by `p²` for `p ≤ √hi`.
pub fn squarefree_sieve(lo: u64, hi: u64) -> Result<Vec<u64>> {
    if lo < 2 || lo > hi {
        return Err(Error::domain(format!("squarefree sieve needs 2 <= lo <= hi, got [{lo}, {hi}]")));
    }
    let primes = small_primes(isqrt(hi));
    let mask = squarefree_mask(lo, hi, &primes);
    Ok((lo..=hi).zip(mask).filter(|&(_, b)| b).map(|(n, _)| n).collect())
}
