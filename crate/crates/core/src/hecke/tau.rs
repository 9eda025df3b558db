//! Ramanujan's `τ(n)`, the coefficients of `q·Π(1 − q^n)^24`.

use crate::error::{Error, Result};
use crate::numeric::ntt::{euler_product_series, Field, MAX_LOG_LEN, PRIMES};
use rayon::prelude::*;

/// Largest `n` for which `τ(n)` can be produced: the cube of the Euler product
/// must square inside the longest available transform.
pub const TAU_CEILING: u64 = 1 << (MAX_LOG_LEN - 1);

/// Below this length the sparse recurrence beats the transforms.
const RECURRENCE_CUTOFF: u64 = 4096;

/// Coefficients `c_0..c_{len-1}` of `Π(1 − q^n)^24` by the exact recurrence
/// `n·c_n = Σ_{j≥1} p_j c_{n−j} (25j − n)` over the sparse pentagonal series `p_j`.
pub fn tau_by_recurrence(limit: u64) -> Result<Vec<i128>> {
    let len = limit as usize;
    let pent: Vec<(usize, i128)> = euler_product_series(len, 1)
        .into_iter()
        .enumerate()
        .skip(1)
        .filter(|&(_, c)| c != 0)
        .map(|(j, c)| (j, c as i128))
        .collect();
    let mut c = vec![0i128; len];
    if len > 0 {
        c[0] = 1;
    }
    for n in 1..len {
        let mut acc: i128 = 0;
        for &(j, pj) in pent.iter().take_while(|&&(j, _)| j <= n) {
            let term = pj
                .checked_mul(c[n - j])
                .and_then(|t| t.checked_mul(25 * j as i128 - n as i128))
                .ok_or_else(|| overflow(n))?;
            acc = acc.checked_add(term).ok_or_else(|| overflow(n))?;
        }
        debug_assert_eq!(acc % n as i128, 0);
        c[n] = acc / n as i128;
    }
    // τ(n) = c_{n−1}; index 0 holds τ(0) = 0
    let mut tau = Vec::with_capacity(len + 1);
    tau.push(0);
    tau.extend(c);
    Ok(tau)
}

fn overflow(n: usize) -> Error {
    Error::capacity(format!("τ({}) exceeds 128-bit range", n + 1))
}

/// Residues of `Π(1 − q^n)^24` modulo each transform prime. The cube
/// `Σ (−1)^k (2k+1) q^{k(k+1)/2}` has `O(√len)` terms, so its square is formed
/// sparsely and exactly; the remaining two squarings use the transforms.
fn eta24_residues(len: usize) -> Vec<(u32, Vec<u32>)> {
    let mut cube: Vec<(usize, i64)> = Vec::new();
    for k in 0i64.. {
        let e = (k * (k + 1) / 2) as usize;
        if e >= len {
            break;
        }
        cube.push((e, if k % 2 == 0 { 2 * k + 1 } else { -(2 * k + 1) }));
    }
    let mut sixth = vec![0i64; len];
    for (i, &(ei, ci)) in cube.iter().enumerate() {
        for &(ej, cj) in &cube[i..] {
            if ei + ej >= len {
                break;
            }
            sixth[ei + ej] += if ei == ej { 1 } else { 2 } * ci * cj;
        }
    }
    PRIMES
        .par_iter()
        .map(|&(p, g)| {
            let field = Field::new(p, g);
            let mut s: Vec<u32> = sixth.iter().map(|&x| field.reduce_signed(x)).collect();
            for _ in 0..2 {
                s = field.square_truncated(&s, len);
            }
            (p, s)
        })
        .collect()
}

/// Garner mixed-radix digits of each coefficient, with the prime moduli.
struct MixedRadix {
    moduli: Vec<u64>,
    digits: Vec<[u64; PRIMES.len()]>,
}

fn mixed_radix(len: usize) -> MixedRadix {
    let res = eta24_residues(len);
    let m: Vec<u64> = res.iter().map(|(p, _)| *p as u64).collect();
    let k = m.len();
    // inv[i][j] = m_i^{-1} mod m_j for i < j
    let mut inv = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            inv[i][j] = mod_pow(m[i] % m[j], m[j] - 2, m[j]);
        }
    }
    let digits = (0..len)
        .into_par_iter()
        .map(|n| {
            let mut v = [0u64; PRIMES.len()];
            for j in 0..k {
                let mut x = res[j].1[n] as u64;
                for i in 0..j {
                    x = (x + m[j] - v[i] % m[j]) % m[j] * inv[i][j] % m[j];
                }
                v[j] = x;
            }
            v
        })
        .collect();
    MixedRadix { moduli: m, digits }
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

impl MixedRadix {
    /// The representative is negative iff the top digit is in the upper half;
    /// valid because `|c_n|` is far below the product of the lower moduli.
    fn negative(&self, v: &[u64]) -> bool {
        let top = self.moduli.len() - 1;
        v[top] > self.moduli[top] / 2
    }

    fn exact(&self, n: usize) -> Option<i128> {
        let v = &self.digits[n];
        let neg = self.negative(v);
        let mut acc: i128 = 0;
        let mut radix: i128 = 1;
        for (i, &m) in self.moduli.iter().enumerate() {
            // x − M = Σ (v_i − m_i + 1) R_i − 1 with all summands ≤ 0
            let digit = if neg { v[i] as i128 - m as i128 + 1 } else { v[i] as i128 };
            acc = acc.checked_add(digit.checked_mul(radix)?)?;
            if i + 1 < self.moduli.len() {
                radix = radix.checked_mul(m as i128).unwrap_or(i128::MAX);
            }
        }
        Some(if neg { acc - 1 } else { acc })
    }

    /// Same sum in floating point; every summand has one sign, so no cancellation.
    fn approx(&self, n: usize) -> f64 {
        let v = &self.digits[n];
        let neg = self.negative(v);
        let mut acc = 0.0f64;
        let mut radix = 1.0f64;
        for (i, &m) in self.moduli.iter().enumerate() {
            let digit = if neg { v[i] as f64 - m as f64 + 1.0 } else { v[i] as f64 };
            acc += digit * radix;
            radix *= m as f64;
        }
        if neg {
            acc - 1.0
        } else {
            acc
        }
    }
}

/// Exact `τ(n)` for `0 ≤ n ≤ limit` (`τ(0) = 0`).
pub fn tau_values(limit: u64) -> Result<Vec<i128>> {
    check_limit(limit)?;
    if limit <= RECURRENCE_CUTOFF {
        return tau_by_recurrence(limit);
    }
    let mr = mixed_radix(limit as usize);
    let mut out = Vec::with_capacity(limit as usize + 1);
    out.push(0);
    for n in 0..limit as usize {
        out.push(mr.exact(n).ok_or_else(|| overflow(n))?);
    }
    Ok(out)
}

/// Normalized `τ(n)/n^{11/2}` for `0 ≤ n ≤ limit` (entry 0 is 0).
pub fn normalized_tau(limit: u64) -> Result<Vec<f64>> {
    check_limit(limit)?;
    let raw: Vec<f64> = if limit <= RECURRENCE_CUTOFF {
        tau_by_recurrence(limit)?.into_iter().map(|t| t as f64).collect()
    } else {
        let mr = mixed_radix(limit as usize);
        // exact integers where they fit, so values do not depend on the limit
        std::iter::once(0.0)
            .chain((0..limit as usize).map(|n| mr.exact(n).map_or_else(|| mr.approx(n), |x| x as f64)))
            .collect()
    };
    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(n, t)| if n == 0 { 0.0 } else { t / n_pow_11_2(n as f64) })
        .collect())
}

#[inline]
fn n_pow_11_2(n: f64) -> f64 {
    n.powi(5) * n.sqrt()
}

fn check_limit(limit: u64) -> Result<()> {
    if limit == 0 {
        return Err(Error::domain("τ table needs limit >= 1"));
    }
    if limit > TAU_CEILING {
        return Err(Error::capacity(format!(
            "τ table limit {limit} exceeds the ceiling {TAU_CEILING}"
        )));
    }
    Ok(())
}
