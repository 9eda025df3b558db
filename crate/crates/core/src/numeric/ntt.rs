//! Number-theoretic transform over word-sized primes `c·2^k + 1`, used for
//! exact power-series products (Ramanujan τ, eta products).

/// NTT-friendly primes below 2^31 with their primitive roots; each admits
/// transforms of length up to 2^23.
pub(crate) const PRIMES: [(u32, u32); 5] = [
    (998_244_353, 3),
    (167_772_161, 3),
    (469_762_049, 3),
    (754_974_721, 11),
    (2_013_265_921, 31),
];

/// Longest transform supported by every entry of [`PRIMES`].
pub(crate) const MAX_LOG_LEN: u32 = 23;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Field {
    p: u32,
    /// `-p^{-1} mod 2^32`
    p_neg_inv: u32,
    /// `2^64 mod p`
    r2: u32,
    root: u32,
}

impl Field {
    pub(crate) fn new(p: u32, root: u32) -> Self {
        debug_assert!(p % 2 == 1 && p < (1 << 31));
        let mut inv: u32 = p;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r2 = ((1u128 << 64) % p as u128) as u32;
        Self {
            p,
            p_neg_inv: inv.wrapping_neg(),
            r2,
            root,
        }
    }

    #[inline(always)]
    fn reduce(&self, t: u64) -> u32 {
        let m = (t as u32).wrapping_mul(self.p_neg_inv);
        let u = ((t + m as u64 * self.p as u64) >> 32) as u32;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 * b as u64)
    }

    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn to_mont(&self, x: u32) -> u32 {
        self.mul(x % self.p, self.r2)
    }

    fn from_mont(&self, x: u32) -> u32 {
        self.reduce(x as u64)
    }

    fn pow_mont(&self, base: u32, mut e: u64) -> u32 {
        let mut acc = self.to_mont(1);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// Reduce a signed integer into `[0, p)`.
    pub(crate) fn reduce_signed(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    /// `table[h + j] = ω_{2h}^{±j}` for every power of two `h < n`, in Montgomery form.
    fn twiddle_table(&self, n: usize, inverse: bool) -> Vec<u32> {
        let mut table = vec![0u32; n.max(2)];
        let g = self.to_mont(self.root);
        let mut h = 1;
        while h < n {
            let mut w_len = self.pow_mont(g, (self.p as u64 - 1) / (2 * h) as u64);
            if inverse {
                w_len = self.pow_mont(w_len, self.p as u64 - 2);
            }
            let mut w = self.to_mont(1);
            for slot in &mut table[h..2 * h] {
                *slot = w;
                w = self.mul(w, w_len);
            }
            h <<= 1;
        }
        table
    }

    /// Decimation in frequency: natural order in, bit-reversed order out.
    fn forward_dif(&self, a: &mut [u32], tw: &[u32]) {
        let n = a.len();
        let mut h = n / 2;
        while h >= 1 {
            let w = &tw[h..2 * h];
            for block in a.chunks_exact_mut(2 * h) {
                let (lo, hi) = block.split_at_mut(h);
                for ((u, v), &wj) in lo.iter_mut().zip(hi.iter_mut()).zip(w) {
                    let (x, y) = (*u, *v);
                    *u = self.add(x, y);
                    *v = self.mul(self.sub(x, y), wj);
                }
            }
            h /= 2;
        }
    }

    /// Decimation in time with inverse roots: bit-reversed in, natural out, scaled by `1/n`.
    fn inverse_dit(&self, a: &mut [u32], tw: &[u32]) {
        let n = a.len();
        let mut h = 1;
        while h < n {
            let w = &tw[h..2 * h];
            for block in a.chunks_exact_mut(2 * h) {
                let (lo, hi) = block.split_at_mut(h);
                for ((u, v), &wj) in lo.iter_mut().zip(hi.iter_mut()).zip(w) {
                    let x = *u;
                    let y = self.mul(*v, wj);
                    *u = self.add(x, y);
                    *v = self.sub(x, y);
                }
            }
            h <<= 1;
        }
        let n_inv = self.pow_mont(self.to_mont(n as u32), self.p as u64 - 2);
        for x in a.iter_mut() {
            *x = self.mul(*x, n_inv);
        }
    }

    fn forward(&self, coeffs: &[u32], size: usize) -> Vec<u32> {
        let mut buf = vec![0u32; size];
        for (slot, &c) in buf.iter_mut().zip(coeffs) {
            *slot = self.to_mont(c);
        }
        self.forward_dif(&mut buf, &self.twiddle_table(size, false));
        buf
    }

    fn backward(&self, mut buf: Vec<u32>, out_len: usize) -> Vec<u32> {
        let size = buf.len();
        self.inverse_dit(&mut buf, &self.twiddle_table(size, true));
        buf.truncate(out_len);
        for x in buf.iter_mut() {
            *x = self.from_mont(*x);
        }
        buf
    }

    #[cfg(test)]
    /// First `out_len` coefficients of `a·b` (inputs in `[0, p)`).
    pub(crate) fn multiply_truncated(&self, a: &[u32], b: &[u32], out_len: usize) -> Vec<u32> {
        let a = &a[..a.len().min(out_len)];
        let b = &b[..b.len().min(out_len)];
        if a.is_empty() || b.is_empty() {
            return vec![0; out_len];
        }
        let size = (a.len() + b.len() - 1).next_power_of_two();
        assert!(size.trailing_zeros() <= MAX_LOG_LEN, "transform length exceeds 2^{MAX_LOG_LEN}");
        let mut fa = self.forward(a, size);
        let fb = self.forward(b, size);
        for (x, &y) in fa.iter_mut().zip(&fb) {
            *x = self.mul(*x, y);
        }
        let mut out = self.backward(fa, out_len.min(size));
        out.resize(out_len, 0);
        out
    }

    /// First `out_len` coefficients of `a²`.
    pub(crate) fn square_truncated(&self, a: &[u32], out_len: usize) -> Vec<u32> {
        let a = &a[..a.len().min(out_len)];
        if a.is_empty() {
            return vec![0; out_len];
        }
        let size = (2 * a.len() - 1).next_power_of_two();
        assert!(size.trailing_zeros() <= MAX_LOG_LEN, "transform length exceeds 2^{MAX_LOG_LEN}");
        let mut fa = self.forward(a, size);
        for x in fa.iter_mut() {
            *x = self.mul(*x, *x);
        }
        let mut out = self.backward(fa, out_len.min(size));
        out.resize(out_len, 0);
        out
    }
}

/// Coefficients of `Π_{n≥1}(1 - q^{step·n})` up to (excluding) `q^len`, by
/// Euler's pentagonal number theorem.
pub(crate) fn euler_product_series(len: usize, step: usize) -> Vec<i64> {
    let mut out = vec![0i64; len];
    for k in 0i64.. {
        let lo = (k * (3 * k - 1) / 2) as usize * step;
        let hi = (k * (3 * k + 1) / 2) as usize * step;
        if lo >= len {
            break;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        out[lo] += sign;
        if k > 0 && hi < len {
            out[hi] += sign;
        }
    }
    out
}

/// Interpret a residue in `[0, p)` as the representative in `(-p/2, p/2]`.
#[cfg(test)]
pub(crate) fn centered(x: u32, p: u32) -> i64 {
    if x > p / 2 {
        x as i64 - p as i64
    } else {
        x as i64
    }
}
