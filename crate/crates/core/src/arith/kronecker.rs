/// Kronecker symbol `(d/n)` over all integers, via binary reduction and
/// quadratic reciprocity.
pub fn kronecker(d: i64, n: i64) -> i32 {
    if n == 0 {
        return i32::from(d == 1 || d == -1);
    }
    if d % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut k = 1;
    let mut m = n.unsigned_abs();
    if n < 0 && d < 0 {
        k = -k;
    }
    let v = m.trailing_zeros();
    m >>= v;
    if v % 2 == 1 {
        // d is odd here; (d/2) = ±1 by d mod 8
        let r = d.rem_euclid(8);
        if r == 3 || r == 5 {
            k = -k;
        }
    }
    k * jacobi(d.rem_euclid(m as i64) as u64, m)
}

/// Jacobi symbol `(a/m)` for odd `m ≥ 1`.
fn jacobi(mut a: u64, mut m: u64) -> i32 {
    debug_assert!(m % 2 == 1);
    a %= m;
    let mut k = 1;
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 && (m % 8 == 3 || m % 8 == 5) {
            k = -k;
        }
        if a % 4 == 3 && m % 4 == 3 {
            k = -k;
        }
        (a, m) = (m % a, a);
    }
    if m == 1 {
        k
    } else {
        0
    }
}

/// `r ↦ (r/q)` for squarefree odd `q`, as a product of Legendre tables.
/// For odd fundamental `d` this is `χ_d` with `q = |d|`.
fn jacobi_period(q: usize) -> Vec<i8> {
    let mut primes = Vec::new();
    let mut m = q;
    let mut p = 3;
    while p * p <= m {
        if m % p == 0 {
            primes.push(p);
            m /= p;
        }
        p += 2;
    }
    if m > 1 {
        primes.push(m);
    }
    let mut table = vec![1i8; q];
    for &p in &primes {
        let mut leg = vec![-1i8; p];
        leg[0] = 0;
        for x in 1..=p / 2 {
            leg[x * x % p] = 1;
        }
        let mut r = 0;
        for slot in table.iter_mut() {
            *slot *= leg[r];
            r += 1;
            if r == p {
                r = 0;
            }
        }
    }
    table
}

/// `χ_d` for a fundamental discriminant, tabulated over one period `|d|`.
#[derive(Debug, Clone)]
pub struct QuadraticCharacter {
    d: i64,
    table: Vec<i8>,
}

impl QuadraticCharacter {
    /// Caller guarantees `d` is fundamental; otherwise the table is not a period.
    pub fn new(d: i64) -> Self {
        let q = d.unsigned_abs().max(1) as usize;
        let table = if d % 2 != 0 && q > 1 {
            jacobi_period(q)
        } else {
            (0..q).map(|r| kronecker(d, r as i64) as i8).collect()
        };
        Self { d, table }
    }

    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn modulus(&self) -> u64 {
        self.table.len() as u64
    }

    /// `χ_d(n)` for `n ≥ 1`.
    #[inline]
    pub fn eval(&self, n: u64) -> i32 {
        self.table[(n % self.table.len() as u64) as usize] as i32
    }

    /// One period, `table[r] = χ_d(r)`.
    pub fn period(&self) -> &[i8] {
        &self.table
    }
}
