use crate::error::{Error, Result};

/// A fundamental discriminant (or `1`), with sign and absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Discriminant {
    d: i64,
}

impl Discriminant {
    pub fn new(d: i64) -> Result<Self> {
        if !is_fundamental(d)? {
            return Err(Error::domain(format!("{d} is not a fundamental discriminant")));
        }
        Ok(Self { d })
    }

    /// For values already known to be fundamental.
    pub(crate) fn new_unchecked(d: i64) -> Self {
        debug_assert!(is_fundamental(d).unwrap_or(false));
        Self { d }
    }

    pub fn value(self) -> i64 {
        self.d
    }

    pub fn sigma(self) -> i32 {
        if self.d > 0 {
            1
        } else {
            -1
        }
    }

    pub fn abs(self) -> u64 {
        self.d.unsigned_abs()
    }

    /// Whether the odd or even prime `p` divides `d`.
    #[inline]
    pub fn divisible_by(self, p: u64) -> bool {
        self.abs() % p == 0
    }
}

impl std::fmt::Display for Discriminant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.d)
    }
}

/// `μ(n)² = 1`, by trial division.
pub fn is_squarefree(mut n: u64) -> bool {
    if n == 0 {
        return false;
    }
    if n % 4 == 0 {
        return false;
    }
    if n % 2 == 0 {
        n /= 2;
    }
    let mut p = 3u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 2;
    }
    true
}

/// `d = 1`, or `d ≡ 1 (mod 4)` squarefree, or `d = 4m` with `m ≡ 2, 3 (mod 4)` squarefree.
pub fn is_fundamental(d: i64) -> Result<bool> {
    if d == 0 {
        return Err(Error::domain("0 is not a discriminant"));
    }
    Ok(match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Products of pairwise coprime prime discriminants −4, ±8, p* = (−1)^{(p−1)/2} p.
    fn product_closure(bound: i64) -> std::collections::BTreeSet<i64> {
        let mut prime_discs = vec![-4i64, 8, -8];
        for p in 3..=bound {
            if (2..p).take_while(|k| k * k <= p).all(|k| p % k != 0) {
                prime_discs.push(if p % 4 == 1 { p } else { -p });
            }
        }
        let mut out = std::collections::BTreeSet::from([1i64]);
        // each factor used at most once; at most one of the even factors
        fn rec(i: usize, cur: i64, even: bool, f: &[i64], bound: i64, out: &mut std::collections::BTreeSet<i64>) {
            for j in i..f.len() {
                let is_even = f[j] % 2 == 0;
                if is_even && even {
                    continue;
                }
                let next = cur * f[j];
                if next.abs() > bound {
                    continue;
                }
                out.insert(next);
                rec(j + 1, next, even || is_even, f, bound, out);
            }
        }
        rec(0, 1, false, &prime_discs, bound, &mut out);
        out
    }

    #[test]
    fn listed_values() {
        assert!(is_fundamental(5).unwrap());
        assert!(is_fundamental(-4).unwrap());
        assert!(is_fundamental(12).unwrap());
        assert!(!is_fundamental(9).unwrap());
        assert!(is_fundamental(1).unwrap());
        assert!(is_fundamental(0).is_err());
    }

    #[test]
    fn matches_prime_discriminant_products() {
        let set = product_closure(100);
        for d in -100i64..=100 {
            if d == 0 {
                continue;
            }
            assert_eq!(is_fundamental(d).unwrap(), set.contains(&d), "d={d}");
        }
    }

    #[test]
    fn discriminant_accessors() {
        let d = Discriminant::new(-15).unwrap();
        assert_eq!((d.value(), d.sigma(), d.abs()), (-15, -1, 15));
        assert!(d.divisible_by(5) && !d.divisible_by(7));
        assert!(Discriminant::new(-16).is_err());
    }
}
