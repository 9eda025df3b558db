use proptest::prelude::*;
use twistlab::arith::{enumerate_family, is_fundamental, kronecker, sieve_primes, squarefree_sieve, QuadraticCharacter};
use twistlab::Error;

fn naive_squarefree(n: u64) -> bool {
    (2..).take_while(|k| k * k <= n).all(|k| n % (k * k) != 0)
}

fn naive_family(big_d: u64, sigma: i64, a: i64, n0: i64) -> Vec<i64> {
    (big_d..=2 * big_d)
        .map(|m| sigma * m as i64)
        .filter(|d| d.rem_euclid(n0) == a.rem_euclid(n0) && d.rem_euclid(4) == 1 && naive_squarefree(d.unsigned_abs()))
        .collect()
}

#[test]
fn prime_table_examples() {
    assert_eq!(sieve_primes(10).unwrap().primes(), &[2, 3, 5, 7]);
    assert_eq!(sieve_primes(2).unwrap().primes(), &[2]);
    assert_eq!(sieve_primes(1_000_000).unwrap().len(), 78_498);
    assert!(sieve_primes(1).is_err());
}

#[test]
fn kronecker_examples() {
    assert_eq!(kronecker(1, 7), 1);
    assert_eq!(kronecker(-4, 2), 0);
    assert_eq!(kronecker(5, 3), -1);
}

#[test]
fn fundamental_examples() {
    assert!(is_fundamental(5).unwrap());
    assert!(is_fundamental(-4).unwrap());
    assert!(is_fundamental(12).unwrap());
    assert!(!is_fundamental(9).unwrap());
    assert!(matches!(is_fundamental(0), Err(Error::Domain(_))));
}

#[test]
fn squarefree_sieve_examples() {
    assert_eq!(squarefree_sieve(8, 12).unwrap(), vec![10, 11]);
    assert!(squarefree_sieve(49, 49).unwrap().is_empty());
    let brute: Vec<u64> = (2..=20).filter(|&n| naive_squarefree(n)).collect();
    assert_eq!(squarefree_sieve(2, 20).unwrap(), brute);
}

#[test]
fn tiny_family_slices() {
    let plus: Vec<i64> = enumerate_family(10, 1, 1, 8).unwrap().members.iter().map(|d| d.value()).collect();
    assert_eq!(plus, vec![17]);
    let minus: Vec<i64> = enumerate_family(10, -1, 1, 8).unwrap().members.iter().map(|d| d.value()).collect();
    assert_eq!(minus, naive_family(10, -1, 1, 8));
    assert_eq!(minus, vec![-15]);
}

#[test]
fn family_rejects_bad_residue_by_name() {
    let err = enumerate_family(100, 1, 3, 8).unwrap_err().to_string();
    assert!(err.contains("a ≡ 1 (mod 4)"), "{err}");
    assert!(enumerate_family(100, 1, 1, 12).is_err());
    assert!(enumerate_family(100, 2, 1, 8).is_err());
}

#[test]
fn families_match_naive_filter_on_mixed_moduli() {
    for (a, n0) in [(1, 8), (13, 88), (5, 296), (1, 3256)] {
        for sigma in [1, -1] {
            for big_d in [50u64, 999, 4_321, 10_000] {
                let got: Vec<i64> = enumerate_family(big_d, sigma, a, n0).unwrap().members.iter().map(|d| d.value()).collect();
                assert_eq!(got, naive_family(big_d, sigma as i64, a, n0 as i64), "D={big_d} σ={sigma} a={a} N0={n0}");
            }
        }
    }
}

proptest! {
    #[test]
    fn family_members_are_fundamental(big_d in 2u64..5_000, neg in any::<bool>(), k in 0i64..2) {
        let sigma = if neg { -1 } else { 1 };
        let slice = enumerate_family(big_d, sigma, 1 + 4 * k, 8).unwrap();
        for d in &slice.members {
            prop_assert!(is_fundamental(d.value()).unwrap());
            prop_assert!(d.abs() >= big_d && d.abs() <= 2 * big_d);
        }
    }

    #[test]
    fn kronecker_completely_multiplicative_in_n(d in -500i64..500, m in 1i64..400, n in 1i64..400) {
        prop_assume!(d != 0 && is_fundamental(d).unwrap());
        prop_assert_eq!(kronecker(d, m * n), kronecker(d, m) * kronecker(d, n));
    }

    #[test]
    fn character_table_matches_symbol(d in -3_000i64..3_000, n in 1u64..100_000) {
        prop_assume!(d != 0 && is_fundamental(d).unwrap());
        prop_assert_eq!(QuadraticCharacter::new(d).eval(n), kronecker(d, n as i64));
    }
}
