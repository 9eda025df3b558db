//! Integer arithmetic: primes, quadratic characters, fundamental discriminants
//! and the families of twists they index.

mod discriminant;
mod family;
mod kronecker;
mod primes;

pub use discriminant::{is_fundamental, is_squarefree, Discriminant};
pub use family::{enumerate_family, family_iter, squarefree_sieve, FamilyIter, FamilySlice, FamilySpec};
pub use kronecker::{kronecker, QuadraticCharacter};
pub use primes::{gcd, isqrt, lcm, sieve_primes, FactorTable, PrimeTable};
