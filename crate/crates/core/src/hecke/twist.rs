use super::form::HeckeForm;
use crate::arith::{enumerate_family, gcd, kronecker, lcm, Discriminant};
use crate::error::{Error, Result};

/// `ε_f · χ_d(−N)`, the root number of `f ⊗ χ_d`.
pub fn root_number_twist(form: &HeckeForm, d: Discriminant) -> Result<i32> {
    if gcd(d.abs(), form.level) != 1 {
        return Err(Error::domain(format!(
            "twist of {} by d = {d} undefined: gcd(d, {}) > 1",
            form.label, form.level
        )));
    }
    Ok(form.root_number * kronecker(d.value(), -(form.level as i64)))
}

/// `lcm(8, N_1, …, N_m)`.
pub fn family_modulus(forms: &[HeckeForm]) -> u64 {
    forms.iter().fold(8, |acc, f| lcm(acc, f.level))
}

/// Smallest `a ≡ 1 (mod 4)` coprime to `N0` for which every member of a probe
/// slice has all twisted root numbers `+1`; `None` if no class qualifies.
pub fn find_admissible_residue(forms: &[HeckeForm], sigma: i32) -> Result<Option<(u64, u64)>> {
    if forms.is_empty() {
        return Err(Error::config("admissible residue search needs at least one form"));
    }
    if sigma.abs() != 1 {
        return Err(Error::config(format!("sigma must be +1 or -1, got {sigma}")));
    }
    let n0 = family_modulus(forms);
    let probe_d = 8 * n0;
    for a in (1..n0).step_by(4) {
        if gcd(a, n0) != 1 {
            continue;
        }
        let slice = enumerate_family(probe_d, sigma, a as i64, n0)?;
        if slice.is_empty() {
            continue;
        }
        let mut ok = true;
        'members: for &d in &slice.members {
            for f in forms {
                if root_number_twist(f, d)? != 1 {
                    ok = false;
                    break 'members;
                }
            }
        }
        if ok {
            return Ok(Some((a, n0)));
        }
    }
    Ok(None)
}

/// Errors unless every member of `(a, N0)` for sign `sigma` has root numbers `+1`.
pub fn check_admissible(forms: &[HeckeForm], sigma: i32, a: i64, n0: u64) -> Result<()> {
    for f in forms {
        if n0 % f.level != 0 {
            return Err(Error::config(format!("N0 = {n0} is not divisible by the level {} of {}", f.level, f.label)));
        }
    }
    let probe = enumerate_family(8 * n0, sigma, a, n0)?;
    for &d in &probe.members {
        for f in forms {
            if root_number_twist(f, d)? != 1 {
                return Err(Error::config(format!(
                    "residue class a = {a} (mod {n0}) is not admissible: twist of {} by d = {d} has root number -1",
                    f.label
                )));
            }
        }
    }
    Ok(())
}
