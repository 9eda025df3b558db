#!/usr/bin/env python3
"""Independent re-implementation of the prime-sum proxies, frozen as fixtures.

Eigenvalues come from PARI (ramanujantau, ellap), characters from PARI's
kronecker, and Λ(p^n) from the Satake roots in complex arithmetic rather than
the power-sum recurrence used by the Rust code.

Writes tests/fixtures/proxy_oracle.txt (key=value).
Run from crates/core:  python3 tests/oracles/proxy_fixtures.py
"""
import cmath
import math

import cypari2

pari = cypari2.Pari()

E11 = pari.ellinit([0, -1, 1, -10, -20])


def primes_upto(x):
    return [int(p) for p in pari.primes([2, int(x)])]


def lam(form, p):
    if form == "Delta":
        return int(pari.ramanujantau(p)) / p**5.5
    return int(pari.ellap(E11, p)) / math.sqrt(p)


def bad(form, p):
    return form == "11a1" and p == 11


def big_lambda(form, p, n):
    l = lam(form, p)
    if bad(form, p):
        return l**n
    alpha = complex(l / 2, math.sqrt(max(0.0, 1 - l * l / 4)))
    return (alpha**n + alpha.conjugate() ** n).real


def chi(d, n):
    return int(pari.kronecker(d, n))


def chandee(form, d, x):
    lx = math.log(x)
    total = 0.0
    parts = [0.0, 0.0, 0.0]
    for p in primes_upto(x):
        n = 1
        while p**n <= x:
            t = big_lambda(form, p, n) * chi(d, p**n) / (n * p ** (n * (0.5 + 1 / lx))) * math.log(x / p**n) / lx
            total += t
            parts[min(n, 3) - 1] += t
            n += 1
    return total, parts


def p_poly(weights, d, x, y):
    lx = math.log(x)
    s = 0.0
    for p in primes_upto(y):
        c = sum(ell * lam(f, p) for f, ell in weights)
        s += c * chi(d, p) / p ** (0.5 + 1 / lx) * (1 - math.log(p) / lx)
    return s


def squarefree(n):
    n = abs(n)
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def family(big_d, sigma, a, n0):
    return [sigma * m for m in range(big_d, 2 * big_d + 1)
            if (sigma * m) % n0 == a % n0 and (sigma * m) % 4 == 1 and squarefree(sigma * m)]


def main():
    out = {}
    total, parts = chandee("Delta", 17, 1000.0)
    out["chandee.Delta.17.1000"] = total
    out["prime_part.Delta.17.1000"] = parts[0]
    out["sym2_part.Delta.17.1000"] = parts[1]
    out["remainder.Delta.17.1000"] = parts[2]
    total, parts = chandee("11a1", 5, 1000.0)
    out["chandee.11a1.5.1000"] = total
    out["sym2_part.11a1.5.1000"] = parts[1]
    out["p_poly.Delta.17.1000.1000"] = p_poly([("Delta", 1.0)], 17, 1000.0, 1000.0)
    out["p_poly.Delta+11a1.-15.1000.100"] = p_poly([("Delta", 1.0), ("11a1", 0.5)], -15, 1000.0, 100.0)
    slice_ = family(1000, 1, 1, 8)
    vals = [p_poly([("Delta", 1.0)], d, 1000.0, 1000.0) for d in slice_]
    out["slice.Delta.1000.size"] = len(slice_)
    for v in (0, 1, 2, 3):
        out[f"A.Delta.1000.x1000.V{v}"] = sum(1 for p in vals if p > v)
    with open("tests/fixtures/proxy_oracle.txt", "w") as f:
        f.write("# independent prime-sum oracle (PARI eigenvalues, complex Satake roots)\n")
        for k, v in out.items():
            f.write(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n")


if __name__ == "__main__":
    main()
