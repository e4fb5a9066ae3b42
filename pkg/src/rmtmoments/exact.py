"""Exact integer and rational arithmetic.

All exact computation in this package runs over arbitrary-precision
rationals backed by GMP (gmpy2.mpq / gmpy2.mpz).  Values are always kept
normalized: positive denominator, gcd(|num|, den) = 1.  This module adds
the small amount of number theory the package needs on top of that:
memoized factorials, probabilistic primality testing, and best-effort
integer factorization for rendering constants in factored form, e.g.

    19 / (2^4 * 3^2 * 5 * 7)

Factorization is never correctness-critical: an unfactored residue is
reported as a cofactor instead of raising.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from decimal import localcontext, Decimal

import gmpy2
from gmpy2 import mpq, mpz

Rational = mpq

_TRIAL_DIVISION_BOUND = 10_000
_MILLER_RABIN_ROUNDS = 30


def rational(num, den=1) -> Rational:
    """Exact rational num/den; raises ZeroDivisionError for den == 0."""
    return mpq(num, den)


def parse_rational(text: str) -> Rational:
    """Parse "num/den" or a bare integer string."""
    return mpq(text.strip())


def format_rational(q) -> str:
    """Canonical "num/den" string with an explicit denominator."""
    q = mpq(q)
    return f"{q.numerator}/{q.denominator}"


def decimal_string(q, digits: int = 30) -> str:
    """Render an exact rational as a decimal with `digits` significant digits."""
    q = mpq(q)
    with localcontext() as ctx:
        ctx.prec = max(1, digits)
        d = Decimal(int(q.numerator)) / Decimal(int(q.denominator))
    return str(d)


# --- factorials ------------------------------------------------------------

_FACTORIALS = [mpz(1)]
_FACTORIALS_LOCK = threading.Lock()


def factorial(n: int) -> mpz:
    """n! from a growable memo table; O(1) once the table covers n."""
    if n < 0:
        raise ValueError("factorial of negative integer")
    if n < len(_FACTORIALS):
        return _FACTORIALS[n]
    with _FACTORIALS_LOCK:
        # list append is atomic under the GIL; readers only index below len()
        while len(_FACTORIALS) <= n:
            _FACTORIALS.append(_FACTORIALS[-1] * len(_FACTORIALS))
    return _FACTORIALS[n]


def binomial(n: int, k: int) -> mpz:
    """Binomial coefficient C(n, k); zero outside 0 <= k <= n."""
    if k < 0 or k > n:
        return mpz(0)
    return factorial(n) // (factorial(k) * factorial(n - k))


def falling_factorial(n: int, m: int) -> mpz:
    """n (n-1) ... (n-m+1), the m-th derivative weight of x^n at x != 0."""
    out = mpz(1)
    for t in range(m):
        out *= n - t
    return out


# --- primes ----------------------------------------------------------------

def primes_below(limit: int) -> list[int]:
    """All primes < limit by a plain sieve of Eratosthenes."""
    if limit <= 2:
        return []
    sieve = bytearray([1]) * limit
    sieve[0] = sieve[1] = 0
    for i in range(2, int(limit**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(2, limit) if sieve[i]]


_SMALL_PRIMES = primes_below(_TRIAL_DIVISION_BOUND)


def is_probable_prime(n, rounds: int = _MILLER_RABIN_ROUNDS) -> bool:
    """Miller-Rabin with `rounds` bases drawn deterministically from n.

    Composites slip through with probability <= 4^-rounds; at the default
    30 rounds that is below 10^-18, which is ample for display metadata.
    """
    n = mpz(n)
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(int(n))
    for _ in range(rounds):
        a = mpz(rng.randrange(2, int(n - 1)))
        x = gmpy2.powmod(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int, budget: int, rng: random.Random) -> tuple[int | None, int]:
    """Brent-cycle Pollard rho; returns (factor or None, iterations used)."""
    if n % 2 == 0:
        return 2, 0
    used = 0
    while used < budget:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g, r, q = 1, 1, 1
        x = ys = y
        while g == 1 and used < budget:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1 and used < budget:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                used += min(m, r - k)
                g = gmpy2.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gmpy2.gcd(abs(x - ys), n)
                used += 1
                if used >= budget:
                    break
        if 1 < g < n:
            return int(g), used
    return None, used


def factor_int(
    n,
    effort_bound: int = 200_000,
    residue_bit_cap: int = 4096,
) -> tuple[list[tuple[int, int]], int]:
    """Best-effort factorization of a positive integer.

    Trial division by primes below 10^4, then Pollard rho with a total
    iteration budget of `effort_bound`.  Returns (sorted prime-power list,
    cofactor); the cofactor is 1 on full success and an unfactored residue
    otherwise.  Every prime in the list passes is_probable_prime.

    Residues above `residue_bit_cap` bits go straight to the cofactor:
    neither primality testing nor rho is worthwhile at that size, and the
    factored form is display metadata that must degrade gracefully.
    """
    n = mpz(n)
    if n <= 0:
        raise ValueError("factor_int expects a positive integer")
    factors: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        if p * p > n:
            break
        if n % p == 0:
            n, e = gmpy2.remove(n, p)
            factors[p] = e
    cofactor = mpz(1)
    if n > 1:
        rng = random.Random(int(n))
        budget = effort_bound
        stack = [n]
        while stack:
            m = stack.pop()
            if m == 1:
                continue
            if m.bit_length() > residue_bit_cap:
                cofactor *= m
                continue
            if is_probable_prime(m):
                factors[int(m)] = factors.get(int(m), 0) + 1
                continue
            f, used = _pollard_rho(int(m), budget, rng)
            budget -= used
            if f is None or budget <= 0:
                cofactor *= m
                for m2 in stack:
                    cofactor *= m2
                stack.clear()
                break
            stack.append(mpz(f))
            stack.append(m // f)
    return sorted(factors.items()), int(cofactor)


def _format_factor_side(factors, cofactor) -> str:
    parts = [f"{p}^{e}" if e > 1 else f"{p}" for p, e in factors]
    if cofactor != 1 or not parts:
        parts.append(str(cofactor))
    return " * ".join(parts)


@dataclass(frozen=True)
class FactoredRational:
    """A rational in factored display form.

    Reassembling sign * (num factors * num cofactor) / (den factors * den
    cofactor) reproduces the original value exactly; incomplete
    factorizations surface as cofactors != 1.
    """

    sign: int
    num_factors: tuple[tuple[int, int], ...]
    num_cofactor: int
    den_factors: tuple[tuple[int, int], ...]
    den_cofactor: int

    def value(self) -> Rational:
        num = mpz(self.num_cofactor)
        for p, e in self.num_factors:
            num *= mpz(p) ** e
        den = mpz(self.den_cofactor)
        for p, e in self.den_factors:
            den *= mpz(p) ** e
        return mpq(self.sign * num, den)

    def display(self) -> str:
        """ASCII factored form, e.g. "19 / (2^4 * 3^2 * 5 * 7)"."""
        if self.sign == 0:
            return "0"
        num = _format_factor_side(self.num_factors, self.num_cofactor)
        den_terms = len(self.den_factors) + (1 if self.den_cofactor != 1 else 0)
        prefix = "-" if self.sign < 0 else ""
        if den_terms == 0:
            return prefix + num
        den = _format_factor_side(self.den_factors, self.den_cofactor)
        if den_terms > 1:
            den = f"({den})"
        return f"{prefix}{num} / {den}"


FACTORED_ZERO = FactoredRational(0, (), 1, (), 1)


def factor_rational(q, effort_bound: int = 200_000) -> FactoredRational:
    """Factor numerator and denominator of a nonzero rational.

    Zero gets the dedicated canonical representation FACTORED_ZERO.
    """
    q = mpq(q)
    if q == 0:
        return FACTORED_ZERO
    sign = 1 if q > 0 else -1
    num_factors, num_cof = factor_int(abs(q.numerator), effort_bound)
    den_factors, den_cof = factor_int(q.denominator, effort_bound)
    return FactoredRational(sign, tuple(num_factors), num_cof, tuple(den_factors), den_cof)
