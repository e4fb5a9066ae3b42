"""Leading moment constants b_k and the arithmetic Euler factor a_k.

For each symmetry class the k-th moment of the m-th derivative of the
characteristic polynomial at 1 obeys

    M_k ~ b_k * (2N)^e(k),

with b_k an explicit prefactor times the k-th derivative at u = 0 of
e^u T_{k,l}(2u):

    USp(2N), m=2 :  e(k) = (k^2+5k)/2,  prefactor 2^-(k^2+5k)/2,  l = 0
    SO(2N),  m=2 :  e(k) = (k^2+3k)/2,  prefactor 2^-(k^2+k)/2,   l = -1
    O-(2N),  m=3 :  e(k) = (k^2+5k)/2,  prefactor 3*2^-(k^2+3k)/2, l = 0

whence the exact relation b_k(O-) = 3 * 2^k * b_k(USp).

The companion arithmetic factor for quadratic Dirichlet families,

    a_k = prod_p (1-1/p)^(k(k+1)/2) / (1+1/p)
              * ( ((1-1/sqrt p)^-k + (1+1/sqrt p)^-k)/2 + 1/p ),

is an infinite product with factors 1 + c4(k)/p^2 + O(p^-3); it is
evaluated in high-precision floating arithmetic with the quadratic part
of the tail resummed through zeta(2), leaving a cubically small residual
that the returned tail estimate bounds.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass

import mpmath
from gmpy2 import mpq, mpz

from .exact import (
    FactoredRational,
    Rational,
    binomial,
    decimal_string,
    factor_rational,
    falling_factorial,
    format_rational,
    primes_below,
)
from .series import InsufficientPrecisionError, TruncSeries
from .specfun import exp_series
from .tau import TauTable, determinant_table, load_or_build_table


class SymmetryClass(enum.Enum):
    USP = "usp"
    SO = "so"
    O_MINUS = "ominus"

    @classmethod
    def from_name(cls, name: str) -> "SymmetryClass":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown symmetry class {name!r}; use usp, so, ominus")

    @property
    def derivative_order(self) -> int:
        """Order m of the derivative whose moments the class describes."""
        return 3 if self is SymmetryClass.O_MINUS else 2

    @property
    def ell(self) -> int:
        """Shift l of the tau function T_{k,l} entering b_k."""
        return -1 if self is SymmetryClass.SO else 0

    def moment_exponent(self, k: int) -> int:
        """Exponent e(k) of (2N) in the leading term."""
        if self is SymmetryClass.SO:
            return (k * k + 3 * k) // 2
        return (k * k + 5 * k) // 2

    def prefactor(self, k: int) -> Rational:
        if self is SymmetryClass.USP:
            return mpq(1, mpz(2) ** ((k * k + 5 * k) // 2))
        if self is SymmetryClass.SO:
            return mpq(1, mpz(2) ** ((k * k + k) // 2))
        return mpq(3, mpz(2) ** ((k * k + 3 * k) // 2))

    @property
    def display_name(self) -> str:
        return {"usp": "USp(2N)", "so": "SO(2N)", "ominus": "O-(2N)"}[self.value]


@dataclass(frozen=True)
class BkRecord:
    group: SymmetryClass
    k: int
    value: Rational
    factored: FactoredRational
    method: str

    def decimal(self, digits: int = 30) -> str:
        return decimal_string(self.value, digits)


def _exp_scaled_kth_derivative(entry: TruncSeries, k: int) -> Rational:
    """k-th derivative at 0 of e^u * entry(2u), needing only one coefficient.

    Coefficient k of the product is sum_j 2^j entry_j / (k-j)!, so the
    derivative is sum_j entry_j * 2^j * k!/(k-j)!.  Summing numerators
    over the entry's common denominator keeps this to a single rational
    normalization, which matters when the k = 200 coefficients carry
    hundreds of kilobits.
    """
    from .series import _clear_denominators  # local: private fast-path helper

    ints, den = _clear_denominators(entry.coeffs[: k + 1])
    total = mpz(0)
    power = mpz(1)
    for j in range(k + 1):
        if ints[j]:
            total += ints[j] * power * falling_factorial(k, j)
        power *= 2
    return mpq(total, den)


def b_constant(
    group: SymmetryClass,
    k: int,
    table: TauTable,
    factor_effort: int = 200_000,
) -> BkRecord:
    """The exact constant b_k(group) extracted from a tau table."""
    if k < 1:
        raise ValueError("k must be positive")
    if table.ell != group.ell:
        raise ValueError(
            f"table has ell={table.ell} but {group.display_name} needs ell={group.ell}"
        )
    if k > table.k_max:
        raise InsufficientPrecisionError(f"table only reaches k_max={table.k_max}")
    if table.certified_degree(k) < k:
        raise InsufficientPrecisionError(
            f"entry {k} certified only to degree {table.certified_degree(k)} < {k}"
        )
    value = group.prefactor(k) * _exp_scaled_kth_derivative(table.entry(k), k)
    return BkRecord(
        group=group,
        k=k,
        value=value,
        factored=factor_rational(value, factor_effort),
        method=table.method,
    )


def b_constant_literal(group: SymmetryClass, k: int, table: TauTable) -> Rational:
    """Same value as b_constant, by the direct series composition.

    Builds e^u * T(2u) as a series product and reads off the k-th
    derivative; kept as the independent route for cross-checking the
    single-coefficient extraction.
    """
    entry = table.entry(k).truncate(k)
    product = exp_series(k) * entry.scale_argument(2)
    return group.prefactor(k) * product.kth_derivative_at_zero(k)


def bk_table(
    group: SymmetryClass,
    k_max: int,
    method: str = "recurrence",
    base_degree: int | None = None,
    cache_dir: str | None = None,
    factor_effort: int = 200_000,
    on_entry=None,
) -> list[BkRecord]:
    """b_k(group) for k = 1..k_max.

    method="recurrence" makes one recurrence-table pass; "determinant"
    recomputes every tau entry independently (the oracle route, meant for
    small k).
    """
    if k_max < 1:
        raise ValueError("k_max must be positive")
    if method == "recurrence":
        table = load_or_build_table(k_max, group.ell, base_degree, cache_dir)
    elif method == "determinant":
        degree = base_degree if base_degree is not None else k_max
        table = determinant_table(k_max, group.ell, degree)
    else:
        raise ValueError(f"unknown method {method!r}")
    records = []
    for k in range(1, k_max + 1):
        records.append(b_constant(group, k, table, factor_effort))
        if on_entry is not None:
            on_entry(k)
    return records


def moment_asymptotic_exact(
    group: SymmetryClass,
    k: int,
    N: int,
    table: TauTable | None = None,
    cache_dir: str | None = None,
) -> Rational:
    """Leading term b_k * (2N)^e(k), exactly."""
    if table is None:
        table = load_or_build_table(k, group.ell, cache_dir=cache_dir)
    bk = b_constant(group, k, table, factor_effort=1).value
    return bk * mpz(2 * N) ** group.moment_exponent(k)


def moment_asymptotic(
    group: SymmetryClass,
    k: int,
    N: int,
    digits: int = 30,
    table: TauTable | None = None,
    cache_dir: str | None = None,
) -> str:
    """Leading term rendered as a decimal with `digits` significant digits."""
    return decimal_string(moment_asymptotic_exact(group, k, N, table, cache_dir), digits)


# --- the arithmetic Euler product -------------------------------------------


def quadratic_tail_exponent(k: int) -> int:
    """c4(k) in the per-prime expansion factor = 1 + c4/p^2 + O(p^-3).

    From the series expansion in s = 1/sqrt(p): the s^2 terms cancel and
    the s^4 coefficient collapses to C(k+3,4) - (K+1)^2 + K(K+1)/2 + 1
    with K = k(k+1)/2.
    """
    K = k * (k + 1) // 2
    return int(binomial(k + 3, 4) - (K + 1) ** 2 + K * (K + 1) // 2 + 1)


def _euler_factor(k: int, p) -> mpmath.mpf:
    """Per-prime factor of a_k in the current mpmath context."""
    p = mpmath.mpf(p)
    s = 1 / mpmath.sqrt(p)
    avg = ((1 - s) ** (-k) + (1 + s) ** (-k)) / 2
    return (1 - 1 / p) ** (k * (k + 1) // 2) / (1 + 1 / p) * (avg + 1 / p)


def euler_factor(k: int, p: int, dps: int = 50) -> mpmath.mpf:
    """Per-prime factor of a_k at working precision dps."""
    with mpmath.workdps(dps):
        return _euler_factor(k, p)


@dataclass(frozen=True)
class AkEstimate:
    """a_k evaluation: the plain truncated product and the tail-corrected value.

    `truncated_product` is prod_{p <= cutoff} f_k(p) with no adjustment;
    `value` multiplies in the resummed quadratic tail and is what one
    should quote, with `tail_error` bounding its relative residual.
    """

    k: int
    prime_cutoff: int
    value: mpmath.mpf
    truncated_product: mpmath.mpf
    tail_error: float
    dps: int

    def value_str(self, digits: int = 30) -> str:
        with mpmath.workdps(max(self.dps, digits)):
            return mpmath.nstr(self.value, digits)


def a_k_euler(k: int, prime_cutoff: int, dps: int = 50) -> AkEstimate:
    """Evaluate a_k over primes <= prime_cutoff, with tail resummation.

    The truncated product is multiplied by prod_{p > P} (1 - p^-2)^(-c4),
    computed from zeta(2) and the finite primes, which cancels the
    quadratic part of the omitted factors.  The returned tail_error
    bounds the relative size of the remaining cubically decaying residual
    (estimated numerically from the residual coefficient, with a safety
    factor of two).
    """
    if k < 1:
        raise ValueError("k must be positive")
    if prime_cutoff < 2:
        raise ValueError("prime_cutoff must be at least 2")
    primes = primes_below(prime_cutoff + 1)
    c4 = quadratic_tail_exponent(k)
    with mpmath.workdps(dps):
        log_prod = mpmath.mpf(0)
        log_small = mpmath.mpf(0)  # sum_{p <= P} log(1 - 1/p^2)
        for p in primes:
            log_prod += mpmath.log(_euler_factor(k, p))
            log_small += mpmath.log(1 - mpmath.mpf(1) / (mpmath.mpf(p) ** 2))
        # sum over p > P of log(1 - 1/p^2) = -log zeta(2) - finite part
        log_tail = -mpmath.log(mpmath.zeta(2)) - log_small
        truncated_product = mpmath.exp(log_prod)
        value = mpmath.exp(log_prod - c4 * log_tail)
        # residual factor g(p) = f(p) (1-1/p^2)^c4 = 1 + c6/p^3 + ...
        t = mpmath.mpf(10) ** 8
        c6 = (_euler_factor(k, t) * (1 - 1 / t**2) ** c4 - 1) * t**3
        tail_error = 2.0 * abs(float(c6)) / (2.0 * prime_cutoff**2) + mpmath.mpf(10) ** (
            2 - dps
        )
    return AkEstimate(
        k=k,
        prime_cutoff=prime_cutoff,
        value=value,
        truncated_product=truncated_product,
        tail_error=float(tail_error),
        dps=dps,
    )


# --- table rendering ----------------------------------------------------------


def records_to_json(records: list[BkRecord], digits: int = 30) -> str:
    payload = {
        "group": records[0].group.value if records else None,
        "method": records[0].method if records else None,
        "decimal_digits": digits,
        "records": [
            {
                "k": r.k,
                "exact": format_rational(r.value),
                "factored": r.factored.display(),
                "decimal": r.decimal(digits),
            }
            for r in records
        ],
    }
    return json.dumps(payload, indent=2)


def records_to_csv(records: list[BkRecord], digits: int = 30) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["group", "k", "exact", "factored", "decimal"])
    for r in records:
        writer.writerow(
            [r.group.value, r.k, format_rational(r.value), r.factored.display(), r.decimal(digits)]
        )
    return buf.getvalue()
