"""Truncated formal power series over exact rationals.

A TruncSeries of truncation degree d is a series known modulo u^(d+1).
Degree accounting is explicit and pessimistic: every operation reports
only the degree it can certify from its inputs.  A product of series
certified to d1 and d2 is certified to min(d1, d2); a derivative loses
one degree.  Nothing here ever claims accuracy it does not have, because
downstream recurrences lose one certified degree per step and silent
over-claiming would corrupt high-order constants.

Multiplication and division have two implementations with identical
results: a naive rational convolution, and a fast path that clears each
operand to a single common denominator, convolves integer vectors, and
normalizes once at the end.  The fast path avoids per-coefficient gcd
normalization, which dominates the cost for the long series with large
coefficients that the tau-function recurrence produces.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpq, mpz

from .exact import Rational, factorial, format_rational, parse_rational


class InsufficientPrecisionError(Exception):
    """An operation needs more certified degree than its input carries."""


class NonUnitDivisorError(Exception):
    """Series division by a divisor with vanishing constant term."""


# Below this length the cleared fast path is not worth the setup cost.
_CLEARED_PATH_MIN_LEN = 24


def _clear_denominators(coeffs) -> tuple[list[mpz], mpz]:
    """Rational vector -> (integer vector, common denominator)."""
    den = mpz(1)
    for c in coeffs:
        d = c.denominator
        den = den // gmpy2.gcd(den, d) * d
    return [c.numerator * (den // c.denominator) for c in coeffs], den


def _content_reduce(ints, den) -> tuple[list[mpz], mpz]:
    """Divide out gcd(den, all coefficients) so den is minimal again."""
    g = den
    for c in ints:
        if c:
            g = gmpy2.gcd(g, c)
            if g == 1:
                return ints, den
    if g <= 1:
        return ints, den
    return [c // g for c in ints], den // g


def _convolve_ints(a, b, out_len: int) -> list[mpz]:
    out = [mpz(0)] * out_len
    for i, ai in enumerate(a):
        if i >= out_len:
            break
        if not ai:
            continue
        lim = min(len(b), out_len - i)
        for j in range(lim):
            out[i + j] += ai * b[j]
    return out


class TruncSeries:
    """Immutable truncated series; coeffs[n] is the coefficient of u^n."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = tuple(mpq(c) for c in coeffs)
        if not coeffs:
            raise ValueError("a truncated series needs at least the constant term")
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("TruncSeries is immutable")

    @classmethod
    def constant(cls, value, degree: int) -> "TruncSeries":
        return cls((mpq(value),) + (mpq(0),) * degree)

    @classmethod
    def one(cls, degree: int) -> "TruncSeries":
        return cls.constant(1, degree)

    @classmethod
    def zero(cls, degree: int) -> "TruncSeries":
        return cls.constant(0, degree)

    @property
    def trunc_degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def constant_term(self) -> Rational:
        return self.coeffs[0]

    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    def coeff(self, n: int) -> Rational:
        if n > self.trunc_degree:
            raise InsufficientPrecisionError(
                f"coefficient {n} beyond truncation degree {self.trunc_degree}"
            )
        return self.coeffs[n]

    def truncate(self, degree: int) -> "TruncSeries":
        """Restrict to a lower truncation degree (never raises the claim)."""
        if degree > self.trunc_degree:
            raise InsufficientPrecisionError(
                f"cannot extend certified degree {self.trunc_degree} to {degree}"
            )
        if degree == self.trunc_degree:
            return self
        return TruncSeries(self.coeffs[: degree + 1])

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        shown = ", ".join(str(c) for c in self.coeffs[:6])
        more = ", ..." if len(self.coeffs) > 6 else ""
        return f"TruncSeries(deg={self.trunc_degree}; [{shown}{more}])"

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        d = min(self.trunc_degree, other.trunc_degree)
        return TruncSeries(
            tuple(self.coeffs[n] + other.coeffs[n] for n in range(d + 1))
        )

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        d = min(self.trunc_degree, other.trunc_degree)
        return TruncSeries(
            tuple(self.coeffs[n] - other.coeffs[n] for n in range(d + 1))
        )

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(tuple(-c for c in self.coeffs))

    def scale(self, c) -> "TruncSeries":
        """Multiply every coefficient by the scalar c."""
        c = mpq(c)
        return TruncSeries(tuple(c * a for a in self.coeffs))

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        d = min(self.trunc_degree, other.trunc_degree)
        if d + 1 >= _CLEARED_PATH_MIN_LEN:
            a, da = _clear_denominators(self.coeffs)
            b, db = _clear_denominators(other.coeffs)
            ints = _convolve_ints(a, b, d + 1)
            ints, den = _content_reduce(ints, da * db)
            return TruncSeries(tuple(mpq(c, den) for c in ints))
        out = [mpq(0)] * (d + 1)
        for i, ai in enumerate(self.coeffs[: d + 1]):
            if not ai:
                continue
            for j in range(min(other.trunc_degree, d - i) + 1):
                out[i + j] += ai * other.coeffs[j]
        return TruncSeries(tuple(out))

    def __truediv__(self, other: "TruncSeries") -> "TruncSeries":
        """Forward-substitution division; requires a unit divisor."""
        if not other.is_unit():
            raise NonUnitDivisorError("division by series with zero constant term")
        d = min(self.trunc_degree, other.trunc_degree)
        if d + 1 >= _CLEARED_PATH_MIN_LEN:
            a, da = _clear_denominators(self.coeffs)
            b, db = _clear_denominators(other.coeffs)
            ints, den = _divide_cleared(a, da, b, db, d)
            return TruncSeries(tuple(mpq(c, den) for c in ints))
        q = [mpq(0)] * (d + 1)
        b0 = other.coeffs[0]
        for n in range(d + 1):
            acc = self.coeffs[n]
            for i in range(1, min(n, other.trunc_degree) + 1):
                acc -= other.coeffs[i] * q[n - i]
            q[n] = acc / b0
        return TruncSeries(tuple(q))

    # -- calculus and substitutions ------------------------------------------

    def derivative(self) -> "TruncSeries":
        """d/du; the certified degree drops by one."""
        if self.trunc_degree < 1:
            raise InsufficientPrecisionError(
                "derivative of a degree-0 truncation certifies nothing"
            )
        return TruncSeries(
            tuple((n + 1) * self.coeffs[n + 1] for n in range(self.trunc_degree))
        )

    def shift_up(self) -> "TruncSeries":
        """Multiply by u; an exact polynomial factor, so the degree grows."""
        return TruncSeries((mpq(0),) + self.coeffs)

    def scale_argument(self, c) -> "TruncSeries":
        """u -> c*u, i.e. coefficient n picks up a factor c^n."""
        c = mpq(c)
        power = mpq(1)
        out = []
        for a in self.coeffs:
            out.append(power * a)
            power *= c
        return TruncSeries(tuple(out))

    def kth_derivative_at_zero(self, k: int) -> Rational:
        """k! times the k-th coefficient."""
        if k < 0:
            raise ValueError("derivative order must be non-negative")
        if k > self.trunc_degree:
            raise InsufficientPrecisionError(
                f"order-{k} derivative needs degree >= {k}, have {self.trunc_degree}"
            )
        return mpq(factorial(k)) * self.coeffs[k]

    def evaluate_float(self, u: float) -> float:
        """Horner evaluation in floats (for numerical cross-checks only)."""
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * u + float(c)
        return acc

    def max_coeff_bits(self) -> int:
        """Largest numerator/denominator bit size among the coefficients."""
        bits = 0
        for c in self.coeffs:
            bits = max(bits, c.numerator.bit_length(), c.denominator.bit_length())
        return bits

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "trunc_degree": self.trunc_degree,
            "coeffs": [format_rational(c) for c in self.coeffs],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TruncSeries":
        coeffs = [parse_rational(s) for s in data["coeffs"]]
        if len(coeffs) != data["trunc_degree"] + 1:
            raise ValueError("series JSON length does not match trunc_degree")
        return cls(coeffs)


def _divide_cleared(a, da, b, db, out_degree: int) -> tuple[list[mpz], mpz]:
    """(a/da) / (b/db) to out_degree, in cleared representation.

    Forward substitution where the inner accumulation stays in integers;
    one rational normalization per output coefficient.  The quotient
    vector is kept over a running common denominator that is rescaled
    whenever a new coefficient needs a larger one.
    """
    b0 = b[0]
    q: list[mpz] = []
    dq = mpz(1)
    for n in range(out_degree + 1):
        s = mpz(0)
        for i in range(1, min(n, len(b) - 1) + 1):
            s += b[i] * q[n - i]
        an = a[n] if n < len(a) else mpz(0)
        qn = (mpq(an * db, da) - mpq(s, dq)) / b0
        dn = qn.denominator
        scale = dn // gmpy2.gcd(dn, dq)
        if scale != 1:
            q = [c * scale for c in q]
            dq *= scale
        q.append(qn.numerator * (dq // dn))
    return q, dq


class BivariateTruncSeries:
    """Series in x and y known modulo x^(deg_x+1) and y^(deg_y+1).

    coeffs[a][b] is the coefficient of x^a y^b.  Only the operations the
    two-variable tau identities need are provided; this is deliberately
    not a general multivariate series engine.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        rows = tuple(tuple(mpq(c) for c in row) for row in coeffs)
        if not rows or not rows[0]:
            raise ValueError("bivariate series needs at least the constant term")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged coefficient matrix")
        object.__setattr__(self, "coeffs", rows)

    def __setattr__(self, name, value):
        raise AttributeError("BivariateTruncSeries is immutable")

    @classmethod
    def constant(cls, value, deg_x: int, deg_y: int) -> "BivariateTruncSeries":
        rows = [[mpq(0)] * (deg_y + 1) for _ in range(deg_x + 1)]
        rows[0][0] = mpq(value)
        return cls(rows)

    @property
    def deg_x(self) -> int:
        return len(self.coeffs) - 1

    @property
    def deg_y(self) -> int:
        return len(self.coeffs[0]) - 1

    def coeff(self, a: int, b: int) -> Rational:
        if a > self.deg_x or b > self.deg_y:
            raise InsufficientPrecisionError(
                f"coefficient ({a},{b}) beyond truncation ({self.deg_x},{self.deg_y})"
            )
        return self.coeffs[a][b]

    def truncate(self, deg_x: int, deg_y: int) -> "BivariateTruncSeries":
        if deg_x > self.deg_x or deg_y > self.deg_y:
            raise InsufficientPrecisionError("cannot extend a bivariate truncation")
        return BivariateTruncSeries(
            tuple(row[: deg_y + 1] for row in self.coeffs[: deg_x + 1])
        )

    def __eq__(self, other):
        if not isinstance(other, BivariateTruncSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"BivariateTruncSeries(deg_x={self.deg_x}, deg_y={self.deg_y})"

    def __add__(self, other):
        dx = min(self.deg_x, other.deg_x)
        dy = min(self.deg_y, other.deg_y)
        return BivariateTruncSeries(
            tuple(
                tuple(self.coeffs[a][b] + other.coeffs[a][b] for b in range(dy + 1))
                for a in range(dx + 1)
            )
        )

    def __sub__(self, other):
        dx = min(self.deg_x, other.deg_x)
        dy = min(self.deg_y, other.deg_y)
        return BivariateTruncSeries(
            tuple(
                tuple(self.coeffs[a][b] - other.coeffs[a][b] for b in range(dy + 1))
                for a in range(dx + 1)
            )
        )

    def __neg__(self):
        return BivariateTruncSeries(tuple(tuple(-c for c in row) for row in self.coeffs))

    def __mul__(self, other):
        dx = min(self.deg_x, other.deg_x)
        dy = min(self.deg_y, other.deg_y)
        out = [[mpq(0)] * (dy + 1) for _ in range(dx + 1)]
        for a1 in range(min(self.deg_x, dx) + 1):
            row1 = self.coeffs[a1]
            for b1 in range(min(self.deg_y, dy) + 1):
                c1 = row1[b1]
                if not c1:
                    continue
                for a2 in range(min(other.deg_x, dx - a1) + 1):
                    row2 = other.coeffs[a2]
                    for b2 in range(min(other.deg_y, dy - b1) + 1):
                        c2 = row2[b2]
                        if c2:
                            out[a1 + a2][b1 + b2] += c1 * c2
        return BivariateTruncSeries(out)

    def partial_x(self) -> "BivariateTruncSeries":
        if self.deg_x < 1:
            raise InsufficientPrecisionError("partial_x needs degree >= 1 in x")
        return BivariateTruncSeries(
            tuple(
                tuple((a + 1) * c for c in self.coeffs[a + 1])
                for a in range(self.deg_x)
            )
        )

    def partial_y(self) -> "BivariateTruncSeries":
        if self.deg_y < 1:
            raise InsufficientPrecisionError("partial_y needs degree >= 1 in y")
        return BivariateTruncSeries(
            tuple(
                tuple((b + 1) * row[b + 1] for b in range(self.deg_y))
                for row in self.coeffs
            )
        )
