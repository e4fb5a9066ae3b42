"""The special-function building blocks, as exact truncated series.

g_m(u) is the contour integral (1/2 pi i) oint_{|w|=1} e^(w + u/w^2) w^(-m-1) dw,
equivalently a 0F2 hypergeometric in u/4.  Expanding e^w e^(u/w^2) and
taking the residue gives the coefficient of u^n as

    1 / (n! (2n+m)!)   when 2n + m >= 0,   0 otherwise,

which also covers negative m (the limit interpretation of the 0F2 form
is coefficient vanishing, with integer arithmetic only).  The test suite
validates this derivation against direct numerical quadrature of the
contour integral.

The two-variable cousin gt_m(x, y) replaces e^(w + u/w^2) by e^(xw + y/w^2);
its only nonzero coefficients sit on the diagonal a = m + 2b with value
1/(a! b!), and it specializes back via gt_m(x, y) = x^m g_m(x^2 y).
"""

from __future__ import annotations

from gmpy2 import mpq

from .exact import factorial
from .series import BivariateTruncSeries, TruncSeries


def g_series(m: int, degree: int) -> TruncSeries:
    """Truncated expansion of g_m; coefficient n is 1/(n!(2n+m)!) or 0."""
    coeffs = []
    for n in range(degree + 1):
        q = 2 * n + m
        if q >= 0:
            coeffs.append(mpq(1, factorial(n) * factorial(q)))
        else:
            coeffs.append(mpq(0))
    return TruncSeries(coeffs)


def exp_series(degree: int) -> TruncSeries:
    """Truncated e^u: coefficient n is 1/n!."""
    return TruncSeries([mpq(1, factorial(n)) for n in range(degree + 1)])


def g_bivariate(m: int, deg_x: int, deg_y: int) -> BivariateTruncSeries:
    """Truncated gt_m(x, y): coefficient of x^a y^b is 1/(a! b!) on a = m + 2b."""
    rows = [[mpq(0)] * (deg_y + 1) for _ in range(deg_x + 1)]
    for b in range(deg_y + 1):
        a = m + 2 * b
        if 0 <= a <= deg_x:
            rows[a][b] = mpq(1, factorial(a) * factorial(b))
    return BivariateTruncSeries(rows)
