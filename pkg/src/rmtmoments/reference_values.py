"""Published exact values of the leading moment constants, as verification targets.

Each entry stores the prime factorization of the numerator and
denominator of b_k, exactly as the values are usually tabulated.  The
k = 1..10 tables cover the symplectic (second derivative) and even
orthogonal (second derivative) families; the odd orthogonal (third
derivative) family is pinned through its k = 10 value and the exact
relation b_k(O-) = 3 * 2^k * b_k(USp).
"""

from __future__ import annotations

from gmpy2 import mpq, mpz

from .exact import FactoredRational

# {k: (numerator factors, denominator factors)} with factors as (prime, exponent)

USP_BK_FACTORS: dict[int, tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]] = {
    1: ((), ((2, 1), (3, 1))),
    2: (((19, 1),), ((2, 4), (3, 2), (5, 1), (7, 1))),
    3: (((487, 1),), ((2, 7), (3, 5), (5, 2), (7, 1), (11, 1))),
    4: (((59, 1), (197, 1)), ((2, 13), (3, 8), (5, 2), (7, 2), (11, 1), (13, 1))),
    5: (
        ((174290791, 1),),
        ((2, 19), (3, 10), (5, 5), (7, 3), (11, 2), (13, 1), (17, 1), (19, 1)),
    ),
    6: (
        ((3373, 1), (1670407, 1)),
        ((2, 25), (3, 14), (5, 6), (7, 3), (11, 3), (13, 2), (17, 1), (19, 1), (23, 1)),
    ),
    7: (
        ((37, 1), (83, 1), (2203, 1), (3571457, 1)),
        ((2, 32), (3, 19), (5, 9), (7, 6), (11, 3), (13, 3), (17, 2), (19, 1), (23, 1)),
    ),
    8: (
        ((61, 1), (595351, 1), (11423948521, 1)),
        (
            (2, 42), (3, 23), (5, 11), (7, 7), (11, 4), (13, 4), (17, 2), (19, 2),
            (23, 1), (29, 1), (31, 1),
        ),
    ),
    9: (
        ((53, 1), (16646765854629827113, 1)),
        (
            (2, 53), (3, 29), (5, 13), (7, 9), (11, 5), (13, 4), (17, 3), (19, 3),
            (23, 2), (29, 1), (31, 1),
        ),
    ),
    10: (
        ((47, 1), (1553, 1), (1787, 1), (73709, 1), (152825093, 1)),
        (
            (2, 62), (3, 34), (5, 17), (7, 10), (11, 5), (13, 5), (17, 4), (19, 3),
            (23, 2), (29, 1), (31, 1), (37, 1),
        ),
    ),
}

SO_BK_FACTORS: dict[int, tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]] = {
    1: ((), ()),
    2: (((7, 1),), ((2, 1), (3, 1), (5, 1))),
    3: (((2, 1), (13, 1)), ((3, 4), (5, 1), (7, 1))),
    4: (((17, 1), (5987, 1)), ((2, 6), (3, 5), (5, 2), (7, 2), (11, 1), (13, 1))),
    5: (
        ((157, 1), (17519, 1)),
        ((2, 9), (3, 8), (5, 4), (7, 2), (11, 1), (13, 1), (17, 1)),
    ),
    6: (
        ((22273664659, 1),),
        ((2, 15), (3, 12), (5, 5), (7, 3), (11, 2), (13, 2), (17, 1), (19, 1)),
    ),
    7: (
        ((116228886131, 1),),
        ((2, 14), (3, 14), (5, 8), (7, 5), (11, 3), (13, 2), (17, 1), (19, 1), (23, 1)),
    ),
    8: (
        ((36774351481263481, 1),),
        (
            (2, 28), (3, 19), (5, 9), (7, 6), (11, 4), (13, 3), (17, 1), (19, 2),
            (23, 1), (29, 1),
        ),
    ),
    9: (
        ((71, 1), (103, 1), (223, 1), (661, 1), (1069, 1), (134437, 1)),
        (
            (2, 34), (3, 25), (5, 11), (7, 6), (11, 4), (13, 4), (17, 3), (19, 2),
            (23, 1), (29, 1),
        ),
    ),
    10: (
        ((25171, 1), (7695491, 1), (57668937071891, 1)),
        (
            (2, 45), (3, 29), (5, 15), (7, 9), (11, 5), (13, 5), (17, 3), (19, 3),
            (23, 2), (29, 1), (31, 1), (37, 1),
        ),
    ),
}

O_MINUS_B10_FACTORS = (
    ((47, 1), (1553, 1), (1787, 1), (73709, 1), (152825093, 1)),
    (
        (2, 52), (3, 33), (5, 17), (7, 10), (11, 5), (13, 5), (17, 4), (19, 3),
        (23, 2), (29, 1), (31, 1), (37, 1),
    ),
)


def _assemble(num_factors, den_factors) -> mpq:
    num = mpz(1)
    for p, e in num_factors:
        num *= mpz(p) ** e
    den = mpz(1)
    for p, e in den_factors:
        den *= mpz(p) ** e
    return mpq(num, den)


def usp_bk_exact(k: int) -> mpq:
    return _assemble(*USP_BK_FACTORS[k])


def so_bk_exact(k: int) -> mpq:
    return _assemble(*SO_BK_FACTORS[k])


def o_minus_b10_exact() -> mpq:
    return _assemble(*O_MINUS_B10_FACTORS)


def _display(num_factors, den_factors) -> str:
    return FactoredRational(1, tuple(num_factors), 1, tuple(den_factors), 1).display()


def usp_bk_display(k: int) -> str:
    return _display(*USP_BK_FACTORS[k])


def so_bk_display(k: int) -> str:
    return _display(*SO_BK_FACTORS[k])
