"""Tau functions: Hankel-style determinants of g series and their fast recurrence.

T_{k,l}(u) is the k x k determinant with (i, j) entry g_{2i-j+l}(u),
indices running from 1 to k.  Two independent routes compute it:

* tau_det        -- determinant over the truncated-series ring (the oracle);
* tau_recurrence_table -- the Toda-lattice-style differential recurrence

      T_{k+1,l} T_{k-1,l} = 2 ( u T_{k,l} T_{k,l}'' + T_{k,l} T_{k,l}'
                                - u (T_{k,l}')^2 ),

  solved for T_{k+1,l} by series division.  Each step costs one certified
  degree (the second derivative costs two, the factor u restores one), so
  a table up to k_max needs base degree 2*k_max - 1 for entry k to stay
  certified to degree >= k.

The recurrence divides by T_{k-1,l}, which silently assumes the constant
term T_{k-1,l}(0) is nonzero.  That holds for every (k, l) this package
uses (l in {-1, 0}) but is not a theorem we rely on: the division raises
NonUnitDivisorError the moment a constant term vanishes (it genuinely
does for l = -2, where g_{-1}(0) = 0).

dodgson_check verifies the Desnanot-Jacobi condensation identity that
underlies the recurrence, on exact rational matrices.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import time
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpq, mpz

from .exact import format_rational
from .series import (
    BivariateTruncSeries,
    NonUnitDivisorError,
    TruncSeries,
    _clear_denominators,
    _content_reduce,
    _convolve_ints,
    _divide_cleared,
)
from .specfun import g_bivariate, g_series

_CACHE_ENV_VAR = "RMTMOMENTS_CACHE_DIR"


# --- determinants over the series ring ---------------------------------------


def _series_det(mat: list[list[TruncSeries]], degree: int) -> TruncSeries:
    """Determinant of a matrix of series, all truncated to `degree`.

    Gaussian elimination pivoting on entries with nonzero constant term
    (the units of the truncated ring); when a column offers no unit the
    routine falls back to Laplace expansion along that column, which
    always terminates.  Division-based elimination is safe here exactly
    because pivots are units; fraction-free elimination is not, since the
    truncated ring has zero divisors.
    """
    n = len(mat)
    if n == 0:
        return TruncSeries.one(degree)
    if n == 1:
        return mat[0][0]
    work = [row[:] for row in mat]
    sign = 1
    diag: list[TruncSeries] = []
    for col in range(n):
        pivot_row = None
        for r in range(col, n):
            if work[r][col].is_unit():
                pivot_row = r
                break
        if pivot_row is None:
            # no unit available: expand along this column over the
            # remaining (n-col) x (n-col) block
            acc = TruncSeries.zero(degree)
            for r in range(col, n):
                entry = work[r][col]
                if all(c == 0 for c in entry.coeffs):
                    continue
                minor = [
                    [work[rr][cc] for cc in range(col + 1, n)]
                    for rr in range(col, n)
                    if rr != r
                ]
                term = entry * _series_det(minor, degree)
                if (r - col) % 2:
                    term = -term
                acc = acc + term
            for d in diag:
                acc = acc * d
            return acc if sign > 0 else -acc
        if pivot_row != col:
            work[col], work[pivot_row] = work[pivot_row], work[col]
            sign = -sign
        pivot = work[col][col]
        for r in range(col + 1, n):
            if all(c == 0 for c in work[r][col].coeffs):
                continue
            ratio = work[r][col] / pivot
            for c in range(col, n):
                work[r][c] = work[r][c] - ratio * work[col][c]
        diag.append(pivot)
    det = diag[0]
    for d in diag[1:]:
        det = det * d
    return det if sign > 0 else -det


def tau_det(k: int, ell: int, degree: int) -> TruncSeries:
    """T_{k,ell} to the given truncation degree, straight from the determinant."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return TruncSeries.one(degree)
    mat = [
        [g_series(2 * (i + 1) - (j + 1) + ell, degree) for j in range(k)]
        for i in range(k)
    ]
    return _series_det(mat, degree)


def bivariate_tau(k: int, ell: int, deg_x: int, deg_y: int) -> BivariateTruncSeries:
    """Two-variable tau determinant det(gt_{2i-j+ell}), by Laplace expansion."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return BivariateTruncSeries.constant(1, deg_x, deg_y)
    mat = [
        [g_bivariate(2 * (i + 1) - (j + 1) + ell, deg_x, deg_y) for j in range(k)]
        for i in range(k)
    ]

    def det(rows: tuple[int, ...], cols: tuple[int, ...]) -> BivariateTruncSeries:
        if len(rows) == 1:
            return mat[rows[0]][cols[0]]
        acc = BivariateTruncSeries.constant(0, deg_x, deg_y)
        for idx, r in enumerate(rows):
            term = mat[r][cols[0]] * det(
                tuple(rr for rr in rows if rr != r), cols[1:]
            )
            acc = acc + (-term if idx % 2 else term)
        return acc

    return det(tuple(range(k)), tuple(range(k)))


# --- the recurrence table -----------------------------------------------------


@dataclass
class TauTable:
    """Entries T_{k,ell} for k = 0..k_max with per-entry certified degrees."""

    ell: int
    entries: list[TruncSeries]
    certified_degrees: list[int]
    method: str = "recurrence"

    def __post_init__(self):
        if len(self.entries) != len(self.certified_degrees):
            raise ValueError("entries and certified_degrees length mismatch")
        if self.entries[0] != TruncSeries.one(self.entries[0].trunc_degree):
            raise ValueError("entry 0 must be the constant series 1")
        for k, e in enumerate(self.entries):
            if k >= 1 and not e.is_unit():
                raise NonUnitDivisorError(
                    f"tau entry k={k}, ell={self.ell} has vanishing constant term"
                )

    @property
    def k_max(self) -> int:
        return len(self.entries) - 1

    def entry(self, k: int) -> TruncSeries:
        return self.entries[k]

    def certified_degree(self, k: int) -> int:
        return self.certified_degrees[k]

    def max_coeff_bits(self) -> int:
        return max(e.max_coeff_bits() for e in self.entries)

    def to_json_dict(self) -> dict:
        payload = {
            "ell": self.ell,
            "method": self.method,
            "entries": [e.to_json_dict() for e in self.entries],
            "certified_degrees": list(self.certified_degrees),
        }
        payload["integrity"] = _payload_hash(payload)
        return payload

    @classmethod
    def from_json_dict(cls, data: dict) -> "TauTable":
        expected = data.get("integrity")
        payload = {k: v for k, v in data.items() if k != "integrity"}
        if expected != _payload_hash(payload):
            raise ValueError("tau table cache integrity check failed")
        return cls(
            ell=data["ell"],
            entries=[TruncSeries.from_json_dict(e) for e in data["entries"]],
            certified_degrees=list(data["certified_degrees"]),
            method=data["method"],
        )


def _payload_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def tau_recurrence_table(
    k_max: int,
    ell: int,
    base_degree: int | None = None,
    on_entry=None,
) -> TauTable:
    """Build T_{0..k_max, ell} by the differential recurrence.

    base_degree defaults to 2*k_max - 1, the minimum that keeps entry k
    certified to degree >= k for every k <= k_max.  on_entry, if given,
    is called as on_entry(k, elapsed_seconds) after each entry.

    The hot loop runs in a cleared representation (integer coefficient
    vector over one common denominator per series): derivatives and the
    factor u are free, products are pure integer convolutions, and the
    division normalizes one coefficient at a time.
    """
    if k_max < 1:
        raise ValueError("k_max must be positive")
    minimum = 2 * k_max - 1
    if base_degree is None:
        base_degree = minimum
    if base_degree < minimum:
        raise ValueError(
            f"base_degree {base_degree} < {minimum} cannot certify entry "
            f"{k_max} to degree >= {k_max}"
        )
    start = time.monotonic()
    g1 = g_series(1 + ell, base_degree)
    cleared = [
        ([mpz(1)] + [mpz(0)] * base_degree, mpz(1)),
        _clear_denominators(g1.coeffs),
    ]
    if on_entry is not None:
        on_entry(0, time.monotonic() - start)
        on_entry(1, time.monotonic() - start)
    for k in range(1, k_max):
        t, dt = cleared[k]
        out_len = len(t) - 1  # one certified degree lost per step
        # T' and w = (u T')' = T' + u T'' share T's denominator
        t1 = [mpz(n + 1) * t[n + 1] for n in range(len(t) - 1)]
        w = [mpz(n + 1) * t1[n] for n in range(len(t1))]
        m1 = _convolve_ints(t, w, out_len)  # T * (uT')'
        m2 = [mpz(0)] + _convolve_ints(t1, t1, out_len - 1)  # u * (T')^2
        d1 = dt * dt
        rhs = [2 * (m1[n] - m2[n]) for n in range(out_len)]
        rhs, dr = _content_reduce(rhs, d1)
        b, db = cleared[k - 1]
        if b[0] == 0:
            raise NonUnitDivisorError(
                f"tau entry k={k - 1}, ell={ell} has vanishing constant term; "
                "the recurrence cannot divide by it"
            )
        cleared.append(_divide_cleared(rhs, dr, b, db, out_len - 1))
        if on_entry is not None:
            on_entry(k + 1, time.monotonic() - start)
    entries = [
        TruncSeries(tuple(mpq(c, den) for c in ints)) for ints, den in cleared
    ]
    certified = [base_degree] + [base_degree - (k - 1) for k in range(1, k_max + 1)]
    return TauTable(ell=ell, entries=entries, certified_degrees=certified)


def determinant_table(k_max: int, ell: int, degree: int) -> TauTable:
    """Tau table with every entry recomputed independently from the determinant."""
    entries = [tau_det(k, ell, degree) for k in range(k_max + 1)]
    return TauTable(
        ell=ell,
        entries=entries,
        certified_degrees=[degree] * (k_max + 1),
        method="determinant",
    )


# --- disk cache ---------------------------------------------------------------


def default_cache_dir() -> str | None:
    return os.environ.get(_CACHE_ENV_VAR)


def cache_path(cache_dir: str, ell: int, k_max: int, base_degree: int) -> str:
    name = f"tau_ell{ell}_k{k_max}_d{base_degree}_recurrence.json"
    return os.path.join(cache_dir, name)


def save_table(table: TauTable, path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(table.to_json_dict(), fh)
    os.replace(tmp, path)


def load_table(path: str) -> TauTable:
    with open(path) as fh:
        return TauTable.from_json_dict(json.load(fh))


def load_or_build_table(
    k_max: int,
    ell: int,
    base_degree: int | None = None,
    cache_dir: str | None = None,
) -> TauTable:
    """Recurrence table, served from the disk cache when possible."""
    if base_degree is None:
        base_degree = 2 * k_max - 1
    if cache_dir is None:
        cache_dir = default_cache_dir()
    if cache_dir is None:
        return tau_recurrence_table(k_max, ell, base_degree)
    path = cache_path(cache_dir, ell, k_max, base_degree)
    if os.path.exists(path):
        table = load_table(path)
        if table.ell == ell and table.k_max == k_max:
            return table
    table = tau_recurrence_table(k_max, ell, base_degree)
    save_table(table, path)
    return table


# --- Desnanot-Jacobi (Dodgson condensation) ------------------------------------


def det_exact(matrix) -> mpq:
    """Exact determinant of a rational matrix by cofactor expansion.

    Memoized over (row offset, column subset); intended for the small
    matrices of the condensation checks, not as a general routine.
    """
    rows = tuple(tuple(mpq(c) for c in row) for row in matrix)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("matrix must be square")
    if n == 0:
        return mpq(1)
    cache: dict[tuple[int, tuple[int, ...]], mpq] = {}

    def minor(r: int, cols: tuple[int, ...]) -> mpq:
        if not cols:
            return mpq(1)
        key = (r, cols)
        if key in cache:
            return cache[key]
        acc = mpq(0)
        for idx, c in enumerate(cols):
            a = rows[r][c]
            if a:
                sub = minor(r + 1, cols[:idx] + cols[idx + 1 :])
                acc += (a if idx % 2 == 0 else -a) * sub
        cache[key] = acc
        return acc

    return minor(0, tuple(range(n)))


def _delete(matrix, drop_rows, drop_cols):
    return [
        [v for j, v in enumerate(row) if j not in drop_cols]
        for i, row in enumerate(matrix)
        if i not in drop_rows
    ]


def _condensation_holds(matrix, i: int, j: int) -> bool:
    """det A(i|i) det A(j|j) - det A(i|j) det A(j|i) == det A * det A(i,j|i,j)."""
    lhs = det_exact(_delete(matrix, {i}, {i})) * det_exact(_delete(matrix, {j}, {j}))
    lhs -= det_exact(_delete(matrix, {i}, {j})) * det_exact(_delete(matrix, {j}, {i}))
    rhs = det_exact(matrix) * det_exact(_delete(matrix, {i, j}, {i, j}))
    return lhs == rhs


def dodgson_check(matrix, rng: random.Random | None = None) -> bool:
    """Verify the Desnanot-Jacobi identity on an exact rational matrix.

    Checks the corner pair (first row/column against last) and one
    randomized row/column pair, all minors evaluated by exact cofactor
    determinants.
    """
    matrix = [[mpq(c) for c in row] for row in matrix]
    n = len(matrix)
    if n < 2:
        raise ValueError("condensation needs size >= 2")
    pairs = [(0, n - 1)]
    if n > 2:
        if rng is None:
            rng = random.Random()
        i, j = rng.sample(range(n), 2)
        pairs.append((min(i, j), max(i, j)))
    return all(_condensation_holds(matrix, i, j) for i, j in pairs)
