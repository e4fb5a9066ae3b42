"""Haar-measure Monte Carlo for derivatives of characteristic polynomials.

Matrices from SO(2N), O-(2N) and USp(2N) are sampled at Haar measure,
their eigen-angles extracted, and moments of the m-th derivative of

    L(x) = prod_n (1 - e^(i theta_n) x)(1 - e^(-i theta_n) x)

at x = 1 estimated empirically (O- carries an extra forced (1-x)(1+x)
factor).  Everything is reproducible: sample i of a run draws its own
generator from (seed, i), so results are bit-identical for a given seed
regardless of worker count, and means are reduced with numpy's pairwise
summation over the index-ordered value array.

Sampling notes.  Orthogonal matrices come from QR of a Gaussian matrix
with the R-diagonal sign convention that makes the factorization unique
(Haar on O(2N)); the determinant component is adjusted, when needed, by
negating the last column, which exchanges the two Haar components.
Symplectic matrices come from Gram-Schmidt over the quaternions applied
to a quaternionic Gaussian matrix, stored as a pair (A, B) of complex
matrices for q = A + B j and mapped to the 2N x 2N complex
representation [[A, B], [-conj(B), conj(A)]].

Angle extraction uses a dense symmetric eigensolver on the Hermitian
part (Q + Q*)/2, whose spectrum is the cos(theta) values each doubled
(plus the forced +-1 pair for O-).

Numerical stability.  The coefficients of L are rebuilt from the angles
by convolving the quadratic factors, never read off a numerical
determinant.  The factors are multiplied in bit-reversed index order of
the sorted angles: prefix products then cover near-equidistributed
subsets of the spectrum and stay O(1), whereas sorted order clusters
roots on an arc and overflows double precision.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .moments import SymmetryClass, moment_asymptotic_exact

_ORTHONORMALITY_TOL = 1e-10
_MAX_RESAMPLE_ATTEMPTS = 16


@dataclass(frozen=True)
class EigenangleSample:
    """Eigen-angles in [0, pi] of one Haar sample.

    SO/USp carry N angles; O- carries N-1 plus the implicit fixed
    eigenvalue pair {+1, -1}.
    """

    group: SymmetryClass
    N: int
    angles: np.ndarray
    retries: int = 0

    @property
    def has_forced_pair(self) -> bool:
        return self.group is SymmetryClass.O_MINUS


@dataclass(frozen=True)
class MCEstimate:
    group: SymmetryClass
    N: int
    k: int
    m: int
    num_samples: int
    mean: float
    std_error: float
    seed: int
    prediction: float | None
    ratio: float | None
    flagged: bool
    resamples: int
    wall_time_s: float
    max_identity_residual: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "group": self.group.value,
            "N": self.N,
            "k": self.k,
            "m": self.m,
            "num_samples": self.num_samples,
            "mean": self.mean,
            "std_error": self.std_error,
            "seed": self.seed,
            "prediction": self.prediction,
            "ratio": self.ratio,
            "flagged": self.flagged,
            "resamples": self.resamples,
            "wall_time_s": self.wall_time_s,
            "max_identity_residual": self.max_identity_residual,
        }


def rng_for_sample(seed: int, index: int) -> np.random.Generator:
    """The generator owned by sample `index` of a run with master `seed`."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _angles_from_cosines(cosines: np.ndarray) -> np.ndarray:
    return np.sort(np.arccos(np.clip(cosines, -1.0, 1.0)))


def sample_orthogonal(N: int, component: str, rng: np.random.Generator) -> EigenangleSample:
    """Haar sample from SO(2N) (component="plus") or O-(2N) ("minus")."""
    if N < 1:
        raise ValueError("N must be positive")
    if component not in ("plus", "minus"):
        raise ValueError("component must be 'plus' or 'minus'")
    group = SymmetryClass.SO if component == "plus" else SymmetryClass.O_MINUS
    retries = 0
    while True:
        try:
            a = rng.standard_normal((2 * N, 2 * N))
            q, r = np.linalg.qr(a)
            q = q * np.sign(np.diag(r))
            det = np.linalg.det(q)
            want = 1.0 if component == "plus" else -1.0
            if det * want < 0:
                q[:, -1] = -q[:, -1]
            cosines = np.linalg.eigvalsh((q + q.T) / 2)  # ascending
            break
        except np.linalg.LinAlgError:
            retries += 1
            if retries >= _MAX_RESAMPLE_ATTEMPTS:
                raise
    if component == "minus":
        # drop the forced eigenvalues -1 (smallest cosine) and +1 (largest)
        cosines = cosines[1:-1]
    angles = _angles_from_cosines(cosines[::2])
    return EigenangleSample(group=group, N=N, angles=angles, retries=retries)


def _quaternion_gram_schmidt(qa: np.ndarray, qb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormalize the columns of the quaternion matrix A + B j in place.

    Classical Gram-Schmidt with one reorthogonalization pass per column;
    the diagonal of the implicit triangular factor is positive real, which
    is what makes QR of a quaternionic Gaussian Haar-distributed.
    """
    n = qa.shape[0]
    for i in range(n):
        for _ in range(2 if i else 1):
            ua, ub = qa[:, :i], qb[:, :i]
            va, vb = qa[:, i], qb[:, i]
            if i:
                alpha = ua.conj().T @ va + ub.T @ vb.conj()
                beta = ua.conj().T @ vb - ub.T @ va.conj()
                qa[:, i] = va - (ua @ alpha - ub @ beta.conj())
                qb[:, i] = vb - (ua @ beta + ub @ alpha.conj())
        nrm = np.sqrt(np.sum(np.abs(qa[:, i]) ** 2 + np.abs(qb[:, i]) ** 2))
        if nrm == 0.0:
            raise np.linalg.LinAlgError("degenerate quaternionic Gaussian draw")
        qa[:, i] /= nrm
        qb[:, i] /= nrm
    return qa, qb


def _symplectic_embedding(qa: np.ndarray, qb: np.ndarray) -> np.ndarray:
    top = np.hstack([qa, qb])
    bot = np.hstack([-qb.conj(), qa.conj()])
    return np.vstack([top, bot])


def sample_symplectic(N: int, rng: np.random.Generator) -> EigenangleSample:
    """Haar sample from USp(2N) via quaternionic Gram-Schmidt."""
    if N < 1:
        raise ValueError("N must be positive")
    retries = 0
    while True:
        try:
            x = rng.standard_normal((4, N, N))
            qa = x[0] + 1j * x[1]
            qb = x[2] + 1j * x[3]
            qa, qb = _quaternion_gram_schmidt(qa, qb)
            u = _symplectic_embedding(qa, qb)
            err = np.max(np.abs(u.conj().T @ u - np.eye(2 * N)))
            if err > _ORTHONORMALITY_TOL:
                raise np.linalg.LinAlgError(f"orthonormality loss {err:.3e}")
            cosines = np.linalg.eigvalsh((u + u.conj().T) / 2)
            break
        except np.linalg.LinAlgError:
            retries += 1
            if retries >= _MAX_RESAMPLE_ATTEMPTS:
                raise
    angles = _angles_from_cosines(cosines[::2])
    return EigenangleSample(group=SymmetryClass.USP, N=N, angles=angles, retries=retries)


def sample_group(group: SymmetryClass, N: int, rng: np.random.Generator) -> EigenangleSample:
    if group is SymmetryClass.USP:
        return sample_symplectic(N, rng)
    if group is SymmetryClass.SO:
        return sample_orthogonal(N, "plus", rng)
    return sample_orthogonal(N, "minus", rng)


def _bit_reversed_order(n: int) -> list[int]:
    if n <= 1:
        return list(range(n))
    bits = (n - 1).bit_length()
    order = []
    for i in range(1 << bits):
        rev = int(format(i, f"0{bits}b")[::-1], 2)
        if rev < n:
            order.append(rev)
    return order


def charpoly_coeffs(sample: EigenangleSample) -> np.ndarray:
    """Real coefficients of L(x), ascending powers, degree 2N.

    Built by convolving the per-angle quadratics 1 - 2 cos(theta) x + x^2
    in bit-reversed order of the sorted angles (see module docstring),
    with the extra 1 - x^2 factor for O-.
    """
    angles = np.sort(sample.angles)
    p = np.array([1.0])
    for i in _bit_reversed_order(len(angles)):
        p = np.convolve(p, np.array([1.0, -2.0 * np.cos(angles[i]), 1.0]))
    if sample.has_forced_pair:
        p = np.convolve(p, np.array([1.0, 0.0, -1.0]))
    return p


def derivative_at_one(coeffs: np.ndarray, m: int) -> float:
    """m-th derivative at 1: sum over j >= m of coeffs[j] * j!/(j-m)!.

    Orders beyond the degree give 0 (the falling-factorial weights all
    vanish), e.g. the third derivative of the O- factor 1 - x^2 at N = 1.
    """
    if m < 0:
        raise ValueError("derivative order must be non-negative")
    j = np.arange(len(coeffs), dtype=np.float64)
    weights = np.ones_like(j)
    for t in range(m):
        weights *= j - t
    return float(np.sum(np.asarray(coeffs) * weights))


def _falling_weight_scale(coeffs: np.ndarray, m: int) -> float:
    j = np.arange(len(coeffs), dtype=np.float64)
    weights = np.ones_like(j)
    for t in range(m):
        weights *= np.maximum(j - t, 0.0)
    return float(np.sum(np.abs(coeffs) * weights))


def identity_residual(sample: EigenangleSample, coeffs: np.ndarray) -> float:
    """Residual of the exact first-derivative relation, from the coefficients.

    SO/USp satisfy L'(1) = N L(1); O- has L(1) = 0 and instead
    L''(1) = (2N - 1) L'(1).  The residual is normalized by the larger of
    the two sides and the conditioning scale sum |c_j| w_j of the
    evaluation, so samples where L(1) happens to be tiny (an eigenvalue
    near +1) do not divide rounding noise by a near-zero value.
    """
    if sample.has_forced_pair:
        lhs = derivative_at_one(coeffs, 2)
        rhs = (2 * sample.N - 1) * derivative_at_one(coeffs, 1)
        scale = max(abs(lhs), abs(rhs), _falling_weight_scale(coeffs, 2))
    else:
        lhs = derivative_at_one(coeffs, 1)
        rhs = sample.N * derivative_at_one(coeffs, 0)
        scale = max(abs(lhs), abs(rhs), _falling_weight_scale(coeffs, 1))
    return abs(lhs - rhs) / scale


def _chunk_values(args) -> tuple[np.ndarray, int, float]:
    group_name, N, k, m, seed, start, stop, check_identities = args
    group = SymmetryClass(group_name)
    values = np.empty(stop - start, dtype=np.float64)
    resamples = 0
    max_residual = 0.0
    for index in range(start, stop):
        rng = rng_for_sample(seed, index)
        sample = sample_group(group, N, rng)
        resamples += sample.retries
        coeffs = charpoly_coeffs(sample)
        if check_identities:
            max_residual = max(max_residual, identity_residual(sample, coeffs))
        values[index - start] = derivative_at_one(coeffs, m) ** k
    return values, resamples, max_residual


def estimate_moment(
    group: SymmetryClass,
    N: int,
    k: int,
    m: int,
    num_samples: int,
    seed: int,
    workers: int = 1,
    check_identities: bool = False,
    prediction_table=None,
    cache_dir: str | None = None,
) -> MCEstimate:
    """Empirical k-th moment of L^(m)(1), with the leading-order prediction.

    The prediction is available only when m matches the group's
    derivative order (2 for SO/USp, 3 for O-); other pairings are
    computed without one and flagged.  The ratio compares |mean| against
    the prediction, since the O- third derivative carries a sign.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be positive")
    t0 = time.monotonic()
    workers = max(1, min(workers, num_samples))
    chunk = (num_samples + workers - 1) // workers
    bounds = [(s, min(s + chunk, num_samples)) for s in range(0, num_samples, chunk)]
    tasks = [
        (group.value, N, k, m, seed, start, stop, check_identities)
        for start, stop in bounds
    ]
    if workers == 1:
        results = [_chunk_values(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_chunk_values, tasks))
    values = np.concatenate([r[0] for r in results])
    resamples = sum(r[1] for r in results)
    max_residual = max(r[2] for r in results) if check_identities else None
    mean = float(np.sum(values) / num_samples)
    std_error = (
        float(np.std(values, ddof=1) / np.sqrt(num_samples)) if num_samples > 1 else 0.0
    )
    prediction = None
    ratio = None
    flagged = False
    if m == group.derivative_order:
        prediction = float(
            moment_asymptotic_exact(group, k, N, table=prediction_table, cache_dir=cache_dir)
        )
        ratio = abs(mean) / prediction
    else:
        flagged = True
    return MCEstimate(
        group=group,
        N=N,
        k=k,
        m=m,
        num_samples=num_samples,
        mean=mean,
        std_error=std_error,
        seed=seed,
        prediction=prediction,
        ratio=ratio,
        flagged=flagged,
        resamples=resamples,
        wall_time_s=time.monotonic() - t0,
        max_identity_residual=max_residual,
    )
