"""Exact moment constants for derivatives of random matrix characteristic polynomials.

The package computes the leading constants b_k in the large-N moment
asymptotics of derivatives of characteristic polynomials over USp(2N),
SO(2N) and O-(2N), by two independent exact routes (a determinant of
hypergeometric-type series and a fast Toda-style differential
recurrence), and cross-checks them against published tables and against
Haar-measure Monte Carlo sampling.
"""

from .exact import (
    FactoredRational,
    Rational,
    decimal_string,
    factor_int,
    factor_rational,
    factorial,
    format_rational,
    is_probable_prime,
    parse_rational,
    rational,
)
from .moments import (
    AkEstimate,
    BkRecord,
    SymmetryClass,
    a_k_euler,
    b_constant,
    bk_table,
    euler_factor,
    moment_asymptotic,
    moment_asymptotic_exact,
    quadratic_tail_exponent,
    records_to_csv,
    records_to_json,
)
from .sampling import (
    EigenangleSample,
    MCEstimate,
    charpoly_coeffs,
    derivative_at_one,
    estimate_moment,
    identity_residual,
    sample_group,
    sample_orthogonal,
    sample_symplectic,
)
from .series import (
    BivariateTruncSeries,
    InsufficientPrecisionError,
    NonUnitDivisorError,
    TruncSeries,
)
from .specfun import exp_series, g_bivariate, g_series
from .tau import (
    TauTable,
    bivariate_tau,
    determinant_table,
    dodgson_check,
    load_or_build_table,
    tau_det,
    tau_recurrence_table,
)

__version__ = "0.1.0"

__all__ = [
    "AkEstimate",
    "BivariateTruncSeries",
    "BkRecord",
    "EigenangleSample",
    "FactoredRational",
    "InsufficientPrecisionError",
    "MCEstimate",
    "NonUnitDivisorError",
    "Rational",
    "SymmetryClass",
    "TauTable",
    "TruncSeries",
    "a_k_euler",
    "b_constant",
    "bivariate_tau",
    "bk_table",
    "charpoly_coeffs",
    "decimal_string",
    "derivative_at_one",
    "determinant_table",
    "dodgson_check",
    "estimate_moment",
    "euler_factor",
    "exp_series",
    "factor_int",
    "factor_rational",
    "factorial",
    "format_rational",
    "g_bivariate",
    "g_series",
    "identity_residual",
    "is_probable_prime",
    "load_or_build_table",
    "moment_asymptotic",
    "moment_asymptotic_exact",
    "parse_rational",
    "quadratic_tail_exponent",
    "rational",
    "records_to_csv",
    "records_to_json",
    "sample_group",
    "sample_orthogonal",
    "sample_symplectic",
    "tau_det",
    "tau_recurrence_table",
]
