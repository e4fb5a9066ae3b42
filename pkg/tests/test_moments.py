from __future__ import annotations

import csv
import io
import json

import mpmath
import pytest
from gmpy2 import mpq

from rmtmoments.moments import (
    SymmetryClass,
    a_k_euler,
    b_constant,
    b_constant_literal,
    bk_table,
    euler_factor,
    moment_asymptotic,
    moment_asymptotic_exact,
    quadratic_tail_exponent,
    records_to_csv,
    records_to_json,
)
from rmtmoments.reference_values import (
    SO_BK_FACTORS,
    USP_BK_FACTORS,
    o_minus_b10_exact,
    so_bk_display,
    so_bk_exact,
    usp_bk_display,
    usp_bk_exact,
)
from rmtmoments.series import InsufficientPrecisionError
from rmtmoments.tau import determinant_table, tau_recurrence_table


class TestSymmetryClass:
    def test_derivative_orders(self):
        assert SymmetryClass.USP.derivative_order == 2
        assert SymmetryClass.SO.derivative_order == 2
        assert SymmetryClass.O_MINUS.derivative_order == 3

    def test_tau_shifts(self):
        assert SymmetryClass.USP.ell == 0
        assert SymmetryClass.SO.ell == -1
        assert SymmetryClass.O_MINUS.ell == 0

    def test_moment_exponents(self):
        assert SymmetryClass.USP.moment_exponent(3) == 12
        assert SymmetryClass.SO.moment_exponent(3) == 9
        assert SymmetryClass.O_MINUS.moment_exponent(3) == 12

    def test_prefactors(self):
        assert SymmetryClass.USP.prefactor(1) == mpq(1, 8)
        assert SymmetryClass.SO.prefactor(1) == mpq(1, 2)
        assert SymmetryClass.O_MINUS.prefactor(1) == mpq(3, 4)

    def test_from_name(self):
        assert SymmetryClass.from_name("USP") is SymmetryClass.USP
        with pytest.raises(ValueError):
            SymmetryClass.from_name("unitary")


class TestBConstant:
    def test_usp_k1(self, tau_table_ell0):
        assert b_constant(SymmetryClass.USP, 1, tau_table_ell0).value == mpq(1, 6)

    def test_so_k1(self, tau_table_ellm1):
        assert b_constant(SymmetryClass.SO, 1, tau_table_ellm1).value == 1

    def test_so_k2(self, tau_table_ellm1):
        assert b_constant(SymmetryClass.SO, 2, tau_table_ellm1).value == mpq(7, 30)

    def test_ominus_k1_via_identity(self, tau_table_ell0):
        got = b_constant(SymmetryClass.O_MINUS, 1, tau_table_ell0).value
        assert got == 3 * 2 * mpq(1, 6) == 1

    def test_wrong_table_ell_rejected(self, tau_table_ell0):
        with pytest.raises(ValueError):
            b_constant(SymmetryClass.SO, 1, tau_table_ell0)

    def test_insufficient_certified_degree(self):
        table = determinant_table(4, 0, 2)
        with pytest.raises(InsufficientPrecisionError):
            b_constant(SymmetryClass.USP, 3, table)

    def test_k_beyond_table(self, tau_table_ell0):
        with pytest.raises(InsufficientPrecisionError):
            b_constant(SymmetryClass.USP, 13, tau_table_ell0)

    @pytest.mark.parametrize("k", [1, 2, 5, 9, 12])
    def test_single_coefficient_extraction_matches_series_composition(
        self, k, tau_table_ell0, tau_table_ellm1
    ):
        for group, table in (
            (SymmetryClass.USP, tau_table_ell0),
            (SymmetryClass.SO, tau_table_ellm1),
            (SymmetryClass.O_MINUS, tau_table_ell0),
        ):
            fast = b_constant(group, k, table, factor_effort=1).value
            assert fast == b_constant_literal(group, k, table)


class TestAgainstPublishedTables:
    def test_usp_first_ten(self, tau_table_ell0):
        records = [b_constant(SymmetryClass.USP, k, tau_table_ell0) for k in range(1, 11)]
        for k in sorted(USP_BK_FACTORS):
            assert records[k - 1].value == usp_bk_exact(k), f"b_{k}(USp)"
            assert records[k - 1].factored.display() == usp_bk_display(k)

    def test_so_first_ten(self, tau_table_ellm1):
        records = [b_constant(SymmetryClass.SO, k, tau_table_ellm1) for k in range(1, 11)]
        for k in sorted(SO_BK_FACTORS):
            assert records[k - 1].value == so_bk_exact(k), f"b_{k}(SO)"
            assert records[k - 1].factored.display() == so_bk_display(k)

    def test_ominus_k10(self, tau_table_ell0):
        got = b_constant(SymmetryClass.O_MINUS, 10, tau_table_ell0).value
        assert got == o_minus_b10_exact()

    def test_so_b1_is_one_displayed(self, tau_table_ellm1):
        assert b_constant(SymmetryClass.SO, 1, tau_table_ellm1).factored.display() == "1"


class TestBkTable:
    def test_recurrence_prefix(self):
        records = bk_table(SymmetryClass.USP, 10)
        assert [r.k for r in records] == list(range(1, 11))
        assert records[9].value == usp_bk_exact(10)

    def test_determinant_equals_recurrence(self):
        det = bk_table(SymmetryClass.USP, 5, method="determinant")
        rec = bk_table(SymmetryClass.USP, 5, method="recurrence")
        assert [r.value for r in det] == [r.value for r in rec]
        assert det[0].method == "determinant"

    def test_odd_orthogonal_identity(self):
        usp = bk_table(SymmetryClass.USP, 12, factor_effort=1)
        om = bk_table(SymmetryClass.O_MINUS, 12, factor_effort=1)
        for k in range(1, 13):
            assert om[k - 1].value == 3 * mpq(2) ** k * usp[k - 1].value

    def test_positivity(self):
        for group in SymmetryClass:
            assert all(r.value > 0 for r in bk_table(group, 12, factor_effort=1))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            bk_table(SymmetryClass.USP, 2, method="magic")

    def test_cache_dir_roundtrip(self, tmp_path):
        first = bk_table(SymmetryClass.SO, 6, cache_dir=str(tmp_path))
        second = bk_table(SymmetryClass.SO, 6, cache_dir=str(tmp_path))
        assert [r.value for r in first] == [r.value for r in second]


class TestMomentAsymptotic:
    def test_so_k1_n50(self, tau_table_ellm1):
        exact = moment_asymptotic_exact(SymmetryClass.SO, 1, 50, table=tau_table_ellm1)
        assert exact == 10000
        assert moment_asymptotic(SymmetryClass.SO, 1, 50, table=tau_table_ellm1) == "10000"

    def test_usp_k1_n1(self, tau_table_ell0):
        assert moment_asymptotic_exact(SymmetryClass.USP, 1, 1, table=tau_table_ell0) == mpq(4, 3)

    @pytest.mark.parametrize("k", [1, 2, 3])
    @pytest.mark.parametrize("N", [1, 5, 50])
    def test_ominus_to_usp_ratio(self, k, N, tau_table_ell0):
        om = moment_asymptotic_exact(SymmetryClass.O_MINUS, k, N, table=tau_table_ell0)
        usp = moment_asymptotic_exact(SymmetryClass.USP, k, N, table=tau_table_ell0)
        assert om / usp == 3 * mpq(2) ** k


class TestEulerProduct:
    def test_single_prime_cutoff(self):
        for k in (1, 2, 4):
            estimate = a_k_euler(k, 2)
            with mpmath.workdps(50):
                raw = euler_factor(k, 2)
                assert abs(estimate.truncated_product - raw) < mpmath.mpf(10) ** -45
            # the tail estimate must admit how poor a one-term product is
            assert estimate.tail_error > 1e-3

    def test_k1_factor_algebraic_simplification(self):
        # (1-1/p)/(1+1/p) * (1/(1-1/p) + 1/p) collapses to 1 - 1/(p^2+p)
        for p in (2, 3, 5, 97, 10007):
            with mpmath.workdps(60):
                got = euler_factor(1, p, dps=60)
                want = 1 - mpmath.mpf(1) / (mpmath.mpf(p) ** 2 + p)
                assert abs(got - want) < mpmath.mpf(10) ** -55

    def test_k1_factor_at_two_is_five_sixths(self):
        with mpmath.workdps(50):
            assert abs(euler_factor(1, 2) - mpmath.mpf(5) / 6) < mpmath.mpf(10) ** -45

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
    def test_quadratic_tail_exponent_matches_numeric_limit(self, k):
        c4 = quadratic_tail_exponent(k)
        with mpmath.workdps(80):
            t = mpmath.mpf(10) ** 12
            limit = (euler_factor(k, t, dps=80) - 1) * t**2
        assert abs(float(limit) - c4) < 1e-6

    def test_k1_tail_exponent_is_minus_one(self):
        assert quadratic_tail_exponent(1) == -1

    def test_cutoff_consistency(self):
        # refinement changes are bounded by the combined tail estimates
        for k in (1, 3):
            a_small = a_k_euler(k, 20_000)
            a_big = a_k_euler(k, 60_000)
            rel = abs(float(a_small.value - a_big.value)) / float(a_big.value)
            assert rel <= a_small.tail_error + a_big.tail_error
            assert a_big.tail_error < a_small.tail_error

    def test_validation(self):
        with pytest.raises(ValueError):
            a_k_euler(0, 100)
        with pytest.raises(ValueError):
            a_k_euler(1, 1)


class TestRendering:
    def test_csv(self, tau_table_ell0):
        records = [b_constant(SymmetryClass.USP, k, tau_table_ell0) for k in (1, 2)]
        rows = list(csv.reader(io.StringIO(records_to_csv(records))))
        assert rows[0] == ["group", "k", "exact", "factored", "decimal"]
        assert rows[1][:4] == ["usp", "1", "1/6", "1 / (2 * 3)"]
        assert rows[2][2] == "19/5040"

    def test_json(self, tau_table_ellm1):
        records = [b_constant(SymmetryClass.SO, k, tau_table_ellm1) for k in (1, 2)]
        payload = json.loads(records_to_json(records, digits=10))
        assert payload["group"] == "so"
        assert payload["records"][0]["exact"] == "1/1"
        assert payload["records"][1]["exact"] == "7/30"
        assert payload["records"][1]["factored"] == "7 / (2 * 3 * 5)"
