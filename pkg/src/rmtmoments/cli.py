"""Command-line front end.

Subcommands: bk (tables of constants), verify (invariant suites), mc
(Monte Carlo estimates), bench (recurrence vs determinant timing), ak
(arithmetic Euler factor).  Exit codes: 0 success, 1 verification
failure, 2 usage error, 3 insufficient precision.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time

import numpy as np

from gmpy2 import mpq

from .exact import format_rational
from .moments import (
    SymmetryClass,
    a_k_euler,
    b_constant,
    bk_table,
    records_to_csv,
    records_to_json,
)
from .reference_values import (
    SO_BK_FACTORS,
    USP_BK_FACTORS,
    o_minus_b10_exact,
    so_bk_exact,
    usp_bk_exact,
)
from .sampling import (
    charpoly_coeffs,
    estimate_moment,
    identity_residual,
    rng_for_sample,
    sample_group,
)
from .series import InsufficientPrecisionError, NonUnitDivisorError, TruncSeries
from .specfun import g_bivariate
from .tau import (
    bivariate_tau,
    default_cache_dir,
    dodgson_check,
    load_or_build_table,
    tau_det,
    tau_recurrence_table,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_PRECISION = 3

DEFAULT_SEED = 20260810
VERIFY_SUITES = ("paper-tables", "recurrence-vs-det", "dodgson", "bivariate", "mc-identities")


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


# --- bk ------------------------------------------------------------------------


def cmd_bk(args) -> int:
    group = SymmetryClass.from_name(args.group)
    records = bk_table(
        group,
        args.kmax,
        method=args.method,
        base_degree=args.degree,
        cache_dir=args.cache_dir,
        factor_effort=args.factor_effort,
    )
    if args.format == "json":
        text = records_to_json(records, args.digits)
    elif args.format == "csv":
        text = records_to_csv(records, args.digits)
    else:
        lines = []
        for r in records:
            if args.format == "exact":
                shown = str(r.value)  # "1" for integers, "19/5040" otherwise
            elif args.format == "factored":
                shown = r.factored.display()
            else:
                shown = r.decimal(args.digits)
            lines.append(f"{r.k}: {shown}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


# --- verify ----------------------------------------------------------------------


def _suite_paper_tables(args) -> list[tuple[str, bool, str]]:
    checks = []
    usp = bk_table(SymmetryClass.USP, 10, cache_dir=args.cache_dir, factor_effort=1)
    so = bk_table(SymmetryClass.SO, 10, cache_dir=args.cache_dir, factor_effort=1)
    for k in sorted(USP_BK_FACTORS):
        got, want = usp[k - 1].value, usp_bk_exact(k)
        checks.append(
            (f"usp b_{k}", got == want, f"got {format_rational(got)}")
        )
    for k in sorted(SO_BK_FACTORS):
        got, want = so[k - 1].value, so_bk_exact(k)
        checks.append(
            (f"so b_{k}", got == want, f"got {format_rational(got)}")
        )
    om = bk_table(SymmetryClass.O_MINUS, 10, cache_dir=args.cache_dir, factor_effort=1)
    checks.append(
        (
            "ominus b_10",
            om[9].value == o_minus_b10_exact(),
            f"got {format_rational(om[9].value)}",
        )
    )
    return checks


def _suite_recurrence_vs_det(args) -> list[tuple[str, bool, str]]:
    checks = []
    k_max, degree = 8, 12
    base = degree + (k_max - 1)
    for ell in (-1, 0, 1, 2):
        table = tau_recurrence_table(k_max, ell, base)
        for k in range(k_max + 1):
            d = min(degree, table.certified_degree(k))
            ok = table.entry(k).truncate(d) == tau_det(k, ell, d)
            checks.append((f"tau ell={ell} k={k} degree<={d}", ok, "recurrence == det"))
    # ell = -2: T_{k,-2}(0) = 0, so the table route must refuse to divide;
    # the recurrence is then validated as a bilinear identity, division-free.
    try:
        tau_recurrence_table(3, -2, 12)
        checks.append(("tau ell=-2 table refusal", False, "expected NonUnitDivisorError"))
    except NonUnitDivisorError:
        checks.append(("tau ell=-2 table refusal", True, "vanishing constant term reported"))
    for k in range(1, 5):
        d = 10
        t_prev = tau_det(k - 1, -2, d)
        t_k = tau_det(k, -2, d)
        t_next = tau_det(k + 1, -2, d)
        t1 = t_k.derivative()
        rhs = ((t_k * t1.shift_up().derivative()) - (t1 * t1).shift_up()).scale(2)
        lhs = t_next * t_prev
        dd = min(lhs.trunc_degree, rhs.trunc_degree)
        checks.append(
            (
                f"tau ell=-2 bilinear identity k={k}",
                lhs.truncate(dd) == rhs.truncate(dd),
                "division-free form",
            )
        )
    return checks


def _suite_dodgson(args) -> list[tuple[str, bool, str]]:
    rng = random.Random(args.seed)
    failures = 0
    for trial in range(100):
        n = rng.randrange(2, 7)
        matrix = [
            [mpq(rng.randrange(-9, 10), rng.randrange(1, 10)) for _ in range(n)]
            for _ in range(n)
        ]
        if not dodgson_check(matrix, rng):
            failures += 1
    return [
        (
            "dodgson condensation on 100 seeded matrices",
            failures == 0,
            f"{failures} failures, seed {args.seed}",
        )
    ]


def _suite_bivariate(args) -> list[tuple[str, bool, str]]:
    checks = []
    deg_y = 3
    for ell in (-1, 0):
        for k in range(1, 5):
            deg_x = 2 * (k + 1) + ell + 2 * deg_y + 1
            t_k = bivariate_tau(k, ell, deg_x, deg_y)
            t_prev = bivariate_tau(k - 1, ell, deg_x, deg_y)
            t_next = bivariate_tau(k + 1, ell, deg_x, deg_y)
            lhs = t_next * t_prev
            rhs = t_k * t_k.partial_x().partial_y() - t_k.partial_x() * t_k.partial_y()
            dx = min(lhs.deg_x, rhs.deg_x)
            dy = min(lhs.deg_y, rhs.deg_y)
            ok = lhs.truncate(dx, dy) == rhs.truncate(dx, dy)
            checks.append((f"bivariate recurrence ell={ell} k={k}", ok, "exact"))
            # scaling: T~_{k,l}(x,y) = x^(k(k+1)/2 + k l) T_{k,l}(x^2 y)
            e = k * (k + 1) // 2 + k * ell
            uni = tau_det(k, ell, deg_y)
            ok = True
            for a in range(t_k.deg_x + 1):
                for b in range(t_k.deg_y + 1):
                    want = uni.coeffs[b] if a == e + 2 * b else mpq(0)
                    if t_k.coeff(a, b) != want:
                        ok = False
            checks.append((f"bivariate scaling ell={ell} k={k}", ok, f"exponent {e}"))
    return checks


def _suite_mc_identities(args) -> list[tuple[str, bool, str]]:
    checks = []
    tol = 1e-8
    for group in SymmetryClass:
        worst = 0.0
        for index in range(40):
            rng = rng_for_sample(args.seed, index)
            sample = sample_group(group, 7, rng)
            coeffs = charpoly_coeffs(sample)
            worst = max(worst, identity_residual(sample, coeffs))
            # palindromy c_j = +- c_(2N-j) from the functional equation
            sign = -1.0 if group is SymmetryClass.O_MINUS else 1.0
            pal = np.max(np.abs(coeffs - sign * coeffs[::-1]))
            scale = max(1.0, float(np.max(np.abs(coeffs))))
            worst = max(worst, pal / scale)
        checks.append(
            (
                f"mc identities {group.value} (40 samples, N=7)",
                worst <= tol,
                f"max residual {worst:.3e}",
            )
        )
    return checks


def cmd_verify(args) -> int:
    suites = {
        "paper-tables": _suite_paper_tables,
        "recurrence-vs-det": _suite_recurrence_vs_det,
        "dodgson": _suite_dodgson,
        "bivariate": _suite_bivariate,
        "mc-identities": _suite_mc_identities,
    }
    checks = suites[args.suite](args)
    passed = all(ok for _, ok, _ in checks)
    if args.json:
        payload = {
            "suite": args.suite,
            "passed": passed,
            "checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in checks],
        }
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        lines = []
        for name, ok, detail in checks:
            status = "ok  " if ok else "FAIL"
            lines.append(f"{status} {name}  [{detail}]")
        lines.append(f"suite {args.suite}: {'passed' if passed else 'FAILED'}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


# --- mc ---------------------------------------------------------------------------


def cmd_mc(args) -> int:
    group = SymmetryClass.from_name(args.group)
    m = args.m if args.m is not None else group.derivative_order
    estimate = estimate_moment(
        group,
        args.n,
        args.k,
        m,
        args.samples,
        args.seed,
        workers=args.workers,
        check_identities=args.check_identities,
        cache_dir=args.cache_dir,
    )
    _emit(json.dumps(estimate.to_json_dict(), indent=2), args.out)
    return EXIT_OK


# --- bench -------------------------------------------------------------------------


def cmd_bench(args) -> int:
    lines = [f"recurrence table: k_max={args.kmax}, base_degree={2 * args.kmax - 1}"]
    marks: dict[int, float] = {}

    def on_entry(k, elapsed):
        marks[k] = elapsed

    t0 = time.monotonic()
    table = tau_recurrence_table(args.kmax, 0, on_entry=on_entry)
    build_time = time.monotonic() - t0
    step = max(1, args.kmax // 10)
    for k in sorted(marks):
        if k % step == 0 or k == args.kmax:
            lines.append(f"  entry {k:4d}: cumulative {marks[k]:9.3f} s")
    t0 = time.monotonic()
    records = [b_constant(SymmetryClass.USP, k, table, factor_effort=1) for k in range(1, args.kmax + 1)]
    extract_time = time.monotonic() - t0
    lines.append(f"table build: {build_time:.3f} s, constant extraction: {extract_time:.3f} s")
    lines.append(f"peak coefficient size: {table.max_coeff_bits()} bits")
    det_cap = min(args.det_cap, args.kmax)
    t0 = time.monotonic()
    agree = True
    for k in range(det_cap + 1):
        d = min(table.certified_degree(k), 2 * det_cap)
        agree &= tau_det(k, 0, d) == table.entry(k).truncate(d)
    det_time = time.monotonic() - t0
    lines.append(
        f"determinant oracle k<={det_cap}: {det_time:.3f} s, "
        f"{'agrees with recurrence' if agree else 'DISAGREES'}"
    )
    lines.append(f"b_{args.kmax}(usp) has {records[-1].value.denominator.bit_length()} denominator bits")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if agree else EXIT_VERIFY_FAILED


# --- ak ----------------------------------------------------------------------------


def cmd_ak(args) -> int:
    estimate = a_k_euler(args.k, args.cutoff, dps=args.dps)
    import mpmath

    with mpmath.workdps(max(estimate.dps, args.digits)):
        truncated = mpmath.nstr(estimate.truncated_product, args.digits)
    if args.json:
        payload = {
            "k": estimate.k,
            "prime_cutoff": estimate.prime_cutoff,
            "value": estimate.value_str(args.digits),
            "truncated_product": truncated,
            "tail_error": estimate.tail_error,
            "working_dps": estimate.dps,
        }
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        _emit(
            f"a_{args.k}(primes <= {args.cutoff}) = {estimate.value_str(args.digits)}\n"
            f"truncated product (no tail): {truncated}\n"
            f"tail error estimate: {estimate.tail_error:.3e}\n",
            args.out,
        )
    return EXIT_OK


# --- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmtmoments",
        description=(
            "Exact leading constants for moments of derivatives of characteristic "
            "polynomials over USp(2N), SO(2N) and O-(2N), with Monte Carlo checks."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--cache-dir", default=default_cache_dir(),
                       help="tau table cache directory (env RMTMOMENTS_CACHE_DIR)")
        p.add_argument("--out", default=None, help="write output to a file instead of stdout")

    p = sub.add_parser("bk", help="table of constants b_k")
    p.add_argument("--group", required=True, choices=[g.value for g in SymmetryClass])
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--method", choices=["recurrence", "determinant"], default="recurrence")
    p.add_argument("--format", choices=["exact", "factored", "decimal", "json", "csv"],
                   default="exact")
    p.add_argument("--digits", type=int, default=30, help="decimal rendering digits")
    p.add_argument("--degree", type=int, default=None,
                   help="override the series truncation degree")
    p.add_argument("--factor-effort", type=int, default=200_000,
                   help="iteration budget for factoring numerators")
    common(p)
    p.set_defaults(func=cmd_bk)

    p = sub.add_parser("verify", help="run an invariant suite")
    p.add_argument("--suite", required=True, choices=list(VERIFY_SUITES))
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--json", action="store_true", help="machine-readable summary")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mc", help="Monte Carlo moment estimate")
    p.add_argument("--group", required=True, choices=[g.value for g in SymmetryClass])
    p.add_argument("--n", type=int, required=True, help="half matrix size N")
    p.add_argument("--k", type=int, required=True, help="moment order")
    p.add_argument("--m", type=int, default=None,
                   help="derivative order (default: the group's natural order)")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--check-identities", action="store_true",
                   help="verify the per-sample derivative identities")
    common(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("bench", help="time the recurrence against the determinant oracle")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--det-cap", type=int, default=6,
                   help="largest k for the determinant cross-check")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ak", help="arithmetic Euler factor a_k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--cutoff", type=int, required=True, help="prime cutoff")
    p.add_argument("--digits", type=int, default=30)
    p.add_argument("--dps", type=int, default=50, help="working decimal precision")
    p.add_argument("--json", action="store_true")
    common(p)
    p.set_defaults(func=cmd_ak)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cache_dir is not None:
        os.makedirs(args.cache_dir, exist_ok=True)
    try:
        return args.func(args)
    except InsufficientPrecisionError as exc:
        print(f"error: insufficient precision: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (ValueError, NonUnitDivisorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
