from __future__ import annotations

import csv
import io
import json
import os

import pytest

from rmtmoments.cli import main
from rmtmoments.reference_values import usp_bk_exact


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBk:
    def test_exact_lines(self, capsys):
        code, out, _ = run(capsys, "bk", "--group", "usp", "--kmax", "2", "--format", "exact")
        assert code == 0
        assert out.splitlines() == ["1: 1/6", "2: 19/5040"]

    def test_factored_so(self, capsys):
        code, out, _ = run(capsys, "bk", "--group", "so", "--kmax", "1", "--format", "factored")
        assert code == 0
        assert out.splitlines() == ["1: 1"]

    def test_ominus_identity_value(self, capsys):
        code, out, _ = run(capsys, "bk", "--group", "ominus", "--kmax", "1", "--format", "exact")
        assert code == 0
        assert out.splitlines() == ["1: 1"]

    def test_decimal_format(self, capsys):
        code, out, _ = run(
            capsys, "bk", "--group", "usp", "--kmax", "1", "--format", "decimal", "--digits", "10",
        )
        assert code == 0
        assert out.strip() == "1: 0.1666666667"

    def test_json_schema_roundtrip(self, capsys):
        code, out, _ = run(capsys, "bk", "--group", "usp", "--kmax", "4", "--format", "json")
        assert code == 0
        payload = json.loads(out)
        assert payload["group"] == "usp"
        ks = [r["k"] for r in payload["records"]]
        assert ks == [1, 2, 3, 4]
        num, den = payload["records"][3]["exact"].split("/")
        assert usp_bk_exact(4) == int(num) / __import__("gmpy2").mpq(int(den))

    def test_csv_header(self, capsys):
        code, out, _ = run(capsys, "bk", "--group", "so", "--kmax", "2", "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["group", "k", "exact", "factored", "decimal"]
        assert rows[1][0] == "so"

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "bk.txt"
        code, out, _ = run(
            capsys, "bk", "--group", "usp", "--kmax", "1", "--out", str(path),
        )
        assert code == 0
        assert out == ""
        assert path.read_text().strip() == "1: 1/6"

    def test_insufficient_degree_exit_code(self, capsys):
        code, _, err = run(
            capsys, "bk", "--group", "usp", "--kmax", "3",
            "--method", "determinant", "--degree", "1",
        )
        assert code == 3
        assert "insufficient precision" in err

    def test_bad_kmax_exit_code(self, capsys):
        code, _, err = run(capsys, "bk", "--group", "usp", "--kmax", "0")
        assert code == 2

    def test_low_base_degree_exit_code(self, capsys):
        code, _, err = run(capsys, "bk", "--group", "usp", "--kmax", "5", "--degree", "3")
        assert code == 2

    def test_unknown_group_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bk", "--group", "unitary", "--kmax", "1"])
        assert exc.value.code == 2

    def test_cache_hit_byte_identical(self, capsys, tmp_path):
        args = (
            "bk", "--group", "usp", "--kmax", "6", "--format", "json",
            "--cache-dir", str(tmp_path),
        )
        code1, cold, _ = run(capsys, *args)
        cache_files = os.listdir(tmp_path)
        code2, warm, _ = run(capsys, *args)
        assert code1 == code2 == 0
        assert cold == warm
        assert cache_files and os.listdir(tmp_path) == cache_files


class TestVerify:
    @pytest.mark.parametrize("suite", ["paper-tables", "dodgson", "bivariate", "mc-identities"])
    def test_suites_pass(self, capsys, suite):
        code, out, _ = run(capsys, "verify", "--suite", suite)
        assert code == 0
        assert f"suite {suite}: passed" in out
        assert "FAIL" not in out

    def test_recurrence_vs_det_suite(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "recurrence-vs-det")
        assert code == 0
        assert "tau ell=-2 table refusal" in out

    def test_json_summary(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "dodgson", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["suite"] == "dodgson"
        assert payload["passed"] is True
        assert all(c["ok"] for c in payload["checks"])

    def test_unknown_suite_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "--suite", "everything"])
        assert exc.value.code == 2


class TestMc:
    def test_json_output_and_exact_mean(self, capsys):
        code, out, _ = run(
            capsys, "mc", "--group", "usp", "--n", "1", "--k", "2",
            "--samples", "10", "--seed", "1",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["mean"] == 4.0
        assert payload["m"] == 2  # group default derivative order
        assert payload["resamples"] == 0

    def test_ominus_zero_mean(self, capsys):
        code, out, _ = run(
            capsys, "mc", "--group", "ominus", "--n", "1", "--k", "1",
            "--samples", "10", "--seed", "1",
        )
        payload = json.loads(out)
        assert code == 0
        assert payload["mean"] == 0.0
        assert payload["m"] == 3

    def test_deterministic_across_invocations(self, capsys):
        args = (
            "mc", "--group", "so", "--n", "6", "--k", "1",
            "--samples", "25", "--seed", "42", "--check-identities",
        )
        _, out1, _ = run(capsys, *args)
        _, out2, _ = run(capsys, *args)
        p1, p2 = json.loads(out1), json.loads(out2)
        p1.pop("wall_time_s"), p2.pop("wall_time_s")
        assert p1 == p2

    def test_invalid_samples_usage_error(self, capsys):
        code, _, err = run(
            capsys, "mc", "--group", "so", "--n", "2", "--k", "1",
            "--samples", "0", "--seed", "1",
        )
        assert code == 2


class TestBench:
    def test_small_run_agrees(self, capsys):
        code, out, _ = run(capsys, "bench", "--kmax", "3")
        assert code == 0
        assert "agrees with recurrence" in out
        assert "peak coefficient size" in out

    def test_monotone_cumulative_timings(self, capsys):
        code, out, _ = run(capsys, "bench", "--kmax", "12")
        assert code == 0
        marks = [
            float(line.split("cumulative")[1].split("s")[0])
            for line in out.splitlines()
            if "cumulative" in line
        ]
        assert marks == sorted(marks)


class TestAk:
    def test_text_output(self, capsys):
        code, out, _ = run(capsys, "ak", "--k", "1", "--cutoff", "1000", "--digits", "12")
        assert code == 0
        assert "a_1(primes <= 1000)" in out
        assert "tail error estimate" in out

    def test_json_output(self, capsys):
        code, out, _ = run(capsys, "ak", "--k", "2", "--cutoff", "500", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["k"] == 2
        assert payload["prime_cutoff"] == 500
        assert payload["tail_error"] > 0

    def test_deterministic(self, capsys):
        _, out1, _ = run(capsys, "ak", "--k", "3", "--cutoff", "300", "--json")
        _, out2, _ = run(capsys, "ak", "--k", "3", "--cutoff", "300", "--json")
        assert out1 == out2

    def test_bad_cutoff_usage_error(self, capsys):
        code, _, _ = run(capsys, "ak", "--k", "1", "--cutoff", "1")
        assert code == 2
