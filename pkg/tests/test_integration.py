"""
Integration tests for the command-line surface.
Runs every management command end to end and checks the emitted reports.
"""

import csv
import io
import math
from unittest.mock import patch

import pytest
from django.core.management.base import CommandError

from core.models import RunRecord


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.integration
class TestBoxCommand:
    def test_ks_box_table(self, run_json):
        report = run_json("box", "ks", n=5, p="0.5")
        assert report["n"] == 5
        assert len(report["box"]["blocks"]) == 25
        assert report["no_signalling"]["passed"] is True
        assert report["perp"]["holds"] is True
        assert report["perp"]["offending_entries"] == []
        blocks = {(b["x"], b["y"]): b["p"] for b in report["box"]["blocks"]}
        assert blocks[(1, 1)] == [[0.5, 0.0], [0.0, 0.5]]
        assert blocks[(1, 2)] == [[0.0, 0.5], [0.5, 0.0]]
        assert report["meta"]["numeric_mode"] == "float"

    def test_ks_box_exact(self, run_json):
        report = run_json("box", "ks", n=3, p="1/3", exact=True)
        blocks = {(b["x"], b["y"]): b["p"] for b in report["box"]["blocks"]}
        assert blocks[(2, 3)] == [["1/3", "1/3"], ["1/3", "0/1"]]
        assert report["p"] == "1/3"

    def test_pr_box(self, run_json):
        report = run_json("box", "pr", n=2, exact=True)
        blocks = {(b["x"], b["y"]): b["p"] for b in report["box"]["blocks"]}
        assert blocks[(1, 1)] == [["0/1", "1/2"], ["1/2", "0/1"]]
        assert blocks[(2, 2)] == [["1/2", "0/1"], ["0/1", "1/2"]]
        assert report["no_signalling"]["passed"] is True
        offending = report["perp"]["offending_entries"]
        assert report["perp"]["holds"] is False
        assert {"x": 1, "y": 1, "a": 0, "b": 1, "p": "1/2"} in offending
        assert {"x": 1, "y": 1, "a": 1, "b": 0, "p": "1/2"} in offending

    def test_marginal_out_of_range(self, run_command):
        with pytest.raises(CommandError, match="^invalid_marginal"):
            run_command("box", "ks", n=3, p="0.7")

    def test_ks_needs_marginal(self, run_command):
        with pytest.raises(CommandError, match="^invalid_marginal"):
            run_command("box", "ks", n=3)

    def test_csv_rows(self, run_command):
        rows = read_csv(run_command("box", "ks", n=2, p="0.25", format="csv", seed=3))
        assert len(rows) == 16
        assert rows[0] == {"x": "1", "y": "1", "a": "0", "b": "0", "p": "0.75", "seed": "3"}


@pytest.mark.integration
class TestSimCommand:
    def test_pentagon_half(self, run_json):
        report = run_json("sim", "charts", n=5, p="0.5")
        assert report["closed_form"] == 0.84
        assert report["lp_oracle"] == 0.84
        assert report["agree"] is True
        assert report["lp_highs"] == pytest.approx(0.84, abs=1e-9)

    def test_exact_values(self, run_json):
        report = run_json("sim", "charts", n=5, p="1/2", exact=True)
        assert report["closed_form"] == "21/25"
        assert report["strategy"] == [
            {"degree": 2, "weight": "1/2"},
            {"degree": 3, "weight": "1/2"},
        ]

    def test_perfect_simulation(self, run_json):
        report = run_json("sim", "charts", n=5, p="0.2")
        assert report["closed_form"] == 1
        assert report["lp_oracle"] == 1

    @pytest.mark.slow
    def test_monte_carlo_within_three_sigma(self, run_json):
        report = run_json("sim", "charts", n=5, p="0.5", rounds=1_000_000, seed=7)
        sigma = math.sqrt(0.84 * 0.16 / 1_000_000)
        assert abs(report["monte_carlo"]["success_rate"] - 0.84) < 3 * sigma
        assert report["meta"]["seed"] == 7

    def test_identical_seed_identical_bytes(self, run_command):
        first = run_command("sim", "charts", n=6, p="0.4", rounds=5000, seed=99)
        second = run_command("sim", "charts", n=6, p="0.4", rounds=5000, seed=99)
        assert first == second

    def test_csv_row_carries_rounds_and_seed(self, run_command):
        text = run_command("sim", "charts", n=5, p="0.5", rounds=2000, seed=41, format="csv")
        assert text.splitlines()[0] == "N,p,closed_form,lp_oracle,monte_carlo,sigma,rounds,seed"
        (row,) = read_csv(text)
        assert row["rounds"] == "2000"
        assert row["seed"] == "41"

    def test_zero_rounds_rejected(self, run_command):
        with pytest.raises(CommandError, match="^invalid_rounds"):
            run_command("sim", "charts", n=5, p="0.5", rounds=0)

    def test_output_file(self, run_command, tmp_path):
        target = tmp_path / "sim.json"
        printed = run_command("sim", "charts", n=4, p="0.3")
        run_command("sim", "charts", n=4, p="0.3", output=str(target))
        assert target.read_text() == printed


@pytest.mark.integration
class TestIneqCommand:
    def test_kcbs_bounds(self, run_json):
        report = run_json("ineq", "kcbs", n=5)
        assert report["classical_bound"] == 2
        assert report["quantum_bound"] == pytest.approx(math.sqrt(5), abs=1e-10)
        assert report["threshold"] == pytest.approx(0.723607, abs=1e-6)
        assert "value" not in report

    def test_kcbs_with_state(self, run_json):
        report = run_json("ineq", "kcbs", n=5, rho="qutrit-3")
        assert report["violated"] is True
        assert report["rho33"] == 1
        assert len(report["event_probabilities"]) == 5

    def test_chained_singlet_file(self, run_json, singlet_file):
        report = run_json("ineq", "chained", n=4, rho=str(singlet_file))
        assert report["magnitude"] == pytest.approx(2 * math.sqrt(2), abs=1e-10)
        assert report["gap"] == pytest.approx(1, abs=1e-10)
        assert report["threshold"] == 0.5
        assert report["violated_form"] == "flipped"
        assert report["gap_satisfied"] is True

    def test_chained_mixed_state(self, run_json):
        report = run_json("ineq", "chained", n=6, rho="mixed")
        assert report["value"] == pytest.approx(0, abs=1e-12)
        assert report["violated"] is False

    def test_parity_error(self, run_command):
        with pytest.raises(CommandError, match="^invalid_parity"):
            run_command("ineq", "kcbs", n=4)

    def test_exact_rejected(self, run_command):
        with pytest.raises(CommandError, match="^exact_unsupported"):
            run_command("ineq", "kcbs", n=5, exact=True)

    def test_malformed_state(self, run_command, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"dim": 2, "re": [[1, 0], [0, 1]]}')
        with pytest.raises(CommandError, match="^trace"):
            run_command("ineq", "chained", n=4, rho=str(path))

    def test_numeric_failure_is_a_command_error(self, run_command):
        with patch(
            "core.management.commands.ineq.chained_violation",
            side_effect=ArithmeticError("Jacobi did not converge in 100 sweeps"),
        ):
            with pytest.raises(CommandError, match="^numeric_failure: Jacobi"):
                run_command("ineq", "chained", n=4, rho="mixed")

    def test_missing_file(self, run_command, tmp_path):
        with pytest.raises(CommandError, match="^malformed"):
            run_command("ineq", "chained", n=4, rho=str(tmp_path / "none.json"))


@pytest.mark.integration
class TestCvCommand:
    def test_report(self, run_json):
        report = run_json("cv", n=4, M=8)
        assert report["value"] == pytest.approx(-((15 / 16) ** 2) * 2 * math.sqrt(2), abs=1e-9)
        assert report["limit"] == pytest.approx(2 * math.sqrt(2), abs=1e-10)
        assert report["classical_bound"] == 2
        assert report["violated"] is True
        assert report["crossover_M"] == 4

    def test_exact_rejected(self, run_command):
        with pytest.raises(CommandError, match="^exact_unsupported"):
            run_command("cv", n=4, M=2, exact=True)


@pytest.mark.integration
class TestReduceCommand:
    def test_matches_pr(self, run_json):
        report = run_json("reduce", n=3, exact=True)
        assert report["matches_pr"] is True
        assert report["ks_dimension"] == 5
        assert "thresholds" not in report

    def test_thresholds_for_even_n(self, run_json):
        report = run_json("reduce", n=4, exact=True)
        thresholds = report["thresholds"]
        assert thresholds["p_c"] == "1/3"
        assert thresholds["p_ns"] == "1/2"
        assert thresholds["value_at_p_c"] == "2/1"
        assert thresholds["p_q"] == pytest.approx(0.402369, abs=1e-6)

    def test_monte_carlo(self, run_json):
        report = run_json("reduce", n=2, rounds=40_000, seed=5)
        assert report["monte_carlo"]["rounds"] == 40_000
        assert report["monte_carlo"]["marginal_alice"] == pytest.approx(0.5, abs=0.02)

    def test_zero_rounds_rejected(self, run_command):
        with pytest.raises(CommandError, match="^invalid_rounds"):
            run_command("reduce", n=2, rounds=0)

    def test_chained_sampling(self, run_json):
        report = run_json("reduce", n=4, rounds=40_000, seed=5, chained_p=0.45)
        sampled = report["chained_monte_carlo"]
        assert sampled["expected"] == pytest.approx(3 * 0.8 + 1)
        assert abs(sampled["value"] - sampled["expected"]) < 5 * sampled["sigma"]


@pytest.mark.integration
class TestSweepCommand:
    def test_kcbs_threshold_rises(self, run_command):
        rows = read_csv(run_command("sweep", what="kcbs-threshold", n_max=51))
        ns = [int(r["n"]) for r in rows]
        values = [float(r["threshold"]) for r in rows]
        assert ns == list(range(5, 52, 2))
        assert all(a < b for a, b in zip(values, values[1:]))
        assert values[-1] < 1

    def test_chained_gap_rises(self, run_command):
        rows = read_csv(run_command("sweep", what="chained-gap", n_max=40))
        values = [float(r["gap_threshold"]) for r in rows]
        assert rows[0]["n"] == "4"
        assert values[0] == 0.5
        assert all(a < b for a, b in zip(values, values[1:]))
        assert values[-1] < 1

    def test_ks_thresholds(self, run_command):
        rows = read_csv(run_command("sweep", what="ks-thresholds", n_max=100))
        p_c = [float(r["p_c"]) for r in rows]
        p_q = [float(r["p_q"]) for r in rows]
        assert all(q > c for q, c in zip(p_q, p_c))
        assert all(a < b for a, b in zip(p_c, p_c[1:]))
        assert all(a < b for a, b in zip(p_q, p_q[1:]))
        assert max(p_q) < 0.5
        assert all(r["p_ns"] == "0.5" for r in rows)

    def test_ks_thresholds_exact(self, run_command):
        rows = read_csv(run_command("sweep", what="ks-thresholds", n_max=6, exact=True))
        assert [r["p_c"] for r in rows] == ["1/3", "2/5"]

    def test_optimal_sim_grid(self, run_command):
        rows = read_csv(run_command("sweep", what="optimal-sim", n_max=6, p_step="1/10"))
        assert len(rows) == 5 * 6
        assert all(r["closed_form"] == r["lp_oracle"] for r in rows)
        assert rows[0]["N"] == "2"

    def test_optimal_sim_header_and_seed(self, run_command):
        text = run_command(
            "sweep", what="optimal-sim", n_min=5, n_max=5, p_step="1/2", rounds=1000, seed=123
        )
        assert text.splitlines()[0] == "N,p,closed_form,lp_oracle,monte_carlo,rounds,seed"
        rows = read_csv(text)
        assert [r["p"] for r in rows] == ["0", "0.5"]
        assert all(r["rounds"] == "1000" and r["seed"] == "123" for r in rows)
        assert rows[1]["closed_form"] == "0.84"

    def test_every_sweep_echoes_seed(self, run_command):
        for what in ("kcbs-threshold", "chained-gap", "ks-thresholds"):
            rows = read_csv(run_command("sweep", what=what, n_max=10, seed=8))
            assert all(r["seed"] == "8" for r in rows)

    def test_unknown_sweep(self, run_command):
        with pytest.raises(CommandError):
            run_command("sweep", what="bogus")

    def test_empty_range(self, run_command):
        with pytest.raises(CommandError, match="^invalid_dimension"):
            run_command("sweep", what="kcbs-threshold", n_min=9, n_max=7)

    def test_exact_rejected_for_eigen_sweeps(self, run_command):
        with pytest.raises(CommandError, match="^exact_unsupported"):
            run_command("sweep", what="chained-gap", exact=True)


@pytest.mark.integration
@pytest.mark.django_db
class TestRunRecords:
    def test_record_success(self, run_command):
        run_command("box", "pr", n=2, seed=42, record=True)
        record = RunRecord.objects.get()
        assert record.command == "box"
        assert record.seed_value == 42
        assert record.succeeded is True
        assert record.arguments["kind"] == "pr"
        assert record.payload["n"] == 2

    def test_record_failure(self, run_command):
        with pytest.raises(CommandError):
            run_command("box", "ks", n=3, p="0.7", record=True)
        record = RunRecord.objects.get()
        assert record.succeeded is False
        assert record.payload["error"] == "invalid_marginal"

    def test_record_largest_seed(self, run_command):
        largest = 2**64 - 1
        run_command("box", "pr", n=2, seed=largest, record=True)
        record = RunRecord.objects.get()
        assert record.seed == str(largest)
        assert record.seed_value == largest

    def test_record_numeric_failure(self, run_command):
        with patch(
            "core.management.commands.cv.cv_report",
            side_effect=ArithmeticError("lattice value is not finite"),
        ):
            with pytest.raises(CommandError, match="^numeric_failure"):
                run_command("cv", M=2, record=True)
        record = RunRecord.objects.get()
        assert record.succeeded is False
        assert record.payload["error"] == "numeric_failure"

    def test_list_runs(self, run_command, stored_runs):
        text = run_command("runs")
        assert "Total: 3" in text
        assert "FAILED" in text

    def test_filter_and_clear(self, run_command, stored_runs):
        run_command("runs", command="box", clear=True)
        assert list(RunRecord.objects.values_list("command", flat=True)) == ["sweep"]
