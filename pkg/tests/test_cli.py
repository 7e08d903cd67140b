import csv
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest

from priorstab import DecisionProblem, Prior, expected_utility
from priorstab.cli import main

from conftest import (
    PLANTED_WEIGHTS_CSV,
    PORTFOLIO_ACTS,
    PORTFOLIO_UTILITIES,
    REGIME_STATES,
    build_planted_panel,
    planted_monthly_csv,
)

TOY_UTILITIES = "act,s1,s2\na,1.0,0.0\nb,0.0,1.0\n"
TOY_PRIORS = "prior,s1,s2\nref,0.7,0.3\n"


@pytest.fixture(scope="module")
def schema():
    resource = resources.files("priorstab").joinpath("data", "report.schema.json")
    with resource.open("r", encoding="utf-8") as fh:
        return json.load(fh)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_tidy(path):
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows[(row["prior"], row["act"], row["measure"])] = row["value"]
    return rows


def portfolio_csv():
    lines = ["act," + ",".join(REGIME_STATES)]
    for act, row in zip(PORTFOLIO_ACTS, PORTFOLIO_UTILITIES):
        lines.append(act + "," + ",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


class TestAnalyze:
    def test_toy_report(self, tmp_path, schema):
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", TOY_PRIORS)
        assert main(["analyze", "--utilities", u, "--priors", p, "--out", str(tmp_path)]) == 0
        rows = read_tidy(tmp_path / "stability.csv")
        assert abs(float(rows[("ref", "a", "rob")]) - 0.2) <= 2e-6
        assert float(rows[("ref", "b", "con")]) == pytest.approx(0.2, abs=1e-9)
        assert rows[("ref", "b", "rob")] == "NOT_BAYES"
        assert rows[("ref", "a", "is_bayes")] == "1"
        assert rows[("ref", "b", "is_bayes")] == "0"
        report = json.loads((tmp_path / "stability.json").read_text())
        jsonschema.validate(report, schema)
        assert report["rows"][1]["rob"] == "NOT_BAYES"

    def test_portfolio_with_packaged_priors(self, tmp_path, schema):
        u = write(tmp_path, "u.csv", portfolio_csv())
        assert main(["analyze", "--utilities", u, "--out", str(tmp_path)]) == 0
        rows = read_tidy(tmp_path / "stability.csv")
        for act in PORTFOLIO_ACTS:
            assert rows[("uniform", act, "is_bayes")] == ("1" if act == "multi_asset" else "0")
        report = json.loads((tmp_path / "stability.json").read_text())
        jsonschema.validate(report, schema)
        assert len(report["rows"]) == 48

    def test_inadmissible_act_certificate_in_report(self, tmp_path, schema):
        u = write(tmp_path, "u.csv", "act,s1,s2\nmid,0.4,0.4\nup,1.0,0.0\ndown,0.0,1.0\n")
        p = write(tmp_path, "p.csv", "prior,s1,s2\nhalf,0.5,0.5\n")
        assert main(["analyze", "--utilities", u, "--priors", p, "--out", str(tmp_path)]) == 0
        rows = read_tidy(tmp_path / "stability.csv")
        assert rows[("half", "mid", "con")] == "INADMISSIBLE"
        report = json.loads((tmp_path / "stability.json").read_text())
        jsonschema.validate(report, schema)
        cert = report["rows"][0]["certificate"]
        assert cert is not None
        assert cert["weights"]["up"] == pytest.approx(0.5, abs=1e-9)

    def test_empty_priors_file_is_exit_2(self, tmp_path, capsys):
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", "prior,s1,s2\n")
        assert main(["analyze", "--utilities", u, "--priors", p, "--out", str(tmp_path)]) == 2
        assert "error" in capsys.readouterr().err

    def test_malformed_csv_is_exit_2_with_line(self, tmp_path, capsys):
        u = write(tmp_path, "u.csv", "act,s1,s2\na,1.0\n")
        p = write(tmp_path, "p.csv", TOY_PRIORS)
        assert main(["analyze", "--utilities", u, "--priors", p, "--out", str(tmp_path)]) == 2
        assert ":2:" in capsys.readouterr().err

    def test_state_mismatch_is_exit_3(self, tmp_path):
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", "prior,other1,other2\nref,0.7,0.3\n")
        assert main(["analyze", "--utilities", u, "--priors", p, "--out", str(tmp_path)]) == 3

    def test_bad_tolerance_is_exit_2(self, tmp_path):
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", TOY_PRIORS)
        assert main(["analyze", "--utilities", u, "--priors", p, "--tol", "0", "--out", str(tmp_path)]) == 2

    def test_prior_columns_may_be_permuted(self, tmp_path):
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", "prior,s2,s1\nref,0.3,0.7\n")
        assert main(["analyze", "--utilities", u, "--priors", p, "--out", str(tmp_path)]) == 0
        rows = read_tidy(tmp_path / "stability.csv")
        assert rows[("ref", "a", "is_bayes")] == "1"


class TestPath:
    def test_engineered_crossing(self, tmp_path, schema):
        # sole optimal act scores +1, sole runner-up scores -1; with costs
        # (1.0, 0.2) the lines cross at 2 / 0.8 = 2.5
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", TOY_PRIORS)
        c = write(tmp_path, "c.csv", "act,cost\na,1.0\nb,0.2\n")
        code = main(
            [
                "path", "--utilities", u, "--priors", p, "--costs", c,
                "--cost-mode", "file", "--out", str(tmp_path),
            ]
        )
        assert code == 0
        report = json.loads((tmp_path / "path.json").read_text())
        jsonschema.validate(report, schema)
        assert len(report["breakpoints"]) == 1
        assert abs(report["breakpoints"][0] - 2.5) <= 1e-9
        acts = {line["act"]: line for line in report["lines"]}
        assert acts["a"]["intercept"] == 1.0
        assert acts["b"]["intercept"] == -1.0
        with open(tmp_path / "path_breakpoints.csv") as fh:
            assert fh.read().splitlines()[0] == "lambda"

    def test_equal_costs_no_breakpoints(self, tmp_path):
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", TOY_PRIORS)
        c = write(tmp_path, "c.csv", "act,cost\na,0.5\nb,0.5\n")
        code = main(
            [
                "path", "--utilities", u, "--priors", p, "--costs", c,
                "--cost-mode", "file", "--out", str(tmp_path),
            ]
        )
        assert code == 0
        report = json.loads((tmp_path / "path.json").read_text())
        assert report["breakpoints"] == []
        assert {g["selected"] for g in report["grid"]} == {"a"}

    def test_grid_matches_lambda_count(self, tmp_path):
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", TOY_PRIORS)
        assert main(
            ["path", "--utilities", u, "--priors", p, "--lambda-max", "3",
             "--grid", "0.01", "--out", str(tmp_path)]
        ) == 0
        with open(tmp_path / "path_grid.csv") as fh:
            data_rows = fh.read().strip().splitlines()[1:]
        assert len(data_rows) == 301

    def test_nonpositive_lambda_max_is_exit_2(self, tmp_path):
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", TOY_PRIORS)
        assert main(
            ["path", "--utilities", u, "--priors", p, "--lambda-max", "-1", "--out", str(tmp_path)]
        ) == 2

    def test_cost_file_mismatch_is_exit_3(self, tmp_path):
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", TOY_PRIORS)
        c = write(tmp_path, "c.csv", "act,cost\na,1.0\nzz,0.2\n")
        assert main(
            ["path", "--utilities", u, "--priors", p, "--costs", c,
             "--cost-mode", "file", "--out", str(tmp_path)]
        ) == 3

    def test_unknown_prior_is_exit_2(self, tmp_path):
        u = write(tmp_path, "u.csv", TOY_UTILITIES)
        p = write(tmp_path, "p.csv", TOY_PRIORS)
        assert main(
            ["path", "--utilities", u, "--priors", p, "--prior", "nope", "--out", str(tmp_path)]
        ) == 2

    def test_portfolio_variance_path_structure(self, tmp_path, schema):
        u = write(tmp_path, "u.csv", portfolio_csv())
        code = main(
            ["path", "--utilities", u, "--prior", "uniform", "--cost-mode", "variance",
             "--out", str(tmp_path)]
        )
        assert code == 0
        report = json.loads((tmp_path / "path.json").read_text())
        jsonschema.validate(report, schema)
        breakpoints = report["breakpoints"]
        assert all(0.0 < b < 3.0 for b in breakpoints)
        assert all(a < b for a, b in zip(breakpoints, breakpoints[1:]))
        assert {line["act"] for line in report["lines"]} == set(PORTFOLIO_ACTS)
        # segments tile [0, 3] and agree with the per-lambda grid argmax
        assert report["segments"][0]["lo"] == 0.0
        assert report["segments"][-1]["hi"] == 3.0
        for earlier, later in zip(report["segments"], report["segments"][1:]):
            assert earlier["hi"] == later["lo"]
            assert earlier["act"] != later["act"]


class TestScenarios:
    def run_scenarios(self, tmp_path, outdir, seed="42", k="4"):
        panel = build_planted_panel()
        m = write(tmp_path, "monthly.csv", planted_monthly_csv(panel))
        w = write(tmp_path, "weights.csv", PLANTED_WEIGHTS_CSV)
        out = tmp_path / outdir
        out.mkdir(exist_ok=True)
        code = main(
            ["scenarios", "--monthly", m, "--weights", w, "--seed", seed, "--k", k,
             "--out", str(out)]
        )
        return code, out, panel

    def test_planted_structure_recovered(self, tmp_path):
        code, out, panel = self.run_scenarios(tmp_path, "run1")
        assert code == 0
        with open(out / "regimes.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 120
        agreement = np.mean(
            [r["label"] == name for r, name in zip(rows, panel["planted_names"])]
        )
        assert agreement >= 0.95

    def test_utilities_round_trip_identically(self, tmp_path):
        from priorstab import (
            PortfolioBook,
            ReturnPanel,
            kmeans_partition,
            label_regimes,
            monthly_features,
            portfolio_returns,
            utility_matrix,
        )
        from priorstab.io import load_utilities

        code, out, panel = self.run_scenarios(tmp_path, "run1")
        assert code == 0
        parsed = load_utilities(out / "utilities.csv")
        assert parsed.acts == ("all_market", "defensive_mix", "balanced")
        assert parsed.states == REGIME_STATES

        # rebuild the decision problem in-process; the written file must
        # parse back into exactly the same matrix, bit for bit
        panel_obj = ReturnPanel(
            panel["months"], panel["assets"], panel["returns"],
            volatility=panel["volatility"],
        )
        book = PortfolioBook(
            ("all_market", "defensive_mix", "balanced"),
            panel["assets"],
            [[1.0, 0.0, 0.0], [0.2, 0.7, 0.1], [0.4, 0.4, 0.2]],
        )
        features = monthly_features(panel_obj, "market")
        model = label_regimes(kmeans_partition(features, k=4, seed=42, months=panel_obj.months))
        expected = utility_matrix(portfolio_returns(panel_obj, book), model, book.names)
        assert parsed.states == expected.states
        assert np.array_equal(parsed.utilities, expected.utilities)

    def test_byte_identical_reruns(self, tmp_path):
        code1, out1, _ = self.run_scenarios(tmp_path, "run1")
        code2, out2, _ = self.run_scenarios(tmp_path, "run2")
        assert code1 == code2 == 0
        for name in ("regimes.csv", "utilities.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_k1_gives_overall_means(self, tmp_path):
        from priorstab.io import load_utilities

        code, out, panel = self.run_scenarios(tmp_path, "run1", k="1")
        assert code == 0
        problem = load_utilities(out / "utilities.csv")
        assert problem.states == ("regime_1",)
        port = panel["returns"] @ np.array([1.0, 0.0, 0.0])
        assert problem.utilities[0, 0] == pytest.approx(float(port.mean()), abs=1e-15)

    def test_missing_cells_exit_2_listing_months(self, tmp_path, capsys):
        text = (
            "date,market,bond_fund\n"
            "2020-01,0.01,0.02\n"
            "2020-02,,0.01\n"
            "2020-03,0.005,\n"
        )
        m = write(tmp_path, "monthly.csv", text)
        w = write(tmp_path, "weights.csv", "portfolio,market,bond_fund\nall,0.5,0.5\n")
        assert main(["scenarios", "--monthly", m, "--weights", w, "--out", str(tmp_path)]) == 2
        err = capsys.readouterr().err
        assert "2020-02" in err and "2020-03" in err

    def test_weights_asset_mismatch_exit_3(self, tmp_path):
        panel = build_planted_panel()
        m = write(tmp_path, "monthly.csv", planted_monthly_csv(panel))
        w = write(tmp_path, "weights.csv", "portfolio,unknown_asset\nall,1.0\n")
        assert main(["scenarios", "--monthly", m, "--weights", w, "--out", str(tmp_path)]) == 3

    def test_daily_volatility_route(self, tmp_path):
        # one month, ten trading days; volatility from the daily file
        monthly = "date,market\n2020-01,0.02\n2020-02,0.01\n"
        daily_lines = ["date,market"]
        rng = np.random.default_rng(9)
        for month in ("2020-01", "2020-02"):
            for day in range(1, 11):
                daily_lines.append(f"{month}-{day:02d},{rng.normal(0, 0.01)!r}")
        m = write(tmp_path, "monthly.csv", monthly)
        d = write(tmp_path, "daily.csv", "\n".join(daily_lines) + "\n")
        w = write(tmp_path, "weights.csv", "portfolio,market\nall,1.0\n")
        code = main(
            ["scenarios", "--monthly", m, "--weights", w, "--daily", d, "--k", "1",
             "--out", str(tmp_path)]
        )
        assert code == 0

    def test_daily_column_mismatch_exit_3(self, tmp_path):
        monthly = "date,market\n2020-01,0.02\n"
        daily = "date,other\n2020-01-02,0.01\n"
        m = write(tmp_path, "monthly.csv", monthly)
        d = write(tmp_path, "daily.csv", daily)
        w = write(tmp_path, "weights.csv", "portfolio,market\nall,1.0\n")
        assert main(
            ["scenarios", "--monthly", m, "--weights", w, "--daily", d, "--out", str(tmp_path)]
        ) == 3


class TestBaselines:
    def test_zero_radius_matches_expected_utility(self, tmp_path):
        u = write(tmp_path, "u.csv", portfolio_csv())
        code = main(
            ["baselines", "--utilities", u, "--prior", "uniform", "--epsilon", "0",
             "--out", str(tmp_path)]
        )
        assert code == 0
        rows = read_tidy(tmp_path / "baselines.csv")
        problem = DecisionProblem(PORTFOLIO_ACTS, REGIME_STATES, PORTFOLIO_UTILITIES)
        uniform = Prior("uniform", [0.25] * 4)
        for act in PORTFOLIO_ACTS:
            eu = expected_utility(problem, act, uniform)
            assert float(rows[("uniform", act, "gamma_min")]) == pytest.approx(eu, abs=1e-9)
            assert float(rows[("uniform", act, "gamma_max")]) == pytest.approx(eu, abs=1e-9)

    def test_full_trust_ranking_matches_expected_utility(self, tmp_path, capsys):
        u = write(tmp_path, "u.csv", portfolio_csv())
        code = main(
            ["baselines", "--utilities", u, "--prior", "uniform", "--mu", "1",
             "--out", str(tmp_path)]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "trust blend (mu=1) optimal: multi_asset" in out

    def test_zero_trust_ranking_is_maximin(self, tmp_path, capsys):
        u = write(tmp_path, "u.csv", portfolio_csv())
        code = main(
            ["baselines", "--utilities", u, "--prior", "uniform", "--mu", "0",
             "--out", str(tmp_path)]
        )
        assert code == 0
        rows = read_tidy(tmp_path / "baselines.csv")
        problem = DecisionProblem(PORTFOLIO_ACTS, REGIME_STATES, PORTFOLIO_UTILITIES)
        best = max(float(problem.row(a).min()) for a in PORTFOLIO_ACTS)
        winners = [
            a for a in PORTFOLIO_ACTS if float(problem.row(a).min()) >= best - 1e-12
        ]
        out = capsys.readouterr().out
        assert f"trust blend (mu=0) optimal: {', '.join(winners)}" in out

    def test_out_of_range_parameters_exit_2(self, tmp_path):
        u = write(tmp_path, "u.csv", portfolio_csv())
        for flag, value in (("--epsilon", "1.5"), ("--eta", "-0.1"), ("--mu", "2")):
            assert main(
                ["baselines", "--utilities", u, "--prior", "uniform", flag, value,
                 "--out", str(tmp_path)]
            ) == 2


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        u = tmp_path / "u.csv"
        u.write_text(TOY_UTILITIES)
        p = tmp_path / "p.csv"
        p.write_text(TOY_PRIORS)
        proc = subprocess.run(
            [sys.executable, "-m", "priorstab", "analyze", "--utilities", str(u),
             "--priors", str(p), "--out", str(tmp_path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "optimal a" in proc.stdout

    def test_no_command_is_exit_2(self):
        assert main([]) == 2
