import json
import logging
import math
import re

import jsonschema
import pytest

from causal_friendliness import __version__
from causal_friendliness.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, run
from causal_friendliness.core.logging import JsonFormatter
from causal_friendliness.storage.reports import report_schema

from conftest import R, TSIRELSON


def _json(capsys, argv):
    code = run(argv + ["--json"])
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestSimulate:
    def test_bundled_optimal_spec(self, capsys):
        code, report = _json(capsys, ["simulate", "--spec", "paper_optimal"])
        assert code == EXIT_OK
        assert report["chsh"] == pytest.approx(TSIRELSON, abs=1e-9)
        assert report["correlators"] == pytest.approx({"E00": R, "E01": R, "E10": R, "E11": -R}, abs=1e-9)
        assert report["membership"]["verdict"] == "outside"
        assert report["signalling"]["past_to_future_ok"]
        assert report["assumptions"][0]["verdict"] == "pass"
        assert report["tool_version"] == __version__

    def test_default_spec_is_the_optimal_one(self, capsys):
        code, report = _json(capsys, ["simulate"])
        assert code == EXIT_OK
        assert report["chsh"] == pytest.approx(TSIRELSON, abs=1e-9)

    def test_commuting_spec(self, capsys):
        code, report = _json(capsys, ["simulate", "--spec", "commuting"])
        assert code == EXIT_OK
        assert report["chsh"] == pytest.approx(2.0, abs=1e-12)
        assert report["membership"]["verdict"] == "inside"

    def test_pure_input_signals_in_time(self, capsys):
        code, report = _json(capsys, ["simulate", "--spec", "pure_input"])
        assert code == EXIT_OK
        assert not report["signalling"]["past_to_future_ok"]
        assert report["signalling"]["past_to_future_deviation"] > 0.1

    def test_reverse_direction(self, capsys):
        code, report = _json(capsys, ["simulate", "--reverse"])
        assert code == EXIT_OK
        assert report["config"]["direction"] == "reverse"
        assert report["chsh"] == pytest.approx(TSIRELSON, abs=1e-9)

    def test_malformed_spec_names_the_line(self, tmp_path, capsys):
        path = tmp_path / "broken.spec"
        path.write_text("charlie = 0, 0, 1\nalice = sideways\n", encoding="utf-8")
        assert run(["simulate", "--spec", str(path)]) == EXIT_USAGE
        assert f"{path}:2:" in capsys.readouterr().err

    def test_text_output_uses_nine_digits(self, capsys):
        assert run(["simulate"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "S = 2.82842712\n" in out
        assert "0.707106781" in out

    def test_output_file_matches_stdout(self, tmp_path, capsys):
        target = tmp_path / "out" / "report.json"
        code, report = _json(capsys, ["simulate", "--output", str(target)])
        assert code == EXIT_OK
        assert json.loads(target.read_text(encoding="utf-8")) == report


class TestMembership:
    @pytest.mark.parametrize(
        "name, verdict, s",
        [("uniform", "inside", 0.0), ("quantum_optimal", "outside", 2 * math.sqrt(2)), ("pr_box", "outside", 4.0)],
    )
    def test_bundled_behaviors(self, capsys, name, verdict, s):
        code, report = _json(capsys, ["membership", "--behavior", name])
        assert code == EXIT_OK
        assert report["membership"]["verdict"] == verdict
        assert report["chsh"] == pytest.approx(s, abs=1e-9)
        if verdict == "outside":
            assert report["membership"]["facet"]["value"] == pytest.approx(s, abs=1e-6)

    def test_visibility_is_reported(self, capsys):
        _, report = _json(capsys, ["membership", "--behavior", "pr_box"])
        assert report["details"]["white_noise_visibility"] == pytest.approx(0.5, abs=1e-9)

    def test_behavior_is_required(self, capsys):
        assert run(["membership"]) == EXIT_USAGE
        assert "--behavior" in capsys.readouterr().err


class TestOtherCommands:
    def test_boxworld(self, capsys):
        code, report = _json(capsys, ["boxworld"])
        assert code == EXIT_OK
        assert report["chsh"] == 4.0
        assert report["membership"]["verdict"] == "outside"
        verdicts = {a["name"]: a["verdict"] for a in report["assumptions"]}
        assert verdicts["APE"] == "fail"
        assert verdicts["AOE"] == "pass"
        assert verdicts["ATOE"] == "pass"
        assert verdicts["NRC"] == "fail"
        assert verdicts["EOM + NRC => ATOE + APE"] == "vacuous"

    def test_lemmas(self, capsys):
        code, report = _json(capsys, ["lemmas", "--samples", "25", "--seed", "3"])
        assert code == EXIT_OK
        assert report["seed"] == 3
        rows = {row["campaign"]: row for row in report["details"]["campaigns"]}
        assert all(row["fail"] == 0 for row in rows.values())
        assert rows["SPE setting leak"]["vacuous"] == 25
        assert report["assumptions"][0]["verdict"] == "vacuous"
        assert report["assumptions"][0]["conclusion"]["verdict"] == "fail"

    def test_lemmas_replay_identically(self, capsys):
        run(["lemmas", "--samples", "10", "--seed", "4", "--json"])
        first = capsys.readouterr().out
        run(["lemmas", "--samples", "10", "--seed", "4", "--json"])
        assert capsys.readouterr().out == first

    def test_sweep(self, capsys):
        code, report = _json(capsys, ["sweep", "--grid", "16", "--refine", "5"])
        assert code == EXIT_OK
        assert report["chsh"] == pytest.approx(TSIRELSON, abs=1e-9)
        assert report["details"]["first_side_overlap"] < 1e-3

    def test_sweep_rejects_small_grid(self, capsys):
        assert run(["sweep", "--grid", "4"]) == EXIT_USAGE

    def test_wigner_demo(self, capsys):
        code, report = _json(capsys, ["wigner-demo"])
        assert code == EXIT_OK
        amplitudes = report["details"]["lab_amplitudes"]
        assert [a["basis"] for a in amplitudes] == ["|↑↑↑⟩", "|↓↓↓⟩"]
        assert all(a["re"] == pytest.approx(R, abs=1e-12) for a in amplitudes)
        assert report["details"]["probabilistic_mixture"] is True


class TestUsage:
    @pytest.mark.parametrize(
        "argv",
        [[], ["teleport"], ["simulate", "--grid", "3"], ["lemmas", "--samples", "-2"], ["boxworld", "--tol", "0"]],
    )
    def test_usage_errors_exit_one(self, capsys, argv):
        assert run(argv) == EXIT_USAGE
        assert capsys.readouterr().err

    def test_numerical_exit_code_is_distinct(self):
        assert EXIT_NUMERICAL == 2


COMMAND_ARGV = [
    ["simulate"],
    ["simulate", "--spec", "pure_input", "--reverse"],
    ["membership", "--behavior", "uniform"],
    ["membership", "--behavior", "quantum_optimal"],
    ["lemmas", "--samples", "5", "--seed", "1"],
    ["boxworld"],
    ["sweep", "--grid", "8", "--refine", "2"],
    ["wigner-demo"],
]

REAL = re.compile(r"(?<![\w.+-])-?\d+(?:\.\d+(?:e[+-]\d+)?|e[+-]\d+)(?![\w.])")


def _json_reals(node, out):
    if isinstance(node, bool) or node is None:
        return out
    if isinstance(node, (int, float)):
        out.add("{:.9g}".format(node))
    elif isinstance(node, dict):
        for v in node.values():
            _json_reals(v, out)
    elif isinstance(node, list):
        for v in node:
            _json_reals(v, out)
    return out


class TestReportFormats:
    @pytest.fixture(scope="class")
    def schema(self):
        return report_schema()

    def test_schema_command(self, capsys, schema):
        assert run(["schema"]) == EXIT_OK
        printed = json.loads(capsys.readouterr().out)
        assert printed == schema
        assert {"command", "tool_version", "assumptions"} <= set(printed["properties"])

    @pytest.mark.parametrize("argv", COMMAND_ARGV, ids=lambda a: " ".join(a))
    def test_json_output_matches_schema(self, capsys, schema, argv):
        code, report = _json(capsys, argv)
        assert code == EXIT_OK
        jsonschema.validate(report, schema)

    @pytest.mark.parametrize("argv", COMMAND_ARGV, ids=lambda a: " ".join(a))
    def test_text_and_json_carry_the_same_numbers(self, capsys, argv):
        assert run(argv) == EXIT_OK
        # first line carries the version string
        text = capsys.readouterr().out.split("\n", 1)[1]
        _, report = _json(capsys, argv)
        reals = _json_reals(report, set())
        shown = REAL.findall(text)
        assert shown
        missing = [token for token in shown if "{:.9g}".format(float(token)) not in reals]
        assert missing == []


def test_json_formatter_merges_extra_fields():
    record = logging.LogRecord("causal_friendliness.core.campaigns", logging.INFO, __file__, 1,
                               "%s done", ("lemma",), None)
    record.campaign = "lemma"
    payload = json.loads(JsonFormatter().format(record))
    assert payload["msg"] == "lemma done"
    assert payload["campaign"] == "lemma"
    assert payload["level"] == "INFO"
