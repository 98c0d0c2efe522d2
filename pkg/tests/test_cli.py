"""Command line interface tests, driven through main(argv)."""

import json

import pytest

from multibias.cli import main, parse_bias_string
from multibias.errors import ParseError

HIV = "confounding + selection(general, increased_risk)"
LEUK = "confounding + misclassification(exposure, rare_outcome)"


def _evalue_cells(out: str) -> list[str]:
    line = next(l for l in out.splitlines() if l.startswith("Multi-bias e-values"))
    return line.removeprefix("Multi-bias e-values").split()


class TestParseBiasString:
    def test_full_clause_string(self):
        bs = parse_bias_string(
            "confounding + selection(general, increased_risk)"
            " + misclassification(exposure, rare_outcome)"
        )
        assert bs.label == (
            "confounding + selection(general, increased_risk)"
            " + misclassification(exposure, rare_outcome)"
        )

    def test_bare_names_allowed(self):
        assert parse_bias_string("selection").parameter_names() == (
            "RRUsYA1",
            "RRSUsA1",
            "RRUsYA0",
            "RRSUsA0",
        )

    def test_declaration_order_preserved(self):
        bs = parse_bias_string("misclassification(outcome) + selection")
        assert bs.parameter_names()[-1] == "RRAYy"
        bs = parse_bias_string("selection + misclassification(outcome)")
        assert bs.parameter_names()[-1] == "RRAYyS"

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "confounding(extra)",
            "selection(fast)",
            "selection(general, selected)",
            "selection(increased_risk, decreased_risk)",
            "misclassification",
            "misclassification(outcome, exposure)",
            "misclassification(dose)",
            "gravity",
            "confounding + selection(general",
            "confounding ++ selection",
        ],
    )
    def test_rejects_malformed(self, text):
        with pytest.raises(ParseError):
            parse_bias_string(text)


class TestBoundCommand:
    def test_hiv_bound_text(self, capsys):
        rc = main(
            [
                "bound",
                "--biases",
                HIV,
                "--param",
                "RRAUc=2.3",
                "--param",
                "RRUcY=2.5",
                "--param",
                "RRUsYA1=3",
                "--param",
                "RRSUsA1=2",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        assert captured.out.strip() == "2.269737"

    def test_json_format(self, capsys):
        rc = main(
            [
                "bound",
                "--biases",
                "confounding",
                "--param",
                "RRAUc=2",
                "--param",
                "RRUcY=2",
                "--format",
                "json",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        payload = json.loads(captured.out)
        assert payload["schema_version"] == 1
        assert payload["bound"] == pytest.approx(4 / 3)
        assert payload["parameters"] == {"RRAUc": 2.0, "RRUcY": 2.0}

    def test_missing_parameter_exits_2_and_names_it(self, capsys):
        rc = main(
            [
                "bound",
                "--biases",
                HIV,
                "--param",
                "RRAUc=2.3",
                "--param",
                "RRUcY=2.5",
                "--param",
                "RRUsYA1=3",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 2
        assert "RRSUsA1" in captured.err
        assert "RRAUc, RRUcY, RRUsYA1, RRSUsA1" in captured.err

    def test_bad_bias_string_exits_2(self, capsys):
        rc = main(["bound", "--biases", "confounding + confound(", "--param", "x=1"])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_number_exits_2(self, capsys):
        rc = main(["bound", "--biases", "confounding", "--param", "RRAUc=two"])
        assert rc == 2
        assert "not a number" in capsys.readouterr().err

    def test_value_below_one_exits_2(self, capsys):
        rc = main(
            [
                "bound",
                "--biases",
                "confounding",
                "--param",
                "RRAUc=0.5",
                "--param",
                "RRUcY=2",
            ]
        )
        assert rc == 2
        assert "at least 1" in capsys.readouterr().err


class TestEvalueCommand:
    def test_hiv_output(self, capsys):
        rc = main(
            [
                "evalue",
                "--biases",
                HIV,
                "--est",
                "6.75",
                "--measure",
                "OR",
                "--rare",
                "--lo",
                "2.79",
                "--hi",
                "16.31",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        assert "4.635703" in captured.out
        assert "2.728474" in captured.out
        assert "NA" in captured.out
        assert "RRAUc, RRUcY, RRUsYA1, RRSUsA1" in captured.out
        assert "non-null" not in captured.out

    def test_nonnull_notice_and_values(self, capsys):
        rc = main(
            [
                "evalue",
                "--biases",
                HIV,
                "--est",
                "6.75",
                "--measure",
                "OR",
                "--rare",
                "--lo",
                "2.79",
                "--hi",
                "16.31",
                "--true",
                "2",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        cells = _evalue_cells(captured.out)
        assert float(cells[0]) == pytest.approx(3.077243, abs=1e-4)
        assert float(cells[1]) == pytest.approx(1.643623, abs=1e-4)
        assert cells[2] == "NA"
        assert 'calculating a "non-null" multi-bias E-value' in captured.out
        assert "true value of 2 rather than to the null value" in captured.out

    def test_protective_estimate_output(self, capsys):
        rc = main(
            [
                "evalue",
                "--biases",
                LEUK,
                "--est",
                "0.51",
                "--measure",
                "OR",
                "--rare",
                "--lo",
                "0.3",
                "--hi",
                "0.89",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        lines = [l for l in captured.out.splitlines() if l.startswith("RR ")]
        assert "0.51" in lines[0] and "0.89" in lines[0]
        cells = _evalue_cells(captured.out)
        assert float(cells[0]) == pytest.approx(1.351985, abs=1e-4)
        assert cells[1] == "NA"
        assert float(cells[2]) == pytest.approx(1.058404, abs=1e-4)
        assert "RRAUc, RRUcY, RRYAa" in captured.out

    def test_json_format(self, capsys):
        rc = main(
            [
                "evalue",
                "--biases",
                "confounding",
                "--est",
                "2.0",
                "--lo",
                "1.5",
                "--format",
                "json",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        payload = json.loads(captured.out)
        assert payload["schema_version"] == 1
        assert payload["evalue_point"] == pytest.approx(2 + 2**0.5, rel=1e-9)
        assert payload["evalue_hi"] is None

    def test_hazard_ratio_rejected(self, capsys):
        rc = main(["evalue", "--biases", "confounding", "--est", "2", "--measure", "HR"])
        captured = capsys.readouterr()
        assert rc == 2
        assert "hazard" in captured.err

    def test_plain_risk_ratio_default_measure(self, capsys):
        rc = main(["evalue", "--biases", "confounding", "--est", "10.73"])
        captured = capsys.readouterr()
        assert rc == 0
        assert "20.94777" in captured.out


class TestSummaryCommand:
    def test_hiv_summary_table(self, capsys):
        rc = main(["summary", "--biases", HIV])
        captured = capsys.readouterr()
        assert rc == 0
        lines = captured.out.splitlines()
        assert lines[0].split() == ["bias", "output", "argument"]
        assert lines[1].split() == ["1", "confounding", "RR_AUc", "RRAUc"]
        assert lines[4].split() == ["4", "selection", "RR_SUs|A=1", "RRSUsA1"]

    def test_latex_column(self, capsys):
        rc = main(["summary", "--biases", "confounding", "--latex"])
        captured = capsys.readouterr()
        assert rc == 0
        assert r"\mathrm{RR}_{AU_c}" in captured.out

    def test_selected_population_labels(self, capsys):
        rc = main(
            [
                "summary",
                "--biases",
                "confounding + selection(selected) + misclassification(exposure, rare_outcome)",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        assert "confounding and selection" in captured.out
        assert "OR_YA*|a,S" in captured.out
        assert "ORYAaS" in captured.out


class TestGridCommand:
    def test_text_output(self, capsys):
        rc = main(
            [
                "grid",
                "--biases",
                "confounding",
                "--vary",
                "RRAUc=2:3:0.5",
                "--vary",
                "RRUcY=2:3:0.5",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        assert "rows: RRAUc, columns: RRUcY" in captured.out
        assert "1.333333" in captured.out  # g(2, 2)
        assert "1.800000" in captured.out  # g(3, 3)

    def test_csv_output_parses(self, capsys):
        rc = main(
            [
                "grid",
                "--biases",
                HIV,
                "--vary",
                "RRAUc=1.25:3:0.25",
                "--vary",
                "RRUcY=1.25:3:0.25",
                "--param",
                "RRUsYA1=2",
                "--param",
                "RRSUsA1=2",
                "--format",
                "csv",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        lines = captured.out.strip().splitlines()
        assert len(lines) == 9
        header = lines[0].split(",")
        assert header[1] == "1.25" and header[-1] == "3.0"
        first = lines[1].split(",")
        # g(1.25, 1.25) * g(2, 2)
        assert float(first[1]) == pytest.approx(1.5625 / 1.5 * 4 / 3, rel=1e-9)

    def test_comma_list_values(self, capsys):
        rc = main(
            [
                "grid",
                "--biases",
                "confounding",
                "--vary",
                "RRAUc=2,4",
                "--vary",
                "RRUcY=8",
                "--format",
                "json",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        payload = json.loads(captured.out)
        assert payload["row_values"] == [2.0, 4.0]
        assert payload["col_values"] == [8.0]
        assert payload["values"][1][0] == pytest.approx(32 / 11, rel=1e-9)

    def test_requires_two_vary_flags(self, capsys):
        rc = main(["grid", "--biases", "confounding", "--vary", "RRAUc=2:3:0.5"])
        assert rc == 2
        assert "two" in capsys.readouterr().err

    def test_rejects_bad_range(self, capsys):
        rc = main(
            [
                "grid",
                "--biases",
                "confounding",
                "--vary",
                "RRAUc=3:2:0.5",
                "--vary",
                "RRUcY=2:3:0.5",
            ]
        )
        assert rc == 2


class TestCurveCommand:
    def test_text_and_values(self, capsys):
        rc = main(
            [
                "curve",
                "--bias-sets",
                "confounding, confounding + selection(general)",
                "--rr-min",
                "1",
                "--rr-max",
                "4",
                "--points",
                "4",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        lines = captured.out.strip().splitlines()
        assert len(lines) == 9  # header + 2 sets x 4 points
        assert "confounding + selection(general)" in captured.out

    def test_json_points(self, capsys):
        rc = main(
            [
                "curve",
                "--bias-sets",
                "confounding",
                "--rr-min",
                "1",
                "--rr-max",
                "3",
                "--points",
                "3",
                "--format",
                "json",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        payload = json.loads(captured.out)
        assert payload["schema_version"] == 1
        assert [p["rr"] for p in payload["points"]] == [1.0, 2.0, 3.0]
        assert payload["points"][0]["evalue"] == 1.0
        assert payload["points"][2]["evalue"] == pytest.approx(3 + 6**0.5, rel=1e-9)

    def test_csv(self, capsys):
        rc = main(
            [
                "curve",
                "--bias-sets",
                "confounding",
                "--points",
                "2",
                "--rr-max",
                "2",
                "--format",
                "csv",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        lines = captured.out.strip().splitlines()
        assert lines[0] == "rr,biases,evalue"
        assert len(lines) == 3

    def test_bad_range_rejected(self, capsys):
        rc = main(["curve", "--bias-sets", "confounding", "--rr-min", "5", "--rr-max", "2"])
        assert rc == 2


class TestVerifyCommand:
    def test_streams_one_json_line_per_world(self, capsys):
        rc = main(["verify", "--structure", "result1", "--worlds", "3", "--seed", "11"])
        captured = capsys.readouterr()
        assert rc == 0
        lines = captured.out.strip().splitlines()
        assert len(lines) == 3
        for i, line in enumerate(lines):
            record = json.loads(line)
            assert set(record) == {
                "seed",
                "structure",
                "ratio",
                "bound",
                "slack",
                "prevalence",
            }
            assert record["seed"] == 11 + i
            assert record["structure"] == "result1"
            assert record["ratio"] <= record["bound"] + 1e-12

    def test_deterministic(self, capsys):
        main(["verify", "--structure", "selection", "--worlds", "5"])
        first = capsys.readouterr().out
        main(["verify", "--structure", "selection", "--worlds", "5"])
        assert capsys.readouterr().out == first

    def test_zero_worlds_is_empty_success(self, capsys):
        rc = main(["verify", "--structure", "confounding", "--worlds", "0"])
        captured = capsys.readouterr()
        assert rc == 0
        assert captured.out == ""

    def test_rare_ceiling_override(self, capsys):
        rc = main(
            [
                "verify",
                "--structure",
                "result2",
                "--worlds",
                "2",
                "--rare-ceiling",
                "0.001",
            ]
        )
        captured = capsys.readouterr()
        assert rc == 0
        for line in captured.out.strip().splitlines():
            assert json.loads(line)["prevalence"] <= 0.001

    def test_unknown_structure_rejected(self, capsys):
        rc = main(["verify", "--structure", "result9"])
        assert rc == 2


class TestTopLevel:
    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "bound" in capsys.readouterr().out

    def test_no_command_exits_2(self, capsys):
        assert main([]) == 2

    def test_unknown_command_exits_2(self, capsys):
        assert main(["frobnicate"]) == 2
