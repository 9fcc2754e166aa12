import json
import math

import pytest

from heatlab.cli import main
from heatlab._io import fmt


@pytest.fixture
def interval_spec(tmp_path):
    path = tmp_path / "interval.json"
    path.write_text(json.dumps({"type": "interval", "a": 0.0, "b": math.pi}))
    return str(path)


@pytest.fixture
def warped_spec(tmp_path):
    doc = {
        "type": "warped_product",
        "base": {"type": "interval", "a": 0.0, "b": 1.0},
        "f": {"op": "mul", "args": [{"const": 0.2}, {"var": "x"},
                                    {"op": "add",
                                     "args": [{"const": 1.0},
                                              {"op": "mul",
                                               "args": [{"const": -1.0},
                                                        {"var": "x"}]}]}]},
        "fiber": {"type": "circle", "radius": 1.0},
    }
    path = tmp_path / "warped.json"
    path.write_text(json.dumps(doc))
    return str(path)


class TestSpectrumCommand:
    def test_interval_count(self, interval_spec, tmp_path, capsys):
        out = tmp_path / "spec.csv"
        code = main(["spectrum", "--spec", interval_spec, "--count", "10",
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "index,eigenvalue,multiplicity,sector_mu,convention"
        values = [float(line.split(",")[1]) for line in lines[1:]]
        assert values == [float((k + 1) ** 2) for k in range(10)]

    def test_byte_identical_reruns(self, warped_spec, tmp_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        for out in (out1, out2):
            assert main(["spectrum", "--spec", warped_spec, "--cutoff", "40",
                         "--out", str(out)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_json_format(self, interval_spec, capsys):
        assert main(["spectrum", "--spec", interval_spec, "--cutoff", "5",
                     "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["eigenvalues"][0]["eigenvalue"] == 1.0

    def test_count_rejected_for_nonintervals(self, warped_spec, capsys):
        assert main(["spectrum", "--spec", warped_spec, "--count", "3"]) == 2

    def test_missing_cutoff(self, interval_spec):
        assert main(["spectrum", "--spec", interval_spec]) == 2

    def test_malformed_spec_no_partial_output(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"type": "interval", "a": 2.0, "b": 1.0}')
        out = tmp_path / "never.csv"
        code = main(["spectrum", "--spec", str(bad), "--cutoff", "5",
                     "--out", str(out)])
        assert code == 1
        assert not out.exists()


class TestHeatCommands:
    def test_heat_content_schema(self, interval_spec, tmp_path):
        out = tmp_path / "content.csv"
        code = main(["heat-content", "--spec", interval_spec,
                     "--tmin", "0.5", "--tmax", "1.0", "--tpoints", "10",
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "t,value,tail_bound,kind"
        assert lines[1].endswith(",content")
        first = float(lines[-1].split(",")[1])
        assert first == pytest.approx(0.9368322222222481, abs=1e-9)

    def test_heat_trace(self, interval_spec, capsys):
        code = main(["heat-trace", "--spec", interval_spec,
                     "--tmin", "1.0", "--tmax", "4.0", "--tpoints", "5"])
        assert code == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "t,value,tail_bound,kind"
        assert lines[1].endswith(",trace")

    def test_bad_window(self, interval_spec):
        assert main(["heat-trace", "--spec", interval_spec,
                     "--tmin", "2.0", "--tmax", "1.0"]) == 2


class TestInvariantsAndFit:
    def test_invariants(self, warped_spec, capsys):
        assert main(["invariants", "--spec", warped_spec]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["dim"] == 2
        assert doc["content_coefficients"][0] == pytest.approx(
            doc["volume"], rel=1e-12)

    def test_fit_content(self, interval_spec, capsys):
        assert main(["fit", "--kind", "content", "--spec", interval_spec]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["coefficients_fitted"][0] == pytest.approx(math.pi, abs=1e-8)
        assert all(doc["pass_per_order"])

    def test_fit_trace(self, interval_spec, capsys):
        assert main(["fit", "--kind", "trace", "--spec", interval_spec]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["coefficients_fitted"][1] == pytest.approx(-0.5, abs=1e-8)


class TestVerifyCommand:
    def test_cover_suite_report(self, tmp_path):
        out = tmp_path / "report.json"
        code = main(["verify", "cover", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["verdict"] == "pass"
        assert any("trace gap" in c["name"] for c in doc["checks"])

    def test_unknown_suite_rejected(self):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "nonsense"])
        assert exc.value.code == 2

    def test_config_kwargs(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"sheets": 3}))
        out = tmp_path / "r.json"
        assert main(["verify", "cover", "--config", str(cfg),
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["inputs"]["sheets"] == 3

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus_key": 1}))
        assert main(["verify", "cover", "--config", str(cfg)]) == 2


class TestFloatFormatting:
    def test_17_significant_digits(self):
        assert fmt(math.pi) == "3.1415926535897931"
        assert fmt(1.0) == "1"
        assert fmt(0.1) == "0.10000000000000001"
        assert float(fmt(2.0 / 3.0)) == 2.0 / 3.0


class TestHelp:
    @pytest.mark.parametrize("argv", [
        ["--help"],
        ["spectrum", "--help"],
        ["verify", "--help"],
        ["fit", "--help"],
    ])
    def test_help_exits_zero(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 0
        assert "--" in capsys.readouterr().out


class TestNumericValidation:
    def test_negative_cutoff_rejected(self, interval_spec):
        assert main(["spectrum", "--spec", interval_spec,
                     "--cutoff", "-5"]) == 2

    def test_negative_count_rejected(self, interval_spec):
        assert main(["spectrum", "--spec", interval_spec,
                     "--count", "-3"]) == 2

    def test_heat_negative_cutoff_rejected(self, interval_spec):
        assert main(["heat-trace", "--spec", interval_spec,
                     "--cutoff", "-1", "--tmin", "0.5", "--tmax", "1"]) == 2
