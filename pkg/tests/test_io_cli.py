import json
import subprocess
import sys

import pytest

from conftest import FIXTURES, GOLDEN
from vecdual.cli import main, run
from vecdual.io import (InputError, emit_instance, emit_report, instance_from_dict, parse_grid, parse_instance,
                        parse_report)

ALL_FIXTURES = sorted(p.name for p in FIXTURES.glob("*.json") if p.name != "bad_slopes.json")


def cli(capsysbinary, *argv):
    code = main(list(argv))
    out = capsysbinary.readouterr()
    return code, out.out, out.err.decode()


def test_minimal_quadratic_instance_is_generic():
    inst = parse_instance(FIXTURES / "quadratic_minimal.json")
    assert inst.scheme == "generic" and inst.space.atom_count == 1


def test_fenchel_fixture_parses_with_feasibility():
    inst = parse_instance(FIXTURES / "fenchel.json")
    assert inst.scheme == "fenchel" and inst.space.atom_count == 2
    assert inst.perturbation is not None or inst.f is not None


def test_bad_slopes_rejected():
    with pytest.raises(InputError, match="convexity violated at breakpoint 1"):
        parse_instance(FIXTURES / "bad_slopes.json")


def test_malformed_json_reports_position(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"space": {"weights": [1]},\n "functions": {]}')
    with pytest.raises(InputError, match="line 2"):
        parse_instance(p)


def test_unknown_reference_is_field_precise():
    raw = json.loads((FIXTURES / "fenchel.json").read_text())
    raw["g"] = "missing"
    with pytest.raises(InputError, match="missing"):
        instance_from_dict(raw)


@pytest.mark.parametrize("name", ALL_FIXTURES)
def test_instance_round_trip(name, tmp_path):
    inst = parse_instance(FIXTURES / name)
    p = tmp_path / name
    p.write_bytes(emit_instance(inst))
    assert parse_instance(p) == inst


def test_parse_grid_forms():
    assert [float(g[0]) for g in parse_grid("0:1:3")] == [0.0, 0.5, 1.0]
    assert [float(g[0]) for g in parse_grid("0,1,2")] == [0.0, 1.0, 2.0]
    assert [list(g) for g in parse_grid("1,0;0,1")] == [[1.0, 0.0], [0.0, 1.0]]
    with pytest.raises(InputError):
        parse_grid("a:b")


def test_solve_fenchel_fixture():
    report, code = run(parse_instance(FIXTURES / "fenchel.json"), "solve")
    assert code == 0
    assert report["results"]["gap"] == [0.0, 0.0]
    assert report["results"]["dual_solution"] == [[-1.0], [-1.0]]


def test_probe_failure_fixture():
    report, code = run(parse_instance(FIXTURES / "regularity_failure.json"), "probe-regularity")
    assert code == 1 and report["results"]["verdict"] == "failed"


def test_wrong_certificate_exit_code(capsysbinary):
    code, out, _ = cli(capsysbinary, "--instance", str(FIXTURES / "fenchel_wrong_certificate.json"),
                       "--command", "check-optimality", "--format", "text")
    assert code == 1
    text = out.decode()
    assert "residual" in text and "FAIL" in text


def test_input_error_exit_code(capsysbinary, tmp_path):
    code, _, err = cli(capsysbinary, "--instance", str(FIXTURES / "bad_slopes.json"), "--command", "solve")
    assert code == 2 and "convexity violated at breakpoint 1" in err
    code, _, err = cli(capsysbinary, "--instance", str(tmp_path / "absent.json"), "--command", "solve")
    assert code == 2
    code, _, _ = cli(capsysbinary, "--instance", str(FIXTURES / "fenchel.json"), "--command", "nonsense")
    assert code == 2


def test_text_report_has_gap_rows(capsysbinary):
    code, out, _ = cli(capsysbinary, "--instance", str(FIXTURES / "fenchel.json"), "--command", "solve",
                       "--format", "text")
    assert code == 0
    gap_line = next(line for line in out.decode().splitlines() if line.strip().startswith("gap"))
    assert gap_line.split()[1:] == ["0", "0"]


def test_fenchel_report_matches_golden(capsysbinary):
    code, out, _ = cli(capsysbinary, "--instance", str(FIXTURES / "fenchel.json"), "--command", "solve")
    assert code == 0 and out == (GOLDEN / "fenchel__solve.json").read_bytes()


def test_report_round_trip():
    report, _ = run(parse_instance(FIXTURES / "regularity_failure.json"), "probe-regularity")
    data = emit_report(report)
    assert emit_report(parse_report(data)) == data


def test_empty_report_keeps_digest():
    data = emit_report({"digest": "abc", "results": {}})
    back = parse_report(data)
    assert back == {"digest": "abc", "results": {}}


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "vecdual.cli", "--instance", str(FIXTURES / "fl_example.json"),
                           "--command", "solve"], capture_output=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["dual_solution"] == [[1.0]]


def test_infeasible_instance_rejected_at_parse():
    raw = {
        "space": {"weights": [1, 1]},
        "scheme": "fenchel",
        "functions": {
            "unit": {"type": "indicator-box", "lower": [0], "upper": [1]},
            "far": {"type": "indicator-box", "lower": [5], "upper": [6]},
        },
        "f": "unit",
        "g": ["unit", "far"],
        "operator": [[1]],
    }
    with pytest.raises(InputError, match="atom 1"):
        instance_from_dict(raw)
