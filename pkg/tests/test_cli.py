import json
import subprocess
import sys
from pathlib import Path

import pytest

from dgla_deform.cli import main
from dgla_deform.scenario import parse_text

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = sorted((ROOT / "scenarios").glob("*.json"))


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "dgla_deform.cli", *args], capture_output=True, cwd=ROOT)


def test_shipped_scenarios_present():
    assert len(SCENARIOS) >= 5


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
def test_exit_codes(path, capsys):
    code = main(["run", str(path)])
    out = capsys.readouterr()
    if path.stem == "circle_hypothesis":
        assert code == 2 and "HypothesisViolated" in out.err
    else:
        assert code == 0
        assert json.loads(out.out)["verdict"] == "pass"


def test_malformed_input(capsys):
    assert main(["run", str(ROOT / "scenarios" / "invalid" / "unknown_key.json")]) == 1
    err = capsys.readouterr().err
    assert "ParseError" in err and "line 2" in err


def test_window_override_too_small(capsys):
    assert main(["run", str(ROOT / "scenarios" / "pair_O_Om2.json"), "--window", "2"]) == 1
    assert "window 2 is below" in capsys.readouterr().err


def test_validate(capsys):
    assert main(["validate", str(ROOT / "scenarios" / "p1_line_bundle.json")]) == 0
    assert main(["validate", str(ROOT / "scenarios" / "invalid" / "unknown_key.json")]) == 1


def test_unknown_check_and_bad_json():
    from dgla_deform.errors import ParseError, UnknownCheck
    base = '{"schema": 1, "name": "x", "cover": {"type": "P1"}, "sheaves": {"E": {"line_bundles": [0]}}, '
    with pytest.raises(UnknownCheck):
        parse_text(base + '"checks": [{"check": "nope"}]}')
    with pytest.raises(ParseError):
        parse_text(base + '"checks": [}')


def test_text_format(capsys):
    assert main(["run", str(ROOT / "scenarios" / "p1_line_bundle.json"), "--format", "text"]) == 0
    assert "[PASS] cohomology" in capsys.readouterr().out


def test_runs_are_byte_identical_across_processes():
    path = str(ROOT / "scenarios" / "pair_O1_one_section.json")
    a, b = run_cli("run", path), run_cli("run", path)
    assert a.returncode == 0 and a.stdout == b.stdout


def test_selftest(capsys):
    assert main(["selftest", "--seed", "3"]) == 0
    assert capsys.readouterr().out.count("PASS") == 4
