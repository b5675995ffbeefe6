import json
import subprocess
import sys
from pathlib import Path

import pytest

from regmodels.cli import emit_dot, main, parse_input
from regmodels.cover import validate_normalize

INPUTS = Path(__file__).resolve().parent.parent / "inputs"


def _write(tmp_path, obj, name="in.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_input_quintic():
    src = {"p": 3, "d": 5, "pi_exponent": 0, "factors": [[[-1, 1], 2], [[-9, 0, 0, 1], 1]]}
    s = validate_normalize(parse_input(src))
    assert s.describe() == "z^5 = (t - 1)^2 * (t^3 - 9)  over Q_3"


def test_parse_input_accepts_fraction_strings():
    src = {"p": 7, "d": 2, "factors": [{"coeffs": ["-1/2", 1], "exp": 1}, [[-2, 1], 1], [[-7, 0, 1], 1]]}
    assert str(parse_input(src).factors[0][0]) == "t - 1/2"


@pytest.mark.parametrize(
    "src",
    [
        "not json",
        {"d": 2, "factors": [[[0, 1], 1]]},
        {"p": 3, "d": "2", "factors": [[[0, 1], 1]]},
        {"p": 3, "d": 2, "factors": []},
        {"p": 3, "d": 2, "factors": [[[0, 1]]]},
    ],
)
def test_malformed_input_exits_2(tmp_path, capsys, src):
    code, out, err = _run(capsys, "check", "--input", _write(tmp_path, src))
    assert code == 2 and out == "" and "error" in err


def test_exit_codes(tmp_path, capsys):
    assert _run(capsys, "check", "--input", str(INPUTS / "quintic.json"))[0] == 0
    assert _run(capsys, "check", "--input", str(INPUTS / "bad_p_divides_d.json"))[0] == 2
    ext = {"p": 3, "d": 2, "factors": [[[1, 0, 1], 1], [[-1, 1], 1], [[0, 1], 1]]}
    assert _run(capsys, "check", "--input", _write(tmp_path, ext))[0] == 3
    # a rational cover: several minimal models, so minimization reports an invariant
    split = {"p": 5, "d": 4, "pi_exponent": 2, "factors": [[[-1, 1], 2], [[-2, 1], 2]]}
    code, _, err = _run(capsys, "vmin", "--input", _write(tmp_path, split))
    assert code == 4 and "StructureViolation" in err
    assert _run(capsys, "bogus", "--input", "x")[0] == 2
    assert _run(capsys, "vreg", "--input", str(INPUTS / "elliptic.json"), "--format", "dot")[0] == 2


def test_check_succeeds_exactly_when_later_stages_run(tmp_path, capsys):
    for path in sorted(INPUTS.glob("*.json")):
        check = _run(capsys, "check", "--input", str(path))[0]
        full = _run(capsys, "graph", "--input", str(path))[0]
        assert (check == 0) == (full == 0)


def test_vmin_text_reports(capsys):
    code, out, _ = _run(capsys, "vmin", "--input", str(INPUTS / "quintic.json"))
    assert code == 0
    assert "case 3(i)" in out
    assert "[v0, v1(t) = 2/3, v2(t^3 - 9) = 25/12]" in out
    code, out, _ = _run(capsys, "vmin", "--input", str(INPUTS / "octic.json"))
    assert "case 3(iii)" in out and "[v0, v1(t) = 1/2, v2(t^2 - 3) = 5/4]" in out


@pytest.mark.parametrize("cmd", ["valuations", "vreg", "vmin", "fiber", "graph"])
def test_json_output_is_valid(capsys, cmd):
    code, out, _ = _run(capsys, cmd, "--input", str(INPUTS / "quintic.json"), "--format", "json", "--dump-stages")
    assert code == 0
    assert json.loads(out)["command"] == cmd


def _nodes_edges(dot):
    lines = dot.splitlines()
    nodes = [l for l in lines if "[label=" in l and "--" not in l]
    edges = [l for l in lines if "--" in l]
    return len(nodes), len(edges)


@pytest.mark.parametrize(
    "name, base, want",
    [("quintic", "vreg", (9, 8)), ("elliptic", "vmin", (1, 1)), ("octic", "vmin", (2, 1))],
)
def test_dot_counts(capsys, name, base, want):
    code, out, _ = _run(capsys, "graph", "--input", str(INPUTS / f"{name}.json"), "--base", base)
    assert code == 0 and out.startswith("graph fiber {")
    assert _nodes_edges(out) == want


def test_quintic_dot_labels(capsys):
    _, out, _ = _run(capsys, "graph", "--input", str(INPUTS / "quintic.json"), "--base", "vreg")
    assert '[v0] #0 | 1 | -8' in out
    assert '[v0, v1(t) = 2/3] #0 | 15 | -2' in out


def test_output_is_deterministic():
    cmd = [sys.executable, "-m", "regmodels.cli", "fiber", "--input", str(INPUTS / "quintic.json"), "--format", "json"]
    runs = {subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(3)}
    assert len(runs) == 1
