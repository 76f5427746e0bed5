import csv
import io
import json
import math
from pathlib import Path

import pytest

from clonekit import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_multiphase_example(capsys):
    code, out, err = run(capsys, "multiphase", "--d", "2", "--probs", "0.5,0.5", "--n", "1", "--m", "2")
    assert code == 0
    assert out.splitlines()[0] == ",".join(cli.CSV_COLUMNS)
    (r,) = rows(out)
    assert float(r["F_econ"]) == pytest.approx(0.7285534, abs=1e-7)
    assert r["runtime_ms"] == ""
    echo = json.loads(err.splitlines()[0])
    assert echo["seed"] == 0 and echo["config"]["probs"] == "0.5,0.5"


def test_coherent_example(capsys):
    code, out, _ = run(capsys, "coherent", "--d", "2", "--n", "1", "--m", "2")
    (r,) = rows(out)
    assert code == 0 and float(r["F_econ"]) == pytest.approx(0.6666667, abs=1e-7)
    assert r["K"] == ""


def test_sweep_ratio_converges(capsys):
    code, out, _ = run(capsys, "sweep", "multiphase", "--d", "2", "--n", "1", "--m", "2:512:geometric", "--epsilon", "0.333")
    table = rows(out)
    assert code == 0 and [int(r["M"]) for r in table] == [2**k for k in range(1, 10)]
    ratios = [float(r["ratio"]) for r in table]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(1 / math.sqrt(2), rel=0.01)
    assert [int(r["K"]) for r in table][-1] == math.ceil(512**0.667)


def test_default_k_is_two_thirds_power(capsys):
    _, out, _ = run(capsys, "multiphase", "--n", "1", "--m", "27,64")
    assert [r["K"] for r in rows(out)] == ["9", "16"]


def test_clock_and_entangled(capsys):
    code, out, _ = run(capsys, "clock", "--spectrum", "0,1", "--probs", "0.5,0.5", "--n", "1", "--m", "2")
    assert code == 0 and float(rows(out)[0]["F_econ"]) == pytest.approx(0.7285533906, abs=1e-9)
    code, out, _ = run(capsys, "entangled", "--n", "1", "--m", "3", "--k", "2")
    (r,) = rows(out)
    assert code == 0 and r["K"] == "3" and float(r["F_econ"]) == 0.5


def test_entangled_parity_mismatch_leaves_blanks(capsys):
    _, out, _ = run(capsys, "entangled", "--n", "1", "--m", "2")
    (r,) = rows(out)
    assert r["F_econ"] == "" and r["F_naive"] == ""


def test_finite_from_file(capsys, tmp_path):
    path = tmp_path / "set.json"
    path.write_text(json.dumps({"dimension": 2, "states": [[1, 0], [0.5, math.sqrt(3) / 2]], "priors": [0.5, 0.5]}))
    code, out, _ = run(capsys, "finite", "--states", str(path), "--n", "1", "--m", "4")
    (r,) = rows(out)
    assert code == 0 and float(r["bound"]) == pytest.approx(1.0988, abs=1e-4)
    assert float(r["ratio"]) == pytest.approx(float(r["F_naive"]) / float(r["bound"]), rel=1e-9)


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"probs": [0.3, 0.7], "n": 1, "m": [2, 4]}))
    _, out, err = run(capsys, "multiphase", "--config", str(cfg), "--m", "3")
    assert [r["M"] for r in rows(out)] == ["3"]
    assert json.loads(err.splitlines()[0])["config"]["probs"] == [0.3, 0.7]


def test_rows_sorted_and_reproducible(capsys, tmp_path, monkeypatch):
    args = ["clock", "--spectrum", "0,1,3", "--n", "2,1", "--m", "8,4", "--k", "3,1"]
    monkeypatch.setenv("CLONEKIT_THREADS", "1")
    run(capsys, *args, "-o", str(tmp_path / "a.csv"))
    monkeypatch.setenv("CLONEKIT_THREADS", "4")
    run(capsys, *args, "-o", str(tmp_path / "b.csv"))
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    keys = [(int(r["N"]), int(r["M"]), int(r["K"])) for r in rows(a.decode())]
    assert keys == sorted(keys) and len(keys) == 8


def test_timing_fills_runtime(capsys):
    _, out, _ = run(capsys, "multiphase", "--n", "1", "--m", "2", "--timing")
    assert float(rows(out)[0]["runtime_ms"]) >= 0


def test_distance(capsys):
    code, out, _ = run(capsys, "distance", "--family", "multiphase", "--n", "1", "--m", "2")
    (r,) = rows(out)
    assert out.splitlines()[0] == ",".join(cli.DISTANCE_COLUMNS)
    assert code == 0 and r["satisfies_bound"] == "true"
    assert float(r["bound"]) == pytest.approx(0.58579, abs=1e-5)


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["multiphase", "--n", "1", "--m", "0:3"],
        ["multiphase", "--n", "1", "--m", "2", "--probs", "0.5,0.6"],
        ["multiphase", "--n", "1", "--m", "2", "--d", "3", "--probs", "0.5,0.5"],
        ["multiphase", "--n", "1"],
        ["clock", "--n", "1", "--m", "2"],
        ["finite", "--n", "1", "--m", "2", "--states", "/nonexistent.json"],
        ["multiphase", "--n", "1", "--m", "2:9:weird"],
        ["multiphase", "--n", "1", "--m", "2", "--config", "/nonexistent.json"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    assert cli.main(argv) == 2


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("CLONEKIT_THREADS", "many")
    assert cli.main(["multiphase", "--n", "1", "--m", "2"]) == 2


@pytest.mark.parametrize(
    "spec,expected",
    [
        ("5", [5]),
        ("3,1,3", [1, 3]),
        ("2:5", [2, 3, 4, 5]),
        ("1:9:linear:4", [1, 5, 9]),
        ("2:512:geometric", [2, 4, 8, 16, 32, 64, 128, 256, 512]),
        ("1:30:geometric:3", [1, 3, 9, 27]),
        ([4, 2], [2, 4]),
    ],
)
def test_parse_grid(spec, expected):
    assert cli.parse_grid(spec) == expected


def test_verify_exit_codes(capsys, monkeypatch):
    from clonekit import verify

    assert cli.main(["verify", "--module", "coherent"]) == 0
    monkeypatch.setattr(verify, "CHECKS", verify.CHECKS + [("coherent", "always fails", lambda seed: (False, "forced"))])
    assert cli.main(["verify", "--module", "coherent"]) == 1
    assert "FAIL" in capsys.readouterr().out


CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.json"))


@pytest.mark.parametrize("path", CONFIGS, ids=[p.stem for p in CONFIGS])
def test_shipped_configs_run(capsys, path):
    command = "distance" if path.stem == "distance" else path.stem
    code, out, _ = run(capsys, command, "--config", str(path))
    assert code == 0 and len(rows(out)) >= 2
