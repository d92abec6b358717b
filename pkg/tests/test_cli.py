import json
import math

import numpy as np
import pytest

from schur_fourier import __version__, cli
from schur_fourier.geometry import read_batch_binary


def run_cli(tmp_path, command, config, *extra):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / "out.txt"
    status = cli.main([command, "--config", str(cfg), "--out", str(out), "--quiet", *extra])
    text = out.read_text() if out.exists() else ""
    return status, text


def records(text):
    return [json.loads(line) for line in text.splitlines()]


def test_condition_stable_one_at_q_two(tmp_path):
    status, text = run_cli(tmp_path, "condition", {"law": {"family": "Stable", "alpha": 1.0}, "q": 2})
    assert status == 0
    (rec,) = records(text)
    assert rec["result"]["verdict"] == "LogConvex"
    assert rec["version"] == __version__ and len(rec["config_sha256"]) == 64


def test_pball_volume_is_pi(tmp_path):
    status, text = run_cli(tmp_path, "pball", {"op": "volume", "n": 2, "d": 1, "p": 2, "vol_k": 2})
    assert status == 0
    assert records(text)[0]["result"]["volume"] == pytest.approx(math.pi, rel=1e-14)


def test_section_square(tmp_path):
    h = 1 / math.sqrt(2)
    cfg = {"law": {"family": "UniformBox", "w": 0.5}, "weights": [[1, 0], [h, h]]}
    status, text = run_cli(tmp_path, "section", cfg)
    vals = [r["result"]["value"] for r in records(text)]
    assert status == 0
    assert vals == pytest.approx([1.0, math.sqrt(2)], abs=1e-6)


def test_output_is_byte_identical(tmp_path):
    cfg = {"law": {"family": "Laplace", "b": 1}, "op": "moment", "q": 2, "p": 1,
           "weights": [[0.3, 0.7]], "N": 20000}
    _, a = run_cli(tmp_path, "moments", cfg, "--seed", "11")
    _, b = run_cli(tmp_path, "moments", cfg, "--seed", "11")
    _, c = run_cli(tmp_path, "moments", cfg, "--seed", "12")
    assert a == b and a != c
    assert records(a)[0]["config_sha256"] != records(c)[0]["config_sha256"]


def test_seed_in_config_equals_flag(tmp_path):
    base = {"law": {"family": "Laplace"}, "op": "laplace", "p": 1, "lambda": 0.5, "weights": [[1]], "N": 5000}
    _, a = run_cli(tmp_path, "moments", dict(base, seed=3))
    _, b = run_cli(tmp_path, "moments", base, "--seed", "3")
    assert records(a)[0]["estimate"] == records(b)[0]["estimate"]


def test_stochastic_run_needs_seed(tmp_path):
    status, _ = run_cli(tmp_path, "khinchin", {"law": {"family": "Laplace"}, "p": 1, "n": 2})
    assert status == 2


def test_schema_errors_exit_2(tmp_path):
    assert run_cli(tmp_path, "condition", {"law": {"family": "Stable", "alpha": 1}})[0] == 2
    assert run_cli(tmp_path, "condition", {"law": {"family": "Stable", "alpha": 1}, "q": -1})[0] == 2
    assert run_cli(tmp_path, "condition", {"law": {"family": "Bogus"}, "q": 1})[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["section", "--config", str(bad), "--quiet"]) == 2


def test_numerical_error_exit_3(tmp_path):
    status, text = run_cli(tmp_path, "condition", {"law": {"family": "UniformBox"}, "q": 2})
    assert status == 3
    (rec,) = records(text)
    assert rec["error"]["type"] == "NonPositiveCf"


def test_csv_format(tmp_path):
    status, text = run_cli(tmp_path, "pball", {"op": "volume", "n": 3, "d": 1, "p": 1, "vol_k": 2},
                           "--format", "csv")
    header, row = text.splitlines()
    cols = dict(zip(header.split(","), row.split(",")))
    assert float(cols["result.volume"]) == pytest.approx(4 / 3)


def test_pball_sampling_and_batch(tmp_path):
    batch = tmp_path / "pts.bin"
    cfg = {"op": "uniform", "p": 1, "n": 4, "count": 50000, "batch_out": str(batch), "batch_format": "binary"}
    status, text = run_cli(tmp_path, "pball", cfg, "--seed", "5")
    res = records(text)[0]["result"]
    assert status == 0
    assert abs(res["mean_norm_p"] - 0.8) < 4 * res["stderr"]
    pts = read_batch_binary(batch, 4)
    assert pts.shape == (50000, 4) and np.all(np.abs(pts).sum(axis=1) <= 1)


def test_schur_test_and_block_section(tmp_path):
    cfg = {"functional": {"kind": "block_section", "p": 1}, "test": "midpoint", "n": 3, "trials": 5, "tol": 1e-8}
    status, text = run_cli(tmp_path, "schur-test", cfg)
    assert status == 0 and records(text)[0]["result"]["passed"]
    cfg = {"functional": {"kind": "bochner", "law": {"family": "Laplace"}, "q": 2,
                          "nu": {"weights": [1], "atoms": [[0.5]]}},
           "test": "ostrowski", "n": 3, "trials": 3}
    status, text = run_cli(tmp_path, "schur-test", cfg)
    assert status == 0 and all(r["result"]["ok"] for r in records(text))


def test_uniform_ball_moments(tmp_path):
    cfg = {"body": {"family": "Euclidean", "dim": 2}, "p": 1, "n": 3, "l": 1,
           "pairs": {"count": 3}, "N": 40000}
    status, text = run_cli(tmp_path, "uniform-ball-moments", cfg, "--seed", "2")
    recs = records(text)
    assert status == 0
    assert recs[-1]["inputs"]["pairs"] == 3 and recs[-1]["verdict"] == "pass"


def test_khinchin_command(tmp_path):
    cfg = {"law": {"family": "Laplace"}, "p": 1, "n": 3, "trials": 4, "N": 20000}
    status, text = run_cli(tmp_path, "khinchin", cfg, "--seed", "1")
    recs = records(text)
    assert status == 0 and len(recs) == 5
    assert recs[0]["result"]["c_gauss"] == pytest.approx(math.sqrt(2 / math.pi))


def test_dumps_is_canonical():
    assert cli.dumps({"b": 0.1, "a": [1, float("nan")]}) == '{"a":[1,null],"b":0.10000000000000001}'
