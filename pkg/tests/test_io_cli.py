import json

import numpy as np
import pytest

from frametop import io
from frametop.cli import main
from frametop.config import RunConfig, default_seed
from frametop.errors import ParseError
from frametop.hermitian import gram_projection, random_frame
from frametop.homotopy import circle_loop_frames, torus_loop_projections
from frametop.schur_horn import verify_membership


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_matrix_roundtrip():
    F = random_frame(5, 2, 1)
    obj = io.frame_to_json(F)
    assert set(obj) == {"n", "k", "rows", "cols", "re", "im"}
    assert obj["n"] == 5 and obj["k"] == 2
    back = io.matrix_from_json(json.loads(io.dumps(obj)))
    assert np.array_equal(back, F)


def test_matrix_parse_errors():
    with pytest.raises(ParseError):
        io.matrix_from_json({"rows": 2, "cols": 2, "re": [[1, 0]]})
    with pytest.raises(ParseError):
        io.matrix_from_json({"rows": 2, "cols": 2, "re": [[1, 0]], "im": [[0, 0]]})
    with pytest.raises(ParseError):
        io.matrix_from_json({"n": 3, "k": 1, "rows": 1, "cols": 2, "re": [[1, 0]], "im": [[0, 0]]})


def test_parse_d_forms(tmp_path):
    assert io.parse_d("0.5,0.5,0.5,0.5")[0].tolist() == [0.5] * 4
    assert io.parse_d("1/3,1/3,1/3,1")[0][0] == 1 / 3
    assert io.parse_d("[1, 0]")[0].tolist() == [1, 0]
    path = tmp_path / "d.json"
    path.write_text(json.dumps(io.norm_vector_to_json([0.4] * 5, 2)))
    d, k = io.parse_d(str(path))
    assert k == 2 and d.tolist() == [0.4] * 5
    with pytest.raises(ParseError):
        io.parse_d("a,b")
    with pytest.raises(ParseError):
        io.parse_d("{\"x\": 1}")


def test_float_format_roundtrips():
    for x in (0.1, 1 / 3, 1e-300, 2.0**-1074, 123456789.123456789):
        assert float(io.fmt(x)) == x
    assert io.fmt(3) == "3" and io.fmt(True) == "true"


def test_csv_provenance(tmp_path):
    prov = io.provenance("demo", 5, {"f_tol": 1e-12})
    path = io.write_csv(tmp_path / "x.csv", ["a", "b"], [(1, 0.5), (2, 1 / 3)], prov)
    header, rows = io.read_csv(path)
    assert header["seed"] == 5 and header["command"] == "demo"
    assert rows[1]["b"] == repr(1 / 3)


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(f_tol=0)
    with pytest.raises(ValueError):
        RunConfig(seed=-1)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("FRAMETOP_SEED", "77")
    assert default_seed() == 77
    monkeypatch.delenv("FRAMETOP_SEED")
    assert default_seed() == 0


def test_construct(capsys, tmp_path):
    out = tmp_path / "frame.json"
    code, stdout, _ = run(capsys, "construct", "--d", "0.5,0.5,0.5,0.5", "--k", 2, "--out", out)
    assert code == 0 and json.loads(stdout)["membership"]["passed"]
    obj = json.loads(out.read_text())
    assert obj["provenance"]["seed"] == 0
    assert verify_membership(io.matrix_from_json(obj), [0.5] * 4).passed


def test_construct_vertex(capsys, tmp_path):
    out = tmp_path / "frame.json"
    assert run(capsys, "construct", "--d", "1,1,0,0", "--k", 2, "--out", out)[0] == 0
    F = io.read_frame(out)
    assert np.max(np.abs(F[:, 2:])) == 0


def test_construct_rejects(capsys, tmp_path):
    code, _, err = run(capsys, "--out-dir", tmp_path, "construct", "--d", "0.7,0.7,0.7", "--k", 2)
    assert code == 2 and json.loads(err)["error"] == "NotInPolytope"


def test_check(capsys):
    code, out, _ = run(capsys, "check", "--d", "0.4,0.4,0.4,0.4,0.4", "--k", 2)
    res = json.loads(out)
    assert code == 0 and res["satisfies_hypothesis"] and res["min_subset_sum"] == pytest.approx(1.2)
    res = json.loads(run(capsys, "check", "--d", "1,1,0,0")[1])
    assert not res["satisfies_hypothesis"] and res["min_subset_sum"] == 0
    res = json.loads(run(capsys, "check", "--d", "1/3,1/3,1/3,1", "--k", 2)[1])
    assert not res["satisfies_hypothesis"] and res["min_subset_sum"] == pytest.approx(2 / 3)
    res = json.loads(run(capsys, "check", "--d", "0.7,0.7,0.7", "--k", 2)[1])
    assert res["in_polytope"] is False


def test_strata_csv(capsys, tmp_path):
    out = tmp_path / "strata.csv"
    assert run(capsys, "strata", "--d", "1,1,0,0", "--k", 2, "--out", out)[0] == 0
    prov, rows = io.read_csv(out)
    assert prov["command"] == "strata"
    row = [r for r in rows if r["codim_complex"] == "1"]
    assert row and row[0]["blocks"] == "3 4;1 2" and row[0]["capacities"] == "1;1"


def test_retract(capsys, tmp_path):
    frame = tmp_path / "f.json"
    io.write_json(frame, io.frame_to_json(random_frame(5, 2, 4)))
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "--f-tol", "1e-14", "retract", "--frame", frame, "--d", "0.4,0.4,0.4,0.4,0.4",
                          "--out", out)
    res = json.loads(stdout)
    assert code == 0 and res["outcome"] == "Converged" and res["final_f"] <= 1e-14
    prov, rows = io.read_csv(tmp_path / "r.trace.csv")
    assert list(rows[0]) == ["iter", "f", "gradnorm", "step"] and prov["config"]["f_tol"] == 1e-14


def test_connect_and_exit_codes(capsys, tmp_path):
    for name, seed in (("a", 1), ("b", 2)):
        assert run(capsys, "--seed", seed, "construct", "--d", "0.5,0.5,0.5,0.5", "--out", tmp_path / f"{name}.json")[0] == 0
    code, stdout, _ = run(capsys, "connect", "--f0", tmp_path / "a.json", "--f1", tmp_path / "b.json",
                          "--d", "0.5,0.5,0.5,0.5", "--out", tmp_path / "c.json")
    assert code == 0 and json.loads(stdout)["success"]
    (tmp_path / "bad.json").write_text("{not json")
    code, _, err = run(capsys, "connect", "--f0", tmp_path / "bad.json", "--f1", tmp_path / "b.json",
                       "--d", "0.5,0.5,0.5,0.5")
    assert code == 2 and json.loads(err)["error"] == "ParseError" and "line 1" in json.loads(err)["message"]


def test_contract_loop_random_is_reproducible(capsys, tmp_path):
    outs = []
    for rep in range(2):
        out = tmp_path / f"c{rep}.json"
        code, stdout, _ = run(capsys, "--seed", 11, "contract-loop", "--random", "0.5,0.5,0.5,0.5", "--out", out)
        assert code == 0 and json.loads(stdout)["success"]
        outs.append((out.read_bytes(), out.with_suffix(".csv").read_bytes()))
    assert outs[0] == outs[1]


def test_contract_loop_from_file(capsys, tmp_path):
    path = tmp_path / "loop.json"
    io.write_json(path, io.loop_to_json([0.5, 0.5], circle_loop_frames(1, 32), frames=True))
    code, stdout, _ = run(capsys, "contract-loop", "--loop", path, "--out", tmp_path / "r.json")
    assert code == 0 and json.loads(stdout)["success"] is False


def test_winding(capsys, tmp_path):
    path = tmp_path / "loop.json"
    io.write_json(path, io.loop_to_json([0.5, 0.5], circle_loop_frames(1, 64), frames=True))
    code, stdout, _ = run(capsys, "winding", "--loop", path, "--mode", "cp1")
    assert code == 0 and json.loads(stdout)["components"] == [1]
    path = tmp_path / "torus.json"
    io.write_json(path, io.loop_to_json([1 / 3, 1 / 3, 1 / 3, 1], torus_loop_projections(1, 1, 64)))
    code, stdout, _ = run(capsys, "winding", "--loop", path, "--mode", "ex53")
    assert code == 0 and json.loads(stdout)["components"] == [1, 1]
    code, _, err = run(capsys, "winding", "--loop", path, "--mode", "cp1")
    assert code == 2


def test_winding_loop_of_projections_from_frames(tmp_path):
    path = tmp_path / "loop.json"
    frames = circle_loop_frames(2, 16)
    io.write_json(path, io.loop_to_json([0.5, 0.5], frames, frames=True))
    d, samples, are_frames = io.read_loop(path)
    assert are_frames and np.allclose(gram_projection(samples[3]), gram_projection(frames[3]))


def test_acceptance_subset(capsys, tmp_path):
    code, stdout, _ = run(capsys, "--out-dir", tmp_path, "acceptance", "--only", "strata")
    assert code == 0
    assert "strata-negative" in stdout and "strata-positive" in stdout and "synthesis" not in stdout
    prov, rows = io.read_csv(tmp_path / "acceptance.csv")
    assert [r["number"] for r in rows] == ["3", "4"]
    code, _, err = run(capsys, "acceptance", "--only", "bogus")
    assert code == 2


def test_internal_error_exit_code(capsys, monkeypatch):
    import frametop.cli as cli

    def boom(args):
        raise RuntimeError("boom")

    monkeypatch.setitem(cli.COMMANDS, "check", boom)
    code, _, err = run(capsys, "check", "--d", "1,0")
    assert code == 1 and json.loads(err)["error"] == "InternalError"
