import json
import subprocess
import sys

import pytest

from lbforge.cli import main, resolve_options
from lbforge.lb import LbRunRecord


@pytest.fixture
def mps_dir(tmp_path):
    out = tmp_path / "inst"
    assert main(["generate", "--family", "ca", "--count", "3", "--seed", "5", "--out", str(out)]) == 0
    return out


def test_generate_writes_labelled_files(mps_dir):
    assert sorted(p.name for p in mps_dir.iterdir()) == ["ca-5.mps", "ca-6.mps", "ca-7.mps"]


def test_run_emits_json_lines(mps_dir, tmp_path, capsys):
    inst = str(mps_dir / "ca-5.mps")
    assert main(["run", "--instance", inst, "--tmax", "8", "--node-time-limit", "2"]) == 0
    text = capsys.readouterr().out
    rec = LbRunRecord.from_jsonl(text)
    assert rec.algorithm == "lb-base" and rec.t_max == 8
    out = tmp_path / "r.jsonl"
    assert main(["run", "--instance", inst, "--tmax", "8", "--node-time-limit", "2", "--out", str(out)]) == 0
    assert out.read_text() == text


def test_solve_and_heuristic(mps_dir, capsys):
    inst = str(mps_dir / "ca-6.mps")
    assert main(["solve", "--instance", inst]) == 0
    plain = json.loads(capsys.readouterr().out)
    assert plain["status"] == "optimal" and len(plain["solution"]) > 0
    assert main(["solve", "--instance", inst, "--heuristic", "root_only", "--tmax", "5", "--node-time-limit", "2"]) == 0
    hooked = json.loads(capsys.readouterr().out)
    assert hooked["objective"] == pytest.approx(plain["objective"])
    assert hooked["lb_calls"] == 1


def test_exit_codes(tmp_path, capsys):
    assert main([]) == 1
    assert main(["run"]) == 1  # missing --instance
    assert main(["run", "--instance", "x.mps", "--algo", "lb-magic"]) == 1
    assert main(["run", "--instance", str(tmp_path / "missing.mps")]) == 2
    assert main(["run", "--instance", "x.mps", "--algo", "lb-rl", "--config", str(tmp_path / "nope.json")]) == 1
    bad = tmp_path / "bad.mps"
    bad.write_text("NAME x\nROWS\n N obj\nCOLUMNS\n")
    assert main(["inspect", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "inspect failed" in err


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"instance": "a.mps", "k0": 7, "node-time-limit": 3}))
    o = resolve_options("run", {"config": str(cfg), "k0": 9.0})
    assert o["k0"] == 9.0 and o["node_time_limit"] == 3 and o["tmax"] == 60.0 and o["instance"] == "a.mps"
    cfg.write_text(json.dumps({"instance": "a.mps", "bogus": 1}))
    assert main(["run", "--config", str(cfg)]) == 1


def test_inspect_kinds(mps_dir, tmp_path, capsys):
    assert main(["inspect", str(mps_dir / "ca-5.mps")]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["kind"] == "mps" and info["maximize"] is True
    rec = tmp_path / "r.jsonl"
    assert main(["run", "--instance", str(mps_dir / "ca-5.mps"), "--tmax", "4", "--out", str(rec)]) == 0
    assert main(["inspect", str(rec)]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "run record"


def test_label_train_and_inspect_checkpoint(tmp_path, capsys):
    inst = tmp_path / "sc"
    assert main(["generate", "--family", "sc", "--count", "4", "--out", str(inst)]) == 0
    labels = tmp_path / "labels"
    assert main(["label", "--instances", str(inst), "--out", str(labels), "--resolution", "0.25",
                 "--node-time-limit", "3"]) == 0
    assert len(list(labels.glob("*.json"))) >= 3
    ckpt = tmp_path / "k.ckpt"
    assert main(["train-regression", "--data", str(labels), "--out", str(ckpt), "--epochs", "2"]) == 0
    capsys.readouterr()
    assert main(["inspect", str(ckpt)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["meta"]["architecture"]["kind"] == "gnn"
    pol = tmp_path / "pk.ckpt"
    assert main(["train-rl", "--instances", str(inst), "--out", str(pol), "--epochs", "2", "--tmax", "6",
                 "--node-time-limit", "2"]) == 0
    assert main(["run", "--instance", str(inst / "sc-0.mps"), "--algo", "lb-srmrl", "--k-model", str(ckpt),
                 "--pi-k", str(pol), "--tmax", "6"]) == 0
    assert main(["train-rl", "--which", "t", "--instances", str(inst), "--out", str(tmp_path / "pt.ckpt")]) == 2


def test_bench_is_deterministic(mps_dir, tmp_path, capsys):
    exp = tmp_path / "exp.json"
    exp.write_text(json.dumps({"algorithms": ["lb-base"], "dataset": {"mps_dir": str(mps_dir)}, "t_max": 5,
                               "lb": {"node_time_limit_default": 2}}))
    for name in ("a", "b"):
        assert main(["bench", "--config", str(exp), "--out", str(tmp_path / name), "--seeds", "0", "1"]) == 0
    assert "runs=6" in capsys.readouterr().out
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name
    assert main(["bench", "--out", str(tmp_path / "c")]) == 1
    exp.write_text(json.dumps({"algorithms": ["lb-rl"], "dataset": {"mps_dir": str(mps_dir)}}))
    assert main(["bench", "--config", str(exp), "--out", str(tmp_path / "c")]) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "lbforge", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "generate" in res.stdout
