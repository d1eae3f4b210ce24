"""Snapshot format, CLI subcommands, determinism of emitted artifacts."""

import json
import struct
import subprocess
import sys

import numpy as np
import pytest

from landau_hermite.solver import (
    SolverConfig,
    build_initial_state,
    run,
    write_snapshot,
    read_snapshot,
)

CONFIG_TEXT = """
# small deterministic run
N = 8
K = 3
d_x = 1
dt = 0.005
T = 0.05
r = 2.0
scheme = imex_euler
seed = 11
recipe = rough
g0_norm = 0.001
record_every = 5
snapshot_every = 5
"""


def small_config():
    return SolverConfig(N=8, K=3, d_x=1, dt=5e-3, T=0.05, r=2.0, seed=11,
                        recipe="rough", g0_norm=1e-3, record_every=5)


def test_snapshot_round_trip(tmp_path):
    cfg = small_config()
    state = build_initial_state(cfg)
    state.time = 0.125
    path = tmp_path / "state.lnsp"
    write_snapshot(path, state)
    back = read_snapshot(path)
    assert back.config.N == cfg.N and back.config.K == cfg.K
    assert back.config.d_x == cfg.d_x and back.config.r == cfg.r
    assert back.time == 0.125
    np.testing.assert_array_equal(back.c, state.c)


def test_snapshot_header_layout(tmp_path):
    cfg = small_config()
    state = build_initial_state(cfg)
    path = tmp_path / "state.lnsp"
    write_snapshot(path, state)
    raw = path.read_bytes()
    assert raw[:4] == b"LNSP"
    version, d_x, K, N = struct.unpack("<IIII", raw[4:20])
    r, t = struct.unpack("<dd", raw[20:36])
    assert (version, d_x, K, N) == (1, 1, 3, 8)
    assert r == 2.0 and t == 0.0
    n_complex = (2 * 3 + 1) * 165
    assert len(raw) == 36 + 16 * n_complex
    # first coefficient: interleaved little-endian (re, im)
    re, im = struct.unpack("<dd", raw[36:52])
    assert complex(re, im) == state.c[0, 0]


def test_snapshot_rejects_garbage(tmp_path):
    p = tmp_path / "bad.lnsp"
    p.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(ValueError):
        read_snapshot(p)


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "landau_hermite.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def test_cli_run_outputs_and_determinism(tmp_path):
    cfg_path = tmp_path / "cfg.txt"
    cfg_path.write_text(CONFIG_TEXT, encoding="utf-8")
    out1 = tmp_path / "o1"
    out2 = tmp_path / "o2"
    res1 = run_cli("run", "--config", str(cfg_path), "--out", str(out1))
    assert res1.returncode == 0, res1.stderr
    res2 = run_cli("run", "--config", str(cfg_path), "--out", str(out2))
    assert res2.returncode == 0, res2.stderr
    for name in ("ledger.csv", "spectra.csv", "final.lnsp"):
        a = (out1 / name).read_bytes()
        b = (out2 / name).read_bytes()
        assert a == b, f"{name} not byte-identical"
    ledger = (out1 / "ledger.csv").read_text().splitlines()
    assert ledger[0] == "t,h_r_norm,triple_norm,dissipation_integral"
    assert len(ledger) == 2 + int(round(0.05 / 0.005))
    snaps = sorted(p.name for p in out1.glob("*.lnsp"))
    assert "final.lnsp" in snaps and "snapshot_000005.lnsp" in snaps


def test_cli_fit_from_spectra(tmp_path):
    cfg_path = tmp_path / "cfg.txt"
    cfg_path.write_text(CONFIG_TEXT, encoding="utf-8")
    out = tmp_path / "o"
    assert run_cli("run", "--config", str(cfg_path), "--out", str(out)).returncode == 0
    res = run_cli("fit", "--input", str(out / "spectra.csv"), "--out", str(out))
    assert res.returncode == 0, res.stderr
    rates = (out / "fitted_rates.csv").read_text().splitlines()
    assert rates[0] == "t,c_v,c_x,resid_v,resid_x"
    assert len(rates) > 1


def test_cli_verify_suite_json_lines(tmp_path):
    res = run_cli("verify", "--suite", "ladder", "--out", str(tmp_path))
    assert res.returncode == 0, res.stderr
    lines = [l for l in res.stdout.splitlines() if l.strip()]
    assert lines
    for line in lines:
        rec = json.loads(line)
        assert set(rec) == {"suite", "check", "status", "worst_value", "tolerance"}
        assert rec["status"] == "pass"
    report = (tmp_path / "verify.jsonl").read_text().splitlines()
    assert len(report) == len(lines)


def test_cli_verify_unknown_suite_fails():
    res = run_cli("verify", "--suite", "bogus")
    assert res.returncode != 0


def test_cli_picard_scheme_writes_report(tmp_path):
    text = CONFIG_TEXT.replace("scheme = imex_euler", "scheme = picard")
    cfg_path = tmp_path / "cfg.txt"
    cfg_path.write_text(text, encoding="utf-8")
    out = tmp_path / "o"
    res = run_cli("run", "--config", str(cfg_path), "--out", str(out))
    assert res.returncode == 0, res.stderr
    rep = json.loads((out / "picard_report.json").read_text())
    assert rep["converged"] is True
    assert rep["non_contraction"] is False
