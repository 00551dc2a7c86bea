import stat
import sys
import textwrap

import pytest

from cata import backend as be

from conftest import FIXTURES, needs_z3


def fake_solver(tmp_path, body: str) -> be.SolverConfig:
    """A tiny executable that plays a misbehaving solver."""
    exe = tmp_path / "fakesolver"
    exe.write_text(f"#!{sys.executable}\nimport sys\n" + textwrap.dedent(body))
    exe.chmod(exe.stat().st_mode | stat.S_IEXEC)
    return be.SolverConfig(kind="path", path=str(exe), timeout_ms=500)


POLITE = """
for line in sys.stdin:
    line = line.strip()
    if line.startswith("(check-sat"):
        print(VERDICT, flush=True)
    elif line.startswith("(exit"):
        break
    else:
        print("success", flush=True)
"""


def test_solver_spec_parsing():
    assert be.SolverConfig.from_spec("z3").kind == "z3"
    cfg = be.SolverConfig.from_spec("path:/opt/cvc5")
    assert cfg.kind == "path" and cfg.printer_dialect == "smtlib"
    assert be.SolverConfig.from_spec("replay:x.trace").identity() == "replay:x.trace"
    with pytest.raises(ValueError):
        be.SolverConfig.from_spec("yices")
    with pytest.raises(ValueError):
        be.SolverConfig(timeout_ms=0)


def test_spawn_failure(tmp_path):
    with pytest.raises(be.SpawnError):
        be.start(be.SolverConfig(kind="path", path=str(tmp_path / "missing")))


def test_missing_trace_file(tmp_path):
    with pytest.raises(be.SpawnError):
        be.start(be.SolverConfig(kind="replay", path=str(tmp_path / "none.trace")))


@pytest.mark.parametrize("verdict", ["sat", "unsat", "unknown"])
def test_fake_solver_verdicts(tmp_path, verdict):
    s = be.start(fake_solver(tmp_path, f"VERDICT = {verdict!r}\n" + POLITE))
    try:
        s.command("(declare-fun x () Int)")
        assert s.check_sat(["(> x 0)"]).verdict == verdict
        assert s.frames == 0
    finally:
        s.close()


def test_garbage_verdict_is_a_protocol_error(tmp_path):
    s = be.start(fake_solver(tmp_path, "VERDICT = 'maybe'\n" + POLITE))
    try:
        with pytest.raises(be.ProtocolError):
            s.check()
    finally:
        s.close()


def test_error_response(tmp_path):
    body = """
for line in sys.stdin:
    if line.startswith("(assert"):
        print('(error "line 1: unknown constant y")', flush=True)
    else:
        print("success", flush=True)
"""
    s = be.start(fake_solver(tmp_path, body))
    try:
        with pytest.raises(be.SolverError) as err:
            s.command("(assert y)")
        assert "unknown constant" in str(err.value)
    finally:
        s.close()


def test_solver_that_dies(tmp_path):
    body = """
for line in sys.stdin:
    if line.startswith("(check-sat"):
        sys.exit(3)
    print("success", flush=True)
"""
    s = be.start(fake_solver(tmp_path, body))
    with pytest.raises(be.BackendError):
        s.check()
    s.close()


def test_silent_solver_times_out_as_unknown(tmp_path):
    body = """
import time
for line in sys.stdin:
    if line.startswith("(check-sat"):
        time.sleep(30)
    print("success", flush=True)
"""
    cfg = fake_solver(tmp_path, body)
    s = be.start(cfg)
    be.ProcessSession.GRACE_MS, old = 100, be.ProcessSession.GRACE_MS
    try:
        assert s.check().verdict == "unknown"
    finally:
        be.ProcessSession.GRACE_MS = old
        s.close()


def test_environment_override(tmp_path, monkeypatch):
    cfg = fake_solver(tmp_path, "VERDICT = 'sat'\n" + POLITE)
    monkeypatch.setenv(be.ENV_SOLVER, cfg.path)
    s = be.start(be.SolverConfig(timeout_ms=500))
    try:
        assert s.check().verdict == "sat"
    finally:
        s.close()


def test_replay_divergence():
    s = be.start(be.SolverConfig.from_spec(f"replay:{FIXTURES / 'sumtree.trace'}"))
    with pytest.raises(be.ReplayDivergence) as err:
        s.command("(declare-fun something_else () Int)")
    assert "diverges" in str(err.value)


def test_trace_parsing():
    entries = be.parse_trace(";; header\n(check-sat)\n; sat\n(get-model)\n; (\n;  (x 1)\n; )\n")
    assert entries == [("(check-sat)", "sat"), ("(get-model)", "(\n (x 1)\n)")]
    with pytest.raises(be.ProtocolError):
        be.parse_trace("; sat\n")


def test_extract_values():
    text = "(\n  (define-fun x () Int\n    3)\n  (define-fun t () Tree\n    (Node Leaf 1 Leaf))\n)"
    vals = be.extract_values(text)
    assert vals == {"x": "3", "t": "(Node Leaf 1 Leaf)"}
    assert be.extract_values("not a model") == {}


@needs_z3
def test_live_z3_round_trip(z3_config):
    s = be.start(z3_config)
    try:
        s.command("(declare-fun x () Int)")
        r = s.check_sat(["(> x 3)", "(< x 5)"], model=True)
        assert r.verdict == "sat"
        assert be.extract_values(r.model_text)["x"] == "4"
        assert s.check_sat(["(> x 3)", "(< x 4)"]).verdict == "unsat"
        assert s.frames == 0
        text = s.trace_text()
        assert "(push)" in text and "; unsat" in text
    finally:
        s.close()
    assert s.closed
