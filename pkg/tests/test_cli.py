import json
import shutil
import subprocess

import pytest

from cata import catalog
from cata.cli import EXIT_BACKEND, EXIT_SAT, EXIT_UNKNOWN, EXIT_UNSAT, EXIT_USAGE, main, parse_value

from conftest import BENCHMARKS, FIXTURES, needs_z3

SUMTREE = str(FIXTURES / "sumtree.smt2")
REPLAY = f"replay:{FIXTURES / 'sumtree.trace'}"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_replayed_solve(capsys):
    code, out, err = run(capsys, "solve", SUMTREE, "--solver", REPLAY)
    assert code == EXIT_SAT
    verdict, depth, ms = out.splitlines()[0].split()
    assert (verdict, depth) == ("sat", "2") and float(ms) >= 0
    assert "(define-fun t1 () RealTree" in out
    assert "no range predicate" in err


def test_emit_trace_matches_the_recorded_session(capsys, tmp_path):
    target = tmp_path / "out.trace"
    run(capsys, "solve", SUMTREE, "--solver", REPLAY, "--emit-trace", str(target))
    recorded = (FIXTURES / "sumtree.trace").read_bytes()
    body = b"".join(line for line in recorded.splitlines(keepends=True) if not line.startswith(b";;"))
    assert target.read_bytes() == body


def test_json_report(capsys):
    code, out, _ = run(capsys, "solve", SUMTREE, "--solver", REPLAY, "--json")
    record = json.loads(out)
    assert list(record) == sorted(record)
    assert record["verdict"] == "sat" and record["depth"] == 2
    assert record["backend"].startswith("replay:")
    assert len(record["round_ms"]) == 3


def test_no_model(capsys):
    _, out, _ = run(capsys, "solve", SUMTREE, "--solver", REPLAY, "--no-model")
    assert out.strip().count("\n") == 0


def test_emit_core_smt2(capsys):
    code, out, _ = run(capsys, "solve", SUMTREE, "--emit-core-smt2")
    assert code == 0
    assert "define-catamorphism" not in out and "(check-sat)" in out


@pytest.mark.parametrize("argv", [
    ["solve", "/nonexistent.smt2"],
    ["solve", SUMTREE, "--solver", "yices"],
    ["solve", SUMTREE, "--max-unroll", "-1"],
    ["combine", SUMTREE, "--catas", "Nope"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert err.startswith("error:")


def test_parse_error_names_the_file(capsys, tmp_path):
    bad = tmp_path / "bad.smt2"
    bad.write_text("(assert (and true)\n")
    code, _, err = run(capsys, "solve", str(bad))
    assert code == EXIT_USAGE and "bad.smt2:" in err


def test_backend_failure_exit_code(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", SUMTREE, "--solver", f"path:{tmp_path / 'nosolver'}")
    assert code == EXIT_BACKEND
    assert out.startswith("unknown 0")


def test_normalize(capsys, tmp_path):
    f = tmp_path / "n.smt2"
    f.write_text((FIXTURES / "sumtree.smt2").read_text())
    code, out, _ = run(capsys, "normalize", str(f))
    assert code == 0 and out.startswith("; 1 clause(s), p = 0")
    code, out, _ = run(capsys, "normalize", str(f), "--emit")
    assert out.splitlines()[1].startswith("(assert ")


def test_combine(capsys, tmp_path):
    f = tmp_path / "lib.smt2"
    f.write_text(catalog.script_text("Set", "SizeI", "Height"))
    code, out, _ = run(capsys, "combine", str(f), "--catas", "Set,SizeI", "--name", "SS")
    assert code == 0
    assert "(declare-datatypes ((SS_Tuple 0))" in out
    assert "(set-cata-class SS associative)" in out
    code, _, err = run(capsys, "combine", str(f), "--catas", "Set,Height")
    assert code == 3 and "not associative" in err


def test_analyze_bound(capsys, tmp_path):
    f = tmp_path / "lib.smt2"
    f.write_text(catalog.script_text("SizeI", "Height", "Mirror"))
    code, out, _ = run(capsys, "analyze", str(f), "--check", "bound", "--p", "10000", "--cata", "SizeI")
    assert code == 0 and out.strip() == "SizeI BOUND 10 mode=catalan p=10000 class=associative"
    code, out, _ = run(capsys, "analyze", str(f), "--check", "bound", "--p", "3", "--cata", "Height")
    assert code == 0 and out.strip() == "Height BOUND 4 mode=linear p=3 class=monotonic(1)"
    code, out, _ = run(capsys, "analyze", str(f), "--check", "bound", "--p", "1", "--cata", "Mirror")
    assert code == 1 and "BOUND NONE" in out


@needs_z3
def test_analyze_assoc_and_range(capsys, tmp_path):
    f = tmp_path / "lib.smt2"
    f.write_text(catalog.script_text("SizeI", "Height"))
    code, out, _ = run(capsys, "analyze", str(f), "--check", "assoc", "--cata", "SizeI")
    assert code == 0 and out.count("HOLDS") == 2
    code, out, _ = run(capsys, "analyze", str(f), "--check", "assoc", "--cata", "Height")
    assert code == 3 and "ASSOCIATIVE-SEMANTIC FAILS" in out
    code, out, _ = run(capsys, "analyze", str(f), "--check", "range")
    assert code == 0 and out.count("RANGE-OVERAPPROX HOLDS") == 2


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", str(FIXTURES / "dirty_words.smt2"), "--max-size", "5",
                       "--domain", '"clean","dirty"', "--true-on", 'dirty="dirty"')
    assert code == 0 and out.strip() == "no-model-within-bounds"
    code, out, _ = run(capsys, "oracle", SUMTREE, "--domain", "0,5", "--max-size", "3")
    assert out.startswith("sat")


def test_parse_value():
    assert parse_value("3") == 3
    assert parse_value("true") is True
    assert parse_value('"abc"') == "abc"
    assert str(parse_value("2.5")) == "5/2"


def test_bench_empty_directory(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", str(tmp_path))
    assert code == 0 and out.strip() == "0 benchmarks"


@needs_z3
def test_bench_reports_a_flipped_expectation(capsys, tmp_path):
    for name in ("sumtree01", "sumtree02"):
        shutil.copy(BENCHMARKS / f"{name}.smt2", tmp_path)
        shutil.copy(BENCHMARKS / f"{name}.expect", tmp_path)
    flipped = tmp_path / "sumtree02.expect"
    flipped.write_text("unsat\n" if flipped.read_text().strip() == "sat" else "sat\n")
    code, out, err = run(capsys, "bench", str(tmp_path))
    assert code == 1
    assert "2 benchmarks, 1 mismatches" in out
    assert err.strip() == "mismatch: sumtree02.smt2"


@needs_z3
def test_bench_corpus(capsys):
    code, out, _ = run(capsys, "bench", str(BENCHMARKS), "--jobs", "4")
    assert code == 0, out
    assert "0 mismatches" in out


@needs_z3
def test_exit_codes_for_verdicts(capsys):
    assert run(capsys, "solve", str(FIXTURES / "sizei_negative.smt2"))[0] == EXIT_UNSAT
    code, out, _ = run(capsys, "solve", str(FIXTURES / "sizei_negative_norange.smt2"),
                       "--max-unroll", "2", "--bound-mode", "off")
    assert code == EXIT_UNKNOWN and "max-unroll 2 reached" in out


def test_installed_entry_point():
    exe = shutil.which("cata")
    if exe is None:
        pytest.skip("cata entry point not installed")
    p = subprocess.run([exe, "solve", SUMTREE, "--solver", REPLAY, "--json"],
                       capture_output=True, text=True, timeout=60)
    assert p.returncode == EXIT_SAT
    assert json.loads(p.stdout)["verdict"] == "sat"
