import pytest

from cata import backend as be
from cata import engine
from cata.frontend import parse_script, print_term

from conftest import BENCHMARKS, FIXTURES, needs_z3


def load(name: str):
    return parse_script((FIXTURES / name).read_text(encoding="utf-8"))


def test_initial_state():
    st = engine.init(load("sumtree.smt2"))
    assert st.depth == 0
    assert [print_term(t) for t in st.frontier["SumTree"]] == ["t1"]
    assert st.ranges == ()  # SumTree has no range predicate


def test_unroll_step_moves_the_frontier_to_the_children():
    script = load("sumtree.smt2")
    st = engine.unroll_step(engine.init(script), script)
    assert st.depth == 1
    assert [print_term(t) for _, t in st.equations] == ["t1"]
    assert [print_term(c) for c in st.controls] == ["(is-Leaf t1)"]
    assert [print_term(t) for t in st.frontier["SumTree"]] == ["(left t1)", "(right t1)"]
    st = engine.unroll_step(st, script)
    assert len(st.frontier["SumTree"]) == 4
    assert len(st.controls) == 2


def test_ranges_follow_the_frontier():
    script = load("sizei_negative.smt2")
    st = engine.init(script)
    assert [print_term(r) for r in st.ranges] == ["(>= (SizeI t) 0)"]
    st = engine.unroll_step(st, script)
    assert len(st.ranges) == 2


def test_preamble_order():
    script = load("sumtree.smt2")
    lines = engine.preamble(script, ["SumTree"], "z3")
    kinds = [line.split()[0].lstrip("(") for line in lines]
    assert kinds[0] == "declare-datatypes"
    assert lines[1] == "(declare-fun SumTree (RealTree) Real)"
    first_assert = kinds.index("assert")
    assert all(k == "declare-fun" for k in kinds[2:first_assert])
    assert kinds[-2:] == ["define-fun", "define-fun"]


def test_strict_mode_needs_ranges():
    with pytest.raises(engine.MissingRange):
        engine.init(load("sumtree.smt2"), engine.EngineConfig(bound_mode="strict"))


def test_config_validation():
    with pytest.raises(ValueError):
        engine.EngineConfig(max_unroll=-1)
    with pytest.raises(ValueError):
        engine.EngineConfig(bound_mode="sometimes")


def test_nesting_allowance():
    assert engine.nesting_allowance(load("sumtree.smt2")) == 2  # one Node, one tree equality
    assert engine.nesting_allowance(load("sizei_negative.smt2")) == 0


def test_replay_reproduces_the_recorded_session():
    session = be.start(be.SolverConfig.from_spec(f"replay:{FIXTURES / 'sumtree.trace'}"))
    v = engine.decide(load("sumtree.smt2"), session)
    assert (v.outcome, v.depth) == ("sat", 2)
    assert [(r.controls, r.ranges) for r in v.rounds] == [("unsat", "sat"), ("unsat", "sat"), ("sat", None)]
    assert session.exhausted


def test_backend_failure_is_reported(tmp_path):
    v = engine.decide(load("sumtree.smt2"), be.SolverConfig(kind="path", path=str(tmp_path / "nope")))
    assert v.outcome == "unknown" and v.backend_failed


@needs_z3
def test_max_unroll_zero():
    v = engine.decide(load("sumtree.smt2"), be.SolverConfig(), engine.EngineConfig(max_unroll=0))
    assert (v.outcome, v.depth) == ("unknown", 0)
    assert "max-unroll" in v.reason


@needs_z3
def test_sat_by_bound():
    script = parse_script((BENCHMARKS / "sumtree11.smt2").read_text())
    v = engine.decide(script, be.SolverConfig())
    assert v.outcome in ("sat", "sat-by-bound")
    assert v.bound is not None and v.depth <= v.bound
    off = engine.decide(script, be.SolverConfig(), engine.EngineConfig(bound_mode="off", max_unroll=6))
    assert off.bound is None


@needs_z3
def test_missing_range_warning():
    v = engine.decide(load("sizei_negative_norange.smt2"), be.SolverConfig(),
                      engine.EngineConfig(max_unroll=2, bound_mode="off"))
    assert any("no range predicate" in w for w in v.warnings)


@needs_z3
def test_model_is_returned_on_sat():
    v = engine.decide(load("sumtree.smt2"), be.SolverConfig())
    assert v.outcome == "sat"
    assert "t1" in v.model


BENCH = sorted(p.stem for p in BENCHMARKS.glob("*.smt2"))


@needs_z3
@pytest.mark.parametrize("name", BENCH)
def test_benchmark(name):
    expected = (BENCHMARKS / f"{name}.expect").read_text().strip()
    v = engine.decide(parse_script((BENCHMARKS / f"{name}.smt2").read_text()), be.SolverConfig(),
                      engine.EngineConfig(deadline_s=10))
    got = "sat" if v.outcome == "sat-by-bound" else v.outcome
    assert got == expected, v.reason
