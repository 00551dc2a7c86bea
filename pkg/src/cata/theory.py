"""Signature and concrete semantics of the element/collection theories.

The canonical operator vocabulary follows SMT-LIB 2.6 (with the cvc5 names
for finite sets, bags and sequences).  Backends that spell things
differently are handled by the printer's dialect table, not here.

Concrete values used by the oracle:

=========  ===============================================
Bool       ``bool``
Int        ``int``
Real       ``fractions.Fraction``
String     ``str``
Set E      ``frozenset``
Bag E      ``frozenset`` of ``(element, multiplicity)`` pairs
Seq E      ``tuple``
=========  ===============================================
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Sequence

from .terms import BOOL, INT, REAL, Sort, SortError, bag_sort, seq_sort, set_sort


class EvalError(Exception):
    """A term could not be interpreted concretely."""


ARITH = (INT, REAL)
CHAINABLE = {"<", "<=", ">", ">="}
NULLARY = {"set.empty": "Set", "bag.empty": "Bag", "seq.empty": "Seq"}

OPERATORS = frozenset(
    {
        "not", "and", "or", "xor", "=>", "=", "distinct", "ite",
        "+", "-", "*", "/", "div", "mod", "abs", "<", "<=", ">", ">=",
        "to_real", "to_int",
        "set.empty", "set.singleton", "set.union", "set.inter", "set.minus",
        "set.member", "set.subset", "set.insert",
        "bag.empty", "bag", "bag.union_disjoint", "bag.count",
        "seq.empty", "seq.unit", "seq.++", "seq.len",
    }
)


def _need(cond: bool, msg: str, path: tuple[int, ...] = ()):
    if not cond:
        raise SortError(msg, path)


def _same(op: str, sorts: Sequence[Sort]) -> Sort:
    first = sorts[0]
    for i, s in enumerate(sorts[1:], start=1):
        _need(s == first, f"{op}: argument of sort {s}, expected {first}", (i,))
    return first


def _arith(op: str, sorts: Sequence[Sort]) -> Sort:
    for i, s in enumerate(sorts):
        _need(s in ARITH, f"{op}: expected Int or Real, got {s}", (i,))
    return REAL if REAL in sorts else INT


def _family(s: Sort, name: str) -> bool:
    return s.name == name and len(s.params) == 1


def op_sort(op: str, sorts: Sequence[Sort], declared: Sort | None = None) -> Sort:
    """Result sort of ``op`` applied to arguments of ``sorts``.

    ``declared`` is the sort written in an ``(as ...)`` qualifier; it is
    required for the nullary empty-collection constants.
    """
    n = len(sorts)
    if op not in OPERATORS:
        raise SortError(f"unknown operator {op}")
    if op in NULLARY:
        _need(n == 0, f"{op} takes no arguments")
        _need(declared is not None and _family(declared, NULLARY[op]),
              f"{op} must be qualified with a ({NULLARY[op]} E) sort")
        return declared
    if op == "not":
        _need(n == 1, "not takes one argument")
        _need(sorts[0] == BOOL, f"not: expected Bool, got {sorts[0]}", (0,))
        return BOOL
    if op in ("and", "or", "xor", "=>"):
        _need(n >= 1, f"{op} needs arguments")
        for i, s in enumerate(sorts):
            _need(s == BOOL, f"{op}: expected Bool, got {s}", (i,))
        return BOOL
    if op in ("=", "distinct"):
        _need(n >= 2, f"{op} needs at least two arguments")
        if all(s in ARITH for s in sorts):
            return BOOL
        _same(op, sorts)
        return BOOL
    if op == "ite":
        _need(n == 3, "ite takes three arguments")
        _need(sorts[0] == BOOL, f"ite condition of sort {sorts[0]}", (0,))
        if sorts[1] in ARITH and sorts[2] in ARITH:
            return _arith(op, sorts[1:])
        _need(sorts[1] == sorts[2], f"ite branches of sorts {sorts[1]} and {sorts[2]}", (2,))
        return sorts[1]
    if op in ("+", "*"):
        _need(n >= 1, f"{op} needs arguments")
        return _arith(op, sorts)
    if op == "-":
        _need(n >= 1, "- needs arguments")
        return _arith(op, sorts)
    if op == "/":
        _need(n >= 2, "/ needs two arguments")
        _arith(op, sorts)
        return REAL
    if op in ("div", "mod"):
        _need(n == 2, f"{op} takes two arguments")
        for i, s in enumerate(sorts):
            _need(s == INT, f"{op}: expected Int, got {s}", (i,))
        return INT
    if op == "abs":
        _need(n == 1, "abs takes one argument")
        return _arith(op, sorts)
    if op in CHAINABLE:
        _need(n >= 2, f"{op} needs two arguments")
        _arith(op, sorts)
        return BOOL
    if op == "to_real":
        _need(n == 1 and sorts[0] == INT, "to_real takes one Int")
        return REAL
    if op == "to_int":
        _need(n == 1 and sorts[0] == REAL, "to_int takes one Real")
        return INT
    if op == "set.singleton":
        _need(n == 1, "set.singleton takes one argument")
        return set_sort(sorts[0])
    if op in ("set.union", "set.inter", "set.minus"):
        _need(n >= 2, f"{op} needs two arguments")
        s = _same(op, sorts)
        _need(_family(s, "Set"), f"{op}: expected a set, got {s}", (0,))
        return s
    if op == "set.member":
        _need(n == 2, "set.member takes two arguments")
        _need(sorts[1] == set_sort(sorts[0]), f"set.member: {sorts[0]} not in {sorts[1]}", (1,))
        return BOOL
    if op == "set.insert":
        _need(n >= 2, "set.insert needs a set")
        s = sorts[-1]
        _need(_family(s, "Set"), f"set.insert: expected a set, got {s}", (n - 1,))
        for i, e in enumerate(sorts[:-1]):
            _need(e == s.params[0], f"set.insert element of sort {e}", (i,))
        return s
    if op == "set.subset":
        _need(n == 2, "set.subset takes two arguments")
        s = _same(op, sorts)
        _need(_family(s, "Set"), f"set.subset: expected sets, got {s}", (0,))
        return BOOL
    if op == "bag":
        _need(n == 2, "bag takes an element and a multiplicity")
        _need(sorts[1] == INT, "bag multiplicity must be Int", (1,))
        return bag_sort(sorts[0])
    if op == "bag.union_disjoint":
        _need(n >= 2, "bag.union_disjoint needs two arguments")
        s = _same(op, sorts)
        _need(_family(s, "Bag"), f"{op}: expected bags, got {s}", (0,))
        return s
    if op == "bag.count":
        _need(n == 2, "bag.count takes two arguments")
        _need(sorts[1] == bag_sort(sorts[0]), f"bag.count: {sorts[0]} not in {sorts[1]}", (1,))
        return INT
    if op == "seq.unit":
        _need(n == 1, "seq.unit takes one argument")
        return seq_sort(sorts[0])
    if op == "seq.++":
        _need(n >= 1, "seq.++ needs arguments")
        s = _same(op, sorts)
        _need(_family(s, "Seq"), f"seq.++: expected sequences, got {s}", (0,))
        return s
    if op == "seq.len":
        _need(n == 1 and _family(sorts[0], "Seq"), "seq.len takes one sequence")
        return INT
    raise SortError(f"unknown operator {op}")  # pragma: no cover


# --- concrete semantics -------------------------------------------------------

def _bag(pairs) -> frozenset:
    return frozenset((e, k) for e, k in pairs if k > 0)


def _num(x, sort: Sort):
    return Fraction(x) if sort == REAL else x


def _euclid_div(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("division by zero")
    q = a // b
    if a - q * b < 0:  # only when b < 0 under floor division
        q += 1
    return q


def apply_op(op: str, args: Sequence, sort: Sort):
    """Evaluate ``op`` on concrete argument values; ``sort`` is the
    application's result sort."""
    if op == "not":
        return not args[0]
    if op == "and":
        return all(args)
    if op == "or":
        return any(args)
    if op == "xor":
        return sum(bool(a) for a in args) % 2 == 1
    if op == "=>":
        result = args[-1]
        for a in reversed(args[:-1]):
            result = (not a) or result
        return bool(result)
    if op == "=":
        return all(a == args[0] for a in args[1:])
    if op == "distinct":
        return len(set(args)) == len(args)
    if op == "ite":
        return _num(args[1] if args[0] else args[2], sort)
    if op == "+":
        return _num(sum(args), sort)
    if op == "*":
        out = 1
        for a in args:
            out *= a
        return _num(out, sort)
    if op == "-":
        if len(args) == 1:
            return _num(-args[0], sort)
        out = args[0]
        for a in args[1:]:
            out -= a
        return _num(out, sort)
    if op == "/":
        out = Fraction(args[0])
        for a in args[1:]:
            if a == 0:
                raise EvalError("division by zero")
            out /= a
        return out
    if op == "div":
        return _euclid_div(args[0], args[1])
    if op == "mod":
        return args[0] - args[1] * _euclid_div(args[0], args[1])
    if op == "abs":
        return _num(abs(args[0]), sort)
    if op in CHAINABLE:
        cmp = {
            "<": lambda a, b: a < b,
            "<=": lambda a, b: a <= b,
            ">": lambda a, b: a > b,
            ">=": lambda a, b: a >= b,
        }[op]
        return all(cmp(a, b) for a, b in zip(args, args[1:]))
    if op == "to_real":
        return Fraction(args[0])
    if op == "to_int":
        return int(args[0] // 1)
    if op in ("set.empty", "bag.empty"):
        return frozenset()
    if op == "seq.empty":
        return ()
    if op == "set.singleton":
        return frozenset([args[0]])
    if op == "set.union":
        return frozenset().union(*args)
    if op == "set.inter":
        return frozenset.intersection(*args)
    if op == "set.minus":
        out = args[0]
        for a in args[1:]:
            out = out - a
        return out
    if op == "set.member":
        return args[0] in args[1]
    if op == "set.insert":
        return args[-1] | frozenset(args[:-1])
    if op == "set.subset":
        return args[0] <= args[1]
    if op == "bag":
        return _bag([(args[0], args[1])])
    if op == "bag.union_disjoint":
        total = Counter()
        for b in args:
            total.update(dict(b))
        return _bag(total.items())
    if op == "bag.count":
        return dict(args[1]).get(args[0], 0)
    if op == "seq.unit":
        return (args[0],)
    if op == "seq.++":
        return tuple(x for a in args for x in a)
    if op == "seq.len":
        return len(args[0])
    raise EvalError(f"no concrete semantics for operator {op}")
