"""Seeded random scripts for the oracle cross-checks: at most two tree
variables, at most three element constants, one associative catamorphism
and a Boolean skeleton of depth at most four."""
from __future__ import annotations

import random
from dataclasses import dataclass

HEADER = "(declare-datatypes ((Tree 0)) (((Leaf) (Node (left Tree) (elem Int) (right Tree)))))\n"

CATAS = {
    "SizeI": ("Int", """(define-catamorphism SizeI ((t Tree)) Int
  (ite (is-Leaf t) 0 (+ (SizeI (left t)) 1 (SizeI (right t)))))
(declare-range SizeI ((c Int)) (>= c 0))
(set-cata-class SizeI associative)
"""),
    "Sum": ("Int", """(define-catamorphism Sum ((t Tree)) Int
  (ite (is-Leaf t) 0 (+ (Sum (left t)) (elem t) (Sum (right t)))))
(set-cata-class Sum associative)
"""),
    "Min": ("IntOption", """(declare-datatypes ((IntOption 0)) (((none) (some (val Int)))))
(define-fun min_opt ((a IntOption) (b IntOption)) IntOption
  (ite (is-none a) b (ite (is-none b) a (ite (<= (val a) (val b)) a b))))
(define-catamorphism Min ((t Tree)) IntOption
  (ite (is-Leaf t) none (min_opt (min_opt (Min (left t)) (some (elem t))) (Min (right t)))))
(set-cata-class Min associative)
"""),
    "Set": ("(Set Int)", """(define-catamorphism Set ((t Tree)) (Set Int)
  (ite (is-Leaf t) (as set.empty (Set Int))
       (set.union (Set (left t)) (set.union (set.singleton (elem t)) (Set (right t))))))
(set-cata-class Set associative)
"""),
}

DOMAIN = (0, 1, 2)


@dataclass
class RandomScript:
    seed: int
    cata: str
    text: str


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.trees = ["t1", "t2"][: rng.randint(1, 2)]
        self.elems = ["x1", "x2", "x3"][: rng.randint(0, 3)]
        self.cata = rng.choice(sorted(CATAS))

    def tree(self, depth: int = 1) -> str:
        r = self.rng.random()
        if depth > 0 and r < 0.2:
            return f"(Node {self.tree(depth - 1)} {self.elem(0)} {self.tree(depth - 1)})"
        if depth > 0 and r < 0.32:
            return f"({self.rng.choice(['left', 'right'])} {self.rng.choice(self.trees)})"
        if r < 0.42:
            return "Leaf"
        return self.rng.choice(self.trees)

    def elem(self, depth: int = 1) -> str:
        choices = [str(self.rng.choice(DOMAIN))] + self.elems
        if depth > 0 and self.rng.random() < 0.15:
            return f"(elem {self.rng.choice(self.trees)})"
        return self.rng.choice(choices)

    def app(self) -> str:
        return f"({self.cata} {self.tree()})"

    def cata_atom(self) -> str:
        rng = self.rng
        if self.cata in ("SizeI", "Sum"):
            lhs = self.app()
            k = rng.random()
            if k < 0.3:
                rhs = self.app()
            elif k < 0.5:
                rhs = f"(+ {self.app()} {self.elem(0)})"
            else:
                rhs = self.elem()
            op = rng.choice(["=", "<", "<=", ">"])
            return f"({op} {lhs} {rhs})"
        if self.cata == "Min":
            k = rng.random()
            if k < 0.3:
                return f"(= {self.app()} none)"
            if k < 0.6:
                return f"(= {self.app()} (some {self.elem()}))"
            if k < 0.8:
                return f"(= {self.app()} {self.app()})"
            return f"(and (is-some {self.app()}) (< (val {self.app()}) {self.elem()}))"
        k = rng.random()
        if k < 0.45:
            return f"(set.member {self.elem()} {self.app()})"
        if k < 0.7:
            return f"(= {self.app()} (as set.empty (Set Int)))"
        return f"(= {self.app()} {self.app()})"

    def atom(self) -> str:
        k = self.rng.random()
        if k < 0.45:
            return self.cata_atom()
        if k < 0.7:
            return f"(= {self.tree()} {self.tree()})"
        if k < 0.8:
            return f"(is-Leaf {self.tree()})"
        if self.elems:
            return f"({self.rng.choice(['=', '<'])} {self.elem()} {self.elem()})"
        return self.cata_atom()

    def formula(self, depth: int) -> str:
        if depth <= 1 or self.rng.random() < 0.3:
            return self.atom()
        k = self.rng.random()
        if k < 0.2:
            return f"(not {self.formula(depth - 1)})"
        op = "and" if k < 0.65 else ("or" if k < 0.9 else "=>")
        n = 2 if op == "=>" else self.rng.randint(2, 3)
        return f"({op} " + " ".join(self.formula(depth - 1) for _ in range(n)) + ")"


def random_script(seed: int) -> RandomScript:
    rng = random.Random(seed)
    g = _Gen(rng)
    phi = g.formula(4)
    lines = [HEADER, CATAS[g.cata][1]]
    lines += [f"(declare-fun {t} () Tree)\n" for t in g.trees]
    lines += [f"(declare-fun {x} () Int)\n" for x in g.elems]
    lines.append(f"(assert {phi})\n(check-sat)\n")
    return RandomScript(seed, g.cata, "".join(lines))


def random_scripts(n: int = 200, base_seed: int = 0) -> list[RandomScript]:
    return [random_script(base_seed + i) for i in range(n)]
