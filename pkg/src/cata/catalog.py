"""Builtin catamorphisms, written in the input language and parsed by the
frontend like any user definition.

Integer trees use ``Leaf``/``Node`` with selectors ``left``/``elem``/
``right``.  Optional integers are ``none``/``some`` (selector ``val``), so
that ``Some`` stays free as a catamorphism name.  The dirty-words
catamorphism runs over string trees (``WLeaf``/``WNode``) and the
almost-identity one over unit trees (``ULeaf``/``UNode``).
"""
from __future__ import annotations

from functools import lru_cache

from .script import CataDef, Signature

# (key, requirements, text)
_SECTIONS: list[tuple[str, tuple[str, ...], str]] = [
    ("tree", (), """
(declare-datatypes ((Tree 0)) (((Leaf) (Node (left Tree) (elem Int) (right Tree)))))
"""),
    ("option", (), """
(declare-datatypes ((IntOption 0)) (((none) (some (val Int)))))
"""),
    ("min_opt", ("option",), """
(define-fun min_opt ((a IntOption) (b IntOption)) IntOption
  (ite (is-none a) b (ite (is-none b) a (ite (<= (val a) (val b)) a b))))
"""),
    ("leftmost_op", ("option",), """
(define-fun leftmost_op ((a IntOption) (b IntOption)) IntOption (ite (is-none a) b a))
"""),
    ("rightmost_op", ("option",), """
(define-fun rightmost_op ((a IntOption) (b IntOption)) IntOption (ite (is-none b) a b))
"""),
    ("sortinfo", ("option",), """
(declare-datatypes ((SortInfo 0)) (((mkSortInfo (lo IntOption) (hi IntOption) (ok Bool)))))
"""),
    ("sorted_dup_op", ("sortinfo",), """
(define-fun sorted_dup_op ((a SortInfo) (b SortInfo)) SortInfo
  (ite (and (ok a) (ok b) (or (is-none (hi a)) (is-none (lo b)) (<= (val (hi a)) (val (lo b)))))
       (mkSortInfo (ite (is-none (lo a)) (lo b) (lo a)) (ite (is-none (hi b)) (hi a) (hi b)) true)
       (mkSortInfo none none false)))
"""),
    ("sorted_nodup_op", ("sortinfo",), """
(define-fun sorted_nodup_op ((a SortInfo) (b SortInfo)) SortInfo
  (ite (and (ok a) (ok b) (or (is-none (hi a)) (is-none (lo b)) (< (val (hi a)) (val (lo b)))))
       (mkSortInfo (ite (is-none (lo a)) (lo b) (lo a)) (ite (is-none (hi b)) (hi a) (hi b)) true)
       (mkSortInfo none none false)))
"""),
    ("wordtree", (), """
(declare-datatypes ((WordTree 0)) (((WLeaf) (WNode (wleft WordTree) (word String) (wright WordTree)))))
(declare-fun dirty (String) Bool)
"""),
    ("unittree", (), """
(declare-datatypes ((Unit 0)) (((unit))))
(declare-datatypes ((UnitTree 0)) (((ULeaf) (UNode (uleft UnitTree) (uelem Unit) (uright UnitTree)))))
(declare-datatypes ((IdPair 0)) (((mkIdPair (first Int) (second UnitTree)))))
"""),
]

_SORTED_RANGE = """((c SortInfo))
  (or (and (is-none (lo c)) (is-none (hi c)))
      (and (ok c) (is-some (lo c)) (is-some (hi c)) (<= (val (lo c)) (val (hi c))))))"""

# name -> (surface name, requirements, text)
_BUILTINS: dict[str, tuple[str, tuple[str, ...], str]] = {
    "Set": ("Set", ("tree",), """
(define-catamorphism Set ((t Tree)) (Set Int)
  (ite (is-Leaf t) (as set.empty (Set Int))
       (set.union (Set (left t)) (set.union (set.singleton (elem t)) (Set (right t))))))
(set-cata-class Set associative)
"""),
    "Multiset": ("Multiset", ("tree",), """
(define-catamorphism Multiset ((t Tree)) (Bag Int)
  (ite (is-Leaf t) (as bag.empty (Bag Int))
       (bag.union_disjoint (Multiset (left t)) (bag.union_disjoint (bag (elem t) 1) (Multiset (right t))))))
(set-cata-class Multiset associative)
"""),
    "SizeI": ("SizeI", ("tree",), """
(define-catamorphism SizeI ((t Tree)) Int
  (ite (is-Leaf t) 0 (+ (SizeI (left t)) 1 (SizeI (right t)))))
(declare-range SizeI ((c Int)) (>= c 0))
(set-cata-class SizeI associative)
"""),
    "Size": ("Size", ("tree",), """
(define-catamorphism Size ((t Tree)) Int
  (ite (is-Leaf t) 1 (+ (Size (left t)) 1 (Size (right t)))))
(set-cata-class Size associative)
"""),
    "Sum": ("Sum", ("tree",), """
(define-catamorphism Sum ((t Tree)) Int
  (ite (is-Leaf t) 0 (+ (Sum (left t)) (elem t) (Sum (right t)))))
(set-cata-class Sum associative)
"""),
    "Height": ("Height", ("tree",), """
(define-catamorphism Height ((t Tree)) Int
  (ite (is-Leaf t) 0
       (+ 1 (ite (>= (Height (left t)) (Height (right t))) (Height (left t)) (Height (right t))))))
(declare-range Height ((c Int)) (>= c 0))
(set-cata-class Height (monotonic 1))
"""),
    "List_inorder": ("List_inorder", ("tree",), """
(define-catamorphism List_inorder ((t Tree)) (Seq Int)
  (ite (is-Leaf t) (as seq.empty (Seq Int))
       (seq.++ (List_inorder (left t)) (seq.unit (elem t)) (List_inorder (right t)))))
(set-cata-class List_inorder associative)
"""),
    "List_preorder": ("List_preorder", ("tree",), """
(define-catamorphism List_preorder ((t Tree)) (Seq Int)
  (ite (is-Leaf t) (as seq.empty (Seq Int))
       (seq.++ (seq.unit (elem t)) (List_preorder (left t)) (List_preorder (right t)))))
(set-cata-class List_preorder (monotonic 2))
"""),
    "List_postorder": ("List_postorder", ("tree",), """
(define-catamorphism List_postorder ((t Tree)) (Seq Int)
  (ite (is-Leaf t) (as seq.empty (Seq Int))
       (seq.++ (List_postorder (left t)) (List_postorder (right t)) (seq.unit (elem t)))))
(set-cata-class List_postorder (monotonic 2))
"""),
    "Some": ("Some", ("tree", "option"), """
(define-catamorphism Some ((t Tree)) IntOption
  (ite (is-Leaf t) none (some (elem t))))
(set-cata-class Some (monotonic 1))
"""),
    "Min": ("Min", ("tree", "min_opt"), """
(define-catamorphism Min ((t Tree)) IntOption
  (ite (is-Leaf t) none (min_opt (min_opt (Min (left t)) (some (elem t))) (Min (right t)))))
(set-cata-class Min associative)
"""),
    "Leftmost": ("Leftmost", ("tree", "leftmost_op"), """
(define-catamorphism Leftmost ((t Tree)) IntOption
  (ite (is-Leaf t) none
       (leftmost_op (leftmost_op (Leftmost (left t)) (some (elem t))) (Leftmost (right t)))))
(set-cata-class Leftmost associative)
"""),
    "Rightmost": ("Rightmost", ("tree", "rightmost_op"), """
(define-catamorphism Rightmost ((t Tree)) IntOption
  (ite (is-Leaf t) none
       (rightmost_op (rightmost_op (Rightmost (left t)) (some (elem t))) (Rightmost (right t)))))
(set-cata-class Rightmost associative)
"""),
    "Sortedness_dup": ("Sortedness_dup", ("tree", "sorted_dup_op"), f"""
(define-catamorphism Sortedness_dup ((t Tree)) SortInfo
  (ite (is-Leaf t) (mkSortInfo none none true)
       (sorted_dup_op (sorted_dup_op (Sortedness_dup (left t))
                                     (mkSortInfo (some (elem t)) (some (elem t)) true))
                      (Sortedness_dup (right t)))))
(declare-range Sortedness_dup {_SORTED_RANGE}
(set-cata-class Sortedness_dup associative)
"""),
    "Sortedness_nodup": ("Sortedness_nodup", ("tree", "sorted_nodup_op"), f"""
(define-catamorphism Sortedness_nodup ((t Tree)) SortInfo
  (ite (is-Leaf t) (mkSortInfo none none true)
       (sorted_nodup_op (sorted_nodup_op (Sortedness_nodup (left t))
                                         (mkSortInfo (some (elem t)) (some (elem t)) true))
                        (Sortedness_nodup (right t)))))
(declare-range Sortedness_nodup {_SORTED_RANGE}
(set-cata-class Sortedness_nodup associative)
"""),
    "Mirror": ("Mirror", ("tree",), """
(define-catamorphism Mirror ((t Tree)) Tree
  (ite (is-Leaf t) Leaf (Node (Mirror (right t)) (elem t) (Mirror (left t)))))
"""),
    "DW": ("DW", ("wordtree",), """
(define-catamorphism DW ((t WordTree)) Int
  (ite (is-WLeaf t) 0 (+ (DW (wleft t)) (ite (dirty (word t)) 1 0) (DW (wright t)))))
(declare-range DW ((c Int)) (>= c 0))
(set-cata-class DW associative)
"""),
    "id*": ("IdStar", ("unittree",), """
(define-catamorphism IdStar ((t UnitTree)) IdPair
  (ite (is-ULeaf t) (mkIdPair 0 ULeaf)
       (mkIdPair
         (+ 1 (ite (>= (first (IdStar (uleft t))) (first (IdStar (uright t))))
                   (first (IdStar (uleft t))) (first (IdStar (uright t)))))
         (ite (= (mod (+ 1 (ite (>= (first (IdStar (uleft t))) (first (IdStar (uright t))))
                                (first (IdStar (uleft t))) (first (IdStar (uright t))))) 2) 1)
              (UNode (second (IdStar (uleft t))) unit (second (IdStar (uright t))))
              (UNode (second (IdStar (uleft t))) unit ULeaf)))))
"""),
}

BUILTIN_NAMES = tuple(_BUILTINS)

ASSOCIATIVE_BUILTINS = ("Set", "Multiset", "SizeI", "List_inorder", "Min", "Sum",
                        "Sortedness_dup", "Sortedness_nodup", "Size", "Leftmost", "Rightmost")
NON_ASSOCIATIVE_BUILTINS = ("Height", "List_preorder", "List_postorder", "Mirror", "Some")


def _closure(keys) -> list[str]:
    index = {k: reqs for k, reqs, _ in _SECTIONS}
    seen: list[str] = []

    def visit(k):
        if k in seen:
            return
        for r in index[k]:
            visit(r)
        seen.append(k)

    for k in keys:
        visit(k)
    order = [k for k, _, _ in _SECTIONS]
    return sorted(seen, key=order.index)


def script_text(*names: str) -> str:
    """Self-contained declarations for the named builtins (and whatever
    datatypes and helper functions they need), without ``check-sat``."""
    unknown = [n for n in names if n not in _BUILTINS]
    if unknown:
        raise KeyError(f"unknown builtin catamorphism {unknown[0]}")
    reqs = [r for n in names for r in _BUILTINS[n][1]]
    texts = {k: text for k, _, text in _SECTIONS}
    parts = [texts[k].strip() for k in _closure(reqs)]
    parts += [_BUILTINS[n][2].strip() for n in names]
    return "\n".join(parts) + "\n"


def surface_name(name: str) -> str:
    """Name of the builtin inside scripts (``id*`` is spelled ``IdStar``)."""
    return _BUILTINS[name][0]


@lru_cache(maxsize=1)
def _script():
    from .frontend import parse_script

    return parse_script(script_text(*BUILTIN_NAMES), require_check_sat=False)


def signature() -> Signature:
    """Shared signature holding every builtin; treat as read-only."""
    return _script().signature


def builtin(name: str) -> CataDef:
    if name not in _BUILTINS:
        raise KeyError(f"unknown builtin catamorphism {name}")
    return signature().catas[surface_name(name)]


def sample_tree():
    """``Node(Node(Leaf, 1, Leaf), 2, Leaf)``."""
    from .oracle import leaf, node

    return node(node(leaf(), 1, leaf()), 2, leaf())
