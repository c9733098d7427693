"""Typed feature structures with reentrancy, unification and subsumption.

A feature structure is a rooted, acyclic graph of typed feature/value nodes.
Values are plain Python data: strings (atomic symbols), numbers, tuples
(positional lists), ``None`` (the underspecified value, which unifies with
anything), :class:`VectorRef` (a pointer into a vector store, compared by
similarity rather than symbol equality), or nested :class:`FeatureStructure`
nodes.

Structures are immutable after construction. Reentrancy (structure sharing)
is plain object identity: the same node object reachable through two paths is
one shared value. Because children must exist before their parents, cycles
cannot be built through the public constructor. Every operation returns fresh
nodes and never mutates its inputs, so structures are safe to share freely.

Unification merges two structures into their most general common refinement,
or raises :class:`Clash` carrying the failing path. ``loose_unify`` behaves
identically except where both sides carry a :class:`VectorRef` at the same
path: there the pair is admitted when the cosine of the two vectors reaches a
threshold, and rejected with :class:`SimilarityBelowThreshold` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Optional

TOP = "top"

# Provenance marks, ordered from weakest to strongest.
_PROV_ORDER = {None: 0, "expected": 1, "observed": 2}

# Specificity ranks for vector-refs: slot prototype < stored/event content
# < observed token content.
RANK_SLOT = 0
RANK_MEANING = 1
RANK_OBSERVED = 2


class UnifyError(Exception):
    """Base class for unification failures."""


class Clash(UnifyError):
    """Hard unification failure at a path."""

    def __init__(self, path, left, right, reason="incompatible values"):
        self.path = tuple(path)
        self.left = left
        self.right = right
        self.reason = reason
        super().__init__(
            f"clash at {format_path(self.path)}: {reason} ({left!r} vs {right!r})"
        )


class SimilarityBelowThreshold(UnifyError):
    """Soft failure: two vector-refs fell below the similarity threshold."""

    def __init__(self, path, left, right, score, threshold):
        self.path = tuple(path)
        self.left = left
        self.right = right
        self.score = float(score)
        self.threshold = float(threshold)
        super().__init__(
            f"similarity {self.score:.6f} < {self.threshold:.6f} at "
            f"{format_path(self.path)} ({left.word!r} vs {right.word!r})"
        )


def format_path(path) -> str:
    if not path:
        return "<root>"
    return ".".join(str(p) for p in path)


class _AbsentType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Absent"

    def __bool__(self):
        return False


#: Returned by :func:`resolve_path` when a path segment is missing.
ABSENT = _AbsentType()


@dataclass(frozen=True)
class VectorRef:
    """A pointer to a named vector in a store.

    ``rank`` records how specific the carrier is (slot prototype, stored
    meaning, or observed token); merging two refs keeps the higher rank.
    Rank is bookkeeping, not content: comparisons of refs use the word only.
    """

    word: str
    rank: int = RANK_SLOT

    def with_rank(self, rank: int) -> "VectorRef":
        return VectorRef(self.word, rank)


class TypeHierarchy:
    """A partial order over sort symbols with multiple supertypes.

    Every sort is implicitly below the unique top sort. Greatest-lower-bound
    queries return the set of maximal common subtypes; unification requires
    that set to be a singleton.
    """

    def __init__(self, supertypes: Optional[Mapping[str, Iterable[str]]] = None):
        declared = {k: tuple(v) for k, v in (supertypes or {}).items()}
        self._supers: dict[str, tuple[str, ...]] = declared
        self._up: dict[str, frozenset[str]] = {}
        for tag in declared:
            self._ancestors(tag, ())
        # Downward closure, for GLB queries.
        self._down: dict[str, set[str]] = {}
        for tag in declared:
            for anc in self._up[tag]:
                self._down.setdefault(anc, set()).add(tag)

    def _ancestors(self, tag: str, trail) -> frozenset[str]:
        if tag in self._up:
            return self._up[tag]
        if tag in trail:
            cycle = " -> ".join(trail + (tag,))
            raise ValueError(f"type hierarchy contains a cycle: {cycle}")
        up = {tag, TOP}
        for sup in self._supers.get(tag, ()):
            up |= self._ancestors(sup, trail + (tag,))
        self._up[tag] = frozenset(up)
        return self._up[tag]

    def declared(self) -> dict[str, tuple[str, ...]]:
        return dict(self._supers)

    def ancestors(self, tag: str) -> frozenset[str]:
        return self._up.get(tag, frozenset({tag, TOP}))

    def is_subtype(self, sub: str, sup: str) -> bool:
        """True when ``sub`` is ``sup`` or lies below it."""
        if sub == sup or sup == TOP:
            return True
        return sup in self.ancestors(sub)

    def common_subtypes(self, a: str, b: str) -> tuple[str, ...]:
        """Maximal common subtypes of ``a`` and ``b`` (possibly empty)."""
        if self.is_subtype(a, b):
            return (a,)
        if self.is_subtype(b, a):
            return (b,)
        below_a = self._down.get(a, set())
        below_b = self._down.get(b, set())
        common = below_a & below_b
        maximal = [
            t
            for t in sorted(common)
            if not any(u != t and self.is_subtype(t, u) for u in common)
        ]
        return tuple(maximal)


EMPTY_HIERARCHY = TypeHierarchy()


def _looks_like_tag(name: str) -> bool:
    return len(name) > 1 and name[0] == "#" and name[1:].isdigit()


class FeatureStructure:
    """One node of a typed feature graph.

    ``features`` preserves insertion order; names are unique per node.
    ``prov`` is an optional provenance mark (``"expected"`` for event
    expectations, ``"observed"`` for scanned input) that joins upward on
    unification and never causes a clash.
    """

    __slots__ = ("sort", "_feats", "prov")

    def __init__(self, sort: str = TOP, features=None, prov: Optional[str] = None):
        if not isinstance(sort, str) or not sort:
            raise ValueError(f"sort must be a non-empty string, got {sort!r}")
        feats: dict[str, Any] = {}
        if features:
            items = features.items() if isinstance(features, Mapping) else features
            for name, value in items:
                if not isinstance(name, str) or not name:
                    raise ValueError(f"feature name must be a string, got {name!r}")
                if _looks_like_tag(name):
                    raise ValueError(f"feature name {name!r} collides with tag syntax")
                if name in feats:
                    raise ValueError(f"duplicate feature {name!r}")
                feats[name] = _check_value(value, (name,))
        object.__setattr__(self, "sort", sort)
        object.__setattr__(self, "_feats", feats)
        object.__setattr__(self, "prov", prov)

    def __setattr__(self, name, value):
        raise AttributeError("FeatureStructure is immutable")

    # -- mapping-ish access -------------------------------------------------
    def get(self, name: str, default=ABSENT):
        return self._feats.get(name, default)

    def items(self):
        return self._feats.items()

    def names(self):
        return tuple(self._feats.keys())

    def __contains__(self, name):
        return name in self._feats

    def __len__(self):
        return len(self._feats)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FeatureStructure):
            return NotImplemented
        return structurally_equal(self, other)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None  # identity is meaningful; use id() keys for maps

    def __repr__(self):
        inner = ", ".join(f"{k}: {v!r}" for k, v in self._feats.items())
        sort = "" if self.sort == TOP else f"{self.sort} "
        return f"[{sort}{inner}]"


def _check_value(value, path):
    if value is None or isinstance(value, (str, int, float, FeatureStructure, VectorRef)):
        return value
    if isinstance(value, bool):
        raise ValueError(f"boolean at {format_path(path)}: use atoms instead")
    if isinstance(value, (list, tuple)):
        return tuple(_check_value(v, path + (i,)) for i, v in enumerate(value))
    raise ValueError(f"unsupported value {value!r} at {format_path(path)}")


def resolve_path(fs: FeatureStructure, path) -> Any:
    """Value at ``path`` (feature names, integer indexes into lists).

    Returns :data:`ABSENT` when any segment is missing; never raises.
    """
    current: Any = fs
    for seg in path:
        if isinstance(seg, int):
            if isinstance(current, tuple) and 0 <= seg < len(current):
                current = current[seg]
                continue
            return ABSENT
        if isinstance(current, FeatureStructure):
            current = current.get(seg)
            if current is ABSENT:
                return ABSENT
            continue
        return ABSENT
    return current


def copy_structure(value, transform: Optional[Callable] = None):
    """Deep copy preserving reentrancy; ``transform(node) -> (sort, prov)``
    may adjust node metadata, and is applied to VectorRefs as
    ``transform(ref) -> ref``."""
    memo: dict[int, FeatureStructure] = {}

    def walk(v):
        if isinstance(v, FeatureStructure):
            node = memo.get(id(v))
            if node is not None:
                return node
            feats = {name: walk(child) for name, child in v.items()}
            sort, prov = v.sort, v.prov
            if transform is not None:
                out = transform(v)
                if out is not None:
                    sort, prov = out
            node = FeatureStructure(sort, feats, prov)
            memo[id(v)] = node
            return node
        if isinstance(v, tuple):
            return tuple(walk(x) for x in v)
        if isinstance(v, VectorRef) and transform is not None:
            out = transform(v)
            if out is not None:
                return out
        return v

    return walk(value)


def reachable_nodes(value) -> set[int]:
    """ids of every FeatureStructure node reachable from ``value``."""
    seen: set[int] = set()

    def walk(v):
        if isinstance(v, FeatureStructure):
            if id(v) in seen:
                return
            seen.add(id(v))
            for _, child in v.items():
                walk(child)
        elif isinstance(v, tuple):
            for x in v:
                walk(x)

    walk(value)
    return seen


# ---------------------------------------------------------------------------
# Unification
# ---------------------------------------------------------------------------


class _Group:
    """Union-find group over original nodes during one unification."""

    __slots__ = ("sort", "feats", "prov", "merged_into", "uid")

    _counter = 0

    def __init__(self, fs: FeatureStructure):
        self.sort = fs.sort
        self.feats = dict(fs.items())
        self.prov = fs.prov
        self.merged_into = None
        _Group._counter += 1
        self.uid = _Group._counter


class _Unifier:
    """One unification run. ``vec_gate(path, left, right)`` decides what a
    meeting of two vector-refs yields; ``on_conflict(path, left, right,
    prov_l, prov_r)`` may resolve a hard clash by electing a side."""

    def __init__(self, hierarchy, vec_gate, on_conflict=None):
        self.h = hierarchy or EMPTY_HIERARCHY
        self.vec_gate = vec_gate
        self.on_conflict = on_conflict
        self.groups: dict[int, _Group] = {}
        self.pinned: list[FeatureStructure] = []  # keep originals alive

    def find(self, fs: FeatureStructure) -> _Group:
        g = self.groups.get(id(fs))
        if g is None:
            g = _Group(fs)
            self.groups[id(fs)] = g
            self.pinned.append(fs)
        while g.merged_into is not None:
            g = g.merged_into
        return g

    def _resolve_sort(self, ga: _Group, gb: _Group, path) -> str:
        if ga.sort == gb.sort:
            return ga.sort
        candidates = self.h.common_subtypes(ga.sort, gb.sort)
        if len(candidates) == 1:
            return candidates[0]
        if self.on_conflict is not None:
            side = self.on_conflict(path, ga.sort, gb.sort, ga.prov, gb.prov)
            # The elected side's node content wins wholesale; the loser's
            # features are dropped so stale content cannot clash downstream.
            if side == "left":
                gb.feats = {}
                return ga.sort
            if side == "right":
                ga.feats.clear()
                ga.feats.update(gb.feats)
                gb.feats = {}
                return gb.sort
        reason = "no common subtype" if not candidates else "ambiguous common subtype"
        raise Clash(path, ga.sort, gb.sort, reason)

    def merge(self, a: FeatureStructure, b: FeatureStructure, path=()):
        ga, gb = self.find(a), self.find(b)
        if ga is gb:
            return
        prov_a, prov_b = ga.prov, gb.prov
        ga.sort = self._resolve_sort(ga, gb, path)
        if _PROV_ORDER[gb.prov] > _PROV_ORDER[ga.prov]:
            ga.prov = gb.prov
        gb.merged_into = ga
        pending = gb.feats
        gb.feats = {}
        # Sorted traversal keeps the first-discovered clash path independent
        # of operand order.
        for name in sorted(pending):
            if name in ga.feats:
                ga.feats[name] = self.merge_value(
                    ga.feats[name], pending[name], path + (name,), prov_a, prov_b
                )
            else:
                ga.feats[name] = pending[name]

    def merge_value(self, x, y, path, prov_l=None, prov_r=None):
        if x is None:
            return y
        if y is None:
            return x
        x_fs, y_fs = isinstance(x, FeatureStructure), isinstance(y, FeatureStructure)
        if x_fs and y_fs:
            self.merge(x, y, path)
            return x
        if x_fs or y_fs:
            raise Clash(path, x, y, "structure vs non-structure")
        if isinstance(x, VectorRef) and isinstance(y, VectorRef):
            return self.vec_gate(path, x, y)
        if isinstance(x, VectorRef) or isinstance(y, VectorRef):
            raise Clash(path, x, y, "vector-ref vs non-vector value")
        if isinstance(x, tuple) and isinstance(y, tuple):
            if len(x) != len(y):
                raise Clash(path, x, y, f"list length {len(x)} vs {len(y)}")
            return tuple(
                self.merge_value(xi, yi, path + (i,), prov_l, prov_r)
                for i, (xi, yi) in enumerate(zip(x, y))
            )
        if isinstance(x, tuple) or isinstance(y, tuple):
            raise Clash(path, x, y, "list vs non-list value")
        if isinstance(x, str) != isinstance(y, str):
            raise Clash(path, x, y, "atom vs number")
        if x == y:
            return x
        if self.on_conflict is not None:
            side = self.on_conflict(path, x, y, prov_l, prov_r)
            if side == "left":
                return x
            if side == "right":
                return y
        raise Clash(path, x, y)

    def rebuild(self, root: FeatureStructure) -> FeatureStructure:
        memo: dict[int, FeatureStructure] = {}
        building: set[int] = set()

        def build_node(g: _Group) -> FeatureStructure:
            if g.uid in memo:
                return memo[g.uid]
            if g.uid in building:
                raise Clash((), g.sort, g.sort, "unification produced a cycle")
            building.add(g.uid)
            feats = {name: build_value(v) for name, v in g.feats.items()}
            building.discard(g.uid)
            node = FeatureStructure(g.sort, feats, g.prov)
            memo[g.uid] = node
            return node

        def build_value(v):
            if isinstance(v, FeatureStructure):
                g = self.find(v)
                return build_node(g)
            if isinstance(v, tuple):
                return tuple(build_value(x) for x in v)
            return v

        return build_node(self.find(root))


def _strict_vec_gate(path, left: VectorRef, right: VectorRef) -> VectorRef:
    if left.word != right.word:
        raise Clash(path, left, right, "distinct vector-refs under strict unification")
    return left if left.rank >= right.rank else right


def make_loose_vec_gate(store, sim_threshold: float, record=None):
    """Gate admitting vector pairs whose cosine reaches ``sim_threshold``.

    ``record``, when given, is called with (path, left, right, score) on
    every vector meeting, successful or not, before the outcome is decided.
    """
    from . import vectors  # local import: fs stays independent of numpy

    def gate(path, left: VectorRef, right: VectorRef) -> VectorRef:
        if left.word == right.word:
            score = 1.0
        else:
            u = store.get(left.word) if store is not None else None
            v = store.get(right.word) if store is not None else None
            if u is None or v is None:
                missing = left.word if u is None else right.word
                raise Clash(path, left, right, f"vector {missing!r} not in store")
            score = vectors.cosine(u, v)
        if record is not None:
            record(path, left, right, score)
        if score < sim_threshold:
            raise SimilarityBelowThreshold(path, left, right, score, sim_threshold)
        if left.rank >= right.rank:
            return left
        return right

    return gate


def unify(
    a: FeatureStructure,
    b: FeatureStructure,
    hierarchy: Optional[TypeHierarchy] = None,
) -> FeatureStructure:
    """Most general common refinement of ``a`` and ``b``.

    Raises :class:`Clash` (with the failing path) when the two carry
    incompatible information. Inputs are never mutated; reentrancies of both
    are merged into the result.
    """
    u = _Unifier(hierarchy, _strict_vec_gate)
    u.merge(a, b)
    return u.rebuild(a)


def loose_unify(
    a: FeatureStructure,
    b: FeatureStructure,
    hierarchy: Optional[TypeHierarchy] = None,
    store=None,
    sim_threshold: float = 0.6,
) -> FeatureStructure:
    """Like :func:`unify`, but vector-ref pairs match by cosine similarity.

    A pair passes when cosine >= ``sim_threshold``; the surviving ref is the
    higher-ranked (more specific) side, the left operand on ties. Failures
    raise :class:`SimilarityBelowThreshold`, distinguishable from a hard
    :class:`Clash`. All non-vector content behaves exactly as strict
    unification.
    """
    u = _Unifier(hierarchy, make_loose_vec_gate(store, sim_threshold))
    u.merge(a, b)
    return u.rebuild(a)


def unify_with(
    a: FeatureStructure,
    pairs,
    hierarchy=None,
    vec_gate=None,
    on_conflict=None,
) -> FeatureStructure:
    """Merge each (node, node) pair inside one context and rebuild from ``a``.

    Internal workhorse for grafting daughters into slots: the pairs may name
    interior nodes of ``a``. Uses the strict gate unless ``vec_gate`` is
    given.
    """
    u = _Unifier(hierarchy, vec_gate or _strict_vec_gate, on_conflict)
    for x, y in pairs:
        u.merge_value(x, y, ())
    return u.rebuild(a)


# ---------------------------------------------------------------------------
# Subsumption and structural equality
# ---------------------------------------------------------------------------


def subsumes(
    general: FeatureStructure,
    specific: FeatureStructure,
    hierarchy: Optional[TypeHierarchy] = None,
) -> bool:
    """True iff every path, value, and reentrancy of ``general`` is present
    (possibly more specific under the hierarchy) in ``specific``."""
    h = hierarchy or EMPTY_HIERARCHY
    mapping: dict[int, int] = {}

    def walk(g, s) -> bool:
        if g is None:
            return True
        if isinstance(g, FeatureStructure):
            if not isinstance(s, FeatureStructure):
                return False
            prior = mapping.get(id(g))
            if prior is not None:
                return prior == id(s)
            mapping[id(g)] = id(s)
            if not h.is_subtype(s.sort, g.sort):
                return False
            for name, gv in g.items():
                sv = s.get(name)
                if sv is ABSENT or not walk(gv, sv):
                    return False
            return True
        if isinstance(s, FeatureStructure):
            return False
        if isinstance(g, VectorRef):
            return isinstance(s, VectorRef) and g.word == s.word
        if isinstance(s, VectorRef):
            return False
        if isinstance(g, tuple):
            return (
                isinstance(s, tuple)
                and len(g) == len(s)
                and all(walk(gi, si) for gi, si in zip(g, s))
            )
        if isinstance(s, tuple):
            return False
        if isinstance(g, str) != isinstance(s, str):
            return False
        return g == s

    return walk(general, specific)


def structurally_equal(
    a: FeatureStructure,
    b: FeatureStructure,
    hierarchy: Optional[TypeHierarchy] = None,
) -> bool:
    """Equality up to node-id renaming: mutual subsumption."""
    return subsumes(a, b, hierarchy) and subsumes(b, a, hierarchy)
