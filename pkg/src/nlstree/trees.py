"""Ternary interaction trees: construction, enumeration, serialization.

Every node has zero or three ordered children, so a tree with k internal
nodes has 3k+1 nodes and 2k+1 leaves.  Nodes are numbered in preorder
(root = 0, children visited in slot order); every downstream map keys on
these ids, which keeps serialization and cache files stable.

An ornamented tree adds, per internal node, a kind ("S" for the diagonal
cubic interaction, "G" for the full trilinear one) and, per edge to a
non-terminal child, a coefficient eps in {-1, 0, 1} used by the
resonance-weight recursion.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BudgetExceededError, TreeParseError, ValidationError

DEFAULT_DEGREE_CAP = 6
DEFAULT_ENUM_LIMIT = 200_000

Kind = str  # "S" | "G"


@dataclass(frozen=True)
class Tree:
    """Ternary tree with a conjugation sign on every node.

    children[v] is None for leaves or the (slot 1, slot 2, slot 3) child
    ids; signs[v] is +1 or -1.
    """

    children: tuple
    signs: tuple

    def __post_init__(self):
        n = len(self.children)
        if n == 0 or len(self.signs) != n:
            raise ValidationError("children and signs must be non-empty and aligned")
        if any(s not in (1, -1) for s in self.signs):
            raise ValidationError("signs must be +1 or -1")
        seen = set()
        for v, kids in enumerate(self.children):
            if kids is None:
                continue
            if len(kids) != 3:
                raise ValidationError(f"node {v} must have 0 or 3 children")
            for c in kids:
                if not (0 <= c < n) or c <= v or c in seen:
                    raise ValidationError(f"bad child id {c} at node {v}")
                seen.add(c)
        if len(seen) != n - 1:
            raise ValidationError("tree is not connected with root 0")

    # -- structure ---------------------------------------------------------

    @property
    def root(self) -> int:
        return 0

    @property
    def size(self) -> int:
        return len(self.children)

    @cached_property
    def internal_ids(self) -> tuple[int, ...]:
        return tuple(v for v, kids in enumerate(self.children) if kids is not None)

    @cached_property
    def leaf_ids(self) -> tuple[int, ...]:
        return tuple(v for v, kids in enumerate(self.children) if kids is None)

    @property
    def degree(self) -> int:
        """Number of internal nodes (k in |T| = 3k+1)."""
        return len(self.internal_ids)

    @cached_property
    def parent(self) -> tuple:
        par = [None] * self.size
        for v, kids in enumerate(self.children):
            if kids is not None:
                for c in kids:
                    par[c] = v
        return tuple(par)

    @cached_property
    def slot(self) -> tuple:
        """1-based child slot of each node within its parent (None at root)."""
        slots = [None] * self.size
        for v, kids in enumerate(self.children):
            if kids is not None:
                for i, c in enumerate(kids):
                    slots[c] = i + 1
        return tuple(slots)

    @cached_property
    def conjugation_parity(self) -> tuple[int, ...]:
        """+1/-1 per node, flipping through every slot-2 step from the root."""
        parity = [0] * self.size
        parity[0] = 1
        for v, kids in enumerate(self.children):
            if kids is not None:
                p = parity[v]
                parity[kids[0]] = p
                parity[kids[1]] = -p
                parity[kids[2]] = p
        return tuple(parity)

    @cached_property
    def eligible_edges(self) -> tuple[tuple[int, int], ...]:
        """(internal node, slot) pairs whose child is itself internal."""
        edges = []
        for v in self.internal_ids:
            for i, c in enumerate(self.children[v]):
                if self.children[c] is not None:
                    edges.append((v, i + 1))
        return tuple(edges)

    def with_signs(self, signs: Sequence[int]) -> "Tree":
        return Tree(self.children, tuple(signs))

    # -- construction ------------------------------------------------------

    @classmethod
    def from_nested(cls, nested, signs: Sequence[int] | None = None) -> "Tree":
        """Build from nested triples; None denotes a leaf.

        Signs are given in preorder and default to all +1.
        """
        children: list = []

        def walk(node) -> int:
            vid = len(children)
            children.append(None)
            if node is not None:
                kids = tuple(walk(sub) for sub in node)
                children[vid] = kids
            return vid

        walk(nested)
        if signs is None:
            signs = (1,) * len(children)
        return cls(tuple(children), tuple(signs))


@dataclass(frozen=True)
class OrnamentedTree:
    """Tree plus per-internal-node kind and per-eligible-edge eps.

    kinds is aligned with base.internal_ids; eps with base.eligible_edges.
    """

    base: Tree
    kinds: tuple
    eps: tuple

    def __post_init__(self):
        if len(self.kinds) != self.base.degree:
            raise ValidationError("one kind per internal node required")
        if any(k not in ("S", "G") for k in self.kinds):
            raise ValidationError("kinds must be 'S' or 'G'")
        if len(self.eps) != len(self.base.eligible_edges):
            raise ValidationError("one eps per internal-to-internal edge required")
        if any(e not in (-1, 0, 1) for e in self.eps):
            raise ValidationError("eps values must be -1, 0 or 1")

    @cached_property
    def _kind_by_node(self) -> dict:
        return dict(zip(self.base.internal_ids, self.kinds))

    @cached_property
    def _eps_by_edge(self) -> dict:
        return dict(zip(self.base.eligible_edges, self.eps))

    def kind_of(self, v: int) -> Kind:
        return self._kind_by_node[v]

    def is_simple(self, v: int) -> bool:
        return self._kind_by_node[v] == "S"

    def eps_of(self, v: int, slot: int) -> int:
        """eps on the edge (v, slot); 0 when the child is terminal."""
        return self._eps_by_edge.get((v, slot), 0)


def make_ornamented(
    base: Tree,
    kinds: Sequence[Kind] | Kind,
    eps: Sequence[int] | None = None,
) -> OrnamentedTree:
    """Convenience wrapper: a single kind applies to every internal node."""
    if isinstance(kinds, str):
        kinds = (kinds,) * base.degree
    if eps is None:
        eps = (0,) * len(base.eligible_edges)
    return OrnamentedTree(base, tuple(kinds), tuple(eps))


# -- enumeration -------------------------------------------------------------


def fuss_catalan(k: int) -> int:
    """Number of ternary tree shapes with k internal nodes."""
    return math.comb(3 * k, k) // (2 * k + 1)


@lru_cache(maxsize=None)
def _shape_structures(k: int) -> tuple:
    if k == 0:
        return (None,)
    shapes = []
    for k1 in range(k):
        for k2 in range(k - k1):
            k3 = k - 1 - k1 - k2
            for s1 in _shape_structures(k1):
                for s2 in _shape_structures(k2):
                    for s3 in _shape_structures(k3):
                        shapes.append((s1, s2, s3))
    return tuple(shapes)


def _check_degree(k: int, cap: int) -> None:
    if k < 0:
        raise ValidationError(f"degree must be >= 0, got {k}")
    if k > cap:
        raise BudgetExceededError(f"degree {k} exceeds the configured cap {cap}")


def enumerate_shapes(k: int, cap: int = DEFAULT_DEGREE_CAP) -> list[Tree]:
    """All ternary tree shapes with k internal nodes, signs all +1."""
    _check_degree(k, cap)
    return [Tree.from_nested(s) for s in _shape_structures(k)]


def enumerate_ornamented(
    k: int,
    with_signs: bool = False,
    with_eps: bool = False,
    cap: int = DEFAULT_DEGREE_CAP,
    limit: int = DEFAULT_ENUM_LIMIT,
) -> list[OrnamentedTree]:
    """All ornamented trees of degree k.

    Kinds always range over {S, G} per internal node.  Signs and eps are
    ranged over only when the corresponding flag is set (they default to
    +1 and 0); the total count is guarded by `limit` before any tree is
    materialised.
    """
    _check_degree(k, cap)
    structures = _shape_structures(k)
    size = 3 * k + 1

    total = 0
    per_shape = []
    for s in structures:
        shape = Tree.from_nested(s)
        n_eps = len(shape.eligible_edges)
        count = 2**k
        if with_eps:
            count *= 3**n_eps
        if with_signs:
            count *= 2**size
        per_shape.append((shape, n_eps))
        total += count
    if total > limit:
        raise BudgetExceededError(
            f"ornamented enumeration would produce {total} trees (limit {limit})"
        )

    out = []
    for shape, n_eps in per_shape:
        if with_signs:
            sign_choices = itertools.product((1, -1), repeat=size)
        else:
            sign_choices = iter(((1,) * size,))
        eps_choices = [(0,) * n_eps]
        if with_eps:
            eps_choices = list(itertools.product((-1, 0, 1), repeat=n_eps))
        for signs in sign_choices:
            base = shape if not with_signs else shape.with_signs(signs)
            for kinds in itertools.product(("S", "G"), repeat=k):
                for eps in eps_choices:
                    out.append(OrnamentedTree(base, kinds, tuple(eps)))
    return out


# -- text form ----------------------------------------------------------------
# leaf     = "L" sign
# internal = "(" kind sign " " child " " child " " child ")"
# where a non-terminal child is prefixed by its eps tag "e-1" | "e0" | "e1".


def serialize(tree: OrnamentedTree) -> str:
    base = tree.base

    def emit(v: int) -> str:
        sign = "+" if base.signs[v] == 1 else "-"
        kids = base.children[v]
        if kids is None:
            return f"L{sign}"
        parts = []
        for i, c in enumerate(kids):
            text = emit(c)
            if base.children[c] is not None:
                text = f"e{tree.eps_of(v, i + 1)}{text}"
            parts.append(text)
        return f"({tree.kind_of(v)}{sign} " + " ".join(parts) + ")"

    return emit(base.root)


def parse(text: str) -> OrnamentedTree:
    """Inverse of serialize; raises TreeParseError with a position on bad input."""
    pos = 0
    n = len(text)

    def fail(msg: str):
        raise TreeParseError(msg, pos)

    def skip_spaces():
        nonlocal pos
        while pos < n and text[pos] == " ":
            pos += 1

    def read_sign() -> int:
        nonlocal pos
        if pos >= n or text[pos] not in "+-":
            fail("expected '+' or '-'")
        s = 1 if text[pos] == "+" else -1
        pos += 1
        return s

    def read_eps() -> int:
        nonlocal pos
        if text.startswith("e-1", pos):
            pos += 3
            return -1
        if text.startswith("e0", pos):
            pos += 2
            return 0
        if text.startswith("e1", pos):
            pos += 2
            return 1
        fail("expected eps tag 'e-1', 'e0' or 'e1'")

    children: list = []
    signs: list = []
    kinds_by_node: dict = {}
    eps_by_edge: dict = {}

    def read_node() -> int:
        nonlocal pos
        skip_spaces()
        if pos >= n:
            fail("unexpected end of input")
        vid = len(children)
        children.append(None)
        signs.append(1)
        if text[pos] == "L":
            pos += 1
            signs[vid] = read_sign()
            return vid
        if text[pos] != "(":
            fail("expected 'L' or '('")
        pos += 1
        if pos >= n or text[pos] not in "SG":
            fail("expected kind 'S' or 'G'")
        kinds_by_node[vid] = text[pos]
        pos += 1
        signs[vid] = read_sign()
        kids = []
        for i in range(3):
            skip_spaces()
            if pos < n and text[pos] == "e":
                eps = read_eps()
                start = pos
                cid = read_node()
                if children[cid] is None:
                    pos = start
                    fail("eps tag attached to a terminal child")
                eps_by_edge[(vid, i + 1)] = eps
            else:
                cid = read_node()
                if children[cid] is not None:
                    fail("missing eps tag before non-terminal child")
            kids.append(cid)
        skip_spaces()
        if pos >= n or text[pos] != ")":
            fail("expected ')'")
        pos += 1
        children[vid] = tuple(kids)
        return vid

    read_node()
    skip_spaces()
    if pos != n:
        fail("trailing characters after tree")

    base = Tree(tuple(children), tuple(signs))
    kinds = tuple(kinds_by_node[v] for v in base.internal_ids)
    eps = tuple(eps_by_edge.get(edge, 0) for edge in base.eligible_edges)
    return OrnamentedTree(base, kinds, eps)


def tree_hash(tree: OrnamentedTree) -> str:
    """Stable 16-hex-digit content hash of the serialized tree."""
    return hashlib.sha256(serialize(tree).encode()).hexdigest()[:16]


# -- cache files --------------------------------------------------------------


def write_tree_cache(path: str | Path, trees: Iterable[OrnamentedTree]) -> None:
    with open(path, "w", newline="") as fh:
        for t in trees:
            fh.write(serialize(t) + "\n")


def read_tree_cache(path: str | Path) -> list[OrnamentedTree]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(parse(line))
    return out
