"""Admissible mode assignments on trees, resonance phases, frozen nodes.

An assignment attaches an integer mode j_v to every node.  It is
admissible when

  * cyclicity   j_v = j_(v,1) - j_(v,2) + j_(v,3)   at every internal node,
  * exclusion   {j_v, j_(v,2)} and {j_(v,1), j_(v,3)} are disjoint at
                "G" nodes (equivalently j_(v,2) differs from both outer
                children), and
  * equality    j_v = j_(v,i) for all i at "S" nodes.

Leaf values determine the rest by ascending induction, so enumeration
ranges leaf tuples over [-N, N] and completes upward; internal values may
exceed N.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BudgetExceededError, ValidationError
from .trees import OrnamentedTree

DEFAULT_ASSIGNMENT_BUDGET = 2_000_000


@dataclass(frozen=True)
class IndexAssignment:
    """Integer mode per node, aligned with preorder node ids."""

    j: tuple[int, ...]

    def __getitem__(self, v: int) -> int:
        return self.j[v]


@dataclass(frozen=True)
class FrozenParams:
    """Smallness parameters (c0, delta) of the frozen-node test."""

    c0: float = 0.25
    delta: float = 0.1

    def __post_init__(self):
        # c0 <= 1/4 keeps a "G" node with three terminal children alive
        # whenever its resonance is nonzero (|sigma| >= 2 forces
        # |sigma|^delta > c0).
        if not (0.0 < self.c0 <= 0.25):
            raise ValidationError(f"c0 must lie in (0, 0.25], got {self.c0}")
        if not (0.0 < self.delta < 1.0):
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class CompletionReject:
    """Why a leaf tuple failed to complete: the node and the constraint."""

    node: int
    constraint: str  # "exclusion" | "simplicity"


def sigma(j: int, k: int, l: int, n: int) -> int:
    """Resonance n^2 - j^2 + k^2 - l^2 of one cubic interaction."""
    return n * n - j * j + k * k - l * l


def sigma_node(tree: OrnamentedTree, a: IndexAssignment, v: int) -> int:
    """Resonance at node v; 0 at terminal nodes.

    On cyclic assignments this equals 2*(j_v - j_(v,1))*(j_v - j_(v,3)).
    """
    kids = tree.base.children[v]
    if kids is None:
        return 0
    c1, c2, c3 = kids
    return sigma(a.j[c1], a.j[c2], a.j[c3], a.j[v])


def rho_node(tree: OrnamentedTree, a: IndexAssignment, v: int) -> int:
    """Accumulated resonance weight: sigma_v plus eps-weighted child weights.

    Zero at terminal nodes; depends only on the subtree below v.
    """
    kids = tree.base.children[v]
    if kids is None:
        return 0
    total = sigma_node(tree, a, v)
    for i, c in enumerate(kids):
        if tree.base.children[c] is not None:
            e = tree.eps_of(v, i + 1)
            if e:
                total += e * rho_node(tree, a, c)
    return total


def rho_all(
    tree: OrnamentedTree,
    a: IndexAssignment,
    eps_override: dict | None = None,
) -> dict[int, int]:
    """Resonance weights for every node in one bottom-up pass.

    eps_override, when given, maps (node, slot) -> eps and replaces the
    tree's stored ornaments (used when summing bounds over all choices).
    """
    base = tree.base
    rho: dict[int, int] = {}
    for v in reversed(range(base.size)):
        kids = base.children[v]
        if kids is None:
            rho[v] = 0
            continue
        total = sigma_node(tree, a, v)
        for i, c in enumerate(kids):
            if base.children[c] is not None:
                if eps_override is not None:
                    e = eps_override.get((v, i + 1), 0)
                else:
                    e = tree.eps_of(v, i + 1)
                if e:
                    total += e * rho[c]
        rho[v] = total
    return rho


def complete_assignment(
    tree: OrnamentedTree, leaf_values: Sequence[int]
) -> IndexAssignment | CompletionReject:
    """Fill internal modes from leaf values by ascending induction.

    leaf_values is aligned with tree.base.leaf_ids.  Returns the full
    assignment, or a CompletionReject naming the first internal node where
    exclusion (at "G" nodes) or equality (at "S" nodes) fails.
    """
    base = tree.base
    if len(leaf_values) != len(base.leaf_ids):
        raise ValidationError("one integer per terminal node required")
    j = [0] * base.size
    for leaf, value in zip(base.leaf_ids, leaf_values):
        j[leaf] = int(value)
    # Preorder puts children after parents, so reversed order is bottom-up.
    for v in reversed(base.internal_ids):
        c1, c2, c3 = base.children[v]
        j1, j2, j3 = j[c1], j[c2], j[c3]
        if tree.is_simple(v):
            if not (j1 == j2 == j3):
                return CompletionReject(v, "simplicity")
            j[v] = j1
        else:
            jv = j1 - j2 + j3
            if j2 == j1 or j2 == j3:  # equivalent to {jv, j2} meeting {j1, j3}
                return CompletionReject(v, "exclusion")
            j[v] = jv
    return IndexAssignment(tuple(j))


def enumerate_assignments(
    tree: OrnamentedTree,
    n_cutoff: int,
    budget: int = DEFAULT_ASSIGNMENT_BUDGET,
) -> list[IndexAssignment]:
    """All admissible assignments with leaf values in [-N, N].

    The raw leaf-tuple count (2N+1)^(#leaves) is guarded by `budget`.
    """
    if n_cutoff < 0:
        raise ValidationError(f"cutoff must be >= 0, got {n_cutoff}")
    n_leaves = len(tree.base.leaf_ids)
    raw = (2 * n_cutoff + 1) ** n_leaves
    if raw > budget:
        raise BudgetExceededError(
            f"assignment enumeration needs {raw} leaf tuples (budget {budget})"
        )
    values = range(-n_cutoff, n_cutoff + 1)
    out = []
    for tup in itertools.product(values, repeat=n_leaves):
        result = complete_assignment(tree, tup)
        if isinstance(result, IndexAssignment):
            out.append(result)
    return out


@dataclass(frozen=True)
class FrozenClassification:
    """Per-internal-node frozen/alive labels plus the exceptional subset."""

    labels: dict
    exceptional: frozenset

    def frozen_set(self) -> frozenset:
        return frozenset(v for v, lab in self.labels.items() if lab == "frozen")


def classify_frozen(
    tree: OrnamentedTree, a: IndexAssignment, fp: FrozenParams = FrozenParams()
) -> FrozenClassification:
    """Label each internal node frozen or alive for this assignment.

    A node is frozen when |rho_v| <= c0 * |sigma_v|^(1-delta), and
    exceptional when rho_v = 0; exceptional nodes are always frozen.
    Uses the tree's stored eps ornaments.
    """
    rho = rho_all(tree, a)
    labels = {}
    exceptional = set()
    for v in tree.base.internal_ids:
        s = abs(sigma_node(tree, a, v))
        r = abs(rho[v])
        if r == 0:
            exceptional.add(v)
        frozen = r <= fp.c0 * s ** (1.0 - fp.delta)
        labels[v] = "frozen" if frozen else "alive"
    return FrozenClassification(labels, frozenset(exceptional))


def weathered_partition(
    tree: OrnamentedTree,
    n_cutoff: int,
    fp: FrozenParams = FrozenParams(),
    budget: int = DEFAULT_ASSIGNMENT_BUDGET,
) -> dict[frozenset, list[IndexAssignment]]:
    """Partition all admissible assignments by their frozen node set.

    The fibers are pairwise disjoint and together exhaust the output of
    enumerate_assignments(tree, n_cutoff).
    """
    fibers: dict[frozenset, list[IndexAssignment]] = {}
    for a in enumerate_assignments(tree, n_cutoff, budget):
        key = classify_frozen(tree, a, fp).frozen_set()
        fibers.setdefault(key, []).append(a)
    return fibers


def divisor_count(m: int) -> int:
    """Number of ordered factorizations m = d * (m/d) over positive divisors."""
    if m < 1:
        raise ValidationError(f"argument must be >= 1, got {m}")
    count = 0
    d = 1
    while d * d <= m:
        if m % d == 0:
            count += 1 if d * d == m else 2
        d += 1
    return count


# -- CSV dumps -----------------------------------------------------------------
# Assignment blocks are `node_id,j` rows separated by blank lines.


def write_assignments(path: str | Path, assignments: Iterable[IndexAssignment]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id", "j"])
        first = True
        for a in assignments:
            if not first:
                fh.write("\n")
            first = False
            for v, jv in enumerate(a.j):
                writer.writerow([v, jv])
