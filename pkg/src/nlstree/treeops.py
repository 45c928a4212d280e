"""Multilinear tree operators on sparse mode sequences.

eval_tree_operator sums, over all admissible assignments whose leaf
values come from the input supports, the oscillatory tree integral times
the product of leaf amplitudes.  The sum runs bottom-up: constraints,
phases and weights are all local to one internal node given its
children's modes, so each node carries a sparse map

    mode j  ->  exponential polynomial in s

and the parent combines child maps over (j1, j2, j3) triples.  This is
exactly the leaf-tuple sum, reorganised so sparse data stays cheap.

The simplified l1 operator drops the oscillatory factor and every
constraint except cyclicity; the majorant operator replaces the integral
by the product of inverse resonance weights 1/<rho_u> and can be
restricted to one frozen fiber.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import BudgetExceededError, ValidationError
from .exppoly import ExpPoly, mul_accumulate, mul_terms
from .indexsets import (
    DEFAULT_ASSIGNMENT_BUDGET,
    FrozenParams,
    IndexAssignment,
    classify_frozen,
    complete_assignment,
    rho_all,
)
from .modes import ModeSequence
from .trees import OrnamentedTree, Tree


class CompensatedSum:
    """Neumaier compensated accumulator for complex values."""

    __slots__ = ("_sr", "_si", "_cr", "_ci")

    def __init__(self):
        self._sr = self._si = 0.0
        self._cr = self._ci = 0.0

    def add(self, z: complex) -> None:
        self._sr, self._cr = _neumaier(self._sr, self._cr, z.real)
        self._si, self._ci = _neumaier(self._si, self._ci, z.imag)

    @property
    def total(self) -> complex:
        return complex(self._sr + self._cr, self._si + self._ci)


def _neumaier(s: float, c: float, x: float) -> tuple[float, float]:
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


@dataclass(frozen=True)
class LeafInputs:
    """One sequence per terminal node, plus its conjugation flag.

    Both tuples are aligned with tree.base.leaf_ids; a flagged slot means
    the operator is conjugate-linear in that argument.
    """

    sequences: tuple[ModeSequence, ...]
    conjugate: tuple[bool, ...]

    def __post_init__(self):
        if len(self.sequences) != len(self.conjugate):
            raise ValidationError("sequences and conjugation flags must align")

    @classmethod
    def uniform(cls, tree: OrnamentedTree | Tree, x: ModeSequence) -> "LeafInputs":
        """Same input on every leaf; flags taken from the leaf signs."""
        base = tree.base if isinstance(tree, OrnamentedTree) else tree
        leaves = base.leaf_ids
        flags = tuple(base.signs[w] == -1 for w in leaves)
        return cls((x,) * len(leaves), flags)


def _guard_leaf_budget(supports: list[list[int]], budget: int) -> None:
    raw = 1
    for s in supports:
        raw *= len(s)
        if raw > budget:
            raise BudgetExceededError(
                f"leaf tuple count exceeds the budget {budget}"
            )


def eval_tree_operator(
    tree: OrnamentedTree,
    inputs: LeafInputs,
    time: float,
    n_cutoff: int,
    omega: int = 1,
    budget: int = DEFAULT_ASSIGNMENT_BUDGET,
) -> ModeSequence:
    """Apply the tree operator at the given time.

    Leaf values range over each input's support clipped to [-N, N];
    internal modes are derived and may exceed N.  Conjugation flags apply
    to leaf amplitudes; node phases are sign_v * omega * sigma_v.
    """
    if omega not in (1, -1):
        raise ValidationError(f"omega must be +1 or -1, got {omega}")
    base = tree.base
    if len(inputs.sequences) != len(base.leaf_ids):
        raise ValidationError("one input sequence per terminal node required")

    # Per node: dict j -> term dict of an ExpPoly in s.
    table: dict[int, dict[int, dict]] = {}
    supports = []
    for pos, leaf in enumerate(base.leaf_ids):
        seq = inputs.sequences[pos]
        conj = inputs.conjugate[pos]
        entry: dict[int, dict] = {}
        for n, v in seq.items():
            if abs(n) <= n_cutoff:
                entry[n] = {(0, 0): v.conjugate() if conj else v}
        supports.append(list(entry))
        table[leaf] = entry
    _guard_leaf_budget(supports, budget)

    for v in reversed(base.internal_ids):
        c1, c2, c3 = base.children[v]
        h1, h2, h3 = table.pop(c1), table.pop(c2), table.pop(c3)
        simple = tree.is_simple(v)
        sgn = base.signs[v] * omega
        acc: dict[int, dict] = {}
        for j1, p1 in h1.items():
            for j2, p2 in h2.items():
                if simple and j2 != j1:
                    continue
                pair = mul_terms(p1, p2)
                for j3, p3 in h3.items():
                    if simple:
                        if j3 != j1:
                            continue
                        jv, phase = j1, 0
                    else:
                        if j2 == j1 or j2 == j3:  # exclusion at "G" nodes
                            continue
                        jv = j1 - j2 + j3
                        phase = sgn * 2 * (jv - j1) * (jv - j3)
                    out = acc.get(jv)
                    if out is None:
                        out = acc[jv] = {}
                    mul_accumulate(out, pair, p3, phase, 1.0)
        table[v] = {j: _integrate_terms(d) for j, d in acc.items()}

    root_entry = table[base.root]
    values = {}
    for j, terms in root_entry.items():
        total = CompensatedSum()
        for (p, theta), c in terms.items():
            term = c
            if p:
                term = term * float(time) ** p
            if theta:
                term = term * complex(math.cos(theta * time), math.sin(theta * time))
            total.add(term)
        values[j] = total.total
    return ModeSequence.from_dict(values)


def _integrate_terms(terms: dict) -> dict:
    return ExpPoly(terms).integrate().term_dict()


def eval_l1_operator(tree: OrnamentedTree | Tree, inputs: LeafInputs) -> ModeSequence:
    """Simplified operator: cyclicity only, no oscillation, no kind constraints.

    Values enter without conjugation; on nonnegative inputs the output's l1
    norm equals the product of the inputs' l1 norms exactly.
    """
    base = tree.base if isinstance(tree, OrnamentedTree) else tree
    if len(inputs.sequences) != len(base.leaf_ids):
        raise ValidationError("one input sequence per terminal node required")
    table: dict[int, dict[int, complex]] = {}
    for pos, leaf in enumerate(base.leaf_ids):
        table[leaf] = dict(inputs.sequences[pos].items())
    for v in reversed(base.internal_ids):
        c1, c2, c3 = base.children[v]
        h1, h2, h3 = table.pop(c1), table.pop(c2), table.pop(c3)
        acc: dict[int, complex] = {}
        for j1, a1 in h1.items():
            for j2, a2 in h2.items():
                a12 = a1 * a2
                base_j = j1 - j2
                for j3, a3 in h3.items():
                    jv = base_j + j3
                    acc[jv] = acc.get(jv, 0.0) + a12 * a3
        table[v] = acc
    return ModeSequence.from_dict(table[base.root])


def eval_majorant(
    tree: OrnamentedTree,
    inputs: LeafInputs,
    n_cutoff: int,
    frozen_filter: frozenset | None = None,
    fp: FrozenParams = FrozenParams(),
    budget: int = DEFAULT_ASSIGNMENT_BUDGET,
) -> ModeSequence:
    """Weighted absolute-value surrogate of the tree operator.

    Sums prod_u 1/<rho_u> * prod_w y_w(j_w) over admissible assignments
    with leaf values in the input supports clipped to [-N, N].  With a
    frozen_filter, only assignments whose frozen node set equals the
    filter contribute; summing the filtered results over all subsets
    reproduces the unfiltered value exactly.
    """
    base = tree.base
    if len(inputs.sequences) != len(base.leaf_ids):
        raise ValidationError("one input sequence per terminal node required")
    supports = []
    for pos in range(len(base.leaf_ids)):
        supports.append(
            [(n, v) for n, v in inputs.sequences[pos].items() if abs(n) <= n_cutoff]
        )
    _guard_leaf_budget([[n for n, _ in s] for s in supports], budget)

    acc: dict[int, CompensatedSum] = {}
    for combo in itertools.product(*supports):
        leaf_values = [n for n, _ in combo]
        result = complete_assignment(tree, leaf_values)
        if not isinstance(result, IndexAssignment):
            continue
        if frozen_filter is not None:
            frozen = classify_frozen(tree, result, fp).frozen_set()
            if frozen != frozen_filter:
                continue
        rho = rho_all(tree, result)
        weight = 1.0
        for u in base.internal_ids:
            weight /= math.sqrt(1.0 + rho[u] ** 2)
        product = complex(weight)
        for _, v in combo:
            product *= v
        jv = result.j[base.root]
        cell = acc.get(jv)
        if cell is None:
            cell = acc[jv] = CompensatedSum()
        cell.add(product)
    return ModeSequence.from_dict({n: cell.total for n, cell in acc.items()})
