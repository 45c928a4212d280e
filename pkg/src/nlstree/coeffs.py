"""Oscillatory tree integrals: exact values, Monte-Carlo oracle, bounds.

The coefficient attached to a tree and an admissible assignment is the
integral of  prod_u exp(1j * phi_u * t_u)  over the nested region where
each internal node's time lies below its parent's (and the root's below
t).  phi_u = sign_u * omega * sigma_u is an integer, so the integral is
an ExpPoly in t, built bottom-up:

    F_v(t) = integral_0^t exp(1j*phi_v*s) * prod_{internal children c} F_c(s) ds
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, ValidationError
from .exppoly import ExpPoly, ONE
from .indexsets import IndexAssignment, rho_all, sigma_node
from .trees import OrnamentedTree

DEFAULT_EPS_SUM_CAP = 20_000


@dataclass(frozen=True)
class PhasedTree:
    """Tree, admissible assignment, and the sign omega of the nonlinearity."""

    tree: OrnamentedTree
    assignment: IndexAssignment
    omega: int = 1

    def __post_init__(self):
        if len(self.assignment.j) != self.tree.base.size:
            raise ValidationError("assignment length must match tree size")
        if self.omega not in (1, -1):
            raise ValidationError(f"omega must be +1 or -1, got {self.omega}")

    def phase(self, v: int) -> int:
        return self.tree.base.signs[v] * self.omega * sigma_node(self.tree, self.assignment, v)


def tree_coefficient_exact(pt: PhasedTree, t: float) -> tuple[complex, ExpPoly]:
    """Value at t and the full ExpPoly of the nested oscillatory integral.

    A tree with no internal nodes has coefficient identically 1.
    """
    base = pt.tree.base
    polys: dict[int, ExpPoly] = {}
    for v in reversed(base.internal_ids):
        acc = ONE
        for c in base.children[v]:
            if base.children[c] is not None:
                acc = acc * polys[c]
        polys[v] = acc.phase_shifted(pt.phase(v)).integrate()
    poly = polys.get(base.root, ONE)
    return poly.value(t), poly


@dataclass(frozen=True)
class QuadratureEstimate:
    value: complex
    stderr: float


def tree_coefficient_quadrature(
    pt: PhasedTree, t: float, samples: int = 20_000, seed: int = 0
) -> QuadratureEstimate:
    """Monte-Carlo estimate of the same nested integral, with standard error.

    Draws uniform samples of the nested time region top-down: a node whose
    subtree holds d internal nodes gets  t_parent * U**(1/d)  (the order
    statistic that makes the joint law uniform), and the estimate is the
    region volume times the sample mean of the oscillatory factor.
    """
    if samples < 1000:
        raise ValidationError(f"need at least 1000 samples, got {samples}")
    base = pt.tree.base
    k = base.degree
    if k == 0:
        return QuadratureEstimate(1.0 + 0.0j, 0.0)

    # number of internal nodes in each internal node's subtree
    sub = {v: 1 for v in base.internal_ids}
    for v in reversed(base.internal_ids):
        for c in base.children[v]:
            if base.children[c] is not None:
                sub[v] += sub[c]

    rng = np.random.default_rng(seed)
    col = {v: i for i, v in enumerate(base.internal_ids)}
    times = np.empty((samples, k), dtype=np.float64)
    volume = float(t) ** k
    for v in base.internal_ids:  # preorder: parents before children
        d = sub[v]
        volume /= d
        parent = base.parent[v]
        bound = times[:, col[parent]] if parent is not None else float(t)
        times[:, col[v]] = bound * rng.random(samples) ** (1.0 / d)

    phase_total = np.zeros(samples, dtype=np.float64)
    for v in base.internal_ids:
        phi = pt.phase(v)
        if phi:
            phase_total += phi * times[:, col[v]]
    integrand = np.exp(1j * phase_total)

    mean = integrand.mean()
    var = integrand.real.var(ddof=1) + integrand.imag.var(ddof=1)
    stderr = volume * math.sqrt(var / samples)
    return QuadratureEstimate(volume * mean, stderr)


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    bound_volume: float
    bound_resonance: float
    passed: bool


def coefficient_bound_check(
    pt: PhasedTree, t: float, eps_sum_cap: int = DEFAULT_EPS_SUM_CAP
) -> BoundCheck:
    """Check |I(t)| against its two a-priori bounds for t in [0, 1].

    bound_volume is t**k (the volume of the nested time region); the
    resonance bound is 2**|T| times the sum, over every choice of eps on
    internal-to-internal edges, of prod_w 1/<rho_w>.  The number of eps
    choices is guarded by eps_sum_cap.
    """
    if not (0.0 <= t <= 1.0):
        raise ValidationError(f"t must lie in [0, 1], got {t}")
    tree = pt.tree
    base = tree.base
    value, _ = tree_coefficient_exact(pt, t)
    lhs = abs(value)
    bound_volume = float(t) ** base.degree

    edges = base.eligible_edges
    n_choices = 3 ** len(edges)
    if n_choices > eps_sum_cap:
        raise BudgetExceededError(
            f"resonance bound needs {n_choices} eps choices (cap {eps_sum_cap})"
        )
    total = 0.0
    for combo in itertools.product((-1, 0, 1), repeat=len(edges)):
        override = dict(zip(edges, combo))
        rho = rho_all(tree, pt.assignment, eps_override=override)
        prod = 1.0
        for w in base.internal_ids:
            prod /= math.sqrt(1.0 + rho[w] ** 2)
        total += prod
    bound_resonance = 2.0**base.size * total

    slack = 1e-12
    passed = lhs <= bound_volume + slack and lhs <= bound_resonance * (1 + slack) + slack
    return BoundCheck(lhs, bound_volume, bound_resonance, passed)
