"""Oscillatory tree integrals against quadrature and a-priori bounds."""

import cmath

import numpy as np
import pytest

from nlstree.coeffs import (
    PhasedTree,
    coefficient_bound_check,
    tree_coefficient_exact,
    tree_coefficient_quadrature,
)
from nlstree.errors import ValidationError
from nlstree.indexsets import IndexAssignment, complete_assignment, enumerate_assignments
from nlstree.trees import Tree, enumerate_ornamented, make_ornamented


def _leaf_tree():
    return make_ornamented(Tree.from_nested(None), ())


def _k1(kind="G"):
    return make_ornamented(Tree.from_nested((None, None, None)), kind)


def test_single_leaf_is_one():
    pt = PhasedTree(_leaf_tree(), IndexAssignment((3,)))
    value, poly = tree_coefficient_exact(pt, 0.37)
    assert value == 1.0
    est = tree_coefficient_quadrature(pt, 0.37)
    assert est.value == 1.0 and est.stderr == 0.0


def test_one_node_zero_phase_gives_t():
    sim = _k1("S")
    pt = PhasedTree(sim, complete_assignment(sim, (2, 2, 2)))
    value, _ = tree_coefficient_exact(pt, 0.61)
    assert value == pytest.approx(0.61)
    est = tree_coefficient_quadrature(pt, 0.61, samples=5000, seed=1)
    assert abs(est.value - 0.61) <= max(3 * est.stderr, 1e-12)


def test_one_node_phase_two_closed_form():
    # phase sign * omega * sigma = 2 needs sigma = 2: leaves (1, 0, 2) -> root 3?
    # sigma = 2(n-j)(n-l): choose leaves (2, 0, 3): n = 5, sigma = 2*3*2 = 12.
    # Simplest hand case: leaves (0, -1, 0): n = 1, sigma = 2*1*1 = 2.
    gen = _k1("G")
    a = complete_assignment(gen, (0, -1, 0))
    assert isinstance(a, IndexAssignment) and a.j[0] == 1
    pt = PhasedTree(gen, a, omega=1)
    assert pt.phase(0) == 2
    value, _ = tree_coefficient_exact(pt, 1.0)
    expected = (cmath.exp(2j) - 1.0) / 2j  # ~ 0.45465 + 0.70807j
    assert value == pytest.approx(expected)
    est = tree_coefficient_quadrature(pt, 1.0, samples=40_000, seed=3)
    assert abs(value - est.value) <= 4 * est.stderr


def test_omega_and_sign_flip_conjugate_phase():
    gen = _k1("G")
    a = complete_assignment(gen, (0, -1, 0))
    plus = tree_coefficient_exact(PhasedTree(gen, a, omega=1), 0.8)[0]
    minus = tree_coefficient_exact(PhasedTree(gen, a, omega=-1), 0.8)[0]
    assert minus == pytest.approx(plus.conjugate())
    flipped = gen.base.with_signs((-1, 1, 1, 1))
    neg = make_ornamented(flipped, "G")
    via_sign = tree_coefficient_exact(PhasedTree(neg, a, omega=1), 0.8)[0]
    assert via_sign == pytest.approx(minus)


def test_exact_vs_quadrature_all_small_trees():
    rng = np.random.default_rng(11)
    for k in (1, 2):
        for tree in enumerate_ornamented(k):
            assigns = enumerate_assignments(tree, 3)
            if not assigns:
                continue
            idx = rng.choice(len(assigns), size=min(2, len(assigns)), replace=False)
            for i in idx:
                pt = PhasedTree(tree, assigns[i])
                for t in (0.3, 1.0):
                    value, _ = tree_coefficient_exact(pt, t)
                    est = tree_coefficient_quadrature(pt, t, samples=20_000, seed=5)
                    assert abs(value - est.value) <= max(4 * est.stderr, 1e-12)


def test_volume_bound_everywhere():
    for k in (0, 1, 2):
        for tree in enumerate_ornamented(k):
            for a in enumerate_assignments(tree, 2)[:20]:
                pt = PhasedTree(tree, a)
                for t in (0.3, 1.0):
                    value, _ = tree_coefficient_exact(pt, t)
                    assert abs(value) <= t**k + 1e-12


def test_bound_check_examples():
    pt = PhasedTree(_leaf_tree(), IndexAssignment((0,)))
    check = coefficient_bound_check(pt, 1.0)
    assert check.passed and check.lhs == pytest.approx(1.0)

    sim = _k1("S")
    pt2 = PhasedTree(sim, complete_assignment(sim, (1, 1, 1)))
    check2 = coefficient_bound_check(pt2, 0.5)
    assert check2.passed
    assert check2.lhs == pytest.approx(0.5)
    assert check2.bound_volume == pytest.approx(0.5)  # equality case


def test_bound_check_exhaustive_small():
    rng = np.random.default_rng(23)
    for k in (1, 2):
        for tree in enumerate_ornamented(k):
            assigns = enumerate_assignments(tree, 3)
            if not assigns:
                continue
            idx = rng.choice(len(assigns), size=min(3, len(assigns)), replace=False)
            for i in idx:
                pt = PhasedTree(tree, assigns[i])
                for t in (0.3, 1.0):
                    assert coefficient_bound_check(pt, t).passed


def test_phase_multiset_invariance():
    # the integral depends on the assignment only through the node phases:
    # mirror trees whose root and child resonances match give equal values
    left = make_ornamented(
        Tree.from_nested(((None, None, None), None, None)), ("G", "G")
    )
    right = make_ornamented(
        Tree.from_nested((None, None, (None, None, None))), ("G", "G")
    )
    a_left = complete_assignment(left, (1, 0, 2, 0, 1))
    a_right = complete_assignment(right, (1, 0, 1, 0, 2))
    assert isinstance(a_left, IndexAssignment) and isinstance(a_right, IndexAssignment)
    pl = PhasedTree(left, a_left)
    pr = PhasedTree(right, a_right)
    # same phase at the internal child and at the root
    child_l = left.base.internal_ids[1]
    child_r = right.base.internal_ids[1]
    assert pl.phase(child_l) == pr.phase(child_r)
    assert pl.phase(0) == pr.phase(0)
    vl, _ = tree_coefficient_exact(pl, 0.9)
    vr, _ = tree_coefficient_exact(pr, 0.9)
    assert vl == pytest.approx(vr)


def test_quadrature_validation():
    pt = PhasedTree(_leaf_tree(), IndexAssignment((0,)))
    with pytest.raises(ValidationError):
        tree_coefficient_quadrature(pt, 1.0, samples=10)
    with pytest.raises(ValidationError):
        coefficient_bound_check(pt, 1.5)
    with pytest.raises(ValidationError):
        PhasedTree(_k1("G"), IndexAssignment((0,)))
