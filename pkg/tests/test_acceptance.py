"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with  pytest tests/test_acceptance.py -s  to see the per-criterion
lines.  Every tolerance is pinned here; nothing is deferred to later
calibration.
"""

import cmath
import math
import random

import numpy as np
import pytest

from nlstree.cli import main as cli_main
from nlstree.coeffs import PhasedTree, tree_coefficient_exact, tree_coefficient_quadrature
from nlstree.config import DatumConfig, RunConfig
from nlstree.indexsets import (
    FrozenParams,
    classify_frozen,
    enumerate_assignments,
    sigma,
    weathered_partition,
)
from nlstree.modes import ModeSequence, SpaceParams, norm_lsp, random_datum
from nlstree.refsolve import GalerkinSystem, compare_solutions, gauge_relation, integrate
from nlstree.series import (
    assemble_from_trees,
    nonlinearity_limit,
    picard_component,
    residual_integral_equation,
    smoothing_gap,
    solve_series,
)
from nlstree.treeops import LeafInputs, eval_l1_operator
from nlstree.trees import enumerate_ornamented, enumerate_shapes


def _report(number: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"criterion {number:02d} {name}: {status}{suffix}")


def _scaled_datum(support: int, l1: float, seed: int) -> ModeSequence:
    raw = random_datum(support, 0.3, 1.0, seed)
    return raw.scaled(l1 / raw.l1())


@pytest.fixture(scope="module")
def sol_k5():
    # degree-5 solution of a radius-1 datum with l1 norm 0.2
    return solve_series(_scaled_datum(1, 0.2, 21), 5, (0.0, 0.1, 0.25, 0.5))


@pytest.fixture(scope="module")
def sol_k4_wide():
    # radius-2 datum so mode cutoffs up to 8 stay inside the support
    return solve_series(_scaled_datum(2, 0.2, 33), 4, (0.0, 0.4))


def test_criterion_01_combinatorics():
    counts = [len(enumerate_shapes(k)) for k in range(5)]
    ok = counts == [1, 1, 3, 12, 55]
    for k in range(5):
        for tree in enumerate_shapes(k):
            ok &= len(tree.leaf_ids) == 2 * k + 1
    _report(1, "combinatorics", ok, f"shape counts {counts}")
    assert ok


def test_criterion_02_resonance_identity():
    rng = random.Random(2024)
    ok = True
    for _ in range(100_000):
        j, k, l = (rng.randint(-10**6, 10**6) for _ in range(3))
        n = j - k + l
        if sigma(j, k, l, n) != 2 * (n - j) * (n - l):
            ok = False
            break
    _report(2, "resonance identity", ok, "10^5 random cyclic tuples, exact")
    assert ok


def test_criterion_03_coefficient_oracle():
    rng = np.random.default_rng(303)
    ok = True
    worst = 0.0
    cases = 0
    for k in (0, 1, 2):
        for tree in enumerate_ornamented(k):
            assigns = enumerate_assignments(tree, 3)
            if not assigns:
                continue
            picks = rng.choice(len(assigns), size=min(3, len(assigns)), replace=False)
            for idx in picks:
                pt = PhasedTree(tree, assigns[idx], 1)
                for t in (0.3, 1.0):
                    exact, _ = tree_coefficient_exact(pt, t)
                    est = tree_coefficient_quadrature(pt, t, samples=20_000, seed=7)
                    dev = abs(exact - est.value)
                    sig = dev / max(est.stderr, 1e-15)
                    worst = max(worst, sig)
                    ok &= dev <= max(4 * est.stderr, 1e-14)
                    ok &= abs(exact) <= t**k + 1e-12
                    cases += 1
    _report(3, "coefficient oracle", ok, f"{cases} cases, worst {worst:.2f} sigma")
    assert ok


def test_criterion_04_dual_pipeline():
    ok = True
    worst = 0.0
    for i, (seed, omega) in enumerate([(41, 1), (42, 1), (43, 1), (44, -1), (45, -1)]):
        datum = _scaled_datum(3, 0.15, seed)
        for m in (1, 2, 3):
            direct = picard_component(datum, m, (0.3,), omega)[0.3]
            via_trees = assemble_from_trees(datum, m, 0.3, omega)
            rel = (direct - via_trees).l1() / max(direct.l1(), 1e-300)
            worst = max(worst, rel)
            ok &= rel <= 1e-10
    _report(4, "dual-pipeline equivalence", ok, f"5 data, worst rel l1 {worst:.2e}")
    assert ok


def test_criterion_05_single_mode_closed_form():
    A = 0.5
    datum = ModeSequence.from_dict({0: A})
    ok = True
    details = []
    for omega in (1, -1):
        with pytest.warns(RuntimeWarning):
            sol = solve_series(datum, 8, (0.0, 0.5), omega)
        expected = A * cmath.exp(-1j * omega * abs(A) ** 2 * 0.5)
        series_err = abs(sol.value(0.5).get(0) - expected)
        traj = integrate(GalerkinSystem(0, omega), datum, 0.5, 1e-3)
        oracle_err = abs(traj.at(0.5).get(0) - expected)
        ok &= series_err <= 1e-8 and oracle_err <= 1e-10
        details.append(f"omega={omega}: series {series_err:.1e}, rk4 {oracle_err:.1e}")
    _report(5, "single-mode closed form", ok, "; ".join(details))
    assert ok


def test_criterion_06_residual(sol_k5):
    residuals = {
        k: residual_integral_equation(sol_k5.truncated(k), 0.5, 11) for k in (2, 3, 4, 5)
    }
    ok = residuals[5] <= 1e-6
    ok &= all(residuals[k + 1] < residuals[k] for k in (2, 3, 4))
    _report(6, "integral-equation residual", ok,
            ", ".join(f"K={k}: {r:.2e}" for k, r in residuals.items()))
    assert ok


def test_criterion_07_series_vs_oracle(sol_k5):
    needed = (2 * sol_k5.max_degree + 1) * sol_k5.datum.radius()
    devs = compare_solutions(sol_k5, GalerkinSystem(needed, sol_k5.omega), 1e-3)
    worst = max(devs.values())
    ok = worst <= 1e-6
    _report(7, "series vs oracle", ok, f"cutoff {needed}, worst sup diff {worst:.2e}")
    assert ok


def test_criterion_08_gauge_relation():
    ok = True
    worst = 0.0
    for seed in (81, 82):
        datum = random_datum(3, 0.4, 0.25, seed)
        dev = gauge_relation(datum, 1.0, 1e-3, 1)
        worst = max(worst, dev)
        ok &= dev <= 1e-8
    _report(8, "gauge relation", ok, f"worst deviation {worst:.2e}")
    assert ok


def test_criterion_09_l1_identity():
    ok = True
    worst = 0.0
    for k in (0, 1, 2):
        for tree in enumerate_ornamented(k):
            seqs = []
            for i in range(len(tree.base.leaf_ids)):
                raw = random_datum(2, 0.0, 1.0, 900 + 13 * i)
                seqs.append(ModeSequence.from_dict({n: abs(v) for n, v in raw.items()}))
            out = eval_l1_operator(tree, LeafInputs(tuple(seqs), (False,) * len(seqs)))
            product = 1.0
            for s in seqs:
                product *= s.l1()
            rel = abs(out.l1() - product) / product
            worst = max(worst, rel)
            ok &= rel <= 1e-12
    _report(9, "l1 identity", ok, f"worst rel err {worst:.2e}")
    assert ok


def test_criterion_10_frozen_partition():
    fp = FrozenParams()
    ok = True
    for k in (0, 1, 2):
        for tree in enumerate_ornamented(k):
            everything = enumerate_assignments(tree, 2)
            fibers = weathered_partition(tree, 2, fp)
            flattened = sorted(a.j for fiber in fibers.values() for a in fiber)
            ok &= flattened == sorted(a.j for a in everything)  # exhaustive + disjoint
            for key, fiber in fibers.items():
                for a in fiber:
                    cls = classify_frozen(tree, a, fp)
                    ok &= cls.frozen_set() == key
                    for v in tree.base.internal_ids:
                        kids = tree.base.children[v]
                        if tree.is_simple(v) and all(
                            tree.base.children[c] is None for c in kids
                        ):
                            ok &= cls.labels[v] == "frozen" and v in cls.exceptional
    _report(10, "frozen partition", ok)
    assert ok


def test_criterion_11_truncated_nonlinearity(sol_k4_wide):
    report = nonlinearity_limit(sol_k4_wide, 0.4, (2, 4, 8))
    ok = report.decreasing
    _report(11, "truncated cubic term limit", ok,
            "diffs " + ", ".join(f"{d:.2e}" for d in report.diff_norms))
    assert ok


def test_criterion_12_smoothing_gap():
    times = tuple(10.0**e for e in (-3.0, -2.5, -2.0, -1.5, -1.0))
    ok = True
    details = []
    single = ModeSequence.from_dict({0: 0.5})
    raw = random_datum(2, 0.3, 1.0, 1212)
    small = raw.scaled(0.25 / norm_lsp(raw, SpaceParams(0.0, 4.0)))
    for label, datum in (("single", single), ("random", small)):
        sol = solve_series(datum, 4, (0.0,) + times)
        gaps = smoothing_gap(sol, times, 2.0)
        xs = [math.log(t) for t in times]
        ys = [math.log(g) for g in gaps.values()]
        n = len(xs)
        slope = (n * sum(x * y for x, y in zip(xs, ys)) - sum(xs) * sum(ys)) / (
            n * sum(x * x for x in xs) - sum(xs) ** 2
        )
        ok &= slope >= 0.9
        details.append(f"{label} slope {slope:.3f}")
    _report(12, "smoothing gap", ok, "; ".join(details))
    assert ok


def test_criterion_13_determinism(tmp_path):
    cfg = RunConfig(
        seed=13,
        n_cutoff=2,
        max_degree=4,
        tau=0.4,
        grid_points=3,
        datum=DatumConfig(source="random", support=2, decay=0.5, scale=0.1, l1_target=0.2),
        truncation_list=(2, 4, 8),
        gap_times=(0.01, 0.03, 0.1),
    ).validate()
    path = tmp_path / "run.ini"
    cfg.to_file(path)
    outputs = []
    for tag in ("a", "b"):
        out = tmp_path / f"out_{tag}"
        cache = tmp_path / f"cache_{tag}"
        code = cli_main(["solve", "--config", str(path), "--out", str(out), "--cache", str(cache)])
        code |= cli_main(
            ["diagnose", "--config", str(path), "--out", str(out), "--cache", str(cache)]
        )
        assert code == 0
        outputs.append(out)
    ok = True
    names = sorted(p.name for p in outputs[0].iterdir())
    for name in names:
        ok &= (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()
    _report(13, "determinism", ok, f"{len(names)} artifacts byte-compared")
    assert ok
