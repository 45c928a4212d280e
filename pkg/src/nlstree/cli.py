"""Command-line front end: batch experiments emitting CSV plus a manifest.

    nlstree <enumerate|coeffs|solve|compare|diagnose> --config <path>
            [--out <dir>] [--cache <dir>]

Exit codes: 0 success, 1 validation error, 2 cap or budget exceeded,
3 diagnose check failure.  Reruns with the same config and seed write
byte-identical CSVs: all iteration orders are fixed, floats are printed
with repr, and nothing timestamps the output.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import math
import sys
import warnings as _warnings
from pathlib import Path

import numpy as np

from . import __version__, exppoly
from .coeffs import PhasedTree, coefficient_bound_check, tree_coefficient_exact
from .config import RunConfig
from .errors import BudgetExceededError, ValidationError
from .indexsets import (
    FrozenParams,
    classify_frozen,
    divisor_count,
    enumerate_assignments,
    rho_all,
    sigma_node,
    weathered_partition,
)
from .modes import ModeSequence, random_datum
from .refsolve import GalerkinSystem, compare_solutions, integrate, write_trajectory_csv
from .series import nonlinearity_limit, residual_integral_equation, smoothing_gap, solve_series
from .treeops import LeafInputs, eval_l1_operator
from .trees import (
    enumerate_ornamented,
    enumerate_shapes,
    make_ornamented,
    read_tree_cache,
    serialize,
    tree_hash,
    write_tree_cache,
)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="nlstree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("enumerate", "coeffs", "solve", "compare", "diagnose"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the run config")
        p.add_argument("--out", default=None, help="override [run] out_dir")
        p.add_argument("--cache", default=None, help="override [run] cache_dir")
    args = parser.parse_args(argv)

    try:
        cfg = RunConfig.from_file(args.config)
        exppoly.TERM_CAP = cfg.caps.exppoly_terms
        out_dir = Path(args.out or cfg.out_dir)
        cache_dir = Path(args.cache or cfg.cache_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        cache_dir.mkdir(parents=True, exist_ok=True)
        _write_manifest(out_dir, cfg)
        runner = {
            "enumerate": run_enumerate,
            "coeffs": run_coeffs,
            "solve": run_solve,
            "compare": run_compare,
            "diagnose": run_diagnose,
        }[args.command]
        return runner(cfg, out_dir, cache_dir)
    except BudgetExceededError as exc:
        print(f"error kind=budget message={exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error kind=validation message={exc}", file=sys.stderr)
        return 1


def _write_manifest(out_dir: Path, cfg: RunConfig) -> None:
    text = f"nlstree version = {__version__}\n\n{cfg.to_text()}"
    (out_dir / "manifest.txt").write_text(text)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _fmt(x: float) -> str:
    return repr(float(x))


def _cached_trees(k: int, cfg: RunConfig, cache_dir: Path):
    path = cache_dir / f"trees_k{k}.txt"
    if path.exists():
        return read_tree_cache(path)
    trees = enumerate_ornamented(
        k, cap=cfg.caps.tree_degree, limit=cfg.caps.enumeration_limit
    )
    write_tree_cache(path, trees)
    return trees


def _assignment_hash(a) -> str:
    text = ",".join(str(j) for j in a.j)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def run_enumerate(cfg: RunConfig, out_dir: Path, cache_dir: Path) -> int:
    rows = []
    for k in range(cfg.max_degree + 1):
        trees = _cached_trees(k, cfg, cache_dir)
        shapes = enumerate_shapes(k, cap=cfg.caps.tree_degree)
        rows.append([k, len(shapes), len(trees)])
        print(f"k={k}: {len(shapes)} shapes, {len(trees)} ornamented trees")
    _write_csv(out_dir / "counts.csv", ["k", "shapes", "ornamented"], rows)
    return 0


def _sampling_cutoff(k: int, n_cutoff: int, tuple_budget: int = 50_000) -> int:
    # Largest N <= n_cutoff whose raw leaf-tuple count stays workable.
    n = n_cutoff
    while n > 1 and (2 * n + 1) ** (2 * k + 1) > tuple_budget:
        n -= 1
    return n


def run_coeffs(cfg: RunConfig, out_dir: Path, cache_dir: Path) -> int:
    rng = np.random.default_rng(cfg.seed)
    coeff_rows = []
    bound_rows = []
    all_passed = True
    for k in range(min(cfg.max_degree, 3) + 1):
        n_sample = _sampling_cutoff(k, cfg.n_cutoff)
        for tree in _cached_trees(k, cfg, cache_dir):
            assigns = enumerate_assignments(tree, n_sample, cfg.caps.assignment_budget)
            if not assigns:
                continue
            picks = sorted(
                rng.choice(len(assigns), size=min(3, len(assigns)), replace=False).tolist()
            )
            th = tree_hash(tree)
            for idx in picks:
                pt = PhasedTree(tree, assigns[idx], cfg.omega)
                ah = _assignment_hash(assigns[idx])
                for t in cfg.time_grid():
                    if t == 0.0:
                        continue
                    value, _ = tree_coefficient_exact(pt, t)
                    coeff_rows.append([th, ah, _fmt(t), _fmt(value.real), _fmt(value.imag)])
                    if t <= 1.0:
                        check = coefficient_bound_check(pt, t, cfg.caps.eps_sum)
                        all_passed &= check.passed
                        bound_rows.append(
                            [
                                th,
                                ah,
                                _fmt(t),
                                _fmt(check.lhs),
                                _fmt(check.bound_volume),
                                _fmt(check.bound_resonance),
                                int(check.passed),
                            ]
                        )
    _write_csv(
        out_dir / "coefficients.csv",
        ["tree_hash", "assignment_hash", "t", "re", "im"],
        coeff_rows,
    )
    _write_csv(
        out_dir / "bounds.csv",
        ["tree_hash", "assignment_hash", "t", "lhs", "bound_volume", "bound_resonance", "passed"],
        bound_rows,
    )
    print(f"{len(coeff_rows)} coefficients, bounds all passed: {all_passed}")
    return 0


def _solve_from_config(cfg: RunConfig):
    datum = cfg.build_datum()
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", RuntimeWarning)
        sol = solve_series(
            datum, cfg.max_degree, cfg.time_grid(), cfg.omega, cfg.convergence_threshold
        )
    return datum, sol


def run_solve(cfg: RunConfig, out_dir: Path, cache_dir: Path) -> int:
    datum, sol = _solve_from_config(cfg)
    rows = []
    for t in sol.times:
        seq = sol.value(t)
        tail = sol.tail_estimates[t]
        for n, v in seq.items():
            rows.append([_fmt(t), n, _fmt(v.real), _fmt(v.imag), _fmt(tail)])
    _write_csv(out_dir / "solution.csv", ["t", "n", "re", "im", "degree_tail_estimate"], rows)
    for w in sol.warnings:
        print(f"warning: {w}")
    residual = residual_integral_equation(sol, sol.times[-1], max(1, datum.radius()))
    print(
        f"solved degree {cfg.max_degree}, {len(sol.support())} modes, "
        f"final-time residual {residual:.3e}"
    )
    _write_csv(
        out_dir / "residual.csv",
        ["t", "residual"],
        [[_fmt(sol.times[-1]), _fmt(residual)]],
    )
    return 0


def run_compare(cfg: RunConfig, out_dir: Path, cache_dir: Path) -> int:
    datum, sol = _solve_from_config(cfg)
    sys_ = GalerkinSystem(cfg.oracle_cutoff(datum), cfg.omega)
    devs = compare_solutions(sol, sys_, cfg.dt)
    rows = [[_fmt(t), _fmt(d)] for t, d in devs.items()]
    _write_csv(out_dir / "comparison.csv", ["t", "sup_diff"], rows)
    traj = integrate(sys_, datum, max(sol.times), cfg.dt)
    write_trajectory_csv(out_dir / "oracle_trajectory.csv", traj, sol.times)
    print(f"max deviation from the Galerkin oracle: {max(devs.values()):.3e}")
    return 0


def _loglog_slope(ts, vals) -> float:
    pts = [(math.log(t), math.log(v)) for t, v in zip(ts, vals) if v > 0]
    if len(pts) < 2:
        return 0.0
    n = len(pts)
    sx = sum(x for x, _ in pts)
    sy = sum(y for _, y in pts)
    sxx = sum(x * x for x, _ in pts)
    sxy = sum(x * y for x, y in pts)
    return (n * sxy - sx * sy) / (n * sxx - sx * sx)


def run_diagnose(cfg: RunConfig, out_dir: Path, cache_dir: Path) -> int:
    checks: list[tuple[str, bool]] = []
    fp = FrozenParams(cfg.c0, cfg.delta)

    # frozen partition on all ornamented trees of degree <= 2
    n_part = min(cfg.n_cutoff, 2)
    partition_ok = True
    frozen_rows = []
    for k in (0, 1, 2):
        for tree in _cached_trees(k, cfg, cache_dir):
            assigns = enumerate_assignments(tree, n_part, cfg.caps.assignment_budget)
            seen = 0
            text = serialize(tree)
            for aid, a in enumerate(assigns):
                cls = classify_frozen(tree, a, fp)
                seen += 1
                rho = rho_all(tree, a)
                for v in tree.base.internal_ids:
                    frozen_rows.append(
                        [text, aid, v, sigma_node(tree, a, v), rho[v], cls.labels[v]]
                    )
                    kids = tree.base.children[v]
                    all_terminal = all(tree.base.children[c] is None for c in kids)
                    if tree.is_simple(v) and all_terminal:
                        partition_ok &= cls.labels[v] == "frozen" and v in cls.exceptional
            # fibers partition the assignment list exactly
            fibers = weathered_partition(tree, n_part, fp, cfg.caps.assignment_budget)
            partition_ok &= sum(len(v) for v in fibers.values()) == seen
    _write_csv(
        out_dir / "frozen_report.csv",
        ["tree", "assignment_id", "node_id", "sigma", "rho", "label"],
        frozen_rows,
    )
    checks.append(("frozen partition", partition_ok))

    # simplified operator norm identity on nonnegative inputs
    l1_rows = []
    l1_ok = True
    for k in (0, 1, 2):
        for si, shape in enumerate(enumerate_shapes(k, cfg.caps.tree_degree)):
            tree = make_ornamented(shape, "G")
            seqs = []
            for i in range(len(shape.leaf_ids)):
                raw = random_datum(2, 0.0, 1.0, cfg.seed + 17 * i + si)
                seqs.append(ModeSequence.from_dict({n: abs(v) for n, v in raw.items()}))
            out = eval_l1_operator(tree, LeafInputs(tuple(seqs), (False,) * len(seqs)))
            lhs = out.l1()
            rhs = 1.0
            for x in seqs:
                rhs *= x.l1()
            rel = abs(lhs - rhs) / rhs
            l1_ok &= rel <= 1e-12
            l1_rows.append([k, si, _fmt(lhs), _fmt(rhs), _fmt(rel)])
    _write_csv(out_dir / "l1_identity.csv", ["k", "shape", "lhs", "rhs", "rel_err"], l1_rows)
    checks.append(("l1 identity", l1_ok))

    # divisor-count records (diagnostic only, no pass criterion)
    best = 0
    div_rows = []
    for m in range(1, cfg.divisor_limit + 1):
        d = divisor_count(m)
        if d > best:
            best = d
            div_rows.append([m, d, _fmt(d / m**0.25)])
    _write_csv(out_dir / "divisor_stats.csv", ["m", "factorizations", "ratio_m_quarter"], div_rows)

    # series-based diagnostics
    datum, sol = _solve_from_config(cfg)
    gaps = smoothing_gap(sol, cfg.gap_times, cfg.q)
    _write_csv(
        out_dir / "smoothing_gap.csv",
        ["t", "gap"],
        [[_fmt(t), _fmt(g)] for t, g in gaps.items()],
    )
    slope = _loglog_slope(list(gaps), list(gaps.values()))
    checks.append(("smoothing gap slope >= 0.9", datum.is_zero or slope >= 0.9))

    report = nonlinearity_limit(sol, sol.times[-1], cfg.truncation_list, cfg.p)
    _write_csv(
        out_dir / "truncation_limit.csv",
        ["n_cutoff", "diff_from_previous"],
        [
            [n, _fmt(d) if d is not None else ""]
            for n, d in zip(cfg.truncation_list, (None,) + report.diff_norms)
        ],
    )
    checks.append(("truncated cubic term converging", datum.is_zero or report.decreasing))

    failed = [name for name, ok in checks if not ok]
    for name, ok in checks:
        print(f"check {name}: {'PASS' if ok else 'FAIL'}")
    return 3 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
