"""Deterministic-equivalent builders.

Turns a multistage robust model plus scenario data into concrete LPs:

* build_swc          -- the sampled problem with per-prefix certificates and
                        a single worst-case budget row per distinct path;
* build_deterministic-- one fully anticipative path;
* sws_value          -- sampled wait-and-see bound (max over per-path minima);
* swct_value         -- sampled bound with certificates over first-stage
                        draws and a deterministic tail;
* exact_value        -- vertex-tree references for the full worst case (RO
                        mode), the anticipative worst case (RWS), and the
                        relaxation that reveals everything after stage one (RT).

Vertex-based exact references rely on worst cases occurring at support
vertices; that holds when the value function is convex in the uncertainty
(coefficients affine, as in the shipped benchmark) but is an assumption for
user-supplied models.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .lp import LPBuilder, LPInstance, SolveResult, Status, get_solver, require_optimal
from .model import (
    LE,
    MultistageRobustLP,
    ScenarioPath,
    UncertaintySet,
    flatten_prefix,
    validate,
)
from .sampling import ScenarioPrefixTree, build_prefix_tree

DEFAULT_LEAF_CAP = 4096

EXACT_MODES = ("ro", "rws", "rt")


@dataclass(frozen=True)
class VariableIndexMap:
    """Column layout of a certificate LP: the budget variable, the
    first-stage block, and one certificate block per tree node."""

    gamma: int
    x1: range
    blocks: dict[tuple[int, int], range]  # (decision stage t, node index) -> columns

    def stage_blocks(self, t: int) -> list[range]:
        return [rng for (s, _), rng in sorted(self.blocks.items()) if s == t]


def _check_problem(problem: MultistageRobustLP) -> None:
    errs = validate(problem)
    if errs:
        raise ValueError("invalid model: " + "; ".join(errs))


def _add_first_stage(b: LPBuilder, problem: MultistageRobustLP, names, obj_c1=False) -> range:
    cols = []
    for k in range(problem.dims.n[0]):
        lo = 0.0 if problem.nonneg[0][k] else -np.inf
        obj = float(problem.c1[k]) if obj_c1 else 0.0
        cols.append(b.add_var(lo, np.inf, obj, f"{names[0][k]}"))
    for i in range(problem.dims.m[0]):
        row = problem.A[i]
        nz = np.nonzero(row)[0]
        b.add_row([cols[j] for j in nz], row[nz], problem.senses1[i], problem.h1[i])
    return range(cols[0], cols[-1] + 1) if cols else range(0, 0)


def _add_stage_rows(
    b: LPBuilder,
    problem: MultistageRobustLP,
    t: int,
    xi: np.ndarray,
    prev_cols: range,
    cols: range,
) -> None:
    blk = problem.stage_block(t)
    T, W, h = blk.T(xi), blk.W(xi), blk.h(xi)
    for i in range(problem.dims.m[t - 1]):
        r_cols, r_vals = [], []
        nzT = np.nonzero(T[i])[0]
        r_cols += [prev_cols[j] for j in nzT]
        r_vals += list(T[i][nzT])
        nzW = np.nonzero(W[i])[0]
        r_cols += [cols[j] for j in nzW]
        r_vals += list(W[i][nzW])
        b.add_row(r_cols, r_vals, blk.senses[i], h[i])


def _add_stage_vars(b: LPBuilder, problem: MultistageRobustLP, t: int, tag: str, names,
                    obj: np.ndarray | None = None) -> range:
    cols = []
    for k in range(problem.dims.n[t - 1]):
        lo = 0.0 if problem.nonneg[t - 1][k] else -np.inf
        coef = float(obj[k]) if obj is not None else 0.0
        cols.append(b.add_var(lo, np.inf, coef, f"{names[t - 1][k]}{tag}"))
    return range(cols[0], cols[-1] + 1)


def build_swc(
    problem: MultistageRobustLP, tree: ScenarioPrefixTree
) -> tuple[LPInstance, VariableIndexMap]:
    """Scenario-with-certificates LP over the sampled prefix tree.

    Variables: budget gamma, the first-stage block, then one certificate
    block per tree node in breadth-first order.  Rows shared by several
    paths through a common prefix are emitted once.
    """
    _check_problem(problem)
    H = problem.H
    if tree.n_stages != H - 1:
        raise ValueError(f"tree has {tree.n_stages} stages, problem expects {H - 1}")
    names = problem.default_names()
    b = LPBuilder()
    gamma = b.add_var(-np.inf, np.inf, 1.0, "gamma")
    x1 = _add_first_stage(b, problem, names)

    blocks: dict[tuple[int, int], range] = {}
    for level in range(1, H):  # tree level = uncertainty stage; decision stage level+1
        for j in range(tree.n_nodes(level)):
            blocks[(level + 1, j)] = _add_stage_vars(b, problem, level + 1, f"_n{level}_{j}", names)

    for level in range(1, H):
        t = level + 1
        for j in range(tree.n_nodes(level)):
            xi = flatten_prefix(tree.node_prefix(level, j))
            prev = x1 if level == 1 else blocks[(t - 1, tree.parent[level - 1][j])]
            _add_stage_rows(b, problem, t, xi, prev, blocks[(t, j)])

    # one worst-case budget row per distinct full path (leaf node)
    for leaf in range(tree.n_nodes(H - 1)):
        cols = [gamma] + list(x1)
        vals = [-1.0] + list(problem.c1)
        node = leaf
        chain = [node]
        for level in range(H - 1, 1, -1):
            node = tree.parent[level - 1][node]
            chain.append(node)
        chain.reverse()  # stage-1..stage-(H-1) nodes along this leaf's history
        prefix = tree.node_prefix(H - 1, leaf)
        for t in range(2, H + 1):
            xi = flatten_prefix(prefix[: t - 1])
            c_t = problem.stage_block(t).c(xi)
            rng = blocks[(t, chain[t - 2])]
            nz = np.nonzero(c_t)[0]
            cols += [rng[k] for k in nz]
            vals += list(c_t[nz])
        b.add_row(cols, vals, LE, 0.0)
    return b.build(), VariableIndexMap(gamma, x1, blocks)


def build_deterministic(problem: MultistageRobustLP, path: ScenarioPath) -> LPInstance:
    """Fully anticipative single-scenario LP (all stages decided knowing the path)."""
    _check_problem(problem)
    names = problem.default_names()
    b = LPBuilder()
    x1 = _add_first_stage(b, problem, names, obj_c1=True)
    prev = x1
    for t in range(2, problem.H + 1):
        xi = path.flat(t - 1)
        cols = _add_stage_vars(b, problem, t, "", names, obj=problem.stage_block(t).c(xi))
        _add_stage_rows(b, problem, t, xi, prev, cols)
        prev = cols
    return b.build()


def _separable_blocks(
    problem: MultistageRobustLP,
    paths: list[ScenarioPath],
    x1: np.ndarray | None,
) -> tuple[LPInstance, list[range], list[float]]:
    """Block-diagonal stack of per-path LPs (independent blocks, summed
    objective).  With x1 fixed the blocks are the recourse problems over
    stages 2..H; otherwise each block is the full deterministic LP."""
    names = problem.default_names()
    b = LPBuilder()
    block_cols: list[range] = []
    consts: list[float] = []
    for i, path in enumerate(paths):
        start = b.ncols
        if x1 is None:
            prev = _add_first_stage(b, problem, names, obj_c1=True)
            const = 0.0
        else:
            prev = None
            const = float(problem.c1 @ x1)
        for t in range(2, problem.H + 1):
            xi = path.flat(t - 1)
            cols = _add_stage_vars(
                b, problem, t, f"_s{i}", names, obj=problem.stage_block(t).c(xi)
            )
            if t == 2 and x1 is not None:
                blk = problem.stage_block(2)
                T, W, h = blk.T(xi), blk.W(xi), blk.h(xi)
                shift = T @ x1
                for r in range(problem.dims.m[1]):
                    nz = np.nonzero(W[r])[0]
                    b.add_row([cols[j] for j in nz], W[r][nz], blk.senses[r], h[r] - shift[r])
            else:
                _add_stage_rows(b, problem, t, xi, prev, cols)
            prev = cols
        block_cols.append(range(start, b.ncols))
        consts.append(const)
    return b.build(), block_cols, consts


def scenario_costs(
    problem: MultistageRobustLP,
    paths: list[ScenarioPath],
    solver="highs",
    x1: np.ndarray | None = None,
    chunk_rows: int = 40000,
) -> np.ndarray:
    """Optimal cost of every path's own LP; +inf where infeasible.

    With x1 given, the cost is c1'x1 plus the optimal recourse over stages
    2..H along the path.  Paths are stacked into block-diagonal LPs (the
    blocks are independent, so per-block optima are read off the stacked
    solution); an infeasible stack falls back to per-path solves.
    """
    solve = get_solver(solver)
    rows_per = sum(problem.dims.m[1:]) + (problem.dims.m[0] if x1 is None else 0)
    per_chunk = max(1, chunk_rows // max(1, rows_per))
    out = np.empty(len(paths))
    for lo in range(0, len(paths), per_chunk):
        batch = paths[lo : lo + per_chunk]
        lp, block_cols, consts = _separable_blocks(problem, list(batch), x1)
        res = solve(lp)
        if res.status is Status.OPTIMAL:
            for k, cols in enumerate(block_cols):
                sl = slice(cols.start, cols.stop)
                out[lo + k] = consts[k] + float(lp.obj[sl] @ res.x[sl])
        else:
            for k, path in enumerate(batch):
                out[lo + k] = _single_cost(problem, path, solve, x1)
    return out


def _single_cost(problem, path, solve, x1) -> float:
    lp, _, consts = _separable_blocks(problem, [path], x1)
    res = solve(lp)
    if res.status is Status.OPTIMAL:
        return consts[0] + float(res.objective)
    if res.status is Status.INFEASIBLE:
        return np.inf
    if res.status is Status.UNBOUNDED:
        return -np.inf
    raise RuntimeError(f"scenario solve ended with {res.status.value}")


def sws_value(
    problem: MultistageRobustLP, paths: list[ScenarioPath], solver="highs"
) -> tuple[float, int]:
    """Sampled wait-and-see bound: worst per-path anticipative optimum.

    Returns (value, index of the worst path).  A path with no feasible
    anticipative decision is reported by index in the raised error.
    """
    if not paths:
        raise ValueError("need at least one path")
    costs = scenario_costs(problem, paths, solver, x1=None)
    bad = np.nonzero(np.isinf(costs) & (costs > 0))[0]
    if bad.size:
        raise RuntimeError(f"deterministic subproblem infeasible for path index {bad[0]}")
    worst = int(np.argmax(costs))
    return float(costs[worst]), worst


def hybrid_paths(
    uncertainty: UncertaintySet, xi1_samples, tail=None
) -> list[ScenarioPath]:
    """Paths (xi1_i, tail) with a deterministic tail for stages 2..H-1
    (defaults to the per-stage nominal points)."""
    if tail is None:
        tail = [uncertainty.nominal(t) for t in range(2, uncertainty.n_stages + 1)]
    tail = [np.atleast_1d(np.asarray(v, dtype=float)) for v in tail]
    if len(tail) != max(0, uncertainty.n_stages - 1):
        raise ValueError(
            f"tail covers {len(tail)} stages, expected {uncertainty.n_stages - 1}"
        )
    out = []
    for xi1 in xi1_samples:
        out.append(ScenarioPath.of([np.atleast_1d(np.asarray(xi1, dtype=float)), *tail]))
    return out


def swct_value(
    problem: MultistageRobustLP,
    xi1_samples,
    tail=None,
    solver="highs",
) -> float:
    """Certificate bound over first-stage draws with a deterministic tail.

    Builds the same certificate LP as build_swc on the hybrid paths; only
    xi^1 varies across samples, so certificates are shared per distinct
    first-stage draw at every later stage.
    """
    paths = hybrid_paths(problem.uncertainty, xi1_samples, tail)
    lp, _ = build_swc(problem, build_prefix_tree(paths))
    res = require_optimal(get_solver(solver)(lp), "swct")
    return float(res.objective)


def relaxed_grouping(paths: list[ScenarioPath]) -> ScenarioPrefixTree:
    """Certificate grouping with nonanticipativity dropped after stage one:
    every distinct full path keeps its own certificates at every stage
    (exact duplicates still share).  Used for the two-stage relaxation."""
    if not paths:
        raise ValueError("cannot group zero paths")
    S = paths[0].n_stages
    if any(p.n_stages != S for p in paths):
        raise ValueError("all paths must have the same stage count")
    distinct: dict[tuple, int] = {}
    owner: list[int] = []
    reps: list[ScenarioPath] = []
    for p in paths:
        key = p.stages
        j = distinct.get(key)
        if j is None:
            j = len(reps)
            distinct[key] = j
            reps.append(p)
        owner.append(j)
    nodes = tuple(tuple(p.prefix(t) for p in reps) for t in range(1, S + 1))
    path_to_node = tuple(tuple(owner[i] for _ in range(S)) for i in range(len(paths)))
    parent = tuple(tuple(range(len(reps))) for _ in range(S))
    return ScenarioPrefixTree(tuple(paths), nodes, path_to_node, parent)


def vertex_paths(uncertainty: UncertaintySet, leaf_cap: int = DEFAULT_LEAF_CAP) -> list[ScenarioPath]:
    """Cartesian product of per-stage support vertices."""
    per_stage = [uncertainty.vertices(t) for t in range(1, uncertainty.n_stages + 1)]
    total = math.prod(len(v) for v in per_stage)
    if total > leaf_cap:
        raise ValueError(f"vertex tree has {total} leaves, above the cap {leaf_cap}")
    return [ScenarioPath.of(combo) for combo in itertools.product(*per_stage)]


def exact_value(
    problem: MultistageRobustLP,
    mode: str,
    solver="highs",
    leaf_cap: int = DEFAULT_LEAF_CAP,
) -> float:
    """Vertex-tree reference value.

    ro  -- full worst case with nonanticipative shared certificates (the
           swc builder fed every vertex path);
    rws -- anticipative worst case (max over per-vertex-path optima);
    rt  -- relaxation where everything is revealed after stage one: shared
           first-stage block, per-vertex-path certificates.
    """
    mode = mode.lower()
    if mode not in EXACT_MODES:
        raise ValueError(f"mode must be one of {EXACT_MODES}, got {mode!r}")
    paths = vertex_paths(problem.uncertainty, leaf_cap)
    if mode == "rws":
        value, _ = sws_value(problem, paths, solver)
        return value
    grouping = build_prefix_tree(paths) if mode == "ro" else relaxed_grouping(paths)
    lp, _ = build_swc(problem, grouping)
    res = require_optimal(get_solver(solver)(lp), f"exact {mode}")
    return float(res.objective)


def solve_swc_paths(
    problem: MultistageRobustLP, paths: list[ScenarioPath], solver="highs"
) -> tuple[float, np.ndarray, float, SolveResult]:
    """Convenience: build the prefix tree and solve; returns
    (value, x1, gamma, raw result)."""
    tree = build_prefix_tree(paths)
    lp, vmap = build_swc(problem, tree)
    res = require_optimal(get_solver(solver)(lp), "swc")
    x1 = res.x[vmap.x1.start : vmap.x1.stop]
    return float(res.objective), x1, float(res.x[vmap.gamma]), res
