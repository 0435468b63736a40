"""Discrete infinity-harmonic boundary problems (AMLE).

At an interior vertex x the discrete infinity-Laplace condition balances
the steepest ascent against the steepest descent among neighbors:

    max_a (u(a) - u(x)) / len(x, a)  ==  max_b (u(x) - u(b)) / len(x, b).

Given fixed neighbor values the balance condition has a closed-form
solution,

    t* = max_i min_j (l_j u_i + l_i u_j) / (l_i + l_j),

over ordered neighbor pairs (i, j): the left side of the balance is
decreasing in t and the right side increasing, so t <= t* is equivalent
to some i beating every j, which unfolds to the max-min above.  The
solver sweeps these exact local solves in Gauss-Seidel fashion: interior
vertices are greedily colored so neighbors never share a color, and each
sweep updates one color class at a time against the newest values.
Simultaneous (Jacobi) updates are avoided on purpose; they can lock into
exact period-two cycles on weighted graphs.  Sequential exact solves are
monotone in the neighbor values, so iterates started from the constant
min and max fills bracket every other start and converge monotonically
to the unique solution.

Under ``metric_choice = "essential"`` only
positive-measure edges participate; interior vertices with no
positive-measure route to the boundary are degenerate: the solver never
invents values for them and lists them instead.  That is the regime
where any boundary-respecting field is as infinity-harmonic as any
other, and ``check_amle_local`` reports residual zero for all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .extension import mcshane_extend
from .graph import MetricMeasureGraph
from .util import InputError


@dataclass(frozen=True)
class AMLEProblem:
    """An infinity-harmonic boundary problem on a metric measure graph."""

    graph: MetricMeasureGraph
    boundary: tuple[int, ...]
    g: dict[int, float]
    metric_choice: str = "graph"

    def __post_init__(self):
        if self.metric_choice not in ("graph", "essential"):
            raise InputError(f"unknown metric_choice {self.metric_choice!r}")
        bd = tuple(sorted(int(v) for v in self.boundary))
        if not bd:
            raise InputError("boundary must be nonempty")
        if len(set(bd)) != len(bd):
            raise InputError("duplicate boundary vertex")
        for v in bd:
            self.graph.index_of(v)
            if v not in self.g:
                raise InputError(f"boundary data missing at vertex {v}")
            if not np.isfinite(self.g[v]):
                raise InputError(f"boundary data not finite at vertex {v}")
        object.__setattr__(self, "boundary", bd)
        object.__setattr__(self, "g", {v: float(self.g[v]) for v in bd})

    def edge_mask(self) -> np.ndarray | None:
        if self.metric_choice == "essential":
            return self.graph.positive_edge_mask()
        return None


@dataclass(frozen=True)
class AMLESolution:
    """Solver output: the field, convergence data, and degenerate vertices.

    ``u`` equals the boundary data exactly on the boundary and is NaN on
    degenerate vertices.  ``residual`` is the largest local slope
    imbalance over non-degenerate interior vertices.
    """

    u: dict[int, float]
    residual: float
    iterations: int
    converged: bool
    degenerate_vertices: tuple[int, ...]
    tol: float
    problem: AMLEProblem = field(repr=False)


@dataclass(frozen=True)
class _ColorClass:
    """One independent set of interior vertices with its pair tables."""

    verts: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    coef_i: np.ndarray
    coef_j: np.ndarray
    inner: np.ndarray
    outer: np.ndarray


class _Sweep:
    """Vectorized incidence structure for the relaxation sweeps.

    Holds flat neighbor arrays for residual evaluation, plus a greedy
    coloring of the active vertices into independent classes with
    precomputed neighbor-pair coefficients for the exact local solve
    t* = max_i min_j (l_j u_i + l_i u_j) / (l_i + l_j).
    """

    def __init__(self, G: MetricMeasureGraph, active_idx: np.ndarray, mask):
        indptr, heads, eidx = G._adjacency()
        rows: list[int] = []
        nbrs_of: list[np.ndarray] = []
        lens_of: list[np.ndarray] = []
        nbr: list[int] = []
        lens: list[float] = []
        ptr = [0]
        for vi in active_idx:
            vn: list[int] = []
            vl: list[float] = []
            for p in range(indptr[vi], indptr[vi + 1]):
                if mask is not None and not mask[eidx[p]]:
                    continue
                vn.append(int(heads[p]))
                vl.append(float(G.edge_lengths[eidx[p]]))
            nbr.extend(vn)
            lens.extend(vl)
            ptr.append(len(nbr))
            rows.append(int(vi))
            nbrs_of.append(np.asarray(vn, dtype=np.int64))
            lens_of.append(np.asarray(vl, dtype=np.float64))
        self.active = np.asarray(rows, dtype=np.int64)
        self.starts = np.asarray(ptr[:-1], dtype=np.int64)
        counts = np.diff(np.asarray(ptr, dtype=np.int64))
        self.nbr = np.asarray(nbr, dtype=np.int64)
        self.lens = np.asarray(lens, dtype=np.float64)
        self.expand = np.repeat(np.arange(len(rows)), counts)
        self.classes = self._color_classes(rows, nbrs_of, lens_of)

    @staticmethod
    def _color_classes(rows, nbrs_of, lens_of) -> list[_ColorClass]:
        color_of: dict[int, int] = {}
        for k, vi in enumerate(rows):
            used = {color_of[int(w)] for w in nbrs_of[k] if int(w) in color_of}
            c = 0
            while c in used:
                c += 1
            color_of[vi] = c
        classes = []
        for c in range(max(color_of.values()) + 1):
            members = [k for k, vi in enumerate(rows) if color_of[vi] == c]
            pair_i, pair_j, coef_i, coef_j = [], [], [], []
            inner: list[int] = []
            outer: list[int] = []
            pos_pairs = 0
            pos_blocks = 0
            for k in members:
                vn, vl = nbrs_of[k], lens_of[k]
                d = len(vn)
                pair_i.append(np.repeat(vn, d))
                pair_j.append(np.tile(vn, d))
                li = np.repeat(vl, d)
                lj = np.tile(vl, d)
                den = li + lj
                coef_i.append(li / den)
                coef_j.append(lj / den)
                inner.extend(range(pos_pairs, pos_pairs + d * d, d))
                outer.append(pos_blocks)
                pos_pairs += d * d
                pos_blocks += d
            classes.append(
                _ColorClass(
                    verts=np.asarray([rows[k] for k in members], dtype=np.int64),
                    pair_i=np.concatenate(pair_i),
                    pair_j=np.concatenate(pair_j),
                    coef_i=np.concatenate(coef_i),
                    coef_j=np.concatenate(coef_j),
                    inner=np.asarray(inner, dtype=np.int64),
                    outer=np.asarray(outer, dtype=np.int64),
                )
            )
        return classes

    def slopes(self, u: np.ndarray):
        s = (u[self.nbr] - u[self.active[self.expand]]) / self.lens
        sup = np.maximum.reduceat(s, self.starts)
        sdn = np.maximum.reduceat(-s, self.starts)
        return sup, sdn

    def relax(self, u: np.ndarray) -> None:
        for cls in self.classes:
            t = cls.coef_j * u[cls.pair_i] + cls.coef_i * u[cls.pair_j]
            mins = np.minimum.reduceat(t, cls.inner)
            u[cls.verts] = np.maximum.reduceat(mins, cls.outer)


def _reachable_from(G: MetricMeasureGraph, sources: Sequence[int], mask) -> np.ndarray:
    dist = G.distances_from(list(sources), mask=mask, min_only=True)
    return np.isfinite(dist)


def solve_amle(
    problem: AMLEProblem,
    tol: float = 1e-10,
    max_iter: int = 10 ** 6,
    init: str | Mapping[int, float] = "mcshane",
) -> AMLESolution:
    """Gauss-Seidel relaxation for the discrete infinity-harmonic problem.

    Each iteration sweeps the interior once, replacing every vertex value
    by the exact balance point of its neighbors, one color class at a
    time so no two adjacent vertices ever update against stale values.
    Stops when the largest local slope imbalance is at most ``tol``; on
    hitting ``max_iter`` first, returns the best iterate with
    ``converged = False``.  ``init`` selects the starting interior fill:
    the range-clamped McShane extension (default), the constant min or
    max of the boundary data, or an explicit field.
    """
    if not (tol > 0):
        raise InputError("tol must be positive")
    G = problem.graph
    mask = problem.edge_mask()
    ids = G.vertex_ids
    bset = set(problem.boundary)

    reach = _reachable_from(G, problem.boundary, mask)
    interior_idx = np.asarray(
        [i for i in range(G.n_vertices) if int(ids[i]) not in bset], dtype=np.int64
    )
    active_idx = interior_idx[reach[interior_idx]] if interior_idx.size else interior_idx
    degenerate = tuple(
        int(ids[i]) for i in interior_idx if not reach[i]
    )

    u = np.full(G.n_vertices, math.nan)
    for v in problem.boundary:
        u[G.index_of(v)] = problem.g[v]

    gmin = min(problem.g.values())
    gmax = max(problem.g.values())
    if isinstance(init, str):
        if init == "mcshane":
            tu = mcshane_extend(G, problem.boundary, problem.g, problem.metric_choice)
            for i in active_idx:
                u[i] = min(gmax, max(gmin, tu[int(ids[i])]))
        elif init == "min":
            u[active_idx] = gmin
        elif init == "max":
            u[active_idx] = gmax
        else:
            raise InputError(f"unknown init {init!r}")
    else:
        for i in active_idx:
            vid = int(ids[i])
            if vid not in init:
                raise InputError(f"init field missing vertex {vid}")
            val = float(init[vid])
            if not np.isfinite(val):
                raise InputError(f"init field not finite at vertex {vid}")
            u[i] = val

    if active_idx.size == 0:
        return AMLESolution(
            u={int(ids[i]): float(u[i]) for i in range(G.n_vertices)},
            residual=0.0,
            iterations=0,
            converged=True,
            degenerate_vertices=degenerate,
            tol=float(tol),
            problem=problem,
        )

    sweep = _Sweep(G, active_idx, mask)
    iterations = 0
    while True:
        sup, sdn = sweep.slopes(u)
        residual = float(np.max(np.abs(sup - sdn)))
        if residual <= tol:
            converged = True
            break
        if iterations >= max_iter:
            converged = False
            break
        sweep.relax(u)
        iterations += 1

    return AMLESolution(
        u={int(ids[i]): float(u[i]) for i in range(G.n_vertices)},
        residual=residual,
        iterations=iterations,
        converged=converged,
        degenerate_vertices=degenerate,
        tol=float(tol),
        problem=problem,
    )


def check_amle_local(u: Mapping[int, float], problem: AMLEProblem) -> dict[int, float]:
    """Per-interior-vertex slope imbalance |max up-slope - max down-slope|.

    Requires ``u`` to equal the boundary data exactly.  Interior vertices
    with no edges under the problem's metric choice get residual 0 (the
    balance condition is vacuous there, the degenerate regime).
    """
    G = problem.graph
    ids = G.vertex_ids
    mask = problem.edge_mask()
    for v in problem.boundary:
        if v not in u:
            raise InputError(f"u missing boundary vertex {v}")
        if float(u[v]) != problem.g[v]:
            raise InputError(f"u differs from boundary data at vertex {v}")
    bset = set(problem.boundary)
    indptr, heads, eidx = G._adjacency()
    out: dict[int, float] = {}
    for vi in range(G.n_vertices):
        vid = int(ids[vi])
        if vid in bset:
            continue
        sup, sdn = -math.inf, -math.inf
        for p in range(indptr[vi], indptr[vi + 1]):
            if mask is not None and not mask[eidx[p]]:
                continue
            wid = int(ids[heads[p]])
            if vid not in u or wid not in u:
                raise InputError(f"u missing a value near vertex {vid}")
            ux, uw = float(u[vid]), float(u[wid])
            if not (np.isfinite(ux) and np.isfinite(uw)):
                raise InputError(f"u not finite near vertex {vid}")
            slope = (uw - ux) / float(G.edge_lengths[eidx[p]])
            sup = max(sup, slope)
            sdn = max(sdn, -slope)
        out[vid] = abs(sup - sdn) if np.isfinite(sup) else 0.0
    return out


def comparison_check(
    u1: AMLESolution, u2: AMLESolution, tol: float | None = None
) -> bool:
    """True when u1 <= u2 + tol pointwise (degenerate vertices skipped).

    The two solutions must come from the same graph, boundary, and metric
    choice, with boundary data g1 <= g2; anything else is an input error.
    """
    p1, p2 = u1.problem, u2.problem
    if p1.graph is not p2.graph or p1.boundary != p2.boundary:
        raise InputError("comparison_check needs solutions of matching problems")
    if p1.metric_choice != p2.metric_choice:
        raise InputError("comparison_check needs a common metric choice")
    for v in p1.boundary:
        if p1.g[v] > p2.g[v]:
            raise InputError("comparison_check requires g1 <= g2 on the boundary")
    if tol is None:
        tol = max(u1.tol, u2.tol)
    for vid, a in u1.u.items():
        b = u2.u[vid]
        if math.isnan(a) or math.isnan(b):
            continue
        if a > b + tol:
            return False
    return True


def infinity_harmonic_extend(
    G: MetricMeasureGraph,
    omega: Sequence[int],
    g: Mapping[int, float],
    tol: float = 1e-10,
    max_iter: int = 10 ** 6,
) -> AMLESolution:
    """Infinity-harmonic extension of g across Omega via the essential metric.

    The boundary is the set of complement vertices joined to Omega by a
    positive-measure edge; the problem is solved on the induced subgraph
    of Omega plus that boundary under the essential metric, and g is
    copied outside Omega.  When no positive-measure edge leaves Omega the
    whole of Omega is degenerate and reported as such, the regime where
    extension data transfers with no uniqueness.
    """
    om = sorted(int(v) for v in omega)
    if not om:
        raise InputError("Omega must be nonempty")
    omset = set(om)
    for v in om:
        G.index_of(v)
    ids = G.vertex_ids
    comp = [int(v) for v in ids if int(v) not in omset]
    if not comp:
        raise InputError("Omega covers the whole graph; nothing to extend from")
    for v in comp:
        if v not in g:
            raise InputError(f"g missing value at complement vertex {v}")
        if not np.isfinite(g[v]):
            raise InputError(f"g not finite at vertex {v}")

    pmask = G.positive_edge_mask()
    boundary = set()
    for e in G.edges():
        if not pmask[e.index]:
            continue
        if e.a in omset and e.b not in omset:
            boundary.add(e.b)
        elif e.b in omset and e.a not in omset:
            boundary.add(e.a)

    base_u = {v: float(g[v]) for v in comp}
    if not boundary:
        # no positive-measure edge leaves Omega: every Omega vertex is
        # degenerate and the "extension" carries no information
        for v in om:
            base_u[v] = math.nan
        dummy = AMLEProblem(
            graph=G,
            boundary=tuple(comp),
            g={v: float(g[v]) for v in comp},
            metric_choice="essential",
        )
        return AMLESolution(
            u=base_u,
            residual=0.0,
            iterations=0,
            converged=True,
            degenerate_vertices=tuple(om),
            tol=float(tol),
            problem=dummy,
        )

    H = G.subgraph_vertices(om + sorted(boundary))
    sub = AMLEProblem(
        graph=H,
        boundary=tuple(sorted(boundary)),
        g={v: float(g[v]) for v in sorted(boundary)},
        metric_choice="essential",
    )
    sol = solve_amle(sub, tol=tol, max_iter=max_iter, init="mcshane")
    for v in om:
        base_u[v] = sol.u[v]
    return AMLESolution(
        u=base_u,
        residual=sol.residual,
        iterations=sol.iterations,
        converged=sol.converged,
        degenerate_vertices=sol.degenerate_vertices,
        tol=float(tol),
        problem=sub,
    )
