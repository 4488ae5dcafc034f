"""Ordered eigenvalue curves of the real pencil A(t) = A + tB.

A crossing is a parameter value where two adjacent ordered curves meet, or
where an identically coinciding pair of branches starts or stops coinciding
(the multiplicity pattern changes there).  Avoided crossings whose gap never
drops below ``gap_tol`` are reported separately as near misses.
"""
from __future__ import annotations

import math
from concurrent.futures import Executor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import linear_sum_assignment

from .core import (
    CLUSTER_TOL,
    ClusterStructure,
    EigenDecomposition,
    OrthonormalFrame,
    as_hermitian,
    eigh,
    eigvalsh,
    scale_of,
    _same_dim,
)
from .errors import InputError
from .inequalities import as_index_set
from .perturbation import first_order_rates

GAP_TOL = 1e-6
ZERO_TOL = 1e-11
REFINE_WIDTH = 1e-8
DEFAULT_GRID = 101

_INV_PHI = (math.sqrt(5) - 1) / 2
_GL_NODES, _GL_WEIGHTS = leggauss(5)


@dataclass(frozen=True)
class FrameMatch:
    """``permutation[i]`` is the position at the next sample matched to position i."""

    permutation: tuple[int, ...]
    score: float

    @property
    def is_identity(self) -> bool:
        return all(p == i for i, p in enumerate(self.permutation))


@dataclass(frozen=True)
class Crossing:
    t: float
    curves: tuple[int, ...]  # one-based ordered-curve indices that meet
    min_gap: float

    def to_dict(self) -> dict:
        return {"t": self.t, "curves": list(self.curves)}


@dataclass(frozen=True)
class NearMiss:
    t: float
    curves: tuple[int, int]
    min_gap: float


@dataclass(frozen=True, eq=False)
class PencilTrace:
    grid: np.ndarray
    curves: np.ndarray
    frames: tuple[OrthonormalFrame, ...]
    clusters: tuple[ClusterStructure, ...]
    matches: tuple[FrameMatch, ...]
    crossings: tuple[Crossing, ...]
    near_misses: tuple[NearMiss, ...] = ()
    min_gaps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gap_tol: float = 0.0

    @property
    def n(self) -> int:
        return self.curves.shape[1]

    @property
    def crossing_bound(self) -> int:
        return self.n * (self.n - 1)

    @property
    def within_crossing_bound(self) -> bool:
        return len(self.crossings) <= self.crossing_bound

    def crossing_points(self) -> list[float]:
        return [c.t for c in self.crossings]


def match_frames(prev: OrthonormalFrame, nxt: OrthonormalFrame,
                 prev_clusters: ClusterStructure | None = None,
                 next_clusters: ClusterStructure | None = None) -> FrameMatch:
    """Align ordered eigenvectors at one sample with those at the next.

    Overlaps between degenerate clusters are measured on whole subspaces, so the
    arbitrary basis chosen inside a cluster does not affect the alignment.
    """
    if prev.n != nxt.n or prev.k != nxt.k:
        raise InputError("frames must have the same shape")
    n = prev.k
    pl = prev_clusters.labels() if prev_clusters is not None else np.arange(n)
    nl = next_clusters.labels() if next_clusters is not None else np.arange(n)
    G = np.abs(prev.vectors.conj().T @ nxt.vectors) ** 2
    # block masses: ||P_c^* Q_d||_F^2 / min(|c|, |d|)
    cp, cn = pl.max() + 1, nl.max() + 1
    mass = np.zeros((cp, cn))
    np.add.at(mass, (pl[:, None], nl[None, :]), G)
    size_p = np.bincount(pl, minlength=cp)
    size_n = np.bincount(nl, minlength=cn)
    mass /= np.minimum(size_p[:, None], size_n[None, :])
    O = mass[pl][:, nl]
    rows, cols = linear_sum_assignment(O, maximize=True)
    perm = np.empty(n, dtype=int)
    perm[rows] = cols
    # keep the order inside each cluster-to-cluster block monotone
    for c in range(cp):
        for d in range(cn):
            src = [i for i in range(n) if pl[i] == c and nl[perm[i]] == d]
            if len(src) > 1:
                perm[src] = sorted(perm[src])
    score = float(sum(O[i, perm[i]] for i in range(n)))
    return FrameMatch(tuple(int(p) for p in perm), score)


def _one_sided(dec: EigenDecomposition, B) -> tuple[np.ndarray, np.ndarray]:
    right = _rates_from(dec, B)
    left = right.copy()
    for sl in dec.clusters.slices():
        left[sl] = right[sl][::-1]
    return right, left


def _rates_from(dec: EigenDecomposition, B) -> np.ndarray:
    U = dec.vectors
    nu = np.empty(len(dec.values))
    for sl in dec.clusters.slices():
        Uc = U[:, sl]
        C = Uc.conj().T @ B.array @ Uc
        if C.shape[0] == 1:
            nu[sl] = C[0, 0].real
        else:
            nu[sl] = np.linalg.eigvalsh((C + C.conj().T) / 2)[::-1]
    return nu


def derivative_at(A, B, t: float, side: str = "right", tol_cluster: float = CLUSTER_TOL) -> np.ndarray:
    """One-sided derivatives of the ordered curves at t.

    Right derivatives are the rates of ``A + tB`` in direction ``B``, which are
    non-increasing inside each cluster; left derivatives reverse that order.
    """
    if side not in ("left", "right"):
        raise InputError(f"side must be 'left' or 'right', got {side!r}")
    A, B = as_hermitian(A), as_hermitian(B)
    _same_dim(A, B)
    rates = first_order_rates(A.plus(B, t), B, tol_cluster)
    nu = np.array(rates.nu)
    if side == "left":
        for sl in rates.clusters.slices():
            nu[sl] = nu[sl][::-1]
    return nu


class _Pencil:
    """Evaluation helper caching the scale of A and B."""

    def __init__(self, A, B, tol_cluster):
        self.A, self.B = A, B
        self.tol_cluster = tol_cluster
        self.scale = scale_of(A, B)

    def at(self, t: float):
        return self.A.array + t * self.B.array

    def values(self, t: float) -> np.ndarray:
        return np.linalg.eigvalsh(self.at(t))[::-1]

    def gap(self, t: float, p: int) -> float:
        w = self.values(t)
        return float(w[p] - w[p + 1])

    def decompose(self, t: float) -> EigenDecomposition:
        return eigh(self.A.plus(self.B, t), self.tol_cluster)


def _golden_min(f, a: float, b: float, width: float) -> tuple[float, float]:
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    best = min(((fc, c), (fd, d), (f(a), a), (f(b), b)))
    return best[1], best[0]


def _bisect(pred, a: float, b: float, width: float) -> float:
    """Transition point of a predicate with ``pred(a) != pred(b)``."""
    pa = pred(a)
    while b - a > width:
        m = 0.5 * (a + b)
        if pred(m) == pa:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def _runs(flags: np.ndarray) -> list[tuple[int, int]]:
    out, start = [], None
    for s, f in enumerate(flags):
        if f and start is None:
            start = s
        elif not f and start is not None:
            out.append((start, s - 1))
            start = None
    if start is not None:
        out.append((start, len(flags) - 1))
    return out


def _merge_brackets(brackets: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for a, b in sorted(brackets):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def _detect(pen: _Pencil, grid, vals, rights, lefts, matches, gap_abs, zero_abs, width, refine):
    """Crossing events ``(t, pair, gap)`` and near misses, per adjacent pair."""
    G = len(grid)
    n = vals.shape[1]
    events: list[tuple[float, int, float]] = []
    near: list[NearMiss] = []
    for p in range(n - 1):
        gaps = vals[:, p] - vals[:, p + 1]
        zero = gaps <= zero_abs
        touch = gaps < gap_abs
        persistent = [(s1, s2) for s1, s2 in _runs(zero) if s2 > s1]
        in_run = np.zeros(G, dtype=bool)
        for s1, s2 in persistent:
            in_run[max(s1 - 1, 0):s2 + 2] = True

            def is_zero(t, p=p):
                return pen.gap(t, p) <= zero_abs

            for lo, hi in ((s1 - 1, s1), (s2, s2 + 1)):
                if lo < 0 or hi >= G:
                    continue
                t = _bisect(is_zero, grid[lo], grid[hi], width) if refine else 0.5 * (grid[lo] + grid[hi])
                events.append((t, p, 0.0))
        brackets = []
        for s in range(G):
            if touch[s] and not in_run[s]:
                brackets.append((grid[max(s - 1, 0)], grid[min(s + 1, G - 1)]))
        for s in range(G - 1):
            if in_run[s] or in_run[s + 1]:
                continue
            closing = rights[s][p] - rights[s][p + 1] < 0 and lefts[s + 1][p] - lefts[s + 1][p + 1] > 0
            swapped = matches[s].permutation[p] == p + 1 or matches[s].permutation[p + 1] == p
            if closing or swapped:
                brackets.append((grid[s], grid[s + 1]))
        for a, b in _merge_brackets(brackets):
            inside = [s for s in range(G) if a <= grid[s] <= b]
            s = min(inside, key=lambda s: gaps[s])
            t, g = float(grid[s]), float(gaps[s])
            if refine:
                tg, gg = _golden_min(lambda t, p=p: pen.gap(t, p), a, b, width)
                if gg < g:
                    t, g = tg, gg
            if g < gap_abs:
                events.append((t, p, g))
            else:
                near.append(NearMiss(float(t), (p + 1, p + 2), float(g)))
    return events, near


def _group(events, t_lo, t_hi, merge_dist) -> list[Crossing]:
    crossings: list[Crossing] = []
    group: list[tuple[float, int, float]] = []

    def flush():
        if not group:
            return
        t = float(np.mean([e[0] for e in group]))
        if t - t_lo > merge_dist and t_hi - t > merge_dist:
            curves = sorted({c for _, p, _ in group for c in (p + 1, p + 2)})
            crossings.append(Crossing(t, tuple(curves), float(min(e[2] for e in group))))
        group.clear()

    for e in sorted(events):
        if group and e[0] - group[-1][0] > merge_dist:
            flush()
        group.append(e)
    flush()
    return crossings


def trace_pencil(A, B, t_lo: float = 0.0, t_hi: float = 1.0, grid_size: int = DEFAULT_GRID,
                 refine: bool = True, tol_cluster: float = CLUSTER_TOL, gap_tol: float = GAP_TOL,
                 executor: Executor | None = None) -> PencilTrace:
    """Sample the ordered curves on a uniform grid and locate crossings in (t_lo, t_hi).

    ``gap_tol`` is relative to ``1 + |A| + |B|``.  With ``refine`` set, each
    crossing is localized to width ``1e-8 * (t_hi - t_lo)`` and inserted into
    the grid.  Per-sample eigenproblems are independent; pass an executor to
    evaluate them in parallel.
    """
    A, B = as_hermitian(A), as_hermitian(B)
    _same_dim(A, B)
    if not t_lo < t_hi:
        raise InputError(f"need t_lo < t_hi, got [{t_lo}, {t_hi}]")
    if grid_size < 2:
        raise InputError(f"grid_size must be at least 2, got {grid_size}")
    pen = _Pencil(A, B, tol_cluster)
    gap_abs = gap_tol * pen.scale
    zero_abs = ZERO_TOL * pen.scale
    length = t_hi - t_lo
    width = REFINE_WIDTH * length
    mapper = executor.map if executor is not None else map

    def sample(ts):
        decs = list(mapper(pen.decompose, ts))
        sides = [_one_sided(d, B) for d in decs]
        return decs, sides

    grid = np.linspace(t_lo, t_hi, grid_size)
    decs, sides = sample(grid)
    vals = np.array([d.values for d in decs])
    matches = [match_frames(decs[s].frame, decs[s + 1].frame, decs[s].clusters, decs[s + 1].clusters)
               for s in range(len(grid) - 1)]
    events, near = _detect(pen, grid, vals, [r for r, _ in sides], [l for _, l in sides],
                           matches, gap_abs, zero_abs, width, refine)
    crossings = _group(events, t_lo, t_hi, 100 * width)

    if refine and crossings:
        extra = [c.t for c in crossings if np.min(np.abs(grid - c.t)) > width]
        if extra:
            grid = np.sort(np.concatenate([grid, extra]))
            decs, sides = sample(grid)
            vals = np.array([d.values for d in decs])
            matches = [match_frames(decs[s].frame, decs[s + 1].frame, decs[s].clusters,
                                    decs[s + 1].clusters) for s in range(len(grid) - 1)]
    diffs = vals[:, :-1] - vals[:, 1:]
    min_gaps = diffs.min(axis=0) if diffs.size else np.zeros(0)
    return PencilTrace(
        grid=grid,
        curves=vals,
        frames=tuple(d.frame for d in decs),
        clusters=tuple(d.clusters for d in decs),
        matches=tuple(matches),
        crossings=tuple(crossings),
        near_misses=tuple(near),
        min_gaps=min_gaps,
        gap_tol=gap_abs,
    )


def phi_curve(trace: PencilTrace, S) -> np.ndarray:
    """Sum of the ordered curves selected by S at every grid sample."""
    S = as_index_set(trace.n, S)
    return trace.curves[:, S.positions].sum(axis=1)


def phi_value(A, B, S, t: float) -> float:
    A, B = as_hermitian(A), as_hermitian(B)
    S = as_index_set(A.n, S)
    return float(np.sum(eigvalsh(A.plus(B, t))[S.positions]))


def integrate_phi_prime(A, B, S, t0: float = 0.0, t1: float = 1.0, tol_cluster: float = CLUSTER_TOL,
                        quad_tol: float = 1e-10, grid_size: int = DEFAULT_GRID,
                        max_depth: int = 40) -> float:
    """Integral of the derivative of the selected curve sum over [t0, t1].

    Quadrature is adaptive 5-point Gauss-Legendre on each crossing-free
    subinterval, so the result should equal phi(t1) - phi(t0).
    """
    A, B = as_hermitian(A), as_hermitian(B)
    S = as_index_set(A.n, S)
    if not t0 < t1:
        raise InputError(f"need t0 < t1, got [{t0}, {t1}]")
    pos = S.positions
    pen = _Pencil(A, B, tol_cluster)

    def f(t):
        return float(np.sum(_rates_from(pen.decompose(t), B)[pos]))

    def panel(a, b):
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        return half * sum(w * f(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS))

    def adapt(a, b, whole, tol, depth):
        m = 0.5 * (a + b)
        left, right = panel(a, m), panel(m, b)
        if depth >= max_depth or abs(left + right - whole) <= tol:
            return left + right
        return adapt(a, m, left, tol / 2, depth + 1) + adapt(m, b, right, tol / 2, depth + 1)

    trace = trace_pencil(A, B, t0, t1, grid_size=grid_size, tol_cluster=tol_cluster)
    cuts = [t0] + trace.crossing_points() + [t1]
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        tol = quad_tol * (b - a) / (t1 - t0)
        total += adapt(a, b, panel(a, b), tol, 0)
    return total
