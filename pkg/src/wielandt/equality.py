"""Deciding and certifying equality in Wielandt's inequality.

Three equivalent tests are offered for the existence of a common invariant
subspace of A and B carrying the eigenvalues ``lambda_{i_j}(A)`` of A and the
top-k eigenvalues of B:

* ``condition1_search`` looks for the subspace itself,
* ``condition2_check`` tests the additive identity at a finite t,
* ``condition3_check`` tests the first-order rates at t = 0+.

``certify`` builds a piecewise certificate along [0, 1] from the ordered
eigenvectors of the pencil; ``verify_certificate`` re-checks one from scratch.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from math import comb, prod
from typing import Iterator, Sequence

import numpy as np

from .core import (
    CLUSTER_TOL,
    EQUALITY_TOL,
    ClusterStructure,
    HermitianMatrix,
    OrthonormalFrame,
    as_hermitian,
    eigh,
    eigvalsh,
    frame_compression,
    invariant_residual,
    scale_of,
    subspace_distance,
    top_k_spectral_structure,
    _as_rng,
    _same_dim,
)
from .errors import CertificationFailure, CombinatorialCap, EqualityNotDetected, InputError
from .inequalities import EQUALITY, IndexSet, InequalityReport, as_index_set, wielandt_check
from .pencil import trace_pencil
from .perturbation import first_order_rates

COMPLETION_CAP = 64
ENUMERATION_CAP = 100_000
DEFAULT_T_CAP = 10.0
SAMPLES_PER_SEGMENT = 9


def _setup(A, B, S):
    A, B = as_hermitian(A), as_hermitian(B)
    _same_dim(A, B)
    return A, B, as_index_set(A.n, S)


def check_equality(A, B, S, tol: float = EQUALITY_TOL) -> InequalityReport:
    """Wielandt report for S; its verdict is ``"equality"`` inside the band."""
    return wielandt_check(A, B, S, tol)


def _cluster_counts(clusters: ClusterStructure, S: IndexSet) -> dict[int, int]:
    counts: dict[int, int] = {}
    for pos in S.positions:
        c = clusters.cluster_of(pos)
        counts[c] = counts.get(c, 0) + 1
    return counts


def admissible_p_sets(clusters: ClusterStructure, S: IndexSet) -> Iterator[tuple[int, ...]]:
    """Zero-based increasing tuples p with p_j in the same cluster as i_j, lexicographic."""
    counts = _cluster_counts(clusters, S)
    b = clusters.boundaries
    factors = [itertools.combinations(range(b[c], b[c + 1]), m) for c, m in sorted(counts.items())]
    for parts in itertools.product(*factors):
        yield tuple(p for part in parts for p in part)


def count_admissible(clusters: ClusterStructure, S: IndexSet) -> int:
    mult = clusters.multiplicities
    return prod(comb(mult[c], m) for c, m in _cluster_counts(clusters, S).items())


@dataclass(frozen=True)
class Condition3Result:
    p: tuple[int, ...]  # one-based
    achieved: float
    target: float

    @property
    def deficit(self) -> float:
        return self.target - self.achieved

    def to_dict(self) -> dict:
        return {"p": list(self.p), "achieved": self.achieved, "target": self.target}


def condition3_maximum(A, B, S, tol_cluster: float = CLUSTER_TOL) -> Condition3Result:
    """Largest rate sum over admissible p, chosen per cluster.

    Rates are non-increasing inside each cluster of A, so the maximum takes the
    leading rates of each cluster; exact ties favour positions already in S.
    """
    A, B, S = _setup(A, B, S)
    rates = first_order_rates(A, B, tol_cluster)
    nu = rates.nu
    in_S = set(S.positions)
    b = rates.clusters.boundaries
    chosen: list[int] = []
    for c, m in sorted(_cluster_counts(rates.clusters, S).items()):
        members = sorted(range(b[c], b[c + 1]), key=lambda q: (-nu[q], q not in in_S, q))
        chosen.extend(members[:m])
    chosen.sort()
    target = float(np.sum(eigvalsh(B)[:S.k]))
    return Condition3Result(tuple(q + 1 for q in chosen), float(np.sum(nu[chosen])), target)


def condition3_check(A, B, S, tol: float = EQUALITY_TOL,
                     tol_cluster: float = CLUSTER_TOL) -> Condition3Result | None:
    """The maximizing p if its rate sum reaches the top-k sum of B, else None."""
    A, B, S = _setup(A, B, S)
    res = condition3_maximum(A, B, S, tol_cluster)
    return res if abs(res.deficit) <= tol * scale_of(A, B) else None


def _rotate_by_leakage(E: np.ndarray, W: np.ndarray, clusters: ClusterStructure,
                       A: HermitianMatrix, F: np.ndarray) -> np.ndarray:
    """Inside degenerate clusters of the compressed A, put least-leaking directions first.

    A direction g of span(E) can only belong to an A-invariant F + G if A E g has
    no component outside span([F, E]).
    """
    n = A.n
    basis = np.hstack([F, E])
    outside = np.eye(n) - basis @ basis.conj().T
    W = W.copy()
    for sl in clusters.slices():
        if sl.stop - sl.start < 2:
            continue
        L = outside @ A.array @ E @ W[:, sl]
        _, _, Yh = np.linalg.svd(L)
        W[:, sl] = W[:, sl] @ Yh.conj().T[:, ::-1]
    return W


def _frame_checks(A, B, S: IndexSet, U: OrthonormalFrame, lb: np.ndarray, la: np.ndarray) -> dict:
    return {
        "A_invariance": invariant_residual(A, U),
        "B_invariance": invariant_residual(B, U),
        "top_k_B_match": float(np.max(np.abs(eigvalsh(frame_compression(B, U)) - lb[:S.k]))),
        "A_spectrum_match": float(np.max(np.abs(eigvalsh(frame_compression(A, U)) - la[S.positions]))),
    }


def condition1_search(A, B, S, tol: float = EQUALITY_TOL, tol_cluster: float = CLUSTER_TOL,
                      cap: int = COMPLETION_CAP) -> OrthonormalFrame | None:
    """A k-dimensional subspace invariant under A and B with the required spectra.

    The subspace must contain B's eigenvectors above the k-th eigenvalue and
    take the remaining dimensions from B's eigenspace at the k-th eigenvalue.
    Completions are drawn from eigenvectors of A compressed to that eigenspace.
    """
    A, B, S = _setup(A, B, S)
    band = tol * scale_of(A, B)
    top = top_k_spectral_structure(B, S.k, tol_cluster)
    lb = top.decomposition.values
    la = eigvalsh(A)
    F = top.forced.vectors
    if top.deficiency == 0:
        candidates: Iterator[np.ndarray] = iter([F])
    else:
        E = top.free.vectors
        m, d = E.shape[1], top.deficiency
        total = comb(m, d)
        if total > cap:
            raise CombinatorialCap(total, cap, "boundary-eigenspace completions")
        comp = eigh(frame_compression(A, top.free), tol_cluster)
        W = _rotate_by_leakage(E, np.array(comp.vectors), comp.clusters, A, F)
        candidates = (np.hstack([F, E @ W[:, list(c)]]) for c in itertools.combinations(range(m), d))
    for V in candidates:
        U = OrthonormalFrame.from_vectors(V)
        checks = _frame_checks(A, B, S, U, lb, la)
        if all(v <= band for v in checks.values()):
            return U
    return None


def condition2_check(A, B, S, t_1: float, tol: float = EQUALITY_TOL, tol_cluster: float = CLUSTER_TOL,
                     cap: int = ENUMERATION_CAP) -> tuple[int, ...] | None:
    """First admissible p (one-based, lexicographic) satisfying the additive identity at t_1."""
    A, B, S = _setup(A, B, S)
    if not t_1 > 0:
        raise InputError(f"t_1 must be positive, got {t_1}")
    band = tol * scale_of(A, B)
    dec = eigh(A, tol_cluster)
    total = count_admissible(dec.clusters, S)
    if total > cap:
        raise CombinatorialCap(total, cap, "admissible index tuples")
    la = dec.values
    lt = eigvalsh(A.plus(B, t_1))
    shift = t_1 * float(np.sum(eigvalsh(B)[:S.k]))
    for p in admissible_p_sets(dec.clusters, S):
        idx = list(p)
        if abs(np.sum(lt[idx]) - np.sum(la[idx]) - shift) <= band:
            return tuple(q + 1 for q in p)
    return None


@dataclass(frozen=True, eq=False)
class ConditionReport:
    condition1: OrthonormalFrame | None
    condition2: tuple[float, tuple[int, ...]] | None
    condition3: Condition3Result | None
    t_1: float

    @property
    def present(self) -> tuple[bool, bool, bool]:
        return (self.condition1 is not None, self.condition2 is not None, self.condition3 is not None)

    @property
    def consistent(self) -> bool:
        return len(set(self.present)) == 1

    def to_dict(self) -> dict:
        from .jsonio import frame_to_json

        return {
            "condition1": None if self.condition1 is None else frame_to_json(self.condition1),
            "condition2": None if self.condition2 is None
            else {"t_1": self.condition2[0], "p": list(self.condition2[1])},
            "condition3": None if self.condition3 is None else self.condition3.to_dict(),
            "t_1": self.t_1,
            "consistent": self.consistent,
        }


def automatic_t1(A, B, tol_cluster: float = CLUSTER_TOL, grid_size: int = 101) -> float:
    """Midpoint of the first crossing-free interval of the pencil on (0, 1]."""
    trace = trace_pencil(A, B, 0.0, 1.0, grid_size=grid_size, tol_cluster=tol_cluster)
    first = trace.crossings[0].t if trace.crossings else 1.0
    return 0.5 * first


def equivalence_report(A, B, S, tol: float = EQUALITY_TOL, tol_cluster: float = CLUSTER_TOL,
                       t_1: float | None = None) -> ConditionReport:
    """Run all three condition checks; ``consistent`` is False if they disagree."""
    A, B, S = _setup(A, B, S)
    if t_1 is None:
        t_1 = automatic_t1(A, B, tol_cluster)
    c1 = condition1_search(A, B, S, tol, tol_cluster)
    p2 = condition2_check(A, B, S, t_1, tol, tol_cluster)
    c3 = condition3_check(A, B, S, tol, tol_cluster)
    return ConditionReport(c1, None if p2 is None else (t_1, p2), c3, t_1)


def maximal_t1(A, B, S, tol: float = EQUALITY_TOL, t_cap: float = DEFAULT_T_CAP,
               tol_cluster: float = CLUSTER_TOL, scan: int = 256) -> float:
    """Largest t up to which condition 2 keeps holding; ``math.inf`` if it holds at t_cap.

    Returns 0 when the rate condition fails at t = 0+.  The first failure is
    found on a uniform scan of (0, t_cap] and then bisected to relative width 1e-8.
    """
    A, B, S = _setup(A, B, S)
    if condition3_check(A, B, S, tol, tol_cluster) is None:
        return 0.0

    def holds(t):
        return condition2_check(A, B, S, t, tol, tol_cluster) is not None

    lo = 0.0
    for t in np.linspace(0.0, t_cap, scan + 1)[1:]:
        if holds(t):
            lo = float(t)
            continue
        hi = float(t)
        while hi - lo > 1e-8 * max(hi, 1e-300):
            mid = 0.5 * (lo + hi)
            if holds(mid):
                lo = mid
            else:
                hi = mid
        return lo
    return math.inf


@dataclass(frozen=True, eq=False)
class EqualityCertificate:
    A: HermitianMatrix
    B: HermitianMatrix
    index_set: IndexSet
    breakpoints: tuple[float, ...]
    subspaces: tuple[OrthonormalFrame, ...]
    residuals: tuple[float, ...]
    A_invariance: tuple[float, ...]
    B_invariance: tuple[float, ...]
    top_k_B_match: tuple[float, ...]
    slack: float
    tol: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def r(self) -> int:
        return len(self.subspaces)

    @property
    def max_residual(self) -> float:
        return max(self.residuals + self.A_invariance + self.B_invariance + self.top_k_B_match)


def _segment_residual(A, B, S: IndexSet, U: OrthonormalFrame, a: float, b: float, samples: int):
    """Worst gap between the compressed pencil's eigenvalues and lambda_{i_j}(t) on [a, b]."""
    worst, where = 0.0, a
    for t in np.linspace(a, b, max(samples, 2)):
        At = A.plus(B, float(t))
        mu = eigvalsh(frame_compression(At, U))
        dev = float(np.max(np.abs(mu - eigvalsh(At)[S.positions])))
        if dev > worst:
            worst, where = dev, float(t)
    return worst, where


def _measure(A, B, S: IndexSet, breakpoints: Sequence[float], frames: Sequence[OrthonormalFrame],
             samples: int) -> list[dict]:
    lb, la = eigvalsh(B), eigvalsh(A)
    out = []
    for l, U in enumerate(frames):
        m = _frame_checks(A, B, S, U, lb, la)
        m["orthonormality"] = U.orthonormality_error()
        m["residual"], m["worst_t"] = _segment_residual(A, B, S, U, breakpoints[l], breakpoints[l + 1],
                                                        samples)
        out.append(m)
    return out


_CHECK_ORDER = ("orthonormality", "A_invariance", "B_invariance", "top_k_B_match", "residual")


def _first_violation(measured: list[dict], band: float):
    for l, m in enumerate(measured):
        for key in _CHECK_ORDER:
            if m[key] > band:
                loc = {"segment": l + 1, "value": f"{m[key]:.3e}", "band": f"{band:.3e}"}
                if key == "residual":
                    loc["t"] = m["worst_t"]
                return key, loc
    return None


def certify(A, B, S, tol: float = EQUALITY_TOL, samples_per_segment: int = SAMPLES_PER_SEGMENT,
            tol_cluster: float = CLUSTER_TOL, detect_tol: float | None = None,
            grid_size: int = 101) -> EqualityCertificate:
    """Build and verify a piecewise invariant-subspace certificate of equality.

    Segments are the pieces of [0, 1] between crossings of the ordered curves.
    On each, the subspace is spanned by the eigenvectors of A(tau) at the
    positions in S, tau the segment midpoint, taken from the frame in which
    B's compression is diagonal.  Neighbouring segments with the same subspace
    are merged.  ``detect_tol`` (default ``tol``) sets the equality-detection
    band; ``tol`` sets the certification band.
    """
    A, B, S = _setup(A, B, S)
    report = check_equality(A, B, S, tol if detect_tol is None else detect_tol)
    if report.verdict != EQUALITY:
        raise EqualityNotDetected(
            "equality not detected", {"slack": f"{report.slack:.3e}", "verdict": report.verdict})
    band = tol * scale_of(A, B)
    trace = trace_pencil(A, B, 0.0, 1.0, grid_size=grid_size, tol_cluster=tol_cluster)
    cuts = [0.0] + trace.crossing_points() + [1.0]
    breakpoints, frames, spreads = [0.0], [], []
    for a, b in zip(cuts, cuts[1:]):
        U = _frame_at(A, B, S, 0.5 * (a + b), tol_cluster)
        if frames and subspace_distance(frames[-1], U) <= tol:
            breakpoints[-1] = b
        else:
            frames.append(U)
            breakpoints.append(b)
        # how much the choice of tau matters inside this segment
        spreads.append(max(subspace_distance(U, _frame_at(A, B, S, a + f * (b - a), tol_cluster))
                           for f in (0.25, 0.75)))
    measured = _measure(A, B, S, breakpoints, frames, samples_per_segment)
    bad = _first_violation(measured, band)
    if bad is not None:
        raise CertificationFailure(f"certificate invariant violated: {bad[0]}", bad[1])
    return EqualityCertificate(
        A=A, B=B, index_set=S,
        breakpoints=tuple(breakpoints),
        subspaces=tuple(frames),
        residuals=tuple(m["residual"] for m in measured),
        A_invariance=tuple(m["A_invariance"] for m in measured),
        B_invariance=tuple(m["B_invariance"] for m in measured),
        top_k_B_match=tuple(m["top_k_B_match"] for m in measured),
        slack=report.slack,
        tol=tol,
        diagnostics={
            "segments_before_merge": len(cuts) - 1,
            "crossings": trace.crossing_points(),
            "tau_angle_spread": spreads,
            "band": band,
        },
    )


def _frame_at(A, B, S: IndexSet, tau: float, tol_cluster: float) -> OrthonormalFrame:
    rates = first_order_rates(A.plus(B, tau), B, tol_cluster)
    return rates.adapted_frame.take(S.positions)


@dataclass(frozen=True)
class VerificationResult:
    valid: bool
    failure: str | None
    location: dict
    measured: list

    def to_dict(self) -> dict:
        return {"valid": self.valid, "failure": self.failure, "location": self.location,
                "measured": self.measured}


def verify_certificate(cert: EqualityCertificate, tol: float | None = None,
                       samples_per_segment: int = SAMPLES_PER_SEGMENT) -> VerificationResult:
    """Re-check every certificate invariant from its raw data."""
    A, B, S = cert.A, cert.B, cert.index_set
    tol = cert.tol if tol is None else tol
    band = tol * scale_of(A, B)
    bp = list(cert.breakpoints)
    if len(bp) != cert.r + 1 or bp[0] != 0.0 or bp[-1] != 1.0 or any(y <= x for x, y in zip(bp, bp[1:])):
        return VerificationResult(False, "breakpoints", {"breakpoints": bp}, [])
    if any(U.n != A.n or U.k != S.k for U in cert.subspaces):
        return VerificationResult(False, "subspace shape", {}, [])
    report = wielandt_check(A, B, S, tol)
    if report.verdict != EQUALITY:
        return VerificationResult(False, "equality", {"slack": report.slack}, [])
    measured = _measure(A, B, S, bp, cert.subspaces, samples_per_segment)
    bad = _first_violation(measured, band)
    if bad is not None:
        return VerificationResult(False, bad[0], bad[1], measured)
    return VerificationResult(True, None, {}, measured)


def search_r_greater_1(seed, n: int, k: int, trials: int, tol: float = EQUALITY_TOL) -> list[dict]:
    """Look for planted equality instances whose certificate needs several subspaces.

    Candidates are instances certified with r >= 2 pairwise-distinct subspaces
    for which no single common subspace is found.  They are leads for manual
    inspection, not counterexamples.
    """
    if k < 2:
        raise InputError("k = 1 always admits a single-subspace certificate (r = 1); use k >= 2")
    from .instances import equality_block

    children = np.random.SeedSequence(seed).spawn(trials) if trials > 0 else []
    found = []
    for trial, child in enumerate(children):
        inst = equality_block(n, k, _as_rng(child))
        try:
            cert = certify(inst.A, inst.B, inst.indices, tol)
        except CertificationFailure:
            continue
        if cert.r < 2:
            continue
        distinct = all(subspace_distance(U, V) > tol
                       for U, V in itertools.combinations(cert.subspaces, 2))
        if distinct and condition1_search(inst.A, inst.B, inst.indices, tol) is None:
            found.append({"trial": trial, "r": cert.r, "indices": list(inst.indices.indices),
                          "breakpoints": list(cert.breakpoints)})
    return found
