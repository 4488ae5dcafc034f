"""Wielandt's inequality over index sets, and the Lidskii majorization check."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .core import EQUALITY_TOL, as_hermitian, eigvalsh, scale_of, _same_dim
from .errors import IndexOutOfRange, LengthMismatch, ScanTooLarge

SCAN_CAP = 14

HOLDS, EQUALITY, VIOLATED = "holds", "equality", "violated"


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing one-based indices ``1 <= i_1 < ... < i_k <= n``, ``k <= n-1``."""

    n: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if not 1 <= len(idx) <= self.n - 1:
            raise IndexOutOfRange(f"need 1 <= k <= n-1 = {self.n - 1}, got k = {len(idx)}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise IndexOutOfRange(f"indices must be strictly increasing: {idx}")
        if idx[0] < 1 or idx[-1] > self.n:
            raise IndexOutOfRange(f"indices must lie in [1, {self.n}]: {idx}")

    @property
    def k(self) -> int:
        return len(self.indices)

    @property
    def positions(self) -> list[int]:
        """Zero-based positions."""
        return [i - 1 for i in self.indices]

    @classmethod
    def parse(cls, n: int, text: str | Sequence[int]) -> "IndexSet":
        if isinstance(text, str):
            try:
                items = [int(s) for s in text.replace(" ", "").split(",") if s]
            except ValueError as exc:
                raise IndexOutOfRange(f"cannot parse indices {text!r}") from exc
        else:
            items = list(text)
        return cls(n, tuple(items))

    def __str__(self):
        return "{" + ",".join(map(str, self.indices)) + "}"


def as_index_set(n: int, S) -> IndexSet:
    if isinstance(S, IndexSet):
        if S.n != n:
            raise IndexOutOfRange(f"index set is for n={S.n}, matrices are {n}x{n}")
        return S
    return IndexSet.parse(n, S)


@dataclass(frozen=True)
class InequalityReport:
    indices: tuple[int, ...]
    lhs: float
    rhs: float
    slack: float
    verdict: str
    tol: float

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "verdict": self.verdict,
        }


def verdict_for(slack: float, band: float) -> str:
    if abs(slack) <= band:
        return EQUALITY
    return VIOLATED if slack < -band else HOLDS


def _report(S: IndexSet, la, lb, lab, band: float) -> InequalityReport:
    pos = S.positions
    lhs = float(np.sum(lab[pos]))
    rhs = float(np.sum(la[pos]) + np.sum(lb[:S.k]))
    slack = rhs - lhs
    return InequalityReport(S.indices, lhs, rhs, slack, verdict_for(slack, band), band)


def _spectra(A, B):
    A, B = as_hermitian(A), as_hermitian(B)
    _same_dim(A, B)
    return A, B, eigvalsh(A), eigvalsh(B), eigvalsh(A.plus(B))


def wielandt_check(A, B, S, tol: float = EQUALITY_TOL) -> InequalityReport:
    """Both sides of Wielandt's inequality for one index set.

    ``tol`` is relative: the equality band is ``tol * (1 + |A| + |B|)``.
    """
    A, B, la, lb, lab = _spectra(A, B)
    S = as_index_set(A.n, S)
    return _report(S, la, lb, lab, tol * scale_of(A, B))


def wielandt_scan(A, B, k_range: Iterable[int] | None = None, tol: float = EQUALITY_TOL,
                  cap: int = SCAN_CAP) -> list[tuple[IndexSet, InequalityReport]]:
    """Every index set with k in ``k_range`` (default 1..n-1), sorted by slack."""
    A, B, la, lb, lab = _spectra(A, B)
    n = A.n
    if n > cap:
        total = sum(comb(n, k) for k in range(1, n))
        raise ScanTooLarge(f"n={n} exceeds scan cap {cap} ({total} index sets)")
    ks = range(1, n) if k_range is None else list(k_range)
    band = tol * scale_of(A, B)
    out = []
    for k in ks:
        if not 1 <= k <= n - 1:
            raise IndexOutOfRange(f"k={k} outside [1, {n - 1}]")
        for combo in itertools.combinations(range(1, n + 1), k):
            S = IndexSet(n, combo)
            out.append((S, _report(S, la, lb, lab, band)))
    out.sort(key=lambda item: (item[1].slack, item[0].indices))
    return out


@dataclass(frozen=True)
class MajorizationResult:
    holds: bool
    margins: tuple[float, ...]
    total_difference: float
    tol: float

    @property
    def min_margin(self) -> float:
        return min(self.margins) if self.margins else 0.0

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "margins": list(self.margins),
            "total_difference": self.total_difference,
            "tol": self.tol,
        }


def majorizes(x, y, tol: float = EQUALITY_TOL) -> MajorizationResult:
    """Is x majorized by y?  ``margins[k]`` is the descending prefix sum of y minus that of x."""
    x = np.sort(np.asarray(x, dtype=float))[::-1]
    y = np.sort(np.asarray(y, dtype=float))[::-1]
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    margins = np.cumsum(y) - np.cumsum(x)
    total = float(np.sum(x) - np.sum(y))
    holds = bool(np.all(margins >= -tol) and abs(total) <= tol)
    return MajorizationResult(holds, tuple(float(m) for m in margins), total, tol)


def lidskii_check(A, B, tol: float = EQUALITY_TOL) -> MajorizationResult:
    """lambda(A+B) - lambda(A), componentwise on sorted spectra, against lambda(B)."""
    A, B, la, lb, lab = _spectra(A, B)
    return majorizes(lab - la, lb, tol * scale_of(A, B))
