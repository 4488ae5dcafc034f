"""Hermitian matrices, ordered spectra, clusters, frames and Ky Fan sums.

Everything downstream works on the types defined here.  Eigenvalues are always
reported in non-increasing order (index 0 is the largest), and eigenvectors
are put through a deterministic post-processing step so identical inputs give
byte-identical outputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    BadSpec,
    ConvergenceFailure,
    DimensionMismatch,
    IndexOutOfRange,
    NotHermitian,
    NotSquare,
)

HERMITICITY_TOL = 1e-10
CLUSTER_TOL = 1e-8
EQUALITY_TOL = 1e-8

_PHASE_TIE = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _entry(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise BadSpec(f"complex entry must be a [re, im] pair, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def to_complex_array(raw) -> np.ndarray:
    """Convert a grid of scalars or ``[re, im]`` pairs into a complex array."""
    if isinstance(raw, np.ndarray):
        return np.asarray(raw, dtype=complex)
    if isinstance(raw, HermitianMatrix):
        return np.array(raw.array)
    rows = list(raw)
    return np.array([[_entry(x) for x in row] for row in rows], dtype=complex)


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Dense n-by-n Hermitian matrix.

    The constructor trusts its input; use :func:`validate_hermitian` for
    anything that did not come from this package.
    """

    array: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.array, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise NotSquare(f"expected a non-empty square matrix, got shape {a.shape}")
        object.__setattr__(self, "array", _readonly(a))

    @property
    def n(self) -> int:
        return self.array.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.array, dtype=dtype)

    def norm(self) -> float:
        """Spectral norm (largest eigenvalue modulus)."""
        w = np.linalg.eigvalsh(self.array)
        return float(max(abs(w[0]), abs(w[-1])))

    def trace(self) -> float:
        return float(np.trace(self.array).real)

    def plus(self, other: "HermitianMatrix", t: float = 1.0) -> "HermitianMatrix":
        """Return ``self + t * other``."""
        _same_dim(self, other)
        return HermitianMatrix(self.array + t * other.array)

    def conjugate_by(self, Q: np.ndarray) -> "HermitianMatrix":
        M = Q @ self.array @ Q.conj().T
        return HermitianMatrix((M + M.conj().T) / 2)


@dataclass(frozen=True, eq=False)
class Spectrum:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("spectrum must be one-dimensional")
        if np.any(np.diff(v) > 0):
            raise ValueError("spectrum must be non-increasing")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class ClusterStructure:
    """Multiplicity clusters of an ordered spectrum.

    ``boundaries`` is ``(m_0=0, m_1, ..., m_l=n)``; cluster ``c`` occupies the
    zero-based positions ``range(boundaries[c], boundaries[c+1])``.
    """

    boundaries: tuple[int, ...]
    values: tuple[float, ...]

    @property
    def n(self) -> int:
        return self.boundaries[-1]

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        b = self.boundaries
        return tuple(b[i + 1] - b[i] for i in range(len(b) - 1))

    def slices(self) -> list[slice]:
        b = self.boundaries
        return [slice(b[i], b[i + 1]) for i in range(len(b) - 1)]

    def labels(self) -> np.ndarray:
        """Cluster number of every zero-based position."""
        return np.repeat(np.arange(self.count), self.multiplicities)

    def cluster_of(self, position: int) -> int:
        if not 0 <= position < self.n:
            raise IndexOutOfRange(f"position {position} outside [0, {self.n})")
        return int(np.searchsorted(self.boundaries, position, side="right") - 1)


@dataclass(frozen=True, eq=False)
class OrthonormalFrame:
    """k orthonormal vectors in C^n, stored as the columns of an n-by-k array.

    ``k = 0`` is allowed so that empty forced/free parts can be represented.
    """

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] > v.shape[0]:
            raise DimensionMismatch(f"frame of shape {v.shape} cannot be orthonormal")
        object.__setattr__(self, "vectors", _readonly(v))

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def k(self) -> int:
        return self.vectors.shape[1]

    def orthonormality_error(self) -> float:
        if self.k == 0:
            return 0.0
        G = self.vectors.conj().T @ self.vectors
        return float(np.max(np.abs(G - np.eye(self.k))))

    def projector(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T

    def take(self, positions: Sequence[int]) -> "OrthonormalFrame":
        return OrthonormalFrame(self.vectors[:, list(positions)])

    def extend(self, other: "OrthonormalFrame") -> "OrthonormalFrame":
        return OrthonormalFrame(np.hstack([self.vectors, other.vectors]))

    @classmethod
    def from_vectors(cls, vectors) -> "OrthonormalFrame":
        """Orthonormalize arbitrary (full column rank) vectors first."""
        v = np.asarray(vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        q, _ = np.linalg.qr(v)
        for c in range(q.shape[1]):
            q[:, c] = _fix_phase(q[:, c])
        return cls(q)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    spectrum: Spectrum
    frame: OrthonormalFrame
    clusters: ClusterStructure

    @property
    def values(self) -> np.ndarray:
        return self.spectrum.values

    @property
    def vectors(self) -> np.ndarray:
        return self.frame.vectors


def _same_dim(*mats) -> int:
    dims = {m.n for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimensions differ: {sorted(dims)}")
    return dims.pop()


def as_hermitian(M, tol: float = HERMITICITY_TOL) -> HermitianMatrix:
    if isinstance(M, HermitianMatrix):
        return M
    return validate_hermitian(M, tol)


def validate_hermitian(raw, tol: float = HERMITICITY_TOL) -> HermitianMatrix:
    """Check Hermitian symmetry in max-abs norm and return the symmetrized matrix."""
    M = to_complex_array(raw)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise NotSquare(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise BadSpec("matrix has non-finite entries")
    dev = np.abs(M - M.conj().T)
    i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    if dev[i, j] > tol:
        raise NotHermitian(int(i), int(j), float(dev[i, j]), tol)
    return HermitianMatrix((M + M.conj().T) / 2)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mags = np.abs(v)
    idx = int(np.argmax(mags >= mags.max() - _PHASE_TIE))
    if mags[idx] == 0:
        return v
    return v * (np.conj(v[idx]) / mags[idx])


def _lead_index(v: np.ndarray) -> int:
    mags = np.abs(v)
    return int(np.argmax(mags >= mags.max() - _PHASE_TIE))


def _canonical_basis(V: np.ndarray) -> np.ndarray:
    """A basis of span(V) that depends only on the subspace, not on V."""
    m = V.shape[1]
    P = V @ V.conj().T
    Q, _, _ = scipy.linalg.qr(P, pivoting=True)
    Q = Q[:, :m]
    # re-project to stay inside the subspace despite rounding in the QR
    Q, _ = np.linalg.qr(P @ Q)
    return Q


def cluster_spectrum(s, tol_cluster: float = CLUSTER_TOL) -> ClusterStructure:
    """Group adjacent eigenvalues whose gap is at most ``tol*(1+max|value|)``."""
    values = np.asarray(s.values if isinstance(s, Spectrum) else s, dtype=float)
    n = len(values)
    if n == 0:
        return ClusterStructure((0,), ())
    thresh = tol_cluster * (1.0 + float(np.max(np.abs(values))))
    cuts = [0]
    for i in range(n - 1):
        if values[i] - values[i + 1] > thresh:
            cuts.append(i + 1)
    cuts.append(n)
    reps = tuple(float(np.mean(values[cuts[c]:cuts[c + 1]])) for c in range(len(cuts) - 1))
    return ClusterStructure(tuple(cuts), reps)


def eigh(A, tol_cluster: float = CLUSTER_TOL) -> EigenDecomposition:
    """Eigen-decomposition with non-increasing eigenvalues and deterministic vectors.

    Within a numerically degenerate cluster the solver's basis is replaced by
    one computed from the cluster's spectral projector, ordered by the index
    of each vector's largest entry.  Every vector is then rotated so that its
    largest entry is real and non-negative.
    """
    A = as_hermitian(A)
    try:
        w, V = np.linalg.eigh(A.array)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    clusters = cluster_spectrum(w, tol_cluster)
    for sl in clusters.slices():
        if sl.stop - sl.start > 1:
            Q = _canonical_basis(V[:, sl])
            order = sorted(range(Q.shape[1]), key=lambda c: _lead_index(Q[:, c]))
            V[:, sl] = Q[:, order]
    for c in range(V.shape[1]):
        V[:, c] = _fix_phase(V[:, c])
    return EigenDecomposition(Spectrum(w), OrthonormalFrame(V), clusters)


def eigvalsh(A) -> np.ndarray:
    """Eigenvalues only, non-increasing."""
    A = as_hermitian(A)
    try:
        return np.linalg.eigvalsh(A.array)[::-1].copy()
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc


def ky_fan_sum(A, k: int) -> float:
    """Sum of the k largest eigenvalues of A."""
    A = as_hermitian(A)
    if not 1 <= k <= A.n:
        raise IndexOutOfRange(f"k={k} outside [1, {A.n}]")
    return float(np.sum(eigvalsh(A)[:k]))


def _check_frame(M: HermitianMatrix, F: OrthonormalFrame) -> None:
    if F.n != M.n:
        raise DimensionMismatch(f"frame lives in C^{F.n}, matrix is {M.n}x{M.n}")


def frame_compression(M, F: OrthonormalFrame) -> HermitianMatrix:
    """The k-by-k matrix with entries F_i^* M F_j."""
    M = as_hermitian(M)
    _check_frame(M, F)
    C = F.vectors.conj().T @ M.array @ F.vectors
    return HermitianMatrix((C + C.conj().T) / 2)


def invariant_residual(M, F: OrthonormalFrame) -> float:
    """Frobenius norm of (I - P) M P, P the projector onto span(F)."""
    M = as_hermitian(M)
    _check_frame(M, F)
    if F.k == 0:
        return 0.0
    X = M.array @ F.vectors
    X = X - F.vectors @ (F.vectors.conj().T @ X)
    return float(np.linalg.norm(X))


def principal_angles(F, G) -> np.ndarray:
    """Principal angles (radians, ascending) between two frames' spans."""
    F = F.vectors if isinstance(F, OrthonormalFrame) else np.asarray(F)
    G = G.vectors if isinstance(G, OrthonormalFrame) else np.asarray(G)
    if F.shape[1] == 0 or G.shape[1] == 0:
        return np.zeros(0)
    # sine-based, so nearly equal subspaces are not stuck at sqrt(eps)
    return np.sort(scipy.linalg.subspace_angles(F, G))


def subspace_distance(F, G) -> float:
    """Largest principal angle; pi/2 when the dimensions differ."""
    F = F.vectors if isinstance(F, OrthonormalFrame) else np.asarray(F)
    G = G.vectors if isinstance(G, OrthonormalFrame) else np.asarray(G)
    if F.shape[1] != G.shape[1]:
        return float(np.pi / 2)
    ang = principal_angles(F, G)
    return float(ang.max()) if ang.size else 0.0


@dataclass(frozen=True)
class TopKStructure:
    """Decomposition of the first-k invariant subspaces of a Hermitian matrix.

    Any such subspace is ``span(forced) + G`` where ``G`` is a
    ``deficiency``-dimensional subspace of ``span(free)``.
    """

    forced: OrthonormalFrame
    free: OrthonormalFrame
    deficiency: int
    decomposition: EigenDecomposition


def top_k_spectral_structure(B, k: int, tol_cluster: float = CLUSTER_TOL) -> TopKStructure:
    B = as_hermitian(B)
    n = B.n
    if not 1 <= k <= n - 1:
        raise IndexOutOfRange(f"k={k} outside [1, {n - 1}]")
    dec = eigh(B, tol_cluster)
    c = dec.clusters.cluster_of(k - 1)
    start, stop = dec.clusters.boundaries[c], dec.clusters.boundaries[c + 1]
    V = dec.vectors
    if stop == k:
        forced, free = V[:, :k], V[:, :0]
    else:
        forced, free = V[:, :start], V[:, start:stop]
    return TopKStructure(
        OrthonormalFrame(forced), OrthonormalFrame(free), k - forced.shape[1], dec
    )


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_unitary(n: int, seed) -> np.ndarray:
    """Haar-distributed unitary matrix."""
    rng = _as_rng(seed)
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_hermitian(n: int, seed, spec: Sequence[float] | None = None) -> HermitianMatrix:
    """Reproducible random Hermitian matrix.

    Without ``spec`` the entries are complex Gaussian (GUE-like).  With
    ``spec`` the result is ``Q diag(spec) Q^*`` for a random unitary ``Q``.
    """
    if n < 1:
        raise BadSpec(f"n must be positive, got {n}")
    rng = _as_rng(seed)
    if spec is None:
        Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return HermitianMatrix((Z + Z.conj().T) / 2)
    spec = np.asarray(spec, dtype=float)
    if spec.shape != (n,):
        raise BadSpec(f"spec has length {spec.size}, expected {n}")
    Q = random_unitary(n, rng)
    M = (Q * spec) @ Q.conj().T
    return HermitianMatrix((M + M.conj().T) / 2)


def diag(*values: float) -> HermitianMatrix:
    return HermitianMatrix(np.diag(np.asarray(values, dtype=complex)))


def scale_of(*mats: HermitianMatrix) -> float:
    """``1 + sum of spectral norms``; the reference scale for relative tolerances."""
    return 1.0 + sum(m.norm() for m in mats)
