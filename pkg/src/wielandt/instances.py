"""Test-instance generators: random pairs, planted equality blocks, the diagonal example."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import HermitianMatrix, OrthonormalFrame, _as_rng, diag, random_hermitian, random_unitary
from .errors import BadSpec
from .inequalities import IndexSet


@dataclass(frozen=True, eq=False)
class Instance:
    A: HermitianMatrix
    B: HermitianMatrix
    indices: IndexSet | None = None
    frame: OrthonormalFrame | None = None
    kind: str = "random"
    params: dict | None = None


def random_pair(n: int, seed) -> Instance:
    rng = _as_rng(seed)
    return Instance(random_hermitian(n, rng), random_hermitian(n, rng), kind="random",
                    params={"n": n})


def equality_block(n: int, k: int, seed, indices: Sequence[int] | None = None) -> Instance:
    """A pair with a planted k-dimensional reducing subspace giving equality.

    In a random unitary basis, A = A1 (+) A2 and B = B1 (+) B2 with A1, B1 of
    size k.  B1 holds the k largest eigenvalues of B, strictly separated from
    the rest, and the eigenvalues of A1 sit at the one-based positions
    ``indices`` of the spectrum of A.  A's eigenvalues are spaced about 1
    apart and B's lie in (-0.35, 0.35), so the two blocks' curves never meet
    for t in [0, 1]; the ordered positions of block 1 stay at ``indices``.
    """
    if not 1 <= k <= n - 1:
        raise BadSpec(f"need 1 <= k <= n-1, got n={n}, k={k}")
    rng = _as_rng(seed)
    if indices is None:
        indices = sorted(rng.choice(np.arange(1, n + 1), size=k, replace=False).tolist())
    S = IndexSet(n, tuple(indices))
    a = np.arange(n, 0, -1, dtype=float) + rng.uniform(-0.1, 0.1, n)
    in_block = np.zeros(n, dtype=bool)
    in_block[S.positions] = True
    b1 = np.sort(rng.uniform(0.05, 0.35, k))[::-1]
    b2 = np.sort(rng.uniform(-0.35, -0.05, n - k))[::-1]
    Q1, Q2 = random_unitary(k, rng), random_unitary(n - k, rng)
    A1 = (Q1 * a[in_block]) @ Q1.conj().T
    A2 = (Q2 * a[~in_block]) @ Q2.conj().T
    Q1b, Q2b = random_unitary(k, rng), random_unitary(n - k, rng)
    B1 = (Q1b * b1) @ Q1b.conj().T
    B2 = (Q2b * b2) @ Q2b.conj().T
    Ablk = np.zeros((n, n), dtype=complex)
    Bblk = np.zeros((n, n), dtype=complex)
    Ablk[:k, :k], Ablk[k:, k:] = A1, A2
    Bblk[:k, :k], Bblk[k:, k:] = B1, B2
    Q = random_unitary(n, rng)
    A = HermitianMatrix(Ablk).conjugate_by(Q)
    B = HermitianMatrix(Bblk).conjugate_by(Q)
    return Instance(A, B, S, OrthonormalFrame(Q[:, :k]), kind="equality-block",
                    params={"n": n, "k": k, "indices": list(S.indices)})


def diagonal_example(alpha: Sequence[float] = (3.0, 1.0, 1.0),
               beta: Sequence[float] = (2.0, 1.0, 0.0)) -> Instance:
    """``A = diag(a1, a2, a3)``, ``B = diag(b3, b1, b2)`` with index set {3}.

    The intended regime is ``a1 > a2 = a3`` and ``b1 > b2 >= b3``; there the
    equality subspace is span(e2) and it persists up to
    ``t = (a1 - a2) / (b1 - b3)``.
    """
    if len(alpha) != 3 or len(beta) != 3:
        raise BadSpec("alpha and beta must each have three entries")
    a1, a2, a3 = map(float, alpha)
    b1, b2, b3 = map(float, beta)
    return Instance(diag(a1, a2, a3), diag(b3, b1, b2), IndexSet(3, (3,)),
                    OrthonormalFrame(np.eye(3)[:, [1]]), kind="diagonal-example",
                    params={"alpha": [a1, a2, a3], "beta": [b1, b2, b3]})
