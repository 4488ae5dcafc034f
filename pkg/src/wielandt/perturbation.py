"""First-order eigenvalue rates of the pencil A + zB at z = 0."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CLUSTER_TOL,
    ClusterStructure,
    EigenDecomposition,
    OrthonormalFrame,
    as_hermitian,
    eigh,
    eigvalsh,
    _same_dim,
)


@dataclass(frozen=True, eq=False)
class PerturbationRates:
    """Rates ``nu`` aligned with the ordered eigenvalues of A.

    ``adapted_frame`` holds eigenvectors of A, rotated inside each cluster so
    that ``nu[j] == u_j^* B u_j``.
    """

    nu: np.ndarray
    clusters: ClusterStructure
    adapted_frame: OrthonormalFrame
    eigen: EigenDecomposition


def first_order_rates(A, B, tol_cluster: float = CLUSTER_TOL,
                      decomposition: EigenDecomposition | None = None) -> PerturbationRates:
    """Eigenvalues of B compressed to each eigenspace of A, non-increasing per cluster.

    ``decomposition`` may be passed to reuse an existing eigen-decomposition of A.
    """
    A, B = as_hermitian(A), as_hermitian(B)
    _same_dim(A, B)
    dec = decomposition if decomposition is not None else eigh(A, tol_cluster)
    U = np.array(dec.vectors)
    nu = np.empty(A.n)
    for sl in dec.clusters.slices():
        Uc = U[:, sl]
        C = Uc.conj().T @ B.array @ Uc
        C = (C + C.conj().T) / 2
        if C.shape[0] == 1:
            nu[sl] = C[0, 0].real
            continue
        w, W = np.linalg.eigh(C)
        nu[sl] = w[::-1]
        U[:, sl] = Uc @ W[:, ::-1]
    return PerturbationRates(nu, dec.clusters, OrthonormalFrame(U), dec)


def rate_consistency_check(A, B, h: float = 1e-5, tol_cluster: float = CLUSTER_TOL) -> float:
    """Max deviation between the rates and one-sided difference quotients at step h."""
    A, B = as_hermitian(A), as_hermitian(B)
    rates = first_order_rates(A, B, tol_cluster)
    # same driver on both sides so B = 0 gives exactly zero
    quotient = (eigvalsh(A.plus(B, h)) - eigvalsh(A)) / h
    for sl in rates.clusters.slices():
        quotient[sl] = np.sort(quotient[sl])[::-1]
    return float(np.max(np.abs(quotient - rates.nu)))
