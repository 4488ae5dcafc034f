"""Checks and certificates for Wielandt's eigenvalue inequality on Hermitian pencils."""

__version__ = "0.1.0"

from .core import (
    ClusterStructure,
    EigenDecomposition,
    HermitianMatrix,
    OrthonormalFrame,
    Spectrum,
    cluster_spectrum,
    diag,
    eigh,
    frame_compression,
    invariant_residual,
    ky_fan_sum,
    random_hermitian,
    random_unitary,
    top_k_spectral_structure,
    validate_hermitian,
)
from .equality import (
    EqualityCertificate,
    certify,
    check_equality,
    condition1_search,
    condition2_check,
    condition3_check,
    equivalence_report,
    maximal_t1,
    search_r_greater_1,
    verify_certificate,
)
from .inequalities import IndexSet, lidskii_check, majorizes, wielandt_check, wielandt_scan
from .pencil import derivative_at, integrate_phi_prime, match_frames, phi_curve, trace_pencil
from .perturbation import first_order_rates, rate_consistency_check
