"""Finite-time channel decomposition into probabilistically applied
unitaries and the associated Kraus-like operator pairs.

Given an input/output pair of density matrices, solves for probabilities
q_i (possibly outside [0, 1]) and unitaries U~_i such that
rho_out = sum_i q_i U~_i rho_in U~_i^dag with sum_i q_i = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import SingularChannel, SingularSystem, ValidationError
from .linalg import (
    hermitian_eigendecomposition,
    solve_circulant_rates,
    validate_density_matrix,
    weyl_family,
)

__all__ = [
    "ChannelDecomposition",
    "KrausLikeForm",
    "decompose_channel",
    "to_kraus_like",
    "apply_decomposition",
]

MIXED_UNITARY = "mixed_unitary"
QUASI_PROBABILITY = "quasi_probability"
SINGULAR = "singular"


@dataclass
class ChannelDecomposition:
    """Probabilities, unitaries and classification of one channel pair.

    ``pairing`` records which output eigenbranch was matched to each
    input branch (overlap assignment; the pairing convention is ours,
    not canonical).
    """

    probabilities: np.ndarray       # (d,), q[0] = 1 - sum(q[1:])
    unitaries: np.ndarray           # (d, d, d)
    classification: str
    reconstruction_residual: float
    pairing: np.ndarray             # (d,) output index matched to input i


@dataclass
class KrausLikeForm:
    """Pairs (K_i, Kbar_i) with sum_i K_i Kbar_i = identity and
    Kbar_i = sign_i K_i^dag."""

    operators: list
    signs: np.ndarray


def decompose_channel(
    rho_in, rho_out, tol: Tolerances = DEFAULT_TOLERANCES
) -> ChannelDecomposition:
    """Decompose the map rho_in -> rho_out into probabilistic unitaries."""
    rho_in = validate_density_matrix(rho_in, tol)
    rho_out = validate_density_matrix(rho_out, tol)
    if rho_in.shape != rho_out.shape:
        raise ValidationError("input and output dimensions differ")
    d = rho_in.shape[0]

    spec_in = hermitian_eigendecomposition(rho_in, tol)
    spec_out = hermitian_eigendecomposition(rho_out, tol)
    overlap = spec_in.eigenvectors.conj().T @ spec_out.eigenvectors
    rows, cols = linear_sum_assignment(-np.abs(overlap) ** 2)
    p_in = spec_in.eigenvalues
    p_out = spec_out.eigenvalues[cols]
    v_out = spec_out.eigenvectors[:, cols]

    f = p_out - p_in
    try:
        result = solve_circulant_rates(p_in, f, mode="channel", tol=tol, strict=True)
    except SingularSystem as exc:
        raise SingularChannel(
            f"singular input spectrum with inconsistent eigenvalue change: {exc}",
            block_structure=exc.block_structure,
        ) from exc
    q = result.q

    # connecting unitary: paired output eigenvectors against input ones
    connector = v_out @ spec_in.eigenvectors.conj().T
    shifts = weyl_family(d)
    frame = spec_in.eigenvectors
    unitaries = np.einsum(
        "ae,eb,ibc,dc->iad", connector, frame, shifts, frame.conj()
    )

    recon = np.einsum("i,iab,bc,idc->ad", q, unitaries, rho_in, unitaries.conj())
    residual = float(np.max(np.abs(recon - rho_out)))
    if not result.singular and residual > tol.reconstruction:
        raise RuntimeError(
            f"internal error: reconstruction residual {residual:.3e} on a "
            "nonsingular pair"
        )

    if result.singular:
        classification = SINGULAR
    elif np.all((q >= -1e-9) & (q <= 1 + 1e-9)):
        classification = MIXED_UNITARY
    else:
        classification = QUASI_PROBABILITY

    return ChannelDecomposition(
        probabilities=q,
        unitaries=unitaries,
        classification=classification,
        reconstruction_residual=residual,
        pairing=cols,
    )


def to_kraus_like(decomp: ChannelDecomposition) -> KrausLikeForm:
    """Kraus-like pairs K_i = sqrt(|q_i|) U~_i, Kbar_i = sign(q_i) K_i^dag."""
    if decomp.classification == SINGULAR:
        raise ValidationError("cannot build Kraus-like form of a singular channel")
    q = decomp.probabilities
    signs = np.where(q >= 0, 1.0, -1.0)
    operators = []
    for i in range(q.shape[0]):
        k = np.sqrt(abs(q[i])) * decomp.unitaries[i]
        operators.append((k, signs[i] * k.conj().T))
    return KrausLikeForm(operators=operators, signs=signs)


def apply_decomposition(decomp: ChannelDecomposition, rho) -> np.ndarray:
    """Evaluate sum_i q_i U~_i rho U~_i^dag on an arbitrary state."""
    rho = np.asarray(rho, dtype=complex)
    d = decomp.unitaries.shape[1]
    if rho.shape != (d, d):
        raise ValidationError("state dimension mismatch")
    return np.einsum(
        "i,iab,bc,idc->ad",
        decomp.probabilities,
        decomp.unitaries,
        rho,
        decomp.unitaries.conj(),
    )
