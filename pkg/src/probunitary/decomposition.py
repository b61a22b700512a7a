"""Probabilistic-unitary decomposition of a density-matrix trajectory.

Given samples of rho(t), this module tracks a continuous eigenframe
across the grid, builds the driving Hamiltonian from the transported
eigenvectors, conjugates the cyclic shifts into the instantaneous frame,
and solves for the jump rates at every grid time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import polar
from scipy.optimize import linear_sum_assignment

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import TrajectoryTooCoarse, ValidationError
from .linalg import (
    RateSolveResult,
    Spectrum,
    hermitian_eigendecomposition,
    solve_circulant_rates,
    weyl_family,
)

__all__ = [
    "TrajectorySample",
    "EigenframeSeries",
    "DecompositionSeries",
    "align_eigenframes",
    "align_spectra",
    "build_hamiltonian",
    "compute_rates_at",
    "build_tilde_unitaries",
    "reconstruct_rhs",
    "decompose_trajectory",
]


@dataclass(frozen=True)
class TrajectorySample:
    time: float
    rho: np.ndarray


@dataclass
class EigenframeSeries:
    """Eigenframes matched and phase-transported along a time grid.

    ``eigenvalues[k, i]`` follows branch i continuously (it is *not*
    re-sorted per time, so branches may cross).  ``eigenvectors[k]`` has
    branch i in column i.  ``phases[k, i]`` is the accumulated transport
    phase applied relative to the raw per-frame eigensolver gauge.
    """

    times: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    phases: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[1]

    def index_of(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValidationError(f"time {t} is not on the frame grid")
        return k


@dataclass
class DecompositionSeries:
    """Per-time Hamiltonians, conjugated shift unitaries, rates and flags."""

    times: np.ndarray
    hamiltonians: np.ndarray           # (n, d, d)
    unitaries: np.ndarray              # (n, d, d, d)
    rates: np.ndarray                  # (n, d); rates[:, 0] is the total rate
    negative_flags: np.ndarray         # (n,) bool
    singular_flags: np.ndarray         # (n,) bool
    condition_estimates: np.ndarray    # (n,)
    frames: EigenframeSeries | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.hamiltonians.shape[1]


def _spectra_of(samples, tol: Tolerances) -> tuple[np.ndarray, list[Spectrum]]:
    if len(samples) < 2:
        raise ValidationError("need at least two trajectory samples")
    times = np.array([s.time for s in samples], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValidationError("sample times must be strictly increasing")
    dims = {s.rho.shape[0] for s in samples}
    if len(dims) != 1:
        raise ValidationError("trajectory samples have mismatched dimensions")
    rhos = np.stack([np.asarray(s.rho, dtype=complex) for s in samples])
    herm = np.abs(rhos - rhos.conj().transpose(0, 2, 1)).max()
    if herm > tol.hermiticity:
        raise ValidationError(f"non-Hermitian sample: deviation {herm:.3e}")
    traces = np.einsum("kii->k", rhos).real
    if np.abs(traces - 1).max() > tol.trace:
        raise ValidationError("sample trace deviates from 1")
    evals, evecs = np.linalg.eigh(rhos)
    if evals.min() < -tol.psd:
        raise ValidationError(
            f"sample not positive semidefinite: min eigenvalue {evals.min():.3e}"
        )
    spectra = [
        Spectrum(eigenvalues=evals[k][::-1], eigenvectors=evecs[k][:, ::-1])
        for k in range(len(samples))
    ]
    return times, spectra


def align_spectra(
    times,
    spectra,
    gauge: str = "transport",
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> EigenframeSeries:
    """Match eigenvector branches across frames and fix their gauge.

    Matching is an optimal assignment on squared overlaps; the phase of
    each matched vector is then set by discrete parallel transport
    (gauge="transport") or by the per-frame deterministic phase fix
    (gauge="fixed").  Degenerate clusters are aligned as a subspace via
    the polar part of the overlap block.
    """
    if gauge not in ("transport", "fixed"):
        raise ValidationError(f"unknown gauge {gauge!r}")
    times = np.asarray(times, dtype=float)
    n = len(spectra)
    d = spectra[0].dim
    first = hermitian_eigendecomposition(
        spectra[0].eigenvectors
        @ np.diag(spectra[0].eigenvalues)
        @ spectra[0].eigenvectors.conj().T,
        tol,
    )
    evals = np.empty((n, d))
    evecs = np.empty((n, d, d), dtype=complex)
    phases = np.zeros((n, d))
    evals[0], evecs[0] = first.eigenvalues, first.eigenvectors

    for k in range(1, n):
        vals = np.asarray(spectra[k].eigenvalues, dtype=float)
        vecs = np.asarray(spectra[k].eigenvectors, dtype=complex)
        if vecs.shape != (d, d):
            raise ValidationError("frame dimension mismatch")
        overlap = evecs[k - 1].conj().T @ vecs
        diag = np.diagonal(overlap)
        if np.abs(diag).min() < tol.overlap_floor:
            # identity matching is only optimal when every diagonal
            # overlap dominates; otherwise solve the assignment problem
            rows, cols = linear_sum_assignment(-np.abs(overlap) ** 2)
            vals = vals[cols]
            vecs = vecs[:, cols]
            diag = overlap[rows, cols]
        if np.abs(diag).min() < tol.overlap_floor:
            raise TrajectoryTooCoarse(
                f"eigenvector overlap {np.abs(diag).min():.3f} below "
                f"{tol.overlap_floor} between t={times[k - 1]} and t={times[k]}"
            )
        # cluster branches whose eigenvalues are numerically degenerate
        order = np.argsort(vals)[::-1]
        start = 0
        while start < d:
            stop = start + 1
            while (
                stop < d
                and vals[order[stop - 1]] - vals[order[stop]] < tol.degeneracy_gap
            ):
                stop += 1
            cluster = order[start:stop]
            if gauge == "transport":
                if cluster.size == 1:
                    i = cluster[0]
                    b = np.vdot(evecs[k - 1][:, i], vecs[:, i])
                    vecs[:, i] *= b.conj() / abs(b)
                else:
                    block = evecs[k - 1][:, cluster].conj().T @ vecs[:, cluster]
                    w, _ = polar(block)
                    vecs[:, cluster] = vecs[:, cluster] @ w.conj().T
            else:
                for i in cluster:
                    nz = np.flatnonzero(np.abs(vecs[:, i]) > 1e-12)[0]
                    vecs[:, i] *= np.exp(-1j * np.angle(vecs[nz, i]))
                # keep branch continuity at least up to sign
                for i in cluster:
                    if np.vdot(evecs[k - 1][:, i], vecs[:, i]).real < 0:
                        vecs[:, i] *= -1.0
            start = stop
        # accumulated transport phase of each branch relative to the
        # dominant-component-real-positive gauge, unwrapped in time
        for i in range(d):
            ref = int(np.argmax(np.abs(vecs[:, i])))
            delta = np.angle(vecs[ref, i])
            phases[k, i] = delta + 2 * np.pi * np.round(
                (phases[k - 1, i] - delta) / (2 * np.pi)
            )
        evals[k], evecs[k] = vals, vecs

    return EigenframeSeries(
        times=times, eigenvalues=evals, eigenvectors=evecs, phases=phases
    )


def align_eigenframes(
    samples, gauge: str = "transport", tol: Tolerances = DEFAULT_TOLERANCES
) -> EigenframeSeries:
    """Diagonalize every sample and align the frames along the grid."""
    times, spectra = _spectra_of(samples, tol)
    return align_spectra(times, spectra, gauge=gauge, tol=tol)


def _grad(values: np.ndarray, times: np.ndarray, k: int) -> np.ndarray:
    """Central difference in the interior, one-sided at the endpoints."""
    n = len(times)
    if n < 2:
        raise ValidationError("need at least two grid points to differentiate")
    if k == 0:
        return (values[1] - values[0]) / (times[1] - times[0])
    if k == n - 1:
        return (values[-1] - values[-2]) / (times[-1] - times[-2])
    return (values[k + 1] - values[k - 1]) / (times[k + 1] - times[k - 1])


def build_hamiltonian(frames: EigenframeSeries, t: float) -> np.ndarray:
    """Minimal-norm driving Hamiltonian i sum_i |d/dt psi_i><psi_i| at t."""
    k = frames.index_of(t)
    dv = _grad(frames.eigenvectors, frames.times, k)
    h = 1j * dv @ frames.eigenvectors[k].conj().T
    return (h + h.conj().T) / 2


def compute_rates_at(
    frames: EigenframeSeries, t: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> RateSolveResult:
    """Jump rates at grid time t from the tracked eigenvalue branches."""
    k = frames.index_of(t)
    f = _grad(frames.eigenvalues, frames.times, k)
    p = np.clip(frames.eigenvalues[k], 0.0, None)
    p = p / p.sum()
    return solve_circulant_rates(p, f, mode="continuous", tol=tol, strict=False)


def build_tilde_unitaries(frame) -> np.ndarray:
    """Conjugate the cyclic shifts into the frame: U~_i = V W_i V^dag.

    ``frame`` is a Spectrum or a unitary eigenvector matrix.  Returns an
    array of shape (d, d, d); index 0 is the identity.
    """
    v = frame.eigenvectors if isinstance(frame, Spectrum) else np.asarray(frame)
    d = v.shape[0]
    shifts = weyl_family(d)
    out = np.einsum("ab,ibc,dc->iad", v, shifts, v.conj())
    out[0] = np.eye(d)
    return out


def reconstruct_rhs(rho, h, unitaries, q) -> np.ndarray:
    """Evaluate -i[H, rho] + sum_{i>=1} q_i (U~_i rho U~_i^dag - rho)."""
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(h, dtype=complex)
    unitaries = np.asarray(unitaries, dtype=complex)
    q = np.asarray(q, dtype=float)
    d = rho.shape[0]
    if h.shape != (d, d) or unitaries.shape != (d, d, d) or q.shape != (d,):
        raise ValidationError("dimension mismatch in reconstruction inputs")
    out = -1j * (h @ rho - rho @ h)
    for i in range(1, d):
        u = unitaries[i]
        out += q[i] * (u @ rho @ u.conj().T - rho)
    return out


def decompose_trajectory(
    samples, gauge: str = "transport", tol: Tolerances = DEFAULT_TOLERANCES
) -> DecompositionSeries:
    """Full pipeline: align frames, then build H, U~ and q on every grid time."""
    frames = align_eigenframes(samples, gauge=gauge, tol=tol)
    n, d = frames.eigenvalues.shape
    times = frames.times

    # batched finite differences (np.gradient uses the same stencils)
    dvecs = np.gradient(frames.eigenvectors, times, axis=0)
    hams = 1j * np.einsum("kab,kcb->kac", dvecs, frames.eigenvectors.conj())
    hams = (hams + hams.conj().transpose(0, 2, 1)) / 2

    shifts = weyl_family(d)
    unitaries = np.einsum(
        "kab,ibc,kdc->kiad", frames.eigenvectors, shifts, frames.eigenvectors.conj()
    )
    unitaries[:, 0] = np.eye(d)

    f_all = np.gradient(frames.eigenvalues, times, axis=0)
    rates = np.empty((n, d))
    negative = np.zeros(n, dtype=bool)
    singular = np.zeros(n, dtype=bool)
    condition = np.empty(n)
    spacings = np.diff(times)
    for k in range(n):
        p = np.clip(frames.eigenvalues[k], 0.0, None)
        result = solve_circulant_rates(
            p / p.sum(), f_all[k], mode="continuous", tol=tol, strict=False
        )
        rates[k] = result.q
        condition[k] = result.condition_estimate
        # grid-aware flag: rates of order 1/dt are indistinguishable from
        # a singular crossing at this resolution and break the scheme
        dt_local = spacings[min(k, n - 2)]
        singular[k] = result.singular or condition[k] * dt_local >= 1.0
        negative[k] = bool(np.any(result.q[1:] < -tol.rate_negativity))

    return DecompositionSeries(
        times=times,
        hamiltonians=hams,
        unitaries=unitaries,
        rates=rates,
        negative_flags=negative,
        singular_flags=singular,
        condition_estimates=condition,
        frames=frames,
    )
