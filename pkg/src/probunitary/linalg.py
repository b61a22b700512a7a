"""Dense complex linear algebra primitives.

Hermitian eigendecomposition with a deterministic ordering convention,
cyclic-shift (real Weyl) unitaries, the circulant rate solver with its
singularity classifier, and the truncated lower-triangular Toeplitz
solver for the countably infinite-dimensional case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import SingularSystem, ValidationError

__all__ = [
    "Spectrum",
    "RateSolveResult",
    "validate_density_matrix",
    "hermitian_eigendecomposition",
    "real_weyl",
    "weyl_family",
    "rate_system_matrix",
    "solve_circulant_rates",
    "classify_circulant_singularity",
    "solve_toeplitz_rates",
]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (descending) and a phase-fixed eigenvector matrix.

    Columns of ``eigenvectors`` are the eigenvectors in the same order as
    ``eigenvalues``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass
class RateSolveResult:
    """Solution of the rate system.

    ``q`` follows the convention of the requested mode: q[0] is the total
    rate (continuous) or the stay probability (channel); q[1:] belong to
    the nontrivial cyclic shifts.
    """

    q: np.ndarray
    singular: bool
    condition_estimate: float
    block_structure: str | None = None


def _as_complex_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix contains NaN or Inf entries")
    return m


def validate_density_matrix(rho, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Check hermiticity, unit trace and positivity of a density matrix.

    Returns the validated array; raises ValidationError otherwise.
    """
    rho = _as_complex_matrix(rho)
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol.hermiticity:
        raise ValidationError(f"density matrix not Hermitian: deviation {herm:.3e}")
    tr = rho.trace()
    if abs(tr - 1.0) > tol.trace:
        raise ValidationError(f"density matrix trace {tr} differs from 1")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -tol.psd:
        raise ValidationError(
            f"density matrix not positive semidefinite: min eigenvalue {evals.min():.3e}"
        )
    return rho


def _phase_fix(vecs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate each column so its first significant component is real positive."""
    vecs = vecs.copy()
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        nz = np.flatnonzero(np.abs(col) > tol)
        if nz.size:
            col *= np.exp(-1j * np.angle(col[nz[0]]))
    return vecs


def hermitian_eigendecomposition(
    m, tol: Tolerances = DEFAULT_TOLERANCES
) -> Spectrum:
    """Eigendecompose a Hermitian matrix with a deterministic convention.

    Eigenvalues are returned in descending order.  Each eigenvector is
    phase-fixed (first significant component real positive); within a
    degenerate cluster, columns are ordered by descending lexicographic
    key on their (real, imag) entries so the output is reproducible.
    """
    m = _as_complex_matrix(m)
    herm = np.max(np.abs(m - m.conj().T))
    if herm > tol.hermiticity:
        raise ValidationError(f"matrix not Hermitian: deviation {herm:.3e}")
    evals, vecs = np.linalg.eigh(m)
    evals, vecs = evals[::-1], vecs[:, ::-1]
    vecs = _phase_fix(vecs)
    # deterministic ordering inside (numerically) degenerate clusters
    d = evals.shape[0]
    start = 0
    while start < d:
        stop = start + 1
        while stop < d and evals[start] - evals[stop] < tol.degeneracy_gap:
            stop += 1
        if stop - start > 1:
            keys = [
                tuple(x for ri in vecs[:, j] for x in (ri.real, ri.imag))
                for j in range(start, stop)
            ]
            order = sorted(range(start, stop), key=lambda j: keys[j - start], reverse=True)
            vecs[:, start:stop] = vecs[:, order]
            evals[start:stop] = evals[order]
        start = stop
    return Spectrum(eigenvalues=evals, eigenvectors=vecs)


def real_weyl(d: int, i: int) -> np.ndarray:
    """Cyclic-shift permutation unitary sum_k |k><(k+i) mod d|."""
    if not 0 <= i < d:
        raise ValidationError(f"shift index {i} out of range for dimension {d}")
    u = np.zeros((d, d), dtype=complex)
    k = np.arange(d)
    u[k, (k + i) % d] = 1.0
    return u


def weyl_family(d: int) -> np.ndarray:
    """All d cyclic shifts stacked as an array of shape (d, d, d)."""
    return np.stack([real_weyl(d, i) for i in range(d)])


def rate_system_matrix(p) -> np.ndarray:
    """Coefficient matrix of the rate system: M[k, i] = p[(k + i) mod d].

    Column i holds the diagonal of U_i diag(p) U_i^dag, the cyclic
    shift of p by i; M is the doubly stochastic circulant-type matrix
    the rates solve against.
    """
    p = np.asarray(p, dtype=float)
    d = p.shape[0]
    idx = (np.arange(d)[:, None] + np.arange(d)[None, :]) % d
    return p[idx]


def classify_circulant_singularity(
    p, tol: float | None = None
) -> tuple[bool, int | None, str]:
    """Decide singularity of circ(p) for a sorted probability vector.

    The circulant is singular exactly when p splits into consecutive
    constant blocks of a common length b >= 2 dividing d.  Returns
    (singular, block_length, description) with the smallest such b.
    """
    p = np.asarray(p, dtype=float)
    if tol is None:
        tol = DEFAULT_TOLERANCES.spectrum_block
    d = p.shape[0]
    for b in range(2, d + 1):
        if d % b:
            continue
        blocks = p.reshape(d // b, b)
        if np.all(blocks.max(axis=1) - blocks.min(axis=1) <= tol):
            desc = f"{d // b} constant block(s) of length {b}"
            return True, b, desc
    return False, None, "no constant block pattern"


def _block_report(p, tol: Tolerances) -> str:
    singular, _, desc = classify_circulant_singularity(
        np.sort(np.asarray(p, dtype=float))[::-1], tol.spectrum_block
    )
    return desc if singular else "spectrum nearly block-constant"


def solve_circulant_rates(
    p,
    f,
    mode: str = "continuous",
    tol: Tolerances = DEFAULT_TOLERANCES,
    strict: bool = True,
) -> RateSolveResult:
    """Solve the circulant rate system P v = f by DFT diagonalization.

    Solves M v = f with M[k, i] = p[(k + i) mod d] (see
    rate_system_matrix); M is the convolution circulant of p up to an
    index reversal, so the DFT still diagonalizes the solve.

    ``mode`` selects the sign convention of the first unknown:
    "continuous" has v = (-q0, q1, ...), "channel" has v = (q0 - 1, q1, ...).
    When M is singular the minimum-norm (pseudoinverse) solution is
    returned with the singular flag set; if f has a component outside the
    range of M, a SingularSystem error is raised unless ``strict`` is
    False, in which case that component is dropped.
    """
    p = np.asarray(p, dtype=float)
    f = np.asarray(f, dtype=float)
    if p.ndim != 1 or f.shape != p.shape:
        raise ValidationError(f"inconsistent dimensions: p {p.shape}, f {f.shape}")
    if mode not in ("continuous", "channel"):
        raise ValidationError(f"unknown mode {mode!r}")
    if not np.all(np.isfinite(f)):
        raise ValidationError("f contains NaN or Inf entries")
    if p.min() < -1e-8 or p.max() > 1 + 1e-8 or abs(p.sum() - 1) > 1e-8:
        raise ValidationError("p is not a probability vector within tolerance")

    symbol = np.fft.fft(p)
    fhat = np.fft.fft(f)
    mags = np.abs(symbol)
    cutoff = tol.singular_symbol * mags.max()
    alive = mags > cutoff
    singular = not np.all(alive)

    if singular:
        # components of f outside the range of P
        dead_mass = np.abs(fhat[~alive]).max(initial=0.0)
        if strict and dead_mass > 1e-10 * max(1.0, np.abs(f).max()):
            raise SingularSystem(
                "singular circulant system with inconsistent right-hand side",
                block_structure=_block_report(p, tol),
            )
        vhat = np.where(alive, fhat / np.where(alive, symbol, 1.0), 0.0)
        condition = np.inf
        block = _block_report(p, tol)
    else:
        vhat = fhat / symbol
        condition = mags.max() / mags.min()
        block = None

    w = np.fft.ifft(vhat).real
    # M equals the convolution circulant of p composed with an index
    # reversal; undo the reversal (fixes index 0, swaps i and d-i)
    v = w[(-np.arange(p.shape[0])) % p.shape[0]]
    q = v.copy()
    if mode == "continuous":
        q[0] = -v[0]
    else:
        q[0] = v[0] + 1.0
    return RateSolveResult(
        q=q, singular=singular, condition_estimate=condition, block_structure=block
    )


def solve_toeplitz_rates(p, f, n: int | None = None) -> RateSolveResult:
    """Forward substitution on the truncated lower-triangular Toeplitz
    system P[i, j] = p[i - j] (zero above the diagonal).

    ``p`` and ``f`` are truncated sequences; ``n`` optionally truncates
    further.  The continuous sign convention v = (-q0, q1, ...) applies.
    """
    p = np.asarray(p, dtype=float)
    f = np.asarray(f, dtype=float)
    if n is not None:
        p, f = p[:n], f[:n]
    if p.shape != f.shape or p.ndim != 1:
        raise ValidationError(f"inconsistent dimensions: p {p.shape}, f {f.shape}")
    if abs(p[0]) < 1e-14:
        raise ValidationError(
            "leading eigenvalue is zero; rotate the spectrum so p[0] != 0"
        )
    m = p.shape[0]
    v = np.zeros(m)
    for i in range(m):
        v[i] = (f[i] - np.dot(p[i:0:-1], v[:i])) / p[0]
    q = v.copy()
    q[0] = -v[0]
    condition = np.abs(p).sum() / abs(p[0])
    return RateSolveResult(q=q, singular=False, condition_estimate=condition)
