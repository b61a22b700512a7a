"""Trajectory sources: closed-form qubit examples and a generic
Lindblad integrator.

The resonant vacuum Jaynes-Cummings reduced qubit and the spontaneously
decaying two-level atom have closed-form populations and closed-form
jump rates, which the decomposition pipeline is regressed against.  The
Jaynes-Cummings reduced state is not generated by any time-independent
Lindblad equation; it is produced directly from its closed form, never
through the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .decomposition import TrajectorySample
from .errors import StepTooLarge, ValidationError

__all__ = [
    "LindbladSpec",
    "ModelParams",
    "MODEL_CATALOGUE",
    "jc_reduced_state",
    "jc_rate",
    "amplitude_damping_exact",
    "amplitude_damping_spec",
    "lindblad_rhs",
    "integrate",
    "sample_model",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class LindbladSpec:
    """Hamiltonian plus jump operators (L_i, gamma_i), hbar = 1."""

    hamiltonian: np.ndarray
    jump_ops: tuple = ()

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if np.max(np.abs(h - h.conj().T)) > 1e-10:
            raise ValidationError("Lindblad Hamiltonian must be Hermitian")
        d = h.shape[0]
        for op, gamma in self.jump_ops:
            if np.asarray(op).shape != (d, d):
                raise ValidationError("jump operator dimension mismatch")
            if gamma < 0:
                raise ValidationError("jump rates must be nonnegative")


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the built-in qubit models."""

    omega: float = 1.0           # Rabi / interaction strength
    gamma: float = 1.0           # vacuum decay rate
    level_splitting: float = 1.0

    def __post_init__(self):
        if self.omega <= 0 or self.gamma <= 0:
            raise ValidationError("omega and gamma must be positive")


MODEL_CATALOGUE = {
    "jc": {
        "description": "resonant vacuum Jaynes-Cummings reduced qubit, "
        "initially excited",
        "params": ["omega", "level_splitting"],
    },
    "amplitude-damping": {
        "description": "two-level atom decaying into the vacuum, "
        "initially excited",
        "params": ["gamma", "level_splitting"],
    },
    "lindblad": {
        "description": "generic Lindblad equation integrated by RK4 "
        "(spec supplied as JSON)",
        "params": ["spec-file"],
    },
}


def jc_reduced_state(omega: float, t: float) -> np.ndarray:
    """Reduced atom state diag(cos^2(omega t / 2), sin^2(omega t / 2))."""
    if t < 0:
        raise ValidationError("time must be nonnegative")
    c = math.cos(omega * t / 2) ** 2
    return np.diag([c, 1 - c]).astype(complex)

def jc_rate(omega: float, t: float) -> float:
    """Closed-form jump rate (omega/2) tan(omega t).

    Returns inf at the singular times omega*t = pi/2 mod pi, where the
    rate blows up but the dynamics stays finite.
    """
    if abs(math.cos(omega * t)) < 1e-12:
        return math.inf
    return 0.5 * omega * math.tan(omega * t)


def amplitude_damping_exact(gamma: float, omega: float, t: float) -> np.ndarray:
    """Populations diag(e^{-gamma t}, 1 - e^{-gamma t}) of the decaying atom."""
    if t < 0:
        raise ValidationError("time must be nonnegative")
    e = math.exp(-gamma * t)
    return np.diag([e, 1 - e]).astype(complex)


def amplitude_damping_spec(gamma: float, level_splitting: float = 1.0) -> LindbladSpec:
    return LindbladSpec(
        hamiltonian=level_splitting * SIGMA_Z / 2,
        jump_ops=((SIGMA_MINUS, gamma),),
    )


def lindblad_rhs(spec: LindbladSpec, rho) -> np.ndarray:
    """Right-hand side of the Lindblad equation (traceless, Hermitian)."""
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(spec.hamiltonian, dtype=complex)
    if rho.shape != h.shape:
        raise ValidationError("state and Hamiltonian dimensions differ")
    out = -1j * (h @ rho - rho @ h)
    for op, gamma in spec.jump_ops:
        op = np.asarray(op, dtype=complex)
        opd = op.conj().T
        anti = opd @ op
        out += gamma * (op @ rho @ opd - 0.5 * (anti @ rho + rho @ anti))
    return out


def integrate(
    spec: LindbladSpec, rho0, grid, tol: Tolerances = DEFAULT_TOLERANCES
) -> list[TrajectorySample]:
    """Fixed-step RK4 integration of the Lindblad equation on a time grid.

    Each step rehermitizes and renormalizes the trace; a step that drives
    an eigenvalue below -1e-8 raises StepTooLarge.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be strictly increasing with >= 2 points")
    rho = np.asarray(rho0, dtype=complex).copy()
    samples = [TrajectorySample(time=float(grid[0]), rho=rho.copy())]
    for k in range(grid.size - 1):
        dt = grid[k + 1] - grid[k]
        k1 = lindblad_rhs(spec, rho)
        k2 = lindblad_rhs(spec, rho + 0.5 * dt * k1)
        k3 = lindblad_rhs(spec, rho + 0.5 * dt * k2)
        k4 = lindblad_rhs(spec, rho + dt * k3)
        rho = rho + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = (rho + rho.conj().T) / 2
        rho = rho / rho.trace().real
        if np.linalg.eigvalsh(rho).min() < -1e-8:
            raise StepTooLarge(
                f"positivity violated at t={grid[k + 1]}; reduce the step"
            )
        samples.append(TrajectorySample(time=float(grid[k + 1]), rho=rho.copy()))
    return samples


def sample_model(
    name: str,
    grid,
    params: ModelParams | None = None,
    spec: LindbladSpec | None = None,
    rho0=None,
) -> list[TrajectorySample]:
    """Produce trajectory samples for a catalogue model on a time grid."""
    grid = np.asarray(grid, dtype=float)
    params = params or ModelParams()
    if name == "jc":
        return [
            TrajectorySample(time=float(t), rho=jc_reduced_state(params.omega, t))
            for t in grid
        ]
    if name == "amplitude-damping":
        return [
            TrajectorySample(
                time=float(t), rho=amplitude_damping_exact(params.gamma, params.level_splitting, t)
            )
            for t in grid
        ]
    if name == "lindblad":
        if spec is None or rho0 is None:
            raise ValidationError("lindblad model needs a spec and initial state")
        return integrate(spec, rho0, grid)
    raise ValidationError(f"unknown model {name!r}")
