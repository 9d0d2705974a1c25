"""State representation, Hamiltonian assembly and unitary propagation.

Only the resonant interaction picture is simulated: the Hamiltonian is
``sum_{j>i} s_ij Omega_ij(t) |j><i| + h.c.`` with zero diagonal, and hbar = 1.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .pulses import ChiralitySignMap, PulseSchedule, rabi_at

log = logging.getLogger(__name__)

NORM_TOL = 1e-9
NORM_ABORT = 1e-6

BASIS = np.eye(3, dtype=complex)


class NormalizationError(RuntimeError):
    """State norm drifted beyond what a correctly configured integrator allows."""


class ResonanceError(ValueError):
    """Nonzero detuning requested; only resonant dynamics are supported."""


@dataclass(frozen=True)
class QuantumState:
    """Normalized amplitudes (c1, c2, c3) of one enantiomer."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (3,):
            raise ValueError(f"expected 3 amplitudes, got shape {amps.shape}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 = {norm2!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def ground(cls) -> QuantumState:
        return cls(BASIS[0])

    @classmethod
    def basis(cls, k: int) -> QuantumState:
        return cls(BASIS[k])

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: QuantumState) -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __eq__(self, other):
        if not isinstance(other, QuantumState):
            return NotImplemented
        return bool(np.array_equal(self.amplitudes, other.amplitudes))

    __hash__ = None


@dataclass(frozen=True)
class LevelSystem:
    """Bare level energies and drive frequencies, all in 1/tau.

    Detunings follow ``D1 = E3-E1-w31``, ``D2 = E2-E1-w21``, ``D3 = E3-E2-w32``.
    """

    energies: tuple[float, float, float] = (0.0, 0.0, 0.0)
    drive_frequencies: tuple[float, float, float] = (0.0, 0.0, 0.0)  # (w21, w31, w32)

    @property
    def detunings(self) -> tuple[float, float, float]:
        e1, e2, e3 = self.energies
        w21, w31, w32 = self.drive_frequencies
        return (e3 - e1 - w31, e2 - e1 - w21, e3 - e2 - w32)

    def validate_resonant(self) -> None:
        if any(d != 0.0 for d in self.detunings):
            raise ResonanceError(
                f"detunings {self.detunings} are nonzero; only resonant dynamics are supported"
            )


class Method(str, enum.Enum):
    RK4 = "fourth-order-fixed-step"
    EXPONENTIAL = "piecewise-constant-exponential"


@dataclass(frozen=True)
class PropagationConfig:
    t_start: float = 0.0
    t_end: float = 12.0
    dt: float = 1e-3
    method: Method = Method.EXPONENTIAL
    record_stride: int = 10

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("window shorter than one step")
        if not (isinstance(self.record_stride, int) and self.record_stride >= 1):
            raise ValueError("record_stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        # Tolerate representation error in (t_end - t_start) / dt.
        return int(np.floor((self.t_end - self.t_start) / self.dt + 1e-9))

    def step_times(self) -> np.ndarray:
        """Left edge of every step."""
        return self.t_start + self.dt * np.arange(self.n_steps)


@dataclass
class PopulationTrace:
    times: np.ndarray
    populations: np.ndarray  # shape (n_samples, 3)
    final_state: QuantumState = field(repr=False, default=None)

    @property
    def final_populations(self) -> np.ndarray:
        return self.final_state.populations


def assemble_hamiltonian(schedule: PulseSchedule, signs: ChiralitySignMap, t) -> np.ndarray:
    """Interaction-picture Hamiltonian at time ``t``.

    ``t`` may be an array, in which case a stack of shape ``(len(t), 3, 3)``
    is returned. The upper triangle is the exact complex conjugate of the
    lower, so the result is Hermitian bitwise.
    """
    t_arr = np.asarray(t, dtype=float)
    H = np.zeros(t_arr.shape + (3, 3), dtype=complex)
    for p in schedule.pulses:
        i, j = p.transition.levels
        value = signs.sign(p.transition) * rabi_at(p, t_arr)
        H[..., j, i] += value
    H[..., 0, 1] = np.conj(H[..., 1, 0])
    H[..., 0, 2] = np.conj(H[..., 2, 0])
    H[..., 1, 2] = np.conj(H[..., 2, 1])
    return H


def step_unitary(H: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-i H dt)`` by spectral decomposition; works on stacks of matrices."""
    evals, evecs = np.linalg.eigh(H)
    phases = np.exp(-1j * evals * dt)
    return (evecs * phases[..., None, :]) @ np.swapaxes(evecs.conj(), -1, -2)


def _check_norm(psi: np.ndarray, t: float) -> None:
    drift = abs(float(np.vdot(psi, psi).real) - 1.0)
    if drift > NORM_ABORT:
        raise NormalizationError(
            f"norm drift {drift:.3e} at t={t:.6g} exceeds {NORM_ABORT:g}; "
            "reduce dt or check the schedule amplitudes"
        )


def propagate(
    initial: QuantumState,
    schedule: PulseSchedule,
    signs: ChiralitySignMap,
    cfg: PropagationConfig,
) -> PopulationTrace:
    """Integrate the Schrodinger equation over ``cfg``'s window.

    Populations are recorded at ``t_start`` and then every ``record_stride``
    steps; the final time is always recorded. Raises
    :class:`NormalizationError` if the norm drifts by more than 1e-6.
    """
    n = cfg.n_steps
    dt = cfg.dt
    left = cfg.step_times()

    if cfg.method is Method.EXPONENTIAL:
        U = step_unitary(assemble_hamiltonian(schedule, signs, left + 0.5 * dt), dt)

        def advance(k, psi):
            return U[k] @ psi

    else:
        # RK4 needs H at both edges and the midpoint of every step.
        H_edge = assemble_hamiltonian(schedule, signs, np.append(left, left[-1] + dt))
        H_mid = assemble_hamiltonian(schedule, signs, left + 0.5 * dt)
        mH_edge = -1j * H_edge
        mH_mid = -1j * H_mid

        def advance(k, psi):
            k1 = mH_edge[k] @ psi
            k2 = mH_mid[k] @ (psi + 0.5 * dt * k1)
            k3 = mH_mid[k] @ (psi + 0.5 * dt * k2)
            k4 = mH_edge[k + 1] @ (psi + dt * k3)
            return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    psi = np.array(initial.amplitudes, dtype=complex)
    times = [cfg.t_start]
    pops = [np.abs(psi) ** 2]
    stride = cfg.record_stride
    for k in range(n):
        psi = advance(k, psi)
        if (k + 1) % stride == 0 or k + 1 == n:
            t = cfg.t_start + (k + 1) * dt
            _check_norm(psi, t)
            times.append(t)
            pops.append(np.abs(psi) ** 2)

    final_norm2 = float(np.vdot(psi, psi).real)
    if abs(final_norm2 - 1.0) > NORM_TOL:
        # Within the abort threshold but outside the state invariant: renormalize and say so.
        log.warning("renormalizing final state, |psi|^2 - 1 = %.3e", final_norm2 - 1.0)
        psi = psi / np.sqrt(final_norm2)
    return PopulationTrace(np.array(times), np.array(pops), QuantumState(psi))
