"""Closed-form evolutions and second-order population formulas.

These are independent of the numerical propagator and serve as its oracle.
Chirality-dependent signs follow the compact +/- notation: the upper sign
belongs to the left-handed molecule, the lower sign to the right-handed one.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import QuantumState
from .pulses import PulseSchedule, Transition, pulse_area

SQRT2 = math.sqrt(2.0)
PERTURBATIVE_RANGE = 0.2


class Chirality(str, enum.Enum):
    L = "L"
    R = "R"

    @property
    def pm(self) -> int:
        """+1 for L, -1 for R."""
        return 1 if self is Chirality.L else -1


@dataclass(frozen=True)
class ImperfectionParams:
    """Step-1 area error, step-2 effective area error, relative-phase error (radians)."""

    delta: float = 0.0
    delta_prime: float = 0.0
    delta_phi: float = 0.0

    @property
    def magnitude(self) -> float:
        return max(abs(self.delta), abs(self.delta_prime), abs(self.delta_phi))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.delta, self.delta_prime, self.delta_phi)


@dataclass(frozen=True)
class BrightDarkDecomposition:
    """Step-2 initial state written as ``A |bright> + B |orthogonal>``."""

    bright: QuantumState
    orthogonal: QuantumState
    coeff_bright: complex
    coeff_orthogonal: complex
    chirality: Chirality

    def recombine(self) -> np.ndarray:
        return self.coeff_bright * self.bright.amplitudes + self.coeff_orthogonal * self.orthogonal.amplitudes


def _ket(c1, c2, c3=0.0) -> QuantumState:
    return QuantumState(np.array([c1, c2, c3], dtype=complex))


def step1_closed_form(area: float) -> QuantumState:
    """Resonant 1-2 drive of the given area applied to |1>."""
    return _ket(math.cos(area), -1j * math.sin(area))


def prepared_state() -> QuantumState:
    """Ideal step-1 output (|1> - i|2>)/sqrt(2), identical for both enantiomers."""
    return _ket(1 / SQRT2, -1j / SQRT2)


def bright_state(chirality: Chirality, delta_phi: float = 0.0) -> QuantumState:
    """State coupled to |3> by the step-2 pair whose 1-3 phase is pi/2 + delta_phi."""
    s = Chirality(chirality).pm
    return _ket(-s * 1j * np.exp(-1j * delta_phi) / SQRT2, 1 / SQRT2)


def orthogonal_state(chirality: Chirality, delta_phi: float = 0.0) -> QuantumState:
    """Lower-level state orthogonal to :func:`bright_state`."""
    s = Chirality(chirality).pm
    return _ket(1 / SQRT2, -s * 1j * np.exp(1j * delta_phi) / SQRT2)


def step2_closed_form_pumped(area_prime: float) -> QuantumState:
    """Right-handed molecule from the ideal prepared state after effective area ``area_prime``."""
    phi = bright_state(Chirality.R).amplitudes
    three = np.array([0, 0, 1], dtype=complex)
    return QuantumState(-1j * math.cos(area_prime) * phi - math.sin(area_prime) * three)


def dark_state(omega13: complex, omega23: complex) -> QuantumState:
    """Zero-eigenvalue lower-level state of the 1-3/2-3 coupling.

    The couplings are the values seen by the molecule (sign map applied).
    """
    norm = math.hypot(abs(omega13), abs(omega23))
    if norm == 0.0:
        raise ValueError("dark state undefined when both couplings vanish")
    return _ket(omega23 / norm, -omega13 / norm)


def imperfect_step1_state(delta: float, chirality: Chirality = Chirality.L) -> QuantumState:
    """Step-1 output when the pulse area is pi/4 + delta.

    Identical for both enantiomers; ``chirality`` is accepted for symmetry
    with the other imperfect-pulse helpers.
    """
    c, s = math.cos(delta), math.sin(delta)
    return _ket((c - s) / SQRT2, -1j * (c + s) / SQRT2)


def coefficients_AB(delta: float, delta_phi: float, chirality: Chirality) -> BrightDarkDecomposition:
    chi = Chirality(chirality)
    s = chi.pm
    c, sn = math.cos(delta), math.sin(delta)
    e = np.exp(1j * delta_phi)
    A = 0.5j * (s * c * (e - s) - s * sn * (e + s))
    B = 0.5 * (c * (1 + s / e) - sn * (1 - s / e))
    return BrightDarkDecomposition(
        bright=bright_state(chi, delta_phi),
        orthogonal=orthogonal_state(chi, delta_phi),
        coeff_bright=complex(A),
        coeff_orthogonal=complex(B),
        chirality=chi,
    )


def imperfect_final_state(params: ImperfectionParams, chirality: Chirality) -> QuantumState:
    """Exact two-step result for sequential (non-overlapping) imperfect pulses."""
    dec = coefficients_AB(params.delta, params.delta_phi, chirality)
    A, B = dec.coeff_bright, dec.coeff_orthogonal
    dp = params.delta_prime
    amps = (
        -A * math.sin(dp) * dec.bright.amplitudes
        + B * dec.orthogonal.amplitudes
        + np.array([0, 0, -1j * A * math.cos(dp)])
    )
    return QuantumState(amps)


def exact_populations(params: ImperfectionParams) -> np.ndarray:
    """(p1L, p2L, p3L, p1R, p2R, p3R) from :func:`imperfect_final_state`."""
    return np.concatenate(
        [imperfect_final_state(params, chi).populations for chi in (Chirality.L, Chirality.R)]
    )


def perturbative_populations(params: ImperfectionParams) -> np.ndarray:
    """Second-order small-error populations (p1L, p2L, p3L, p1R, p2R, p3R)."""
    d, dp, dphi = params.as_tuple()
    if params.magnitude > PERTURBATIVE_RANGE:
        warnings.warn(
            f"imperfections {params.as_tuple()} exceed the small-error range "
            f"|x| <= {PERTURBATIVE_RANGE}; second-order populations may be inaccurate",
            stacklevel=2,
        )
    q = 0.25 * dphi**2
    p1L = 0.5 * (1 - d**2 + 2 * d * dp - q)
    p2L = 0.5 * (1 - d**2 - 2 * d * dp - q)
    p3L = q + d**2
    p1R = 0.5 * ((dp + d) ** 2 + q)
    p2R = 0.5 * ((dp - d) ** 2 + q)
    p3R = 1 - d**2 - dp**2 - q
    return np.array([p1L, p2L, p3L, p1R, p2R, p3R])


def infer_imperfections(schedule: PulseSchedule) -> ImperfectionParams:
    """Read (delta, delta', delta_phi) off a two-step schedule's pulse parameters.

    Step-1 error is the 1-2 area minus pi/4, step-2 error the effective area
    ``sqrt(2) * area(1-3)`` minus pi/2, and the phase error is the 1-3 phase
    minus pi/2 (relative to the 2-3 phase).
    """
    p12 = schedule.get(Transition.T12)
    p13 = schedule.get(Transition.T13)
    p23 = schedule.get(Transition.T23)
    if p12 is None or p13 is None or p23 is None:
        raise ValueError("two-step schedule needs T12, T13 and T23 pulses")
    delta = pulse_area(p12) - math.pi / 4
    delta_prime = SQRT2 * pulse_area(p13) - math.pi / 2
    rel = p13.phase - p23.phase - math.pi / 2
    delta_phi = math.remainder(rel, 2 * math.pi)
    return ImperfectionParams(delta, delta_prime, delta_phi)
