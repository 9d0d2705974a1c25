"""Pulse envelopes, schedules and the chirality sign map.

Time is measured in units of the Gaussian width ``tau`` and Rabi amplitudes
in ``1/tau``. A transition ``Tij`` couples levels ``|i>`` and ``|j>`` through
the term ``Omega_ij |j><i| + h.c.`` with no factor 1/2, so a pi/2 pulse has
area pi/4.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np


class Transition(str, enum.Enum):
    T12 = "T12"
    T13 = "T13"
    T23 = "T23"

    @property
    def levels(self) -> tuple[int, int]:
        """Zero-based (lower, upper) level indices."""
        return _LEVELS[self]


_LEVELS = {
    Transition.T12: (0, 1),
    Transition.T13: (0, 2),
    Transition.T23: (1, 2),
}


class Shape(str, enum.Enum):
    GAUSSIAN = "gaussian"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class PulseEnvelope:
    """Constant-phase drive on a single transition.

    ``width`` is the 1/e half-width for a Gaussian and the half-duration for a
    rectangle. The complex Rabi frequency is
    ``sign * amplitude * shape(t) * exp(1j * phase)``; ``sign`` is only ever set
    by :func:`apply_sign_map`.
    """

    transition: Transition
    amplitude: float
    center: float
    width: float
    phase: float = 0.0
    shape: Shape = Shape.GAUSSIAN
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        object.__setattr__(self, "transition", Transition(self.transition))
        object.__setattr__(self, "shape", Shape(self.shape))
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")
        if not self.amplitude >= 0:
            raise ValueError(f"amplitude must be non-negative, got {self.amplitude}")
        for name in ("amplitude", "center", "width", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def shape_value(self, t):
        t = np.asarray(t, dtype=float)
        if self.shape is Shape.GAUSSIAN:
            return np.exp(-(((t - self.center) / self.width) ** 2))
        return (np.abs(t - self.center) <= self.width).astype(float)

    @property
    def support(self) -> tuple[float, float]:
        """Interval outside which the envelope is (numerically) zero."""
        reach = self.width * (1.0 if self.shape is Shape.RECTANGULAR else 8.0)
        return self.center - reach, self.center + reach


def rabi_at(p: PulseEnvelope, t):
    """Complex Rabi frequency of ``p`` at time(s) ``t``."""
    value = p.sign * p.amplitude * p.shape_value(t) * np.exp(1j * p.phase)
    return value[()] if np.ndim(value) == 0 else value


def pulse_area(p: PulseEnvelope) -> float:
    """Area of the envelope magnitude over its full support."""
    if p.shape is Shape.GAUSSIAN:
        return p.amplitude * p.width * math.sqrt(math.pi)
    return p.amplitude * 2.0 * p.width


@dataclass(frozen=True)
class ChiralitySignMap:
    """Per-transition sign factors (s12, s13, s23) applied to the shared fields."""

    s12: int = 1
    s13: int = 1
    s23: int = 1

    def __post_init__(self):
        for s in (self.s12, self.s13, self.s23):
            if s not in (1, -1):
                raise ValueError(f"sign factors must be +1 or -1, got {s}")

    @classmethod
    def left(cls) -> ChiralitySignMap:
        return cls(1, 1, 1)

    @classmethod
    def right(cls) -> ChiralitySignMap:
        return cls(1, -1, 1)

    @classmethod
    def from_tuple(cls, signs: Iterable[int]) -> ChiralitySignMap:
        return cls(*(int(s) for s in signs))

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.s12, self.s13, self.s23)

    def sign(self, transition: Transition) -> int:
        return {
            Transition.T12: self.s12,
            Transition.T13: self.s13,
            Transition.T23: self.s23,
        }[Transition(transition)]


@dataclass(frozen=True)
class PulseSchedule:
    pulses: tuple[PulseEnvelope, ...] = field(default_factory=tuple)

    def __post_init__(self):
        pulses = tuple(self.pulses)
        object.__setattr__(self, "pulses", pulses)
        seen = [p.transition for p in pulses]
        if len(set(seen)) != len(seen):
            raise ValueError(f"duplicate transitions in schedule: {[t.value for t in seen]}")

    def __iter__(self):
        return iter(self.pulses)

    def __len__(self):
        return len(self.pulses)

    def get(self, transition: Transition) -> PulseEnvelope | None:
        transition = Transition(transition)
        for p in self.pulses:
            if p.transition is transition:
                return p
        return None

    def replace_pulse(self, transition: Transition, **changes) -> PulseSchedule:
        transition = Transition(transition)
        if self.get(transition) is None:
            raise KeyError(transition.value)
        return PulseSchedule(
            tuple(replace(p, **changes) if p.transition is transition else p for p in self.pulses)
        )


def apply_sign_map(schedule: PulseSchedule, signs: ChiralitySignMap) -> PulseSchedule:
    """Schedule seen by one enantiomer: each pulse multiplied by its sign factor.

    Amplitude, shape and phase are untouched, so applying a map twice returns
    the original schedule exactly.
    """
    return PulseSchedule(tuple(replace(p, sign=p.sign * signs.sign(p.transition)) for p in schedule.pulses))


def signed_rabi(schedule: PulseSchedule, signs: ChiralitySignMap, t) -> dict[Transition, complex]:
    """Signed complex Rabi frequency per transition, computed as ``s_ij * Omega_ij(t)``."""
    return {p.transition: signs.sign(p.transition) * rabi_at(p, t) for p in schedule.pulses}


class CPTConditionError(ValueError):
    """Raised when the two step-2 drives do not have equal magnitudes."""


def effective_rabi(schedule: PulseSchedule, rtol: float = 1e-12) -> Callable:
    """Return ``t -> sqrt(2) * Omega0(t)`` for the step-2 pulse pair.

    Requires ``|Omega_13(t)| == |Omega_23(t)|``; the envelopes are compared
    parameter-wise (shape, center, width, amplitude) because equal parameters
    are the only way the magnitudes agree at every t.
    """
    p13 = schedule.get(Transition.T13)
    p23 = schedule.get(Transition.T23)
    if p13 is None or p23 is None:
        raise CPTConditionError("schedule needs both T13 and T23 pulses")
    same_shape = p13.shape is p23.shape and p13.center == p23.center and p13.width == p23.width
    scale = max(p13.amplitude, p23.amplitude)
    if not same_shape or abs(p13.amplitude - p23.amplitude) > rtol * scale:
        raise CPTConditionError(
            f"|Omega_13| != |Omega_23|: amplitudes {p13.amplitude!r}, {p23.amplitude!r}; "
            "use full propagation instead"
        )

    def omega_prime(t):
        return math.sqrt(2.0) * np.abs(rabi_at(p23, t))

    return omega_prime


# Reference schedules used throughout the two-step protocol.

STEP1_AMPLITUDE = math.sqrt(math.pi) / 4.0
STEP2_AMPLITUDE = math.sqrt(math.pi / 2.0) / 2.0
STEP1_CENTER = 3.0
STEP2_CENTER = 9.0


def two_step_schedule(
    step1_width: float = 1.0,
    step2_width: float = 1.0,
    phase13: float = math.pi / 2,
    step1_amplitude: float = STEP1_AMPLITUDE,
    step2_amplitude: float = STEP2_AMPLITUDE,
) -> PulseSchedule:
    """Gaussian pi/2 pulse on 1-2 at 3 tau, then the 1-3/2-3 pair at 9 tau."""
    return PulseSchedule(
        (
            PulseEnvelope(Transition.T12, step1_amplitude, STEP1_CENTER, step1_width, 0.0),
            PulseEnvelope(Transition.T13, step2_amplitude, STEP2_CENTER, step2_width, phase13),
            PulseEnvelope(Transition.T23, step2_amplitude, STEP2_CENTER, step2_width, 0.0),
        )
    )


def fig3_perfect() -> PulseSchedule:
    return two_step_schedule()


def fig3_duration_error() -> PulseSchedule:
    return two_step_schedule(step2_width=1.1)


def fig3_all_errors() -> PulseSchedule:
    return two_step_schedule(step1_width=1.1, step2_width=1.1, phase13=11 * math.pi / 20)
