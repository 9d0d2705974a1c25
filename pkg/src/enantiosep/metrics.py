"""Ionization-threshold separation model and imperfection sweeps."""

from __future__ import annotations

import enum
import itertools
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import ImperfectionParams, exact_populations, perturbative_populations
from .core import PropagationConfig, QuantumState, propagate
from .pulses import ChiralitySignMap, PulseSchedule, Transition, fig3_perfect

WORKERS_ENV = "ENANTIOSEP_WORKERS"


class Engine(str, enum.Enum):
    PERTURBATIVE = "perturbative"
    EXACT_ALGEBRAIC = "exact-algebraic"
    FULL_INTEGRATION = "full-integration"


@dataclass(frozen=True)
class SeparationReport:
    ionized_fraction_L: float
    ionized_fraction_R: float
    retained_fraction_L: float
    retained_fraction_R: float
    enantiomeric_excess_retained: float | None
    enantiomeric_excess_ionized: float | None

    def as_dict(self) -> dict:
        return {
            "ionized_fraction_L": self.ionized_fraction_L,
            "ionized_fraction_R": self.ionized_fraction_R,
            "retained_fraction_L": self.retained_fraction_L,
            "retained_fraction_R": self.retained_fraction_R,
            "enantiomeric_excess_retained": self.enantiomeric_excess_retained,
            "enantiomeric_excess_ionized": self.enantiomeric_excess_ionized,
        }


def _excess(n_left: float, n_right: float) -> float | None:
    total = n_left + n_right
    if total == 0.0:
        return None
    return (n_left - n_right) / total


def separate(
    final_L: Sequence[float],
    final_R: Sequence[float],
    mixture_ratio: float = 0.5,
    ionization_efficiency: float = 1.0,
) -> SeparationReport:
    """Split each enantiomer into ionized and neutral fractions.

    Population in |3> is ionized with probability ``ionization_efficiency``;
    |1> and |2> are never ionized. ``mixture_ratio`` is the initial fraction
    of left-handed molecules. An enantiomeric excess is ``None`` when the
    corresponding subpopulation is empty.
    """
    final_L = np.asarray(final_L, dtype=float)
    final_R = np.asarray(final_R, dtype=float)
    for name, p in (("final_L", final_L), ("final_R", final_R)):
        if p.shape != (3,) or abs(p.sum() - 1.0) > 1e-6:
            raise ValueError(f"{name} must be three populations summing to 1, got {p.tolist()}")
    if not 0.0 < mixture_ratio < 1.0:
        raise ValueError("mixture_ratio must lie in (0, 1)")
    if not 0.0 <= ionization_efficiency <= 1.0:
        raise ValueError("ionization_efficiency must lie in [0, 1]")

    ion_L = ionization_efficiency * float(final_L[2])
    ion_R = ionization_efficiency * float(final_R[2])
    ret_L, ret_R = 1.0 - ion_L, 1.0 - ion_R
    r = mixture_ratio
    return SeparationReport(
        ionized_fraction_L=ion_L,
        ionized_fraction_R=ion_R,
        retained_fraction_L=ret_L,
        retained_fraction_R=ret_R,
        enantiomeric_excess_retained=_excess(r * ret_L, (1 - r) * ret_R),
        enantiomeric_excess_ionized=_excess(r * ion_L, (1 - r) * ion_R),
    )


def perturbed_schedule(params: ImperfectionParams, base: PulseSchedule | None = None) -> PulseSchedule:
    """Two-step schedule carrying the given area and phase errors.

    The 1-2 amplitude is scaled by ``1 + delta/(pi/4)``, the 1-3 and 2-3
    amplitudes by ``1 + delta'/(pi/2)`` and ``delta_phi`` is added to the 1-3
    phase. With an ideal base this produces exactly the requested errors.
    """
    base = base or fig3_perfect()
    p12, p13, p23 = (base.get(t) for t in Transition)
    if p12 is None or p13 is None or p23 is None:
        raise ValueError("base schedule needs T12, T13 and T23 pulses")
    s1 = 1.0 + params.delta / (math.pi / 4)
    s2 = 1.0 + params.delta_prime / (math.pi / 2)
    return (
        base.replace_pulse(Transition.T12, amplitude=p12.amplitude * s1)
        .replace_pulse(Transition.T13, amplitude=p13.amplitude * s2, phase=p13.phase + params.delta_phi)
        .replace_pulse(Transition.T23, amplitude=p23.amplitude * s2)
    )


def algebraic_role_swap(signs_L: ChiralitySignMap, signs_R: ChiralitySignMap) -> bool:
    """Whether closed-form populations must be read with L and R exchanged.

    The closed forms know only the canonical pair of sign maps and its mirror
    (1-3 drive negated for both molecules); anything else needs full integration.
    """
    canonical = (ChiralitySignMap.left(), ChiralitySignMap.right())
    if (signs_L, signs_R) == canonical:
        return False
    if (signs_L, signs_R) == canonical[::-1]:
        return True
    raise ValueError(
        f"sign maps {signs_L.as_tuple()}, {signs_R.as_tuple()} have no closed form; "
        "use the full-integration engine"
    )


class SweepError(RuntimeError):
    def __init__(self, point: tuple[float, float, float], cause: BaseException):
        self.point = point
        super().__init__(f"sweep failed at (delta, delta', delta_phi) = {point}: {cause}")


@dataclass
class SweepResult:
    axes: dict[str, np.ndarray]
    points: np.ndarray  # (n, 3) rows of (delta, delta_prime, delta_phi), lexicographic order
    populations: np.ndarray  # (n, 6)
    reports: list[SeparationReport]
    provenance: Engine


AXES = ("delta", "delta_prime", "delta_phi")


def _check_axis(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValueError(f"sweep axis {name} is empty")
    if np.any(np.diff(arr) <= 0):
        raise ValueError(f"sweep axis {name} must be strictly increasing")
    return arr


def _full_point(args):
    params, base, cfg, signs_L, signs_R = args
    schedule = perturbed_schedule(params, base)
    pops = [propagate(QuantumState.ground(), schedule, s, cfg).final_populations for s in (signs_L, signs_R)]
    return np.concatenate(pops)


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    n = int(raw)
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer")
    return n


def sweep(
    grid: dict[str, Sequence[float]],
    mode: Engine | str = Engine.EXACT_ALGEBRAIC,
    base: PulseSchedule | None = None,
    cfg: PropagationConfig | None = None,
    *,
    signs: tuple[ChiralitySignMap, ChiralitySignMap] | None = None,
    mixture_ratio: float = 0.5,
    ionization_efficiency: float = 1.0,
    workers: int | None = None,
) -> SweepResult:
    """Evaluate final populations over the product grid of imperfection values.

    ``grid`` maps each of ``delta``, ``delta_prime``, ``delta_phi`` to a
    strictly increasing sequence (a missing axis means ``[0.0]``). Points are
    visited and returned in lexicographic grid order whatever the worker count.
    Full integration uses :func:`perturbed_schedule` on ``base``.
    """
    mode = Engine(mode)
    unknown = set(grid) - set(AXES)
    if unknown:
        raise ValueError(f"unknown sweep axes: {sorted(unknown)}")
    axes = {name: _check_axis(name, grid.get(name, [0.0])) for name in AXES}
    points = [ImperfectionParams(*map(float, p)) for p in itertools.product(*axes.values())]
    signs_L, signs_R = signs or (ChiralitySignMap.left(), ChiralitySignMap.right())
    swapped = algebraic_role_swap(signs_L, signs_R) if mode is not Engine.FULL_INTEGRATION else False

    if mode is Engine.FULL_INTEGRATION:
        cfg = cfg or PropagationConfig()
        jobs = [(p, base, cfg, signs_L, signs_R) for p in points]
        n_workers = workers if workers is not None else worker_count()
        pops = []
        if n_workers > 1:
            with ProcessPoolExecutor(n_workers) as pool:
                # map preserves submission order, which keeps rows in grid order.
                it = pool.map(_full_point, jobs)
                for p in points:
                    try:
                        pops.append(next(it))
                    except Exception as exc:
                        raise SweepError(p.as_tuple(), exc) from exc
        else:
            for job in jobs:
                try:
                    pops.append(_full_point(job))
                except Exception as exc:
                    raise SweepError(job[0].as_tuple(), exc) from exc
    else:
        formula = perturbative_populations if mode is Engine.PERTURBATIVE else exact_populations
        pops = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for p in points:
                row = formula(p)
                # A flipped 1-3 sign on both sides exchanges the roles of L and R.
                pops.append(np.concatenate([row[3:], row[:3]]) if swapped else row)

    pops = np.array(pops)
    reports = [separate(row[:3], row[3:], mixture_ratio, ionization_efficiency) for row in pops]
    return SweepResult(
        axes=axes,
        points=np.array([p.as_tuple() for p in points]),
        populations=pops,
        reports=reports,
        provenance=mode,
    )
