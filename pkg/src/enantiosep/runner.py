"""Execute scenarios and sweeps and write their CSV/JSON outputs."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytic import ImperfectionParams, exact_populations, infer_imperfections, perturbative_populations
from .config import ConfigError, ScenarioConfig
from .core import QuantumState, propagate
from .metrics import Engine, SeparationReport, SweepResult, algebraic_role_swap, separate, sweep
from .pulses import CPTConditionError, Transition, effective_rabi, pulse_area

TRACE_HEADER = ["t", "p1_L", "p2_L", "p3_L", "p1_R", "p2_R", "p3_R"]
SWEEP_HEADER = [
    "delta",
    "delta_prime",
    "delta_phi",
    "p1_L",
    "p2_L",
    "p3_L",
    "p1_R",
    "p2_R",
    "p3_R",
    "ee_retained",
    "ee_ionized",
]


@dataclass
class ScenarioResult:
    times: np.ndarray
    populations: np.ndarray  # (n, 6): L triple then R triple
    report: SeparationReport
    imperfections: ImperfectionParams | None

    @property
    def final(self) -> np.ndarray:
        return self.populations[-1]


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _scenario_imperfections(scenario: ScenarioConfig) -> ImperfectionParams:
    if scenario.imperfections is not None:
        return scenario.imperfections
    try:
        effective_rabi(scenario.schedule)
        return infer_imperfections(scenario.schedule)
    except (ValueError, CPTConditionError) as exc:
        raise ConfigError("pulses", f"cannot derive imperfections for a closed-form engine: {exc}")


def simulate(scenario: ScenarioConfig, engine: Engine | None = None) -> ScenarioResult:
    engine = Engine(engine or scenario.engine)
    if engine is Engine.FULL_INTEGRATION:
        traces = [
            propagate(scenario.initial_L, scenario.schedule, scenario.signs_L, scenario.propagation),
            propagate(scenario.initial_R, scenario.schedule, scenario.signs_R, scenario.propagation),
        ]
        times = traces[0].times
        pops = np.hstack([traces[0].populations, traces[1].populations])
        final_L, final_R = traces[0].final_populations, traces[1].final_populations
        try:
            params = _scenario_imperfections(scenario)
        except ConfigError:
            params = None  # not a two-step schedule; nothing to report
    else:
        ground = QuantumState.ground()
        if scenario.initial_L != ground or scenario.initial_R != ground:
            raise ConfigError("initial_state", "closed-form engines start both enantiomers in |1>")
        try:
            swapped = algebraic_role_swap(scenario.signs_L, scenario.signs_R)
        except ValueError as exc:
            raise ConfigError("sign_convention", str(exc))
        params = _scenario_imperfections(scenario)
        row = (perturbative_populations if engine is Engine.PERTURBATIVE else exact_populations)(params)
        if swapped:
            row = np.concatenate([row[3:], row[:3]])
        cfg = scenario.propagation
        times = np.array([cfg.t_start, cfg.t_start + cfg.n_steps * cfg.dt])
        start = np.concatenate([ground.populations, ground.populations])
        pops = np.vstack([start, row])
        final_L, final_R = row[:3], row[3:]
    report = separate(final_L, final_R, scenario.mixture_ratio, scenario.ionization_efficiency)
    return ScenarioResult(times, pops, report, params)


def pulse_areas(scenario: ScenarioConfig) -> dict:
    areas = {p.transition.value: pulse_area(p) for p in scenario.schedule}
    try:
        effective_rabi(scenario.schedule)
    except CPTConditionError:
        pass
    else:
        areas["effective_step2"] = math.sqrt(2.0) * pulse_area(scenario.schedule.get(Transition.T13))
    return areas


def run_scenario(scenario: ScenarioConfig, out_dir: Path, engine: Engine | None = None) -> ScenarioResult:
    """Simulate and write ``trace.csv`` and ``summary.json`` into ``out_dir``."""
    engine = Engine(engine or scenario.engine)
    result = simulate(scenario, engine)
    out_dir = Path(out_dir)
    rows = (np.concatenate([[t], p]) for t, p in zip(result.times, result.populations))
    write_atomic(out_dir / "trace.csv", _csv_text(TRACE_HEADER, rows))
    final = result.final
    summary = {
        "name": scenario.name,
        "engine": engine.value,
        "method": scenario.propagation.method.value if engine is Engine.FULL_INTEGRATION else None,
        "sign_convention": scenario.sign_convention,
        "final_populations": {"L": final[:3].tolist(), "R": final[3:].tolist()},
        "pulse_areas": pulse_areas(scenario),
        "imperfections": (
            None
            if result.imperfections is None
            else dict(zip(("delta", "delta_prime", "delta_phi"), result.imperfections.as_tuple()))
        ),
        "separation": result.report.as_dict(),
    }
    write_atomic(out_dir / "summary.json", json.dumps(summary, indent=2) + "\n")
    return result


def run_sweep(scenario: ScenarioConfig, out_dir: Path, engine: Engine | None = None) -> SweepResult:
    """Evaluate the scenario's sweep grid; writes ``sweep.csv`` and ``sweep_summary.json``."""
    if scenario.sweep_axes is None:
        raise ConfigError("sweep", "required field missing for a sweep")
    engine = Engine(engine or scenario.engine)
    if engine is not Engine.FULL_INTEGRATION:
        try:
            algebraic_role_swap(scenario.signs_L, scenario.signs_R)
        except ValueError as exc:
            raise ConfigError("sign_convention", str(exc))
    result = sweep(
        scenario.sweep_axes,
        engine,
        base=scenario.schedule,
        cfg=scenario.propagation,
        signs=(scenario.signs_L, scenario.signs_R),
        mixture_ratio=scenario.mixture_ratio,
        ionization_efficiency=scenario.ionization_efficiency,
    )
    out_dir = Path(out_dir)
    rows = [
        [*pt, *pops, rep.enantiomeric_excess_retained, rep.enantiomeric_excess_ionized]
        for pt, pops, rep in zip(result.points, result.populations, result.reports)
    ]
    write_atomic(out_dir / "sweep.csv", _csv_text(SWEEP_HEADER, rows))
    ee = [r.enantiomeric_excess_retained for r in result.reports]
    ee_valid = [x for x in ee if x is not None]
    summary = {
        "name": scenario.name,
        "engine": engine.value,
        "axes": {k: v.tolist() for k, v in result.axes.items()},
        "n_points": len(rows),
        "p3_R": {"min": float(result.populations[:, 5].min()), "max": float(result.populations[:, 5].max())},
        "p3_L": {"min": float(result.populations[:, 2].min()), "max": float(result.populations[:, 2].max())},
        "ee_retained": ({"min": min(ee_valid), "max": max(ee_valid)} if ee_valid else None),
        "undefined_ee_retained_points": sum(x is None for x in ee),
    }
    write_atomic(out_dir / "sweep_summary.json", json.dumps(summary, indent=2) + "\n")
    return result
