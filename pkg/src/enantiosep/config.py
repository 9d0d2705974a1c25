"""Scenario configuration files (JSON) and the bundled presets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .analytic import ImperfectionParams
from .core import LevelSystem, Method, PropagationConfig, QuantumState, ResonanceError
from .metrics import AXES, Engine
from .pulses import ChiralitySignMap, PulseEnvelope, PulseSchedule, Shape, Transition

SIGN_CONVENTIONS = {
    # Pulses are written in the canonical design; "eq17" negates the 1-3 drive,
    # which exchanges the roles of the two enantiomers.
    "eq4": (ChiralitySignMap(1, 1, 1), ChiralitySignMap(1, -1, 1)),
    "eq17": (ChiralitySignMap(1, -1, 1), ChiralitySignMap(1, 1, 1)),
}

TOP_LEVEL_KEYS = {
    "name",
    "description",
    "time_unit",
    "window",
    "method",
    "pulses",
    "sign_convention",
    "initial_state",
    "engine",
    "imperfections",
    "mixture_ratio",
    "ionization_efficiency",
    "level_system",
    "sweep",
}
REQUIRED_KEYS = ("time_unit", "window", "pulses")
PULSE_KEYS = {"transition", "shape", "amplitude", "center", "width", "phase"}
PULSE_REQUIRED = ("transition", "shape", "amplitude", "center", "width")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True)
class ScenarioConfig:
    propagation: PropagationConfig
    schedule: PulseSchedule
    signs_L: ChiralitySignMap
    signs_R: ChiralitySignMap
    sign_convention: str
    initial_L: QuantumState
    initial_R: QuantumState
    engine: Engine = Engine.FULL_INTEGRATION
    imperfections: ImperfectionParams | None = None
    mixture_ratio: float = 0.5
    ionization_efficiency: float = 1.0
    level_system: LevelSystem | None = None
    sweep_axes: dict[str, list[float]] | None = None
    name: str = ""
    description: str = ""

    def to_dict(self) -> dict:
        """Fully explicit form; :func:`parse_config` of it gives back an equal scenario."""
        cfg = self.propagation
        out = {
            "name": self.name,
            "description": self.description,
            "time_unit": "tau",
            "window": {
                "t_start": cfg.t_start,
                "t_end": cfg.t_end,
                "dt": cfg.dt,
                "record_stride": cfg.record_stride,
            },
            "method": cfg.method.value,
            "pulses": [
                {
                    "transition": p.transition.value,
                    "shape": p.shape.value,
                    "amplitude": p.amplitude,
                    "center": p.center,
                    "width": p.width,
                    "phase": p.phase,
                }
                for p in self.schedule
            ],
            "sign_convention": (
                self.sign_convention
                if self.sign_convention != "custom"
                else {"custom": {"L": list(self.signs_L.as_tuple()), "R": list(self.signs_R.as_tuple())}}
            ),
            "initial_state": {
                "L": _state_to_json(self.initial_L),
                "R": _state_to_json(self.initial_R),
            },
            "engine": self.engine.value,
            "imperfections": (
                None if self.imperfections is None else dict(zip(AXES, self.imperfections.as_tuple()))
            ),
            "mixture_ratio": self.mixture_ratio,
            "ionization_efficiency": self.ionization_efficiency,
            "level_system": (
                None
                if self.level_system is None
                else {
                    "energies": list(self.level_system.energies),
                    "drive_frequencies": list(self.level_system.drive_frequencies),
                }
            ),
            "sweep": None if self.sweep_axes is None else {k: list(v) for k, v in self.sweep_axes.items()},
        }
        return out


def _state_to_json(state: QuantumState) -> list[list[float]]:
    return [[float(c.real), float(c.imag)] for c in state.amplitudes]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(where, "must be finite")
    return value


def _parse_pulse(raw, idx: int) -> PulseEnvelope:
    where = f"pulses[{idx}]"
    if not isinstance(raw, dict):
        raise ConfigError(where, "expected an object")
    extra = set(raw) - PULSE_KEYS
    if extra:
        raise ConfigError(f"{where}.{sorted(extra)[0]}", "unknown field")
    for key in PULSE_REQUIRED:
        if key not in raw:
            raise ConfigError(f"{where}.{key}", "required field missing")
    try:
        transition = Transition(raw["transition"])
    except ValueError:
        raise ConfigError(f"{where}.transition", f"must be one of T12, T13, T23, got {raw['transition']!r}")
    try:
        shape = Shape(raw["shape"])
    except ValueError:
        raise ConfigError(f"{where}.shape", f"must be gaussian or rectangular, got {raw['shape']!r}")
    values = {k: _number(raw[k], f"{where}.{k}") for k in ("amplitude", "center", "width")}
    phase = _number(raw.get("phase", 0.0), f"{where}.phase")
    if values["amplitude"] < 0:
        raise ConfigError(f"{where}.amplitude", "must be non-negative")
    if values["width"] <= 0:
        raise ConfigError(f"{where}.width", "must be positive")
    return PulseEnvelope(transition, values["amplitude"], values["center"], values["width"], phase, shape)


def _parse_state(raw, where: str) -> QuantumState:
    if raw is None:
        return QuantumState.ground()
    if not isinstance(raw, list) or len(raw) != 3:
        raise ConfigError(where, "expected three amplitudes, each a number or a [re, im] pair")
    amps = []
    for k, c in enumerate(raw):
        if isinstance(c, list):
            if len(c) != 2:
                raise ConfigError(f"{where}[{k}]", "complex amplitude must be [re, im]")
            amps.append(complex(_number(c[0], f"{where}[{k}]"), _number(c[1], f"{where}[{k}]")))
        else:
            amps.append(complex(_number(c, f"{where}[{k}]")))
    try:
        return QuantumState(np.array(amps))
    except ValueError as exc:
        raise ConfigError(where, str(exc))


def _parse_signs(raw) -> tuple[str, ChiralitySignMap, ChiralitySignMap]:
    if raw is None:
        raw = "eq4"
    if isinstance(raw, str):
        if raw not in SIGN_CONVENTIONS:
            raise ConfigError("sign_convention", f"must be eq4, eq17 or {{'custom': ...}}, got {raw!r}")
        return (raw, *SIGN_CONVENTIONS[raw])
    if isinstance(raw, dict) and set(raw) == {"custom"} and isinstance(raw["custom"], dict):
        maps = []
        for side in ("L", "R"):
            signs = raw["custom"].get(side)
            try:
                maps.append(ChiralitySignMap.from_tuple(signs))
            except (TypeError, ValueError):
                raise ConfigError(
                    f"sign_convention.custom.{side}", f"expected three +/-1 values, got {signs!r}"
                )
        return ("custom", *maps)
    raise ConfigError("sign_convention", f"unrecognised value {raw!r}")


def _parse_axis(raw, name: str) -> list[float]:
    where = f"sweep.{name}"
    if isinstance(raw, dict):
        if set(raw) != {"start", "stop", "num"}:
            raise ConfigError(where, "range form needs exactly start, stop, num")
        num = raw["num"]
        if not isinstance(num, int) or isinstance(num, bool) or num < 1:
            raise ConfigError(f"{where}.num", "must be a positive integer")
        values = np.linspace(
            _number(raw["start"], f"{where}.start"), _number(raw["stop"], f"{where}.stop"), num
        )
        values = [float(v) for v in values]
    elif isinstance(raw, list) and raw:
        values = [_number(v, f"{where}[{k}]") for k, v in enumerate(raw)]
    else:
        raise ConfigError(where, "expected a non-empty list or {start, stop, num}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(where, "grid values must be strictly increasing")
    return values


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a decoded JSON document and build the scenario it describes."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    extra = set(data) - TOP_LEVEL_KEYS
    if extra:
        raise ConfigError(sorted(extra)[0], "unknown field")
    for key in REQUIRED_KEYS:
        if key not in data:
            raise ConfigError(key, "required field missing")
    if data["time_unit"] != "tau":
        raise ConfigError("time_unit", f"only 'tau' is supported, got {data['time_unit']!r}")

    window = data["window"]
    if not isinstance(window, dict):
        raise ConfigError("window", "expected an object")
    for key in ("t_start", "t_end", "dt"):
        if key not in window:
            raise ConfigError(f"window.{key}", "required field missing")
    stride = window.get("record_stride", 1)
    if not isinstance(stride, int) or isinstance(stride, bool) or stride < 1:
        raise ConfigError("window.record_stride", "must be a positive integer")
    try:
        method = Method(data.get("method", Method.EXPONENTIAL.value))
    except ValueError:
        raise ConfigError("method", f"must be one of {[m.value for m in Method]}")
    t_start = _number(window["t_start"], "window.t_start")
    t_end = _number(window["t_end"], "window.t_end")
    dt = _number(window["dt"], "window.dt")
    if dt <= 0:
        raise ConfigError("window.dt", "must be positive")
    if t_end <= t_start:
        raise ConfigError("window.t_end", "must exceed t_start")
    try:
        propagation = PropagationConfig(t_start, t_end, dt, method, stride)
    except ValueError as exc:
        raise ConfigError("window", str(exc))

    pulses = data["pulses"]
    if not isinstance(pulses, list):
        raise ConfigError("pulses", "expected a list")
    envelopes = [_parse_pulse(p, k) for k, p in enumerate(pulses)]
    try:
        schedule = PulseSchedule(tuple(envelopes))
    except ValueError as exc:
        raise ConfigError("pulses", str(exc))

    convention, signs_L, signs_R = _parse_signs(data.get("sign_convention"))

    initial = data.get("initial_state") or {}
    if not isinstance(initial, dict) or set(initial) - {"L", "R"}:
        raise ConfigError("initial_state", "expected an object with keys L and R")
    initial_L = _parse_state(initial.get("L"), "initial_state.L")
    initial_R = _parse_state(initial.get("R"), "initial_state.R")

    try:
        engine = Engine(data.get("engine", Engine.FULL_INTEGRATION.value))
    except ValueError:
        raise ConfigError("engine", f"must be one of {[e.value for e in Engine]}")

    imperfections = None
    if data.get("imperfections") is not None:
        raw = data["imperfections"]
        if not isinstance(raw, dict) or set(raw) - set(AXES):
            raise ConfigError("imperfections", f"expected an object with keys {AXES}")
        imperfections = ImperfectionParams(*(_number(raw.get(k, 0.0), f"imperfections.{k}") for k in AXES))

    mixture = _number(data.get("mixture_ratio", 0.5), "mixture_ratio")
    if not 0.0 < mixture < 1.0:
        raise ConfigError("mixture_ratio", "must lie in (0, 1)")
    efficiency = _number(data.get("ionization_efficiency", 1.0), "ionization_efficiency")
    if not 0.0 <= efficiency <= 1.0:
        raise ConfigError("ionization_efficiency", "must lie in [0, 1]")

    levels = None
    if data.get("level_system") is not None:
        raw = data["level_system"]
        try:
            levels = LevelSystem(
                tuple(_number(x, "level_system.energies") for x in raw["energies"]),
                tuple(_number(x, "level_system.drive_frequencies") for x in raw["drive_frequencies"]),
            )
            if len(levels.energies) != 3 or len(levels.drive_frequencies) != 3:
                raise ConfigError("level_system", "needs three energies and three drive frequencies")
            levels.validate_resonant()
        except (KeyError, TypeError):
            raise ConfigError("level_system", "expected {energies: [3], drive_frequencies: [3]}")
        except ResonanceError as exc:
            raise ConfigError("level_system", str(exc))

    sweep_axes = None
    if data.get("sweep") is not None:
        raw = data["sweep"]
        if not isinstance(raw, dict) or not raw:
            raise ConfigError("sweep", "expected a non-empty object of axes")
        extra = set(raw) - set(AXES)
        if extra:
            raise ConfigError(f"sweep.{sorted(extra)[0]}", f"unknown axis; use {AXES}")
        sweep_axes = {k: _parse_axis(raw[k], k) for k in AXES if k in raw}

    for key in ("name", "description"):
        if not isinstance(data.get(key, ""), str):
            raise ConfigError(key, "expected a string")

    return ScenarioConfig(
        propagation=propagation,
        schedule=schedule,
        signs_L=signs_L,
        signs_R=signs_R,
        sign_convention=convention,
        initial_L=initial_L,
        initial_R=initial_R,
        engine=engine,
        imperfections=imperfections,
        mixture_ratio=mixture,
        ionization_efficiency=efficiency,
        level_system=levels,
        sweep_axes=sweep_axes,
        name=data.get("name", ""),
        description=data.get("description", ""),
    )


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}")
    return parse_config(data)


def preset_names() -> list[str]:
    files = resources.files(__package__).joinpath("presets").iterdir()
    return sorted(f.name[: -len(".json")] for f in files if f.name.endswith(".json"))


def preset_text(name: str) -> str:
    if name not in preset_names():
        raise KeyError(name)
    return resources.files(__package__).joinpath("presets", f"{name}.json").read_text()


def load_preset(name: str) -> ScenarioConfig:
    return parse_config(json.loads(preset_text(name)))


def resolve(config: str) -> ScenarioConfig:
    """Load ``config`` as a file path, falling back to a preset name."""
    path = Path(config)
    if path.is_file():
        return load_config(path)
    if config in preset_names():
        return load_preset(config)
    raise ConfigError("<config>", f"{config!r} is neither a file nor a preset ({', '.join(preset_names())})")
