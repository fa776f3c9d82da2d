"""JSON scenario configs.

A scenario names a length profile, a damping factor, initial data and the
numerical knobs.  Parsing is fail-closed: unknown keys are errors, and
every error message carries the offending field path (or the JSON line
and column for syntax errors).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, StringModelError
from .profiles import (
    InitialData,
    LengthProfile,
    custom_initial,
    gaussian_velocity_bump,
    make_custom_profile,
    make_profile,
    sine_mode,
    triangle,
)


@dataclass(frozen=True)
class ProfileSpec:
    kind: str = "constant"
    L: float = 1.0
    v: float = 0.0
    T: float = 3.0
    expr: str | None = None

    def build(self) -> LengthProfile:
        if self.kind == "custom":
            ell, dell = _profile_from_expr(self.expr)
            return make_custom_profile(ell, dell, self.T, label=f"custom l(t)={self.expr}")
        return make_profile(self.kind, self.L, self.v, self.T)


@dataclass(frozen=True)
class InitialSpec:
    preset: str = "gaussian_velocity_bump"
    k: int = 0
    peak: float | None = None
    center: float | None = None
    width: float | None = None
    amplitude: float = 1.0
    u0: str | None = None
    u1: str | None = None

    def build(self, L: float) -> InitialData:
        if self.preset == "sine_mode":
            return sine_mode(L, self.k, self.amplitude)
        if self.preset == "triangle":
            return triangle(L, 0.5 * L if self.peak is None else self.peak, self.amplitude)
        if self.preset == "gaussian_velocity_bump":
            return gaussian_velocity_bump(L, self.center, self.width, self.amplitude)
        u0, u0x = _expr_with_derivative(self.u0 or "0", "x")
        u1, _ = _expr_with_derivative(self.u1 or "0", "x")
        return custom_initial(L, u0, u0x, u1)

    @property
    def smooth(self) -> bool:
        return self.preset != "triangle"


@dataclass(frozen=True)
class OutputSpec:
    modes_csv: bool = False
    fprime_csv: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    eta: float = 0.0
    initial: InitialSpec = field(default_factory=InitialSpec)
    modes: int = 256
    grid_h: float | None = None
    time_samples: tuple = (0.0, None, 64)
    quad_tol: float = 1e-10
    outputs: OutputSpec = field(default_factory=OutputSpec)

    def times(self) -> np.ndarray:
        ts = self.time_samples
        if isinstance(ts, tuple) and len(ts) == 3 and not isinstance(ts[2], float):
            start, stop, count = ts
            stop = self.profile.T if stop is None else stop
            return np.linspace(start, stop, count)
        return np.asarray(ts, dtype=float)


_FIELD_TYPES = {
    "profile": {"kind": str, "L": float, "v": float, "T": float, "expr": str},
    "initial": {"preset": str, "k": int, "peak": float, "center": float, "width": float,
                "amplitude": float, "u0": str, "u1": str},
    "outputs": {"modes_csv": bool, "fprime_csv": bool},
    None: {"name": str, "profile": dict, "eta": float, "initial": dict, "modes": int,
           "grid_h": float, "time_samples": object, "quad_tol": float, "outputs": dict},
}
_KINDS = ("constant", "linear", "custom")
_PRESETS = ("sine_mode", "triangle", "gaussian_velocity_bump", "custom")


def _typed(path: str, value, typ):
    if typ is object:
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, typ):
        raise ConfigError(f"{path}: expected {typ.__name__}, got {value!r}")
    return value


def _section(raw, section: str | None, path: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path or '<root>'}: expected an object")
    allowed = _FIELD_TYPES[section]
    out = {}
    for key, value in raw.items():
        sub = f"{path}.{key}" if path else key
        if key not in allowed:
            raise ConfigError(f"{sub}: unknown key (allowed: {', '.join(sorted(allowed))})")
        out[key] = _typed(sub, value, allowed[key])
    return out


def _time_samples(raw, path: str):
    if isinstance(raw, list):
        vals = tuple(_typed(f"{path}[{i}]", v, float) for i, v in enumerate(raw))
        return vals
    if isinstance(raw, dict):
        extra = set(raw) - {"start", "stop", "count"}
        if extra:
            raise ConfigError(f"{path}.{sorted(extra)[0]}: unknown key (allowed: count, start, stop)")
        start = _typed(f"{path}.start", raw.get("start", 0.0), float)
        stop = _typed(f"{path}.stop", raw["stop"], float) if "stop" in raw else None
        count = _typed(f"{path}.count", raw.get("count", 64), int)
        if count < 1:
            raise ConfigError(f"{path}.count: must be >= 1")
        return (start, stop, count)
    raise ConfigError(f"{path}: expected a list of times or {{start, stop, count}}")


def scenario_from_dict(raw: dict, path: str = "") -> Scenario:
    top = _section(raw, None, path)
    p = lambda k: f"{path}.{k}" if path else k  # noqa: E731
    prof = ProfileSpec(**_section(top.pop("profile", {}), "profile", p("profile")))
    init = InitialSpec(**_section(top.pop("initial", {}), "initial", p("initial")))
    outs = OutputSpec(**_section(top.pop("outputs", {}), "outputs", p("outputs")))
    if "time_samples" in top:
        top["time_samples"] = _time_samples(top["time_samples"], p("time_samples"))
    sc = Scenario(profile=prof, initial=init, outputs=outs, **top)
    _validate(sc, path)
    return sc


def _validate(sc: Scenario, path: str) -> None:
    p = lambda k: f"{path}.{k}" if path else k  # noqa: E731
    if sc.profile.kind not in _KINDS:
        raise ConfigError(f"{p('profile.kind')}: must be one of {_KINDS}")
    if sc.profile.kind == "custom" and not sc.profile.expr:
        raise ConfigError(f"{p('profile.expr')}: required for custom profiles")
    if sc.initial.preset not in _PRESETS:
        raise ConfigError(f"{p('initial.preset')}: must be one of {_PRESETS}")
    if sc.eta < 0:
        raise ConfigError(f"{p('eta')}: must be >= 0")
    if sc.modes < 8:
        raise ConfigError(f"{p('modes')}: must be >= 8")
    if sc.grid_h is not None and sc.grid_h <= 0:
        raise ConfigError(f"{p('grid_h')}: must be positive")
    if sc.quad_tol <= 0:
        raise ConfigError(f"{p('quad_tol')}: must be positive")
    ts = sc.times()
    if ts.size == 0 or np.any(ts < 0) or np.any(ts > sc.profile.T * (1 + 1e-12)):
        raise ConfigError(f"{p('time_samples')}: every sample must lie in [0, T={sc.profile.T}]")
    try:
        prof = sc.profile.build()
        sc.initial.build(prof.L)
    except ConfigError:
        raise
    except (StringModelError, ValueError, TypeError) as exc:
        raise ConfigError(f"{path or '<root>'}: {exc}") from exc


def _loads(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    return scenario_from_dict(_loads(text, str(path)))


def load_bundle(path) -> list[Scenario]:
    """A bundle is {"scenarios": [...]} or a bare list of scenario objects."""
    path = Path(path)
    try:
        raw = _loads(path.read_text(), str(path))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    return bundle_from_obj(raw)


def bundle_from_obj(raw) -> list[Scenario]:
    if isinstance(raw, dict):
        extra = set(raw) - {"scenarios"}
        if extra:
            raise ConfigError(f"{sorted(extra)[0]}: unknown key (allowed: scenarios)")
        raw = raw.get("scenarios", [])
    if not isinstance(raw, list):
        raise ConfigError("<root>: expected a list of scenarios")
    return [scenario_from_dict(item, f"scenarios[{i}]") for i, item in enumerate(raw)]


# -- expression helpers -------------------------------------------------------

def _expr_with_derivative(expr: str, var: str):
    import sympy

    sym = sympy.Symbol(var, real=True)
    try:
        e = sympy.sympify(expr, locals={var: sym})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"cannot parse expression {expr!r}: {exc}") from exc
    if e.free_symbols - {sym}:
        raise ConfigError(f"expression {expr!r} may only use the variable {var}")
    return _vectorised(sympy.lambdify(sym, e, "numpy")), \
        _vectorised(sympy.lambdify(sym, sympy.diff(e, sym), "numpy"))


def _vectorised(fn):
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape).copy()
    return wrapped


def _profile_from_expr(expr: str):
    return _expr_with_derivative(expr, "t")
