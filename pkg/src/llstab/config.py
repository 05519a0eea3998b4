"""Plain-text ``section.key = value`` run configuration.

One assignment per line; ``#`` starts a comment; vectors are comma
separated and node lists separate triples with ``;``.  Every key has a
default, so an empty file is a valid configuration.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .dynamics import EquilibriumPoint, SimParams
from .experiments import HysteresisSetup, perturbed_initial
from .grid_field import SPHERE_TOL, GridSpec, MagnetizationField
from .integrator import SCHEMES, IntegratorConfig

EXPERIMENTS = ("stabilize", "hysteresis", "verify", "sweep")
PRESETS = ("perturbed", "equilibrium", "constant", "nodes")
F_RULES = ("f_equals_k", "constant")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = f"line {line}: " if line else ""
        what = f"{key}: " if key else ""
        super().__init__(f"{where}{what}{message}")
        self.key = key
        self.line = line


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"{s!r} is not finite")
    return v


def _int(s: str) -> int:
    return int(s)


def _bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _vec(s: str) -> tuple[float, float, float]:
    parts = [p for p in s.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise ValueError(f"expected 3 comma-separated numbers, got {s!r}")
    return tuple(_float(p) for p in parts)


def _floats(s: str) -> tuple[float, ...]:
    return tuple(_float(p) for p in s.replace(" ", "").split(",") if p)


def _nodes(s: str) -> tuple[tuple[float, float, float], ...]:
    return tuple(_vec(chunk) for chunk in s.split(";") if chunk.strip())


def _dt(s: str) -> float | None:
    return None if s.strip().lower() == "auto" else _float(s)


def _choice(options: tuple[str, ...]) -> Callable[[str], str]:
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"{s!r} is not one of {', '.join(options)}")
        return s

    return parse


def _fmt(v: Any) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return "; ".join(_fmt(t) for t in v)
        return ", ".join(repr(float(x)) for x in v)
    return str(v)


# config key -> (RunConfig attribute, parser, help)
KEYS: dict[str, tuple[str, Callable[[str], Any], str]] = {
    "grid.N": ("N", _int, "number of grid cells"),
    "grid.L": ("L", _float, "wire length"),
    "physics.nu": ("nu", _float, "damping parameter"),
    "control.k": ("k", _float, "feedback gain"),
    "control.f_rule": ("f_rule", _choice(F_RULES), "gain function: f_equals_k or constant"),
    "control.f_value": ("f_value", _float, "f(k) when f_rule = constant"),
    "control.r": ("r", _vec, "target equilibrium (unit vector)"),
    "initial.preset": ("initial_preset", _choice(PRESETS), "perturbed | equilibrium | constant | nodes"),
    "initial.amplitude": ("initial_amplitude", _float, "cosine bump size for the perturbed preset"),
    "initial.value": ("initial_value", _vec, "vector for the constant preset"),
    "initial.nodes": ("initial_nodes", _nodes, "N+1 triples 'a,b,c; ...' for the nodes preset"),
    "integrator.dt": ("dt", _dt, "time step or 'auto'"),
    "integrator.scheme": ("scheme", _choice(tuple(SCHEMES)), "rk4_projected | euler_projected"),
    "integrator.cfl_safety": ("cfl_safety", _float, "fraction of the stable step used by 'auto'"),
    "experiment.kind": ("experiment", _choice(EXPERIMENTS), "stabilize | hysteresis | verify | sweep"),
    "stabilize.t_end": ("t_end", _float, "final time"),
    "stabilize.tol_conv": ("tol_conv", _float, "L2 convergence tolerance"),
    "stabilize.sample_every": ("sample_every", _float, "time between recorded samples"),
    "hysteresis.amplitude": ("amplitude", _float, "input amplitude"),
    "hysteresis.omegas": ("omegas", _floats, "comma-separated angular frequencies"),
    "hysteresis.component": ("component", _int, "driven/observed component (1..3)"),
    "hysteresis.xstar": ("xstar", _float, "observation point"),
    "hysteresis.periods": ("periods", _int, "number of input periods (>= 3)"),
    "hysteresis.samples_per_period": ("samples_per_period", _int, "samples per period"),
    "hysteresis.project": ("project", _bool, "renormalise after each step during input runs"),
}


@dataclass(frozen=True)
class RunConfig:
    N: int = 64
    L: float = 1.0
    nu: float = 0.02
    k: float = 0.25
    f_rule: str = "f_equals_k"
    f_value: float = 0.25
    r: tuple[float, float, float] = (1.0, 0.0, 0.0)
    initial_preset: str = "perturbed"
    initial_amplitude: float = 0.1
    initial_value: tuple[float, float, float] = (1.0, 0.0, 0.0)
    initial_nodes: tuple[tuple[float, float, float], ...] = ()
    dt: float | None = None
    scheme: str = "rk4_projected"
    cfl_safety: float = 0.5
    experiment: str = "stabilize"
    t_end: float = 200.0
    tol_conv: float = 1e-3
    sample_every: float = 0.5
    amplitude: float = 0.01
    omegas: tuple[float, ...] = (1.0, 0.1, 0.01)
    component: int = 1
    xstar: float = 1.0
    periods: int = 3
    samples_per_period: int = 512
    project: bool = False
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def f_of_k(self) -> float:
        return self.k if self.f_rule == "f_equals_k" else self.f_value

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.N, self.L)

    def sim_params(self) -> SimParams:
        return SimParams(nu=self.nu, k=self.k, f_of_k=self.f_of_k, grid=self.grid)

    def equilibrium(self) -> EquilibriumPoint:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return EquilibriumPoint(np.array(self.r))

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, scheme=self.scheme, cfl_safety=self.cfl_safety)

    def initial_field(self) -> MagnetizationField:
        grid, r = self.grid, self.equilibrium()
        if self.initial_preset == "perturbed":
            return perturbed_initial(r, grid, self.initial_amplitude)
        if self.initial_preset == "equilibrium":
            return r.field(grid)
        if self.initial_preset == "constant":
            return MagnetizationField.constant(self.initial_value, grid)
        return MagnetizationField(np.array(self.initial_nodes), grid, on_sphere=True)

    def hysteresis_setup(self) -> HysteresisSetup:
        return HysteresisSetup(
            params=self.sim_params(),
            r=self.equilibrium(),
            m0=self.initial_field(),
            amplitude=self.amplitude,
            component=self.component,
            periods=self.periods,
            xstar=self.xstar,
            samples_per_period=self.samples_per_period,
            cfg=IntegratorConfig(
                dt=self.dt, scheme=self.scheme, cfl_safety=self.cfl_safety, project=self.project
            ),
        )


_ATTR_TO_KEY = {attr: key for key, (attr, _, _) in KEYS.items()}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration; errors name the key and line."""
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in KEYS:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=lineno)
        attr, parse, _ = KEYS[key]
        try:
            values[attr] = parse(val)
        except ValueError as exc:
            raise ConfigError(str(exc), key=key, line=lineno) from None
        lines[key] = lineno
    return _validate(RunConfig(**values), lines)


def _validate(cfg: RunConfig, lines: dict[str, int]) -> RunConfig:
    def fail(attr: str, msg: str):
        key = _ATTR_TO_KEY[attr]
        raise ConfigError(msg, key=key, line=lines.get(key))

    if cfg.N < 2:
        fail("N", f"need N >= 2, got {cfg.N}")
    if not cfg.L > 0:
        fail("L", f"need L > 0, got {cfg.L}")
    if cfg.nu < 0:
        fail("nu", f"need nu >= 0, got {cfg.nu}")
    if not cfg.k > 0:
        fail("k", f"need k > 0, got {cfg.k}")
    f = cfg.f_of_k
    if not (f > 0 and abs(f + cfg.k) <= 1.0):
        attr = "k" if cfg.f_rule == "f_equals_k" else "f_value"
        fail(attr, f"inadmissible gain: need f(k) > 0 and |f(k) + k| <= 1, got f(k)={f}, k={cfg.k}")
    norm = math.sqrt(sum(c * c for c in cfg.r))
    if abs(norm - 1.0) > SPHERE_TOL:
        fail("r", f"r must be a unit vector, |r| = {norm!r}")
    notes = []
    if cfg.r[0] == 0.0:
        notes.append("control.r has r1 = 0; the collinearity argument assumes r1 != 0")
    if cfg.initial_preset == "constant":
        n = math.sqrt(sum(c * c for c in cfg.initial_value))
        if abs(n - 1.0) > SPHERE_TOL:
            fail("initial_value", f"initial value must be a unit vector, |v| = {n!r}")
    if cfg.initial_preset == "nodes":
        if len(cfg.initial_nodes) != cfg.N + 1:
            fail("initial_nodes", f"need {cfg.N + 1} node triples, got {len(cfg.initial_nodes)}")
        dev = max(abs(math.sqrt(sum(c * c for c in v)) - 1.0) for v in cfg.initial_nodes)
        if dev > SPHERE_TOL:
            fail("initial_nodes", f"node vectors must be unit, max |norm - 1| = {dev:.3e}")
    if cfg.dt is not None and not cfg.dt > 0:
        fail("dt", "dt must be positive or 'auto'")
    if not 0 < cfg.cfl_safety <= 1:
        fail("cfl_safety", "cfl_safety must lie in (0, 1]")
    if cfg.dt is None and cfg.scheme == "euler_projected" and cfg.nu == 0:
        fail("dt", "euler_projected has no stable step at nu = 0; give dt explicitly")
    if not cfg.t_end > 0:
        fail("t_end", "t_end must be positive")
    if not cfg.tol_conv > 0:
        fail("tol_conv", "tol_conv must be positive")
    if not cfg.sample_every > 0:
        fail("sample_every", "sample_every must be positive")
    if not cfg.omegas or any(not w > 0 for w in cfg.omegas):
        fail("omegas", "need one or more positive frequencies")
    if cfg.component not in (1, 2, 3):
        fail("component", "component must be 1, 2 or 3")
    if not 0 <= cfg.xstar <= cfg.L:
        fail("xstar", f"xstar must lie in [0, {cfg.L}]")
    if cfg.periods < 3:
        fail("periods", "need at least 3 periods")
    if cfg.samples_per_period < 8:
        fail("samples_per_period", "need at least 8 samples per period")
    if notes:
        for note in notes:
            warnings.warn(note, stacklevel=3)
        cfg = replace(cfg, warnings=tuple(notes))
    return cfg


def override(cfg: RunConfig, key: str, text: str, source: str = "override") -> RunConfig:
    """Replace one key from its text form and re-validate."""
    if key not in KEYS:
        raise ConfigError("unknown key", key=key)
    attr, parse, _ = KEYS[key]
    try:
        value = parse(text)
    except ValueError as exc:
        raise ConfigError(f"{exc} ({source})", key=key) from None
    return _validate(replace(cfg, **{attr: value}), {})


def serialize_config(cfg: RunConfig) -> str:
    out = []
    for key, (attr, _, _) in KEYS.items():
        out.append(f"{key} = {_fmt(getattr(cfg, attr))}")
    return "\n".join(out) + "\n"


def describe_keys() -> str:
    default = RunConfig()
    width = max(map(len, KEYS))
    rows = []
    for key, (attr, _, help_) in KEYS.items():
        rows.append(f"  {key:<{width}}  {help_} [default: {_fmt(getattr(default, attr)) or '(none)'}]")
    return "\n".join(rows)
