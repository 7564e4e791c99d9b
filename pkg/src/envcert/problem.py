"""Problem files, configuration and the problem content hash."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path

from . import exact
from .interval import Interval
from .poly import DEFAULT_DEGREE_CAP, Polynomial, VarSpace, parse_polynomial
from .taylor import OdeSystem
from .zono import Zonotope


class ProblemError(ValueError):
    pass


# dotted key -> (attribute, parser)
_CONFIG_KEYS = {
    "picard.order": ("picard_order", int),
    "picard.truncate": ("truncate_degree", lambda v: None if v in (None, "none", "None", "") else int(v)),
    "poly.degree_cap": ("degree_cap", int),
    "reach.abstraction_domain": ("abstraction_domain", str),
    "reach.time_normalization": ("time_normalization", str),
    "taylor.disturbance": ("disturbance_mode", str),
    "taylor.slopes": ("slopes", lambda v: None if v in (None, "none", "") else
                      [exact.fmt(exact.q(x)) for x in (v.split(",") if isinstance(v, str) else v)]),
    "taylor.slope_start": ("slope_start", lambda v: exact.fmt(exact.q(v))),
    "taylor.max_doublings": ("max_doublings", int),
    "interval.subdivide": ("subdivide", int),
    "rational.mode": ("rational_mode", str),
    "rational.max_denominator": ("max_denominator", int),
    "lp.tol": ("lp_tol", float),
    "lp.max_iter": ("lp_max_iter", int),
    "contain.inflate_outer": ("inflate_outer", lambda v: exact.fmt(exact.q(v))),
    "input.decimal_mode": ("decimal_mode", str),
}

# keys that change what the exact checks compute, and therefore the hash
_SEMANTIC = ("picard_order", "truncate_degree", "degree_cap", "abstraction_domain", "time_normalization",
             "disturbance_mode", "subdivide", "inflate_outer")

_CHOICES = {
    "abstraction_domain": ("paper", "tight"),
    "time_normalization": ("tight", "paper"),
    "disturbance_mode": ("nominal", "robust"),
    "rational_mode": ("cfrac", "dyadic"),
    "decimal_mode": ("dyadic", "cfrac"),
}


@dataclass(frozen=True)
class Config:
    picard_order: int = 2
    truncate_degree: int | None = None
    degree_cap: int = DEFAULT_DEGREE_CAP
    abstraction_domain: str = "paper"
    time_normalization: str = "tight"
    disturbance_mode: str = "nominal"
    slopes: list | None = None
    slope_start: str = "1/1000000"
    max_doublings: int = 80
    subdivide: int = 0
    rational_mode: str = "cfrac"
    max_denominator: int = exact.DEFAULT_MAX_DENOMINATOR
    lp_tol: float = 1e-9
    lp_max_iter: int = 10_000
    inflate_outer: str = "0"
    decimal_mode: str = "dyadic"

    def __post_init__(self):
        for attr, allowed in _CHOICES.items():
            if getattr(self, attr) not in allowed:
                raise ProblemError(f"config {attr} must be one of {allowed}, got {getattr(self, attr)!r}")
        if self.picard_order < 0:
            raise ProblemError("picard order must be non-negative")
        if exact.q(self.inflate_outer) < 0:
            raise ProblemError("inflate_outer must be non-negative")

    def with_overrides(self, overrides: dict) -> "Config":
        changes = {}
        for key, value in overrides.items():
            if key not in _CONFIG_KEYS:
                raise ProblemError(f"unknown config key {key!r}; known: {sorted(_CONFIG_KEYS)}")
            attr, parse = _CONFIG_KEYS[key]
            try:
                changes[attr] = parse(value)
            except (TypeError, ValueError) as exc:
                raise ProblemError(f"bad value for {key}: {value!r}") from exc
        return replace(self, **changes)

    def semantic(self) -> dict:
        return {k: getattr(self, k) for k in _SEMANTIC}

    def to_json(self) -> dict:
        inverse = {attr: key for key, (attr, _) in _CONFIG_KEYS.items()}
        return {inverse[f.name]: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class ProblemSpec:
    sys: OdeSystem
    envelope: Zonotope
    X0: Zonotope
    X_safe: tuple
    U_adm: tuple
    config: Config = field(default_factory=Config)
    n_x: int = 0
    n_u: int = 0
    name: str = ""

    @property
    def x_rows(self) -> list:
        return list(range(self.n_x))

    @property
    def u_rows(self) -> list:
        return list(range(self.n_x, self.n_x + self.n_u))

    def effective_system(self) -> OdeSystem:
        return self.sys if self.config.disturbance_mode == "robust" else self.sys.nominal()

    def with_config(self, config: Config) -> "ProblemSpec":
        return replace(self, config=config)

    def canonical(self) -> dict:
        return {
            "dynamics": [str(fi) for fi in self.sys.f[: self.n_x]],
            "states": list(self.sys.states),
            "disturbances": list(self.sys.disturbances),
            "disturbance": exact.dump_vector(self.sys.W),
            "dt": exact.fmt(self.sys.dt),
            "state_box": [iv.to_json() for iv in self.X_safe],
            "input_box": [iv.to_json() for iv in self.U_adm],
            "envelope": self.envelope.to_json(),
            "X0": self.X0.to_json(),
            "config": self.config.semantic(),
        }

    def content_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _num(v, mode: str, max_den: int) -> Fraction:
    if isinstance(v, float):
        return exact.rationalize(v, max_den, "dyadic" if mode == "dyadic" else "cfrac")
    try:
        return exact.q(v)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ProblemError(f"not a rational number: {v!r}") from exc


def _box(data, n, what, mode, max_den) -> tuple:
    if not isinstance(data, list) or len(data) != n:
        raise ProblemError(f"{what} must list {n} [lo, hi] pairs")
    out = []
    for pair in data:
        if isinstance(pair, dict):
            pair = [pair["lo"], pair["hi"]]
        lo, hi = (_num(x, mode, max_den) for x in pair)
        if lo > hi:
            raise ProblemError(f"{what}: empty interval [{lo}, {hi}]")
        out.append(Interval(lo, hi))
    return tuple(out)


def _zono(data, n, roles, what, mode, max_den) -> Zonotope:
    try:
        c = tuple(_num(x, mode, max_den) for x in data["c"])
        G = tuple(tuple(_num(x, mode, max_den) for x in row) for row in data["G"])
    except (KeyError, TypeError) as exc:
        raise ProblemError(f"{what} needs 'c' and 'G'") from exc
    if len(c) != n or len(G) != n:
        raise ProblemError(f"{what} must have dimension {n}")
    try:
        return Zonotope(c, G, roles)
    except ValueError as exc:
        raise ProblemError(f"{what}: {exc}") from exc


def parse_problem(data: dict, overrides: dict | None = None) -> ProblemSpec:
    if not isinstance(data, dict):
        raise ProblemError("problem file must be a JSON object")
    try:
        config = Config().with_overrides(data.get("config") or {})
        if overrides:
            config = config.with_overrides(overrides)
    except TypeError as exc:
        raise ProblemError(f"bad config: {exc}") from exc
    mode, max_den = config.decimal_mode, config.max_denominator
    dyn = data.get("dynamics")
    if not isinstance(dyn, list) or not dyn:
        raise ProblemError("'dynamics' must be a non-empty list of polynomial strings")
    n_x = len(dyn)
    input_box = data.get("input_box") or []
    n_u = len(input_box)
    dist = data.get("disturbance") or []
    states = tuple(f"x{i + 1}" for i in range(n_x)) + tuple(f"u{i + 1}" for i in range(n_u))
    ws = tuple(f"w{i + 1}" for i in range(len(dist)))
    space = VarSpace.build(None, disturbances=ws, states=states)
    try:
        f = [parse_polynomial(str(s), space, config.degree_cap) for s in dyn]
    except ValueError as exc:
        raise ProblemError(f"dynamics: {exc}") from exc
    f += [Polynomial.zero(space)] * n_u
    W = tuple(_num(x, mode, max_den) for x in dist)
    if any(w < 0 for w in W):
        raise ProblemError("disturbance bounds must be non-negative")
    if "dt" not in data:
        raise ProblemError("missing 'dt'")
    dt = _num(data["dt"], mode, max_den)
    if dt <= 0:
        raise ProblemError("dt must be positive")
    sys = OdeSystem(states, tuple(f), dt, ws, W)
    roles = ("x",) * n_x + ("u",) * n_u
    if "envelope" not in data or "X0" not in data:
        raise ProblemError("problem needs 'envelope' and 'X0'")
    E = _zono(data["envelope"], n_x + n_u, roles, "envelope", mode, max_den)
    X0 = _zono(data["X0"], n_x, ("x",) * n_x, "X0", mode, max_den)
    X_safe = _box(data.get("state_box"), n_x, "state_box", mode, max_den)
    U_adm = _box(input_box, n_u, "input_box", mode, max_den)
    return ProblemSpec(sys, E, X0, X_safe, U_adm, config, n_x, n_u, str(data.get("name", "")))


def load_problem(path, overrides: dict | None = None) -> ProblemSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: invalid JSON ({exc})") from exc
    return parse_problem(data, overrides)
