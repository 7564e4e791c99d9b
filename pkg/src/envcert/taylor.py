"""Picard iteration, Taylor models and their exact validity checks.

A Taylor model (p, I) over parameters lam in [-1, 1]^p claims that every
trajectory starting at h(lam) stays within p(t, lam) + I(t) for t in [0, dt].
Two exact checks establish that claim: the model starts on the initial set,
and the remainder's slope strictly dominates the defect f(p + e) + w - dp/dt.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from . import exact
from .interval import AffineIntervalFn, Interval, affine_hull, iv_eval_poly
from .poly import DEFAULT_DEGREE_CAP, Polynomial, VarSpace, integrate_time, time_derivative
from .results import FAIL, PASS, CheckResult
from .zono import Zonotope

DEFAULT_SLOPE_START = Fraction(1, 10**6)
DEFAULT_MAX_DOUBLINGS = 80


class DomainMismatch(ValueError):
    pass


class NoValidRemainder(RuntimeError):
    pass


@dataclass(frozen=True)
class OdeSystem:
    """x' = f(x, w) over the extended state (held inputs have zero derivative).

    ``f`` is a tuple of polynomials over a time-free VarSpace whose "state"
    variables are ``states`` and whose "disturbance" variables are
    ``disturbances``; ``W`` bounds |w_j| <= W_j.
    """

    states: tuple
    f: tuple
    dt: Fraction
    disturbances: tuple = ()
    W: tuple = ()

    def __post_init__(self):
        if len(self.f) != len(self.states):
            raise ValueError("one right-hand side per state is required")
        object.__setattr__(self, "dt", exact.q(self.dt))
        if self.dt <= 0:
            raise ValueError("sampling period must be positive")
        W = tuple(exact.q(w) for w in self.W) if self.W else tuple(Fraction(0) for _ in self.disturbances)
        if len(W) != len(self.disturbances):
            raise ValueError("one bound per disturbance variable is required")
        if any(w < 0 for w in W):
            raise ValueError("disturbance bounds must be non-negative")
        object.__setattr__(self, "W", W)

    @property
    def dim(self) -> int:
        return len(self.states)

    def nominal(self) -> "OdeSystem":
        return replace(self, W=tuple(Fraction(0) for _ in self.W))


def param_names(p: int) -> tuple:
    return tuple(f"l{i + 1}" for i in range(p))


def tm_space(p: int) -> VarSpace:
    return VarSpace.build("t", params=param_names(p))


@dataclass
class TaylorModel:
    p: tuple
    I: tuple
    dt: Fraction
    init: Zonotope
    initial_ok: bool = False
    derivative_ok: bool = False
    margins: dict = field(default_factory=dict)

    @property
    def space(self) -> VarSpace:
        return self.p[0].space

    @property
    def params(self) -> tuple:
        return self.space.of_role("param")

    @property
    def valid(self) -> bool:
        return self.initial_ok and self.derivative_ok

    def slopes(self) -> list:
        return [fn.b for fn in self.I]

    def to_json(self):
        return {
            "space": self.space.to_json(),
            "p": [pi.to_json() for pi in self.p],
            "I": [fn.to_json() for fn in self.I],
            "dt": exact.fmt(self.dt),
            "init": self.init.to_json(),
        }

    @classmethod
    def from_json(cls, data, cap: int = DEFAULT_DEGREE_CAP) -> "TaylorModel":
        space = VarSpace.from_json(data["space"])
        return cls(
            p=tuple(Polynomial.from_json(space, d, cap) for d in data["p"]),
            I=tuple(AffineIntervalFn.from_json(d) for d in data["I"]),
            dt=exact.q(data["dt"]),
            init=Zonotope.from_json(data["init"]),
        )


def initial_polys(init: Zonotope, space: VarSpace | None = None) -> tuple:
    """h(lam) = c + G lam as polynomials over (t, lam)."""
    space = space or tm_space(init.order)
    lam = [Polynomial.var(space, n) for n in space.of_role("param")]
    if len(lam) != init.order:
        raise DomainMismatch("parameter count differs from generator count")
    out = []
    for ci, row in zip(init.c, init.G):
        h = Polynomial.const(space, ci)
        for g, l in zip(row, lam):
            if g:
                h = h + l * g
        out.append(h)
    return tuple(out)


def picard_iterate(sys: OdeSystem, h: Sequence[Polynomial], k: int, truncate: int | None = None,
                   cap: int = DEFAULT_DEGREE_CAP) -> tuple:
    """k-th Picard iterate p_{j+1} = h + int_0^t f(p_j) ds with disturbances set to 0.

    ``truncate`` drops terms of total degree above the given value after
    every step (the remainder check accounts for whatever is dropped).
    """
    if len(h) != sys.dim:
        raise DomainMismatch("initial map dimension differs from system dimension")
    space = h[0].space
    t = space.time
    if t is None or any(t in hi.variables() for hi in h):
        raise DomainMismatch("initial map must live over (t, lam) and not depend on t")
    h = tuple(Polynomial(space, hi.terms, cap) for hi in h)
    p = h
    for _ in range(k):
        bindings = dict(zip(sys.states, p))
        bindings.update({w: 0 for w in sys.disturbances})
        nxt = []
        for hi, fi in zip(h, sys.f):
            integrand = fi.substitute(bindings, space)
            if truncate is not None:
                # integration raises the degree by one
                integrand = integrand.truncate(truncate - 1)
            nxt.append((hi + integrate_time(integrand)).truncate(truncate) if truncate is not None
                       else hi + integrate_time(integrand))
        p = tuple(nxt)
    return p


def defect_polynomials(p: Sequence[Polynomial], sys: OdeSystem) -> tuple:
    """d_i(t, lam, e, w) = f_i(p + e, w) - dp_i/dt over (t, lam, e1.., w..)."""
    if len(p) != sys.dim:
        raise DomainMismatch(f"Taylor model has {len(p)} dimensions, system has {sys.dim}")
    base = p[0].space
    lam = base.of_role("param")
    es = tuple(f"e{i + 1}" for i in range(sys.dim))
    clash = set(sys.disturbances) & set(lam + es + (base.time,))
    if clash:
        raise DomainMismatch(f"disturbance names clash with internal names: {sorted(clash)}")
    space = VarSpace.build(base.time, params=lam, remainders=es, disturbances=sys.disturbances)
    cap = max(pi.cap for pi in p)
    bindings = {}
    for name, pi, e in zip(sys.states, p, es):
        if pi.space != base:
            raise DomainMismatch("Taylor model components use different variable spaces")
        bindings[name] = pi.embed(space) + Polynomial.var(space, e)
    for w in sys.disturbances:
        bindings[w] = Polynomial.var(space, w)
    out = []
    for pi, fi in zip(p, sys.f):
        fi = Polynomial(fi.space, fi.terms, cap)
        out.append(fi.substitute(bindings, space) - time_derivative(pi).embed(space))
    return tuple(out)


def _defect_domain(defects, I, sys: OdeSystem) -> dict:
    space = defects[0].space
    dom = {space.time: Interval(0, sys.dt)}
    for n in space.of_role("param"):
        dom[n] = Interval(-1, 1)
    for e, fn in zip(space.of_role("remainder"), I):
        dom[e] = affine_hull(fn, Interval(0, sys.dt))
    for w, W in zip(sys.disturbances, sys.W):
        dom[w] = Interval(-W, W)
    return dom


def _derivative_check(defects, I, sys, subdivide=0) -> CheckResult:
    dom = _defect_domain(defects, I, sys)
    ranges, ok = [], []
    for d, fn in zip(defects, I):
        D = iv_eval_poly(d, dom, subdivide)
        ranges.append(D)
        ok.append(fn.b.lo < D.lo and D.hi < fn.b.hi)
    data = {"defect": ranges, "per_dim": ok}
    if all(ok):
        return CheckResult(PASS, "remainder slopes strictly enclose the defect", data)
    bad = [i + 1 for i, v in enumerate(ok) if not v]
    return CheckResult(FAIL, f"defect not strictly enclosed in dimension(s) {bad}", data)


def check_derivative_premise(tm: TaylorModel, sys: OdeSystem, subdivide: int = 0) -> CheckResult:
    if len(tm.I) != len(tm.p):
        raise DomainMismatch("one remainder function per dimension is required")
    if tm.dt != sys.dt:
        raise DomainMismatch(f"Taylor model dt {tm.dt} differs from system dt {sys.dt}")
    defects = defect_polynomials(tm.p, sys)
    return _derivative_check(defects, tm.I, sys, subdivide)


def check_initial_premise(tm: TaylorModel, X0: Zonotope) -> CheckResult:
    """p(0, lam) must equal c + G lam identically and 0 must lie in I(0)."""
    space = tm.space
    try:
        h = initial_polys(X0, space)
    except DomainMismatch as exc:
        return CheckResult(FAIL, str(exc))
    if len(h) != len(tm.p):
        return CheckResult(FAIL, "dimension mismatch between Taylor model and initial set")
    bad = []
    for i, (pi, hi) in enumerate(zip(tm.p, h)):
        if not (pi.substitute({space.time: 0}) - hi).is_zero():
            bad.append(f"p{i + 1}(0, lam) differs from the initial map")
        if 0 not in tm.I[i].at(0):
            bad.append(f"0 not in I{i + 1}(0)")
    if bad:
        return CheckResult(FAIL, "; ".join(bad))
    return CheckResult(PASS, "Taylor model starts on the initial set")


def validate(tm: TaylorModel, sys: OdeSystem, subdivide: int = 0) -> TaylorModel:
    """Run both premises and set the validity flags on a copy of ``tm``."""
    init_res = check_initial_premise(tm, tm.init)
    der_res = check_derivative_premise(tm, sys, subdivide)
    return replace(tm, initial_ok=init_res.passed, derivative_ok=der_res.passed,
                   margins={"defect": der_res.data.get("defect")})


def synthesize_remainder(sys: OdeSystem, p: Sequence[Polynomial], init: Zonotope,
                         start: Fraction = DEFAULT_SLOPE_START, max_doublings: int = DEFAULT_MAX_DOUBLINGS,
                         subdivide: int = 0) -> TaylorModel:
    """Search symmetric slopes I_i(t) = [-s_i t, s_i t] by doubling failing components."""
    p = tuple(p)
    defects = defect_polynomials(p, sys)
    s = [exact.q(start)] * len(p)
    for _ in range(max_doublings + 1):
        I = tuple(AffineIntervalFn.slope(si) for si in s)
        res = _derivative_check(defects, I, sys, subdivide)
        if res.passed:
            tm = TaylorModel(p, I, sys.dt, init)
            tm = validate(tm, sys, subdivide)
            if not tm.valid:
                raise NoValidRemainder("polynomial does not start on the initial set")
            return tm
        s = [si if ok else 2 * si for si, ok in zip(s, res.data["per_dim"])]
    raise NoValidRemainder(
        f"no valid remainder after {max_doublings} doublings; raise the Picard order or shrink dt")


def build_taylor_model(sys: OdeSystem, init: Zonotope, order: int = 2, truncate: int | None = None,
                       cap: int = DEFAULT_DEGREE_CAP, slopes: Sequence | None = None,
                       start: Fraction = DEFAULT_SLOPE_START, max_doublings: int = DEFAULT_MAX_DOUBLINGS,
                       subdivide: int = 0) -> TaylorModel:
    """Picard iterate from init, then either check the given slopes or search for some."""
    h = initial_polys(init, tm_space(init.order))
    p = picard_iterate(sys, h, order, truncate, cap)
    if slopes is None:
        return synthesize_remainder(sys, p, init, start, max_doublings, subdivide)
    if len(slopes) != len(p):
        raise DomainMismatch("one slope per dimension is required")
    I = tuple(AffineIntervalFn.slope(exact.q(s)) for s in slopes)
    return validate(TaylorModel(p, I, sys.dt, init), sys, subdivide)
