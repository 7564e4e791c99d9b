"""Zonotopes, linear interval abstraction and Taylor-model reach sets.

A zonotope Z(c, G) is the set {c + G lam : ||lam||_inf <= 1}. Generator
matrices are tuples of rows and may have zero columns (a point).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Mapping, Sequence

from . import exact
from .exact import Matrix, Vector
from .interval import Interval, iv_eval_poly
from .poly import Polynomial, VarSpace


class InvalidTM(ValueError):
    pass


class DtTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Zonotope:
    c: Vector
    G: Matrix
    roles: tuple = ()

    def __post_init__(self):
        c = exact.vec(self.c)
        G = tuple(tuple(exact.q(x) for x in row) for row in self.G)
        if len(G) != len(c):
            raise ValueError(f"generator rows ({len(G)}) != center length ({len(c)})")
        if G and len({len(r) for r in G}) != 1:
            raise ValueError("ragged generator matrix")
        roles = tuple(self.roles) if self.roles else tuple("x" for _ in c)
        if len(roles) != len(c):
            raise ValueError("one role label per dimension required")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "roles", roles)

    @property
    def dim(self) -> int:
        return len(self.c)

    @property
    def order(self) -> int:
        return len(self.G[0]) if self.G else 0

    def columns(self) -> list:
        return [tuple(row[j] for row in self.G) for j in range(self.order)]

    def rows_with_role(self, role: str) -> list:
        return [i for i, r in enumerate(self.roles) if r == role]

    def point(self, lam: Sequence[Fraction]) -> Vector:
        return exact.vec_add(self.c, exact.mat_vec(self.G, lam)) if self.order else self.c

    def to_json(self):
        return {"c": exact.dump_vector(self.c), "G": exact.dump_matrix(self.G), "roles": list(self.roles)}

    @classmethod
    def from_json(cls, data) -> "Zonotope":
        c = exact.parse_vector(data["c"])
        G = tuple(tuple(exact.q(x) for x in row) for row in data["G"])
        if not G:
            G = tuple(() for _ in c)
        return cls(c, G, tuple(data.get("roles") or ()))


def from_columns(c: Sequence[Fraction], cols: Sequence[Sequence[Fraction]], roles=()) -> Zonotope:
    n = len(c)
    G = tuple(tuple(col[i] for col in cols) for i in range(n))
    return Zonotope(tuple(c), G, roles)


def drop_zero_columns(Z: Zonotope) -> Zonotope:
    keep = [col for col in Z.columns() if any(x != 0 for x in col)]
    return from_columns(Z.c, keep, Z.roles)


def project(Z: Zonotope, rows: Sequence[int]) -> Zonotope:
    """Existential projection onto ``rows`` (row selection of c and G)."""
    rows = list(rows)
    if not rows:
        raise ValueError("projection needs at least one row")
    return Zonotope(tuple(Z.c[i] for i in rows), tuple(Z.G[i] for i in rows), tuple(Z.roles[i] for i in rows))


def scale(Z: Zonotope, factor) -> Zonotope:
    """Z(c, factor * G): same center, generators scaled."""
    return Zonotope(Z.c, exact.mat_scale(exact.q(factor), Z.G), Z.roles)


def interval_hull(Z: Zonotope) -> list:
    out = []
    for ci, row in zip(Z.c, Z.G):
        r = sum((abs(x) for x in row), Fraction(0))
        out.append(Interval(ci - r, ci + r))
    return out


def _upper(g):
    x, y = g
    return g if (y > 0 or (y == 0 and x > 0)) else (-x, -y)


def _angle_cmp(a, b):
    # both in the upper half plane: a before b iff cross(a, b) > 0
    cross = a[0] * b[1] - a[1] * b[0]
    return -1 if cross > 0 else (1 if cross < 0 else 0)


def vertices_2d(Z: Zonotope, rows: Sequence[int] = (0, 1)) -> list:
    """Exact counterclockwise vertex list of the 2-D projection onto ``rows``.

    Parallel generators are merged, so the result has 2m vertices for m
    distinct directions (a segment gives 2 points, a point gives 1).
    """
    if len(rows) != 2:
        raise ValueError("vertices_2d needs exactly two rows")
    i, j = rows
    c = (Z.c[i], Z.c[j])
    gens = [_upper((Z.G[i][k], Z.G[j][k])) for k in range(Z.order)]
    gens = [g for g in gens if g != (0, 0)]
    if not gens:
        return [c]
    gens.sort(key=cmp_to_key(_angle_cmp))
    merged = [gens[0]]
    for g in gens[1:]:
        if _angle_cmp(merged[-1], g) == 0:
            merged[-1] = (merged[-1][0] + g[0], merged[-1][1] + g[1])
        else:
            merged.append(g)
    x = c[0] - sum(g[0] for g in merged)
    y = c[1] - sum(g[1] for g in merged)
    verts = []
    for g in merged:
        verts.append((x, y))
        x, y = x + 2 * g[0], y + 2 * g[1]
    for g in merged:
        verts.append((x, y))
        x, y = x - 2 * g[0], y - 2 * g[1]
    if len(merged) == 1:
        verts = verts[:2]
    return verts


# ---------------------------------------------------------------------------
# linear interval abstraction


def linear_abstraction(p: Polynomial, domain: Mapping[str, Interval], names: Sequence[str] | None = None,
                       subdivide: int = 0):
    """Split p into a part affine in ``names`` plus an interval remainder R.

    The affine part is p(0) + grad p(0) . x, where the expansion is taken in
    ``names`` only (other variables are carried along symbolically). R encloses
    the residue p - affine over ``domain``. Returns (affine, R).
    """
    names = list(p.space.names if names is None else names)
    at_zero = p.substitute({n: 0 for n in names})
    affine = at_zero
    for n in names:
        affine = affine + p.diff(n).substitute({m: 0 for m in names}) * Polynomial.var(p.space, n)
    residue = p - affine
    return affine, iv_eval_poly(residue, domain, subdivide)


# ---------------------------------------------------------------------------
# reach sets from a validated Taylor model


def _require_valid(tm):
    if not (getattr(tm, "initial_ok", False) and getattr(tm, "derivative_ok", False)):
        raise InvalidTM("Taylor model has not passed both validity premises")


def _unit_box(names) -> dict:
    return {n: Interval(-1, 1) for n in names}


def reach_discrete(tm, abstraction_domain: str = "paper", subdivide: int = 0) -> Zonotope:
    """Zonotope enclosing the states reachable exactly at t = dt.

    ``abstraction_domain``: "paper" bounds the nonlinear residue over
    [0, dt] x [-1, 1]^p, "tight" at t = dt only.
    """
    _require_valid(tm)
    if abstraction_domain not in ("paper", "tight"):
        raise ValueError(f"unknown abstraction domain {abstraction_domain!r}")
    t = tm.space.time
    lam = tm.params
    dt = tm.dt
    zero_lam = {n: 0 for n in lam}
    centers, grads, half_I, half_R = [], [], [], []
    for pi, Ii in zip(tm.p, tm.I):
        if abstraction_domain == "paper":
            dom = _unit_box(lam)
            dom[t] = Interval(0, dt)
            _, R = linear_abstraction(pi, dom, lam, subdivide)
        else:
            pdt = pi.substitute({t: dt})
            _, R = linear_abstraction(pdt, _unit_box(lam), lam, subdivide)
        I_dt = Ii.at(dt)
        centers.append(pi.substitute({t: dt, **zero_lam}).constant_term() + I_dt.mid + R.mid)
        grads.append(tuple(pi.diff(n).substitute({t: dt, **zero_lam}).constant_term() for n in lam))
        half_I.append(I_dt.rad / 2)
        half_R.append(R.rad / 2)
    H = exact.hstack(tuple(grads), exact.diag(half_I), exact.diag(half_R))
    return drop_zero_columns(Zonotope(tuple(centers), H, tm.init.roles))


def reach_interval(tm, time_normalization: str = "tight", subdivide: int = 0) -> Zonotope:
    """Zonotope enclosing every state reachable for t in [0, dt]."""
    _require_valid(tm)
    if time_normalization not in ("tight", "paper"):
        raise ValueError(f"unknown time normalization {time_normalization!r}")
    dt = tm.dt
    if time_normalization == "paper" and dt > 1:
        raise DtTooLarge("paper-literal time generator needs dt <= 1")
    t = tm.space.time
    lam = tm.params
    n = len(tm.p)
    xis = tuple(f"xi{i + 1}" for i in range(n))
    space = VarSpace.build(t, params=lam, remainders=xis)
    dom = _unit_box(lam + xis)
    dom[t] = Interval(0, dt)
    centers, g_t, grads, half_a, half_R = [], [], [], [], []
    for i, (pi, Ii) in enumerate(zip(tm.p, tm.I)):
        tv = Polynomial.var(space, t)
        xi = Polynomial.var(space, xis[i])
        # q = p + mid(I(t)) + 1/2 rad(I(t)) xi with I(t) = a + b t
        qi = (pi.embed(space) + Ii.a.mid + tv * Ii.b.mid
              + xi * (Ii.a.rad / 2) + tv * xi * (Ii.b.rad / 2))
        _, R = linear_abstraction(qi, dom, space.names, subdivide)
        origin = {v: 0 for v in space.names}
        centers.append(qi.substitute(origin).constant_term() + R.mid)
        g_t.append(qi.diff(t).substitute(origin).constant_term())
        grads.append(tuple(qi.diff(v).substitute(origin).constant_term() for v in lam))
        half_a.append(Ii.a.rad / 2)
        half_R.append(R.rad / 2)
    if time_normalization == "tight":
        half_dt = dt / 2
        centers = [ci + gi * half_dt for ci, gi in zip(centers, g_t)]
        g_t = [gi * half_dt for gi in g_t]
    H = exact.hstack(exact.column(g_t), tuple(grads), exact.diag(half_a), exact.diag(half_R))
    return drop_zero_columns(Zonotope(tuple(centers), H, tm.init.roles))
