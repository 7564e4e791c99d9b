"""Floating-point closed-loop rollouts. Advisory only: nothing here feeds a verdict."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from . import exact
from .problem import ProblemSpec
from .poly import DegreeCapExceeded
from .taylor import NoValidRemainder, build_taylor_model
from .zono import Zonotope, interval_hull, project, reach_interval

STEPS = 50
TUBE_POINTS = 10
TUBE_INFLATE = 1e-9


class VectorField:
    """Vectorized float evaluation of the polynomial right-hand side."""

    def __init__(self, sys):
        self.space = sys.f[0].space
        self.state_idx = [self.space.index(s) for s in sys.states]
        self.dist_idx = [self.space.index(w) for w in sys.disturbances]
        self.polys = []
        for fi in sys.f:
            exps = np.array(list(fi.terms), dtype=int).reshape(-1, len(self.space))
            coeffs = np.array([float(c) for c in fi.terms.values()])
            self.polys.append((exps, coeffs))

    def __call__(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        """x has shape (N, n), w shape (N, q); returns dx/dt of shape (N, n)."""
        vals = np.zeros((x.shape[0], len(self.space)))
        vals[:, self.state_idx] = x
        if self.dist_idx:
            vals[:, self.dist_idx] = w
        out = np.empty_like(x)
        for i, (exps, coeffs) in enumerate(self.polys):
            if not len(coeffs):
                out[:, i] = 0.0
                continue
            mono = np.prod(vals[:, None, :] ** exps[None, :, :], axis=2)
            out[:, i] = mono @ coeffs
        return out


def rk4(field: VectorField, x: np.ndarray, w: np.ndarray, dt: float, steps: int = 1) -> list:
    """Integrate over [0, dt] with ``steps`` RK4 substeps; returns the states at each substep end."""
    h = dt / steps
    out = []
    for _ in range(steps):
        k1 = field(x, w)
        k2 = field(x + h / 2 * k1, w)
        k3 = field(x + h / 2 * k2, w)
        k4 = field(x + h * k3, w)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(x)
    return out


def _floats(Z: Zonotope):
    c = np.array([float(v) for v in Z.c])
    G = np.array([[float(v) for v in row] for row in Z.G]).reshape(Z.dim, -1)
    return c, G


def sample_zonotope(Z: Zonotope, count: int, rng: np.random.Generator) -> np.ndarray:
    c, G = _floats(Z)
    lam = rng.uniform(-1.0, 1.0, size=(count, G.shape[1]))
    return c + lam @ G.T


def fiber_input(x: np.ndarray, E: Zonotope, x_rows, u_rows):
    """Input u with (x, u) in E, picked at the smallest ||lambda||_inf; None if the fiber is empty."""
    c, G = _floats(E)
    Gx, Gu = G[x_rows], G[u_rows]
    rhs = x - c[x_rows]
    p = G.shape[1]
    if Gx.shape[0] == p and abs(np.linalg.det(Gx)) > 1e-12:
        lam = np.linalg.solve(Gx, rhs)
        if np.abs(lam).max() > 1 + 1e-9:
            return None
    else:
        cost = np.zeros(p + 1)
        cost[-1] = 1.0
        A_ub = np.vstack([np.hstack([np.eye(p), -np.ones((p, 1))]), np.hstack([-np.eye(p), -np.ones((p, 1))])])
        res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(2 * p), A_eq=np.hstack([Gx, np.zeros((len(x_rows), 1))]),
                      b_eq=rhs, bounds=[(-1, 1)] * p + [(0, 1)], method="highs")
        if res.status != 0:
            return None
        lam = res.x[:p]
    return c[u_rows] + Gu @ lam


def _tube_box(ps: ProblemSpec, inflate: float):
    cfg = ps.config
    try:
        tm = build_taylor_model(ps.effective_system(), ps.envelope, cfg.picard_order, cfg.truncate_degree,
                                cfg.degree_cap, cfg.slopes, exact.q(cfg.slope_start),
                                cfg.max_doublings, cfg.subdivide)
    except (NoValidRemainder, DegreeCapExceeded):
        return None
    if not tm.valid:
        return None
    hull = interval_hull(project(reach_interval(tm, cfg.time_normalization, cfg.subdivide), ps.x_rows))
    lo = np.array([float(h.lo) for h in hull]) - inflate
    hi = np.array([float(h.hi) for h in hull]) + inflate
    return lo, hi


def _disturbances(ps: ProblemSpec, count: int, rng) -> np.ndarray:
    sys = ps.effective_system()
    W = np.array([float(w) for w in sys.W])
    if not len(W) or not W.any():
        return np.zeros((count, len(W)))
    return rng.uniform(-W, W, size=(count, len(W)))


def enclosure_check(ps: ProblemSpec, samples: int = 100, seed: int = 0, points: int = TUBE_POINTS,
                    inflate: float = TUBE_INFLATE) -> dict:
    """One sampling period from random (x, u) in E, checked against the reach-tube hull."""
    box = _tube_box(ps, inflate)
    if box is None:
        return {"valid_tm": False}
    lo, hi = box
    rng = np.random.default_rng(seed)
    xu = sample_zonotope(ps.envelope, samples, rng)
    w = _disturbances(ps, samples, rng)
    field = VectorField(ps.sys)
    n_x = ps.n_x
    inside = np.ones(samples, dtype=bool)
    for state in rk4(field, xu, w, float(ps.sys.dt), points):
        xs = state[:, :n_x]
        inside &= np.all((xs >= lo) & (xs <= hi), axis=1)
    return {"valid_tm": True, "samples": samples, "points": points, "inside": int(inside.sum()),
            "fraction": float(inside.mean())}


def simulate_sanity(ps: ProblemSpec, samples: int = 100, seed: int = 0, steps: int = STEPS) -> dict:
    """Closed-loop rollouts with re-centered fiber resampling of u after each period."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    box = _tube_box(ps, TUBE_INFLATE)
    field = VectorField(ps.sys)
    n_x, dt = ps.n_x, float(ps.sys.dt)
    x_rows, u_rows = ps.x_rows, ps.u_rows
    safe_lo = np.array([float(b.lo) for b in ps.X_safe])
    safe_hi = np.array([float(b.hi) for b in ps.X_safe])
    xu = sample_zonotope(ps.envelope, samples, rng)
    in_safe = in_tube = checked = 0
    fiber_hits = fiber_tries = 0
    for _ in range(steps):
        w = _disturbances(ps, samples, rng)
        for state in rk4(field, xu, w, dt, TUBE_POINTS):
            xs = state[:, :n_x]
            in_safe += int(np.all((xs >= safe_lo) & (xs <= safe_hi), axis=1).sum())
            if box is not None:
                in_tube += int(np.all((xs >= box[0]) & (xs <= box[1]), axis=1).sum())
            checked += samples
        xu = state
        for i in range(samples):
            fiber_tries += 1
            u = fiber_input(xu[i, :n_x], ps.envelope, x_rows, u_rows) if u_rows else np.zeros(0)
            if u is not None:
                fiber_hits += 1
                xu[i, n_x:] = u
    return {
        "samples": samples,
        "seed": seed,
        "steps": steps,
        "points_per_step": TUBE_POINTS,
        "inside_safe": in_safe / checked,
        "inside_tube": (in_tube / checked) if box is not None else None,
        "fiber_feasible": fiber_hits / fiber_tries,
        "advisory": True,
    }
