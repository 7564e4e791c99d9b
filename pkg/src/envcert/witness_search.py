"""Floating-point witness search and exact repair.

The LP solves, in binary64, min s subject to H Gamma = G, H beta = b - c and
every absolute row sum of [Gamma beta] <= s. Its output is rationalized and
repaired so that H beta = b - c holds exactly; the residual of H Gamma = G is
measured exactly and becomes epsilon.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.optimize import linprog

from . import exact
from .contain import ContainmentWitness, certify
from .results import FAIL, PASS, UNKNOWN, CheckResult
from .zono import Zonotope, interval_hull

log = logging.getLogger(__name__)

LP_TOL = 1e-9
LP_MAX_ITER = 10_000
ACCEPT_SLACK = 1e-6


class Infeasible(Exception):
    def __init__(self, message, optimum=None):
        super().__init__(message)
        self.optimum = optimum


class NumericalFailure(RuntimeError):
    pass


def _f(M) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in M], dtype=float).reshape(len(M), -1)


def lp_witness_search(inner: Zonotope, outer: Zonotope, tol: float = LP_TOL, max_iter: int = LP_MAX_ITER):
    """Return float (Gamma, beta, s) minimizing s = ||[Gamma beta]||_inf."""
    if inner.dim != outer.dim:
        raise ValueError("dimension mismatch")
    n, pi, po = inner.dim, inner.order, outer.order
    if po == 0:
        raise Infeasible("outer zonotope has no generators")
    H = _f(outer.G)
    rhs = np.hstack([_f(inner.G) if pi else np.zeros((n, 0)),
                     (np.array([float(x) for x in outer.c]) - np.array([float(x) for x in inner.c])).reshape(n, 1)])
    k = pi + 1
    N = po * k  # entries of M = [Gamma beta], row-major
    # variable layout: M (N), A (N) with A >= |M|, s
    nv = 2 * N + 1
    A_eq = np.zeros((n * k, nv))
    b_eq = np.zeros(n * k)
    for i in range(n):
        for col in range(k):
            r = i * k + col
            for j in range(po):
                A_eq[r, j * k + col] = H[i, j]
            b_eq[r] = rhs[i, col]
    A_ub = np.zeros((2 * N + po, nv))
    b_ub = np.zeros(2 * N + po)
    for idx in range(N):
        A_ub[2 * idx, idx] = 1.0
        A_ub[2 * idx, N + idx] = -1.0
        A_ub[2 * idx + 1, idx] = -1.0
        A_ub[2 * idx + 1, N + idx] = -1.0
    for j in range(po):
        row = 2 * N + j
        A_ub[row, N + j * k: N + (j + 1) * k] = 1.0
        A_ub[row, -1] = -1.0
    cost = np.zeros(nv)
    cost[-1] = 1.0
    bounds = [(None, None)] * N + [(0, None)] * N + [(0, None)]
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs",
                  options={"maxiter": int(max_iter), "primal_feasibility_tolerance": max(tol, 1e-10),
                           "dual_feasibility_tolerance": max(tol, 1e-10)})
    if res.status == 2:
        raise Infeasible("equality constraints H Gamma = G, H beta = b - c are inconsistent")
    if res.status != 0:
        raise NumericalFailure(f"LP solver stopped: {res.message}")
    M = res.x[:N].reshape(po, k)
    s = float(res.x[-1])
    if s > 1 + ACCEPT_SLACK:
        raise Infeasible(f"optimal witness norm {s:.6g} exceeds 1", optimum=s)
    return M[:, :pi], M[:, pi], s


def exactify(Gamma_f, beta_f, inner: Zonotope, outer: Zonotope, Hplus, max_denominator: int = exact.DEFAULT_MAX_DENOMINATOR,
             mode: str = "cfrac") -> ContainmentWitness:
    """Rationalize a float witness and repair beta so that H beta = b - c exactly."""
    H = outer.G
    target = exact.vec_sub(outer.c, inner.c)
    beta_r = exact.rationalize_vector(beta_f, max_denominator, mode)
    defect = exact.vec_sub(exact.mat_vec(H, beta_r), target)
    beta = exact.vec_sub(beta_r, exact.mat_vec(Hplus, defect))
    po, pi = outer.order, inner.order
    if pi:
        Gamma = exact.rationalize_matrix(Gamma_f, max_denominator, mode)
        eps = exact.mat_inf_norm(exact.mat_sub(exact.mat_mul(H, Gamma), inner.G))
    else:
        Gamma = tuple(() for _ in range(po))
        eps = exact.q(0)
    return ContainmentWitness(Gamma, beta, Hplus, eps)


def hull_refutes(inner: Zonotope, outer: Zonotope) -> bool:
    """True when the interval hulls already show inner is not inside outer."""
    for hi, ho in zip(interval_hull(inner), interval_hull(outer)):
        if hi.lo < ho.lo or hi.hi > ho.hi:
            return True
    return False


def find_witness(inner: Zonotope, outer: Zonotope, *, tol: float = LP_TOL, max_iter: int = LP_MAX_ITER,
                 max_denominator: int = exact.DEFAULT_MAX_DENOMINATOR, mode: str = "cfrac"):
    """LP search, exact repair and certification. Returns (CheckResult, witness or None).

    Verdicts: PASS (certified), FAIL (the LP finds no witness of norm <= 1, or
    the interval hulls already refute containment), UNKNOWN (outer generator
    matrix rank deficient, LP numerical trouble, or rationalization ate the margin).
    """
    if hull_refutes(inner, outer):
        return CheckResult(FAIL, "interval hull of the inner set leaves the outer hull"), None
    try:
        Hplus = exact.right_inverse(outer.G)
    except exact.RankDeficient as exc:
        return CheckResult(UNKNOWN, f"outer generator matrix is rank deficient ({exc}); "
                                    "try --inflate-outer"), None
    try:
        Gamma_f, beta_f, s = lp_witness_search(inner, outer, tol, max_iter)
    except Infeasible as exc:
        return CheckResult(FAIL, f"no containment witness: {exc}", {"lp_optimum": exc.optimum}), None
    except NumericalFailure as exc:
        return CheckResult(UNKNOWN, str(exc)), None
    tried = []
    for m in dict.fromkeys((mode, "dyadic")):
        w = exactify(Gamma_f, beta_f, inner, outer, Hplus, max_denominator, m)
        res = certify(inner, outer, w)
        res.data["lp_optimum"] = s
        res.data["rationalization"] = m
        if res.passed:
            return res, w
        tried.append(f"{m}: {res.message}")
        log.debug("witness rejected after %s rationalization: %s", m, res.message)
    return CheckResult(UNKNOWN, "rationalized witness rejected (" + "; ".join(tried) + ")",
                       {"lp_optimum": s}), None
