"""Exact containment checks: relaxed witness certification and box containment.

Everything here is exact rational arithmetic. The floating-point search that
proposes witnesses lives in :mod:`envcert.witness_search`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import exact
from .interval import Interval
from .results import FAIL, PASS, CheckResult
from .zono import Zonotope, interval_hull


@dataclass(frozen=True)
class ContainmentWitness:
    """(Gamma, beta) with right inverse Hplus and residual budget epsilon.

    Certifies Z(c, G) inside Z(b, H) when H Hplus = I, b - c = H beta,
    ||H Gamma - G|| <= epsilon and ||[Gamma beta]|| <= 1 - epsilon ||Hplus||.
    """

    Gamma: exact.Matrix
    beta: exact.Vector
    Hplus: exact.Matrix
    epsilon: Fraction

    def to_json(self):
        return {
            "Gamma": exact.dump_matrix(self.Gamma),
            "beta": exact.dump_vector(self.beta),
            "Hplus": exact.dump_matrix(self.Hplus),
            "epsilon": exact.fmt(self.epsilon),
        }

    @classmethod
    def from_json(cls, data) -> "ContainmentWitness":
        return cls(
            Gamma=tuple(tuple(exact.q(x) for x in row) for row in data["Gamma"]),
            beta=exact.parse_vector(data["beta"]),
            Hplus=exact.parse_matrix(data["Hplus"]),
            epsilon=exact.q(data["epsilon"]),
        )


def _shape_ok(M, r, k) -> bool:
    return len(M) == r and all(len(row) == k for row in M)


def certify(inner: Zonotope, outer: Zonotope, w: ContainmentWitness) -> CheckResult:
    """Exact check of the four witness conditions. PASS implies inner is inside outer.

    FAIL only means this witness is insufficient, not that containment fails.
    """
    n, p_in, p_out = inner.dim, inner.order, outer.order
    if outer.dim != n:
        return CheckResult(FAIL, "dimension mismatch")
    if not (_shape_ok(w.Gamma, p_out, p_in) and len(w.beta) == p_out and _shape_ok(w.Hplus, p_out, n)):
        return CheckResult(FAIL, "witness shapes do not match the zonotopes")
    if w.epsilon < 0:
        return CheckResult(FAIL, "negative epsilon")
    H, G = outer.G, inner.G
    if p_out == 0:
        return CheckResult(FAIL, "outer zonotope has no generators")
    data = {}
    if exact.mat_mul(H, w.Hplus) != exact.identity(n):
        return CheckResult(FAIL, "H Hplus != I", data)
    if exact.mat_vec(H, w.beta) != exact.vec_sub(outer.c, inner.c):
        return CheckResult(FAIL, "b - c != H beta", data)
    if p_in:
        residual = exact.mat_inf_norm(exact.mat_sub(exact.mat_mul(H, w.Gamma), G))
    else:
        residual = Fraction(0)
    data["residual"] = residual
    if residual > w.epsilon:
        return CheckResult(FAIL, f"||H Gamma - G|| = {residual} exceeds epsilon = {w.epsilon}", data)
    norm = exact.mat_inf_norm(exact.hstack(w.Gamma, exact.column(w.beta)))
    budget = 1 - w.epsilon * exact.mat_inf_norm(w.Hplus)
    data.update(norm=norm, budget=budget, margin=budget - norm)
    if norm > budget:
        return CheckResult(FAIL, f"||[Gamma beta]|| = {norm} exceeds budget {budget}", data)
    return CheckResult(PASS, f"witness norm {norm} within budget {budget}", data)


def in_box(Z: Zonotope, box) -> CheckResult:
    """Exact test interval_hull(Z) inside ``box`` (a sequence of Intervals)."""
    box = list(box)
    if len(box) != Z.dim:
        raise ValueError("box dimension differs from zonotope dimension")
    hull = interval_hull(Z)
    margins = [min(h.lo - b.lo, b.hi - h.hi) for h, b in zip(hull, box)]
    data = {"hull": hull, "margins": margins, "margin": min(margins)}
    bad = [i + 1 for i, m in enumerate(margins) if m < 0]
    if bad:
        return CheckResult(FAIL, f"interval hull leaves the box in dimension(s) {bad}", data)
    return CheckResult(PASS, f"inside box with margin {min(margins)}", data)


def box_from_bounds(bounds) -> list:
    return [b if isinstance(b, Interval) else Interval(*b) for b in bounds]
