import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from envcert import exact
from envcert.contain import in_box
from envcert.interval import AffineIntervalFn, Interval
from envcert.poly import VarSpace, parse_polynomial
from envcert.simulate import VectorField, rk4
from envcert.taylor import OdeSystem, TaylorModel, build_taylor_model, initial_polys, picard_iterate
from envcert.witness_search import find_witness
from envcert.zono import (DtTooLarge, InvalidTM, Zonotope, drop_zero_columns, interval_hull, linear_abstraction,
                          project, reach_discrete, reach_interval, scale, vertices_2d)
from oracles import convex_hull, extreme_points

I = Interval
DT = F(1, 10)


def Z(c, G):
    return Zonotope(tuple(F(x) for x in c), tuple(tuple(F(x) for x in row) for row in G))


def eye(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def make_sys(rhs, states, dt=DT):
    space = VarSpace.build(None, states=states)
    return OdeSystem(tuple(states), tuple(parse_polynomial(r, space) for r in rhs), dt)


def forced_tm(sys, init, a=(0, 0), b=(0, 0)):
    """Taylor model whose validity flags are set by hand, for construction tests."""
    p = picard_iterate(sys, initial_polys(init), 2)
    fn = AffineIntervalFn(I(*a), I(*b))
    return TaylorModel(p, (fn,) * len(p), sys.dt, init, initial_ok=True, derivative_ok=True)


def test_project_examples():
    z = Z([1, 2], eye(2))
    assert project(z, [0]) == Z([1], [[1, 0]])
    assert project(z, [0, 1]) == z


def test_project_drops_input_row():
    E = Zonotope((F(0),) * 3, ((F(1), 0, 0), (0, F(1), 0), (0, 0, F(1))), ("x", "x", "u"))
    P = project(E, E.rows_with_role("x"))
    assert P.dim == 2 and P.roles == ("x", "x") and P.G == ((1, 0, 0), (0, 1, 0))


@given(st.lists(st.integers(0, 4), min_size=1, max_size=4), st.data())
def test_project_composes(rows, data):
    z = Z(range(5), [[i * 5 + j for j in range(3)] for i in range(5)])
    sub = data.draw(st.lists(st.integers(0, len(rows) - 1), min_size=1, max_size=3))
    assert project(project(z, rows), sub) == project(z, [rows[k] for k in sub])


def test_linear_abstraction_examples():
    xs = VarSpace.build(None, states=("x",))
    aff, R = linear_abstraction(parse_polynomial("x^2", xs), {"x": I(-1, 1)})
    assert aff.is_zero() and R == I(0, 1)
    assert (R.mid, R.rad / 2) == (F(1, 2), F(1, 2))
    aff, R = linear_abstraction(parse_polynomial("3*x + 2", xs), {"x": I(-1, 1)})
    assert R == I(0, 0) and aff == parse_polynomial("3*x + 2", xs)
    ls = VarSpace.build(None, states=("l1", "l2"))
    aff, R = linear_abstraction(parse_polynomial("l1*l2", ls), {"l1": I(-1, 1), "l2": I(-1, 1)})
    assert aff.is_zero() and R == I(-1, 1)


def test_reach_discrete_linear_toy():
    tm = forced_tm(make_sys(["u1", "0"], ("x1", "u1")), Z([0, 0], eye(2)))
    Zd = reach_discrete(tm)
    assert Zd.c == (0, 0) and Zd.G == ((1, F(1, 10)), (0, 1))


def test_reach_discrete_stationary():
    init = Z([1, -2], [[F(1, 2), 1], [0, 3]])
    tm = forced_tm(make_sys(["0", "0"], ("x1", "x2")), init)
    assert reach_discrete(tm) == init
    assert reach_discrete(tm, "tight") == init


def test_reach_discrete_double_integrator_structure():
    sys = make_sys(["x2", "u1", "0"], ("x1", "x2", "u1"))
    init = Z([0] * 3, eye(3))
    tm = build_taylor_model(sys, init)
    Zd = reach_discrete(tm)
    # three lambda columns plus one I(dt) column per dimension, R vanishes for a linear system
    assert Zd.order == 6
    assert [row[:3] for row in Zd.G] == [(1, F(1, 10), F(1, 200)), (0, 1, F(1, 10)), (0, 0, 1)]


def test_reach_requires_valid_tm():
    sys = make_sys(["0"], ("x1",))
    tm = build_taylor_model(sys, Z([0], [[1]]))
    tm.derivative_ok = False
    with pytest.raises(InvalidTM):
        reach_discrete(tm)
    with pytest.raises(InvalidTM):
        reach_interval(tm)


def test_reach_interval_stationary_with_slope():
    tm = forced_tm(make_sys(["0"], ("x1",)), Z([0], [[1]]), b=(-1, 1))
    Zi = reach_interval(tm)
    assert Zi.c == (0,)
    assert sorted(Zi.G[0]) == [F(1, 10), 1]
    # the hull is the true range 1 + dt of lam + e with |e| <= t
    assert interval_hull(Zi) == [I(F(-11, 10), F(11, 10))]


def test_reach_interval_constant_flow_equals_init():
    init = Z([2, 0], [[1, 1], [0, F(1, 3)]])
    tm = forced_tm(make_sys(["0", "0"], ("x1", "x2")), init)
    assert reach_interval(tm) == init
    assert reach_interval(tm, "paper") == init


def test_reach_interval_time_normalization():
    # x' = 1: the tube over [0, dt] is [c, c + dt] in the tight mode, [c - 1, c + 1] in the literal one
    tm = forced_tm(make_sys(["1"], ("x1",)), Z([0], [[0]]))
    assert interval_hull(reach_interval(tm)) == [I(0, F(1, 10))]
    assert interval_hull(reach_interval(tm, "paper")) == [I(-1, 1)]
    long = forced_tm(make_sys(["1"], ("x1",), dt=F(2)), Z([0], [[0]]))
    with pytest.raises(DtTooLarge):
        reach_interval(long, "paper")


def test_reach_interval_double_integrator_in_safety_box():
    sys = make_sys(["x2", "u1", "0"], ("x1", "x2", "u1"))
    init = Z([0] * 3, [[F(1, 2) if i == j else 0 for j in range(3)] for i in range(3)])
    tm = build_taylor_model(sys, init)
    Zi = project(reach_interval(tm), [0, 1])
    assert in_box(Zi, [I(-1, 1), I(-1, 1)]).passed


def test_interval_hull_examples():
    assert interval_hull(Z([0, 0], eye(2))) == [I(-1, 1), I(-1, 1)]
    assert interval_hull(Z([1], [[1, -2]])) == [I(-2, 4)]
    assert interval_hull(Z([3, 4], [[], []])) == [I(3, 3), I(4, 4)]


def test_vertices_examples():
    assert vertices_2d(Z([0, 0], eye(2))) == [(-1, -1), (1, -1), (1, 1), (-1, 1)]
    assert vertices_2d(Z([0, 0], [[1], [1]])) == [(-1, -1), (1, 1)]
    verts = vertices_2d(Z([0, 0], [[1, 1], [0, 1]]))
    assert len(verts) == 4
    assert set(verts) == set(convex_hull(extreme_points((0, 0), ((1, 1), (0, 1)))))


def test_vertices_merge_parallel_generators():
    verts = vertices_2d(Z([0, 0], [[1, 2, 0], [1, 2, 1]]))
    assert len(verts) == 4


def _signed_area(verts):
    return sum(verts[i][0] * verts[(i + 1) % len(verts)][1] - verts[(i + 1) % len(verts)][0] * verts[i][1]
               for i in range(len(verts)))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10), st.data())
def test_vertices_match_brute_force_hull(p, data):
    entry = st.integers(-5, 5)
    G = [[data.draw(entry) for _ in range(p)] for _ in range(2)]
    c = [data.draw(entry), data.draw(entry)]
    verts = vertices_2d(Z(c, G))
    oracle = convex_hull(extreme_points(tuple(map(F, c)), tuple(tuple(map(F, r)) for r in G)))
    assert set(verts) == set(oracle)
    if len(verts) > 2:
        assert _signed_area(verts) > 0


def test_json_round_trip_and_helpers():
    z = Zonotope((F(1), F(2)), ((F(1, 3), F(0)), (F(0), F(0))), ("x", "u"))
    assert Zonotope.from_json(z.to_json()) == z
    assert drop_zero_columns(z).order == 1
    assert scale(z, 3).G[0][0] == 1
    empty = Zonotope((F(1),), ((),))
    assert Zonotope.from_json(empty.to_json()) == empty


# ---------------------------------------------------------------------------
# soundness fuzz against RK4


def _rk4_endpoints(sys, init, count, seed):
    rng = np.random.default_rng(seed)
    c = np.array([float(v) for v in init.c])
    G = np.array([[float(v) for v in row] for row in init.G])
    x = c + rng.uniform(-1, 1, size=(count, G.shape[1])) @ G.T
    return rk4(VectorField(sys), x, np.zeros((count, 0)), float(sys.dt), 200)


@pytest.mark.parametrize("domain", ["paper", "tight"])
def test_reach_discrete_soundness_fuzz(domain):
    sys = make_sys(["-x2 - 3/2*x1^2 - 1/2*x1^3", "u1", "0"], ("x1", "x2", "u1"))
    init = Z([0] * 3, [[F(3, 10) if i == j else 0 for j in range(3)] for i in range(3)])
    tm = build_taylor_model(sys, init, truncate=4)
    Zd = reach_discrete(tm, domain)
    Zi = reach_interval(tm)
    traj = _rk4_endpoints(sys, init, 200, 7)
    for Zs in (Zd, Zi):
        hull = interval_hull(Zs)
        lo = np.array([float(h.lo) for h in hull]) - 1e-9
        hi = np.array([float(h.hi) for h in hull]) + 1e-9
        assert np.all((traj[-1] >= lo) & (traj[-1] <= hi))
    for states in traj[::20]:
        hull = interval_hull(Zi)
        assert all(float(h.lo) - 1e-9 <= v <= float(h.hi) + 1e-9 for h, v in zip(hull, states[0]))
    for x in traj[-1][:20]:
        point = Zonotope(tuple(exact.rationalize(v, mode="dyadic") for v in x), ((),) * 3)
        for Zs in (Zd, Zi):
            res, _ = find_witness(point, Zs)
            assert res.passed, res.message
