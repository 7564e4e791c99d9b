import json
from fractions import Fraction as F

import pytest

from envcert.problem import Config, ProblemError, load_problem, parse_problem

BASE = {
    "dynamics": ["x2", "u1"],
    "input_box": [["-1", "1"]],
    "dt": "1/10",
    "state_box": [["-1", "1"], ["-1", "1"]],
    "envelope": {"c": ["0", "0", "0"], "G": [["1/2", "0"], ["0", "1/2"], ["1/4", "1/4"]]},
    "X0": {"c": ["0", "0"], "G": [["1/10", "0"], ["0", "1/10"]]},
}


def with_(**changes):
    data = json.loads(json.dumps(BASE))
    data.update(changes)
    return data


def test_parse_dimensions_and_roles():
    ps = parse_problem(BASE)
    assert (ps.n_x, ps.n_u) == (2, 1)
    assert ps.sys.states == ("x1", "x2", "u1")
    assert ps.sys.f[2].is_zero()
    assert ps.envelope.roles == ("x", "x", "u")
    assert ps.x_rows == [0, 1] and ps.u_rows == [2]


def test_decimal_literals_are_exact_by_default():
    ps = parse_problem(with_(dt=0.1, state_box=[[-0.5, 0.5], ["-1", "1"]]))
    assert ps.sys.dt == F(0.1)  # the binary64 value, not 1/10
    assert ps.X_safe[0].hi == F(1, 2)
    ps = parse_problem(with_(dt=0.1, config={"input.decimal_mode": "cfrac"}))
    assert ps.sys.dt == F(1, 10)
    assert parse_problem(with_(dt="0.1")).sys.dt == F(1, 10)


def test_disturbance_modes():
    data = with_(dynamics=["x2 + w1", "u1"], disturbance=["1/10"])
    ps = parse_problem(data)
    assert ps.effective_system().W == (0,)
    robust = parse_problem(data, {"taylor.disturbance": "robust"})
    assert robust.effective_system().W == (F(1, 10),)


@pytest.mark.parametrize("change, message", [
    ({"dynamics": []}, "dynamics"),
    ({"dynamics": ["x3", "u1"]}, "dynamics"),
    ({"dt": "0"}, "dt"),
    ({"dt": "abc"}, "rational"),
    ({"state_box": [["1", "-1"], ["-1", "1"]]}, "empty"),
    ({"state_box": [["-1", "1"]]}, "state_box"),
    ({"envelope": {"c": ["0", "0"], "G": [["1"], ["1"]]}}, "envelope"),
    ({"disturbance": ["-1"]}, "non-negative"),
    ({"config": {"no.such": 1}}, "unknown config"),
    ({"config": {"reach.abstraction_domain": "loose"}}, "abstraction_domain"),
])
def test_parse_errors(change, message):
    with pytest.raises(ProblemError, match=message):
        parse_problem(with_(**change))


def test_missing_dt_and_sets():
    data = with_()
    del data["dt"]
    with pytest.raises(ProblemError):
        parse_problem(data)
    data = with_()
    del data["X0"]
    with pytest.raises(ProblemError):
        parse_problem(data)


def test_config_overrides_and_json():
    cfg = Config().with_overrides({"picard.order": "3", "taylor.slopes": "1/2,1/3", "picard.truncate": "none"})
    assert cfg.picard_order == 3 and cfg.slopes == ["1/2", "1/3"] and cfg.truncate_degree is None
    assert cfg.to_json()["picard.order"] == 3
    with pytest.raises(ProblemError):
        Config().with_overrides({"picard.order": "x"})
    with pytest.raises(ProblemError):
        Config().with_overrides({"contain.inflate_outer": "-1"})


def test_content_hash_tracks_semantics_only():
    ps = parse_problem(BASE)
    assert ps.content_hash() == parse_problem(BASE).content_hash()
    assert ps.content_hash() != parse_problem(BASE, {"picard.order": 3}).content_hash()
    assert ps.content_hash() != parse_problem(with_(dt="1/20")).content_hash()
    # solver knobs do not change what is being certified
    assert ps.content_hash() == parse_problem(BASE, {"lp.tol": "1e-8"}).content_hash()


def test_load_problem(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(BASE))
    assert load_problem(path).n_x == 2
    path.write_text("{not json")
    with pytest.raises(ProblemError):
        load_problem(path)
