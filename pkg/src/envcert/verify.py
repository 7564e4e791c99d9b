"""Certificate re-checker.

Re-derives every verdict from the stored exact data: the Picard polynomial is
recomputed, both Taylor-model premises are re-checked, the reach zonotopes are
rebuilt and compared, and stored witnesses are certified. No floating point,
no LP and no remainder search happen on this path.
"""

from __future__ import annotations

import hashlib
import json

from . import exact
from .contain import ContainmentWitness, certify, in_box
from .poly import DegreeCapExceeded
from .problem import ProblemSpec
from .results import FAIL, PASS, UNKNOWN, VERDICTS, CheckResult, combine
from .taylor import (TaylorModel, check_derivative_premise, check_initial_premise, initial_polys,
                     picard_iterate, tm_space)
from .zono import Zonotope, drop_zero_columns, from_columns, project, reach_discrete, reach_interval

SCHEMA = "cert-v1"
CONDITIONS = ("taylor_model", "invariance", "safety", "admissibility", "initial")


class Malformed(ValueError):
    pass


class Mismatch(ValueError):
    pass


class VerifyReport:
    def __init__(self):
        self.results = {}

    @property
    def verdict(self) -> str:
        return combine(r.verdict for r in self.results.values())

    def verdicts(self) -> dict:
        return {k: r.verdict for k, r in self.results.items()}


def digest(body: dict) -> str:
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _structure(cert) -> None:
    if not isinstance(cert, dict):
        raise Malformed("certificate must be a JSON object")
    for key in ("schema", "problem_hash", "verdict", "conditions", "taylor_model", "reach_discrete",
                "reach_interval", "witnesses", "digest"):
        if key not in cert:
            raise Malformed(f"missing field {key!r}")
    if cert["schema"] != SCHEMA:
        raise Malformed(f"unsupported schema {cert['schema']!r}")
    body = {k: v for k, v in cert.items() if k != "digest"}
    if digest(body) != cert["digest"]:
        raise Malformed("content digest does not match")
    conds = cert["conditions"]
    if not isinstance(conds, dict) or set(conds) != set(CONDITIONS):
        raise Malformed("conditions must list exactly " + ", ".join(CONDITIONS))
    for name, entry in conds.items():
        if not isinstance(entry, dict) or entry.get("verdict") not in VERDICTS:
            raise Malformed(f"condition {name!r} has no valid verdict")
    if cert["verdict"] != combine(e["verdict"] for e in conds.values()):
        raise Malformed("overall verdict inconsistent with condition verdicts")
    if not isinstance(cert["witnesses"], dict) or set(cert["witnesses"]) != {"invariance", "initial"}:
        raise Malformed("witnesses must hold 'invariance' and 'initial'")


def _load(fn, data, what):
    try:
        return fn(data)
    except (KeyError, TypeError, ValueError, ZeroDivisionError, IndexError) as exc:
        raise Malformed(f"{what}: {exc}") from exc


def containment_target(ps: ProblemSpec) -> Zonotope:
    """proj_x(E), optionally inflated by delta * I when configured."""
    outer = project(ps.envelope, ps.x_rows)
    delta = exact.q(ps.config.inflate_outer)
    if delta:
        cols = outer.columns() + [tuple(delta if i == j else 0 for i in range(outer.dim)) for j in range(outer.dim)]
        outer = from_columns(outer.c, cols, outer.roles)
    return outer


def _check_tm(cert, ps: ProblemSpec):
    """Returns (CheckResult, validated TaylorModel or None)."""
    data = cert["taylor_model"]
    if data is None:
        return CheckResult(UNKNOWN, "certificate holds no Taylor model"), None
    cfg = ps.config
    tm = _load(lambda d: TaylorModel.from_json(d, cfg.degree_cap), data, "taylor_model")
    if tm.init != ps.envelope:
        return CheckResult(FAIL, "Taylor model was not built from the envelope"), None
    if tm.space != tm_space(ps.envelope.order):
        return CheckResult(FAIL, "Taylor model uses a non-canonical variable space"), None
    if tm.dt != ps.sys.dt or len(tm.p) != ps.sys.dim or len(tm.I) != ps.sys.dim:
        return CheckResult(FAIL, "Taylor model shape does not match the system"), None
    try:
        h = initial_polys(ps.envelope, tm.space)
        expected = picard_iterate(ps.effective_system(), h, cfg.picard_order, cfg.truncate_degree, cfg.degree_cap)
    except (DegreeCapExceeded, ValueError) as exc:
        return CheckResult(FAIL, f"cannot re-derive the Picard polynomial: {exc}"), None
    if tuple(expected) != tuple(tm.p):
        return CheckResult(FAIL, "stored polynomial differs from the Picard iterate"), None
    init_res = check_initial_premise(tm, ps.envelope)
    if not init_res.passed:
        return CheckResult(FAIL, f"initial premise: {init_res.message}"), None
    der_res = check_derivative_premise(tm, ps.effective_system(), cfg.subdivide)
    if not der_res.passed:
        return CheckResult(FAIL, f"derivative premise: {der_res.message}"), None
    tm.initial_ok = tm.derivative_ok = True
    return CheckResult(PASS, "Taylor model re-validated"), tm


def _witness_check(cert, name, inner: Zonotope, outer: Zonotope) -> CheckResult:
    data = cert["witnesses"][name]
    if data is None:
        return CheckResult(UNKNOWN, "no witness stored")
    w = _load(ContainmentWitness.from_json, data, f"witness {name}")
    return certify(inner, outer, w)


def verify_certificate(cert: dict, ps: ProblemSpec) -> VerifyReport:
    _structure(cert)
    if cert["problem_hash"] != ps.content_hash():
        raise Mismatch("certificate was issued for a different problem")
    cfg = ps.config
    fresh = {}
    tm_res, tm = _check_tm(cert, ps)
    fresh["taylor_model"] = tm_res
    outer = containment_target(ps)

    if tm is None:
        if cert["reach_discrete"] is not None or cert["reach_interval"] is not None:
            fresh["invariance"] = CheckResult(FAIL, "reach sets stored without a valid Taylor model")
            fresh["safety"] = CheckResult(FAIL, "reach sets stored without a valid Taylor model")
        else:
            fresh["invariance"] = CheckResult(UNKNOWN, "no valid Taylor model")
            fresh["safety"] = CheckResult(UNKNOWN, "no valid Taylor model")
    else:
        Zd = reach_discrete(tm, cfg.abstraction_domain, cfg.subdivide)
        Zi = reach_interval(tm, cfg.time_normalization, cfg.subdivide)
        stored_d = _load(Zonotope.from_json, cert["reach_discrete"], "reach_discrete") \
            if cert["reach_discrete"] is not None else None
        stored_i = _load(Zonotope.from_json, cert["reach_interval"], "reach_interval") \
            if cert["reach_interval"] is not None else None
        if stored_d != Zd:
            fresh["invariance"] = CheckResult(FAIL, "stored discrete reach set differs from the re-derived one")
        else:
            fresh["invariance"] = _witness_check(cert, "invariance", drop_zero_columns(project(Zd, ps.x_rows)), outer)
        if stored_i != Zi:
            fresh["safety"] = CheckResult(FAIL, "stored reach tube differs from the re-derived one")
        else:
            fresh["safety"] = in_box(project(Zi, ps.x_rows), ps.X_safe)

    if ps.n_u:
        fresh["admissibility"] = in_box(project(ps.envelope, ps.u_rows), ps.U_adm)
    else:
        fresh["admissibility"] = CheckResult(PASS, "no inputs")
    fresh["initial"] = _witness_check(cert, "initial", ps.X0, outer)

    report = VerifyReport()
    for name in CONDITIONS:
        claimed = cert["conditions"][name]["verdict"]
        got = fresh[name]
        if got.verdict == claimed:
            report.results[name] = got
        elif got.verdict == UNKNOWN and claimed == FAIL and name in ("invariance", "initial", "taylor_model"):
            # a FAIL from the witness search or remainder search cannot be re-derived
            # without floating point; negative claims are harmless to accept
            report.results[name] = CheckResult(FAIL, "negative claim accepted as stored")
        else:
            report.results[name] = CheckResult(
                FAIL, f"certificate claims {claimed} but re-check gives {got.verdict}: {got.message}")
    return report
