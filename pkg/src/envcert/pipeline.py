"""End-to-end robust-control-invariance check producing a certificate.

Conditions, all over the envelope E (state-input pairs) used as initial set:

* taylor_model  a valid Taylor model of the extended system from E
* invariance    reach set at dt, projected on x, inside proj_x(E)
* safety        reach tube over [0, dt], projected on x, inside the state box
* admissibility proj_u(E) inside the input box
* initial       X0 inside proj_x(E)
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import __version__, exact
from .contain import in_box
from .poly import DegreeCapExceeded
from .problem import ProblemSpec
from .results import FAIL, PASS, UNKNOWN, CheckResult, combine
from .taylor import NoValidRemainder, build_taylor_model
from .verify import CONDITIONS, SCHEMA, containment_target, digest
from .witness_search import find_witness
from .zono import Zonotope, drop_zero_columns, project, reach_discrete, reach_interval

log = logging.getLogger(__name__)


@dataclass
class CheckReport:
    results: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return combine(r.verdict for r in self.results.values())

    def verdicts(self) -> dict:
        return {k: r.verdict for k, r in self.results.items()}


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("ENVCERT_THREADS", "0")) or os.cpu_count() or 1)
    except ValueError:
        return 1


def x_projection(Z: Zonotope, ps: ProblemSpec) -> Zonotope:
    return drop_zero_columns(project(Z, ps.x_rows))


def _margin_json(res: CheckResult) -> dict:
    out = {"verdict": res.verdict, "message": res.message}
    for key in ("margin", "norm", "budget", "residual"):
        if key in res.data:
            out[key] = exact.fmt(res.data[key])
    return out


def check_rci(ps: ProblemSpec):
    """Run all checks; returns (CheckReport, certificate dict)."""
    cfg = ps.config
    sys = ps.effective_system()
    report = CheckReport()
    tm = Zd = Zi = None
    try:
        tm = build_taylor_model(sys, ps.envelope, cfg.picard_order, cfg.truncate_degree, cfg.degree_cap,
                                cfg.slopes, exact.q(cfg.slope_start), cfg.max_doublings, cfg.subdivide)
        if tm.valid:
            report.results["taylor_model"] = CheckResult(
                PASS, "slopes " + ", ".join(exact.fmt(b.hi) for b in tm.slopes()))
        else:
            report.results["taylor_model"] = CheckResult(FAIL, "supplied remainder slopes do not validate")
    except NoValidRemainder as exc:
        report.results["taylor_model"] = CheckResult(UNKNOWN, str(exc))
    except DegreeCapExceeded as exc:
        report.results["taylor_model"] = CheckResult(
            UNKNOWN, f"{exc}; lower the Picard order or set picard.truncate")

    outer = containment_target(ps)
    lp_kw = dict(tol=cfg.lp_tol, max_iter=cfg.lp_max_iter, max_denominator=cfg.max_denominator,
                 mode=cfg.rational_mode)
    witnesses = {"invariance": None, "initial": None}

    def invariance():
        if Zd is None:
            return CheckResult(UNKNOWN, "no valid Taylor model"), None
        return find_witness(x_projection(Zd, ps), outer, **lp_kw)

    def initial():
        return find_witness(ps.X0, outer, **lp_kw)

    if tm is not None and tm.valid:
        Zd = reach_discrete(tm, cfg.abstraction_domain, cfg.subdivide)
        Zi = reach_interval(tm, cfg.time_normalization, cfg.subdivide)

    with ThreadPoolExecutor(max_workers=min(2, thread_cap())) as pool:
        fut_inv = pool.submit(invariance)
        fut_init = pool.submit(initial)
        report.results["invariance"], witnesses["invariance"] = fut_inv.result()
        if Zi is None:
            report.results["safety"] = CheckResult(UNKNOWN, "no valid Taylor model")
        else:
            report.results["safety"] = in_box(project(Zi, ps.x_rows), ps.X_safe)
        if ps.n_u:
            report.results["admissibility"] = in_box(project(ps.envelope, ps.u_rows), ps.U_adm)
        else:
            report.results["admissibility"] = CheckResult(PASS, "no inputs")
        report.results["initial"], witnesses["initial"] = fut_init.result()

    body = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "problem_hash": ps.content_hash(),
        "verdict": report.verdict,
        "conditions": {k: _margin_json(report.results[k]) for k in CONDITIONS},
        "taylor_model": tm.to_json() if tm is not None and tm.valid else None,
        "reach_discrete": Zd.to_json() if Zd is not None else None,
        "reach_interval": Zi.to_json() if Zi is not None else None,
        "witnesses": {k: (w.to_json() if w is not None else None) for k, w in witnesses.items()},
    }
    cert = dict(body, digest=digest(body))
    return report, cert


def write_certificate(cert: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cert, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_certificate(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
