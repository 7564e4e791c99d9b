"""Command-line front end.

Exit codes: 0 PASS, 1 FAIL, 2 UNKNOWN, 3 input error or malformed
certificate, 4 certificate issued for a different problem.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__, exact
from .poly import DegreeCapExceeded
from .problem import ProblemError, load_problem
from .results import FAIL, PASS, UNKNOWN
from .verify import Malformed, Mismatch

EXIT = {PASS: 0, FAIL: 1, UNKNOWN: 2}
EXIT_INPUT = 3
EXIT_MISMATCH = 4

log = logging.getLogger("envcert")


class InputError(Exception):
    pass


def _overrides(args) -> dict:
    out = {}
    for item in args.config or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--config expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    if getattr(args, "picard_order", None) is not None:
        out["picard.order"] = args.picard_order
    if getattr(args, "inflate_outer", None) is not None:
        out["contain.inflate_outer"] = args.inflate_outer
    return out


def _problem(args):
    return load_problem(args.problem, _overrides(args))


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _print_table(conditions: dict, out=None) -> None:
    out = out or sys.stdout
    width = max(len(k) for k in conditions)
    print(f"{'condition':<{width}}  verdict  margin", file=out)
    for name, entry in conditions.items():
        margin = entry.get("margin", "-")
        if margin != "-" and "/" in margin:
            margin = f"{margin} (~{float(exact.q(margin)):.6g})"
        print(f"{name:<{width}}  {entry['verdict']:<7}  {margin}", file=out)
        if entry.get("message"):
            print(f"{'':<{width}}           {entry['message']}", file=out)


def cmd_certify(args) -> int:
    from .pipeline import check_rci, write_certificate

    ps = _problem(args)
    report, cert = check_rci(ps)
    _print_table(cert["conditions"])
    print(f"overall: {report.verdict}")
    if args.out:
        write_certificate(cert, args.out)
        print(f"certificate written to {args.out}")
    return EXIT[report.verdict]


def cmd_verify(args) -> int:
    from .verify import verify_certificate

    ps = _problem(args)
    cert = _read_json(args.cert)
    report = verify_certificate(cert, ps)
    rows = {k: {"verdict": r.verdict, "message": r.message,
                **({"margin": exact.fmt(r.data["margin"])} if "margin" in r.data else {})}
            for k, r in report.results.items()}
    _print_table(rows)
    print(f"re-verified: {report.verdict}")
    return EXIT[report.verdict]


def _load_slopes(path) -> list:
    data = _read_json(path)
    if isinstance(data, dict):
        data = data.get("slopes")
    if not isinstance(data, list):
        raise InputError("slopes file must be a list or an object with a 'slopes' list")
    try:
        return [exact.q(s) for s in data]
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad slope value: {exc}") from exc


def cmd_taylor(args) -> int:
    from .taylor import NoValidRemainder, build_taylor_model

    ps = _problem(args)
    cfg = ps.config
    order = cfg.picard_order if args.order is None else args.order
    slopes = _load_slopes(args.check_bounds) if args.check_bounds else cfg.slopes
    sysm = ps.effective_system()
    try:
        tm = build_taylor_model(sysm, ps.envelope, order, cfg.truncate_degree, cfg.degree_cap, slopes,
                                exact.q(cfg.slope_start), cfg.max_doublings, cfg.subdivide)
    except NoValidRemainder as exc:
        print(f"no valid remainder: {exc}", file=sys.stderr)
        return EXIT[UNKNOWN]
    for name, pi, fn in zip(sysm.states, tm.p, tm.I):
        print(f"p_{name} = {pi}")
    for name, fn in zip(sysm.states, tm.I):
        print(f"I_{name}(t) = [{exact.fmt(fn.b.lo)}*t, {exact.fmt(fn.b.hi)}*t]")
    verdict = PASS if tm.valid else FAIL
    print(f"validity: {verdict}")
    return EXIT[verdict]


def _reach_sets(ps):
    from .pipeline import check_rci

    _, cert = check_rci(ps)
    return cert


def cmd_reach(args) -> int:
    ps = _problem(args)
    cert = _reach_sets(ps)
    if cert["taylor_model"] is None:
        print("no valid Taylor model: " + cert["conditions"]["taylor_model"]["message"], file=sys.stderr)
        return EXIT[UNKNOWN]
    out = {"reach_discrete": cert["reach_discrete"], "reach_interval": cert["reach_interval"]}
    text = json.dumps(out, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT[PASS]


def _row_index(token: str, names: list) -> int:
    if token in names:
        return names.index(token)
    try:
        idx = int(token) - 1
    except ValueError:
        raise InputError(f"unknown row {token!r}; use one of {names} or a 1-based index") from None
    if not 0 <= idx < len(names):
        raise InputError(f"row index {token} out of range 1..{len(names)}")
    return idx


def _write_polygon(path: Path, verts) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        for x, y in verts:
            w.writerow([float(x), float(y)])


def cmd_plot_data(args) -> int:
    from .zono import Zonotope, vertices_2d

    ps = _problem(args)
    names = list(ps.sys.states)
    i, j = (_row_index(r, names) for r in args.rows)
    if i == j:
        raise InputError("the two rows must differ")
    if args.cert:
        from .verify import verify_certificate

        cert = _read_json(args.cert)
        verify_certificate(cert, ps)
    else:
        cert = _reach_sets(ps)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    sets = {"envelope": ps.envelope}
    for key in ("reach_discrete", "reach_interval"):
        if cert.get(key) is not None:
            sets[key] = Zonotope.from_json(cert[key])
    written = []
    for key, Z in sets.items():
        path = outdir / f"{key}.csv"
        _write_polygon(path, vertices_2d(Z, (i, j)))
        written.append(path)
    boxes = list(ps.X_safe) + list(ps.U_adm)
    bi, bj = boxes[i], boxes[j]
    path = outdir / "safety_box.csv"
    _write_polygon(path, [(bi.lo, bj.lo), (bi.hi, bj.lo), (bi.hi, bj.hi), (bi.lo, bj.hi)])
    written.append(path)
    for p in written:
        print(p)
    return EXIT[PASS]


def cmd_simulate(args) -> int:
    from .simulate import simulate_sanity

    ps = _problem(args)
    if args.samples < 1:
        raise InputError("--samples must be >= 1")
    report = simulate_sanity(ps, args.samples, args.seed)
    text = json.dumps(report, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT[PASS]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="envcert", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_problem(p):
        p.add_argument("problem", help="problem JSON file")
        p.add_argument("--config", action="append", metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--picard-order", type=int)
        p.add_argument("--inflate-outer", metavar="DELTA")
        return p

    p = with_problem(sub.add_parser("certify", help="run all checks and write a certificate"))
    p.add_argument("--out", help="certificate output path")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="re-check a certificate with exact arithmetic only")
    p.add_argument("cert")
    with_problem(p)
    p.set_defaults(func=cmd_verify)

    p = with_problem(sub.add_parser("taylor", help="print the Taylor model of the envelope"))
    p.add_argument("--order", type=int, help="Picard order (default: config)")
    p.add_argument("--check-bounds", metavar="SLOPES_JSON", help="validate these remainder slopes")
    p.set_defaults(func=cmd_taylor)

    p = with_problem(sub.add_parser("reach", help="print the reach zonotopes"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_reach)

    p = with_problem(sub.add_parser("plot-data", help="write CSV polygons of a 2-D projection"))
    p.add_argument("--rows", nargs=2, default=["x1", "x2"], metavar=("I", "J"))
    p.add_argument("--cert", help="take reach sets from this certificate")
    p.add_argument("--out", default="plot", help="output directory")
    p.set_defaults(func=cmd_plot_data)

    p = with_problem(sub.add_parser("simulate", help="advisory RK4 rollouts"))
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except Mismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (InputError, ProblemError, Malformed, DegreeCapExceeded, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
