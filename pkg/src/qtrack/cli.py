"""Command-line interface.

Exit codes: 0 on success, 1 for invalid input, 2 when a runtime self-check
(certificate, CPTP test, closed-form cross-check) fails.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import sys

import numpy as np

from . import applications as apps
from .certificate import certify, char_poly_check
from .channel import choi_of_solution, cptp_check
from .exceptions import InternalInconsistency, TrackingError, TrackingInputError
from .feasibility import alberti_uhlmann, feasibility, margin_curve, perfect_value
from .io import dumps, encode_problem, parse_state_arg, read_problem
from .oracle import OracleConfig, oracle_max
from .tracker import solve

EXPLAIN_DIGITS = 15


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; bad usage is an input error here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format(r[c], ".17g") if isinstance(r[c], float) else r[c] for c in columns])
    return buf.getvalue()


def _solve_doc(sol, with_cert: bool, with_channel: bool) -> tuple[dict, int]:
    doc = {"solution": sol.to_dict(), "geometry": sol.geometry.to_dict()}
    status = 0
    if with_channel:
        ch = choi_of_solution(sol)
        doc["channel"] = ch.to_dict()
        doc["cptp"] = cptp_check(ch)
    if with_cert:
        cert = certify(sol)
        doc["certificate"] = cert.to_dict()
        doc["certificate"]["characteristic_polynomial"] = char_poly_check(cert, sol.geometry)
        if not cert.valid:
            status = 2
    return doc, status


def cmd_solve(a) -> tuple[str, int]:
    sol = solve(read_problem(a.problem))
    doc, status = _solve_doc(sol, a.certify, a.channel)
    return dumps(doc), status


def cmd_certify(a) -> tuple[str, int]:
    sol = solve(read_problem(a.problem))
    cert = certify(sol)
    doc = cert.to_dict()
    doc["characteristic_polynomial"] = char_poly_check(cert, sol.geometry)
    doc["fidelity"] = sol.fidelity
    return dumps(doc), 0 if cert.valid else 2


def cmd_explain(a) -> tuple[str, int]:
    p = read_problem(a.problem)
    sol = solve(p)
    doc = {
        "problem": encode_problem(p),
        "geometry": sol.geometry.to_dict(),
        "solution": sol.to_dict(),
        "outputs": [o.tolist() for o in sol.outputs()],
        "perfect_value": perfect_value(p),
        "feasibility": feasibility(p).to_dict(),
    }
    return dumps(doc, digits=EXPLAIN_DIGITS), 0


def cmd_discriminate(a) -> tuple[str, int]:
    s1 = parse_state_arg(a.state1, "state1")
    s2 = parse_state_arg(a.state2, "state2")
    return dumps(apps.discriminate(s1, s2, a.p1).to_dict()), 0


def cmd_purify(a) -> tuple[str, int]:
    if a.sweep:
        thetas = (np.pi / 2) * np.arange(1, a.points + 1) / a.points
        rows = apps.purification_sweep(a.R, thetas, a.theta_bar, a.pi1)
        return _csv(rows, ["theta", "fidelity", "mu1", "mu2", "mu3", "s1"]), 0
    if a.theta is None:
        raise TrackingInputError("--theta is required unless --sweep is given")
    res = apps.purify(apps.PurificationSpec(a.R, a.theta, a.theta_bar, a.pi1))
    return dumps(res.to_dict()), 0


def cmd_stabilize(a) -> tuple[str, int]:
    if a.sweep:
        ps = 0.5 * np.arange(1, a.points + 1) / a.points
        rows = []
        for p in ps:
            res = apps.stabilize(a.theta_bar, float(p))
            rows.append({"p": float(p), "omega": res.Omega, "fidelity": res.fidelity})
        return _csv(rows, ["p", "omega", "fidelity"]), 0
    if a.p is None:
        raise TrackingInputError("--p is required unless --sweep is given")
    res = apps.stabilize(a.theta_bar, a.p)
    doc = res.to_dict()
    doc["closed_form_fidelity"] = apps.stabilization_closed_form(a.theta_bar, a.p)[1]
    return dumps(doc), 0


def cmd_clone(a) -> tuple[str, int]:
    spec = apps.CloningSpec(a.phi, a.p1)
    omega_t, fid = apps.clone(spec)
    doc = {"Omega_tilde": omega_t, "fidelity": fid, "theta": spec.theta, "theta_bar": spec.theta_bar}
    return dumps(doc), 0


def cmd_indicator_sweep(a) -> tuple[str, int]:
    if not 0.0 < a.R <= 1.0:
        raise TrackingInputError(f"--R must lie in (0, 1], got {a.R}")
    rows = apps.indicator_sweep(a.R, a.points)
    return _csv(rows, ["source_fidelity", "target_fidelity", "omega"]), 0


def cmd_feasible(a) -> tuple[str, int]:
    p = read_problem(a.problem)
    if a.csv:
        t, lhs, rhs = margin_curve(p)
        rows = [{"t": float(x), "lhs": float(l), "rhs": float(r)} for x, l, r in zip(t, lhs, rhs)]
        return _csv(rows, ["t", "lhs", "rhs"]), 0
    doc = {"grid": alberti_uhlmann(p).to_dict(), "preferred": feasibility(p).to_dict(), "perfect_value": perfect_value(p)}
    return dumps(doc), 0


def cmd_oracle_check(a) -> tuple[str, int]:
    p = read_problem(a.problem)
    cfg = OracleConfig(seed=a.seed, n_samples=a.samples, n_climb_iters=a.climb_iters)
    res = oracle_max(p, cfg)
    doc = res.to_dict()
    doc["config"] = {"seed": cfg.seed, "n_samples": cfg.n_samples, "n_climb_iters": cfg.n_climb_iters, "restarts": cfg.restarts}
    # a channel beating the closed form would falsify optimality
    return dumps(doc), 0 if res.gap >= -1e-9 else 2


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qtrack", description="Optimal tracking channels for pairs of qubit states.")
    ap.add_argument("-o", "--output", help="write to this file instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a problem given as JSON (file path or inline)")
    s.add_argument("problem")
    s.add_argument("--certify", action="store_true", help="attach and check the dual certificate")
    s.add_argument("--channel", action="store_true", help="attach Choi, Kraus and affine forms")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("certify", help="dual certificate report; exit 2 if invalid")
    s.add_argument("problem")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("explain", help="geometry, solution and feasibility in one document")
    s.add_argument("problem")
    s.set_defaults(func=cmd_explain)

    s = sub.add_parser("discriminate", help="minimum-error discrimination as tracking")
    s.add_argument("--p1", type=float, required=True)
    s.add_argument("--state1", required=True, help="'x,y,z' or JSON state")
    s.add_argument("--state2", required=True)
    s.set_defaults(func=cmd_discriminate)

    s = sub.add_parser("purify", help="purification of two equally mixed states")
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--theta", type=float)
    s.add_argument("--theta-bar", type=float, default=None)
    s.add_argument("--pi1", type=float, default=0.5)
    s.add_argument("--sweep", action="store_true", help="CSV over theta in (0, pi/2]")
    s.add_argument("--points", type=int, default=100)
    s.set_defaults(func=cmd_purify)

    s = sub.add_parser("stabilize", help="correction after dephasing")
    s.add_argument("--theta-bar", type=float, required=True)
    s.add_argument("--p", type=float)
    s.add_argument("--sweep", action="store_true", help="CSV over p in (0, 1/2]")
    s.add_argument("--points", type=int, default=50)
    s.set_defaults(func=cmd_stabilize)

    s = sub.add_parser("clone", help="state-dependent cloning")
    s.add_argument("--phi", type=float, required=True)
    s.add_argument("--p1", type=float, default=0.5)
    s.set_defaults(func=cmd_clone)

    s = sub.add_parser("indicator-sweep", help="CSV of Omega against source/target closeness")
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--points", type=int, default=100)
    s.set_defaults(func=cmd_indicator_sweep)

    s = sub.add_parser("feasible", help="exact-transformation test")
    s.add_argument("problem")
    s.add_argument("--csv", action="store_true", help="emit the margin curve t, lhs, rhs")
    s.set_defaults(func=cmd_feasible)

    s = sub.add_parser("oracle-check", help="random-channel and hill-climb lower bound")
    s.add_argument("problem")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=OracleConfig.seed)
    s.add_argument("--climb-iters", type=int, default=OracleConfig.n_climb_iters)
    s.set_defaults(func=cmd_oracle_check)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        text, status = a.func(a)
    except TrackingInputError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (InternalInconsistency, TrackingError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if a.output:
        with open(a.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
