"""Command-line interface.

Actuator indices on the command line and in JSON output are 1-based.
Exit codes: 0 success (including indeterminate verdicts), 2 input error,
3 combinatorial budget exceeded, 4 unsupported request, 5 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import generators, io, reachability, resilience, robust, simulator, synthesis
from .errors import IndexOutOfRange, InvalidInput, ResilockError
from .linalg import Tolerance


def _parse_loss(text: str, m: int) -> tuple:
    """1-based comma-separated indices -> sorted 0-based tuple."""
    try:
        idx = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InvalidInput(f"--loss expects comma-separated integers, got {text!r}") from None
    if not idx:
        raise InvalidInput("--loss is empty")
    if any(i < 1 or i > m for i in idx):
        raise IndexOutOfRange(f"actuator indices must lie in [1, {m}], got {idx}")
    return resilience.LossScenario.of([i - 1 for i in idx], m).indices


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _table(report: resilience.ResilienceReport, labels) -> str:
    rows = [f"{'lost':<40} {'min eig F':>12}  verdict"]
    for v in report.verdicts:
        name = ", ".join(labels[i] for i in v.scenario.indices)
        verdict = "indeterminate" if v.indeterminate else ("tolerable" if v.tolerable else "NOT tolerable")
        rows.append(f"{name:<40} {v.min_eig:>12.4f}  {verdict}")
    rows.append(f"{report.p}-resilient: {report.overall}")
    return "\n".join(rows)


def cmd_analyze(args) -> int:
    system = io.load_system(args.file)
    tol = Tolerance(pd_eps=args.tol)
    payload = {"n": system.n, "m": system.m}
    if args.degree:
        payload["degree"] = resilience.degree_of_resilience(system.bbar, tol, args.max_combinations)
        print(f"degree of resilience: {payload['degree']}", file=sys.stderr)
    if args.p is not None or not args.degree:
        p = 1 if args.p is None else args.p
        report = resilience.check_p_resilience(system.bbar, p, tol, args.max_combinations)
        print(_table(report, system.bbar.labels), file=sys.stderr)
        payload["report"] = report.to_dict(system.bbar.labels)
    _emit(payload, args.out)
    return 0


def cmd_reach(args) -> int:
    system = io.load_system(args.file)
    loss = _parse_loss(args.loss, system.m)
    sys_ = resilience.split(system.bbar, loss)
    x0 = system.x0 if system.x0 is not None else np.zeros(system.n)
    goal = system.x_goal if system.x_goal is not None else np.zeros(system.n)
    target = reachability.TargetBall(goal, system.epsilon)
    payload = {"loss": [i + 1 for i in loss], "asymptotic": reachability.classify_asymptotic(sys_).value}
    if system.A is not None and np.any(system.A):
        payload["note"] = "drift matrix ignored; reachability is evaluated for the driftless system"
    if args.min_time:
        payload["mode"] = "min-time"
        payload["status"] = "reachable"
        payload["min_time"] = reachability.min_reach_time(sys_, x0, target)
    else:
        T = args.at if args.at is not None else args.by
        if T is None:
            T = system.horizon
        if T is None:
            raise InvalidInput("give a horizon with --at/--by or in the system file")
        q = reachability.ReachQuery(sys_, x0, target, T)
        if args.by is None:
            payload["mode"] = "at"
            verdict = reachability.reachable_at_time(q)
        else:
            payload["mode"] = "by"
            verdict = reachability.reachable_by_time(q)
        payload["horizon"] = T
        payload.update(verdict.to_dict())
    _emit(payload, args.out)
    return 0


def cmd_simulate(args) -> int:
    system = io.load_system(args.file)
    model = simulator.SystemModel(system.A, system.bbar, driftless=system.A is None)
    if args.scenario is not None:
        names = [s.lower().replace(" ", "-") for s in system.bbar.labels]
        if args.scenario not in names:
            raise InvalidInput(f"unknown scenario {args.scenario!r}; choose from {names}")
        loss = [names.index(args.scenario)]
    elif args.loss is not None:
        loss = list(_parse_loss(args.loss, system.m))
    else:
        raise InvalidInput("give --scenario or --loss")
    x0 = system.x0 if system.x0 is not None else np.zeros(system.n)
    T = args.T if args.T is not None else (system.horizon or 25.0)
    K = None
    if args.printed_lqr:
        K = simulator.admire_lqr_gain(printed=True)
    traj, summary = simulator.simulate_batch(
        model, loss, args.controller, [args.seed], x0, system.x_goal, T, args.dt, args.dwell,
        not args.no_saturation, K, system.epsilon, args.scenario or "",
    )[0]
    if args.out:
        Path(args.out).write_text(traj.to_csv())
    payload = summary.to_dict()
    payload["loss"] = [i + 1 for i in loss]
    _emit(payload, args.summary)
    return 0


def cmd_generate(args) -> int:
    if args.fixture:
        if args.fixture in io.BUILTIN_SYSTEMS:
            text = io.dump_system(io.builtin_system(args.fixture))
        else:
            text = io.dump_matrix(generators.appendix_fixture(args.fixture))
    elif args.family == "identity-stack":
        text = io.dump_matrix(generators.gen_identity_stack(args.n, args.p))
    elif args.family == "sign-orthogonal":
        text = io.dump_matrix(generators.gen_sign_orthogonal(args.n, args.m))
    elif args.family == "hadamard":
        if args.order is None:
            raise InvalidInput("--order is required for the hadamard family")
        H = generators.gen_hadamard(args.order)
        text = json.dumps({"order": args.order, "H": H.tolist()}, indent=2)
    else:
        raise InvalidInput("give --family or --fixture")
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def cmd_robust(args) -> int:
    system = io.load_system(args.file)
    if system.bbar.ranges is None:
        raise InvalidInput("actuator ranges are required for the robust baseline")
    loss = _parse_loss(args.loss, system.m)
    if len(loss) != 1:
        raise InvalidInput("the robust baseline handles a single lost actuator")
    lost = loss[0]
    kept = [j for j in range(system.m) if j != lost]
    ranges = system.bbar.ranges
    dist = robust.build_disturbance_ellipsoid(ranges[lost])
    ctrl = robust.build_control_ellipsoid(ranges[kept], float(dist.shape[0, 0]))
    B = system.bbar.entries
    A = system.A if system.A is not None else np.zeros((system.n, system.n))
    C = B[:, [lost]] * (0.0 if args.no_disturbance else 1.0)
    prob = robust.RobustProblem(A, B[:, kept], C, ctrl, dist)
    x0 = system.x0 if system.x0 is not None else np.ones(system.n)
    T = args.T if args.T is not None else (system.horizon or 25.0)
    res = robust.min_guaranteed_radius(prob, x0, T=T, dt=args.dt, variant=args.variant)
    x0_norm = float(np.linalg.norm(x0))
    payload = res.to_dict()
    payload.update({
        "loss": [lost + 1],
        "horizon": T,
        "x0_norm": x0_norm,
        "robust_improves_on_x0": res.mu < x0_norm,
        "resilient_radius": system.epsilon,
    })
    if args.csv:
        run = robust.integrate_internal_approx(prob, res.l, res.mu, x0, T=T, dt=args.dt, variant=args.variant)
        Path(args.csv).write_text(run.to_csv())
    _emit(payload, args.out)
    return 0


def cmd_gains(args) -> int:
    system = io.load_system(args.file)
    loss = _parse_loss(args.loss, system.m)
    sys_ = resilience.split(system.bbar, loss)
    x0 = system.x0 if system.x0 is not None else np.zeros(system.n)
    goal = system.x_goal if system.x_goal is not None else np.zeros(system.n)
    gains = synthesis.compute_gains(sys_, x0, goal)
    payload = gains.to_dict()
    if system.A is not None:
        payload["spectral_abscissa"] = float(np.max(np.linalg.eigvals(system.A).real))
        payload["drift_condition"] = synthesis.check_drift_condition(system.A, gains)
    _emit(payload, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="resilock", description="Resilient reachability under actuator loss.")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="check p-resilience of a control matrix")
    a.add_argument("file", help="system JSON file or builtin:<name>")
    a.add_argument("--p", type=int)
    a.add_argument("--degree", action="store_true", help="compute the degree of resilience")
    a.add_argument("--tol", type=float, default=1e-9, help="positive definiteness tolerance")
    a.add_argument("--max-combinations", type=int, default=resilience.DEFAULT_MAX_COMBINATIONS)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("reach", help="resilient reachability of the target ball")
    r.add_argument("file")
    r.add_argument("--loss", required=True, help="comma-separated 1-based actuator indices")
    mode = r.add_mutually_exclusive_group()
    mode.add_argument("--at", type=float, help="reachable exactly at time T")
    mode.add_argument("--by", type=float, help="reachable at some time in [0, T]")
    mode.add_argument("--min-time", action="store_true", help="smallest reach time")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reach)

    s = sub.add_parser("simulate", help="closed-loop simulation")
    s.add_argument("file")
    s.add_argument("--scenario", help="label of the lost actuator, e.g. canard")
    s.add_argument("--loss", help="comma-separated 1-based actuator indices")
    s.add_argument("--controller", choices=["resilient", "lqr", "none"], default="resilient")
    s.add_argument("--printed-lqr", action="store_true", help="use the embedded ADMIRE LQR gain")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dt", type=float, default=simulator.DEFAULT_DT)
    s.add_argument("--dwell", type=float, default=simulator.DEFAULT_DWELL)
    s.add_argument("--T", type=float)
    s.add_argument("--no-saturation", action="store_true")
    s.add_argument("--out", help="trajectory CSV path")
    s.add_argument("--summary", help="summary JSON path")
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("generate", help="emit a resilient control matrix")
    g.add_argument("--family", choices=["identity-stack", "sign-orthogonal", "hadamard"])
    g.add_argument("--fixture", help="6x24, 8x32, 12x46, admire or admire-driftless")
    g.add_argument("--n", type=int, default=1)
    g.add_argument("--p", type=int, default=1)
    g.add_argument("--m", type=int)
    g.add_argument("--order", type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("robust", help="smallest radius guaranteed by the robust baseline")
    b.add_argument("file")
    b.add_argument("--loss", required=True)
    b.add_argument("--T", type=float)
    b.add_argument("--dt", type=float, default=robust.ROBUST_DT)
    b.add_argument("--variant", choices=["printed", "normalized"], default="printed")
    b.add_argument("--no-disturbance", action="store_true", help="zero the lost actuator's column")
    b.add_argument("--csv", help="eigenvalue trajectory of the best run")
    b.add_argument("--out")
    b.set_defaults(func=cmd_robust)

    k = sub.add_parser("gains", help="gains of the resilient control law")
    k.add_argument("file")
    k.add_argument("--loss", required=True)
    k.add_argument("--out")
    k.set_defaults(func=cmd_gains)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResilockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
