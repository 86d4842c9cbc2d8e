"""Command-line interface.

Subcommands:
  weights eval|check     evaluate a cutoff weight / verify its facts
  datagen make|check     write initial-data checkpoints / check hypotheses
  diagnose series|energy bracket series (CSV) / energy-identity terms (JSON)
  schedule               case groups and dependency DAG (json or dot)
  run                    run one scenario config, exit 0 iff all verdicts pass
  sweep                  run a directory of configs, optionally in parallel
  report                 aggregate scenario reports into one summary
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np


def _parse_alpha(s: str):
    parts = s.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("alpha must be 'a1,a2'")
    return (int(parts[0]), int(parts[1]))


def _cmd_weights(args) -> int:
    from .weights import check_weight_facts, eval_weight, make_weight

    if args.weights_cmd == "eval":
        w = make_weight(args.eps, args.b, nu=args.nu, mollifier_order=args.order,
                        kind=args.kind)
        val = eval_weight(w, args.x, args.deriv)
        print(f"{float(val)!r}")
        return 0
    w = make_weight(args.eps, args.b, nu=args.nu, mollifier_order=args.order,
                    kind=args.kind)
    facts = check_weight_facts(w, n_samples=args.samples, raise_on_failure=False)
    out = facts.to_dict()
    if args.profile:
        xs = np.linspace(-0.5 * (args.b + args.eps), 1.5 * (args.b + args.eps),
                         args.profile_points)
        out["profile"] = {
            "x": [float(v) for v in xs],
            **{f"chi{d}": [float(v) for v in np.asarray(eval_weight(w, xs, d))]
               for d in range(4)},
        }
    from .checkpoint import json_sanitize

    print(json.dumps(json_sanitize(out), indent=2))
    return 0 if facts.all_ok else 1


def _cmd_datagen(args) -> int:
    from .checkpoint import load_checkpoint, save_checkpoint
    from .datagen import DataSpec, check_hypotheses, make_data
    from .spectral import Grid

    if args.datagen_cmd == "make":
        grid = Grid(args.nx, args.ny, args.lx, args.ly)
        spec = DataSpec(
            kind=args.kind.replace("-", "_"), x0=args.x0, gamma=args.gamma,
            x_s=args.xs, amplitude=args.amplitude,
            center=(args.center_x, args.center_y),
            width=(args.width_x, args.width_y),
            sing_amplitude=args.sing_amplitude, sing_width=args.sing_width,
            x_order=args.x_order,
        )
        save_checkpoint(args.out, make_data(grid, spec), 0.0)
        print(f"wrote {args.out}")
        return 0
    u0, _t = load_checkpoint(getattr(args, "in"))
    rep = check_hypotheses(u0, args.x0, args.n, args.s)
    print(json.dumps(rep.to_dict(), indent=2))
    return 0 if rep.ok else 1


def _cmd_diagnose(args) -> int:
    from .checkpoint import load_trajectory
    from .diagnostics import BracketSpec, bracket_series, energy_identity_residual
    from .weights import make_weight

    traj = load_trajectory(args.traj)
    kind = {"plain": "plain", "prime": "prime", "dprime": "double_prime"}[args.kind]
    w = make_weight(args.eps, args.b, nu=args.nu)
    spec = BracketSpec(args.alpha, kind, w)
    if args.diagnose_cmd == "series":
        print("t,value,wrapped_flag")
        for t, v, flag in bracket_series(traj, spec).rows():
            print(f"{float(t)!r},{float(v)!r},{flag}")
        return 0
    et = energy_identity_residual(traj, spec, args.t, args.probe)
    print(json.dumps(et.to_dict(), indent=2))
    return 0


def _cmd_schedule(args) -> int:
    from .schedule import case_schedule, dependency_closure, schedule_to_dot

    groups = case_schedule(args.n, merge_order4=args.merge_order4)
    if args.format == "dot":
        print(schedule_to_dot(groups))
        return 0
    closure = dependency_closure(args.n, groups if args.merge_order4 else None)
    print(json.dumps({
        "n": args.n,
        "groups": [g.to_dict() for g in groups],
        "closure": closure.to_dict(),
    }, indent=2))
    return 0


def _cmd_run(args) -> int:
    from .experiments import ScenarioConfig, run_scenario

    cfg = ScenarioConfig.from_json(args.config)
    out = args.out or os.path.join("out", cfg.name)
    report = run_scenario(cfg, out)
    print(json.dumps({
        "name": report.name, "passed": report.passed,
        "verdicts": [v.to_dict() for v in report.verdicts],
    }, indent=2))
    return 0 if report.passed else 1


def _cmd_sweep(args) -> int:
    from .experiments import ScenarioConfig, sweep

    names = sorted(n for n in os.listdir(args.config_dir) if n.endswith(".json"))
    if not names:
        print("no configs found", file=sys.stderr)
        return 2
    configs, outs = [], []
    for n in names:
        cfg = ScenarioConfig.from_json(os.path.join(args.config_dir, n))
        configs.append(cfg)
        outs.append(os.path.join(args.out, cfg.name))
    results = sweep(configs, outs, parallelism=args.jobs)
    ok = True
    for name, passed, err in results:
        status = "PASS" if passed else ("ERROR: " + err if err else "FAIL")
        print(f"{name}: {status}")
        ok = ok and passed
    return 0 if ok else 1


def _cmd_report(args) -> int:
    from .checkpoint import atomic_write_json
    from .experiments import aggregate_reports

    summary = aggregate_reports(getattr(args, "in"))
    atomic_write_json(args.out, summary)
    print(json.dumps(summary, indent=2))
    return 0 if summary["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kplab")
    sub = ap.add_subparsers(dest="cmd", required=True)

    w = sub.add_parser("weights", help="cutoff weight evaluation and facts")
    wsub = w.add_subparsers(dest="weights_cmd", required=True)
    for name in ("eval", "check"):
        p = wsub.add_parser(name)
        p.add_argument("--eps", type=float, required=True)
        p.add_argument("--b", type=float, required=True)
        p.add_argument("--nu", type=float, default=0.0)
        p.add_argument("--order", type=int, default=4)
        p.add_argument("--kind", choices=("poly", "exp"), default="poly")
        if name == "eval":
            p.add_argument("--x", type=float, required=True)
            p.add_argument("--deriv", type=int, default=0, choices=(0, 1, 2, 3))
        else:
            p.add_argument("--samples", type=int, default=10_000)
            p.add_argument("--profile", action="store_true",
                           help="include sampled chi profiles in the JSON")
            p.add_argument("--profile-points", type=int, default=400)
    w.set_defaults(fn=_cmd_weights)

    d = sub.add_parser("datagen", help="initial data construction and checks")
    dsub = d.add_subparsers(dest="datagen_cmd", required=True)
    mk = dsub.add_parser("make")
    mk.add_argument("--kind", default="one-sided-rough",
                    choices=("smooth-packet", "one-sided-rough"))
    mk.add_argument("--nx", type=int, default=256)
    mk.add_argument("--ny", type=int, default=256)
    mk.add_argument("--lx", type=float, default=32.0)
    mk.add_argument("--ly", type=float, default=32.0)
    mk.add_argument("--x0", type=float, default=0.0)
    mk.add_argument("--gamma", type=float, default=2.6)
    mk.add_argument("--xs", type=float, default=-1.0)
    mk.add_argument("--amplitude", type=float, default=0.5)
    mk.add_argument("--center-x", type=float, default=2.0)
    mk.add_argument("--center-y", type=float, default=0.0)
    mk.add_argument("--width-x", type=float, default=4.0)
    mk.add_argument("--width-y", type=float, default=4.0)
    mk.add_argument("--sing-amplitude", type=float, default=1.0)
    mk.add_argument("--sing-width", type=float, default=2.0)
    mk.add_argument("--x-order", type=int, default=1)
    mk.add_argument("--out", required=True)
    ck = dsub.add_parser("check")
    ck.add_argument("--in", required=True)
    ck.add_argument("--x0", type=float, default=0.0)
    ck.add_argument("--n", type=int, default=3)
    ck.add_argument("--s", type=float, default=2.1)
    d.set_defaults(fn=_cmd_datagen)

    g = sub.add_parser("diagnose", help="bracket series and energy identity")
    gsub = g.add_subparsers(dest="diagnose_cmd", required=True)
    for name in ("series", "energy"):
        p = gsub.add_parser(name)
        p.add_argument("--traj", required=True, help="trajectory directory")
        p.add_argument("--alpha", type=_parse_alpha, required=True)
        p.add_argument("--kind", choices=("plain", "prime", "dprime"), default="plain")
        p.add_argument("--eps", type=float, required=True)
        p.add_argument("--b", type=float, required=True)
        p.add_argument("--nu", type=float, default=0.0)
        if name == "energy":
            p.add_argument("--t", type=float, required=True)
            p.add_argument("--probe", type=float, required=True)
    g.set_defaults(fn=_cmd_diagnose)

    s = sub.add_parser("schedule", help="case schedule and dependency closure")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--format", choices=("json", "dot"), default="json")
    s.add_argument("--merge-order4", action="store_true")
    s.set_defaults(fn=_cmd_schedule)

    r = sub.add_parser("run", help="run one scenario config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None)
    r.set_defaults(fn=_cmd_run)

    sw = sub.add_parser("sweep", help="run a directory of scenario configs")
    sw.add_argument("--config-dir", required=True)
    sw.add_argument("-j", "--jobs", type=int, default=1)
    sw.add_argument("--out", default="out")
    sw.set_defaults(fn=_cmd_sweep)

    rp = sub.add_parser("report", help="aggregate scenario reports")
    rp.add_argument("--in", required=True)
    rp.add_argument("--out", default="report.json")
    rp.set_defaults(fn=_cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
