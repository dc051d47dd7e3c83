"""Command-line interface.

Subcommands: ``construct`` dumps a code's position sets, ``simulate``
runs a Monte Carlo sweep and writes the metrics CSV, ``latency`` prints
the cycle/latency table. Every subcommand accepts ``--config FILE`` with
plain ``key=value`` lines mirroring the long flag names; flags given on
the command line override the file. Exit status 0 on success, 2 on
parameter errors.
"""

import argparse
import sys

import numpy as np

from .latency import LatencyParams, average_latency, cycles_to_seconds, worst_case_latency
from .code import construct_code
from .sim import SimParams, emit_csv, run_experiment


def _onoff(value):
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"expected on/off, got {value!r}")
    return value == "on"


def _require(args, *names):
    # required flags are validated after the config file has been applied
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            raise ValueError(f"--{name} is required (flag or config file)")


def _cmd_construct(args):
    _require(args, "n", "k")
    code = construct_code(args.n, args.k, args.id_len, args.id_mode, args.design_snr)
    print(f"N={code.N}")
    print(f"K={code.K}")
    print(f"id_mode={code.id_mode}")
    for name, positions in (
        ("info", code.info_positions),
        ("id", code.id_positions),
        ("frozen", code.frozen_positions),
    ):
        print(f"{name}=" + ",".join(str(int(p)) for p in sorted(positions)))
    return 0


def _cmd_simulate(args):
    _require(args, "snr-start", "snr-stop", "trials")
    params = SimParams(
        n1=args.n1, n2=args.n2, k=args.k, id_len=args.id_len, id_mode=args.id_mode,
        design_snr_db=args.design_snr, c1=args.c1, c2=args.c2, l1=args.l1,
        lmax=args.lmax, early_stop=args.early_stop, ue_sent=args.ue_sent,
    )
    if args.snr_step <= 0:
        raise ValueError("snr-step must be > 0")
    points = list(np.arange(args.snr_start, args.snr_stop + args.snr_step / 2, args.snr_step))
    rows = run_experiment(params, points, args.trials, args.seed, jobs=args.jobs)
    if args.out:
        emit_csv(rows, args.out)
    else:
        emit_csv(rows, sys.stdout)
    if args.figures:
        from .plots import plot_simulation

        for path in plot_simulation(rows, args.figures):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_latency(args):
    entries = []
    for n_sclmax in args.n_sclmax:
        p = LatencyParams(
            n1=args.n1, n2=args.n2, k1=args.k1, k2=args.k2, c1=args.c1, c2=args.c2,
            l1=args.l1, lmax=args.lmax, n_sclmax=n_sclmax, t_sort=args.t_sort,
            e1=args.e1, e2=args.e2, f_hz=args.f_hz,
        )
        worst = worst_case_latency(p)
        avg = average_latency(p)
        entries.append({
            "n_sclmax": n_sclmax,
            "worst_cycles": worst,
            "worst_us": cycles_to_seconds(worst, p.f_hz) * 1e6,
            "avg_cycles": avg,
            "avg_us": cycles_to_seconds(avg, p.f_hz) * 1e6,
        })
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        print("n_sclmax,worst_cycles,worst_us,avg_cycles,avg_us", file=out)
        for e in entries:
            print(
                f"{e['n_sclmax']},{e['worst_cycles']:.6g},{e['worst_us']:.6g},"
                f"{e['avg_cycles']:.6g},{e['avg_us']:.6g}",
                file=out,
            )
    finally:
        if args.out:
            out.close()
    if args.figures:
        from .plots import plot_latency

        for path in plot_latency(entries, args.figures):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="polarbd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="print a code's position sets")
    c.add_argument("--config", default=None)
    c.add_argument("--n", type=int, default=None, help="code length, power of two")
    c.add_argument("--k", type=int, default=None, help="payload bits")
    c.add_argument("--id-len", type=int, default=16)
    c.add_argument("--id-mode", type=int, default=1, choices=(1, 2, 3))
    c.add_argument("--design-snr", type=float, default=0.0)
    c.set_defaults(func=_cmd_construct)

    s = sub.add_parser("simulate", help="Monte Carlo sweep, CSV out")
    s.add_argument("--config", default=None)
    s.add_argument("--n1", type=int, default=256)
    s.add_argument("--n2", type=int, default=512)
    s.add_argument("--k", type=int, default=57)
    s.add_argument("--id-len", type=int, default=16)
    s.add_argument("--id-mode", type=int, default=1, choices=(1, 2, 3))
    s.add_argument("--design-snr", type=float, default=0.0)
    s.add_argument("--c1", type=int, default=44)
    s.add_argument("--c2", type=int, default=5)
    s.add_argument("--l1", type=int, default=2)
    s.add_argument("--lmax", type=int, default=8)
    s.add_argument("--snr-start", type=float, default=None)
    s.add_argument("--snr-stop", type=float, default=None)
    s.add_argument("--snr-step", type=float, default=1.0)
    s.add_argument("--trials", type=int, default=None, help="transmissions per SNR point")
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--early-stop", type=_onoff, default=True, metavar="on|off")
    s.add_argument("--ue-sent", default="mixed", choices=("on", "off", "mixed"))
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.add_argument("--out", default=None, help="CSV destination (default stdout)")
    s.add_argument("--figures", default=None, metavar="DIR", help="also render PNG figures")
    s.set_defaults(func=_cmd_simulate)

    l = sub.add_parser("latency", help="cycle-count model table, CSV out")
    l.add_argument("--config", default=None)
    l.add_argument("--n1", type=int, default=256)
    l.add_argument("--n2", type=int, default=512)
    l.add_argument("--k1", type=int, default=57)
    l.add_argument("--k2", type=int, default=57)
    l.add_argument("--c1", type=int, default=44)
    l.add_argument("--c2", type=int, default=5)
    l.add_argument("--l1", type=int, default=2)
    l.add_argument("--lmax", type=int, default=8)
    l.add_argument("--n-sclmax", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    l.add_argument("--t-sort", type=int, default=None, help="sorter cycles (default C2)")
    l.add_argument("--e1", type=float, default=1.0, help="early-stop fraction, short code")
    l.add_argument("--e2", type=float, default=1.0, help="early-stop fraction, long code")
    l.add_argument("--f-hz", type=float, default=1e9)
    l.add_argument("--out", default=None, help="CSV destination (default stdout)")
    l.add_argument("--figures", default=None, metavar="DIR", help="also render PNG figures")
    l.set_defaults(func=_cmd_latency)
    return parser, sub


def _load_config(path):
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, raw = line.partition("=")
            values[key.strip()] = raw.strip()
    return values


def _apply_config(subparser, values):
    actions = {a.dest: a for a in subparser._actions}
    for key, raw in values.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in ("help", "config", "func"):
            raise ValueError(f"unknown config key {key!r}")
        if action.nargs in ("+", "*"):
            value = [action.type(tok) for tok in raw.replace(",", " ").split()]
        elif action.choices and action.type is None:
            if raw not in action.choices:
                raise ValueError(f"config key {key!r}: {raw!r} not in {action.choices}")
            value = raw
        elif action.type is not None:
            value = action.type(raw)
        else:
            value = raw
        if action.choices and value not in action.choices:
            raise ValueError(f"config key {key!r}: {value!r} not in {action.choices}")
        subparser.set_defaults(**{dest: value})


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config(sub.choices[args.command], _load_config(args.config))
            args = parser.parse_args(argv)
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"polarbd: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
