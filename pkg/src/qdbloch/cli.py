"""Command-line entry point: run, sweep, validate, list, plot."""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .errors import CflViolation, ConfigError, ConvergenceFailure, NonFiniteField, QDBlochError
from .runner import SWEEP_PARAMS, build_grid_spec, build_medium_params, build_pulse, default_steps, run_scenario, sweep
from .scenario import REGISTRY, apply_overrides, parse_override, resolve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _scenario(args):
    s = resolve(args.scenario)
    if getattr(args, "override", None):
        pairs = dict(parse_override(o) for o in args.override)
        s = apply_overrides(s, pairs)
    return s


def _print_summary(summary: dict) -> None:
    for k, v in summary.items():
        print(f"  {k:28s} {v}")


def cmd_run(args) -> int:
    s = _scenario(args)
    report = run_scenario(s)
    out = args.out or os.path.join("runs", s.name)
    report.write(out)
    print(f"{s.name}: {report.summary['n_steps']} steps in {report.elapsed:.1f} s -> {out}")
    _print_summary(report.summary)
    return EXIT_OK


def cmd_sweep(args) -> int:
    s = _scenario(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    reports = sweep(s, args.param, values, workers=args.jobs)
    out = args.out or os.path.join("runs", f"{s.name}-sweep-{args.param}")
    os.makedirs(out, exist_ok=True)
    keys = ["max_inversion", "final_c1", "max_deep_valence", "min_eig", "transmitted_area_over_pi"]
    with open(os.path.join(out, "sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([args.param] + keys)
        for v, r in zip(values, reports):
            r.write(os.path.join(out, f"{args.param}={v}"))
            w.writerow([v] + [repr(float(r.summary[k])) for k in keys])
            print(f"{args.param}={v}: " + ", ".join(f"{k}={r.summary[k]:.4g}" for k in keys))
    return EXIT_OK


def cmd_validate(args) -> int:
    s = _scenario(args)
    params = build_medium_params(s)
    params.R.check_symmetry()
    spec = build_grid_spec(s)
    pulse = build_pulse(s)
    n = s.n_steps or (10_000 if s.field_free else default_steps(s, spec))
    print(f"{s.name}: ok")
    print(f"  levels        n_c={s.n_c} n_v={s.n_v} valence={s.valence_energies()} (hbar omega0)")
    print(f"  grid          nz={spec.nz} dz={spec.dz:.4e} m dt={spec.dt:.4e} s courant={spec.courant:.3f}")
    print(f"  steps         {n}")
    print(f"  pulse         E0={pulse.E0 if pulse else 0.0:.4e} V/m tau={s.tau:.3e} s k={s.k}")
    print(f"  coulomb       R0={s.R0:.3e} J seed={s.seed} mode={s.mode}")
    return EXIT_OK


def cmd_list(args) -> int:
    for name, s in REGISTRY.items():
        print(f"{name:22s} n_v={s.n_v} splitting={s.valence_splitting:g} R0={s.R0:.0e} mode={s.mode}"
              f"{' field-free' if s.field_free else ''}")
    return EXIT_OK


def cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = os.path.join(args.run_dir, "probes.csv")
    if not os.path.exists(path):
        raise ConfigError(f"no probes.csv in {args.run_dir}")
    with open(path) as fh:
        header = next(csv.reader(fh))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    col = {c: data[:, i] for i, c in enumerate(header)}
    t = col["t"] * 1e12
    fig, ax = plt.subplots(figsize=(7, 4))
    for c in header:
        if c.startswith("pop_"):
            ax.plot(t, col[c], label=c[4:])
    ax.set_xlabel("t (ps)")
    ax.set_ylabel("population")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(args.run_dir, "populations.svg"))
    plt.close(fig)
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(t, col["E_probe"], lw=0.6)
    ax.set_xlabel("t (ps)")
    ax.set_ylabel("E at probe cell (V/m)")
    fig.tight_layout()
    fig.savefig(os.path.join(args.run_dir, "field.svg"))
    plt.close(fig)
    print(f"wrote populations.svg and field.svg to {args.run_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdbloch", description="Coulomb-augmented quantum-dot Maxwell-Bloch simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_args(sp):
        sp.add_argument("scenario", help="registry name or scenario file")
        sp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    sp = sub.add_parser("run", help="run one scenario")
    scenario_args(sp)
    sp.add_argument("--out", help="output directory (default runs/<name>)")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run a scenario over several values of one parameter")
    scenario_args(sp)
    sp.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel (default 1)")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="check a scenario without running it")
    scenario_args(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("list", help="list registry scenarios")
    sp.set_defaults(func=cmd_list)

    sp = sub.add_parser("plot", help="render probes.csv of a run directory to SVG")
    sp.add_argument("run_dir")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (NonFiniteField, ConvergenceFailure, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, CflViolation, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QDBlochError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
