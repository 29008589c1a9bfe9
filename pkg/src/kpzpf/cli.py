"""Command-line front end: simulate, compare, symmetry, plotdata."""

from __future__ import annotations

import argparse
import sys

from .coalesce import COIN_FLIP, REGENERATE, polya_urn
from .harness import (
    DESK_SCALE,
    FULL_SCALE,
    CfbmModel,
    DataBank,
    ExperimentSpec,
    LppModel,
    compare,
    emit_plot_data,
    run_experiment,
    symmetry_table,
)
from .lpp import StationaryBoundary

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpzpf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run replicas and write a data bank")
    sim.add_argument("--model", choices=("cfbm", "lpp"), required=True)
    sim.add_argument("--rule", choices=("coinflip", "regenerate", "polya"), default="coinflip")
    sim.add_argument("--alpha", default="1", help="Polya index; a real number or 'inf'")
    sim.add_argument("--hurst", type=float, default=2.0 / 3.0)
    sim.add_argument("--n", type=int, default=None)
    sim.add_argument("--replicas", type=int, default=None)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.add_argument("--full-scale", action="store_true", help="paper-scale n and replicas")
    sim.add_argument("--boundary", choices=("stationary", "none"), default="stationary")
    sim.add_argument("--rho", type=float, default=0.5)
    sim.add_argument("--trim", type=int, default=2)
    sim.add_argument("--workers", type=int, default=None)

    cmp_p = sub.add_parser("compare", help="pairwise K-S p-value table across banks")
    cmp_p.add_argument("--banks", nargs="+", required=True)
    cmp_p.add_argument("--stat", choices=("delta0", "jump"), default="delta0")
    cmp_p.add_argument("--k", type=int, default=1)
    cmp_p.add_argument("--field", choices=("upper", "lower", "both"), default="both")
    cmp_p.add_argument("--out", required=True)

    sym = sub.add_parser("symmetry", help="upper-vs-lower K-S table per bank")
    sym.add_argument("--banks", nargs="+", required=True)
    sym.add_argument("--out", required=True)

    plot = sub.add_parser("plotdata", help="emit survivor-curve or gap-histogram rows")
    plot.add_argument("--bank", required=True)
    plot.add_argument("--what", choices=("survivors", "gaps"), required=True)
    plot.add_argument("--out", required=True)
    return parser


def _simulate(args) -> None:
    scale = FULL_SCALE if args.full_scale else DESK_SCALE
    n_default, replicas_default = scale[args.model]
    n = args.n if args.n is not None else n_default
    replicas = args.replicas if args.replicas is not None else replicas_default
    if args.model == "cfbm":
        if args.rule == "coinflip":
            rule = COIN_FLIP
        elif args.rule == "regenerate":
            rule = REGENERATE
        else:
            rule = polya_urn(float(args.alpha))
        model = CfbmModel(rule=rule, h=args.hurst)
    else:
        boundary = None if args.boundary == "none" else StationaryBoundary(args.rho)
        model = LppModel(boundary=boundary)
    spec = ExperimentSpec(
        model=model,
        n=n,
        replicas=replicas,
        root_seed=args.seed,
        trim_per_end=args.trim,
        output_path=args.out,
    )
    bank = run_experiment(spec, workers=args.workers)
    done = spec.replicas - len(bank.skipped)
    print(f"wrote {args.out}: {done} replicas ({len(bank.skipped)} skipped)")


def _write_table(table, out: str) -> None:
    table.save(out)
    table.save_machine(out + ".tsv")
    print(table.text())
    print(f"wrote {out} and {out}.tsv")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        _simulate(args)
    elif args.command == "compare":
        banks = [DataBank.load(p) for p in args.banks]
        _write_table(compare(banks, statistic=args.stat, k=args.k, field=args.field), args.out)
    elif args.command == "symmetry":
        banks = [DataBank.load(p) for p in args.banks]
        _write_table(symmetry_table(banks), args.out)
    elif args.command == "plotdata":
        emit_plot_data(DataBank.load(args.bank), args.what, args.out)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
