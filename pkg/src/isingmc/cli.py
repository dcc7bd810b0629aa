"""Command line interface for sweeps, exact solves, and phase timing."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    METHODS,
    ExperimentSpec,
    emit,
    exact_solution_for,
    run_sweep,
    time_phases,
    _make_model,
)
from .model import load_model, save_model
from .rng import stream_rng


def _csv_floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(","))


def _csv_ints(text: str) -> tuple:
    return tuple(int(v) for v in text.split(","))


def _add_family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=["random", "hopfield", "bipartite"], default="random")
    p.add_argument("--n", type=int, default=20, help="vertex count (random/hopfield)")
    p.add_argument("--p", type=float, default=0.2, help="connection probability")
    p.add_argument("--m", type=int, default=4, help="pattern count (hopfield)")
    p.add_argument("--n0", type=int, default=6, help="layer-0 size (bipartite)")
    p.add_argument("--n1", type=int, default=30, help="layer-1 size (bipartite)")
    p.add_argument("--param-lo", type=float, default=-1.0)
    p.add_argument("--param-hi", type=float, default=1.0)


def _add_common_args(p: argparse.ArgumentParser, methods_default: str) -> None:
    _add_family_args(p)
    p.add_argument("--N", type=int, default=1000, help="samples per trial")
    p.add_argument("--K", type=int, default=1000, help="annealing steps")
    p.add_argument("--methods", type=str, default=methods_default,
                   help="comma list from: " + ",".join(METHODS))
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, required=True, help="master seed (required)")
    p.add_argument("--out", type=str, default=".", help="output directory")
    p.add_argument("--format", choices=["csv", "json", "both"], default="both")
    p.add_argument("--pt-replicas", type=int, default=10)
    p.add_argument("--pt-beta-low-fraction", type=float, default=0.01)
    p.add_argument("--pt-sweeps", type=int, default=100)


def _spec_from_args(args, betas, Ns, Ks) -> ExperimentSpec:
    return ExperimentSpec(
        family=args.family,
        n=args.n,
        p=args.p,
        m=args.m,
        n0=args.n0,
        n1=args.n1,
        param_lo=args.param_lo,
        param_hi=args.param_hi,
        betas=betas,
        Ns=Ns,
        Ks=Ks,
        methods=tuple(args.methods.split(",")),
        trials=args.trials,
        seed=args.seed,
        pt_replicas=args.pt_replicas,
        pt_beta_low_fraction=args.pt_beta_low_fraction,
        pt_sweeps=args.pt_sweeps,
    )


def _emit_sweep(result, args) -> None:
    out = Path(args.out)
    written = []
    if args.format in ("csv", "both"):
        written += emit(result, "csv", out / "sweep.csv")
    if args.format in ("json", "both"):
        written += emit(result, "json", out / "sweep.json")
    for path in written:
        print(f"wrote {path}")


def _cmd_sweep_beta(args) -> int:
    spec = _spec_from_args(args, _csv_floats(args.betas), (args.N,), (args.K,))
    _emit_sweep(run_sweep(spec), args)
    return 0


def _cmd_sweep_n(args) -> int:
    spec = _spec_from_args(args, (args.beta,), _csv_ints(args.Ns), (args.K,))
    _emit_sweep(run_sweep(spec), args)
    return 0


def _cmd_sweep_k(args) -> int:
    spec = _spec_from_args(args, (args.beta,), (args.N,), _csv_ints(args.Ks))
    _emit_sweep(run_sweep(spec), args)
    return 0


def _cmd_exact(args) -> int:
    if args.model_file:
        model = load_model(args.model_file)
    else:
        spec = _spec_from_args(args, (args.beta,), (1,), (1,))
        spec.validate()
        model = _make_model(spec, stream_rng(args.seed, 0))
    sol = exact_solution_for(model, args.beta)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(model, out / "model.json")
    with open(out / "exact_vertices.csv", "w") as f:
        f.write("vertex,magnetization\n")
        for i, v in enumerate(sol.magnetization):
            f.write(f"{i},{v!r}\n")
    with open(out / "exact_edges.csv", "w") as f:
        f.write("i,j,pair_moment,covariance\n")
        for (i, j), pm, cv in zip(model.edges, sol.pair_moment, sol.covariance):
            f.write(f"{i},{j},{pm!r},{cv!r}\n")
    import json

    with open(out / "exact.json", "w") as f:
        json.dump(
            {
                "log_partition": sol.log_partition,
                "free_energy": sol.free_energy,
                "magnetization": [float(v) for v in sol.magnetization],
                "pair_moment": [float(v) for v in sol.pair_moment],
                "covariance": [float(v) for v in sol.covariance],
            },
            f,
            indent=1,
        )
        f.write("\n")
    print(f"wrote {out / 'exact_vertices.csv'}, {out / 'exact_edges.csv'}, {out / 'exact.json'}")
    return 0


def _cmd_time_phases(args) -> int:
    spec = _spec_from_args(args, (args.beta,), (args.N,), (args.K,))
    report = time_phases(spec, reps=args.reps)
    out = Path(args.out)
    written = []
    if args.format in ("csv", "both"):
        written += emit(report, "csv", out / "timings.csv")
    if args.format in ("json", "both"):
        written += emit(report, "json", out / "timings.json")
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isingmc",
        description="Monte Carlo estimation benchmarks on Ising models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep-beta", help="MAE of each method across a beta grid")
    _add_common_args(p, "mci,smci,ais,ais+smci")
    p.add_argument("--betas", type=str, default="0.5,1.0,2.0", help="comma list")
    p.set_defaults(func=_cmd_sweep_beta)

    p = sub.add_parser("sweep-n", help="MAE against sample count N at fixed beta")
    _add_common_args(p, "mci,smci,ais,ais+smci")
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--Ns", type=str, default="100,316,1000,3162", help="comma list")
    p.set_defaults(func=_cmd_sweep_n)

    p = sub.add_parser("sweep-k", help="MAE against annealing length K at fixed beta")
    _add_common_args(p, "mci,smci,ais,ais+smci")
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--Ks", type=str, default="10,50,100,500,1000", help="comma list")
    p.set_defaults(func=_cmd_sweep_k)

    p = sub.add_parser("compare-pt", help="annealed-weighted versus tempering-based methods")
    _add_common_args(p, "smci,ais+smci,pt+smci")
    p.add_argument("--betas", type=str, default="0.5,1.0,2.0", help="comma list")
    p.set_defaults(func=_cmd_sweep_beta)

    p = sub.add_parser("exact", help="exact moments of one model")
    _add_family_args(p)
    p.add_argument("--model-file", type=str, default=None, help="JSON model to load instead")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=str, default=".")
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("time-phases", help="median sampling/weights/expectations wall clock")
    _add_common_args(p, "ais,ais+smci")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=3)
    p.set_defaults(func=_cmd_time_phases)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
