"""Command-line interface: theory, generate, diameter, gw, explore, experiment."""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import gwsim
from .degmodel import JointDegreeDistribution, read_degree_file, sample_sequence
from .errors import DicomoError, DomainError
from .graphalg import diameter_exact, neighborhood_profile
from .graphgen import read_edge_list, write_edge_list
from .harness import ExperimentConfig, generate, run, write_report
from .theory import OffspringDistribution, theory_constants


def _load_json_arg(text: str):
    """Parse inline JSON, or read it from a file when prefixed with '@'."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return json.load(fh)
    return json.loads(text)


def _sequence_from_args(args, rng):
    if args.degrees:
        return read_degree_file(args.degrees)
    if args.dist and args.n:
        dist = JointDegreeDistribution.from_spec(_load_json_arg(args.dist))
        return sample_sequence(dist, args.n, rng)
    raise DomainError("need --degrees or both --dist and --n")


def _model_from_args(args) -> dict:
    model = {"model": args.model}
    if args.model in ("dcm", "dcm-simple"):
        if not args.dist:
            raise DomainError(f"model {args.model} needs --dist")
        model["dist"] = _load_json_arg(args.dist)
    elif args.model == "dout":
        if args.d is None:
            raise DomainError("model dout needs --d")
        model["d"] = args.d
    else:
        if args.p is None:
            raise DomainError(f"model {args.model} needs --p")
        model["p"] = args.p
    return model


def _add_generation_flags(sub):
    sub.add_argument("--degrees", help="bi-degree file, one 'd_in d_out' line per vertex")
    sub.add_argument("--dist", help="distribution spec JSON (or @file)")
    sub.add_argument("--n", type=int, help="number of vertices")
    sub.add_argument(
        "--model",
        choices=["dcm", "dcm-simple", "dout", "binom", "binom-oriented"],
        default="dcm",
    )
    sub.add_argument("--d", type=int, help="out-degree for the dout model")
    sub.add_argument("--p", type=float, help="edge probability for binomial models")
    sub.add_argument("--seed", type=int, default=0)


def cmd_theory(args) -> int:
    dist = JointDegreeDistribution.from_spec(_load_json_arg(args.dist))
    print(theory_constants(dist).to_json())
    return 0


def _generate_graph(args):
    rng = np.random.default_rng(args.seed)
    if args.degrees or args.model in ("dcm", "dcm-simple"):
        if args.degrees:
            seq = read_degree_file(args.degrees)
            from .graphgen import pair_uniform, sample_simple

            if args.model == "dcm-simple":
                return sample_simple(seq, rng)
            return pair_uniform(seq, rng)
        return generate(_model_from_args(args), args.n, rng)
    if args.n is None:
        raise DomainError("need --n")
    return generate(_model_from_args(args), args.n, rng)


def cmd_generate(args) -> int:
    g = _generate_graph(args)
    write_edge_list(g, args.out, seed=args.seed)
    return 0


def cmd_diameter(args) -> int:
    t0 = time.perf_counter()
    if args.graph:
        g = read_edge_list(args.graph)
    else:
        g = _generate_graph(args)
    report = diameter_exact(g, threads=args.threads)
    print(
        json.dumps(
            {
                "diameter": report.diameter,
                "argmax": list(report.argmax) if report.argmax else None,
                "finite_pairs": report.finite_pair_count,
                "n": report.n,
                "m": report.m,
                "wall_time_s": time.perf_counter() - t0,
            }
        )
    )
    return 0


def cmd_gw(args) -> int:
    xi = OffspringDistribution.from_spec(_load_json_arg(args.offspring))
    params: dict = {"op": args.op, "seed": args.seed}
    if args.op == "survival":
        est, err = gwsim.estimate_survival(xi, args.horizon, args.runs, args.seed)
        params.update(horizon=args.horizon)
    elif args.op == "thin":
        est, err = gwsim.thin_event_probability(xi, args.omega, args.t, args.runs, args.seed)
        params.update(omega=args.omega, t=args.t)
    elif args.op == "subcritical":
        est = gwsim.subcritical_decay(xi, args.t, args.runs, args.seed, args.bound)
        err = None
        params.update(t=args.t, bound=args.bound)
    else:
        raise DomainError(f"unknown gw operation {args.op!r}")
    print(json.dumps({"estimate": est, "stderr": err, "runs": args.runs, "params": params}))
    return 0


def cmd_explore(args) -> int:
    rng = np.random.default_rng(args.seed)
    seq = _sequence_from_args(args, rng)
    prof = neighborhood_profile(
        seq,
        args.start,
        args.direction,
        omega=args.omega,
        max_t=args.max_depth,
        rng=rng,
    )
    print(
        json.dumps(
            {
                "start": prof.start,
                "direction": prof.direction,
                "sizes": list(prof.sizes),
                "expansion_time": prof.expansion_time,
                "died_at": prof.died_at,
                "omega": prof.omega,
            }
        )
    )
    return 0


def cmd_experiment(args) -> int:
    with open(args.config) as fh:
        cfg = ExperimentConfig.from_json(fh.read())
    if args.threads is not None:
        cfg = ExperimentConfig(
            kind=cfg.kind,
            model=cfg.model,
            sizes=cfg.sizes,
            replicates=cfg.replicates,
            master_seed=cfg.master_seed,
            omega_rule=cfg.omega_rule,
            threads=args.threads,
            params=cfg.params,
        )
    report = run(cfg)
    write_report(report, csv_path=args.out_csv, json_path=args.out_json, cfg=cfg)
    if args.out_csv is None and args.out_json is None:
        summary = {k: v for k, v in report.items() if k != "records"}
        print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dicomo", description="directed configuration model laboratory"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="limiting constants of a degree distribution")
    p.add_argument("--dist", required=True, help="distribution spec JSON (or @file)")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("generate", help="sample a graph and write an edge list")
    _add_generation_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("diameter", help="exact diameter of a graph")
    _add_generation_flags(p)
    p.add_argument("--graph", help="edge-list path (instead of generation flags)")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_diameter)

    p = sub.add_parser("gw", help="branching-process Monte Carlo")
    p.add_argument("--offspring", required=True, help="offspring pmf JSON (or @file)")
    p.add_argument("--op", required=True, choices=["survival", "thin", "subcritical"])
    p.add_argument("--runs", type=int, default=100_000)
    p.add_argument("--horizon", type=int, default=30)
    p.add_argument("--omega", type=int, default=50)
    p.add_argument("--t", type=int, default=10)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gw)

    p = sub.add_parser("explore", help="lazy neighbourhood exploration of a sequence")
    p.add_argument("--degrees")
    p.add_argument("--dist")
    p.add_argument("--n", type=int)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--direction", choices=["out", "in"], default="out")
    p.add_argument("--omega", type=int, default=50)
    p.add_argument("--max-depth", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("experiment", help="run a configured experiment")
    p.add_argument("--config", required=True, help="ExperimentConfig JSON path")
    p.add_argument("--out-csv")
    p.add_argument("--out-json")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DicomoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
