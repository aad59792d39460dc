"""Command-line front end: sweep, episode, validate, score."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import SimConfig, load_config
from .errors import SimError
from .harness import (
    ALGORITHMS,
    audit_episode,
    composite_score,
    run_point,
    run_sweep,
)
from .results import read_results, write_run

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _parse_vehicle_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty vehicle list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iov-sim",
        description="Vehicular-network routing simulator and benchmark sweep.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (defaults used if omitted)")
    common.add_argument("--seed", type=int, help="master seed override")

    sweep = sub.add_parser(
        "sweep", parents=[common],
        help="run the density sweep and write the result table",
    )
    sweep.add_argument(
        "--algorithm", default="all",
        help="one of %s, or 'all'" % ", ".join(ALGORITHMS),
    )
    sweep.add_argument(
        "--vehicles", type=_parse_vehicle_list,
        help="comma-separated density override, e.g. 50,100,200",
    )
    sweep.add_argument("--episodes", type=int, help="episodes per point override")
    sweep.add_argument("--out", help="output path (default results.<format>)")
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")

    episode = sub.add_parser(
        "episode", parents=[common],
        help="run one episode and print its hop-by-hop trace",
    )
    episode.add_argument("--algorithm", default="proposed", choices=ALGORITHMS)
    episode.add_argument("--vehicles", type=int, help="vehicle count (default: first sweep density)")

    validate = sub.add_parser(
        "validate", parents=[common],
        help="run traced episodes and audit every delivered path",
    )
    validate.add_argument("--algorithm", default="proposed", choices=ALGORITHMS)
    validate.add_argument("--vehicles", type=int, help="vehicle count (default: first sweep density)")
    validate.add_argument("--episodes", type=int, help="episodes to audit (default: config value)")

    score = sub.add_parser(
        "score",
        help="recompute composite scores from a result table",
    )
    score.add_argument("results", help="CSV or JSON result table to score")

    return parser


def _load(args) -> SimConfig:
    cfg = load_config(args.config)
    sim = cfg.sim
    if getattr(args, "seed", None) is not None:
        sim = dataclasses.replace(sim, seed=args.seed)
    if getattr(args, "episodes", None) is not None:
        sim = dataclasses.replace(sim, episodes=args.episodes)
    vehicles = getattr(args, "vehicles", None)
    if isinstance(vehicles, tuple):
        sim = dataclasses.replace(sim, n_vehicles=vehicles)
    elif isinstance(vehicles, int):
        sim = dataclasses.replace(sim, n_vehicles=(vehicles,))
    return dataclasses.replace(cfg, sim=sim)


def _fmt(value, spec: str = ".6g") -> str:
    return "-" if value is None else format(value, spec)


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if args.algorithm == "all":
        algorithms = ALGORITHMS
    elif args.algorithm in ALGORITHMS:
        algorithms = (args.algorithm,)
    else:
        print(f"error: unknown algorithm '{args.algorithm}'", file=sys.stderr)
        return EXIT_USAGE
    rows = run_sweep(cfg, algorithms)
    out = args.out or f"results.{args.format}"
    paths = write_run(cfg, rows, out, args.format)
    for row in rows:
        print(
            f"n={row.n_vehicles:<4d} {row.algorithm:<8s} "
            f"pdr={row.pdr:.3f} interruptions={row.interruptions_mean:.3f} "
            f"ber={_fmt(row.ber_mean, '.3e')} "
            f"throughput={row.throughput_bps:.1f} "
            f"delay={_fmt(row.delay_mean_s, '.4f')} "
            f"hops={_fmt(row.path_len_mean, '.2f')} "
            f"score={_fmt(row.composite_score, '.1f')}"
        )
    print(f"wrote {', '.join(str(p) for p in paths)}")
    return EXIT_OK


def _single_point_config(args) -> tuple[SimConfig, int]:
    cfg = _load(args)
    n = cfg.sim.n_vehicles[0]
    return cfg, n


def cmd_episode(args) -> int:
    cfg, n = _single_point_config(args)
    cfg = dataclasses.replace(cfg, sim=dataclasses.replace(cfg.sim, episodes=1))
    result = run_point(cfg, args.algorithm, n, 0, collect_traces=True)
    trace = result.traces[0]
    m = trace.metrics
    print(
        f"episode: algorithm={args.algorithm} n={n} src={trace.src} dst={trace.dst} "
        f"outcome={trace.outcome}"
    )
    for i, hop in enumerate(trace.hops, start=1):
        print(
            f"  {i:2d}. {hop.sender:>4d} -> {hop.receiver:<4d} mode={hop.mode:<8s} "
            f"dist={hop.distance_m:7.1f}m prr={hop.prr:.4f} ber={hop.ber:.3e} "
            f"rate={hop.rate_bps:.3e}"
            + (" switched" if hop.switched else "")
        )
    if trace.carries:
        print(f"  carried for {trace.carries} slot(s)")
    print(
        f"hops={m.hops} delay={m.e2e_delay_s:.4f}s "
        f"interruptions={m.interruptions} delivered={m.delivered}"
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg, n = _single_point_config(args)
    result = run_point(cfg, args.algorithm, n, 0, collect_traces=True)
    delivered = 0
    failed = 0
    for idx, trace in enumerate(result.traces):
        if trace.outcome != "delivered":
            continue
        delivered += 1
        problems = audit_episode(trace, cfg)
        if problems:
            failed += 1
            for p in problems:
                print(f"episode {idx}: {p}")
    print(
        f"validated {delivered} delivered episode(s) of {len(result.traces)}: "
        f"{failed} with violations"
    )
    return EXIT_OK if failed == 0 else EXIT_FAILED


def cmd_score(args) -> int:
    rows = read_results(args.results)
    if not rows:
        print("error: empty result table", file=sys.stderr)
        return EXIT_FAILED
    groups: dict[int, list] = {}
    for row in rows:
        groups.setdefault(row.n_vehicles, []).append(row)
    mismatch = False
    for n, group in groups.items():
        if len(group) < 2:
            print(f"n={n}: need at least two algorithms to score, skipping")
            continue
        scores = composite_score(group)
        for row, score in zip(group, scores):
            note = ""
            if row.composite_score is not None and abs(row.composite_score - score) > 1e-6:
                note = f"  (stored {row.composite_score:.3f} differs)"
                mismatch = True
            print(f"n={n:<4d} {row.algorithm:<8s} score={score:6.1f}{note}")
    return EXIT_FAILED if mismatch else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "sweep": cmd_sweep,
        "episode": cmd_episode,
        "validate": cmd_validate,
        "score": cmd_score,
    }
    try:
        return handlers[args.command](args)
    except SimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
