"""Scenario-driven batch runner.

Subcommands:
    check  <scenario> [--format table|jsonl] [--out FILE] [--parallel]
    evolve <scenario> --s K [--out FILE]
    info   <scenario>

Exit status is 0 exactly when every executed check passed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bbgky import marginals_from_correlations, solve_bbgky_series
from .checks import run_checks
from .combinatorics import bell_number, set_partitions, nonempty_subsets
from .config import ScenarioConfig, load_scenario
from .correlations import CorrelationSequence, density_to_correlations
from .errors import ConfigError, CorrdynError
from .hamiltonian import EvolutionCache, InteractionSpec
from .hilbert import (
    ManyBodyOperator,
    OperatorSequence,
    random_sequence,
    read_sequence,
    write_operator,
)
from .report import render_jsonl, render_table


def _spec_of(config: ScenarioConfig) -> InteractionSpec:
    return InteractionSpec(
        d=config.d,
        one_body=config.one_body,
        potentials=config.potentials,
        hbar=config.hbar,
        matrix_side_cap=config.matrix_cap,
        enforce_potential_symmetry=config.strict_potentials,
    )


def _initial_correlations(config: ScenarioConfig) -> CorrelationSequence:
    init = config.initial
    if init.kind == "chaos":
        g1 = ManyBodyOperator(1, config.d, init.g1, config.stats)
        return CorrelationSequence(
            d=config.d, stats=config.stats, n_max=config.n_max, f0=0j, components={1: g1}
        )
    if init.kind == "random":
        rng = np.random.default_rng(init.seed)
        d_seq = random_sequence(
            rng, config.d, config.stats, config.n_max, positive=init.positive, f0=1.0
        )
        return density_to_correlations(d_seq)
    with init.path.open() as fh:
        d_seq = read_sequence(fh)
    if d_seq.d != config.d or d_seq.stats != config.stats:
        raise ConfigError(
            f"initial sequence file metadata (d={d_seq.d}, stats={d_seq.stats}) "
            f"does not match the scenario"
        )
    if d_seq.n_max != config.n_max:
        # truncate or zero-pad to the scenario truncation order
        kept = {
            n: d_seq.components[n]
            for n in range(1, min(d_seq.n_max, config.n_max) + 1)
        }
        d_seq = OperatorSequence(
            d=d_seq.d, stats=d_seq.stats, n_max=config.n_max, f0=d_seq.f0, components=kept
        )
    return density_to_correlations(d_seq)


def cmd_check(args: argparse.Namespace) -> int:
    config = load_scenario(args.scenario)
    report = run_checks(config, parallel=args.parallel)
    text = render_jsonl(report) if args.format == "jsonl" else render_table(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if report.overall_pass else 1


def cmd_evolve(args: argparse.Namespace) -> int:
    config = load_scenario(args.scenario)
    s = args.s
    if not 1 <= s <= config.n_max:
        raise ConfigError(f"--s must lie in 1..{config.n_max}")
    g0 = _initial_correlations(config)
    f0 = marginals_from_correlations(g0)
    cache = EvolutionCache(_spec_of(config))
    out = sys.stdout if not args.out else Path(args.out).open("w")
    try:
        for t in config.times:
            f_t = solve_bbgky_series(f0, t, s, cache)
            out.write(f"time {t:.17g}\n")
            write_operator(f_t, out)
    finally:
        if args.out:
            out.close()
    return 0


def cmd_info(args: argparse.Namespace) -> int:
    config = load_scenario(args.scenario)
    print(f"scenario  {args.scenario} (digest {config.digest})")
    print(f"system    d={config.d} stats={config.stats} n_max={config.n_max} hbar={config.hbar}")
    print(f"couplings {sorted(config.potentials) or 'none (free)'}")
    print(f"checks    {' '.join(config.checks) or '(none)'}")
    print(f"times     {' '.join(str(t) for t in config.times)}")
    print()
    print("order  matrix side  partitions  hierarchy terms")
    for n in range(1, config.n_max + 1):
        terms = 0
        for p in set_partitions(range(1, n + 1)):
            if p.size == 1:
                continue
            combos = 1
            for block in p.blocks:
                combos *= len(nonempty_subsets(block))
            terms += combos
        print(f"{n:5d}  {config.d**n:11d}  {bell_number(n):10d}  {terms:15d}")
    cap_ok = config.d**config.n_max <= config.matrix_cap
    print(f"\nmatrix cap {config.matrix_cap}: {'ok' if cap_ok else 'EXCEEDED'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrdyn",
        description="Verification suites and reduced-operator evolution for "
        "finite quantum correlation dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="run the scenario's verification checks")
    check.add_argument("scenario")
    check.add_argument("--format", choices=("table", "jsonl"), default="table")
    check.add_argument("--out", default=None, metavar="FILE")
    check.add_argument("--parallel", action="store_true")
    check.set_defaults(func=cmd_check)

    evolve = sub.add_parser("evolve", help="write the s-particle reduced operator per time")
    evolve.add_argument("scenario")
    evolve.add_argument("--s", type=int, required=True)
    evolve.add_argument("--out", default=None, metavar="FILE")
    evolve.set_defaults(func=cmd_evolve)

    info = sub.add_parser("info", help="print dimensions and partition-term cost estimates")
    info.add_argument("scenario")
    info.set_defaults(func=cmd_info)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CorrdynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
