"""Command-line front end.

Subcommands:
  run        one experiment, one CSV + metadata sidecar
  sweep      the same experiment across capacity or threshold values
  oracle     offline diagnostics for an instance (optimal packing etc.)
  instances  write the built-in configs as editable JSON

Exit codes: 0 success, 1 configuration problem (bad flags, bad config
file, invalid parameters), 2 contract violation during a run.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .domain import ALGORITHMS, ExperimentConfig, ProblemInstance
from .harness import (
    RunFailure,
    builtin_instance,
    horizon_scaled_delta,
    run_experiment,
    sweep_configs,
    write_outputs,
)
from .oracle import (
    allocation_equivalent_same,
    lower_bound_constant,
    max_gap,
    max_packable_arms,
    min_optimal_arm_count,
    solve_knapsack,
)

BUILTIN_IDS = ("1", "2", "3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threshalloc",
        description="Experiments for online allocation under threshold activation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--instance",
            required=True,
            help="built-in instance id (1, 2, 3) or path to a config JSON",
        )
        p.add_argument("--algorithm", choices=ALGORITHMS, help="override the algorithm")
        p.add_argument("--horizon", type=int, help="rounds per repeat")
        p.add_argument("--repeats", type=int, help="independent repeats")
        p.add_argument("--seed", type=int, help="base seed (repeat r uses seed XOR r)")
        p.add_argument("--delta", type=float, help="search failure-rate budget")
        p.add_argument("--epsilon", type=float, help="lower bound on active mean rewards")
        p.add_argument("--gamma", type=float, help="threshold resolution (per-arm learner)")
        p.add_argument(
            "--reward",
            choices=("bernoulli", "uniform"),
            help="reward model override",
        )
        p.add_argument(
            "--delta-horizon-alpha",
            type=float,
            default=None,
            metavar="ALPHA",
            help="set delta to T^(-(ln T)^(-ALPHA)) for the final horizon T",
        )
        p.add_argument("--workers", type=int, default=1, help="parallel repeat processes")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")

    p_run = sub.add_parser("run", help="run one experiment, write CSV + metadata")
    add_config_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="run an experiment across parameter values")
    add_config_flags(p_sweep)
    p_sweep.add_argument(
        "--param",
        required=True,
        choices=("capacity", "theta"),
        help="instance parameter to vary",
    )
    p_sweep.add_argument(
        "--values",
        required=True,
        help="comma-separated parameter values, e.g. 10,20,30",
    )

    p_oracle = sub.add_parser("oracle", help="offline diagnostics for an instance")
    p_oracle.add_argument(
        "--instance",
        required=True,
        help="built-in instance id (1, 2, 3) or path to a config JSON",
    )

    p_inst = sub.add_parser("instances", help="write built-in configs as JSON")
    p_inst.add_argument("--out", default="out", help="output directory (default: ./out)")

    return parser


# ---------------------------------------------------------------------------
# config assembly
# ---------------------------------------------------------------------------


def _load_config(args: argparse.Namespace) -> tuple[ExperimentConfig, str]:
    """Resolve --instance plus overrides into a config and an output label."""
    ref = args.instance
    reward = getattr(args, "reward", None)
    if ref in BUILTIN_IDS:
        config = builtin_instance(int(ref), reward_kind=reward or "bernoulli")
        label = f"instance{ref}"
    else:
        path = Path(ref)
        if not path.is_file():
            raise ValueError(f"--instance must be 1, 2, 3 or a config file; got {ref!r}")
        config = ExperimentConfig.from_json(path.read_text())
        label = path.stem
        if reward is not None and reward != config.instance.reward_kind:
            inst = config.instance
            config = config.with_updates(
                instance=ProblemInstance(
                    num_arms=inst.num_arms,
                    capacity=inst.capacity,
                    mean_rewards=inst.mean_rewards,
                    thresholds=inst.thresholds,
                    reward_kind=reward,
                    reward_halfwidth=0.1 if reward == "uniform" else None,
                )
            )

    updates = {}
    for field in ("algorithm", "horizon", "repeats", "delta", "epsilon", "gamma"):
        value = getattr(args, field, None)
        if value is not None:
            updates[field] = value
    if getattr(args, "seed", None) is not None:
        updates["base_seed"] = args.seed
    if updates:
        config = config.with_updates(**updates)
    if getattr(args, "delta_horizon_alpha", None) is not None:
        config = config.with_updates(
            delta=horizon_scaled_delta(config.horizon, args.delta_horizon_alpha)
        )
    return config, label


def _stem(label: str, config: ExperimentConfig) -> str:
    return f"{label}_{config.algorithm}_{config.instance.reward_kind}"


def _print_summary(trace, csv_path: Path) -> None:
    converged = [c for c in trace.convergence_rounds if c is not None]
    print(f"wrote {csv_path}")
    print(f"final mean cumulative regret: {float(trace.mean_regret[-1])!r}")
    if converged:
        print(
            f"converged repeats: {len(converged)}/{trace.n_repeats} "
            f"(median round {float(np.median(converged)):g})"
        )
    else:
        print(f"converged repeats: 0/{trace.n_repeats}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_run(args: argparse.Namespace) -> int:
    config, label = _load_config(args)
    trace = run_experiment(config, workers=args.workers)
    csv_path, _ = write_outputs(config, trace, args.out, _stem(label, config))
    _print_summary(trace, csv_path)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config, label = _load_config(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ValueError(f"--values must be comma-separated numbers: {exc}") from None
    if not values:
        raise ValueError("--values must name at least one value")
    for value, variant in sweep_configs(config, args.param, values):
        trace = run_experiment(variant, workers=args.workers)
        stem = f"{_stem(label, variant)}_{args.param}{value:g}"
        csv_path, _ = write_outputs(variant, trace, args.out, stem)
        _print_summary(trace, csv_path)
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    config, _ = _load_config(args)
    inst = config.instance
    sol = solve_knapsack(inst.mean_rewards, inst.thresholds, inst.capacity)
    print(f"arms: {inst.num_arms}")
    print(f"capacity: {inst.capacity!r}")
    print(f"optimal_set: {' '.join(str(i) for i in sol.selected)}")
    print(f"optimal_value: {sol.total_value!r}")
    print(f"optimal_weight: {sol.total_weight!r}")
    print(f"leftover: {sol.leftover!r}")
    print(f"gamma_star: {sol.gamma_star!r}")
    print(f"max_gap: {max_gap(inst.mean_rewards, inst.thresholds, inst.capacity)!r}")
    if inst.num_arms <= 20:
        k_min = min_optimal_arm_count(inst.mean_rewards, inst.thresholds, inst.capacity)
        print(f"min_optimal_arms: {k_min}")
    else:
        print("min_optimal_arms: n/a (enumeration limited to 20 arms)")
    print(f"max_packable_arms: {max_packable_arms(inst.thresholds, inst.capacity)}")
    shared = inst.thresholds[0]
    if shared > 0.0 and all(t == shared for t in inst.thresholds):
        eq = allocation_equivalent_same(shared, inst.capacity, inst.num_arms)
        print(f"equal_split_arms: {eq.m_arms}")
        print(f"equal_split_level: {eq.theta_hat!r}")
        try:
            const = lower_bound_constant(inst.mean_rewards, eq.m_arms)
        except ValueError as exc:
            print(f"lower_bound_constant: n/a ({exc})")
        else:
            print(f"lower_bound_constant: {const!r}")
    else:
        print("equal_split_arms: n/a (thresholds differ across arms)")
        print("lower_bound_constant: n/a (thresholds differ across arms)")
    return 0


def _cmd_instances(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for ident in (1, 2, 3):
        path = out / f"instance{ident}.json"
        with open(path, "w", newline="\n") as fh:
            fh.write(builtin_instance(ident).to_json() + "\n")
        print(f"wrote {path}")
    return 0


COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "instances": _cmd_instances,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are config errors here.
        return 0 if exc.code in (0, None) else 1
    try:
        return COMMANDS[args.command](args)
    except RunFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
