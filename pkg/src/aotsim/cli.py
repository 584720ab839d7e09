"""Command-line interface.

Exit codes: 0 success, 2 configuration problem, 3 runtime contract violation.
"""

import argparse
import sys

from .config import apply_preset, load_config
from .errors import ConfigError, ContractError


def _progress(record):
    print(
        f"episode {record.episode:4d} [{record.phase}] "
        f"reward={record.avg_reward:8.3f} aot={record.avg_aot:7.3f} "
        f"throughput={record.avg_throughput:7.3f} loss={record.avg_loss:10.4f}"
    )


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "preset", None):
        cfg = apply_preset(cfg, args.preset)
    return cfg


def cmd_train(args) -> int:
    from .harness import train

    cfg = _load(args)
    progress = None if args.quiet else _progress
    train(cfg, args.seed, out_dir=args.out, greedy_eval=args.greedy_eval, progress=progress)
    print(f"run complete; metrics and checkpoint in {args.out}")
    return 0


def cmd_eval(args) -> int:
    from .harness import evaluate

    cfg = _load(args)
    progress = None if args.quiet else _progress
    records = evaluate(
        cfg,
        args.seed,
        policy=args.policy,
        checkpoint=args.checkpoint,
        episodes=args.episodes,
        out_dir=args.out,
        progress=progress,
    )
    mean_aot = sum(r.avg_aot for r in records) / len(records)
    mean_tp = sum(r.avg_throughput for r in records) / len(records)
    print(f"{args.policy}: mean aot={mean_aot:.3f} mean throughput={mean_tp:.3f} Kbps")
    return 0


def cmd_baseline(args) -> int:
    args.checkpoint = None
    return cmd_eval(args)


def cmd_flowcheck(args) -> int:
    from .topology import build_throughput_table, load_graph

    graph = load_graph(args.graph)
    table = build_throughput_table(graph)
    print(f"full throughput: {table.full:.3f} Kbps")
    for device in sorted(table.degraded):
        rate = table.degraded[device]
        loss = 100.0 * (1.0 - rate / table.full) if table.full else 0.0
        print(f"device {device} offline: {rate:.3f} Kbps ({loss:.1f}% loss)")
    return 0


def cmd_summarize(args) -> int:
    from .report import summarize

    written = summarize(args.in_dir, out_dir=args.out, window=args.window)
    for path in written.values():
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aotsim",
        description="UAV attestation scheduling simulator and PD3QN trainer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", help="JSON config file (defaults used when omitted)")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--preset", choices=["full", "desk"], help="run-scale preset")
        p.add_argument("--quiet", action="store_true", help="suppress per-episode lines")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")

    p_train = sub.add_parser("train", help="train the agent, then run assessment episodes")
    common(p_train)
    p_train.add_argument(
        "--greedy-eval", action="store_true", help="assess at epsilon 0 instead of the 0.05 floor"
    )
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="greedy rollouts from a checkpoint or a named baseline")
    common(p_eval, needs_out=False)
    p_eval.add_argument("--out", help="optional output directory for metric files")
    p_eval.add_argument("--checkpoint", help="agent checkpoint (.npz) for --policy pd3qn")
    p_eval.add_argument("--policy", default="pd3qn", choices=["pd3qn", "rand", "maf", "nf"])
    p_eval.add_argument("--episodes", type=int, help="episode count (default: assessment count)")
    p_eval.set_defaults(func=cmd_eval)

    p_base = sub.add_parser("baseline", help="run one of the non-learning policies")
    common(p_base, needs_out=False)
    p_base.add_argument("--out", help="optional output directory for metric files")
    p_base.add_argument("--policy", required=True, choices=["rand", "maf", "nf"])
    p_base.add_argument("--episodes", type=int, help="episode count (default: assessment count)")
    p_base.set_defaults(func=cmd_baseline)

    p_flow = sub.add_parser("flowcheck", help="print full and per-device degraded throughput")
    p_flow.add_argument("--graph", required=True, help="graph JSON file")
    p_flow.set_defaults(func=cmd_flowcheck)

    p_sum = sub.add_parser("summarize", help="moving-average table and figures for a run")
    p_sum.add_argument("--in", dest="in_dir", required=True, help="directory with metrics.csv")
    p_sum.add_argument("--out", help="output directory (default: same as --in)")
    p_sum.add_argument("--window", type=int, default=10)
    p_sum.set_defaults(func=cmd_summarize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ContractError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
