"""``perc`` command line: one experiment per invocation, CSV + manifest out.

Exit codes: 0 success, 1 usage error, 2 infeasible geometry, 3 I/O error.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from .experiments import ExperimentConfig, emit_results, run_experiment, write_rows
from .generators import GeneratorSpec, generate, is_everywhere_percolating, write_edge_list
from .lattice import GeometryError

EXIT_USAGE, EXIT_GEOMETRY, EXIT_IO = 1, 2, 3

SUBCOMMANDS = {
    "generate": None,
    "dual-check": "dual_check",
    "dual-pairwise": "dual_pairwise",
    "dual-cluster-size": "dual_cluster_size",
    "ek-decay": "ek_decay",
    "marginal-an": "marginal_an",
    "one-dependence": "one_dependence",
    "halfplane": "halfplane",
    "pc-thinning": "pc_thinning",
    "connectivity": "connectivity",
    "counterexample": "counterexample",
}

# per-subcommand defaults, below the config file and the flags in precedence
DEFAULTS = {
    "dual-check": {"width": 256, "height": 256, "replicates": 100},
    "dual-pairwise": {"scales": [1, 2, 3, 4, 5, 6, 7, 8], "replicates": 10000},
    "dual-cluster-size": {"width": 128, "height": 128, "epsilon": 0.5, "replicates": 10000},
    "ek-decay": {"scales": [4, 8, 16, 32], "replicates": 10000},
    "marginal-an": {"width": 128, "height": 128, "scales": [4, 8, 16, 32], "replicates": 10000},
    "one-dependence": {"scales": [8], "replicates": 10000},
    "halfplane": {"width": 256, "height": 128, "generator": "foliation-v", "replicates": 1000},
    "pc-thinning": {"width": 256, "height": 256, "generator": "spanning-tree", "epsilon": 0.25,
                    "scales": [0.9, 0.95, 0.98, 0.999], "replicates": 1000},
    "connectivity": {"width": 128, "height": 128, "generator": "spanning-tree", "epsilon": 0.25,
                     "replicates": 1000},
    "counterexample": {"scales": [3, 4, 5, 6], "replicates": 10000},
}
BASE = {"width": 64, "height": 64, "generator": "foliation-h", "spacing": 1, "epsilon": 0.3,
        "q": None, "scales": [], "replicates": 1000, "seed": 0, "threads": 1, "out": None,
        "x_file": None, "orientation": None, "generator_seed": None}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _scales(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad scale list {text!r}") from None
    return [int(v) if v.is_integer() else v for v in vals]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="perc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--width", type=int)
        p.add_argument("--height", type=int)
        p.add_argument("--generator", choices=["foliation-h", "foliation-v", "spanning-tree", "comb"])
        p.add_argument("--spacing", type=int)
        p.add_argument("--generator-seed", type=int, help="spanning-tree seed (defaults to --seed)")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--q", type=float)
        p.add_argument("--scales", type=_scales, help="comma-separated k, n or q values")
        p.add_argument("--replicates", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--orientation", choices=["east", "north"])
        p.add_argument("--x-file", help="edge list 'x y E|N' used as X instead of a generator")
        p.add_argument("--out", help="CSV path (edge list for 'generate'); stdout when omitted")
        p.add_argument("--config", help="JSON file mirroring the flags; flags win")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge base defaults, subcommand defaults, the JSON config file and explicit flags."""
    merged = dict(BASE)
    merged.update(DEFAULTS.get(args.command, {}))
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: invalid JSON ({exc})") from None
        for key, val in file_cfg.items():
            key = key.replace("-", "_")
            if key not in BASE:
                raise UsageError(f"{args.config}: unknown key {key!r}")
            if key == "scales" and isinstance(val, str):
                val = _scales(val)
            if key == "generator" and isinstance(val, dict):
                merged["spacing"] = val.get("spacing", merged["spacing"])
                merged["generator_seed"] = val.get("seed", merged["generator_seed"])
                val = val.get("kind", merged["generator"])
            merged[key] = val
    for key in BASE:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def make_config(command: str, opts: dict) -> ExperimentConfig:
    seed = int(opts["seed"])
    gseed = seed if opts["generator_seed"] is None else int(opts["generator_seed"])
    return ExperimentConfig(
        experiment=SUBCOMMANDS[command] or "dual_check",
        generator=GeneratorSpec(opts["generator"], int(opts["spacing"]), gseed),
        width=int(opts["width"]), height=int(opts["height"]),
        boundary_mode="half_plane" if command == "halfplane" else "open_box",
        epsilon=float(opts["epsilon"]), q=opts["q"], scales=tuple(opts["scales"]),
        replicates=int(opts["replicates"]), seed=seed, threads=int(opts["threads"]),
        orientation=opts["orientation"], x_file=opts["x_file"], out=opts["out"],
    )


def _generate(config: ExperimentConfig) -> None:
    X = generate(config.generator, config.window)
    if config.out:
        write_edge_list(X, config.out)
    else:
        buf = io.StringIO()
        for e in X.edges():
            buf.write(f"{e.origin.x} {e.origin.y} {e.direction}\n")
        sys.stdout.write(buf.getvalue())
    print(f"{X.count()} edges, everywhere percolating: {is_everywhere_percolating(X)}",
          file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = make_config(args.command, resolve(args))
        if args.command == "generate":
            _generate(config)
            return 0
        records = run_experiment(config)
        if config.out:
            emit_results(records, config.out, config)
        else:
            write_rows(records, sys.stdout)
    except GeometryError as exc:
        print(f"perc: infeasible geometry: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except OSError as exc:
        print(f"perc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ValueError) as exc:
        print(f"perc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
