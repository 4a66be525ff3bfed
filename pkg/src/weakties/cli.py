"""Command-line entry point: ``weakties <command> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from ._accel import backend
from .errors import ConfigError, DataError, WeakTiesError
from .report import read_csv
from .runner import parse_config, run_experiment

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="flat key = value file; flags override it")
    g.add_argument("--seed", help="base RNG seed (default 0)")
    g.add_argument("--threads", help="worker threads for replications (default 1)")
    g.add_argument("--out-dir", dest="out-dir", help="output directory (default ./out)")
    g.add_argument("--resume", action="store_const", const="true",
                   help="abort if out-dir/manifest.json was made from a different dataset")
    g.add_argument("-v", "--verbose", action="store_true", default=False)
    src = p.add_argument_group("input")
    src.add_argument("--input", help="edge-list file")
    src.add_argument("--generator", help="e.g. community:c=50,s=20,p_in=0.6,k_out=120 or scale-free:n=1000,m=3")
    src.add_argument("--comment", help="comment prefix (default '#')")
    src.add_argument("--delimiter", help="field delimiter (default: any whitespace)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weakties", description="Tie-strength percolation and information diffusion.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = [_common()]
    sub.add_parser("load-stats", parents=common, help="node/edge counts after canonicalization")
    sub.add_parser("strength", parents=common, help="per-edge overlap strength CSV")
    p = sub.add_parser("cdf", parents=common, help="strength CDF")
    p.add_argument("--cdf-grid", dest="cdf-grid", help="start:stop:step or comma list (default 0:1:0.01)")
    sub.add_parser("correlate", parents=common, help="rank correlation of neighbor degree and strength")

    p = sub.add_parser("percolate", parents=common, help="strength-ordered edge removal sweep")
    p.add_argument("--order", help="weak, strong or both (default weak)")
    p.add_argument("--grid-step", dest="grid-step", help="f_r grid step (default 0.01)")
    p.add_argument("--collapse-threshold", dest="collapse-threshold", help="f_GCC collapse level (default 0.01)")

    def model_flags(p):
        p.add_argument("--alpha", help="navigating factor(s), comma separated")
        p.add_argument("--beta", help="information strength(s) in [0, 1], comma separated")
        p.add_argument("--runs", help="replications (default 20)")
        p.add_argument("--tmax", help="publish-event budget or 'auto' for |V|")
        p.add_argument("--epsilon", help="stand-in for zero strength (default 1e-6)")

    p = sub.add_parser("diffuse", parents=common, help="run the diffusion model")
    model_flags(p)
    p.add_argument("--per-run", dest="per-run", action="store_const", const="true",
                   help="also write one coverage file per replication")
    p.add_argument("--unpaired-seeds", dest="paired-seeds", action="store_const", const="false",
                   help="draw seed nodes independently per (alpha, beta)")

    p = sub.add_parser("remove-diffuse", parents=common, help="diffusion after removing ties")
    model_flags(p)
    p.add_argument("--order", help="weak, strong or both (default weak)")
    p.add_argument("--fr-grid", dest="fr-grid", help="start:stop:step or comma list (default 0,0.2,0.4,0.6,0.8)")

    sub.add_parser("gen", parents=common, help="write a generated graph as an edge list")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    verbose = args.pop("verbose", False)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config_path = args.pop("config", None)
    try:
        cfg = parse_config(command, args, config_path)
        logging.getLogger(__name__).info("kernel backend: %s", backend())
        manifest = run_experiment(cfg)
    except ConfigError as exc:
        print(f"weakties: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (DataError, WeakTiesError) as exc:
        print(f"weakties: data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    for name in manifest.files:
        print(f"wrote {cfg.out_dir}/{name}")
    if command == "load-stats":
        _, _, rows = read_csv(f"{cfg.out_dir}/load_stats.csv")
        for key, value in rows:
            print(f"{key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
