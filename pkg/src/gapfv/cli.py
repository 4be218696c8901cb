"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 selfcheck failure, 3 one or more
Langevin chains diverged (partial output is still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

from .harness import (
    ExperimentConfig,
    markdown_summary,
    run_linear,
    run_nn,
    run_selfcheck,
    write_csv,
)
from .synthetic import PROFILE_KINDS


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the published contract is 1
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


_COMMON_KEYS = ("seed", "out", "workers")
_LINEAR_KEYS = _COMMON_KEYS + (
    "n", "profile", "alpha", "sigma0_sq", "reps", "t", "step", "burn_in",
    "kappa", "estimators", "fixed_design",
)
_NN_KEYS = _COMMON_KEYS + (
    "n", "d", "m", "alpha", "sigma0_sq", "reps", "gap_reps", "t", "step",
    "burn_in", "lr", "gd_iters",
)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gapfv",
        description="Generalization-gap estimation for overparameterized regression",
    )
    subs = parser.add_subparsers(dest="mode", required=True)

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--seed", type=int, help="master seed (default 0)")
        sub.add_argument("--out", help="write per-replication CSV here")
        sub.add_argument("--workers", type=int, help="worker processes (default 1)")
        sub.add_argument("--config", help="JSON file with settings; flags override")

    lin = subs.add_parser("linear", help="synthetic ridge experiment, all estimators")
    lin.add_argument("--n", type=int, help="sample size (p = 2n)")
    lin.add_argument("--profile", choices=PROFILE_KINDS, help="singular-value profile")
    lin.add_argument("--alpha", type=float, help="ridge strength (default 0.1)")
    lin.add_argument("--sigma0-sq", type=float, help="noise variance (default 1)")
    lin.add_argument("--reps", type=int, help="replications (default 50)")
    lin.add_argument("--t", type=int, help="posterior draws / chain steps (default 15n)")
    lin.add_argument("--step", type=float, help="Langevin step size (default 1/(10n))")
    lin.add_argument("--burn-in", type=float, help="burn-in fraction (default 0)")
    lin.add_argument("--kappa", type=float, help="threshold for the tic_kappa column (default 0.1)")
    lin.add_argument("--estimators", help="comma list, e.g. delta,efv,fv (default all)")
    lin.add_argument(
        "--fixed-design", action=argparse.BooleanOptionalAction,
        help="hold (U, V, beta0) fixed across replications, redrawing y only",
    )
    common(lin)

    nn = subs.add_parser("nn", help="one-hidden-layer network experiment")
    nn.add_argument("--n", type=int, help="sample size (default 100; tables use 1000)")
    nn.add_argument("--d", type=int, help="input dimension")
    nn.add_argument("--m", type=int, help="hidden units")
    nn.add_argument("--alpha", type=float, help="ridge strength (default 1e-3)")
    nn.add_argument("--sigma0-sq", type=float, help="noise variance of the data (default 1)")
    nn.add_argument("--reps", type=int, help="Langevin replications (default 20)")
    nn.add_argument("--gap-reps", type=int, help="ground-truth gap replications (default 50)")
    nn.add_argument("--t", type=int, help="chain steps (default 1000)")
    nn.add_argument("--step", type=float, help="Langevin step size (default 1e-5)")
    nn.add_argument("--burn-in", type=float, help="burn-in fraction (default 0.1)")
    nn.add_argument("--lr", type=float, help="gradient-descent learning rate (default 0.1)")
    nn.add_argument("--gd-iters", type=int, help="gradient-descent iterations (default 100)")
    common(nn)

    chk = subs.add_parser("selfcheck", help="run the oracle suite and report margins")
    chk.add_argument("--seed", type=int, help="master seed (default 0)")
    chk.add_argument("--flip-efv-coefficient", action="store_true", help=argparse.SUPPRESS)
    return parser


def _merge(args: argparse.Namespace, keys: Sequence[str]) -> dict[str, Any]:
    from_file: dict[str, Any] = {}
    path = getattr(args, "config", None)
    if path:
        with open(path, encoding="utf-8") as fh:
            from_file = json.load(fh)
        unknown = set(from_file) - set(keys)
        if unknown:
            raise ValueError(f"config file: unknown keys {sorted(unknown)}")
    merged: dict[str, Any] = {}
    for key in keys:
        flag = getattr(args, key, None)
        value = flag if flag is not None else from_file.get(key)
        if value is not None:
            merged[key] = value
    if "estimators" in merged and isinstance(merged["estimators"], str):
        merged["estimators"] = tuple(
            name.strip() for name in merged["estimators"].split(",") if name.strip()
        )
    return merged


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.mode == "selfcheck":
            seed = args.seed if args.seed is not None else 0
            report = run_selfcheck(
                ExperimentConfig(mode="selfcheck", seed=seed),
                flip_efv_coefficient=args.flip_efv_coefficient,
            )
            print(report.format())
            return 0 if report.ok else 2
        keys = _LINEAR_KEYS if args.mode == "linear" else _NN_KEYS
        config = ExperimentConfig(mode=args.mode, **_merge(args, keys))
        result = run_linear(config) if args.mode == "linear" else run_nn(config)
        if result.config.out:
            write_csv(result, result.config.out)
        print(markdown_summary(result))
        return 3 if result.diverged else 0
    except (ValueError, OSError) as err:
        print(f"gapfv: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
