"""Command-line interface.

Exit codes: 0 success, 2 input or validation error, 3 numerical failure.
Reports go to stdout (or ``--out``), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys

from .basket import run_scenario
from .classical import build_dm, global_weights, optimize_alpha, score_experts, study_ranges
from .errors import InputError, InvalidParameter, SEJError
from .fileio import parse_scenario, parse_study, resolve_data
from .marginal import DEFAULT_OVERSHOOT
from .report import FORMATS, render_comparison, render_dm, render_report, render_scores
from .selftest import run_selftest


def _percentile(text: str) -> float:
    """Accept ``0.05`` or ``5`` for the 5th percentile."""
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if 1.0 <= p < 100.0:
        p /= 100.0
    if not 0.0 < p < 1.0:
        raise argparse.ArgumentTypeError("percentile must lie in (0, 1) or [1, 100)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="table")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--overshoot", type=float, metavar="K", help="intrinsic-range / support overshoot")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--samples", type=int, metavar="N")
    mc.add_argument("--seed", type=int, metavar="S")
    mc.add_argument("--workers", type=int, default=1, metavar="W", help="sampling threads (output is unaffected)")

    p = argparse.ArgumentParser(prog="sejbasket", description="Structured expert judgement and food basket risk.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("score", parents=[common], help="expert calibration, information and weights")
    s.add_argument("study")
    s.add_argument("--alpha", type=float, default=0.0)

    d = sub.add_parser("dm", parents=[common], help="pooled decision maker")
    d.add_argument("study")
    g = d.add_mutually_exclusive_group()
    g.add_argument("--alpha", type=float, default=0.0)
    g.add_argument("--optimize", action="store_true", help="choose alpha maximizing the DM's combined score")

    b = sub.add_parser("basket", parents=[common, mc], help="basket price-change distributions")
    b.add_argument("scenario")

    c = sub.add_parser("condition", parents=[common, mc], help="what-if: fix one category at a percentile")
    c.add_argument("scenario")
    c.add_argument("--node", required=True, metavar="CATEGORY")
    c.add_argument("--percentile", required=True, type=_percentile, metavar="P")

    t = sub.add_parser("selftest", help="check worked examples against independent oracles")
    t.add_argument("--seed", type=int, default=20180704)
    return p


def _k(args) -> float:
    return DEFAULT_OVERSHOOT if args.overshoot is None else args.overshoot


def _config(args):
    config = parse_scenario(resolve_data(args.scenario))
    changes = {"workers": args.workers}
    for attr, key in (("samples", "n_samples"), ("seed", "seed"), ("overshoot", "overshoot")):
        if getattr(args, attr) is not None:
            changes[key] = getattr(args, attr)
    return config.with_options(**changes)


def _cmd_score(args) -> bytes:
    study = parse_study(resolve_data(args.study))
    k = _k(args)
    scores = score_experts(study, k)
    return render_scores(scores, global_weights(scores, args.alpha), args.format)


def _cmd_dm(args) -> bytes:
    study = parse_study(resolve_data(args.study))
    k = _k(args)
    if args.optimize:
        dm = optimize_alpha(study, k).dm
    else:
        ranges = study_ranges(study, k)
        dm = build_dm(study, global_weights(score_experts(study, k, ranges), args.alpha), k, ranges, args.alpha)
    return render_dm(dm, study, args.format)


def _cmd_basket(args) -> bytes:
    config = _config(args).with_options(condition=None)
    return render_report(run_scenario(config), args.format)


def _cmd_condition(args) -> bytes:
    base_config = _config(args).with_options(condition=None)
    if args.node not in base_config.categories:
        raise InvalidParameter("node", args.node, f"must be one of {', '.join(base_config.categories)}")
    cond = run_scenario(base_config.with_options(condition=(args.node, args.percentile)))
    base = run_scenario(base_config)
    return render_comparison([(cond, base)], args.format)


def _cmd_selftest(args) -> tuple[bytes, int]:
    results = run_selftest(args.seed)
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}" for r in results]
    return ("\n".join(lines) + "\n").encode("utf-8"), 0 if all(r.passed for r in results) else 3


COMMANDS = {
    "score": _cmd_score,
    "dm": _cmd_dm,
    "basket": _cmd_basket,
    "condition": _cmd_condition,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
        out, code = result if isinstance(result, tuple) else (result, 0)
        if getattr(args, "out", None):
            with open(args.out, "wb") as fh:
                fh.write(out)
        else:
            sys.stdout.buffer.write(out)
            sys.stdout.flush()
        return code
    except SEJError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return InputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
