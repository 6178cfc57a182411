"""Command-line interface.

Subcommands: bound (evaluate a tail bound from a profile or closed form),
run (execute an experiment config), scale (scaling study over sizes),
report (recompute a summary from a record CSV).

Exit codes: 0 success, 2 config error, 3 hypothesis-violation refusal,
4 size-limit error.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..bounds import BoundMethod, BoundConstants, MomentProfile, TypicalProfile, \
    chernoff_corollary_bound, general_chernoff_bound, main_theorem_bound, \
    optimize_m, theorem1_closed_bound, theorem1_recursion_bound
from ..errors import ConfigError, HypothesisViolationError, SizeLimitError
from .config import load_config
from .runner import records_from_csv, run_experiment, scaling_study, summarize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_SIZE = 4


def _values_map(n, spec, path):
    """Order -> value map or per-variable lists from profile JSON."""
    out = {}
    for key, val in spec.items():
        try:
            order = int(key)
        except ValueError:
            raise ConfigError(path, f"orders must be integers, got {key!r}") from None
        if isinstance(val, list):
            if len(val) != n:
                raise ConfigError(path, f"order {order}: expected {n} values")
            for i, v in enumerate(val, start=1):
                out[(i, order)] = float(v)
        else:
            for i in range(1, n + 1):
                out[(i, order)] = float(val)
    return out


def load_profile(path):
    with open(path) as fh:
        raw = json.load(fh)
    if "n" not in raw or "M" not in raw:
        raise ConfigError("$", "profile file needs 'n' and 'M'")
    n = int(raw["n"])
    base = MomentProfile.from_values(n, _values_map(n, raw["M"], "$.M"))
    if "L" in raw or "delta" in raw:
        if not ("L" in raw and "delta" in raw):
            raise ConfigError("$", "typical profiles need both 'L' and 'delta'")
        return TypicalProfile.from_values(
            base,
            _values_map(n, raw["L"], "$.L"),
            _values_map(n, raw["delta"], "$.delta"),
        )
    return base


def _result_json(res):
    return json.dumps({
        "t": res.t,
        "m_used": res.m_used,
        "log_moment_bound": res.moment_bound,
        "tail_probability": res.tail_probability,
        "method": res.method.value,
        "rate_constant": res.rate_constant,
    }, indent=2)


def cmd_bound(args):
    constants = BoundConstants()
    if args.method == "chernoff-corollary":
        res = chernoff_corollary_bound(args.n, args.sigma2, args.t, constants)
    elif args.method == "general-chernoff":
        res = general_chernoff_bound(args.nu, args.t, constants)
    elif args.method == "theorem1-closed":
        m_max = args.m_max or max(2, args.n - args.n % 2)
        res = optimize_m(lambda m: theorem1_closed_bound(args.n, m, constants),
                         args.t, m_max, method=BoundMethod.THEOREM1_CLOSED)
    elif args.method == "theorem1-recursion":
        profile = load_profile(args.profile)
        if isinstance(profile, TypicalProfile):
            profile = profile.base
        m_max = args.m_max or max(profile.orders)
        res = optimize_m(lambda m: theorem1_recursion_bound(profile, m),
                         args.t, m_max, method=BoundMethod.THEOREM1_RECURSION)
    else:  # main
        profile = load_profile(args.profile)
        if not isinstance(profile, TypicalProfile):
            raise ConfigError("$", "the main bound needs a typical profile "
                                   "(with 'L' and 'delta')")
        m_max = args.m_max or max(profile.base.orders)
        res = optimize_m(lambda m: main_theorem_bound(profile, m, constants),
                         args.t, m_max, method=BoundMethod.MAIN_THEOREM)
    print(_result_json(res))
    return EXIT_OK


def cmd_run(args):
    config = load_config(args.config)
    if args.seed is not None:
        config.base_seed = args.seed
    out = args.out or config.output
    records, summary = run_experiment(config, workers=args.workers, out=out)
    for warning in summary.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(summary.to_json())
    return EXIT_OK


def cmd_scale(args):
    config = load_config(args.config)
    if args.seed is not None:
        config.base_seed = args.seed
    study = scaling_study(config, args.n_list, workers=args.workers)
    payload = {
        "experiment": config.experiment,
        "rows": [{"n": r.n, "mean": r.mean, "sd": r.sd} for r in study.rows],
        "slope": study.slope,
        "slope_se": study.slope_se,
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def cmd_report(args):
    with open(args.records) as fh:
        records = records_from_csv(fh.read())
    if not records:
        raise ConfigError("$", "record file contains no records")
    summary = summarize(records)
    text = summary.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tailbounds",
        description="Concentration bounds and their Monte Carlo verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="evaluate a tail bound")
    p_bound.add_argument("--method", required=True,
                         choices=["theorem1-closed", "theorem1-recursion",
                                  "main", "chernoff-corollary",
                                  "general-chernoff"])
    p_bound.add_argument("--profile", help="JSON moment-profile file")
    p_bound.add_argument("--t", type=float, required=True)
    p_bound.add_argument("--n", type=int)
    p_bound.add_argument("--sigma2", type=float)
    p_bound.add_argument("--nu", type=float)
    p_bound.add_argument("--m-max", dest="m_max", type=int)
    p_bound.set_defaults(fn=cmd_bound)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--out")
    p_run.set_defaults(fn=cmd_run)

    p_scale = sub.add_parser("scale", help="scaling study over sizes")
    p_scale.add_argument("config")
    p_scale.add_argument("--n-list", dest="n_list", type=int, nargs="+",
                         required=True)
    p_scale.add_argument("--seed", type=int)
    p_scale.add_argument("--workers", type=int, default=1)
    p_scale.add_argument("--out")
    p_scale.set_defaults(fn=cmd_scale)

    p_report = sub.add_parser("report", help="summarize a record CSV")
    p_report.add_argument("records")
    p_report.add_argument("--out")
    p_report.set_defaults(fn=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisViolationError as exc:
        print(f"refusing to emit a bound: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except SizeLimitError as exc:
        print(f"size limit: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
