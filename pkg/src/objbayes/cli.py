"""Command line entry point: ``objbayes <subcommand> [flags]``.

Reports go to standard output and errors to standard error as JSON. Exit
status is 0 on success, 2 for configuration errors and 3 for numerical
failures.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .coverage import coverage_study
from .exceptions import ConfigError, NumericalError, ObjBayesError
from .families import as_point, builtin_from_flags, make_sample, sample_from_stats
from .fisher_prior import PRIOR_LABELS, fisher_information, prior_for
from .intrinsic_test import LOG100, intrinsic_statistic
from .mixed_test import SWEEP_COLUMNS, default_spread, lindley_sweep, mixed_test, sweep_to_csv
from .schemas import SCHEMA_VERSION

DIGITS = 12
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of printing usage and exiting."""

    def error(self, message):
        raise ConfigError(message)


def _number(x):
    """Round to DIGITS significant digits; non-finite values become strings."""
    if isinstance(x, (bool, np.bool_)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{DIGITS}g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, str):
        return obj
    return _number(obj)


def _fmt(x):
    x = _number(x)
    return "" if x is None else str(x)


# --------------------------------------------------------------------------
# argument parsing


def _u64(text):
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _int_list(text):
    out = []
    for t in text.split(","):
        t = t.strip()
        if not t:
            continue
        try:
            value = float(t)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{t!r} is not a number") from None
        if not value.is_integer():
            raise argparse.ArgumentTypeError(f"{t!r} is not an integer")
        out.append(int(value))
    return out


def _shared_flags():
    p = _Parser(add_help=False)
    p.add_argument("--family", help="built-in family name")
    p.add_argument("--sigma", type=float, help="known standard deviation (normal_known_sigma)")
    p.add_argument("--trials", type=float, help="trial count (binomial)")
    p.add_argument("--data", help="CSV file with one column of observations")
    p.add_argument("--n", type=float, help="sample size for inline sufficient statistics")
    p.add_argument("--mean", type=float, help="sample mean (inline statistics)")
    p.add_argument("--sum", type=float, help="sample total (inline statistics)")
    p.add_argument("--null", type=float, help="null parameter value")
    p.add_argument("--prior", help=f"prior label ({', '.join(PRIOR_LABELS)})")
    p.add_argument("--p", type=float, default=0.5, help="prior mass on the null (default 0.5)")
    p.add_argument("--spread", default="cauchy_proper", help="spread prior label (default cauchy_proper)")
    p.add_argument("--spread-loc", type=float, help="spread location (default: the null)")
    p.add_argument("--spread-scale", type=float, help="spread scale (default: sigma, else 1)")
    p.add_argument("--threshold", type=float, default=LOG100, help="rejection threshold in nats")
    p.add_argument("--method", default="auto", choices=["auto", "closed_form", "quadrature"])
    p.add_argument("--out", choices=["json", "csv"], help="output format")
    # accepted by every subcommand, but only coverage draws random numbers
    p.add_argument("--seed", type=_u64, help="unsigned 64-bit seed (required by coverage)")
    p.add_argument("--grid", help="comma-separated parameter values; mu:sigma pairs for normal")
    p.add_argument("--z", type=float, help="fixed standardized distance for the Lindley sweep")
    p.add_argument("--n-list", type=_int_list, help="comma-separated increasing sample sizes")
    p.add_argument("--mass", type=float, default=0.95, help="credible interval mass")
    p.add_argument("--reps", type=float, help="number of coverage replicates")
    p.add_argument("--true", type=float, help="true parameter value for coverage")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for coverage")
    return p


def build_parser():
    parser = _Parser(prog="objbayes", description="Objective Bayesian estimation and testing.")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand", parser_class=_Parser)
    shared = _shared_flags()
    helps = {
        "prior": "objective prior log-density and Fisher information on a grid",
        "test-intrinsic": "intrinsic-discrepancy test of a precise null",
        "test-mixed": "point-mass mixed-prior test of a precise null",
        "lindley": "sweep of both tests over sample sizes at fixed z",
        "coverage": "frequentist coverage of Jeffreys credible intervals",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[shared], help=text, description=text)
    return parser


# --------------------------------------------------------------------------
# inputs


def read_values(path):
    """Read a single column of numbers; a non-numeric first row is a header."""
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    except OSError as exc:
        raise ConfigError(f"cannot read data file {path!r}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"data file {path!r} is not UTF-8") from None
    values = []
    for i, row in enumerate(rows):
        if len(row) != 1:
            raise ConfigError(f"data file line {i + 1}: expected one column, got {len(row)}")
        try:
            values.append(float(row[0]))
        except ValueError:
            if i == 0:
                continue
            raise ConfigError(f"data file line {i + 1}: {row[0]!r} is not a number") from None
    if not values:
        raise ConfigError(f"data file {path!r} holds no observations")
    return values


def _family(args):
    if not args.family:
        raise ConfigError("--family is required")
    trials = args.trials
    if trials is not None and not float(trials).is_integer():
        raise ConfigError("--trials must be an integer")
    return builtin_from_flags(args.family, sigma=args.sigma, trials=None if trials is None else int(trials))


def _family_report(fam):
    return {"name": fam.name, "fixed": dict(fam.fixed)}


def _sample(fam, args):
    inline = args.n is not None or args.mean is not None or args.sum is not None
    if args.data is not None and inline:
        raise ConfigError("give either --data or inline statistics (--n with --mean or --sum), not both")
    if args.data is not None:
        s = make_sample(fam, read_values(args.data))
        return s, {"source": "file", "n": s.n, "mean": s.summary["mean"]}
    if args.n is None:
        raise ConfigError("data required: --data <path> or --n with --mean or --sum")
    if not float(args.n).is_integer():
        raise ConfigError("--n must be an integer")
    s = sample_from_stats(fam, int(args.n), mean=args.mean, total=args.sum)
    return s, {"source": "inline", "n": s.n, "mean": s.summary["mean"]}


def _require(args, *names):
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            raise ConfigError(f"--{name} is required for {args.subcommand}")


def _grid_points(fam, text):
    points = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        try:
            point = [float(x) for x in parts]
        except ValueError:
            raise ConfigError(f"grid point {item!r} is not numeric") from None
        if len(point) != fam.param_dim:
            raise ConfigError(
                f"{fam.name} has {fam.param_dim} parameter(s); grid point {item!r} has {len(point)}"
            )
        points.append(as_point(fam, point))
    if not points:
        raise ConfigError("--grid is empty")
    return np.array(points)


# --------------------------------------------------------------------------
# subcommands


def cmd_prior(args):
    fam = _family(args)
    _require(args, "grid")
    label = args.prior or "jeffreys"
    prior = prior_for(fam, label, location=args.spread_loc, scale=args.spread_scale)
    grid = _grid_points(fam, args.grid)
    logd = np.asarray(prior(grid), dtype=float) * np.ones(len(grid))
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "prior",
        "family": _family_report(fam),
        "label": label,
        "grid": grid.tolist(),
        "log_density": (logd - logd[0]).tolist(),
        "fisher": [fisher_information(fam, a).tolist() for a in grid],
    }


def cmd_test_intrinsic(args):
    fam = _family(args)
    _require(args, "null")
    s, data = _sample(fam, args)
    prior = None if args.prior is None else prior_for(fam, args.prior)
    res = intrinsic_statistic(fam, s, args.null, prior=prior, threshold=args.threshold, method=args.method)
    label = args.prior or ("uniform" if fam.name == "normal_known_sigma" else "jeffreys")
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "test-intrinsic",
        "family": _family_report(fam),
        "data": data,
        "null": args.null,
        "prior": label,
        **res.to_dict(),
    }


def _spread(fam, args, null):
    default = default_spread(fam, null)
    loc = default.params["location"] if args.spread_loc is None else args.spread_loc
    scale = default.params["scale"] if args.spread_scale is None else args.spread_scale
    return prior_for(fam, args.spread, location=loc, scale=scale)


def cmd_test_mixed(args):
    fam = _family(args)
    _require(args, "null")
    s, data = _sample(fam, args)
    res = mixed_test(fam, s, args.null, spread=_spread(fam, args, args.null), p=args.p)
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "test-mixed",
        "family": _family_report(fam),
        "data": data,
        "null": args.null,
        **res.to_dict(),
    }


def cmd_lindley(args):
    if args.family is None:
        args.family = "normal_known_sigma"
    if args.sigma is None:
        args.sigma = 1.0
    fam = _family(args)
    _require(args, "z", "n-list")
    null = 0.0 if args.null is None else args.null
    spread = _spread(fam, args, null)
    rows = lindley_sweep(fam, args.z, args.n_list, spread=spread, p=args.p, null=null)
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "lindley",
        "family": _family_report(fam),
        "null": null,
        "prior_null_mass": args.p,
        "spread_prior": {"label": spread.label, **spread.params},
        "rows": [{c: getattr(r, c) for c in SWEEP_COLUMNS} for r in rows],
        "_rows": rows,
    }


def cmd_coverage(args):
    fam = _family(args)
    _require(args, "true", "n", "reps", "seed")
    for name in ("n", "reps"):
        if not float(getattr(args, name)).is_integer():
            raise ConfigError(f"--{name} must be an integer")
    label = args.prior or "jeffreys"
    prior = prior_for(fam, label, location=args.spread_loc, scale=args.spread_scale)
    res = coverage_study(
        fam, args.true, int(args.n), int(args.reps), args.mass, args.seed, prior=prior, n_jobs=args.jobs
    )
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "coverage",
        "family": _family_report(fam),
        "prior": label,
        **res.to_dict(),
    }


COMMANDS = {
    "prior": cmd_prior,
    "test-intrinsic": cmd_test_intrinsic,
    "test-mixed": cmd_test_mixed,
    "lindley": cmd_lindley,
    "coverage": cmd_coverage,
}


# --------------------------------------------------------------------------
# output


def _flat_csv(report):
    """One header row and one value row of the scalar fields."""
    flat = {}
    for key, value in report.items():
        if isinstance(value, dict):
            for k, v in value.items():
                if not isinstance(v, (dict, list)):
                    flat[f"{key}.{k}"] = v
        elif not isinstance(value, list):
            flat[key] = value
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(flat.keys())
    writer.writerow(v if isinstance(v, str) else _fmt(v) for v in flat.values())
    return buf.getvalue()


def _prior_csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    d = len(report["grid"][0])
    coords = ["alpha"] if d == 1 else [f"alpha{i}" for i in range(d)]
    fisher = [f"fisher_{i}{j}" for i in range(d) for j in range(d)]
    writer.writerow(coords + ["log_density"] + fisher)
    for point, logd, info in zip(report["grid"], report["log_density"], report["fisher"]):
        writer.writerow([_fmt(x) for x in point] + [_fmt(logd)] + [_fmt(x) for row in info for x in row])
    return buf.getvalue()


def render(report, fmt):
    """Serialize a report; ``fmt`` is ``"json"`` or ``"csv"``."""
    rows = report.pop("_rows", None)
    if fmt == "csv":
        if rows is not None:
            return sweep_to_csv(rows, DIGITS)
        if report["subcommand"] == "prior":
            return _prior_csv(report)
        return _flat_csv(report)
    return json.dumps(_clean(report), indent=2, allow_nan=False) + "\n"


def _error_json(exc, code):
    body = {"type": type(exc).__name__, "message": str(exc), "exit_code": code}
    diagnostic = getattr(exc, "diagnostic", None)
    if diagnostic is not None:
        body["diagnostic"] = diagnostic
    estimate = getattr(exc, "error_estimate", None)
    if estimate is not None:
        body["error_estimate"] = estimate
    return json.dumps(_clean({"schema_version": SCHEMA_VERSION, "error": body}), allow_nan=False)


def _attach_negative_values(argv):
    """Turn ``--grid -1,0,1`` into ``--grid=-1,0,1``.

    argparse only recognizes plain negative numbers as values; lists and
    ``mu:sigma`` pairs starting with a minus sign would read as options.
    """
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--") and "=" not in tok and nxt and nxt.startswith("-") and not nxt.startswith("--"):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None, stdout=None, stderr=None):
    """Run the tool and return its exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(_attach_negative_values(sys.argv[1:] if argv is None else list(argv)))
        if args.subcommand is None:
            raise ConfigError("a subcommand is required: " + ", ".join(COMMANDS))
        fmt = args.out or ("csv" if args.subcommand == "lindley" else "json")
        with np.errstate(all="ignore"):
            text = render(COMMANDS[args.subcommand](args), fmt)
    except ConfigError as exc:
        print(_error_json(exc, EXIT_CONFIG), file=stderr)
        return EXIT_CONFIG
    except (NumericalError, ObjBayesError, ArithmeticError) as exc:
        print(_error_json(exc, EXIT_NUMERICAL), file=stderr)
        return EXIT_NUMERICAL
    stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
