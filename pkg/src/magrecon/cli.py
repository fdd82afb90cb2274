"""Command-line entry point: ``magrecon <subcommand> ...``.

Exit status: 0 when every check passes, 1 when a check fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .errors import MagnitudeError, ParseError, ReconstructionError
from .experiments import EXPERIMENTS, ROUNDTRIP_MODES, k32_curve_csv, roundtrip
from .formal import path_expansion
from .io import dumps_json, load_space, space_to_obj
from .metric import to_fraction, validate
from .numeric import DOUBLE_BITS, grid_from_csv, grid_to_csv, magnitude_grid
from .reconstruction import reconstruct
from .series import dumps_series, format_rational, loads_series
from .small_scale import AsymptoticDerivatives, compute_nu_delta, default_order, nu_delta_tsv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class CheckFailed(Exception):
    """Raised by a subcommand whose output is valid but whose checks did not pass."""


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args):
    report = validate(load_space(args.path))
    text = dumps_json({"ok": report.ok, "violations": [list(map(str, v)) for v in report.violations]})
    _emit(text, args.out)
    if not report.ok:
        raise CheckFailed("space is not a metric")
    return report


def cmd_magnitude(args):
    space = load_space(args.path)
    grid = magnitude_grid(space, args.tmin, args.tmax, args.tcount, args.spacing, args.precision_bits)
    if args.format == "json":
        rows = [{"t": s.t, "M": str(s.value), "cond": s.condition_estimate, "singular": s.singular}
                for s in grid.samples]
        text = dumps_json(rows)
    else:
        text = grid_to_csv(grid, args.digits)
    _emit(text, args.out)
    return grid


def cmd_series(args):
    space = load_space(args.path)
    series = path_expansion(space, args.dindex).series
    if args.format == "json":
        text = dumps_json({"exact_below": format_rational(series.exact_below),
                           "terms": [[e, c] for e, c in series.terms]})
    else:
        text = dumps_series(series)
    _emit(text, args.out)
    return series


def cmd_taylor(args):
    space = load_space(args.path)
    coeffs = compute_nu_delta(space, args.order or default_order(space.n))
    _emit(nu_delta_tsv(coeffs), args.out)
    return coeffs


def _load_reconstruction_input(path: str):
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
        try:
            return AsymptoticDerivatives(*(to_fraction(obj[k]) for k in ("M1", "M2", "M3")))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"derivative file needs exact M1, M2, M3 strings ({exc})") from None
    if stripped.startswith("t,"):
        return grid_from_csv(text)
    return loads_series(text)


def cmd_reconstruct(args):
    data = _load_reconstruction_input(args.path)
    m1 = to_fraction(args.m1) if args.m1 is not None else None
    result = reconstruct(data, args.n, mode=args.mode, m1=m1)
    _emit(dumps_json({"space": space_to_obj(result.space), "certificate": result.certificate.to_dict()}), args.out)
    return result


def cmd_roundtrip(args):
    report = roundtrip(args.n, args.count, args.mode, seed=args.seed, workers=args.workers)
    _emit(dumps_json(report.to_dict(args.include_runtime)), args.out)
    if not report.passed:
        raise CheckFailed(report.name)
    return report


def cmd_experiment(args):
    names = list(EXPERIMENTS) if args.name == "all" else [args.name]
    reports = []
    for name in names:
        fn = EXPERIMENTS[name]
        reports.append(fn(seed=args.seed) if name == "identities" else fn())
    payload = [r.to_dict(args.include_runtime) for r in reports]
    _emit(dumps_json(payload if len(payload) > 1 else payload[0]), args.out)
    if args.curve_out and "k32" in names:
        Path(args.curve_out).write_text(k32_curve_csv())
    failed = [r.name for r in reports if not r.passed]
    if failed:
        raise CheckFailed(", ".join(failed))
    return reports


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magrecon", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_out(p):
        p.add_argument("--out", help="write output here instead of stdout")
        return p

    p = with_out(sub.add_parser("validate", help="check a space file is a metric"))
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = with_out(sub.add_parser("magnitude", help="sample M(t) on a grid"))
    p.add_argument("path")
    p.add_argument("--tmin", type=float, default=0.1)
    p.add_argument("--tmax", type=float, default=10.0)
    p.add_argument("--tcount", type=int, default=50)
    p.add_argument("--spacing", choices=("linear", "geometric"), default="linear")
    p.add_argument("--precision-bits", type=int, default=DOUBLE_BITS)
    p.add_argument("--digits", type=int, default=12, help="decimal places in CSV output")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_magnitude)

    p = with_out(sub.add_parser("series", help="truncated formal magnitude series"))
    p.add_argument("path")
    p.add_argument("--dindex", type=int, default=4, help="largest d-index kept")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.set_defaults(func=cmd_series)

    p = with_out(sub.add_parser("taylor", help="nu/delta Taylor coefficients as TSV"))
    p.add_argument("path")
    p.add_argument("--order", type=int)
    p.set_defaults(func=cmd_taylor)

    p = with_out(sub.add_parser("reconstruct", help="recover a space from magnitude data"))
    p.add_argument("path", help="series file, sample CSV, or JSON with M1, M2, M3")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("auto", "n3", "ri", "svti_generic", "n4_svti"), default="auto")
    p.add_argument("--m1", help="exact M1 (needed for four points)")
    p.set_defaults(func=cmd_reconstruct)

    p = with_out(sub.add_parser("roundtrip", help="random spaces through reconstruction"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--mode", choices=ROUNDTRIP_MODES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--include-runtime", action="store_true")
    p.set_defaults(func=cmd_roundtrip)

    p = with_out(sub.add_parser("experiment", help="run a named experiment"))
    p.add_argument("name", choices=list(EXPERIMENTS) + ["all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--include-runtime", action="store_true")
    p.add_argument("--curve-out", help="k32 only: write the magnitude curve CSV here")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ReconstructionError as exc:
        print(f"reconstruction failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ParseError, OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MagnitudeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
