"""Command line front end.

Subcommands fall in two groups: small file-to-file utilities over the binary
signal format (``lacunary``, ``project``, ``sqfn``, ``orlicz``, ``czd``,
``decompose``) and the seeded experiment drivers (``cww``, ``verify``,
``sharpness``).  Experiment parameters resolve as defaults, then a
``--config`` file of flat ``key = value`` lines, then explicit flags.

Exit status: 0 on success, 1 when an experiment's ``ok`` gate fails or an
input is rejected, 2 for usage errors (argparse).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from .czd import cz_decompose, young_mass
from .dyadic import DyadicScalar
from .harness import (
    ENDPOINT_OPERATORS,
    HORMANDER_OPERATORS,
    cww_experiment,
    decompose_experiment,
    make_config,
    parse_config,
    report_to_json,
    save_report_csv,
    sharpness_growth,
    verify_endpoint,
    verify_gen_zygmund_bonami,
    verify_hormander,
    verify_zygmund_bonami,
)
from .lacunary import LacInterval, interval_to_line, lac_tau, lambda_tau
from .orlicz import exp_norm, llogl_avg_equiv, luxemburg_avg
from .spectral import (
    AliasFlags,
    lp_square_function,
    project_sharp,
    project_smooth,
    read_signal,
    weak_l1_norm,
    write_signal,
)

__all__ = ["main"]


def _emit(payload, out: Optional[str]) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- experiment configuration plumbing ------------------------------------

_CONFIG_FLAGS = (
    ("--log2-n", "log2_n", int, "samples per window as a power of two"),
    ("--period", "period", float, "window length (a power of two)"),
    ("--tau", "tau", int, "lacunary order"),
    ("--sigma", "sigma", int, "Orlicz exponent parameter"),
    ("--n-levels", "n_levels", int, "threshold levels per ratio"),
    ("--seed", "seed", int, "base RNG seed"),
    ("--ensemble", "ensemble", int, "number of sample signals"),
    ("--min-scale-log2", "min_scale_log2", int, "log2 of the smallest block"),
    ("--gamma", "gamma", float, "window dilation factor"),
    ("--n-min", "n_min", int, "smallest family parameter"),
    ("--n-max", "n_max", int, "largest family parameter"),
    ("--khintchine", "khintchine", int, "random-sign draws (0 disables)"),
    ("--threads", "threads", int, "worker threads (0 = LACUNA_THREADS)"),
)


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat key = value overrides")
    for flag, dest, kind, help_text in _CONFIG_FLAGS:
        parser.add_argument(flag, dest=dest, type=kind, default=None, help=help_text)
    parser.add_argument("--refine", dest="refine", default=None,
                        action=argparse.BooleanOptionalAction,
                        help="re-measure on a 4x finer grid and report drift")
    parser.add_argument("--out", metavar="FILE", default=None, help="write the JSON report here")
    parser.add_argument("--csv", metavar="FILE", default=None, help="also write per-row CSV")


def _resolve_config(args: argparse.Namespace):
    file_layer = parse_config(args.config) if args.config else {}
    flag_layer = {dest: getattr(args, dest) for _, dest, _, _ in _CONFIG_FLAGS}
    flag_layer["refine"] = args.refine
    return make_config(file_layer, flag_layer)


def _finish_experiment(report, args: argparse.Namespace) -> int:
    _emit(report_to_json(report), args.out)
    if args.csv:
        save_report_csv(report, args.csv)
    payload = report.to_json_dict() if hasattr(report, "to_json_dict") else report
    return 0 if payload.get("ok") else 1


# -- file utilities ---------------------------------------------------------


def _cmd_lacunary(args: argparse.Namespace) -> int:
    min_scale = DyadicScalar.pow2(args.min_scale_log2)
    max_abs = DyadicScalar.from_float(args.max_abs)
    payload: dict = {
        "tau": args.tau,
        "min_scale_log2": args.min_scale_log2,
        "max_abs": args.max_abs,
    }
    if args.intervals:
        fam = lambda_tau(args.tau, min_scale, max_abs)
        payload["count"] = len(fam)
        payload["intervals"] = [interval_to_line(piece) for piece in fam]
    else:
        pts = lac_tau(args.tau, min_scale, max_abs)
        payload["count"] = len(pts.points)
        payload["points"] = [float(p) for p in pts.points]
    _emit(payload, args.out)
    return 0


def _cmd_project(args: argparse.Namespace) -> int:
    sig = read_signal(args.input)
    lo = DyadicScalar.from_float(args.lo)
    hi = DyadicScalar.from_float(args.hi)
    band = LacInterval(lo, hi, 1, lo, None)
    flags = AliasFlags()
    if args.mode == "sharp":
        out = project_sharp(sig, band, flags)
    else:
        out = project_smooth(sig, band, flags=flags)
    if args.output:
        write_signal(args.output, out)
    summary = {
        "n": sig.n,
        "period": sig.period,
        "mode": args.mode,
        "band": [args.lo, args.hi],
        "l2_in": float(np.sqrt(sig.dx * np.sum(np.abs(sig.samples) ** 2))),
        "l2_out": float(np.sqrt(out.dx * np.sum(np.abs(out.samples) ** 2))),
        "alias_events": flags.events,
        "output": args.output,
    }
    _emit(summary, args.out)
    return 0 if not flags.aliased else 1


def _cmd_sqfn(args: argparse.Namespace) -> int:
    sig = read_signal(args.input)
    flags = AliasFlags()
    max_abs = DyadicScalar.from_float(args.max_abs) if args.max_abs else None
    out = lp_square_function(sig, args.tau, DyadicScalar.pow2(args.min_scale_log2),
                             args.mode, max_abs, flags=flags)
    if args.output:
        write_signal(args.output, out)
    vals = np.abs(out.samples)
    summary = {
        "n": sig.n,
        "tau": args.tau,
        "mode": args.mode,
        "sup": float(vals.max()),
        "l2": float(np.sqrt(out.dx * np.sum(vals ** 2))),
        "weak_l1": weak_l1_norm(vals, out.dx),
        "alias_events": flags.events,
        "output": args.output,
    }
    _emit(summary, args.out)
    return 0 if not flags.aliased else 1


def _cmd_orlicz(args: argparse.Namespace) -> int:
    sig = read_signal(args.input)
    vals = np.abs(sig.samples)
    payload = {
        "n": sig.n,
        "sigma": args.sigma,
        "luxemburg_avg": luxemburg_avg(vals, args.sigma),
        "llogl_equiv": llogl_avg_equiv(vals, args.sigma),
    }
    if args.sigma > 0:
        payload["exp_norm_dual"] = exp_norm(vals, args.sigma)
    if args.alpha is not None:
        payload["young_mass"] = young_mass(sig, int(round(2 * args.sigma)), args.alpha)
        payload["alpha"] = args.alpha
    _emit(payload, args.out)
    return 0


def _cmd_czd(args: argparse.Namespace) -> int:
    sig = read_signal(args.input)
    try:
        dec = cz_decompose(sig, args.sigma, args.alpha,
                           min_margin=args.min_margin, threads=args.threads)
    except ValueError as err:
        sys.stderr.write(f"czd: {err}\n")
        return 1
    if args.output:
        dec.save(args.output)
    _emit(dec.to_json_dict(), args.out)
    return 0


def _cmd_decompose(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    samples = None
    if args.input:
        samples = np.real(read_signal(args.input).samples)
    report = decompose_experiment(cfg, samples)
    return _finish_experiment(report, args)


# -- experiments ------------------------------------------------------------


def _cmd_cww(args: argparse.Namespace) -> int:
    return _finish_experiment(cww_experiment(_resolve_config(args)), args)


def _cmd_verify(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    if args.experiment == "endpoint":
        report = verify_endpoint(cfg, args.operator or "prototype", args.exponent)
    elif args.experiment == "hormander":
        report = verify_hormander(cfg, args.operator or "hormander", args.exponent)
    elif args.experiment == "zygmund-bonami":
        report = verify_zygmund_bonami(cfg)
    else:
        report = verify_gen_zygmund_bonami(cfg)
    return _finish_experiment(report, args)


def _cmd_sharpness(args: argparse.Namespace) -> int:
    return _finish_experiment(sharpness_growth(_resolve_config(args)), args)


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lacuna",
        description="higher-order lacunary systems, endpoint square functions, "
                    "and their verification experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lacunary", help="enumerate a lacunary point set or interval system")
    p.add_argument("--tau", type=int, default=2)
    p.add_argument("--min-scale-log2", type=int, default=-6)
    p.add_argument("--max-abs", type=float, default=64.0)
    p.add_argument("--intervals", action="store_true", help="emit the interval system")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_lacunary)

    p = sub.add_parser("project", help="band-project a stored signal")
    p.add_argument("--input", required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--mode", choices=("sharp", "smooth"), default="sharp")
    p.add_argument("--output", default=None, help="write the projected signal here")
    p.add_argument("--out", default=None, help="write the JSON summary here")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("sqfn", help="square function of a stored signal")
    p.add_argument("--input", required=True)
    p.add_argument("--tau", type=int, default=2)
    p.add_argument("--mode", choices=("sharp", "smooth"), default="sharp")
    p.add_argument("--min-scale-log2", type=int, default=-6)
    p.add_argument("--max-abs", type=float, default=None)
    p.add_argument("--output", default=None, help="write the aggregate signal here")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sqfn)

    p = sub.add_parser("orlicz", help="Orlicz averages of a stored signal")
    p.add_argument("--input", required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=None, help="also report the Young mass at this threshold")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_orlicz)

    p = sub.add_parser("czd", help="stopping-time decomposition of a stored signal")
    p.add_argument("--input", required=True)
    p.add_argument("--sigma", type=int, default=1)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--min-margin", type=float, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", default=None, help="save parts under this path prefix")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_czd)

    p = sub.add_parser("cww", help="sign-martingale tail and norm experiment")
    _add_config_args(p)
    p.set_defaults(func=_cmd_cww)

    p = sub.add_parser("decompose", help="run the quotient-norm decomposition solver")
    p.add_argument("--input", default=None, help="optional stored signal (real part is used)")
    _add_config_args(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("verify", help="run a verification experiment")
    p.add_argument("experiment", choices=("endpoint", "hormander",
                                          "zygmund-bonami", "gen-zygmund-bonami"))
    p.add_argument("--operator", default=None,
                   help=f"endpoint: {', '.join(ENDPOINT_OPERATORS)}; "
                        f"hormander: {', '.join(HORMANDER_OPERATORS)}")
    p.add_argument("--exponent", type=float, default=None,
                   help="override the Young exponent in the bound")
    _add_config_args(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sharpness", help="growth study along the dilated family")
    _add_config_args(p)
    p.set_defaults(func=_cmd_sharpness)

    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        sys.stderr.write(f"lacuna: {err}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
