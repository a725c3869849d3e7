"""Command-line interface: ``sggica {gen,mix,fit,separate,eval,fit1d}``.

Exit codes: 0 success, 1 numerical or convergence failure, 2 usage or input error.
Reports are flat ``key=value`` lines in a fixed order.
"""

import argparse
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .density import UnivariateSgg
from .errors import DomainError, FitError, InsufficientDataError, MetricError, SggError, SignalIOError
from .experiment import generate_sources, image_sources, mix, rescale_unit, score_separation
from .optimizer import FitConfig, fit_ica, separate
from .signal_io import (
    SignalMatrix,
    atomic_write,
    format_matrix,
    parse_matrix_text,
    read_matrix_csv,
    read_pgm,
    read_wav,
    write_matrix_csv,
    write_pgm,
    write_wav,
)
from .univariate import FAMILY_ALIASES, fit_univariate

log = logging.getLogger("sggica")

MODEL_BLOCKS = ("m", "W", "sigma_l", "sigma_r", "c")
DEFAULT_RATE = 8000


class UsageError(Exception):
    pass


# -- formatting helpers -------------------------------------------------------


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else repr(float(value))
    if isinstance(value, (list, tuple, np.ndarray)):
        return ",".join(_fmt(v) for v in np.ravel(value).tolist())
    return str(value)


def format_report(items):
    return "".join(f"{key}={_fmt(value)}\n" for key, value in items)


def parse_report(text):
    out = {}
    for line in text.splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            out[key] = value
    return out


def write_model(model, path):
    parts = []
    for name in MODEL_BLOCKS:
        value = getattr(model, name)
        parts.append(f"[{name}]\n" + format_matrix(np.atleast_2d(value) if name != "W" else value))
    atomic_write(path, "".join(parts))


def read_model(path):
    from .density import MultiSgg

    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise SignalIOError(f"cannot read model: {exc}", path=path) from None
    blocks = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1]
            blocks[current] = []
        elif stripped:
            if current is None:
                raise SignalIOError("data before the first block label", path=path, line=lineno)
            blocks[current].append(line)
    missing = [b for b in MODEL_BLOCKS if b not in blocks]
    if missing:
        raise SignalIOError(f"model file lacks blocks {missing}", path=path)
    values = {name: parse_matrix_text("\n".join(blocks[name]), path=path).data for name in MODEL_BLOCKS}
    return MultiSgg(
        m=values["m"].ravel(),
        W=values["W"],
        sigma_l=values["sigma_l"].ravel(),
        sigma_r=values["sigma_r"].ravel(),
        c=float(values["c"].ravel()[0]),
    )


def parse_matrix_literal(text):
    """``"1,1;1,-1"`` -> [[1, 1], [1, -1]]; must be square."""
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.strip().split(";")]
    except ValueError:
        raise UsageError(f"cannot parse matrix literal {text!r}") from None
    if any(len(r) != len(rows) for r in rows):
        raise UsageError(f"matrix literal {text!r} is not square")
    return np.array(rows)


def read_spec(path):
    try:
        lines = Path(path).read_text().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read spec file {path}: {exc}") from None
    specs = []
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        fields = body.replace(",", " ").split()
        try:
            if len(fields) != 3:
                raise ValueError(f"expected 3 fields (sigma_l sigma_r c), found {len(fields)}")
            sl, sr, c = (float(f) for f in fields)
            specs.append(UnivariateSgg(0.0, sl, sr, c))
        except (ValueError, DomainError) as exc:
            raise UsageError(f"{path}: line {lineno}: {exc}") from None
    if not specs:
        raise UsageError(f"{path}: no source specifications")
    return specs


# -- signal files -------------------------------------------------------------


def _kind(path):
    ext = Path(path).suffix.lower()
    if ext in (".pgm", ".pnm"):
        return "pgm"
    if ext == ".wav":
        return "wav"
    return "csv"


def read_signal(paths):
    """Read one or more files and stack their channels."""
    kinds = {_kind(p) for p in paths}
    if len(kinds) > 1:
        raise UsageError("inputs must share one format")
    kind = kinds.pop()
    if kind == "pgm":
        return image_sources([read_pgm(p) for p in paths])
    parts = [read_wav(p) if kind == "wav" else read_matrix_csv(p) for p in paths]
    if len({p.n for p in parts}) > 1:
        raise UsageError("inputs have different sample counts")
    rates = {p.sample_rate for p in parts}
    if len(rates) > 1:
        raise UsageError("inputs have different sample rates")
    names = None
    if len(parts) == 1:
        names = parts[0].channel_names
    return SignalMatrix(np.column_stack([p.data for p in parts]), channel_names=names, sample_rate=rates.pop())


def write_signal(sm, paths, like=None, rescale_images=False, rate=None):
    kinds = {_kind(p) for p in paths}
    if len(kinds) > 1:
        raise UsageError("outputs must share one format")
    kind = kinds.pop()
    data = sm.data
    if kind == "pgm":
        width = sm.width or (like.width if like else None)
        height = sm.height or (like.height if like else None)
        if width is None or height is None:
            raise UsageError("PGM output needs image input (unknown width/height)")
        if len(paths) != data.shape[1]:
            raise UsageError(f"need one PGM output per channel ({data.shape[1]}), got {len(paths)}")
        for j, path in enumerate(paths):
            col = data[:, [j]]
            if rescale_images or col.min() < 0 or col.max() > 1:
                col = rescale_unit(col)
            write_pgm(col, width, height, path)
        return
    if len(paths) != 1:
        raise UsageError("CSV and WAV outputs take a single path")
    if kind == "wav":
        peak = np.max(np.abs(data))
        if peak > 1.0:
            data = data * (0.99 / peak)
        write_wav(data, rate or sm.sample_rate or (like.sample_rate if like else None) or DEFAULT_RATE, paths[0])
    else:
        write_matrix_csv(SignalMatrix(data, channel_names=sm.channel_names), paths[0])


# -- commands -----------------------------------------------------------------


def cmd_gen(args):
    specs = read_spec(args.spec)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    write_matrix_csv(generate_sources(specs, args.n, args.seed), args.out)
    return 0


def cmd_mix(args):
    A = parse_matrix_literal(args.matrix)
    src = read_signal(args.inputs)
    if A.shape[0] != src.d:
        raise UsageError(f"matrix is {A.shape[0]}x{A.shape[0]} but input has {src.d} channels")
    write_signal(mix(src, A), args.out, like=src, rate=args.rate)
    return 0


def _config_from(args):
    return FitConfig(
        max_iter=args.max_iter,
        restarts=args.restarts,
        seed=args.seed,
        fixed_c=args.fixed_c,
        whiten=not args.no_whiten,
        grad_tol=args.grad_tol,
        c_init=args.fixed_c if args.fixed_c is not None else 2.0,
    )


def _config_items(config):
    return [
        ("config.max_iter", config.max_iter),
        ("config.grad_tol", config.grad_tol),
        ("config.step_init", config.step_init),
        ("config.backtrack_factor", config.backtrack_factor),
        ("config.armijo_coeff", config.armijo_coeff),
        ("config.restarts", config.restarts),
        ("config.c_bounds", list(config.c_bounds)),
        ("config.c_init", config.c_init),
        ("config.whiten", config.whiten),
        ("config.fixed_c", "none" if config.fixed_c is None else config.fixed_c),
    ]


def _timing(args, start):
    return [] if args.no_timing else [("wall_time_ms", int(round((time.perf_counter() - start) * 1000)))]


def cmd_fit(args):
    start = time.perf_counter()
    try:
        config = _config_from(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = read_signal(args.inputs)
    items = [("command", "fit")] + _config_items(config)
    try:
        fit = fit_ica(data.data, config)
    except InsufficientDataError as exc:
        raise UsageError(str(exc)) from None
    except SggError as exc:
        diagnostics = getattr(exc, "diagnostics", [])
        items += [("status", "failed"), ("error", str(exc))]
        items += [(f"diagnostic.{i}", msg) for i, msg in enumerate(diagnostics)]
        items += _timing(args, start) + [("seed", args.seed)]
        if args.report:
            atomic_write(args.report, format_report(items))
        print(f"sggica fit: {exc}", file=sys.stderr)
        return 1
    write_model(fit.model, args.out_model)
    trace = np.asarray(fit.trace)
    items += [
        ("status", "ok"),
        ("loglik", fit.loglik),
        ("iterations", fit.iterations),
        ("converged", fit.converged),
        ("stop_reason", fit.stop_reason),
        ("grad_norm", fit.grad_norm),
        ("restart_index", fit.restart_index),
        ("monotone_trace", bool(np.all(np.diff(trace) >= 0))),
        ("c", fit.model.c),
    ]
    items += _timing(args, start) + [("seed", args.seed)]
    if args.report:
        atomic_write(args.report, format_report(items))
    return 0 if fit.converged else 1


def cmd_separate(args):
    model = read_model(args.model)
    data = read_signal(args.inputs)
    if data.d != model.d:
        raise UsageError(f"model has {model.d} channels, input has {data.d}")
    est = separate(data.data, model)
    out = SignalMatrix(est, sample_rate=data.sample_rate, width=data.width, height=data.height)
    write_signal(out, args.out, like=data, rescale_images=True)
    return 0


def cmd_eval(args):
    start = time.perf_counter()
    truth = read_signal(args.true)
    est = read_signal(args.est)
    if truth.data.shape != est.data.shape:
        raise UsageError(f"shape mismatch: true {truth.data.shape} vs estimated {est.data.shape}")
    mixing = W_est = None
    if (args.true_mixing is None) != (args.est_model is None):
        raise UsageError("--true-mixing and --est-model must be given together")
    if args.true_mixing is not None:
        mixing = read_matrix_csv(args.true_mixing).data
        W_est = read_model(args.est_model).W
        if mixing.shape != W_est.shape:
            raise UsageError(f"mixing {mixing.shape} and model {W_est.shape} differ in shape")
    score = score_separation(truth.data, est.data, mixing, W_est, center=not args.no_center)
    items = [
        ("command", "eval"),
        ("centered", not args.no_center),
        ("congruences", score.congruences),
        ("min_congruence", score.min_congruence),
        ("mean_congruence", score.mean_congruence),
    ]
    if mixing is not None:
        items.append(("acy", score.acy))
    items += _timing(args, start)
    atomic_write(args.report, format_report(items))
    return 0


def cmd_fit1d(args):
    start = time.perf_counter()
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    unknown = [f for f in families if f not in FAMILY_ALIASES]
    if unknown or not families:
        raise UsageError(f"unknown family {unknown or args.families!r}; choose from {sorted(FAMILY_ALIASES)}")
    data = read_signal([args.inputs])
    col = args.column
    if data.channel_names and col in data.channel_names:
        j = data.channel_names.index(col)
    else:
        try:
            j = int(col)
        except ValueError:
            raise UsageError(f"no column {col!r}") from None
    if not 0 <= j < data.d:
        raise UsageError(f"column {j} out of range (input has {data.d})")
    x = data.data[:, j]
    items = [("command", "fit1d"), ("column", j), ("n", x.size)]
    for fam in families:
        fitted, ll = fit_univariate(fam, x)
        for key, value in fitted.params.items():
            items.append((f"{fitted.tag}.{key}", value))
        items.append((f"{fitted.tag}.loglik", ll))
    items += _timing(args, start)
    atomic_write(args.report, format_report(items))
    return 0


# -- parser -------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="sggica", description="Split generalized Gaussian ICA.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample independent SGG source channels")
    p.add_argument("--spec", required=True, help="one 'sigma_l sigma_r c' triple per line")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("mix", help="apply a mixing matrix to every sample")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--matrix", required=True, help='rows separated by ";", e.g. "1,1;1,-1"')
    p.add_argument("--out", nargs="+", required=True)
    p.add_argument("--rate", type=int, default=None, help="sample rate for WAV output from non-WAV input")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("fit", help="fit the unmixing model")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--grad-tol", type=float, default=1e-6)
    p.add_argument("--fixed-c", type=float, default=None)
    p.add_argument("--no-whiten", action="store_true")
    p.add_argument("--out-model", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--no-timing", action="store_true", help="omit wall_time_ms from the report")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("separate", help="apply a fitted model")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", nargs="+", required=True)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("eval", help="score estimated sources against the truth")
    p.add_argument("--true", nargs="+", required=True)
    p.add_argument("--est", nargs="+", required=True)
    p.add_argument("--true-mixing", default=None)
    p.add_argument("--est-model", default=None)
    p.add_argument("--no-center", action="store_true", help="score raw channels instead of mean-removed ones")
    p.add_argument("--report", required=True)
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fit1d", help="compare univariate family fits on one column")
    p.add_argument("--in", dest="inputs", required=True)
    p.add_argument("--column", default="0")
    p.add_argument("--families", default="logistic,sn,sgg")
    p.add_argument("--report", required=True)
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_fit1d)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, SignalIOError, DomainError, InsufficientDataError, MetricError) as exc:
        print(f"sggica {args.command}: {exc}", file=sys.stderr)
        return 2
    except (FitError, SggError, np.linalg.LinAlgError) as exc:
        print(f"sggica {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
