"""``statdigits`` command line: every engine behind one scriptable entry point.

Each subcommand builds a :class:`Report` (scalar header plus a table) that is
rendered as CSV (header as ``# key=value`` comment lines) or JSON.  The seed
and numeric mode are always part of the header, and output is byte-identical
for identical argv.

Exit codes: 0 success, 1 malformed input, 2 mathematical check failed,
3 resource bound exceeded.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import baseq, cdf as cdfmod, charfn, process as proc, statcheck
from .decompose import AtomScanConfig, decompose, reconstruct_check

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_FAILED, EXIT_RESOURCE = 0, 1, 2, 3

_RATIONAL_RE = re.compile(r"^-?\d+/\d+$")


class ConfigError(ValueError):
    """Malformed command line or input file."""


class Report:
    def __init__(self, header: dict | None = None, columns=(), rows=()):
        self.header = dict(header or {})
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]


# ---------------------------------------------------------------- formatting


def _scalar(v, mode: str):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, Fraction):
        return baseq.format_rational(v) if mode == "exact" else repr(float(v))
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return [_scalar(x, mode) for x in v]
    if isinstance(v, dict):
        return {str(k): _scalar(x, mode) for k, x in v.items()}
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return " ".join(_csv_cell(x) for x in v)
    if isinstance(v, dict):
        return " ".join(f"{k}:{_csv_cell(x)}" for k, x in sorted(v.items()))
    return str(v)


def render(report: Report, fmt: str, mode: str, seed: int) -> str:
    header = {"seed": seed, "mode": mode, **report.header}
    header = {k: _scalar(v, mode) for k, v in header.items()}
    rows = [[_scalar(v, mode) for v in r] for r in report.rows]
    if fmt == "json":
        doc = dict(header)
        doc["columns"] = report.columns
        doc["rows"] = rows
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# seed={seed}\n")
    for k in sorted(header):
        if k != "seed":
            buf.write(f"# {k}={_csv_cell(header[k])}\n")
    if report.columns:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report.columns)
        for r in rows:
            w.writerow([_csv_cell(v) for v in r])
    return buf.getvalue()


def _parse_numbers(obj):
    if isinstance(obj, str) and _RATIONAL_RE.match(obj):
        return Fraction(obj)
    if isinstance(obj, list):
        return [_parse_numbers(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _parse_numbers(v) for k, v in obj.items()}
    return obj


def read_report(source) -> dict:
    """Parse a JSON report (path or text); "num/den" strings become Fractions."""
    text = str(source)
    if not text.lstrip().startswith("{"):
        text = Path(source).read_text()
    doc = _parse_numbers(json.loads(text))
    if "columns" in doc and "rows" in doc:
        doc["records"] = [dict(zip(doc["columns"], r)) for r in doc["rows"]]
    return doc


# ---------------------------------------------------------------- input


def load_config(source: str) -> dict:
    """JSON/TOML file, an inline JSON object, or a bare kind name such as ``minkowski``."""
    try:
        if source.lstrip().startswith("{"):
            return json.loads(source)
        path = Path(source)
        if path.exists():
            text = path.read_text()
            if path.suffix.lower() == ".toml":
                return tomllib.loads(text)
            return json.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError, OSError) as exc:
        raise ConfigError(f"cannot read config {source!r}: {exc}") from exc
    if re.fullmatch(r"[a-z_]+", source):
        return {"kind": source}
    raise ConfigError(f"config {source!r} is neither a file nor inline JSON")


def _has_float(obj) -> bool:
    if isinstance(obj, float):
        return True
    if isinstance(obj, dict):
        return any(_has_float(v) for v in obj.values())
    if isinstance(obj, list):
        return any(_has_float(v) for v in obj)
    return False


def _guard_mode(cfg: dict, mode: str) -> None:
    if mode == "exact" and _has_float(cfg):
        raise ConfigError(
            "exact mode refuses float-valued inputs; write probabilities as "
            '"num/den" strings or rerun with --mode float'
        )


def _build(builder, cfg, mode):
    _guard_mode(cfg, mode)
    try:
        return builder(cfg)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"malformed config: {exc!r}") from exc


def _process(args):
    return _build(proc.process_from_config, load_config(args.process), args.mode)


def _cdf(args):
    """CDF from --cdf, or the CDF of the digit process given by --process."""
    if getattr(args, "cdf", None):
        return _build(cdfmod.cdf_from_config, load_config(args.cdf), args.mode)
    if getattr(args, "process", None):
        return cdfmod.FromProcess(_process(args))
    raise ConfigError("need --cdf or --process")


def _number(text: str, mode: str):
    text = text.strip()
    try:
        if mode == "float" and not _RATIONAL_RE.match(text):
            return float(text)
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad number {text!r}") from exc


def _numbers(text: str, mode: str) -> list:
    return [_number(t, mode) for t in text.split(",") if t.strip()]


def _word_str(word, q: int) -> str:
    return ("" if q <= 10 else "-").join(str(d) for d in word)


def _value_of(x, mode):
    return x if mode == "exact" else float(x)


# ---------------------------------------------------------------- subcommands


def cmd_cycles(args):
    cycles = baseq.enumerate_cycles(args.q, args.n)
    rows = [
        (args.q, args.n, i, _word_str(c.generator, args.q), sorted(c.members))
        for i, c in enumerate(cycles)
    ]
    header = {"count": len(cycles), "necklace_count": baseq.necklace_count(args.q, args.n)}
    return Report(header, ("q", "n", "index", "generator", "members"), rows), EXIT_OK


def cmd_simulate(args):
    p = _process(args)
    draws = proc.sample_many(p, args.n, args.size, args.seed, args.index)
    rows = []
    for i, row in enumerate(draws):
        word = tuple(int(d) for d in row)
        rows.append((i, _word_str(word, p.base), _value_of(baseq.word_value(word, p.base), args.mode)))
    header = {"q": p.base, "n": args.n, "size": args.size, "index": args.index}
    return Report(header, ("draw", "digits", "value"), rows), EXIT_OK


def cmd_stationary(args):
    p = _process(args)
    baseq.check_budget(p.base, args.depth + 1)
    res = proc.is_stationary(p, args.depth, args.tol)
    table = proc.finite_dim(p, args.depth)
    shifted = proc.shifted_finite_dim(p, args.depth)
    rows = [(_word_str(w, p.base), table[w], shifted[w]) for w in table.words()]
    header = {
        "pass": bool(res.stationary),
        "depth": args.depth,
        "defect": res.defect,
        "witness": _word_str(res.witness, p.base) if res.witness is not None else None,
    }
    code = EXIT_OK if res.stationary else EXIT_FAILED
    return Report(header, ("word", "p", "p_shifted"), rows), code


def _residual_report(rep):
    header = {
        "pass": rep.passed,
        "q": rep.q,
        "depth": rep.depth,
        "witness": rep.worst_point,
        "residual": rep.worst_residual,
        "max_residual": rep.max_residual,
        "tol": rep.tol,
    }
    rows = [(k, v) for k, v in sorted(rep.per_depth_max.items())]
    code = EXIT_OK if rep.passed else EXIT_FAILED
    return Report(header, ("order", "max_abs_residual"), rows), code


def _tol(args):
    if args.tol is not None:
        return args.tol
    return 0 if args.mode == "exact" else 1e-12


def cmd_verify(args):
    F = _cdf(args)
    rep = statcheck.verify_stationarity(F, args.q, args.depth, _tol(args))
    return _residual_report(rep)


def cmd_selfsim(args):
    F = _cdf(args)
    if args.weights:
        weights = _numbers(args.weights, args.mode)
    elif isinstance(F, cdfmod.FromProcess):
        weights = list(F.process.marginal())
    elif isinstance(F, cdfmod.IIDCdf):
        weights = list(F.probs)
    else:
        raise ConfigError("--weights is required for this CDF")
    rep = statcheck.self_similarity_scan(F, weights, args.depth, _tol(args))
    report, code = _residual_report(rep)
    report.header["weights"] = list(weights)
    return report, code


def cmd_cdf_eval(args):
    F = _cdf(args)
    if args.points:
        xs = _numbers(args.points, args.mode)
    else:
        q = args.q or getattr(F, "base", None)
        if q is None:
            raise ConfigError("need --points, or --grid with --q")
        baseq.check_budget(q, args.grid)
        M = q**args.grid
        xs = [Fraction(k, M) for k in range(M + 1)]
    rows = []
    for x in xs:
        try:
            v = F.eval(x)
            lo = hi = v
        except cdfmod.NotOnGridError:
            env = cdfmod.envelope(F.process, x, args.envelope_depth)
            v, lo, hi = None, env.lower, env.upper
        rows.append((x, v, lo, hi))
    if args.plot:
        from .plotting import plot_cdf

        ys = [r[1] if r[1] is not None else r[2] for r in rows]
        plot_cdf([r[0] for r in rows], ys, args.plot, [r[2] for r in rows], [r[3] for r in rows])
    header = {"points": len(rows), "plot": args.plot}
    return Report(header, ("x", "F", "lower", "upper"), rows), EXIT_OK


def _charfn_target(args):
    if getattr(args, "cdf", None):
        return _cdf(args)
    if getattr(args, "process", None):
        return _process(args)
    raise ConfigError("need --cdf or --process")


def _cf_row(v: charfn.CharFnValue):
    return (v.t, v.turns, v.value.real, v.value.imag, v.error_bound, v.stderr)


_CF_COLUMNS = ("t", "turns", "re", "im", "error_bound", "stderr")


def cmd_charfn(args):
    F = _charfn_target(args)
    header = {"depth": args.depth, "method": args.method}
    if args.limit_scan:
        if isinstance(F, proc.DigitProcess):
            F = cdfmod.FromProcess(F)
        scan = charfn.limit_scan(F, t_max=args.t_max, tol=args.tol, q=args.q, depth=args.depth)
        header.update(
            limit_found=scan.found,
            limit_re=scan.limit.real if scan.found else None,
            limit_im=scan.limit.imag if scan.found else None,
            spread=scan.spread,
            certified_limit=scan.certified_limit,
            two_part_residual=scan.two_part_residual,
        )
        rows = [_cf_row(v) for v in scan.values]
        return Report(header, _CF_COLUMNS, rows), EXIT_OK
    if args.turns:
        vals = [
            charfn.charfn_eval(F, turns=r, depth=args.depth, method=args.method,
                               samples=args.samples, seed=args.seed)
            for r in _numbers(args.turns, args.mode)
        ]
    elif args.t:
        vals = [
            charfn.charfn_eval(F, float(t), depth=args.depth, method=args.method,
                               samples=args.samples, seed=args.seed)
            for t in _numbers(args.t, "float")
        ]
    else:
        raise ConfigError("need --turns, --t or --limit-scan")
    return Report(header, _CF_COLUMNS, [_cf_row(v) for v in vals]), EXIT_OK


def cmd_probe(args):
    F = _charfn_target(args)
    per = charfn.periodicity_defect(F, args.q, args.K, args.depth)
    header = {
        "q": args.q,
        "k": args.k,
        "K": args.K,
        "periodicity_defect": per.defect,
        "periodicity_error_bound": per.error_bound,
        "periodicity_witness_k": per.witness_k,
    }
    if per.certified_nonzero:
        header["pass"] = False
        return Report(header, ("m",) + _CF_COLUMNS, []), EXIT_FAILED
    try:
        vals = charfn.rajchman_probe(F, args.q, args.k, args.M, args.depth)
    except ValueError as exc:
        header.update({"pass": False, "reason": str(exc)})
        return Report(header), EXIT_FAILED
    header["pass"] = True
    rows = [(m,) + _cf_row(v) for m, v in enumerate(vals)]
    return Report(header, ("m",) + _CF_COLUMNS, rows), EXIT_OK


def cmd_decompose(args):
    p = _process(args)
    if not p.stationary:
        raise ConfigError("decompose needs a stationary process")
    cfg = AtomScanConfig(args.max_order, _number(args.eps, "exact"), args.depth)
    try:
        d = decompose(p, cfg, samples=args.samples, seed=args.seed)
    except ValueError as exc:
        if "inconsistent" in str(exc):
            return Report({"pass": False, "reason": str(exc)}), EXIT_FAILED
        raise ConfigError(str(exc)) from exc
    chk = reconstruct_check(p, d, args.check_depth)
    header = {
        "pass": chk.passed,
        "theta1": d.theta[0],
        "theta2": d.theta[1],
        "theta3": d.theta[2],
        "theta1_lower": d.theta1_interval[0],
        "theta1_upper": d.theta1_interval[1],
        "unresolved_atom_bound": d.unresolved_atom_bound,
        "max_order": d.max_order,
        "depth": d.depth,
        "reconstruct_max_deviation": chk.max_deviation,
        "diagnostics": list(d.diagnostics),
    }
    rows = [
        (_word_str(a.cycle.generator, p.base), a.cycle.order, list(a.cycle.members), a.jump, a.error)
        for a in d.atoms
    ]
    code = EXIT_OK if chk.passed else EXIT_FAILED
    return Report(header, ("generator", "order", "members", "jump", "error"), rows), code


TRANSFER_FUNCTIONS = {
    "x": (lambda x: x, True),
    "x2": (lambda x: x * x, True),
    "sin": (statcheck.sin_turns, True),
    "cos": (statcheck.cos_turns, True),
    "tent": (lambda x: abs(x - Fraction(1, 2)) if isinstance(x, Fraction) else np.abs(x - 0.5), True),
}


def cmd_transfer(args):
    fn, exact = TRANSFER_FUNCTIONS[args.function]
    exact = exact and args.mode == "exact"
    g = statcheck.GridFunction.sample(fn, args.q, args.depth, exact=exact)
    ds = statcheck.transfer_convergence_report(g, args.iterations)
    rows = []
    for i, d in enumerate(ds):
        ratio = ds[i] / ds[i - 1] if i and ds[i - 1] else None
        rows.append((i, d, ratio))
    monotone = all(b <= a for a, b in zip(ds, ds[1:]))
    header = {"function": args.function, "q": args.q, "depth": args.depth, "monotone": monotone,
              "plot": args.plot}
    if args.plot:
        from .plotting import plot_transfer

        plot_transfer(ds, args.plot)
    return Report(header, ("iteration", "distance", "ratio"), rows), EXIT_OK


def cmd_example7(args):
    rows = statcheck.example7_data(args.m, args.points)
    jumps = statcheck.example7_jumps(args.m)
    integrals = sorted({args.m, *(int(v) for v in args.integrals.split(",") if v.strip())})
    header = {
        "m": args.m,
        "jumps": [b for b, _, _ in jumps],
        "jump_left": [lft for _, lft, _ in jumps],
        "jump_right": [rgt for _, _, rgt in jumps],
        "transfer_defect": statcheck.example7_transfer_defect(args.m, args.defect_depth),
        "plot": args.plot,
    }
    for k in integrals:
        header[f"partial_integral_{k}"] = statcheck.example7_partial_integral(k)
    if args.plot:
        from .plotting import plot_example7

        plot_example7(rows, args.plot, args.m)
    return Report(header, ("x", "f", "piece"), rows), EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse's default exit status 2 would collide with "check failed"
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--mode", choices=("exact", "float"), default="exact")
    common.add_argument("--max-cells", type=int, default=None,
                        help=f"override the q**n resource bound (env {baseq.MAX_CELLS_ENV})")
    common.add_argument("--out", default=None, help="write output here instead of stdout")

    parser = _Parser(prog="statdigits", description="Stationary base-q digit toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("cycles", cmd_cycles, "enumerate cycles of order n")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)

    sp = add("simulate", cmd_simulate, "sample digit strings")
    sp.add_argument("--process", required=True)
    sp.add_argument("--n", type=int, default=16)
    sp.add_argument("--size", type=int, default=10)
    sp.add_argument("--index", type=int, default=0)

    sp = add("stationary", cmd_stationary, "shift-invariance of a digit process")
    sp.add_argument("--process", required=True)
    sp.add_argument("--depth", type=int, default=5)
    sp.add_argument("--tol", type=float, default=0)

    sp = add("verify", cmd_verify, "stationarity functional equation on the grid")
    sp.add_argument("--cdf")
    sp.add_argument("--process")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--tol", type=float, default=None)

    sp = add("selfsim", cmd_selfsim, "self-similarity residuals")
    sp.add_argument("--cdf")
    sp.add_argument("--process")
    sp.add_argument("--weights", default=None, help="comma-separated, e.g. 2/3,1/3")
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--tol", type=float, default=None)

    sp = add("cdf-eval", cmd_cdf_eval, "evaluate a CDF (envelopes off the grid)")
    sp.add_argument("--cdf")
    sp.add_argument("--process")
    sp.add_argument("--points", default=None)
    sp.add_argument("--grid", type=int, default=4)
    sp.add_argument("--q", type=int, default=None)
    sp.add_argument("--envelope-depth", type=int, default=12)
    sp.add_argument("--plot", default=None, help="also render a figure to this file")

    sp = add("charfn", cmd_charfn, "characteristic function values")
    sp.add_argument("--cdf")
    sp.add_argument("--process")
    sp.add_argument("--turns", default=None, help="t / (2 pi), comma-separated rationals")
    sp.add_argument("--t", default=None, help="t, comma-separated floats")
    sp.add_argument("--depth", type=int, default=charfn.DEFAULT_DEPTH)
    sp.add_argument("--method", choices=("exact", "mc"), default="exact")
    sp.add_argument("--samples", type=int, default=20000)
    sp.add_argument("--limit-scan", action="store_true")
    sp.add_argument("--t-max", type=float, default=1e4)
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.add_argument("--q", type=int, default=2)

    sp = add("probe", cmd_probe, "periodicity defect and f(2 pi k q^m)")
    sp.add_argument("--cdf")
    sp.add_argument("--process")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--M", type=int, default=6)
    sp.add_argument("--K", type=int, default=10)
    sp.add_argument("--depth", type=int, default=charfn.DEFAULT_DEPTH)

    sp = add("decompose", cmd_decompose, "uniform / atomic / singular split")
    sp.add_argument("--process", required=True)
    sp.add_argument("--max-order", type=int, default=6)
    sp.add_argument("--eps", default="1/10000")
    sp.add_argument("--depth", type=int, default=None)
    sp.add_argument("--samples", type=int, default=1001)
    sp.add_argument("--check-depth", type=int, default=8)

    sp = add("transfer", cmd_transfer, "transfer-operator convergence")
    sp.add_argument("--function", choices=sorted(TRANSFER_FUNCTIONS), default="x")
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--depth", type=int, default=16)
    sp.add_argument("--iterations", type=int, default=12)
    sp.add_argument("--plot", default=None)

    sp = add("example7", cmd_example7, "non-integrable fixed point data")
    sp.add_argument("--m", type=int, default=4)
    sp.add_argument("--points", type=int, default=64, help="samples per piece")
    sp.add_argument("--integrals", default="", help="extra m values for partial integrals")
    sp.add_argument("--defect-depth", type=int, default=8)
    sp.add_argument("--plot", default=None)
    return parser


@contextlib.contextmanager
def _cell_bound(value):
    if value is None:
        yield
        return
    old = os.environ.get(baseq.MAX_CELLS_ENV)
    os.environ[baseq.MAX_CELLS_ENV] = str(value)
    try:
        yield
    finally:
        if old is None:
            del os.environ[baseq.MAX_CELLS_ENV]
        else:
            os.environ[baseq.MAX_CELLS_ENV] = old


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with _cell_bound(args.max_cells):
            report, code = args.func(args)
        text = render(report, args.format, args.mode, args.seed)
    except baseq.ResourceBoundError as exc:
        print(f"statdigits: resource bound: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        print(f"statdigits: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
