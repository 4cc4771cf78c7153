"""Command-line entry point: ``linlam <subcommand> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 size bound
exceeded, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from importlib import resources

from . import __version__
from . import enumerate as E
from . import series as S
from . import stats as ST
from . import symbolic as SY
from .maps import CombinatorialMap, MapError, canonical_relabel, rooting_convert
from .terms import TermError, format_term, parse_context, parse_term, term_to_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BOUND, EXIT_IO = 0, 1, 2, 3, 4

FORMATS = ("json", "jsonl", "csv", "text")

# desk-scale limits, checked before any heavy work
SERIES_LIMITS = {1: 1000, 2: 200, 3: 60}
STATS_LIMIT = 200
STATS_LIMIT_UNIVARIATE = 602
SYMBOLIC_LIMIT = SY.DEFAULT_WN_BOUND
VERIFY_SIZE_LIMIT = E.EXHAUSTIVE_BOUND


class UsageError(Exception):
    pass


class BoundError(Exception):
    pass


class Output:
    """A result: either a table (columns + rows) or a list of JSON records."""

    def __init__(self, command: str, columns=None, rows=None, records=None, text=None, ok=True):
        self.command = command
        self.columns = list(columns or [])
        self.rows = list(rows or [])
        self.records = records
        self.text = text
        self.ok = ok

    def as_records(self) -> list:
        if self.records is not None:
            return self.records
        return [dict(zip(self.columns, (_jsonable(v) for v in r))) for r in self.rows]


# ---------------------------------------------------------------- value rendering

def _float12(x: float) -> float:
    return float(f"{x:.12g}")


def _jsonable(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return _float12(v) if v == v and abs(v) != float("inf") else str(v)
    if isinstance(v, int):
        return int(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    try:
        return int(v)  # gmpy2.mpz and numpy integers
    except (TypeError, ValueError):
        return str(v)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(_jsonable(v), sort_keys=True)
    return str(v)


def load_schema() -> dict:
    text = resources.files("linlam").joinpath("schema/output.schema.json").read_text()
    return json.loads(text)


def render(out: Output, fmt: str, arguments: dict) -> str:
    if fmt == "csv":
        if out.records is not None and not out.columns:
            raise UsageError(f"{out.command} has no tabular form; use --format json or text")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out.columns)
        for r in out.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()
    if fmt == "jsonl":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in out.as_records())
    if fmt == "json":
        doc = {"command": out.command, "version": __version__, "arguments": arguments,
               "ok": out.ok, "results": out.as_records()}
        import jsonschema
        jsonschema.validate(doc, load_schema())
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out.text is not None:
        return out.text if out.text.endswith("\n") or not out.text else out.text + "\n"
    if out.columns:
        return "".join(" ".join(_cell(v) for v in r) + "\n" for r in out.rows)
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in out.as_records())


# ---------------------------------------------------------------- helpers

def _sizes(args, limit: int) -> list[int]:
    if args.size is not None:
        lo = hi = args.size
    else:
        if args.size_max is None:
            raise UsageError("give --size or --size-max")
        lo = args.size_min if args.size_min is not None else 0
        hi = args.size_max
    if lo < 0 or hi < lo:
        raise UsageError("sizes must satisfy 0 <= size-min <= size-max")
    if hi > limit:
        raise BoundError(f"size {hi} exceeds the bound {limit}")
    step = getattr(args, "step", 1) or 1
    return list(range(lo, hi + 1, step))


def _class(text: str, arity):
    try:
        return E.ClassId.parse(text, arity)
    except E.UnknownClass as exc:
        raise UsageError(f"{exc}; known: {', '.join(c.replace('_', '-') for c in E.CLASSES)}") from None


def _object_record(obj) -> dict:
    if isinstance(obj, CombinatorialMap) or hasattr(obj, "vertex_cycles"):
        return {"map": obj.to_json()}
    return {"term": format_term(obj), "debruijn": term_to_json(obj)}


def _read_map(text: str) -> CombinatorialMap:
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    try:
        return CombinatorialMap.from_json(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"bad map JSON: {exc}") from None


# ---------------------------------------------------------------- subcommands

def cmd_enumerate(args) -> Output:
    cid = _class(args.cls, args.arity)
    limit = E.MAP_BRUTE_FORCE_BOUND if cid.name.endswith("disconnected") else E.EXHAUSTIVE_BOUND
    sizes = _sizes(args, limit)
    rows, lines = [], []
    for n in sizes:
        for i, obj in enumerate(E.enumerate_class(cid, n, workers=args.workers)):
            rec = _object_record(obj)
            text = rec.get("term") or json.dumps(rec["map"], sort_keys=True)
            rows.append([n, i, text])
            lines.append(text)
    records = []
    for n, i, text in rows:
        records.append({"class": cid.name, "n": n, "index": i, "object": text})
    return Output("enumerate", ["n", "index", "object"], rows, records=records,
                  text="\n".join(lines))


def cmd_count(args) -> Output:
    cid = _class(args.cls, args.arity)
    sizes = _sizes(args, E.SERIES_BOUND)
    rows = [[cid.name, n, E.count_class(cid, n)] for n in sizes]
    text = "\n".join(str(r[2]) for r in rows) if args.size is not None else None
    return Output("count", ["class", "n", "count"], rows, text=text)


def cmd_biject(args) -> Output:
    from . import bijections as BJ
    which, d = args.which, args.direction
    rec: dict = {"bijection": which}
    try:
        if which == "tau":
            if d in (None, "forward"):
                t = parse_term(_need(args.term, "--term"))
                m = BJ.term_to_map(t)
                rec.update(input=format_term(t), output=m.to_json(),
                           roundtrip=BJ.map_to_term(m) == t)
            else:
                m = _read_map(_need(args.map, "--map"))
                t = BJ.map_to_term(m)
                rec.update(input=m.to_json(), output=format_term(t),
                           roundtrip=canonical_relabel(BJ.term_to_map(t)) == canonical_relabel(m))
        elif which == "rooting":
            d = d or "open_to_half_edge"
            m = BJ.term_to_map(parse_term(args.term)) if args.term else _read_map(_need(args.map, "--map"))
            out = rooting_convert(m, d)
            other = "half_edge_to_open" if d == "open_to_half_edge" else "open_to_half_edge"
            back = rooting_convert(out, other)
            from .maps import canonical_form
            rec.update(input=m.to_json(), output=out.to_json(),
                       roundtrip=canonical_form(back) == canonical_form(m))
        elif which == "slide":
            d = d or "forward"
            t = parse_term(_need(args.term, "--term"))
            s = BJ.slide(t, d)
            back = BJ.slide(s, "backward" if d == "forward" else "forward")
            rec.update(input=format_term(t), output=format_term(s), roundtrip=back == t)
        elif which == "psi":
            t = parse_term(_need(args.term, "--term"))
            first, second = BJ.psi(t, "decompose")
            rec.update(input=format_term(t),
                       output=[first if first == BJ.Z2 else format_term(first), format_term(second)],
                       roundtrip=BJ.psi((first, second), "rebuild") == t)
        elif which == "factor":
            c = parse_context(_need(args.term, "--term"))
            fs = BJ.factor_context(c, "factor")
            rec.update(input=format_term(c), output=[format_term(q) for q in fs],
                       in_Q=BJ.is_in_Q(c), roundtrip=BJ.factor_context(fs, "multiply") == c)
        elif which == "b1":
            t = parse_term(_need(args.term, "--term"))
            parts = BJ.decompose_B1(t, "decompose")
            if parts == ("var",):
                shown = ["var"]
            else:
                side, tm, pointed = parts
                shown = [side, format_term(tm), format_term(pointed.context), format_term(pointed.subterm)]
            rec.update(input=format_term(t), output=shown,
                       roundtrip=BJ.decompose_B1(parts, "rebuild") == t)
        else:  # pragma: no cover - argparse restricts the choices
            raise UsageError(which)
    except (TermError, MapError, BJ.BijectionError) as exc:
        raise UsageError(str(exc)) from None
    out = rec["output"]
    text = out if isinstance(out, str) else json.dumps(out, sort_keys=True, ensure_ascii=False)
    return Output("biject", records=[rec], text=text, ok=rec["roundtrip"])


def _need(v, flag: str):
    if v is None:
        raise UsageError(f"{flag} is required here")
    return v


def cmd_series(args) -> Output:
    try:
        name = S._catalog_name(args.which)
    except S.SeriesError as exc:
        raise UsageError(str(exc)) from None
    arity = S._ARITY[name]
    given = [o for o in (args.order, args.order2, args.order3) if o is not None]
    if not given:
        raise UsageError("--order is required")
    default_extra = {"T": "n", "T_hadamard": "n", "T_id": "half", "T_sub": 8, "S_sub": 8,
                     "D": "n", "A": "n"}
    orders = list(given[:arity])
    while len(orders) < arity:
        rule = default_extra.get(name, 8)
        orders.append(orders[0] + 1 if rule == "n" else orders[0] // 2 + 1 if rule == "half" else rule)
    if len(given) > arity:
        raise UsageError(f"{name} takes {arity} orders")
    if any(o < 1 for o in orders):
        raise UsageError("orders must be positive")
    if max(orders) > SERIES_LIMITS[arity]:
        raise BoundError(f"order {max(orders)} exceeds the bound {SERIES_LIMITS[arity]} for {arity}-variable series")
    s = S.series_catalog(name, *orders)
    # univariate series get a constant k = 0 column so every table has (n, k, ...)
    key_cols = ["n", "k", "j"][:max(arity, 2)]
    terms = sorted(s.nonzero_terms())
    values = [c for _, c in terms]
    integral = all(Fraction(c).denominator == 1 for c in values)
    val_cols = ["count"] if integral else ["numerator", "denominator"]
    if args.decimal:
        val_cols = val_cols + ["value"]
    rows = []
    for exps, c in terms:
        key = list(exps) + ([0] if arity == 1 else [])
        c = Fraction(c)
        row = key + ([c.numerator] if integral else [c.numerator, c.denominator])
        if args.decimal:
            row.append(float(c))
        rows.append(row)
    return Output("series", key_cols + val_cols, rows)


def cmd_symbolic(args) -> Output:
    if args.N < 1:
        raise UsageError("--N must be positive")
    if args.N > SYMBOLIC_LIMIT:
        raise BoundError(f"N={args.N} exceeds the bound {SYMBOLIC_LIMIT}")
    if args.report == "wn":
        recs = []
        for N in range(1, args.N + 1):
            w = SY.compute_WN(N)
            recs.append({"N": N, "k": w.k, "terms": len(w.numerator), "numerator": str(w.numerator),
                         "denominator": str(w.denominator)})
        text = "\n".join(f"W_{r['N']} = ({r['numerator']}) / ({r['denominator']})^{r['k']}" for r in recs)
        return Output("symbolic", records=recs, text=text)
    if args.report == "balanced":
        rows = []
        for N in range(1, args.N + 1):
            w = SY.compute_WN(N)
            for j, row in sorted(SY.balanced_coefficients(w.numerator, w.k).items()):
                for i, c in sorted(row.items()):
                    rows.append([N, j, i, c])
        return Output("symbolic", ["N", "j", "i", "alpha"], rows)
    if args.report == "invariants":
        rep = SY.check_induction_invariants(args.N)
        rows = [[r["N"], r["j"], r["sum_i_alpha"], r["sum_alpha"]] for r in rep.rows]
        return Output("symbolic", ["N", "j", "sum_i_alpha", "sum_alpha"], rows, ok=rep.passed)
    if args.report == "substitution":
        if args.N > 4:
            raise BoundError("substitution checks are limited to N <= 4")
        rows = []
        for N in range(1, args.N + 1):
            ok, first = SY.substitution_check(N, args.order_z)
            rows.append([N, args.order_z, ok, None if ok else str(first)])
        return Output("symbolic", ["N", "order_z", "passed", "first_difference"], rows,
                      ok=all(r[2] for r in rows))
    raise UsageError(args.report)  # pragma: no cover


DISTRIBUTIONS = {
    "identity": (ST.identity_distribution, STATS_LIMIT_UNIVARIATE),
    "bridges": (ST.bridge_distribution, STATS_LIMIT),
    "freevars": (ST.free_variable_distribution, STATS_LIMIT),
    "unused": (ST.unused_abstraction_distribution, STATS_LIMIT),
}


def cmd_stats(args) -> Output:
    modes = [m for m in (args.distribution, args.target, args.saddle) if m]
    if len(modes) != 1:
        raise UsageError("give exactly one of --distribution, --target, --saddle")
    if args.target:
        if args.target not in ST.TARGETS:
            raise UsageError(f"unknown target; known: {', '.join(ST.TARGETS)}")
        if args.size_max is not None and args.size_max > STATS_LIMIT_UNIVARIATE:
            raise BoundError(f"size {args.size_max} exceeds the bound {STATS_LIMIT_UNIVARIATE}")
        rep = ST.schema_conclusion_check(args.target, args.size_max)
        if args.figure:
            from .plotting import trend_figure
            _figure(trend_figure, rep, args.figure)
        lines = [f"{c['check']}: {'pass' if c['passed'] else 'FAIL'}" for c in rep.checks]
        lines.append("terminal: " + json.dumps(_jsonable(rep.terminal), sort_keys=True))
        return Output("stats", records=[_jsonable(rep.to_dict())], text="\n".join(lines), ok=rep.passed)
    if args.saddle:
        if args.saddle not in ST.FORMULAS:
            raise UsageError(f"unknown formula; known: {', '.join(ST.FORMULAS)}")
        sizes = _sizes(args, 2000)
        rows = []
        for n in sizes:
            approx = ST.asymptotic_eval(args.saddle, n, args.aux, args.as_printed)
            try:
                ex = float(ST.exact_coefficient(args.saddle, n, int(args.aux)))
                err = ST.relative_error(args.saddle, n, int(args.aux), args.as_printed)
            except (ST.StatsError, OverflowError):
                ex, err = None, None
            rows.append([args.saddle, n, args.aux, approx, ex, err])
        return Output("stats", ["formula", "n", "aux", "asymptotic", "exact", "relative_error"], rows)
    fn, limit = DISTRIBUTIONS[args.distribution]
    sizes = _sizes(args, limit)
    tables = [fn(n) for n in sizes]
    rows = []
    for d in tables:
        if d.total == 0:
            continue
        for n, k, c, p in d.to_rows():
            rows.append([n, k, c, float(p)])
    if args.figure:
        from .plotting import density_figure
        _figure(density_figure, [d for d in tables if d.total], args.figure)
    return Output("stats", ["n", "k", "count", "probability"], rows)


def _figure(fn, data, path):
    try:
        fn(data, path)
    except OSError as exc:
        raise OSError(f"cannot write figure {path}: {exc}") from exc


def cmd_verify(args) -> Output:
    from . import verification as V
    names = list(V.SUITES) if args.suite == "all" else [args.suite]
    if args.size_max is not None and args.size_max > VERIFY_SIZE_LIMIT:
        raise BoundError(f"size {args.size_max} exceeds the bound {VERIFY_SIZE_LIMIT}")
    results = []
    for name in names:
        kw = {}
        if name == "bijections":
            if args.size_max is not None:
                kw = {"size_max": args.size_max, "context_max": min(args.size_max, 9)}
            kw["workers"] = args.workers
        elif name == "counting" and args.size_max is not None:
            kw = {"exhaustive_max": args.size_max}
        elif name == "bridgeless" and args.size_max is not None:
            kw = {"exhaustive_max": args.size_max}
        elif name == "determinism":
            kw = {"workers": max(args.workers, 2)}
        results.append(V.run_suite(name, **kw))
    records = []
    lines = []
    for r in results:
        d = _jsonable(r.to_dict())
        d.pop("seconds")
        records.append(d)
        lines.append(f"{r.suite}: {'pass' if r.passed else 'FAIL'} ({r.seconds:.1f}s)")
        lines += [f"  {c['check']}: {'pass' if c['passed'] else 'FAIL'}" for c in r.checks]
    rows = [[r.suite, c["check"], c["passed"]] for r in results for c in r.checks]
    return Output("verify", ["suite", "check", "passed"], rows, records=records,
                  text="\n".join(lines), ok=all(r.passed for r in results))


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="linlam", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"linlam {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt="jsonl"):
        sp.add_argument("--format", choices=FORMATS, default=fmt)
        sp.add_argument("--output", "-o", help="write to this path instead of stdout")

    def sizes(sp):
        sp.add_argument("--size", type=int)
        sp.add_argument("--size-min", type=int)
        sp.add_argument("--size-max", type=int)

    sp = sub.add_parser("enumerate", help="stream the objects of a class")
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--arity", type=int)
    sizes(sp)
    sp.add_argument("--workers", type=int, default=1)
    common(sp)

    sp = sub.add_parser("count", help="exact class sizes")
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--arity", type=int)
    sizes(sp)
    common(sp, "text")

    sp = sub.add_parser("biject", help="apply a bijection and check its inverse")
    sp.add_argument("--which", required=True, choices=("tau", "rooting", "slide", "psi", "factor", "b1"))
    sp.add_argument("--term", help="term (or context, for factor) in \\x. syntax")
    sp.add_argument("--map", help="map as JSON, or @path")
    sp.add_argument("--direction",
                    choices=("forward", "backward", "open_to_half_edge", "half_edge_to_open"))
    common(sp, "text")

    sp = sub.add_parser("series", help="coefficients of a catalog series")
    sp.add_argument("--which", required=True)
    sp.add_argument("--order", type=int)
    sp.add_argument("--order2", type=int)
    sp.add_argument("--order3", type=int)
    sp.add_argument("--decimal", action="store_true", help="add a float value column")
    common(sp, "csv")

    sp = sub.add_parser("symbolic", help="W_N numerators and their invariants")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--report", choices=("wn", "invariants", "balanced", "substitution"), default="wn")
    sp.add_argument("--order-z", type=int, default=14)
    common(sp, "text")

    sp = sub.add_parser("stats", help="exact distributions, trend reports, saddle-point checks")
    sp.add_argument("--distribution", choices=tuple(DISTRIBUTIONS))
    sp.add_argument("--target")
    sp.add_argument("--saddle", metavar="FORMULA")
    sp.add_argument("--aux", type=float, default=1.0)
    sp.add_argument("--as-printed", action="store_true")
    sizes(sp)
    sp.add_argument("--step", type=int, default=1)
    sp.add_argument("--figure", metavar="PATH", help="also render a PNG figure")
    common(sp, None)  # csv for tables, json for trend reports

    sp = sub.add_parser("verify", help="run verification suites")
    sp.add_argument("--suite", default="all",
                    choices=("counting", "bridgeless", "bijections", "identities", "poisson", "gaussian",
                             "growth", "symbolic", "saddle", "determinism", "all"))
    sp.add_argument("--size-max", type=int)
    sp.add_argument("--workers", type=int, default=1)
    common(sp, "text")
    return p


COMMANDS = {"enumerate": cmd_enumerate, "count": cmd_count, "biject": cmd_biject, "series": cmd_series,
            "symbolic": cmd_symbolic, "stats": cmd_stats, "verify": cmd_verify}


def _arguments(args) -> dict:
    skip = {"output", "format", "command"}
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def run_command(argv) -> tuple[int, str]:
    """Run one command in-process; returns (exit status, stdout text)."""
    import contextlib
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        try:
            code = main(argv)
        except SystemExit as exc:  # argparse usage errors and --help
            code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
    return code, buf.getvalue()


def emit_table(data, fmt: str = "csv") -> bytes:
    """Render a DistributionTable (or a list of them) or a TruncatedSeries as a table."""
    if isinstance(data, S.TruncatedSeries):
        cols = ["n", "k", "j"][:max(len(data.variables), 2)]
        rows = [list(e) + ([0] if len(e) == 1 else []) + [Fraction(c)] for e, c in sorted(data.nonzero_terms())]
        out = Output("series", cols + ["count"], rows)
    else:
        tables = data if isinstance(data, (list, tuple)) else [data]
        rows = [[n, k, c, float(p)] for d in tables if d.total for n, k, c, p in d.to_rows()]
        out = Output("stats", ["n", "k", "count", "probability"], rows)
    return render(out, fmt, {}).encode("utf-8")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) is not None and getattr(args, "workers", 1) < 1:
        print("linlam: error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.format is None:
        args.format = "json" if getattr(args, "target", None) else "csv"
    try:
        out = COMMANDS[args.command](args)
        payload = render(out, args.format, _arguments(args))
    except UsageError as exc:
        print(f"linlam: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BoundError, E.BoundExceeded) as exc:
        print(f"linlam: bound exceeded: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (E.EnumerationError, S.SeriesError, ST.StatsError, ValueError) as exc:
        print(f"linlam: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"linlam: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(payload)
        else:
            sys.stdout.write(payload)
            sys.stdout.flush()
    except OSError as exc:
        print(f"linlam: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if out.ok else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
