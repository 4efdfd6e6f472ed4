"""Command-line interface: ``qconverse {bound,scan,erasure,verify}``.

Exit codes: 0 success, 2 malformed input (bad channel spec, missing file,
bad flag), 3 solver failure, 4 value outside its domain (e.g. eps = 1).
``QCONVERSE_THREADS`` sets the worker count for grid evaluations.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import asymptotics as asy
from . import bounds, channel, verify
from .sdpcore.serialize import dumps

EXIT_OK, EXIT_MALFORMED, EXIT_SOLVER, EXIT_DOMAIN = 0, 2, 3, 4
THREADS_ENV = "QCONVERSE_THREADS"

BOUND_NAMES = {
    "mw": "mw",
    "mw_dual": "mw_dual",
    "ns": "ns",
    "activated_ns": "activated_ns",
    "act": "activated_ns",
    "meta": "meta",
    "c_beta": "c_beta",
    "cbeta": "c_beta",
}

PROBLEM_BUILDERS = {
    "mw": bounds.mw_problem,
    "mw_dual": bounds.mw_dual_problem,
    "ns": bounds.ns_problem,
    "activated_ns": lambda c, eps: bounds.ns_problem(channel.tensor(c, channel.noiseless_channel(2)), eps),
    "meta": bounds.metaconverse_problem,
    "c_beta": lambda c, eps: bounds.beta_problem(c.op, c.dims)[0],
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- number encoding ------------------------------------------------------------


def encode_number(v):
    """Shortest round-trip decimal for floats; infinities and NaN as tokens."""
    if v is None or isinstance(v, (bool, int, str)):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan-rejected"
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return v


def _encode_record(rec: dict) -> dict:
    return {k: encode_number(v) for k, v in rec.items()}


def render(records: list[dict], fmt: str) -> str:
    rows = [_encode_record(r) for r in records]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    fields: list[str] = []
    for r in rows:
        fields.extend(k for k in r if k not in fields)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if r.get(k) is None else repr(r[k]) if isinstance(r.get(k), float) else r[k]) for k in fields})
    return buf.getvalue()


def emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# -- parsing helpers -------------------------------------------------------------


def parse_floats(text: str, what: str) -> list[float]:
    """Comma list of numbers, or ``start:stop:count`` for an inclusive linear grid."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            n = int(count)
            if n < 1:
                raise ValueError
            a, b = float(start), float(stop)
            return [a] if n == 1 else [a + (b - a) * i / (n - 1) for i in range(n)]
        vals = [float(Fraction(x.strip())) if "/" in x else float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(EXIT_MALFORMED, f"cannot parse {what} grid {text!r}") from None
    if not vals:
        raise CliError(EXIT_MALFORMED, f"{what} grid is empty")
    return vals


def parse_ints(text: str, what: str) -> list[int]:
    vals = parse_floats(text, what)
    if any(v != int(v) for v in vals):
        raise CliError(EXIT_MALFORMED, f"{what} values must be integers: {text!r}")
    return [int(v) for v in vals]


def parse_bounds(text: str) -> list[str]:
    names = []
    for item in text.split(","):
        key = item.strip()
        if key not in BOUND_NAMES:
            raise CliError(EXIT_MALFORMED, f"unknown bound {key!r}; known: {', '.join(sorted(BOUND_NAMES))}")
        names.append(BOUND_NAMES[key])
    if not names:
        raise CliError(EXIT_MALFORMED, "no bounds requested")
    return names


def load_channel(args) -> tuple[channel.ChannelSpec, channel.ChoiMatrix]:
    if bool(args.builtin) == bool(args.channel):
        raise CliError(EXIT_MALFORMED, "give exactly one of --builtin or --channel")
    try:
        spec = channel.parse_descriptor(args.builtin) if args.builtin else channel.load_spec(args.channel)
        return spec, channel.spec_to_choi(spec)
    except channel.ChannelSpecError as exc:
        raise CliError(EXIT_MALFORMED, str(exc)) from None


def describe(spec: channel.ChannelSpec) -> str:
    if spec.kind == "builtin":
        params = ",".join(f"{k}={v}" for k, v in spec.parameters.items())
        return f"{spec.name}:{params}" if params else spec.name
    return spec.name


def check_eps_grid(eps_grid: Iterable[float]) -> None:
    for eps in eps_grid:
        try:
            bounds.check_eps(eps)
        except bounds.DomainError as exc:
            raise CliError(EXIT_DOMAIN, str(exc)) from None


def workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise CliError(EXIT_MALFORMED, f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def ordered_map(fn: Callable, items: Sequence) -> list:
    n = workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))  # map keeps grid order


# -- subcommands -----------------------------------------------------------------


def _bound_record(c, label: str, bound: str, eps: float, seed: int, timing: bool, extra: dict) -> dict:
    t0 = time.perf_counter()
    rec = {"channel": label, **extra, "bound": bound, "eps": eps}
    try:
        res = bounds.BOUNDS[bound](c, eps)
    except bounds.SolverFailure as exc:
        sol = exc.solution
        rec.update(
            value_bits=None,
            primal_value=sol.primal_value,
            dual_value=sol.dual_value,
            gap=sol.gap,
            residual_primal=sol.residuals["primal"],
            residual_dual=sol.residuals["dual"],
            solver_iterations=sol.iterations,
            status=sol.status,
        )
    else:
        rec.update(
            value_bits=res.value_bits,
            primal_value=res.primal_value,
            dual_value=res.dual_value,
            gap=res.gap,
            residual_primal=res.residuals["primal"],
            residual_dual=res.residuals["dual"],
            solver_iterations=res.iterations,
            status="optimal",
        )
    rec["wall_time_ms"] = (time.perf_counter() - t0) * 1e3 if timing else 0.0
    rec["seed"] = seed
    return rec


def _finish(records: list[dict], args) -> int:
    emit(render(records, args.format), args.output)
    failed = [r for r in records if r.get("status", "optimal") != "optimal"]
    if failed:
        print(f"error: {len(failed)} solve(s) did not reach optimality", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _dump_problems(c, names, eps_grid, directory: str) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name in names:
        for i, eps in enumerate(eps_grid):
            form = PROBLEM_BUILDERS[name](c, eps).compile()
            (out / f"{name}-{i}.sdp").write_text(dumps(form))


def cmd_bound(args) -> int:
    spec, c = load_channel(args)
    names = parse_bounds(args.bounds)
    eps_grid = parse_floats(args.eps, "eps")
    check_eps_grid(eps_grid)
    if args.dump:
        _dump_problems(c, names, eps_grid, args.dump)
    label = describe(spec)
    grid = [(b, e) for b in names for e in eps_grid]
    records = ordered_map(lambda item: _bound_record(c, label, item[0], item[1], args.seed, args.timing, {}), grid)
    return _finish(records, args)


def cmd_scan(args) -> int:
    if not args.builtin:
        raise CliError(EXIT_MALFORMED, "scan varies a builtin parameter; use --builtin")
    key, eq, grid_text = args.vary.partition("=")
    if not eq:
        raise CliError(EXIT_MALFORMED, f"--vary must look like key=grid, got {args.vary!r}")
    values = parse_floats(grid_text, key)
    names = parse_bounds(args.bounds)
    eps_grid = parse_floats(args.eps, "eps")
    check_eps_grid(eps_grid)
    base = channel.parse_descriptor(args.builtin)
    channels = []
    for v in values:
        params = dict(base.parameters)
        params[key] = repr(v) if not float(v).is_integer() or key not in ("d", "m", "din", "dout", "seed", "rank") else str(int(v))
        spec = channel.ChannelSpec(base.name, "builtin", params)
        try:
            channels.append((v, describe(spec), channel.spec_to_choi(spec)))
        except channel.ChannelSpecError as exc:
            code = EXIT_DOMAIN if "[0, 1]" in str(exc) or "outside" in str(exc) else EXIT_MALFORMED
            raise CliError(code, str(exc)) from None
    grid = [(v, label, c, b, e) for v, label, c in channels for b in names for e in eps_grid]
    records = ordered_map(
        lambda it: _bound_record(it[2], it[1], it[3], it[4], args.seed, args.timing, {key: it[0]}), grid
    )
    return _finish(records, args)


def cmd_erasure(args) -> int:
    try:
        if not 0.0 <= args.p <= 1.0:
            raise bounds.DomainError(f"p must lie in [0, 1], got {args.p}")
        if args.d < 2:
            raise bounds.DomainError(f"d must be >= 2, got {args.d}")
        ns = parse_ints(args.n, "n")
        if any(n < 1 for n in ns):
            raise bounds.DomainError("blocklengths must be positive")
        records = []
        if args.moderate:
            exponent = float(Fraction(args.a_exponent))
            for n in ns:
                t0 = time.perf_counter()
                a_n = n ** (-exponent)
                out = asy.erasure_moderate(args.d, args.p, n, a_n)
                records.append(
                    {
                        "d": args.d,
                        "p": args.p,
                        "n": n,
                        "a_n": a_n,
                        "eps_n": out.eps_n,
                        "rate_low": out.rate_low,
                        "rate_high": out.rate_high,
                        "exact_rate_low": out.exact_rate_low,
                        "exact_rate_high": out.exact_rate_high,
                        "wall_time_ms": (time.perf_counter() - t0) * 1e3 if args.timing else 0.0,
                        "seed": args.seed,
                    }
                )
        else:
            eps_grid = parse_floats(args.eps, "eps")
            for n in ns:
                for eps in eps_grid:
                    t0 = time.perf_counter()
                    out = asy.erasure_second_order(asy.ErasureModel(args.d, args.p, n, eps))
                    records.append(
                        {
                            "d": args.d,
                            "p": args.p,
                            "n": n,
                            "eps": eps,
                            "exact_bits": out.exact_bits,
                            "first_order_bits": out.first_order_bits,
                            "second_order_bits": out.second_order_bits,
                            "expansion_bits": out.expansion_bits,
                            "residual_bits": out.residual_bits,
                            "wall_time_ms": (time.perf_counter() - t0) * 1e3 if args.timing else 0.0,
                            "seed": args.seed,
                        }
                    )
    except bounds.DomainError as exc:
        raise CliError(EXIT_DOMAIN, str(exc)) from None
    emit(render(records, args.format), args.output)
    return EXIT_OK


ALL_SUITES = tuple(verify.SUITES)


def cmd_verify(args) -> int:
    names = args.suite or list(ALL_SUITES)
    for name in names:
        if name not in ALL_SUITES:
            raise CliError(EXIT_MALFORMED, f"unknown suite {name!r}; known: {', '.join(ALL_SUITES)}")
    ms = parse_ints(args.m, "m") if args.m else None
    results: list[verify.SuiteResult] = []
    for name in names:
        results.extend(verify.run_suite(name, seed=args.seed, samples=args.samples, ms=ms))
    if args.format == "json":
        doc = [
            {
                "suite": r.name,
                "passed": r.passed,
                "checks": len(r.checks),
                "worst_deviation": encode_number(r.worst_deviation),
                "worst_ratio": encode_number(r.worst),
                "errors": r.errors,
                "seed": args.seed,
            }
            for r in results
        ]
        emit(json.dumps(doc, indent=2) + "\n", args.output)
    else:
        lines = []
        for r in results:
            tag = "PASS" if r.passed else "FAIL"
            lines.append(
                f"{tag} {r.name}: {len(r.checks)} checks, worst deviation {r.worst_deviation:.3e} "
                f"({r.worst:.3g} of tolerance)"
            )
            lines.extend(f"  error: {e}" for e in r.errors)
            lines.extend(f"  failed: {c.label} deviation {c.deviation:.3e} > {c.tolerance:.1e}" for c in r.checks if not c.passed)
        lines.append(f"seed {args.seed}")
        emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if all(r.passed for r in results) else 1


# -- argument parser ---------------------------------------------------------------


def _common(p: argparse.ArgumentParser, default_format: str = "json") -> None:
    p.add_argument("--format", choices=("json", "csv"), default=default_format)
    p.add_argument("--output", help="write to this path instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="record wall times (output is then not byte-reproducible)")


def _channel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--builtin", help="builtin channel, e.g. erasure:d=2,p=0.5")
    p.add_argument("--channel", help="path to a JSON channel spec")
    p.add_argument("--bounds", default="mw", help="comma list of: " + ", ".join(sorted(BOUND_NAMES)))
    p.add_argument("--eps", default="0.1", help="comma list or start:stop:count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qconverse", description="Converse bounds for classical communication over quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="evaluate bounds for one channel")
    _channel_args(p)
    p.add_argument("--dump", metavar="DIR", help="also write each compiled program to DIR")
    _common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("scan", help="evaluate bounds over a builtin parameter grid")
    _channel_args(p)
    p.add_argument("--vary", required=True, help="parameter grid, e.g. p=0:1:11 or p=0.1,0.2")
    _common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("erasure", help="exact and asymptotic erasure-channel analysis")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--n", default="100,1000", help="blocklengths")
    p.add_argument("--eps", default="0.05")
    p.add_argument("--moderate", action="store_true", help="moderate-deviation regime eps_n = exp(-n a_n^2)")
    p.add_argument("--a-exponent", default="1/3", help="a_n = n^(-exponent) in the moderate regime")
    _common(p)
    p.set_defaults(func=cmd_erasure)

    p = sub.add_parser("verify", help="run the seeded property suites")
    p.add_argument("--suite", action="append", help="suite name (repeatable); default all")
    p.add_argument("--samples", type=int, help="random instances per suite")
    p.add_argument("--m", help="noiseless dimensions for the additivity suite")
    _common(p, default_format="text")
    p.set_defaults(func=cmd_verify)
    for action in p._actions:
        if action.dest == "format":
            action.choices = ("text", "json")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except bounds.DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
