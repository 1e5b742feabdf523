"""``tubgemm`` command line: gemm, compare, estimate, profile, gen, repro.

Exit codes: 0 ok, 2 usage, 3 parse, 4 domain/range, 5 overflow,
6 mismatch or failed reproduction check, 7 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .encoding import Polarity
from .errors import (
    AccumulatorOverflowError,
    StreamFormatError,
    TraceFormatError,
    TubGemmError,
)
from .files import format_matrix, read_matrix, read_sidecar, write_matrix
from .gemm import (
    GemmConfig,
    MatrixOperands,
    random_config,
    random_operands,
    reference_gemm,
    simulate_gemm,
)
from .perf import LatencyModel, PowerProfile, estimate, sweep_table
from .sparsity import (
    MaxValueHistogram,
    cumulative,
    load_fixture,
    profile_simulation,
    read_trace,
    write_histogram,
    write_trace,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_DOMAIN = 4
EXIT_OVERFLOW = 5
EXIT_MISMATCH = 6
EXIT_IO = 7

COMPARE_SCHEMA = "tubgemm.compare/1"
ESTIMATE_SCHEMA = "tubgemm.estimate/1"
GEMM_SCHEMA = "tubgemm.gemm/1"
REPRO_SCHEMA = "tubgemm.repro/1"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# output helpers


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows, schema: str) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {schema}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


# --------------------------------------------------------------------------
# argument plumbing


def _parse_overhead(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("overhead must be non-negative")
    return value


def _add_format_flags(p, *, overhead_help: str):
    p.add_argument("--bits", type=int, choices=(2, 4, 8), help="operand bit-width (default 8)")
    p.add_argument("--polarity", choices=[x.value for x in Polarity], help="default bipolar")
    p.add_argument("--unary-base", type=int, choices=(1, 2, 4, 8), help="unary base n (default 2)")
    p.add_argument("--overhead", type=_parse_overhead, help=overhead_help)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", help="report path (default stdout)")


def _add_shape_flags(p):
    p.add_argument("--m", type=int, help="rows of A")
    p.add_argument("--n", type=int, help="inner dimension")
    p.add_argument("--p", type=int, help="columns of B")


def _config_kwargs(args, sidecar: dict | None = None) -> dict:
    kw = dict(sidecar or {})
    if args.bits is not None:
        kw["bitwidth"] = args.bits
    if args.polarity is not None:
        kw["polarity"] = args.polarity
    if args.unary_base is not None:
        kw["unary_base"] = args.unary_base
    return kw


def _integer_overhead(args, kw: dict) -> dict:
    if args.overhead is not None:
        if args.overhead.denominator != 1:
            raise UsageError("the simulator needs an integer --overhead")
        kw["step_overhead_cycles"] = int(args.overhead)
    if getattr(args, "epilogue", None) is not None:
        kw["epilogue_cycles"] = args.epilogue
    return kw


def _load_profile(args) -> PowerProfile:
    if getattr(args, "profile", None):
        return PowerProfile.from_json(args.profile)
    return PowerProfile.default()


def _latency_model(args) -> LatencyModel:
    if args.overhead is None:
        return LatencyModel()
    return LatencyModel(step_overhead=args.overhead)


def _load_operands(args) -> tuple[GemmConfig, MatrixOperands]:
    A = read_matrix(args.a)
    B = read_matrix(args.b)
    C = read_matrix(args.c) if args.c else None
    ops = MatrixOperands(A, B, C)
    M, N, P = ops.shape
    for flag, have in (("m", M), ("n", N), ("p", P)):
        want = getattr(args, flag)
        if want is not None and want != have:
            raise UsageError(f"--{flag} {want} does not match the input files ({have})")
    sidecar = read_sidecar(args.config) if args.config else None
    kw = _integer_overhead(args, _config_kwargs(args, sidecar))
    return GemmConfig(M, N, P, **kw), ops


# --------------------------------------------------------------------------
# subcommands


def cmd_gemm(args) -> int:
    cfg, ops = _load_operands(args)
    Y, report = simulate_gemm(cfg, ops, mode=args.mode)
    if args.y_out:
        write_matrix(Y, args.y_out)
    if args.format == "json":
        doc = {
            "schema": GEMM_SCHEMA,
            "config": cfg.to_dict(),
            "report": report.to_dict(),
            "Y": Y.tolist(),
        }
        _emit(_dump_json(doc), args.output)
    else:
        rows = [
            (k, c, d) for k, (c, d) in enumerate(zip(report.per_step_cycles, report.done_cycles))
        ]
        text = _csv_text(["step", "compute_cycles", "done_cycle"], rows, report.to_dict()["schema"])
        text += f"# total_cycles={report.total_cycles} output_valid_cycle={report.output_valid_cycle}\n"
        _emit(text, args.output)
    return EXIT_OK


def _first_difference(Y, R):
    diff = np.argwhere(Y != R)
    if not len(diff):
        return None
    i, j = (int(x) for x in diff[0])
    return {"row": i, "col": j, "simulated": int(Y[i, j]), "reference": int(R[i, j])}


def _compare_one(cfg, ops, inject_fault: bool, mode: str):
    Y, _ = simulate_gemm(cfg, ops, mode=mode)
    if inject_fault:
        Y = Y.copy()
        Y[0, 0] += 1
    return _first_difference(Y, reference_gemm(ops))


def cmd_compare(args) -> int:
    if args.sweep:
        children = np.random.SeedSequence(args.seed).spawn(args.sweep)
        failures = []
        for idx, child in enumerate(children):
            rng = np.random.default_rng(child)
            cfg = random_config(rng, max_size=args.max_size)
            ops = random_operands(cfg, rng)
            diff = _compare_one(cfg, ops, args.inject_fault, args.mode)
            if diff is not None:
                failures.append({"instance": idx, "config": cfg.to_dict(), **diff})
        doc = {
            "schema": COMPARE_SCHEMA,
            "seed": args.seed,
            "instances": args.sweep,
            "passed": args.sweep - len(failures),
            "failed": len(failures),
            "failures": failures[:10],
        }
    else:
        if not (args.a and args.b):
            raise UsageError("compare needs --a and --b, or --sweep COUNT")
        cfg, ops = _load_operands(args)
        diff = _compare_one(cfg, ops, args.inject_fault, args.mode)
        doc = {
            "schema": COMPARE_SCHEMA,
            "config": cfg.to_dict(),
            "instances": 1,
            "passed": int(diff is None),
            "failed": int(diff is not None),
            "failures": [diff] if diff else [],
        }
    if args.format == "json":
        _emit(_dump_json(doc), args.output)
    else:
        rows = [(f.get("instance", 0), f["row"], f["col"], f["simulated"], f["reference"]) for f in doc["failures"]]
        _emit(_csv_text(["instance", "row", "col", "simulated", "reference"], rows, COMPARE_SCHEMA), args.output)
    if doc["failed"]:
        first = doc["failures"][0]
        print(
            f"mismatch at Y[{first['row']}][{first['col']}]: simulated {first['simulated']}, "
            f"reference {first['reference']}",
            file=sys.stderr,
        )
        return EXIT_MISMATCH
    return EXIT_OK


ESTIMATE_COLUMNS = (
    "array", "inner_dim", "bitwidth", "polarity", "technology", "power_w",
    "wc_latency_s", "wc_energy_j", "wc_edp_js", "reported_latency_us", "reported_energy_nj",
)


def cmd_estimate(args) -> int:
    profile = _load_profile(args)
    model = _latency_model(args)
    if args.all:
        rows = sweep_table(profile, model, technology=args.technology)
    else:
        if args.m is None:
            raise UsageError("estimate needs --m (or --all)")
        n = args.n if args.n is not None else args.m
        p = args.p if args.p is not None else args.m
        kw = _config_kwargs(args)
        cfg = GemmConfig(args.m, n, p, **kw)
        rows = [estimate(cfg, profile, model, technology=args.technology, power_w=args.power)]
    if args.format == "json":
        _emit(_dump_json({"schema": ESTIMATE_SCHEMA, "rows": rows}), args.output)
    else:
        table = [
            ["x".join(map(str, r["array"])) if c == "array" else r.get(c, "") for c in ESTIMATE_COLUMNS]
            for r in rows
        ]
        _emit(_csv_text(ESTIMATE_COLUMNS, table, ESTIMATE_SCHEMA), args.output)
    return EXIT_OK


def cmd_profile(args) -> int:
    bits = args.bits or 8
    polarity = args.polarity or "unipolar"
    if args.trace:
        hist = read_trace(args.trace, bits, polarity)
    else:
        hist = load_fixture()
        bits, polarity = hist.bitwidth, hist.polarity.value
    m = args.m or 16
    cfg = GemmConfig(
        m,
        args.n or m,
        args.p or m,
        bits,
        polarity,
        args.unary_base or 2,
    )
    report = profile_simulation(
        cfg,
        hist,
        _latency_model(args),
        _load_profile(args),
        technology=args.technology,
        power_w=args.power,
    )
    cdf = cumulative(hist)
    if args.format == "json":
        report["histogram"] = {str(v): c for v, c in hist.nonzero_bins()}
        report["cumulative_percent"] = [pct for _, pct in cdf]
        _emit(_dump_json(report), args.output)
    else:
        rows = [(v, int(hist.counts[v]), pct) for v, pct in cdf]
        text = _csv_text(["value", "count", "cumulative_percent"], rows, report["schema"])
        summary = {k: report[k] for k in ("expected_max", "avg_latency_s", "avg_energy_j", "edp_js", "wc_ratio")}
        text += "".join(f"# {k}={v}\n" for k, v in summary.items())
        _emit(text, args.output)
    return EXIT_OK


def cmd_gen(args) -> int:
    if not 0.0 <= args.zero_fraction <= 1.0:
        raise UsageError("--zero-fraction must be within [0, 1]")
    rng = np.random.default_rng(args.seed)
    bits = args.bits or 8
    polarity = args.polarity or "bipolar"
    m = args.m or 4
    n = args.n or m
    p = args.p or m
    cfg = GemmConfig(m, n, p, bits, polarity, args.unary_base or 2)
    out = Path(args.output) if args.output else None
    if args.kind == "matrix":
        ops = random_operands(cfg, rng, zero_fraction=args.zero_fraction)
        _emit(format_matrix(ops.A), args.output)
    elif args.kind == "operands":
        if out is None:
            raise UsageError("gen operands needs -o DIRECTORY")
        out.mkdir(parents=True, exist_ok=True)
        ops = random_operands(cfg, rng, zero_fraction=args.zero_fraction)
        write_matrix(ops.A, out / "A.csv")
        write_matrix(ops.B, out / "B.csv")
        write_matrix(ops.C, out / "C.csv")
        sidecar = {"schema": "tubgemm.operands/1", **{k: v for k, v in cfg.to_dict().items() if k not in ("M", "N", "P")}}
        (out / "config.json").write_text(_dump_json(sidecar))
    else:
        maxima = []
        for _ in range(args.ops):
            ops = random_operands(cfg, rng, zero_fraction=args.zero_fraction)
            maxima.append(int(np.abs(ops.A).max()))
        if out is None:
            buf = io.StringIO()
            buf.write("op_id,max_abs\n")
            buf.writelines(f"{i},{v}\n" for i, v in enumerate(maxima))
            sys.stdout.write(buf.getvalue())
        elif args.binned:
            write_histogram(MaxValueHistogram.from_maxima(maxima, bits, polarity), out)
        else:
            write_trace(maxima, out)
    return EXIT_OK


def cmd_repro(args) -> int:
    from .repro import run_all

    checks = run_all(_load_profile(args), _latency_model(args))
    if args.format == "json":
        doc = {
            "schema": REPRO_SCHEMA,
            "passed": sum(c.passed for c in checks),
            "failed": sum(not c.passed for c in checks),
            "checks": [c.to_dict() for c in checks],
        }
        _emit(_dump_json(doc), args.output)
    else:
        rows = [(c.group, c.name, c.measured, c.target, c.tolerance, c.relative, c.passed) for c in checks]
        _emit(_csv_text(["group", "name", "measured", "target", "tolerance", "relative", "passed"], rows, REPRO_SCHEMA), args.output)
    for c in checks:
        print(c.line(), file=sys.stderr)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_MISMATCH


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tubgemm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim_help = "integer handshake cycles per step (default 2)"
    for name, func, help_ in (
        ("gemm", cmd_gemm, "simulate Y = A x B + C cycle by cycle"),
        ("compare", cmd_compare, "check the simulator against the reference matmul"),
    ):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--a", help="CSV file with A (M x N)")
        p.add_argument("--b", help="CSV file with B (N x P)")
        p.add_argument("--c", help="CSV file with C (M x P, default zeros)")
        p.add_argument("--config", help="JSON sidecar with bitwidth/polarity/unary_base")
        _add_shape_flags(p)
        _add_format_flags(p, overhead_help=sim_help)
        p.add_argument("--epilogue", type=int, help="cycles before output_valid (default 4)")
        p.add_argument("--mode", choices=("cycle", "event"), default="cycle")
        if name == "gemm":
            p.add_argument("--y-out", help="write Y as CSV here")
        else:
            p.add_argument("--sweep", type=int, metavar="COUNT", help="check COUNT random instances")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--max-size", type=int, default=64)
            p.add_argument("--inject-fault", action="store_true", help="corrupt Y[0][0] (negative control)")

    p = sub.add_parser("estimate", help="worst-case latency / energy / EDP")
    p.set_defaults(func=cmd_estimate)
    _add_shape_flags(p)
    _add_format_flags(p, overhead_help="analytical per-step overhead, e.g. 9/4")
    p.add_argument("--technology", default="n5")
    p.add_argument("--power", type=float, help="power in watts (skips the profile lookup)")
    p.add_argument("--profile", help="power profile JSON (default: $TUBGEMM_PROFILE or shipped)")
    p.add_argument("--all", action="store_true", help="model every profile entry of the technology")

    p = sub.add_parser("profile", help="sparsity report from a trace or histogram CSV")
    p.set_defaults(func=cmd_profile)
    p.add_argument("--trace", help="op_id,max_abs or value,count CSV (default: shipped synthetic fixture)")
    _add_shape_flags(p)
    _add_format_flags(p, overhead_help="analytical per-step overhead, e.g. 9/4")
    p.add_argument("--technology", default="45nm")
    p.add_argument("--power", type=float, help="power in watts (skips the profile lookup)")
    p.add_argument("--profile", help="power profile JSON")

    p = sub.add_parser("gen", help="seeded random matrices or traces")
    p.set_defaults(func=cmd_gen)
    p.add_argument("--kind", choices=("matrix", "operands", "trace"), default="matrix")
    _add_shape_flags(p)
    _add_format_flags(p, overhead_help=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zero-fraction", type=float, default=0.0, help="probability an entry is forced to 0")
    p.add_argument("--ops", type=int, default=1000, help="operations in a generated trace")
    p.add_argument("--binned", action="store_true", help="write the trace as a value,count histogram")

    p = sub.add_parser("repro", help="check every published figure the models cover")
    p.set_defaults(func=cmd_repro)
    p.add_argument("--profile", help="power profile JSON")
    p.add_argument("--overhead", type=_parse_overhead, help="analytical per-step overhead")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (TraceFormatError, StreamFormatError) as exc:
        print(f"tubgemm: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AccumulatorOverflowError as exc:
        print(f"tubgemm: overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except TubGemmError as exc:
        print(f"tubgemm: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"tubgemm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
