"""Command-line driver for the trace pipeline.

One subcommand per pipeline stage, composable through files or TCP
sockets the way shell pipes compose processes:

    memtrace generate --scenario shared_counter --seed 7 \\
        --string-maps maps.json --out trace.bin
    memtrace simulate --in trace.bin --out annotated.bin
    memtrace analyze --kernel cache_offenders --in annotated.bin \\
        --string-maps maps.json --report csv --out offenders.csv

Socket forms: a downstream stage listens (--listen HOST:PORT) and the
upstream stage connects to it (--connect HOST:PORT); both routes produce
byte-identical results.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .allocators import parse_allocator_config
from .cachesim import DEFAULT_ASSOC, DEFAULT_CAPACITY, DEFAULT_LINE, FULL, CacheConfig, simulate
from .charts import render_split_charts
from .codec import encode_text
from .engine import BatchingPolicy, run_batched, run_streaming
from .errors import InvalidSpec, MemtraceError, UnknownId
from .kernels import KERNELS, create_kernel
from .strings import StringTable, load_string_maps, save_string_maps
from .transport import (
    BINARY,
    DEFAULT_BUFFER_ENTRIES,
    TEXT,
    SinkConfig,
    open_sink,
    read_trace,
    receive_trace,
    serve_trace,
)
from .workloads import WorkloadSpec, run_workload, scenario_catalog


def _endpoint(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not port.isdigit():
        raise argparse.ArgumentTypeError(f"endpoint must be HOST:PORT, got {text!r}")
    return (host or "127.0.0.1", int(port))


def _kv_pairs(pairs: list[str], flag: str) -> dict[str, str]:
    out = {}
    for pair in pairs or []:
        key, eq, value = pair.partition("=")
        if not eq or not key:
            raise InvalidSpec(f"{flag} expects k=v, got {pair!r}")
        out[key] = value
    return out


def _load_table(path) -> StringTable:
    if path and Path(path).exists():
        return load_string_maps(path)
    return StringTable()


def _assoc(text: str):
    if text == FULL:
        return FULL
    if text.isdigit():
        return int(text)
    raise argparse.ArgumentTypeError(f"associativity must be an integer or 'full', got {text!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    table = _load_table(args.string_maps)
    if args.allocators:
        parse_allocator_config(Path(args.allocators).read_text())
    params = {}
    for k, v in _kv_pairs(args.param, "--param").items():
        try:
            params[k] = int(v)
        except ValueError:
            raise InvalidSpec(f"--param {k} must be an integer, got {v!r}") from None
    spec = WorkloadSpec(args.scenario, params, args.seed)
    entries = run_workload(spec, table)

    if args.connect:
        if args.format == TEXT:
            raise InvalidSpec("socket routes carry binary entries only")
        n = serve_trace(entries, args.connect, args.buffer)
    else:
        cfg = SinkConfig(args.out, args.format, args.buffer)
        with open_sink(cfg, table) as sink:
            n = 0
            for entry in entries:
                sink.write(entry)
                n += 1
    if args.string_maps:
        save_string_maps(table, args.string_maps)
    print(f"generated {n} entries ({args.scenario}, seed {args.seed})")
    return 0


def cmd_simulate(args) -> int:
    if args.cache_config:
        cfg = CacheConfig.from_dict(json.loads(Path(args.cache_config).read_text()))
    else:
        cfg = CacheConfig(args.capacity, args.line, args.assoc)
    source = receive_trace(args.listen) if args.listen else read_trace(args.infile)
    annotated = simulate(source, cfg)
    if args.connect:
        n = serve_trace(annotated, args.connect, args.buffer)
    else:
        with open_sink(SinkConfig(args.out, BINARY, args.buffer)) as sink:
            n = 0
            for entry in annotated:
                sink.write(entry)
                n += 1
    print(f"simulated {n} entries "
          f"(capacity {cfg.capacity_bytes}, line {cfg.line_bytes}, ways {cfg.ways})")
    return 0


def cmd_analyze(args) -> int:
    table = _load_table(args.string_maps)
    kernel = create_kernel(args.kernel, table)
    kargs = _kv_pairs(args.kernel_arg, "--kernel-arg")
    policy = BatchingPolicy.parse(args.batch)
    if args.listen:
        report = run_streaming(args.listen, kernel, policy, kargs)
    else:
        report = run_batched(read_trace(args.infile), kernel, policy, kargs)

    text = report.to_csv() if args.report == "csv" else report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)

    if report.charts:
        data_path = args.charts_data or (f"{args.out}.charts.json" if args.out else None)
        if data_path:
            Path(data_path).write_text(json.dumps(report.charts, indent=2) + "\n")
        if args.charts:
            for path in render_split_charts(report.charts, args.charts):
                print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_decode(args) -> int:
    table = _load_table(args.string_maps)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for index, entry in enumerate(read_trace(args.infile)):
            try:
                out.write(encode_text(entry, table))
            except UnknownId as exc:
                raise UnknownId(exc.namespace, exc.ident, entry_index=index) from None
    finally:
        if args.out:
            out.close()
    return 0


def cmd_serve(args) -> int:
    n = serve_trace(read_trace(args.infile), args.connect, args.buffer)
    print(f"served {n} entries to {args.connect[0]}:{args.connect[1]}")
    return 0


def cmd_reference(args) -> int:
    print(reference_page())
    return 0


def reference_page() -> str:
    """Defaults and catalogs, suitable for dropping into docs."""
    lines = [
        f"memtrace {__version__} reference",
        "",
        "defaults:",
        f"  sink buffer           {DEFAULT_BUFFER_ENTRIES} entries",
        f"  cache capacity        {DEFAULT_CAPACITY} bytes",
        f"  cache line            {DEFAULT_LINE} bytes",
        f"  cache associativity   {DEFAULT_ASSOC} ways",
        "  batch policy          whole",
        "",
        "scenarios:",
    ]
    for info in scenario_catalog():
        lines.append(f"  {info.name}: {info.description}")
        for param, doc in info.params.items():
            lines.append(f"    {param}: {doc}")
    lines.append("")
    lines.append("kernels:")
    for name in sorted(KERNELS):
        doc = (KERNELS[name].__doc__ or "").strip().splitlines()[0]
        lines.append(f"  {name}: {doc}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# parser


def _build_parser(config: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memtrace",
        description="generate, transport, cache-simulate, and analyze memory access traces",
    )
    parser.add_argument("--config", help="JSON file of flag defaults (CLI flags win)")
    parser.add_argument("--version", action="version", version=f"memtrace {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def finish(p, fn):
        p.set_defaults(func=fn)
        if config:
            for action in p._actions:
                if action.dest in config:
                    # a config value satisfies required flags and mutually
                    # exclusive groups; explicit CLI flags still win
                    action.required = False
                    p.set_defaults(**{action.dest: config[action.dest]})
            for group in p._mutually_exclusive_groups:
                if any(a.dest in config for a in group._group_actions):
                    group.required = False

    p = sub.add_parser("generate", help="emit a scenario's event stream")
    p.add_argument("--scenario", required=True)
    p.add_argument("--param", action="append", metavar="K=V",
                   help="scenario parameter (repeatable); see 'memtrace reference'")
    p.add_argument("--seed", type=int, default=0)
    out = p.add_mutually_exclusive_group(required=True)
    out.add_argument("--out", help="trace file path")
    out.add_argument("--connect", type=_endpoint, metavar="HOST:PORT",
                     help="stream binary entries to a listening receiver")
    p.add_argument("--format", choices=(BINARY, TEXT), default=BINARY)
    p.add_argument("--string-maps", help="JSON string maps; loaded if present, written back")
    p.add_argument("--allocators", help="allocator config to validate")
    p.add_argument("--buffer", type=int, default=DEFAULT_BUFFER_ENTRIES,
                   help=f"sink buffer in entries (default {DEFAULT_BUFFER_ENTRIES})")
    finish(p, cmd_generate)

    p = sub.add_parser("simulate", help="annotate accesses with cache hit/miss")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="infile", help="binary trace file")
    src.add_argument("--listen", type=_endpoint, metavar="HOST:PORT")
    out = p.add_mutually_exclusive_group(required=True)
    out.add_argument("--out", help="annotated binary trace file")
    out.add_argument("--connect", type=_endpoint, metavar="HOST:PORT")
    p.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY,
                   help=f"cache size in bytes (default {DEFAULT_CAPACITY})")
    p.add_argument("--line", type=int, default=DEFAULT_LINE,
                   help=f"line size in bytes (default {DEFAULT_LINE})")
    p.add_argument("--assoc", type=_assoc, default=DEFAULT_ASSOC,
                   help=f"ways per set, or 'full' (default {DEFAULT_ASSOC})")
    p.add_argument("--cache-config", metavar="PATH",
                   help="JSON {capacity_bytes, line_bytes, associativity}; "
                        "overrides the geometry flags")
    p.add_argument("--buffer", type=int, default=DEFAULT_BUFFER_ENTRIES)
    finish(p, cmd_simulate)

    p = sub.add_parser("analyze", help="run an analysis kernel over a trace")
    p.add_argument("--kernel", required=True, help=f"one of: {', '.join(sorted(KERNELS))}")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="infile", help="binary trace file")
    src.add_argument("--listen", type=_endpoint, metavar="HOST:PORT")
    p.add_argument("--string-maps", required=True)
    p.add_argument("--batch", default="whole", metavar="whole|count:N|duration:MS",
                   help="micro-batch policy (default whole)")
    p.add_argument("--kernel-arg", action="append", metavar="K=V")
    p.add_argument("--report", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="report path (default stdout)")
    p.add_argument("--charts", metavar="DIR",
                   help="render chart figures here when the kernel emits chart data")
    p.add_argument("--charts-data", metavar="PATH",
                   help="chart-data JSON path (default <out>.charts.json)")
    finish(p, cmd_analyze)

    p = sub.add_parser("decode", help="print a binary trace as text")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--string-maps", required=True)
    p.add_argument("--out", help="text output path (default stdout)")
    finish(p, cmd_decode)

    p = sub.add_parser("serve", help="push a stored trace to a listening receiver")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--connect", type=_endpoint, required=True, metavar="HOST:PORT")
    p.add_argument("--buffer", type=int, default=DEFAULT_BUFFER_ENTRIES)
    finish(p, cmd_serve)

    p = sub.add_parser("reference", help="print defaults, scenarios, and kernels")
    finish(p, cmd_reference)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    # pre-scan for --config so its defaults exist before the real parse
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    overrides = json.loads(Path(known.config).read_text()) if known.config else None
    args = _build_parser(overrides).parse_args(argv)
    try:
        return args.func(args)
    except (MemtraceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
