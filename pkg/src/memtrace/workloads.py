"""Deterministic emulation of instrumented programs.

Each scenario scripts a small multi-threaded program and emits exactly the
event stream compile-time instrumentation would produce for it: function
entry/exit pairs, allocations from a bump-pointer heap, and memory
accesses with synthetic source locations.  Given the same spec and seed
the emitted stream is byte-for-byte reproducible, which is what makes the
analysis tools testable against constructed ground truth.

Scenarios:

    shared_counter   N threads hammering one shared counter word, plus
                     per-thread private scratch noise; the canonical
                     sharing-bottleneck workload.
    aos_traversal    repeated scan of an array of structs testing one hot
                     field per element and touching the remaining fields
                     only on matching elements.
    linked_cells     traversal of a cell list in either a fat layout
                     (payload inline, nodes spanning many cache lines) or
                     a split layout (16-byte nodes, payload out of line).
    random_mix       seeded random reads/writes over a few shared arrays
                     from several threads, with function-call noise.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator

from .errors import InvalidSpec
from .events import (
    ENTRY,
    EXIT,
    READ,
    WRITE,
    AccessEvent,
    AllocEvent,
    FunctionEvent,
    LogEntry,
    SourceLoc,
)
from .strings import StringTable

HEAP_BASE = 0x1000_0000


@dataclass
class WorkloadSpec:
    scenario: str
    params: dict[str, int] = field(default_factory=dict)
    seed: int = 0


@dataclass(frozen=True)
class ScenarioInfo:
    name: str
    description: str
    params: dict[str, str]  # param name -> "description (default N)"


class EmulatedHeap:
    """Bump-pointer allocator with reproducible, 8-byte aligned addresses.

    Consecutive allocations return consecutive regions, mimicking how
    standard allocators place same-sized requests near each other.
    """

    def __init__(self, base: int = HEAP_BASE):
        self._next = base

    def alloc(self, elem_size: int, count: int) -> int:
        base = self._next
        size = elem_size * count
        self._next = base + (size + 7) // 8 * 8
        return base


@dataclass(frozen=True)
class ThreadSchedule:
    """Round-robin interleaving with seeded per-turn burst lengths.

    Deterministic for a given seed; per-thread program order is preserved
    by construction.
    """

    seed: int
    max_burst: int = 8

    def interleave(self, streams: list[Iterator[LogEntry]]) -> Iterator[LogEntry]:
        rng = random.Random(self.seed)
        active = list(streams)
        while active:
            still = []
            for it in active:
                alive = True
                for _ in range(rng.randint(1, self.max_burst)):
                    try:
                        yield next(it)
                    except StopIteration:
                        alive = False
                        break
                if alive:
                    still.append(it)
            active = still


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidSpec(msg)


# ---------------------------------------------------------------------------
# shared_counter


def _shared_counter(params, seed, table):
    threads = params["threads"]
    iters = params["iters"]
    noise = params["noise"]
    _require(iters >= 1, "iters must be >= 1")

    f = table.intern("files", "shared_counter.c")
    fn_main = table.intern("functions", "main")
    fn_worker = table.intern("functions", "worker")
    v_counter = table.intern("variables", "Stats.ops")
    v_scratch = table.intern("variables", "scratch")
    t_stats = table.intern("types", "Stats")
    t_u64 = table.intern("types", "u64")

    heap = EmulatedHeap()
    counter = heap.alloc(8, 1)
    scratch = [heap.alloc(8, 64) for _ in range(threads)]

    prologue = [
        LogEntry(0, FunctionEvent(fn_main, ENTRY)),
        LogEntry(0, AllocEvent(counter, 8, 1, t_stats, SourceLoc(f, 3, 5))),
    ]
    for base in scratch:
        prologue.append(LogEntry(0, AllocEvent(base, 8, 64, t_u64, SourceLoc(f, 4, 5))))
    prologue.append(LogEntry(0, FunctionEvent(fn_main, EXIT)))

    inc_loc = SourceLoc(f, 9, 9)  # the single counter increment site
    noise_loc = SourceLoc(f, 11, 9)

    def worker(tid):
        yield LogEntry(tid, FunctionEvent(fn_worker, ENTRY))
        my_scratch = scratch[tid]
        for i in range(iters):
            yield LogEntry(
                tid, AccessEvent(counter, WRITE, v_counter, t_u64, i + 1, inc_loc)
            )
            if noise:
                addr = my_scratch + (i % 64) * 8
                yield LogEntry(
                    tid, AccessEvent(addr, READ, v_scratch, t_u64, 0, noise_loc)
                )
        yield LogEntry(tid, FunctionEvent(fn_worker, EXIT))

    return prologue, [worker(t) for t in range(threads)]


# ---------------------------------------------------------------------------
# aos_traversal


def _aos_traversal(params, seed, table):
    elems = params["elems"]
    fields = params["fields"]
    hot = params["hot_field"]
    passes = params["passes"]
    match_pct = params["match_pct"]
    _require(fields >= 2, "fields must be >= 2")
    _require(0 <= hot < fields, "hot_field must index a field")
    _require(0 <= match_pct <= 100, "match_pct must be a percentage")

    f = table.intern("files", "aos_traversal.c")
    fn_main = table.intern("functions", "main")
    fn_scan = table.intern("functions", "scan")
    t_item = table.intern("types", "Item")
    t_u64 = table.intern("types", "u64")
    v_field = [table.intern("variables", f"Item.f{j}") for j in range(fields)]

    stride = fields * 8
    heap = EmulatedHeap()
    base = heap.alloc(stride, elems)

    prologue = [
        LogEntry(0, FunctionEvent(fn_main, ENTRY)),
        LogEntry(0, AllocEvent(base, stride, elems, t_item, SourceLoc(f, 5, 5))),
        LogEntry(0, FunctionEvent(fn_main, EXIT)),
    ]

    # Match decisions are fixed per element across passes, like a data
    # dependent branch on a field that never changes during the scan.
    match_rng = random.Random(seed ^ 0x5EED)
    matched = [match_rng.randrange(100) < match_pct for _ in range(elems)]

    test_loc = SourceLoc(f, 12, 9)  # the hot-field test in the scan loop
    body_loc = SourceLoc(f, 15, 13)

    def scan():
        yield LogEntry(0, FunctionEvent(fn_scan, ENTRY))
        for p in range(passes):
            for i in range(elems):
                elem = base + i * stride
                yield LogEntry(
                    0,
                    AccessEvent(
                        elem + hot * 8, READ, v_field[hot], t_u64, int(matched[i]), test_loc
                    ),
                )
                if matched[i]:
                    for j in range(fields):
                        if j == hot:
                            continue
                        yield LogEntry(
                            0,
                            AccessEvent(
                                elem + j * 8, READ, v_field[j], t_u64, 0, body_loc
                            ),
                        )
        yield LogEntry(0, FunctionEvent(fn_scan, EXIT))

    return prologue, [scan()]


# ---------------------------------------------------------------------------
# linked_cells

LAYOUT_FAT = 0
LAYOUT_SPLIT = 1


def _linked_cells(params, seed, table):
    cells = params["cells"]
    layout = params["layout"]
    rounds = params["rounds"]
    payload_bytes = params["payload_bytes"]
    touch_payload = params["touch_payload"]
    _require(layout in (LAYOUT_FAT, LAYOUT_SPLIT), "layout must be 0 (fat) or 1 (split)")
    _require(payload_bytes >= 8 and payload_bytes % 8 == 0,
             "payload_bytes must be a positive multiple of 8")

    f = table.intern("files", "linked_cells.c")
    fn_main = table.intern("functions", "main")
    fn_step = table.intern("functions", "step")
    t_cell = table.intern("types", "Cell")
    v_next = table.intern("variables", "Cell.next")
    t_u64 = table.intern("types", "u64")

    heap = EmulatedHeap()
    prologue = [LogEntry(0, FunctionEvent(fn_main, ENTRY))]
    if layout == LAYOUT_FAT:
        # link word and payload live in one struct spanning many lines
        node_size = 8 + payload_bytes
        nodes = heap.alloc(node_size, cells)
        prologue.append(
            LogEntry(0, AllocEvent(nodes, node_size, cells, t_cell, SourceLoc(f, 6, 5)))
        )
        v_payload = table.intern("variables", "Cell.payload")
        payload_of = lambda i: nodes + i * node_size + 8
        next_of = lambda i: nodes + i * node_size
    else:
        # 16-byte node (link + payload pointer), payload out of line;
        # the bump allocator packs four nodes per cache line
        t_pay = table.intern("types", "CellPayload")
        nodes = heap.alloc(16, cells)
        payload = heap.alloc(payload_bytes, cells)
        prologue.append(
            LogEntry(0, AllocEvent(nodes, 16, cells, t_cell, SourceLoc(f, 6, 5)))
        )
        prologue.append(
            LogEntry(
                0, AllocEvent(payload, payload_bytes, cells, t_pay, SourceLoc(f, 7, 5))
            )
        )
        v_payload = table.intern("variables", "CellPayload.data")
        payload_of = lambda i: payload + i * payload_bytes
        next_of = lambda i: nodes + i * 16
    prologue.append(LogEntry(0, FunctionEvent(fn_main, EXIT)))

    init_loc = SourceLoc(f, 14, 9)
    clear_loc = SourceLoc(f, 22, 9)

    def step():
        yield LogEntry(0, FunctionEvent(fn_step, ENTRY))
        if touch_payload:
            # one-time fill, one word per payload line; the payload is
            # rarely touched afterwards
            for i in range(cells):
                pbase = payload_of(i)
                for off in range(0, payload_bytes, 64):
                    yield LogEntry(
                        0, AccessEvent(pbase + off, WRITE, v_payload, t_u64, 0, init_loc)
                    )
        # the hot traversal: every pass touches only the link word
        for _ in range(rounds):
            for i in range(cells):
                yield LogEntry(
                    0, AccessEvent(next_of(i), WRITE, v_next, t_u64, 0, clear_loc)
                )
        yield LogEntry(0, FunctionEvent(fn_step, EXIT))

    return prologue, [step()]


# ---------------------------------------------------------------------------
# random_mix


def _random_mix(params, seed, table):
    threads = params["threads"]
    events = params["events"]
    arrays = params["arrays"]
    array_elems = params["array_elems"]
    write_pct = params["write_pct"]
    _require(arrays >= 1, "arrays must be >= 1")
    _require(0 <= write_pct <= 100, "write_pct must be a percentage")

    f = table.intern("files", "random_mix.c")
    fn_main = table.intern("functions", "main")
    fn_churn = table.intern("functions", "churn")
    fn_helper = table.intern("functions", "helper")
    t_buf = table.intern("types", "Buf")
    t_u64 = table.intern("types", "u64")
    v_arr = [table.intern("variables", f"Buf.a{k}") for k in range(arrays)]

    heap = EmulatedHeap()
    bases = [heap.alloc(8, array_elems) for _ in range(arrays)]

    prologue = [LogEntry(0, FunctionEvent(fn_main, ENTRY))]
    for base in bases:
        prologue.append(
            LogEntry(0, AllocEvent(base, 8, array_elems, t_buf, SourceLoc(f, 4, 5)))
        )
    prologue.append(LogEntry(0, FunctionEvent(fn_main, EXIT)))

    def churn(tid):
        rng = random.Random((seed << 8) ^ tid)
        yield LogEntry(tid, FunctionEvent(fn_churn, ENTRY))
        for i in range(events):
            if i and i % 100 == 0:
                yield LogEntry(tid, FunctionEvent(fn_helper, ENTRY))
                yield LogEntry(tid, FunctionEvent(fn_helper, EXIT))
            k = rng.randrange(arrays)
            idx = rng.randrange(array_elems)
            kind = WRITE if rng.randrange(100) < write_pct else READ
            loc = SourceLoc(f, 10 + k, 9)
            yield LogEntry(
                tid,
                AccessEvent(bases[k] + idx * 8, kind, v_arr[k], t_u64, idx, loc),
            )
        yield LogEntry(tid, FunctionEvent(fn_churn, EXIT))

    return prologue, [churn(t) for t in range(threads)]


# ---------------------------------------------------------------------------

_SCENARIOS = {
    "shared_counter": (
        _shared_counter,
        {"threads": 8, "iters": 1000, "noise": 1},
        "every thread writes one shared counter each iteration, with "
        "per-thread scratch reads as noise",
        {
            "threads": "emulated thread count",
            "iters": "counter increments per thread",
            "noise": "1 to add per-thread private scratch reads, 0 to disable",
        },
    ),
    "aos_traversal": (
        _aos_traversal,
        {"elems": 4096, "fields": 8, "hot_field": 0, "passes": 2, "match_pct": 10},
        "scans an array of structs, testing the hot field of every element "
        "and touching the other fields only on matching elements",
        {
            "elems": "number of array elements",
            "fields": "8-byte fields per struct",
            "hot_field": "index of the field tested every element",
            "passes": "full scans over the array",
            "match_pct": "percent of elements whose remaining fields are read",
        },
    ),
    "linked_cells": (
        _linked_cells,
        {"cells": 4096, "layout": LAYOUT_FAT, "rounds": 2, "payload_bytes": 888,
         "touch_payload": 0},
        "repeated clear passes over a cell list touching only each cell's "
        "link word, with the payload stored inline (fat) or out of line "
        "behind a pointer (split)",
        {
            "cells": "number of cells",
            "layout": "0 = fat inline payload, 1 = split 16-byte nodes",
            "rounds": "clear passes over the list",
            "payload_bytes": "payload size per cell (multiple of 8)",
            "touch_payload": "1 to fill the payload once before the passes",
        },
    ),
    "random_mix": (
        _random_mix,
        {"threads": 2, "events": 10000, "arrays": 4, "array_elems": 1024,
         "write_pct": 30},
        "seeded random reads and writes over shared arrays from several "
        "threads, with periodic helper calls",
        {
            "threads": "emulated thread count",
            "events": "accesses per thread",
            "arrays": "number of shared arrays",
            "array_elems": "8-byte elements per array",
            "write_pct": "percent of accesses that are writes",
        },
    ),
}


def scenario_catalog() -> list[ScenarioInfo]:
    """Stable, documented list of scenarios and their parameter schemas."""
    out = []
    for name, (_, defaults, desc, docs) in sorted(_SCENARIOS.items()):
        params = {k: f"{docs[k]} (default {v})" for k, v in defaults.items()}
        out.append(ScenarioInfo(name, desc, params))
    return out


def _resolve_params(spec: WorkloadSpec) -> dict[str, int]:
    if spec.scenario not in _SCENARIOS:
        known = ", ".join(sorted(_SCENARIOS))
        raise InvalidSpec(f"unknown scenario {spec.scenario!r}; known: {known}")
    defaults = _SCENARIOS[spec.scenario][1]
    unknown = set(spec.params) - set(defaults)
    if unknown:
        raise InvalidSpec(
            f"unknown parameter(s) {sorted(unknown)} for scenario {spec.scenario}"
        )
    params = dict(defaults, **spec.params)
    for key, value in params.items():
        if not isinstance(value, int) or value < 0:
            raise InvalidSpec(f"parameter {key} must be a non-negative integer")
    threads = params.get("threads", 1)
    if not 1 <= threads <= 256:
        raise InvalidSpec(f"thread count must be in [1, 256], got {threads}")
    for key in ("iters", "elems", "cells", "events", "passes", "rounds",
                "array_elems"):
        if key in params and params[key] < 1:
            raise InvalidSpec(f"parameter {key} must be >= 1")
    return params


def run_workload(spec: WorkloadSpec, table: StringTable) -> Iterator[LogEntry]:
    """Emit the scenario's event stream, deterministic in (spec, seed).

    The prologue (main's allocations) runs on thread 0 before the worker
    streams are interleaved, so every access lands in a region some
    earlier allocation event covers.
    """
    params = _resolve_params(spec)
    build = _SCENARIOS[spec.scenario][0]
    prologue, streams = build(params, spec.seed, table)
    yield from prologue
    yield from ThreadSchedule(spec.seed ^ 0xC0FFEE).interleave(streams)
