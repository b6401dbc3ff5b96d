"""The shipped analysis kernels.

Four tools as plugins over the kernel contract: per-variable access
counting, cache-offender ranking (needs a hit/miss annotated trace),
hot/cold structure splitting, and two-phase shared-variable detection.
All are keyed counters, so their reports are additive over trace
concatenation and independent of micro-batch boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .engine import AnalysisKernel, KeyedState, Report, keyed_update
from .errors import SingleThread, TargetNotFound, UnannotatedTrace, UnknownKernel
from .events import HINT_MISS, HINT_NONE, WRITE, LogEntry


@dataclass
class ThreadHistogram:
    """Per-address record of which threads touched it and how often."""

    address: int
    var_id: int
    counts: dict[int, int]  # thread id -> access count

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def a_sorted(self) -> list[int]:
        return sorted(self.counts.values(), reverse=True)


def is_uniform(hist: ThreadHistogram) -> bool:
    """Sharing is uniform iff the busiest thread stays under twice the
    second busiest: a_sorted[0] < 2 * a_sorted[1]."""
    a = hist.a_sorted
    if len(a) < 2:
        raise SingleThread(f"address {hist.address:#x} touched by fewer than two threads")
    return a[0] < 2 * a[1]


class AccessCounter(AnalysisKernel):
    """Total accesses per variable, most accessed first."""

    name = "access_counter"

    def __init__(self, table):
        super().__init__(table)
        self.state = KeyedState()

    def process(self, entry: LogEntry) -> None:
        if entry.is_access:
            self.state.update(entry.payload.var_id, 1)

    def process_batch(self, batch: Iterable[LogEntry]) -> None:
        # reduce-by-key per batch, then merge into the persistent state
        pairs = ((e.payload.var_id, 1) for e in batch if e.is_access)
        keyed_update(self.state, pairs, key_fn=lambda p: p[0], value_fn=lambda p: p[1])

    def _build_report(self) -> Report:
        rows = [
            {"variable": self.table.resolve("variables", vid), "accesses": n}
            for vid, n in self.state.items()
        ]
        rows.sort(key=lambda r: (-r["accesses"], r["variable"]))
        return Report(self.name, ["variable", "accesses"], rows)


class CacheOffenders(AnalysisKernel):
    """Rank (variable, file, line) by simulated miss count.

    Requires an annotated trace; a single unannotated access aborts the
    run, since silent zero-miss rows would be misleading.
    """

    name = "cache_offenders"

    def __init__(self, table):
        super().__init__(table)
        self._counts: dict[tuple, list[int]] = {}

    def process(self, entry: LogEntry) -> None:
        if not entry.is_access:
            return
        if entry.hint == HINT_NONE:
            raise UnannotatedTrace(
                "cache_offenders needs a hit/miss annotated trace; "
                "run the stream through the cache simulator first"
            )
        p = entry.payload
        key = (p.var_id, p.loc.file_id, p.loc.line)
        cell = self._counts.get(key)
        if cell is None:
            cell = self._counts[key] = [0, 0]
        cell[0] += 1
        cell[1] += entry.hint == HINT_MISS

    def _build_report(self) -> Report:
        rows = []
        for (vid, fid, line), (accesses, misses) in self._counts.items():
            rows.append(
                {
                    "variable": self.table.resolve("variables", vid),
                    "file": self.table.resolve("files", fid),
                    "line": line,
                    "accesses": accesses,
                    "misses": misses,
                }
            )
        rows.sort(key=lambda r: (-r["misses"], -r["accesses"], r["variable"],
                                 r["file"], r["line"]))
        return Report(self.name, ["variable", "file", "line", "accesses", "misses"], rows)


class StructSplitting(AnalysisKernel):
    """Classify fields of live types as hot or cold.

    Variables named "Type.field" are grouped by type.  A type is live when
    it draws at least live_threshold_fraction of all trace accesses; a
    field of a live type is hot when its count reaches hot_ratio times the
    mean field count of its type.  The report carries chart-ready weights
    per live type alongside the row data.
    """

    name = "struct_splitting"

    def __init__(self, table):
        super().__init__(table)
        self.live_threshold_fraction = 0.01
        self.hot_ratio = 2.0
        self._var_counts = KeyedState()
        self._total = 0

    def configure(self, args) -> None:
        if "live_threshold_fraction" in args:
            self.live_threshold_fraction = float(args["live_threshold_fraction"])
        if "hot_ratio" in args:
            self.hot_ratio = float(args["hot_ratio"])

    def process(self, entry: LogEntry) -> None:
        if entry.is_access:
            self._total += 1
            self._var_counts.update(entry.payload.var_id, 1)

    def _build_report(self) -> Report:
        per_type: dict[str, dict[str, int]] = {}
        for vid, n in self._var_counts.items():
            name = self.table.resolve("variables", vid)
            type_name, dot, field_name = name.partition(".")
            if not dot or not type_name or not field_name:
                continue  # not a Type.field access
            # ids and names are a bijection, so each Type.field lands once
            per_type.setdefault(type_name, {})[field_name] = n

        live_floor = self.live_threshold_fraction * self._total
        rows = []
        charts = []
        for type_name in sorted(per_type):
            fields = per_type[type_name]
            type_total = sum(fields.values())
            if type_total < live_floor:
                continue  # not live: no classification emitted
            mean = type_total / len(fields)
            hot_floor = self.hot_ratio * mean
            ordered = sorted(fields.items(), key=lambda kv: (-kv[1], kv[0]))
            chart_fields = []
            for field_name, n in ordered:
                hot = n >= hot_floor
                rows.append(
                    {
                        "type": type_name,
                        "field": field_name,
                        "accesses": n,
                        "classification": "hot" if hot else "cold",
                        "live": True,
                    }
                )
                chart_fields.append({"field": field_name, "weight": n, "hot": hot})
            charts.append({"type": type_name, "fields": chart_fields})
        return Report(
            self.name,
            ["type", "field", "accesses", "classification", "live"],
            rows,
            charts=charts,
        )


def _survivors(hists: dict[tuple[int, int], dict[int, int]]):
    """Apply the sharing filters and ranking shared by both phases.

    Drops addresses touched by a single thread, then drops non-uniformly
    shared ones; survivors come back sorted by total accesses descending.
    """
    out = []
    for (addr, vid), counts in hists.items():
        if len(counts) < 2:
            continue
        hist = ThreadHistogram(addr, vid, counts)
        if not is_uniform(hist):
            continue
        out.append(hist)
    out.sort(key=lambda h: (-h.total, h.var_id, h.address))
    return out


class SharedVarPhase1(AnalysisKernel):
    """Find addresses shared evenly by several threads, busiest first."""

    name = "shared_var_phase1"

    def __init__(self, table):
        super().__init__(table)
        self.writes_only = False
        self._hists: dict[tuple[int, int], dict[int, int]] = {}

    def configure(self, args) -> None:
        self.writes_only = args.get("writes_only", "0") not in ("0", "", "false")

    def process(self, entry: LogEntry) -> None:
        if not entry.is_access:
            return
        p = entry.payload
        if self.writes_only and p.kind != WRITE:
            return
        counts = self._hists.setdefault((p.address, p.var_id), {})
        counts[entry.thread_id] = counts.get(entry.thread_id, 0) + 1

    def _build_report(self) -> Report:
        rows = []
        for hist in _survivors(self._hists):
            rows.append(
                {
                    "address": f"0x{hist.address:X}",
                    "accesses": hist.total,
                    "threads": len(hist.counts),
                    "variable": self.table.resolve("variables", hist.var_id),
                }
            )
        # ties re-broken on resolved names so reports are byte-stable
        rows.sort(key=lambda r: (-r["accesses"], r["variable"], r["address"]))
        return Report(self.name, ["address", "accesses", "threads", "variable"], rows)


class SharedVarPhase2(AnalysisKernel):
    """Collect per-source-line sharing detail for the top shared rows.

    Without an explicit target the kernel applies phase 1's filters and
    ranking internally and takes the top row (or top_k rows).  With
    target=NAME it keeps every address of that variable regardless of the
    filters.  Each report row is one source location with its per-thread
    access counts.
    """

    name = "shared_var_phase2"

    def __init__(self, table):
        super().__init__(table)
        self.target: str | None = None
        self.top_k = 1
        self.writes_only = False
        self._hists: dict[tuple[int, int], dict[int, int]] = {}
        self._locs: dict[tuple[int, int], dict[tuple[int, int], dict[int, int]]] = {}

    def configure(self, args) -> None:
        self.target = args.get("target") or None
        self.top_k = int(args.get("top_k", "1"))
        self.writes_only = args.get("writes_only", "0") not in ("0", "", "false")

    def process(self, entry: LogEntry) -> None:
        if not entry.is_access:
            return
        p = entry.payload
        if self.writes_only and p.kind != WRITE:
            return
        key = (p.address, p.var_id)
        counts = self._hists.setdefault(key, {})
        counts[entry.thread_id] = counts.get(entry.thread_id, 0) + 1
        site = self._locs.setdefault(key, {}).setdefault((p.loc.file_id, p.loc.line), {})
        site[entry.thread_id] = site.get(entry.thread_id, 0) + 1

    def _targets(self) -> list[tuple[int, int]]:
        if self.target is not None:
            vid = self.table.lookup("variables", self.target)
            pairs = [key for key in self._hists if key[1] == vid] if vid is not None else []
            if not pairs:
                raise TargetNotFound(f"variable {self.target!r} never accessed in this trace")
            return pairs
        return [(h.address, h.var_id) for h in _survivors(self._hists)[: self.top_k]]

    def _build_report(self) -> Report:
        grouped: dict[tuple[int, int, int], dict[int, int]] = {}
        for addr, vid in self._targets():
            for (fid, line), tid_counts in self._locs[(addr, vid)].items():
                merged = grouped.setdefault((vid, fid, line), {})
                for tid, n in tid_counts.items():
                    merged[tid] = merged.get(tid, 0) + n
        rows = []
        for (vid, fid, line), tid_counts in grouped.items():
            pairs = sorted(tid_counts.items())
            rows.append(
                {
                    "threadcount": len(pairs),
                    "totalcount": sum(n for _, n in pairs),
                    "threads": [[tid, n] for tid, n in pairs],
                    "file": self.table.resolve("files", fid),
                    "line": line,
                    "variable": self.table.resolve("variables", vid),
                }
            )
        rows.sort(key=lambda r: (-r["totalcount"], r["variable"], r["file"], r["line"]))
        return Report(
            self.name,
            ["threadcount", "totalcount", "threads", "file", "line", "variable"],
            rows,
        )


KERNELS: dict[str, type[AnalysisKernel]] = {
    k.name: k
    for k in (AccessCounter, CacheOffenders, StructSplitting, SharedVarPhase1,
              SharedVarPhase2)
}


def create_kernel(name: str, table) -> AnalysisKernel:
    try:
        cls = KERNELS[name]
    except KeyError:
        raise UnknownKernel(name, sorted(KERNELS)) from None
    return cls(table)
