"""Analysis kernel host: offline and streaming drivers.

A kernel is a single-consumer state machine: ``configure(args)`` once,
``process(entry)`` per entry in stream order, ``finalize()`` exactly once
to obtain the Report.  The offline driver feeds a file-backed stream; the
streaming driver receives entries over TCP and groups them into
micro-batches per a batching policy.  Every kernel shipped here is a
keyed counter, so its final Report is independent of how the stream was
batched, and streaming and offline runs agree.
"""

from __future__ import annotations

import abc
import csv
import io
import json
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping

from .errors import InvalidConfig, KernelError, MemtraceError
from .events import LogEntry
from .strings import StringTable
from .transport import receive_trace


@dataclass
class Report:
    """Ordered analysis output; row ordering is part of each kernel's contract."""

    kernel: str
    columns: list[str]
    rows: list[dict]
    charts: list[dict] | None = None  # chart-ready sidecar data, if the kernel emits any

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(row[c]) for c in self.columns])
        return out.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.rows, indent=2) + "\n"


def _cell(value) -> str:
    if isinstance(value, list):
        return ";".join(":".join(str(x) for x in item) for item in value)
    return str(value)


class AnalysisKernel(abc.ABC):
    """Behavioral contract every analysis plugin implements."""

    name: str = "kernel"

    def __init__(self, table: StringTable):
        self.table = table
        self._finalized = False

    def configure(self, args: Mapping[str, str]) -> None:
        """Accept string key/value arguments; defaults if never called."""

    @abc.abstractmethod
    def process(self, entry: LogEntry) -> None:
        ...

    def process_batch(self, batch: Iterable[LogEntry]) -> None:
        for entry in batch:
            self.process(entry)

    def finalize(self) -> Report:
        if self._finalized:
            raise KernelError(f"{self.name}: finalize called twice")
        self._finalized = True
        return self._build_report()

    @abc.abstractmethod
    def _build_report(self) -> Report:
        ...


class KeyedState:
    """Per-key accumulator updated batchwise with a combine function.

    With an associative, commutative combine the final state is
    independent of how the input was split into batches.
    """

    def __init__(self, combine: Callable = lambda a, b: a + b):
        self.combine = combine
        self._state: dict = {}

    def update(self, key, value) -> None:
        if key in self._state:
            self._state[key] = self.combine(self._state[key], value)
        else:
            self._state[key] = value

    def items(self):
        return self._state.items()

    def get(self, key, default=None):
        return self._state.get(key, default)

    def __len__(self):
        return len(self._state)

    def __eq__(self, other):
        return isinstance(other, KeyedState) and self._state == other._state


def keyed_update(state: KeyedState, batch, key_fn, combine=None,
                 value_fn=lambda item: item) -> KeyedState:
    """Fold a batch into keyed state: state[k] += reduce of the batch's k-values."""
    combine = combine or state.combine
    folded: dict = {}
    for item in batch:
        k = key_fn(item)
        v = value_fn(item)
        folded[k] = combine(folded[k], v) if k in folded else v
    for k, v in folded.items():
        state.update(k, v)
    return state


@dataclass(frozen=True)
class BatchingPolicy:
    """How the streaming driver groups entries: whole trace, fixed entry
    counts, or wall-clock timeslices."""

    mode: str  # "whole" | "count" | "duration"
    value: int = 0  # entries for count, milliseconds for duration

    def __post_init__(self):
        if self.mode not in ("whole", "count", "duration"):
            raise InvalidConfig(f"unknown batching mode {self.mode!r}")
        if self.mode != "whole" and self.value < 1:
            raise InvalidConfig(f"batching {self.mode} needs a positive value")

    @classmethod
    def parse(cls, text: str) -> BatchingPolicy:
        """Parse 'whole', 'count:N', or 'duration:MS'."""
        if text == "whole":
            return cls("whole")
        mode, _, value = text.partition(":")
        if mode in ("count", "duration") and value.isdigit():
            return cls(mode, int(value))
        raise InvalidConfig(f"bad batch policy {text!r}")

WHOLE_TRACE = BatchingPolicy("whole")


def _batches(entries, policy: BatchingPolicy) -> Iterator[list[LogEntry]]:
    if policy.mode == "whole":
        batch = list(entries)
        if batch:
            yield batch
        return
    if policy.mode == "count":
        batch = []
        for entry in entries:
            batch.append(entry)
            if len(batch) >= policy.value:
                yield batch
                batch = []
        if batch:
            yield batch
        return
    # duration: flush whenever the timeslice expires; boundaries depend on
    # wall clock, the final report does not.
    deadline = time.monotonic() + policy.value / 1000.0
    batch = []
    for entry in entries:
        batch.append(entry)
        if time.monotonic() >= deadline:
            yield batch
            batch = []
            deadline = time.monotonic() + policy.value / 1000.0
    if batch:
        yield batch


def run_offline(entries, kernel: AnalysisKernel, args: Mapping[str, str] | None = None) -> Report:
    """Drive a kernel over a stored trace, entry by entry, and finalize."""
    _guarded(kernel, kernel.configure, args or {})
    for entry in entries:
        _guarded(kernel, kernel.process, entry)
    return kernel.finalize()


def run_batched(entries, kernel: AnalysisKernel, policy: BatchingPolicy = WHOLE_TRACE,
                args: Mapping[str, str] | None = None,
                on_batch: Callable[[AnalysisKernel, int], None] | None = None) -> Report:
    """Drive a kernel in micro-batches; equivalent to run_offline for the
    kernels shipped here.  ``on_batch`` is an optional per-batch snapshot
    hook (called after each batch with the kernel and batch index)."""
    _guarded(kernel, kernel.configure, args or {})
    for index, batch in enumerate(_batches(entries, policy)):
        _guarded(kernel, kernel.process_batch, batch)
        if on_batch is not None:
            on_batch(kernel, index)
    return kernel.finalize()


def run_streaming(endpoint, kernel: AnalysisKernel, policy: BatchingPolicy = WHOLE_TRACE,
                  args: Mapping[str, str] | None = None,
                  on_batch: Callable[[AnalysisKernel, int], None] | None = None) -> Report:
    """Receive entries over TCP and analyze them as they arrive.

    The stream end (connection close) triggers finalize; the Report equals
    run_offline's for the same entry sequence.
    """
    return run_batched(receive_trace(endpoint), kernel, policy, args, on_batch)


def _guarded(kernel, fn, arg):
    # Domain errors (unannotated trace, truncated stream...) surface as
    # themselves; anything else is a kernel bug and gets context attached.
    try:
        fn(arg)
    except MemtraceError:
        raise
    except Exception as exc:
        raise KernelError(f"{kernel.name}: {exc}") from exc
