"""Single-level set-associative LRU cache simulation.

The simulator consumes an entry stream and annotates every access event
with a hit/miss hint; function and allocation events pass through
untouched.  One shared cache is modeled regardless of the entry's thread
id, matching last-level-cache observation.  Reads and writes are treated
identically: every miss allocates the line.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import Iterator

from .errors import InvalidConfig
from .events import HINT_HIT, HINT_MISS, LogEntry

FULL = "full"

# Defaults sized like a contemporary last-level cache.
DEFAULT_CAPACITY = 16 * 1024 * 1024
DEFAULT_LINE = 64
DEFAULT_ASSOC = 16


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class CacheConfig:
    capacity_bytes: int = DEFAULT_CAPACITY
    line_bytes: int = DEFAULT_LINE
    associativity: int | str = DEFAULT_ASSOC  # ways, or FULL

    def __post_init__(self):
        if not _is_pow2(self.line_bytes):
            raise InvalidConfig(f"line_bytes must be a power of two, got {self.line_bytes}")
        if self.associativity == FULL:
            if self.capacity_bytes % self.line_bytes:
                raise InvalidConfig("capacity must be divisible by line size")
        else:
            if not isinstance(self.associativity, int) or self.associativity < 1:
                raise InvalidConfig(f"associativity must be >= 1 or 'full', got {self.associativity!r}")
            if self.capacity_bytes % (self.line_bytes * self.associativity):
                raise InvalidConfig(
                    "capacity_bytes must be divisible by line_bytes * associativity"
                )
            if not _is_pow2(self.capacity_bytes // (self.line_bytes * self.associativity)):
                raise InvalidConfig("set count must be a power of two")

    @classmethod
    def from_dict(cls, doc: dict) -> "CacheConfig":
        """Build from the JSON shape {capacity_bytes, line_bytes, associativity}."""
        known = {"capacity_bytes", "line_bytes", "associativity"}
        unknown = set(doc) - known
        if unknown:
            raise InvalidConfig(f"unknown cache config key(s): {sorted(unknown)}")
        return cls(
            doc.get("capacity_bytes", DEFAULT_CAPACITY),
            doc.get("line_bytes", DEFAULT_LINE),
            doc.get("associativity", DEFAULT_ASSOC),
        )

    @property
    def ways(self) -> int:
        if self.associativity == FULL:
            return self.capacity_bytes // self.line_bytes
        return self.associativity

    @property
    def set_count(self) -> int:
        return self.capacity_bytes // (self.line_bytes * self.ways)


class CacheState:
    """Per-set recency lists, most-recently-used last."""

    def __init__(self, cfg: CacheConfig):
        self._sets: list[OrderedDict] = [OrderedDict() for _ in range(cfg.set_count)]


def access(state: CacheState, cfg: CacheConfig, address: int) -> bool:
    """Touch one address; returns True on hit.

    On hit the line becomes most recently used; on miss it is inserted,
    evicting the least recently used line of a full set.
    """
    line = address // cfg.line_bytes
    lru = state._sets[line % cfg.set_count]
    if line in lru:
        lru.move_to_end(line)
        return True
    lru[line] = None
    if len(lru) > cfg.ways:
        lru.popitem(last=False)
    return False


def simulate(entries, cfg: CacheConfig) -> Iterator[LogEntry]:
    """Annotate access events with hit/miss hints, preserving order.

    Pure function of (stream, cfg): non-access entries and all non-hint
    fields come through byte-identical.
    """
    state = CacheState(cfg)
    for entry in entries:
        if entry.is_access:
            hit = access(state, cfg, entry.payload.address)
            yield replace(entry, hint=HINT_HIT if hit else HINT_MISS)
        else:
            yield entry


def count_misses(entries, cfg: CacheConfig) -> tuple[int, int]:
    """Tally (accesses, misses) without materializing annotated entries."""
    state = CacheState(cfg)
    accesses = misses = 0
    for entry in entries:
        if entry.is_access:
            accesses += 1
            misses += not access(state, cfg, entry.payload.address)
    return accesses, misses
