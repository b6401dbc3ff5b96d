"""Shared fixtures and the seeded random-entry generator."""

from __future__ import annotations

import random

import pytest

from memtrace.events import (
    ENTRY,
    EXIT,
    HINT_HIT,
    HINT_MISS,
    HINT_NONE,
    READ,
    WRITE,
    AccessEvent,
    AllocEvent,
    FunctionEvent,
    LogEntry,
    SourceLoc,
)
from memtrace.strings import StringTable


def make_table(nfiles=6, nfuncs=8, nvars=12, ntypes=5) -> StringTable:
    table = StringTable()
    for i in range(nfiles):
        table.intern("files", f"src/file{i}.c")
    for i in range(nfuncs):
        table.intern("functions", f"fn{i}")
    for i in range(nvars):
        table.intern("variables", f"Obj.field{i}")
    for i in range(ntypes):
        table.intern("types", f"Type{i}")
    return table


def random_entry(rng: random.Random, table: StringTable) -> LogEntry:
    """One valid entry with ids resolvable in the given table."""
    loc = SourceLoc(
        rng.randrange(table.size("files")),
        rng.randint(1, 1 << 20),
        rng.randint(0, 200),
    )
    kind = rng.randrange(3)
    if kind == 0:
        payload = FunctionEvent(
            rng.randrange(table.size("functions")), rng.choice((ENTRY, EXIT))
        )
        hint = HINT_NONE
    elif kind == 1:
        payload = AccessEvent(
            rng.randrange(1 << 64),
            rng.choice((READ, WRITE)),
            rng.randrange(table.size("variables")),
            rng.randrange(table.size("types")),
            rng.randrange(1 << 64),
            loc,
        )
        hint = rng.choice((HINT_HIT, HINT_MISS, HINT_NONE))
    else:
        # bounded size*count so the region cannot wrap the address space
        payload = AllocEvent(
            rng.randrange(1 << 62),
            rng.randint(1, 1 << 16),
            rng.randint(1, 1 << 16),
            rng.randrange(table.size("types")),
            loc,
        )
        hint = HINT_NONE
    return LogEntry(rng.randrange(256), payload, hint)


def random_entries(seed: int, n: int, table: StringTable | None = None):
    rng = random.Random(seed)
    table = table or make_table()
    return [random_entry(rng, table) for _ in range(n)], table


@pytest.fixture
def table():
    return make_table()


@pytest.fixture
def rng():
    return random.Random(0xD1CE)
