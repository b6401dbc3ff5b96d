"""Allocator function descriptions.

An allocator is generalized as a function taking an element count and an
element size and producing the base address of the allocated region.  Each
config line names one allocator and gives the argument positions of those
fields:

    name,count_idx,size_idx,addr_idx

``_`` in the count position means the function has no count argument (the
count is 1, as for malloc).  ``addr_idx`` of -1 means the address is the
function's return value.  Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MalformedSpec


@dataclass(frozen=True)
class AllocatorSpec:
    name: str
    count_idx: int | None  # None: no count argument, count = 1
    size_idx: int
    addr_idx: int  # -1: address is the return value

    def __post_init__(self):
        if not self.name:
            raise ValueError("allocator name must be non-empty")
        if self.count_idx is not None and self.count_idx < 0:
            raise ValueError(f"count_idx must be >= 0 or absent, got {self.count_idx}")
        if self.size_idx < 0:
            raise ValueError(f"size_idx must be >= 0, got {self.size_idx}")
        if self.addr_idx < -1:
            raise ValueError(f"addr_idx must be >= -1, got {self.addr_idx}")


DEFAULT_ALLOCATORS = (
    AllocatorSpec("malloc", None, 0, -1),
    AllocatorSpec("calloc", 0, 1, -1),
)


def parse_allocator_config(text: str) -> list[AllocatorSpec]:
    """Parse allocator specs, one per line; errors carry the line number."""
    specs = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 4:
            raise MalformedSpec(line_no, f"expected 4 fields, got {len(fields)}")
        name, count, size, addr = fields
        try:
            count_idx = None if count == "_" else int(count)
            size_idx = int(size)
            addr_idx = int(addr)
        except ValueError:
            raise MalformedSpec(line_no, f"non-numeric index in {line!r}") from None
        try:
            specs.append(AllocatorSpec(name, count_idx, size_idx, addr_idx))
        except ValueError as exc:
            raise MalformedSpec(line_no, str(exc)) from None
    return specs
