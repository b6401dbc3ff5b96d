"""Event data model: the tagged union of records flowing through every stage.

A trace is an ordered stream of ``LogEntry`` values.  Each entry carries an
8-bit thread id, an annotation hint byte, and one of three payloads:
function entry/exit, memory access, or allocation.  String-valued fields
(names, files, types) are stored as interned ids; see ``strings``.
"""

from __future__ import annotations

from dataclasses import dataclass

# Annotation hint byte: set by the cache simulator on access events only.
HINT_HIT = 0x00
HINT_MISS = 0x01
HINT_NONE = 0xFF

READ = "read"
WRITE = "write"
ENTRY = "entry"
EXIT = "exit"

_U64_MAX = 2**64


@dataclass(frozen=True, slots=True)
class SourceLoc:
    """Source position of an event: interned file id, 1-based line, column.

    Column 0 means unknown.
    """

    file_id: int
    line: int
    column: int = 0

    def __post_init__(self):
        if self.file_id < 0:
            raise ValueError(f"file_id must be non-negative, got {self.file_id}")
        if self.line < 1:
            raise ValueError(f"line must be >= 1, got {self.line}")
        if self.column < 0:
            raise ValueError(f"column must be >= 0, got {self.column}")


@dataclass(frozen=True, slots=True)
class FunctionEvent:
    fn_id: int
    kind: str  # ENTRY or EXIT

    def __post_init__(self):
        if self.fn_id < 0:
            raise ValueError(f"fn_id must be non-negative, got {self.fn_id}")
        if self.kind not in (ENTRY, EXIT):
            raise ValueError(f"function kind must be entry/exit, got {self.kind!r}")


@dataclass(frozen=True, slots=True)
class AccessEvent:
    address: int
    kind: str  # READ or WRITE
    var_id: int
    type_id: int
    value_bits: int  # raw 64-bit image of the accessed value
    loc: SourceLoc

    def __post_init__(self):
        if not 0 <= self.address < _U64_MAX:
            raise ValueError(f"address out of 64-bit range: {self.address:#x}")
        if self.kind not in (READ, WRITE):
            raise ValueError(f"access kind must be read/write, got {self.kind!r}")
        if self.var_id < 0 or self.type_id < 0:
            raise ValueError("var_id and type_id must be non-negative")
        if not 0 <= self.value_bits < _U64_MAX:
            raise ValueError("value_bits out of 64-bit range")


@dataclass(frozen=True, slots=True)
class AllocEvent:
    base: int
    elem_size: int
    count: int
    type_id: int
    loc: SourceLoc

    def __post_init__(self):
        if not 0 <= self.base < _U64_MAX:
            raise ValueError(f"base out of 64-bit range: {self.base:#x}")
        if self.elem_size < 1:
            raise ValueError(f"elem_size must be >= 1, got {self.elem_size}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if self.type_id < 0:
            raise ValueError("type_id must be non-negative")
        # Region [base, base + elem_size*count) must not wrap the address space.
        if self.base + self.elem_size * self.count > _U64_MAX:
            raise ValueError("allocated region wraps the 64-bit address space")

    @property
    def end(self) -> int:
        return self.base + self.elem_size * self.count


@dataclass(frozen=True, slots=True)
class LogEntry:
    thread_id: int
    payload: FunctionEvent | AccessEvent | AllocEvent
    hint: int = HINT_NONE

    def __post_init__(self):
        if not 0 <= self.thread_id <= 255:
            # Loud failure: the wire format has 8 bits for thread ids and a
            # silent wraparound would corrupt every per-thread analysis.
            raise ValueError(f"thread_id must fit in 8 bits, got {self.thread_id}")
        if isinstance(self.payload, AccessEvent):
            if self.hint not in (HINT_HIT, HINT_MISS, HINT_NONE):
                raise ValueError(f"bad hint byte {self.hint:#x}")
        elif self.hint != HINT_NONE:
            raise ValueError("only access events may carry a hit/miss hint")

    @property
    def is_access(self) -> bool:
        return isinstance(self.payload, AccessEvent)

    @property
    def is_alloc(self) -> bool:
        return isinstance(self.payload, AllocEvent)

    @property
    def is_function(self) -> bool:
        return isinstance(self.payload, FunctionEvent)
