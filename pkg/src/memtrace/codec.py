"""Binary and text codecs for log entries.

Binary format: every entry occupies exactly 48 bytes, so a trace of N
entries is exactly 48*N bytes with no header or footer.  Layout
(little-endian):

    byte 0      entry kind: 0 = function, 1 = access, 2 = allocation
    byte 1      thread id
    byte 2      annotation hint (0x00 hit, 0x01 miss, 0xFF unannotated)
    bytes 3..   payload fields in declaration order, zero-padded to 48

    function    fn_id u32, kind u8 (0 entry, 1 exit)
    access      address u64, kind u8 (0 read, 1 write), var_id u32,
                type_id u32, value_bits u64, file_id u32, line u32, col u32
    allocation  base u64, elem_size u64, count u64, type_id u32,
                file_id u32, line u32, col u32

Text format: one newline-terminated line per entry, fields separated by a
single space, ids resolved to names through the string table.  Lines are
variable-length, unlike the fixed-size binary records; names must not
contain the delimiter.
"""

from __future__ import annotations

import struct

from .errors import MalformedEntry
from .events import (
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

ENTRY_SIZE = 48

KIND_FUNCTION = 0
KIND_ACCESS = 1
KIND_ALLOC = 2

_FN = struct.Struct("<IB")
_ACCESS = struct.Struct("<QBIIQIII")
_ALLOC = struct.Struct("<QQQIIII")

_PAD_FN = b"\x00" * (ENTRY_SIZE - 3 - _FN.size)
_PAD_ACCESS = b"\x00" * (ENTRY_SIZE - 3 - _ACCESS.size)
_PAD_ALLOC = b"\x00" * (ENTRY_SIZE - 3 - _ALLOC.size)

_HINT_TOKEN = {HINT_HIT: "hit", HINT_MISS: "miss", HINT_NONE: "-"}
_TOKEN_HINT = {v: k for k, v in _HINT_TOKEN.items()}


def encode_binary(entry: LogEntry) -> bytes:
    """Encode a valid entry into its fixed 48-byte block."""
    p = entry.payload
    if isinstance(p, AccessEvent):
        head = bytes((KIND_ACCESS, entry.thread_id, entry.hint))
        body = _ACCESS.pack(
            p.address,
            0 if p.kind == READ else 1,
            p.var_id,
            p.type_id,
            p.value_bits,
            p.loc.file_id,
            p.loc.line,
            p.loc.column,
        )
        return head + body + _PAD_ACCESS
    if isinstance(p, AllocEvent):
        head = bytes((KIND_ALLOC, entry.thread_id, entry.hint))
        body = _ALLOC.pack(
            p.base,
            p.elem_size,
            p.count,
            p.type_id,
            p.loc.file_id,
            p.loc.line,
            p.loc.column,
        )
        return head + body + _PAD_ALLOC
    head = bytes((KIND_FUNCTION, entry.thread_id, entry.hint))
    body = _FN.pack(p.fn_id, 0 if p.kind == ENTRY else 1)
    return head + body + _PAD_FN


def decode_binary(block: bytes) -> LogEntry:
    """Decode a 48-byte block; inverse of encode_binary on its image."""
    if len(block) != ENTRY_SIZE:
        raise MalformedEntry(f"entry block must be 48 bytes, got {len(block)}")
    kind = block[0]
    thread_id = block[1]
    hint = block[2]
    try:
        if kind == KIND_ACCESS:
            addr, rw, var_id, type_id, value, file_id, line, col = _ACCESS.unpack_from(
                block, 3
            )
            if rw > 1:
                raise ValueError(f"bad access kind byte {rw:#x}")
            payload = AccessEvent(
                addr,
                READ if rw == 0 else WRITE,
                var_id,
                type_id,
                value,
                SourceLoc(file_id, line, col),
            )
        elif kind == KIND_ALLOC:
            base, size, count, type_id, file_id, line, col = _ALLOC.unpack_from(
                block, 3
            )
            payload = AllocEvent(base, size, count, type_id, SourceLoc(file_id, line, col))
        elif kind == KIND_FUNCTION:
            fn_id, fk = _FN.unpack_from(block, 3)
            if fk > 1:
                raise ValueError(f"bad function kind byte {fk:#x}")
            payload = FunctionEvent(fn_id, ENTRY if fk == 0 else EXIT)
        else:
            raise ValueError(f"bad entry kind byte {kind:#x}")
        return LogEntry(thread_id, payload, hint)
    except ValueError as exc:
        raise MalformedEntry(str(exc)) from exc


def encode_text(entry: LogEntry, table) -> str:
    """Encode an entry as one space-delimited, newline-terminated line.

    Raises UnknownId if any interned id is absent from the table.
    """
    p = entry.payload
    hint = _HINT_TOKEN[entry.hint]
    if isinstance(p, AccessEvent):
        var = table.resolve("variables", p.var_id)
        typ = table.resolve("types", p.type_id)
        fil = table.resolve("files", p.loc.file_id)
        rw = "r" if p.kind == READ else "w"
        return (
            f"A {entry.thread_id} {hint} {p.address} {rw} {var} {typ} "
            f"{p.value_bits} {fil} {p.loc.line} {p.loc.column}\n"
        )
    if isinstance(p, AllocEvent):
        typ = table.resolve("types", p.type_id)
        fil = table.resolve("files", p.loc.file_id)
        return (
            f"L {entry.thread_id} {hint} {p.base} {p.elem_size} {p.count} "
            f"{typ} {fil} {p.loc.line} {p.loc.column}\n"
        )
    fn = table.resolve("functions", p.fn_id)
    return f"F {entry.thread_id} {hint} {fn} {p.kind}\n"


def _int(field: str, what: str) -> int:
    try:
        return int(field)
    except ValueError:
        raise MalformedEntry(f"non-numeric {what} field: {field!r}") from None


def decode_text(line: str, table) -> LogEntry:
    """Decode one text line; names are interned back through the table."""
    fields = line.split()
    if not fields:
        raise MalformedEntry("empty line")
    tag = fields[0]
    try:
        if tag == "A":
            if len(fields) != 11:
                raise MalformedEntry(f"access line needs 11 fields, got {len(fields)}")
            _, thread, hint, addr, rw, var, typ, value, fil, lineno, col = fields
            if rw not in ("r", "w"):
                raise MalformedEntry(f"bad access kind {rw!r}")
            payload = AccessEvent(
                _int(addr, "address"),
                READ if rw == "r" else WRITE,
                table.intern("variables", var),
                table.intern("types", typ),
                _int(value, "value"),
                SourceLoc(
                    table.intern("files", fil), _int(lineno, "line"), _int(col, "column")
                ),
            )
        elif tag == "L":
            if len(fields) != 10:
                raise MalformedEntry(f"alloc line needs 10 fields, got {len(fields)}")
            _, thread, hint, base, size, count, typ, fil, lineno, col = fields
            payload = AllocEvent(
                _int(base, "base"),
                _int(size, "elem_size"),
                _int(count, "count"),
                table.intern("types", typ),
                SourceLoc(
                    table.intern("files", fil), _int(lineno, "line"), _int(col, "column")
                ),
            )
        elif tag == "F":
            if len(fields) != 5:
                raise MalformedEntry(f"function line needs 5 fields, got {len(fields)}")
            _, thread, hint, fn, kind = fields
            if kind not in (ENTRY, EXIT):
                raise MalformedEntry(f"bad function kind {kind!r}")
            payload = FunctionEvent(table.intern("functions", fn), kind)
        else:
            raise MalformedEntry(f"bad entry tag {tag!r}")
        if hint not in _TOKEN_HINT:
            raise MalformedEntry(f"bad hint token {hint!r}")
        return LogEntry(_int(thread, "thread"), payload, _TOKEN_HINT[hint])
    except ValueError as exc:
        raise MalformedEntry(str(exc)) from exc
