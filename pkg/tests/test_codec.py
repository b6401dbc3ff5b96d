"""Binary and text codec contracts: fixed size, bijectivity, errors."""

import pytest

from memtrace.codec import ENTRY_SIZE, decode_binary, decode_text, encode_binary, encode_text
from memtrace.errors import MalformedEntry, UnknownId
from memtrace.events import (
    ENTRY,
    HINT_HIT,
    READ,
    AccessEvent,
    AllocEvent,
    FunctionEvent,
    LogEntry,
    SourceLoc,
)
from memtrace.strings import StringTable

from conftest import random_entries


def test_every_entry_encodes_to_48_bytes():
    entries, _ = random_entries(seed=1, n=500)
    for e in entries:
        assert len(encode_binary(e)) == ENTRY_SIZE


def test_zero_function_entry_layout():
    e = LogEntry(0, FunctionEvent(0, ENTRY))
    block = encode_binary(e)
    assert block[0] == 0x00  # function tag
    assert block[1] == 0x00  # thread 0
    assert block[2] == 0xFF  # unannotated
    # fn_id 0 and kind entry encode as zero, so the payload is all padding
    assert block[3:] == b"\x00" * 45


def test_binary_round_trip_seeded():
    entries, _ = random_entries(seed=2, n=2000)
    for e in entries:
        block = encode_binary(e)
        assert decode_binary(block) == e
        assert encode_binary(decode_binary(block)) == block


def test_decode_rejects_bad_kind_byte():
    block = bytearray(encode_binary(LogEntry(0, FunctionEvent(0, ENTRY))))
    block[0] = 0x07
    with pytest.raises(MalformedEntry):
        decode_binary(bytes(block))


def test_decode_rejects_truncated_block():
    block = encode_binary(LogEntry(0, FunctionEvent(0, ENTRY)))
    with pytest.raises(MalformedEntry):
        decode_binary(block[:47])


def test_decode_rejects_payload_invariant_violations():
    # alloc with elem_size 0
    good = LogEntry(1, AllocEvent(0x1000, 8, 4, 0, SourceLoc(0, 1, 0)))
    block = bytearray(encode_binary(good))
    block[3 + 8 : 3 + 16] = b"\x00" * 8  # zero out elem_size
    with pytest.raises(MalformedEntry):
        decode_binary(bytes(block))
    # hit/miss hint on a function event
    block = bytearray(encode_binary(LogEntry(0, FunctionEvent(0, ENTRY))))
    block[2] = HINT_HIT
    with pytest.raises(MalformedEntry):
        decode_binary(bytes(block))


def test_access_hint_survives_round_trip():
    e = LogEntry(
        9,
        AccessEvent(0xDEAD_BEEF, READ, 2, 1, 42, SourceLoc(0, 7, 3)),
        hint=HINT_HIT,
    )
    assert decode_binary(encode_binary(e)) == e


def test_text_round_trip_seeded():
    entries, table = random_entries(seed=3, n=1000)
    for e in entries:
        line = encode_text(e, table)
        assert line.endswith("\n")
        assert decode_text(line, table) == e


def test_text_and_binary_stream_sizes_differ():
    entries, table = random_entries(seed=4, n=10_000)
    binary = b"".join(encode_binary(e) for e in entries)
    text = "".join(encode_text(e, table) for e in entries)
    assert len(binary) == ENTRY_SIZE * len(entries)
    assert len(text.encode()) != ENTRY_SIZE * len(entries)


def test_encode_text_unknown_id():
    table = StringTable()
    with pytest.raises(UnknownId):
        encode_text(LogEntry(0, FunctionEvent(5, ENTRY)), table)


def test_decode_text_errors():
    table = StringTable()
    with pytest.raises(MalformedEntry):
        decode_text("X 0 - nope\n", table)  # bad tag
    with pytest.raises(MalformedEntry):
        decode_text("F 0 -\n", table)  # bad field count
    with pytest.raises(MalformedEntry):
        decode_text("F zero - main entry\n", table)  # non-numeric thread


def test_decode_text_interns_unseen_names():
    table = StringTable()
    e = decode_text("F 3 - startup entry\n", table)
    assert table.resolve("functions", e.payload.fn_id) == "startup"
    # decoding the same line again reuses the id
    again = decode_text("F 3 - startup entry\n", table)
    assert again == e


def test_thread_id_overflow_is_loud():
    with pytest.raises(ValueError):
        LogEntry(256, FunctionEvent(0, ENTRY))
