"""Transport neutrality: files, sockets, buffering, stage chaining."""

import socket
import threading
import time

import pytest

from memtrace.codec import ENTRY_SIZE, encode_binary
from memtrace.errors import IncompatibleStages, InvalidConfig, TruncatedTrace
from memtrace.events import HINT_MISS
from memtrace.strings import StringTable
from memtrace.transport import (
    BINARY,
    TEXT,
    Stage,
    SinkConfig,
    TraceReceiver,
    chain,
    open_sink,
    read_trace,
    serve_trace,
    write_trace,
)
from memtrace.workloads import WorkloadSpec, run_workload

from conftest import random_entries


def workload_entries(scenario="shared_counter", params=None, seed=0):
    table = StringTable()
    return list(run_workload(WorkloadSpec(scenario, params or {}, seed), table)), table


def test_file_size_is_48_times_entry_count(tmp_path):
    entries, _ = random_entries(seed=11, n=10_000)
    path = tmp_path / "trace.bin"
    n = write_trace(entries, SinkConfig(path, BINARY, buffer_entries=4096))
    assert n == 10_000
    assert path.stat().st_size == 480_000


def test_flush_on_close_single_entry(tmp_path):
    entries, _ = random_entries(seed=12, n=1)
    path = tmp_path / "one.bin"
    write_trace(entries, SinkConfig(path, BINARY, buffer_entries=4096))
    assert path.stat().st_size == ENTRY_SIZE


def test_buffer_size_does_not_change_bytes(tmp_path):
    entries, table = random_entries(seed=13, n=5000)
    blobs = []
    for buffer_entries in (1, 7, 4096):
        path = tmp_path / f"b{buffer_entries}.bin"
        write_trace(entries, SinkConfig(path, BINARY, buffer_entries=buffer_entries))
        blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]


def test_text_sink_round_trip(tmp_path):
    entries, table = random_entries(seed=14, n=200)
    path = tmp_path / "trace.txt"
    write_trace(entries, SinkConfig(path, TEXT), table)
    back = list(read_trace(path, TEXT, table))
    assert back == entries


def test_text_sink_requires_table(tmp_path):
    with pytest.raises(InvalidConfig):
        open_sink(SinkConfig(tmp_path / "t.txt", TEXT))


def test_read_trace_round_trip(tmp_path):
    entries, _ = random_entries(seed=15, n=333)
    path = tmp_path / "trace.bin"
    write_trace(entries, SinkConfig(path))
    assert list(read_trace(path)) == entries


def test_read_trace_empty_file(tmp_path):
    path = tmp_path / "empty.bin"
    path.write_bytes(b"")
    assert list(read_trace(path)) == []


def test_read_trace_truncated(tmp_path):
    path = tmp_path / "short.bin"
    path.write_bytes(b"\x00" * 47)
    with pytest.raises(TruncatedTrace):
        list(read_trace(path))


def test_socket_stream_equals_file_route(tmp_path):
    entries, _ = workload_entries()
    path = tmp_path / "trace.bin"
    write_trace(entries, SinkConfig(path))

    with TraceReceiver() as rx:
        sender = threading.Thread(
            target=serve_trace, args=(entries, ("127.0.0.1", rx.port))
        )
        sender.start()
        received = list(rx.entries())
        sender.join()
    assert received == list(read_trace(path))


def test_socket_empty_stream(tmp_path):
    with TraceReceiver() as rx:
        sender = threading.Thread(target=serve_trace, args=([], ("127.0.0.1", rx.port)))
        sender.start()
        assert list(rx.entries()) == []
        sender.join()


def test_sender_killed_mid_entry_truncates(tmp_path):
    entries, _ = random_entries(seed=16, n=10)
    payload = b"".join(encode_binary(e) for e in entries) + b"\xAB" * 20

    def rude_sender(port):
        sock = socket.create_connection(("127.0.0.1", port))
        sock.sendall(payload)
        time.sleep(0.05)
        sock.close()

    with TraceReceiver() as rx:
        sender = threading.Thread(target=rude_sender, args=(rx.port,))
        sender.start()
        got = []
        with pytest.raises(TruncatedTrace):
            for e in rx.entries():
                got.append(e)
        sender.join()
    assert got == entries  # all complete prior entries delivered


def test_socket_sink_rejects_text():
    with pytest.raises(InvalidConfig):
        open_sink(SinkConfig(("127.0.0.1", 1), TEXT))


def test_socket_sink_delivers_buffered_entries():
    entries, _ = random_entries(seed=19, n=100)
    with TraceReceiver() as rx:
        def send():
            cfg = SinkConfig(("127.0.0.1", rx.port), BINARY, buffer_entries=7)
            with open_sink(cfg) as sink:
                for e in entries:
                    sink.write(e)

        sender = threading.Thread(target=send)
        sender.start()
        received = list(rx.entries())
        sender.join()
    assert received == entries


# ---------------------------------------------------------------------------
# stage chaining


def _identity_stage(name="identity"):
    return Stage(name, lambda it: iter(list(it)))


def test_identity_chain_preserves_trace():
    entries, _ = random_entries(seed=17, n=100)
    pipeline = chain([_identity_stage()])
    assert list(pipeline.run(iter(entries))) == entries


def test_chain_matches_sequential_application(tmp_path):
    from memtrace.cachesim import CacheConfig, simulate

    entries, _ = workload_entries("aos_traversal", {"elems": 256})
    cfg = CacheConfig(4096, 64, 4)

    # producer -> file, then file -> simulate, vs producer -> simulate streamed
    path = tmp_path / "stage.bin"
    write_trace(entries, SinkConfig(path))
    offline = list(simulate(read_trace(path), cfg))

    stages = [
        Stage("simulate", lambda it: simulate(it, cfg)),
        _identity_stage("forward"),
    ]
    streamed = list(chain(stages).run(iter(entries)))
    assert streamed == offline
    assert any(e.hint == HINT_MISS for e in streamed if e.is_access)


def test_incompatible_stage_formats_rejected():
    binary_out = Stage("producer", lambda it: it, in_format=None, out_format=BINARY)
    text_in = Stage("text-writer", lambda it: it, in_format=TEXT, out_format=TEXT)
    with pytest.raises(IncompatibleStages):
        chain([binary_out, text_in])


def test_source_stage_cannot_follow():
    src = Stage("producer", lambda it: it, in_format=None, out_format=BINARY)
    with pytest.raises(IncompatibleStages):
        chain([_identity_stage(), src])


def test_stage_conservation():
    entries, _ = random_entries(seed=18, n=500)
    out = list(chain([_identity_stage(), _identity_stage()]).run(iter(entries)))
    assert len(out) == len(entries)
