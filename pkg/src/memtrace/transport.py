"""Buffered trace sinks and sources: files, TCP sockets, stage chaining.

The wire protocol over TCP is the bare concatenation of 48-byte binary
entries with no framing; end of stream is the orderly connection close.
Three sink variants are supported, mirroring the logging library shapes:
text to file, binary to file, and binary to socket.  Output buffering
(default 4096 entries) is transparent: the bytes produced are independent
of the buffer size.
"""

from __future__ import annotations

import socket
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from .codec import ENTRY_SIZE, decode_binary, decode_text, encode_binary, encode_text
from .errors import IncompatibleStages, InvalidConfig, TruncatedTrace
from .events import LogEntry

BINARY = "binary"
TEXT = "text"

DEFAULT_BUFFER_ENTRIES = 4096


@dataclass(frozen=True)
class SinkConfig:
    destination: object  # path-like, or (host, port) tuple
    format: str = BINARY
    buffer_entries: int = DEFAULT_BUFFER_ENTRIES

    def __post_init__(self):
        if self.format not in (BINARY, TEXT):
            raise InvalidConfig(f"format must be binary or text, got {self.format!r}")
        if self.buffer_entries < 1:
            raise InvalidConfig("buffer_entries must be >= 1")

    @property
    def is_socket(self) -> bool:
        return isinstance(self.destination, tuple)


class _FileSink:
    def __init__(self, cfg: SinkConfig, encode):
        mode = "wb" if cfg.format == BINARY else "w"
        self._fh = open(cfg.destination, mode)
        self._encode = encode
        self._limit = cfg.buffer_entries
        self._buf = []
        self._join = b"".join if cfg.format == BINARY else "".join

    def write(self, entry: LogEntry) -> None:
        self._buf.append(self._encode(entry))
        if len(self._buf) >= self._limit:
            self._flush()

    def _flush(self) -> None:
        if self._buf:
            self._fh.write(self._join(self._buf))
            self._buf.clear()

    def close(self) -> None:
        self._flush()
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class _SocketSink:
    def __init__(self, cfg: SinkConfig):
        self._sock = _connect(cfg.destination)
        self._limit = cfg.buffer_entries
        self._buf = []

    def write(self, entry: LogEntry) -> None:
        self._buf.append(encode_binary(entry))
        if len(self._buf) >= self._limit:
            self._flush()

    def _flush(self) -> None:
        if self._buf:
            self._sock.sendall(b"".join(self._buf))
            self._buf.clear()

    def close(self) -> None:
        self._flush()
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def open_sink(cfg: SinkConfig, table=None):
    """Open a buffered sink; text sinks need the string table for names."""
    if cfg.is_socket:
        if cfg.format != BINARY:
            raise InvalidConfig("socket sinks carry binary entries only")
        return _SocketSink(cfg)
    if cfg.format == TEXT:
        if table is None:
            raise InvalidConfig("text sinks need a string table")
        return _FileSink(cfg, lambda e: encode_text(e, table))
    return _FileSink(cfg, encode_binary)


def write_trace(entries, cfg: SinkConfig, table=None) -> int:
    """Drain a stream into a sink; returns the entry count."""
    n = 0
    with open_sink(cfg, table) as sink:
        for entry in entries:
            sink.write(entry)
            n += 1
    return n


def read_trace(path, format: str = BINARY, table=None) -> Iterator[LogEntry]:
    """Yield entries from a trace file in file order.

    Binary files must be a whole number of 48-byte records; anything else
    raises TruncatedTrace.  Text files need the string table.
    """
    if format == TEXT:
        if table is None:
            raise InvalidConfig("text traces need a string table")
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    yield decode_text(line, table)
        return
    size = Path(path).stat().st_size
    if size % ENTRY_SIZE:
        raise TruncatedTrace(f"{path}: {size} bytes is not a multiple of {ENTRY_SIZE}")
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(ENTRY_SIZE * 4096)
            if not chunk:
                return
            for off in range(0, len(chunk), ENTRY_SIZE):
                yield decode_binary(chunk[off : off + ENTRY_SIZE])


def _connect(endpoint, attempts: int = 40, delay: float = 0.05) -> socket.socket:
    # Retry briefly so a freshly forked receiver has time to bind.
    host, port = endpoint
    last = None
    for _ in range(attempts):
        try:
            return socket.create_connection((host, port))
        except ConnectionRefusedError as exc:
            last = exc
            time.sleep(delay)
    raise last


def serve_trace(entries, endpoint, buffer_entries: int = DEFAULT_BUFFER_ENTRIES) -> int:
    """Send a stream to a listening receiver; returns the entry count."""
    sock = _connect(endpoint)
    n = 0
    buf = []
    try:
        for entry in entries:
            buf.append(encode_binary(entry))
            n += 1
            if len(buf) >= buffer_entries:
                sock.sendall(b"".join(buf))
                buf.clear()
        if buf:
            sock.sendall(b"".join(buf))
    finally:
        sock.close()
    return n


class TraceReceiver:
    """One-shot TCP receiver: bind, accept one sender, yield its entries.

    Binding happens at construction so the effective port (``.port``) is
    known before the sender starts; pass port 0 to let the OS pick.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._srv.bind((host, port))
        self._srv.listen(1)
        self.port = self._srv.getsockname()[1]

    def entries(self) -> Iterator[LogEntry]:
        conn, _ = self._srv.accept()
        buf = bytearray()
        try:
            while True:
                try:
                    chunk = conn.recv(65536)
                except ConnectionResetError:
                    chunk = b""
                if not chunk:
                    break
                buf += chunk
                full = len(buf) - len(buf) % ENTRY_SIZE
                for off in range(0, full, ENTRY_SIZE):
                    yield decode_binary(bytes(buf[off : off + ENTRY_SIZE]))
                del buf[:full]
        finally:
            conn.close()
        if buf:
            raise TruncatedTrace(
                f"stream ended mid-entry with {len(buf)} leftover bytes"
            )

    def close(self) -> None:
        self._srv.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def receive_trace(endpoint) -> Iterator[LogEntry]:
    """Listen on endpoint, accept one connection, yield its entries."""
    host, port = endpoint
    with TraceReceiver(host, port) as rx:
        yield from rx.entries()


# ---------------------------------------------------------------------------
# Pipe-style stage chaining


@dataclass(frozen=True)
class Stage:
    """One pipeline step: a transform over the entry stream.

    in_format is None for source stages that take no upstream input.  The
    format tags describe the encoded representation each side expects when
    the stream crosses a process boundary; chain() refuses mismatches.
    """

    name: str
    transform: Callable[[Iterator[LogEntry]], Iterator[LogEntry]]
    in_format: str | None = BINARY
    out_format: str = BINARY


@dataclass(frozen=True)
class Pipeline:
    stages: tuple[Stage, ...] = field(default_factory=tuple)

    def run(self, entries: Iterator[LogEntry] | None = None) -> Iterator[LogEntry]:
        stream = iter(()) if entries is None else entries
        for stage in self.stages:
            stream = stage.transform(stream)
        return stream


def chain(stages) -> Pipeline:
    """Compose stages left to right, checking format compatibility."""
    stages = tuple(stages)
    for left, right in zip(stages, stages[1:]):
        if right.in_format is None:
            raise IncompatibleStages(f"{right.name} is a source, cannot chain after {left.name}")
        if left.out_format != right.in_format:
            raise IncompatibleStages(
                f"{left.name} emits {left.out_format} but {right.name} expects {right.in_format}"
            )
    return Pipeline(stages)
