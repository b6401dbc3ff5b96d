"""Exception types shared across the trace pipeline."""


class MemtraceError(Exception):
    """Base class for every error raised by this package."""


class MalformedEntry(MemtraceError):
    """A binary block or text line does not decode to a valid log entry."""


class UnknownId(MemtraceError):
    """An interned id has no mapping in the string table."""

    def __init__(self, namespace, ident, entry_index=None):
        self.namespace = namespace
        self.ident = ident
        self.entry_index = entry_index
        where = f" (entry {entry_index})" if entry_index is not None else ""
        super().__init__(f"unknown {namespace} id {ident}{where}")


class MalformedJson(MemtraceError):
    """String-map file is not valid JSON or has the wrong shape."""


class ConflictingMapping(MemtraceError):
    """Two string maps assign incompatible id/string pairs."""


class MalformedSpec(MemtraceError):
    """An allocator config line cannot be parsed."""

    def __init__(self, line_no, reason):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


class InvalidSpec(MemtraceError):
    """A workload spec names an unknown scenario or has bad parameters."""


class InvalidConfig(MemtraceError):
    """A cache or sink configuration violates its constraints."""


class TruncatedTrace(MemtraceError):
    """A binary trace ended mid-entry (file length or socket stream)."""


class IncompatibleStages(MemtraceError):
    """Adjacent pipeline stages disagree on the stream format."""


class KernelError(MemtraceError):
    """An analysis kernel failed; carries context about where."""


class UnknownKernel(MemtraceError):
    """The requested analysis kernel is not registered."""

    def __init__(self, name, available):
        self.name = name
        self.available = tuple(available)
        super().__init__(
            f"unknown kernel {name!r}; available: {', '.join(self.available)}"
        )


class UnannotatedTrace(MemtraceError):
    """A kernel that needs hit/miss annotations saw an unannotated access."""


class TargetNotFound(MemtraceError):
    """The sharing-detail target never appears in the trace."""


class SingleThread(MemtraceError):
    """Uniformity is undefined for histograms with fewer than two threads."""
