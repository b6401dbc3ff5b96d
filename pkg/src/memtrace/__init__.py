"""Memory access trace pipeline.

Generate deterministic instrumented-program traces, move them through
buffered files and sockets in a fixed 48-byte binary format, annotate
accesses with a single-level LRU cache simulation, and analyze the stream
with pluggable kernels: per-variable access counts, cache-offender
ranking, hot/cold structure splitting, and shared-variable detection.
"""

__version__ = "0.1.0"

from .cachesim import FULL, CacheConfig, CacheState, access, count_misses, simulate
from .codec import ENTRY_SIZE, decode_binary, decode_text, encode_binary, encode_text
from .engine import (
    AnalysisKernel,
    BatchingPolicy,
    KeyedState,
    Report,
    keyed_update,
    run_batched,
    run_offline,
    run_streaming,
)
from .events import (
    HINT_HIT,
    HINT_MISS,
    HINT_NONE,
    AccessEvent,
    AllocEvent,
    FunctionEvent,
    LogEntry,
    SourceLoc,
)
from .kernels import KERNELS, ThreadHistogram, create_kernel, is_uniform
from .strings import StringTable, load_string_maps, save_string_maps
from .transport import (
    SinkConfig,
    Stage,
    TraceReceiver,
    chain,
    open_sink,
    read_trace,
    receive_trace,
    serve_trace,
    write_trace,
)
from .workloads import (
    EmulatedHeap,
    ThreadSchedule,
    WorkloadSpec,
    run_workload,
    scenario_catalog,
)
