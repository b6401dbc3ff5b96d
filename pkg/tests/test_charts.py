"""Chart rendering writes one figure per live type."""

from memtrace.charts import render_split_charts
from memtrace.engine import run_offline
from memtrace.kernels import StructSplitting
from memtrace.strings import StringTable
from memtrace.workloads import WorkloadSpec, run_workload


def test_render_creates_one_file_per_type(tmp_path):
    charts = [
        {"type": "Alpha", "fields": [{"field": "x", "weight": 10, "hot": True},
                                     {"field": "y", "weight": 1, "hot": False}]},
        {"type": "Beta", "fields": [{"field": "z", "weight": 5, "hot": False}]},
    ]
    paths = render_split_charts(charts, tmp_path)
    assert [p.name for p in paths] == ["split_Alpha.png", "split_Beta.png"]
    for p in paths:
        assert p.stat().st_size > 0


def test_render_from_kernel_report(tmp_path):
    table = StringTable()
    entries = run_workload(WorkloadSpec("aos_traversal", {"elems": 512}), table)
    report = run_offline(entries, StructSplitting(table))
    assert report.charts
    paths = render_split_charts(report.charts, tmp_path / "charts")
    assert paths and all(p.exists() for p in paths)


def test_type_names_sanitized(tmp_path):
    charts = [{"type": "ns::Weird/Name", "fields": [{"field": "a", "weight": 1, "hot": False}]}]
    (path,) = render_split_charts(charts, tmp_path)
    assert "/" not in path.name and ":" not in path.name
