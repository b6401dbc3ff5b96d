"""Allocator config parsing."""

import pytest

from memtrace.allocators import AllocatorSpec, parse_allocator_config
from memtrace.errors import MalformedSpec


def test_malloc_line():
    (spec,) = parse_allocator_config("malloc,_,0,-1")
    assert spec == AllocatorSpec("malloc", None, 0, -1)


def test_calloc_line():
    (spec,) = parse_allocator_config("calloc,0,1,-1")
    assert spec.count_idx == 0
    assert spec.size_idx == 1
    assert spec.addr_idx == -1


def test_bad_arity_reports_line_number():
    with pytest.raises(MalformedSpec) as exc:
        parse_allocator_config("bad,x,y")
    assert exc.value.line_no == 1


def test_comments_and_blanks_skipped():
    text = "# standard allocators\n\nmalloc,_,0,-1   # returns the address\ncalloc,0,1,-1\n"
    specs = parse_allocator_config(text)
    assert [s.name for s in specs] == ["malloc", "calloc"]


def test_non_numeric_index():
    with pytest.raises(MalformedSpec) as exc:
        parse_allocator_config("malloc,_,0,-1\nweird,_,size,-1")
    assert exc.value.line_no == 2


def test_out_of_range_indices():
    with pytest.raises(MalformedSpec):
        parse_allocator_config("posix_memalign,_,-2,0")
    with pytest.raises(MalformedSpec):
        parse_allocator_config("oddalloc,_,0,-3")
