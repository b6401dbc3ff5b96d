"""Interned-string tables shared by trace producers and analyzers.

Names written to a trace are replaced by dense integer ids, one id space
per namespace (files, functions, variables, types).  The mapping is
persisted as a single JSON document with one array per namespace where the
array index is the id, so producers and analyzers agree on ids across
runs.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ConflictingMapping, MalformedJson, UnknownId

NAMESPACES = ("files", "functions", "variables", "types")


class StringTable:
    """Bidirectional id <-> string mapping for the four namespaces."""

    def __init__(self):
        self._names: dict[str, list[str]] = {ns: [] for ns in NAMESPACES}
        self._ids: dict[str, dict[str, int]] = {ns: {} for ns in NAMESPACES}

    def intern(self, namespace: str, s: str) -> int:
        """Return the id for s, assigning the next dense id on first use."""
        ids = self._ids[namespace]
        ident = ids.get(s)
        if ident is None:
            names = self._names[namespace]
            ident = len(names)
            names.append(s)
            ids[s] = ident
        return ident

    def resolve(self, namespace: str, ident: int) -> str:
        names = self._names[namespace]
        if not 0 <= ident < len(names):
            raise UnknownId(namespace, ident)
        return names[ident]

    def lookup(self, namespace: str, s: str) -> int | None:
        """Return the id for s without interning, or None."""
        return self._ids[namespace].get(s)

    def size(self, namespace: str) -> int:
        return len(self._names[namespace])

    def merge(self, other: StringTable) -> None:
        """Fold another table's mappings in, preserving existing ids.

        Raises ConflictingMapping when the same id maps to two strings or
        the same string would end up with two ids.
        """
        for ns in NAMESPACES:
            ours = self._names[ns]
            theirs = other._names[ns]
            for ident, s in enumerate(theirs):
                if ident < len(ours):
                    if ours[ident] != s:
                        raise ConflictingMapping(
                            f"{ns} id {ident} maps to both {ours[ident]!r} and {s!r}"
                        )
                else:
                    existing = self._ids[ns].get(s)
                    if existing is not None:
                        raise ConflictingMapping(
                            f"{ns} string {s!r} already has id {existing}, "
                            f"cannot also take id {ident}"
                        )
                    ours.append(s)
                    self._ids[ns][s] = ident

    def to_dict(self) -> dict:
        return {ns: list(self._names[ns]) for ns in NAMESPACES}

    @classmethod
    def from_dict(cls, doc: dict) -> StringTable:
        if not isinstance(doc, dict):
            raise MalformedJson("string maps document must be a JSON object")
        table = cls()
        for ns in NAMESPACES:
            names = doc.get(ns, [])
            if not isinstance(names, list) or not all(
                isinstance(s, str) for s in names
            ):
                raise MalformedJson(f"namespace {ns!r} must be an array of strings")
            seen = {}
            for ident, s in enumerate(names):
                if s in seen:
                    raise ConflictingMapping(
                        f"{ns} string {s!r} appears at ids {seen[s]} and {ident}"
                    )
                seen[s] = ident
            table._names[ns] = list(names)
            table._ids[ns] = seen
        return table

    def __eq__(self, other):
        return isinstance(other, StringTable) and self._names == other._names


def save_string_maps(table: StringTable, path) -> None:
    Path(path).write_text(json.dumps(table.to_dict(), indent=1) + "\n")


def load_string_maps(path) -> StringTable:
    """Load a table from JSON; an empty file yields an empty table."""
    text = Path(path).read_text()
    if not text.strip():
        return StringTable()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"{path}: {exc}") from exc
    return StringTable.from_dict(doc)
