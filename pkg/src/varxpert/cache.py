"""Line-delimited JSON cache for per-change classification results.

One record per (commit, file) pair. A cache file is valid only for the
exact branch tip and analyzer configuration it was built with, so the
file name embeds both; anything else is ignored rather than migrated.
Records carry everything the ledger fold needs, which lets a warm run
skip annotation entirely. Writes go to a temp file that is renamed into
place once the run finishes, so an interrupted run never leaves a
half-trusted cache behind.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from typing import Optional

_FORMAT = "varxpert-change-cache/1"


def analyzer_config_hash(extensions: frozenset[str], exclude_include_guards: bool) -> str:
    payload = json.dumps(
        {
            "format": _FORMAT,
            "extensions": sorted(e.lower() for e in extensions),
            "exclude_include_guards": exclude_include_guards,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class CacheRecord:
    commit_id: str
    timestamp: int
    author_key: str
    path_after: str  # for deletions this is the path being removed
    kind: str
    touched_variable: bool
    touched_mandatory: bool
    variability_expressions: tuple[str, ...]
    saw_variable: bool

    def as_json(self) -> str:
        return json.dumps(
            {
                "commit_id": self.commit_id,
                "timestamp": self.timestamp,
                "author_key": self.author_key,
                "path_after": self.path_after,
                "kind": self.kind,
                "touched_variable": self.touched_variable,
                "touched_mandatory": self.touched_mandatory,
                "variability_expressions": list(self.variability_expressions),
                "saw_variable": self.saw_variable,
            },
            sort_keys=True,
        )


class ChangeCache:
    """In-memory view of one cache file plus an append buffer."""

    def __init__(self, path: Optional[str]):
        self.path = path
        self._records: dict[tuple[str, str], CacheRecord] = {}
        self._fresh: list[CacheRecord] = []
        self.hits = 0

    @classmethod
    def open(
        cls,
        cache_dir: Optional[str],
        tip: str,
        extensions: frozenset[str],
        exclude_include_guards: bool,
    ) -> "ChangeCache":
        if cache_dir is None:
            return cls(None)
        os.makedirs(cache_dir, exist_ok=True)
        digest = analyzer_config_hash(extensions, exclude_include_guards)
        path = os.path.join(cache_dir, f"changes-{tip}-{digest}.jsonl")
        cache = cls(path)
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        raw = json.loads(line)
                        record = CacheRecord(
                            commit_id=raw["commit_id"],
                            timestamp=int(raw["timestamp"]),
                            author_key=raw["author_key"],
                            path_after=raw["path_after"],
                            kind=raw["kind"],
                            touched_variable=bool(raw["touched_variable"]),
                            touched_mandatory=bool(raw["touched_mandatory"]),
                            variability_expressions=tuple(raw["variability_expressions"]),
                            saw_variable=bool(raw["saw_variable"]),
                        )
                    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                        continue  # a damaged line costs a recomputation, nothing more
                    cache._records[(record.commit_id, record.path_after)] = record
        return cache

    @property
    def enabled(self) -> bool:
        return self.path is not None

    def get(self, commit_id: str, path: str) -> Optional[CacheRecord]:
        record = self._records.get((commit_id, path))
        if record is not None:
            self.hits += 1
        return record

    def put(self, record: CacheRecord) -> None:
        if not self.enabled:
            return
        key = (record.commit_id, record.path_after)
        if key in self._records:
            return
        self._records[key] = record
        self._fresh.append(record)

    def flush(self) -> None:
        """Atomically persist everything seen this run."""
        if not self.enabled or not self._fresh:
            return
        assert self.path is not None
        directory = os.path.dirname(self.path)
        existing = os.path.exists(self.path)
        fd, temp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                if existing:
                    with open(self.path, "r", encoding="utf-8") as previous:
                        handle.write(previous.read())
                for record in self._fresh:
                    handle.write(record.as_json() + "\n")
            os.replace(temp_path, self.path)
        finally:
            if os.path.exists(temp_path):
                os.unlink(temp_path)
        self._fresh = []
