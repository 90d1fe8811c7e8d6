"""JSONL progress logs for partitioned searches.

Each line records one completed partition::

    {"key": ..., "partition_id": 3, "solutions_found": 12, "cursor": [...], ...}

``key`` identifies the problem, so a log written for one search is never
replayed into another.
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Dict, Optional


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


class CheckpointMismatch(ValueError):
    pass


class CheckpointLog:
    def __init__(self, path: Optional[str], key: str, resume: bool = False):
        self.path = path
        self.key = key
        self.done: Dict[int, dict] = {}
        if path is None:
            return
        if resume and os.path.exists(path):
            with open(path) as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    if rec.get("key") != key:
                        raise CheckpointMismatch(
                            f"checkpoint {path} belongs to a different problem")
                    self.done[rec["partition_id"]] = rec
        elif not resume and os.path.exists(path):
            os.remove(path)

    def completed(self, partition_id: int) -> Optional[dict]:
        return self.done.get(partition_id)

    def record(self, partition_id: int, **fields) -> None:
        rec = {"key": self.key, "partition_id": partition_id, **fields}
        self.done[partition_id] = rec
        if self.path is None:
            return
        with open(self.path, "a") as fh:
            fh.write(canonical_json(rec) + "\n")
            fh.flush()
