"""Request/response cassette, file-compatible with the engine's tapes.

Keys are sha256 over the canonical (sorted-key, compact) JSON encoding
of the request body, so replay resolves by content in any order. The
file layout is {"entries": {hash: {"request": ..., "response": ...}}}.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import CassetteMiss

__all__ = ["Cassette", "canonical_json", "request_hash"]


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def request_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


@dataclass
class Cassette:
    path: Path
    mode: str = "replay"  # "record" | "replay"
    entries: dict[str, dict[str, Any]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.path = Path(self.path)
        if self.mode not in ("record", "replay"):
            raise ValueError(f"cassette mode must be 'record' or 'replay', got {self.mode!r}")
        if self.mode == "replay" or self.path.exists():
            data = json.loads(self.path.read_text(encoding="utf-8"))
            self.entries = data.get("entries", {})

    def lookup(self, request_body: Any) -> Any:
        key = request_hash(request_body)
        if key not in self.entries:
            raise CassetteMiss(f"no recorded response for request hash {key}")
        return self.entries[key]["response"]

    def store(self, request_body: Any, response_body: Any) -> None:
        self.entries[request_hash(request_body)] = {
            "request": request_body,
            "response": response_body,
        }

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"entries": dict(sorted(self.entries.items()))}
        self.path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
