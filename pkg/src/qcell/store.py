"""File-backed persistence for cell programs and game sessions.

Documents are canonical JSON (sorted keys, compact separators, shortest
round-trip float representation) written atomically via a temp file and
rename. Loads reject schema-version mismatches. Writes are serialized per
document id.
"""
from __future__ import annotations

import json
import os
import re
import threading
from pathlib import Path

SCHEMA_VERSION = 1

_ID_RE = re.compile(r"^[A-Za-z0-9_-]{1,128}$")


class StoreError(Exception):
    pass


class NotFound(StoreError):
    pass


class BadDocument(StoreError):
    pass


def canonical_json(obj) -> bytes:
    """Deterministic encoding: sorted keys, no whitespace, repr floats."""
    return (
        json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
        + "\n"
    ).encode("utf-8")


def validate_id(doc_id: str) -> str:
    if not _ID_RE.match(doc_id or ""):
        raise BadDocument(f"invalid id {doc_id!r}: must be URL-safe")
    return doc_id


class Store:
    """Two JSON document trees under one root: programs/ and sessions/."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("programs", "sessions"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._locks: dict[tuple[str, str], threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, kind: str, doc_id: str) -> threading.Lock:
        key = (kind, doc_id)
        with self._locks_guard:
            if key not in self._locks:
                self._locks[key] = threading.Lock()
            return self._locks[key]

    def _path(self, kind: str, doc_id: str) -> Path:
        validate_id(doc_id)
        if kind not in ("programs", "sessions"):
            raise StoreError(f"unknown document kind {kind!r}")
        return self.root / kind / f"{doc_id}.json"

    def put(self, kind: str, doc_id: str, doc: dict) -> bytes:
        doc = dict(doc)
        doc["version"] = SCHEMA_VERSION
        doc["id"] = doc_id
        data = canonical_json(doc)
        path = self._path(kind, doc_id)
        tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
        with self.lock(kind, doc_id):
            tmp.write_bytes(data)
            os.replace(tmp, path)
        return data

    def get_bytes(self, kind: str, doc_id: str) -> bytes:
        path = self._path(kind, doc_id)
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            raise NotFound(f"{kind[:-1]} {doc_id!r} not found") from None
        return data

    def get(self, kind: str, doc_id: str) -> dict:
        data = self.get_bytes(kind, doc_id)
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise BadDocument(f"corrupt document {doc_id!r}: {exc}") from exc
        if doc.get("version") != SCHEMA_VERSION:
            raise BadDocument(
                f"document {doc_id!r} has schema version {doc.get('version')!r}, "
                f"expected {SCHEMA_VERSION}"
            )
        return doc

    def delete(self, kind: str, doc_id: str) -> None:
        path = self._path(kind, doc_id)
        with self.lock(kind, doc_id):
            try:
                path.unlink()
            except FileNotFoundError:
                raise NotFound(f"{kind[:-1]} {doc_id!r} not found") from None

    def exists(self, kind: str, doc_id: str) -> bool:
        return self._path(kind, doc_id).exists()

    def list_ids(self, kind: str) -> list[str]:
        if kind not in ("programs", "sessions"):
            raise StoreError(f"unknown document kind {kind!r}")
        return sorted(p.stem for p in (self.root / kind).glob("*.json"))
