"""Durable repository: an append-only records file, a manifest, and cached indexes.

Layout under the repository root::

    manifest         format version, next_sequence, records checksum, retired ids
    records.jsonl    one JSON object per line, fields as in AssetRecord
    index/           cached index files, rebuilt whenever stale
    lock             advisory lock taken around every write

``records.jsonl`` is the source of truth. Removal never rewrites it; the id is
added to the manifest's ``retired`` list and the line is dropped at the next
compaction (``rebuild_indexes``).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable

from .assets import AssetId, AssetRecord, Prefix, classify_asset, validate_record
from .errors import Busy, Conflict, CorruptStore, InvalidArgument, NotFound, ValidationFailed
from .index import IndexSet, build_indexes

try:
    import fcntl
except ImportError:  # pragma: no cover - non-POSIX
    fcntl = None

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST = "manifest"
RECORDS = "records.jsonl"
INDEX_DIR = "index"
LOCK = "lock"


def _dump_record(record: AssetRecord) -> bytes:
    return (json.dumps(record.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n").encode("utf-8")


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


@dataclass
class Snapshot:
    """Immutable view of the live records and their indexes at one point in time."""

    records: dict[AssetId, AssetRecord]
    indexes: IndexSet

    def __len__(self) -> int:
        return len(self.records)

    @cached_property
    def ordered(self) -> list[AssetRecord]:
        return sorted(self.records.values(), key=lambda r: str(r.id))

    @cached_property
    def executables(self) -> list[AssetRecord]:
        return [r for r in self.ordered if r.is_executable]

    @cached_property
    def specifications(self) -> list[AssetRecord]:
        return [r for r in self.ordered if r.is_specification]

    @cached_property
    def doc_norms(self) -> dict[AssetId, float]:
        """Euclidean norm of each record's tf-idf vector (ln idf, raw tf)."""
        n = len(self.records)
        sq: dict[AssetId, float] = {}
        for postings in self.indexes.text.values():
            idf = math.log(n / len(postings))
            for rid, tf in postings.items():
                sq[rid] = sq.get(rid, 0.0) + (tf * idf) ** 2
        return {rid: math.sqrt(v) for rid, v in sq.items()}

    @classmethod
    def from_records(cls, records: Iterable[AssetRecord]) -> "Snapshot":
        records = list(records)
        return cls({r.id: r for r in records}, build_indexes(records))


class Repository:
    """Handle on one repository. ``root=None`` gives a purely in-memory store."""

    def __init__(self, root: Path | None, clock: Callable[[], int] | None = None):
        self.root = None if root is None else Path(root)
        self.clock = clock or (lambda: int(time.time()))
        self.next_sequence = 0
        self._records: dict[AssetId, AssetRecord] = {}
        self._retired: set[AssetId] = set()
        self._indexes = IndexSet()
        self._snapshot: Snapshot | None = None
        self._hash = hashlib.sha256()
        self._records_bytes = 0
        self._dead_lines = 0
        self._dirty = False

    # construction

    @classmethod
    def in_memory(cls, clock: Callable[[], int] | None = None) -> "Repository":
        return cls(None, clock)

    @classmethod
    def open(cls, path, create_if_missing: bool = False,
             clock: Callable[[], int] | None = None) -> "Repository":
        root = Path(path)
        repo = cls(root, clock)
        if not (root / MANIFEST).exists():
            if not create_if_missing:
                raise NotFound(f"no repository at {root}")
            root.mkdir(parents=True, exist_ok=True)
            (root / INDEX_DIR).mkdir(exist_ok=True)
            (root / RECORDS).touch()
            (root / LOCK).touch()
            with repo._locked():
                repo._write_manifest()
            return repo
        repo._load()
        return repo

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self) -> None:
        if self.root is not None and self._dirty:
            self._persist_indexes()
        self._dirty = False

    # properties

    @property
    def root_path(self) -> Path | None:
        return self.root

    @property
    def record_count(self) -> int:
        return len(self._records)

    @property
    def indexes(self) -> IndexSet:
        return self._indexes

    def snapshot(self) -> Snapshot:
        if self._snapshot is None:
            self._snapshot = Snapshot(dict(self._records), self._indexes.copy())
        return self._snapshot

    # reads

    def get(self, asset_id: AssetId | str) -> AssetRecord:
        asset_id = _as_id(asset_id)
        try:
            return self._records[asset_id]
        except KeyError:
            raise NotFound(f"unknown asset id {asset_id}") from None

    def __contains__(self, asset_id) -> bool:
        return _as_id(asset_id) in self._records

    def list(self, predicate: Callable[[AssetRecord], bool] | None = None, *,
             category: str | None = None, subkind: str | None = None,
             language: str | None = None, prefix: Prefix | str | None = None) -> list[AssetRecord]:
        out = []
        for r in self._records.values():
            if category is not None and r.kind.category.casefold() != category.casefold():
                continue
            if subkind is not None and r.kind.subkind.casefold() != subkind.casefold():
                continue
            if language is not None and (r.language or "").casefold() != language.casefold():
                continue
            if prefix is not None and r.id.prefix is not Prefix(prefix):
                continue
            if predicate is not None and not predicate(r):
                continue
            out.append(r)
        return sorted(out, key=lambda r: str(r.id))

    # writes

    def add(self, record: AssetRecord, explicit_id: AssetId | str | None = None) -> AssetId:
        if explicit_id is None and record.id is not None:
            explicit_id = record.id
        with self._locked():
            if explicit_id is not None:
                asset_id = _as_id(explicit_id)
                if asset_id in self._records or asset_id in self._retired:
                    raise Conflict(f"asset id {asset_id} already used")
            else:
                asset_id = AssetId(record.prefix, self.next_sequence)
            stored = replace(record, id=asset_id, created_at=self.clock())
            violations = validate_record(stored)
            if violations:
                raise ValidationFailed(violations)
            classify_asset(stored)
            if self.root is not None:
                line = _dump_record(stored)
                with open(self.root / RECORDS, "ab") as fh:
                    fh.write(line)
                    fh.flush()
                    os.fsync(fh.fileno())
                self._hash.update(line)
                self._records_bytes += len(line)
            self.next_sequence = max(self.next_sequence, asset_id.sequence + 1)
            self._records[asset_id] = stored
            self._indexes.add(stored)
            if self.root is not None:
                self._write_manifest()
            self._changed()
        return asset_id

    def remove(self, asset_id: AssetId | str) -> AssetRecord:
        asset_id = _as_id(asset_id)
        with self._locked():
            record = self.get(asset_id)
            del self._records[asset_id]
            self._retired.add(asset_id)
            self._indexes.remove(record)
            self._dead_lines += 1
            if self.root is not None:
                self._write_manifest()
            self._changed()
        return record

    def rebuild_indexes(self) -> dict[str, int]:
        """Compact the records file and rebuild every index from the live records."""
        with self._locked():
            live = sorted(self._records.values(), key=lambda r: str(r.id))
            if self.root is not None and self._dead_lines:
                data = b"".join(_dump_record(r) for r in self._file_order(live))
                _atomic_write(self.root / RECORDS, data)
                self._hash = hashlib.sha256(data)
                self._records_bytes = len(data)
                self._dead_lines = 0
                self._write_manifest()
            self._indexes = build_indexes(live)
            self._changed()
            if self.root is not None:
                self._persist_indexes()
        return self._indexes.stats()

    def checksum(self) -> str:
        """Digest of the durable state (manifest and records), for change detection."""
        if self.root is None:
            return hashlib.sha256(b"".join(_dump_record(r) for r in self.list())).hexdigest()
        h = hashlib.sha256()
        for name in (MANIFEST, RECORDS):
            h.update((self.root / name).read_bytes())
        return h.hexdigest()

    # internals

    def _file_order(self, live: list[AssetRecord]) -> list[AssetRecord]:
        # keep insertion order (dict order) so compaction is a pure deletion
        order = {rid: i for i, rid in enumerate(self._records)}
        return sorted(live, key=lambda r: order[r.id])

    def _changed(self) -> None:
        self._snapshot = None
        self._dirty = True

    @contextmanager
    def _locked(self):
        if self.root is None or fcntl is None:
            yield
            return
        with open(self.root / LOCK, "a+") as fh:
            try:
                fcntl.flock(fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
            except BlockingIOError:
                raise Busy(f"repository {self.root} is locked by another writer") from None
            try:
                self._refresh_if_changed()
                yield
            finally:
                fcntl.flock(fh.fileno(), fcntl.LOCK_UN)

    def _manifest_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "next_sequence": self.next_sequence,
            "records_bytes": self._records_bytes,
            "records_sha256": self._hash.hexdigest(),
            "dead_lines": self._dead_lines,
            "retired": sorted(str(i) for i in self._retired),
        }

    def _write_manifest(self) -> None:
        data = json.dumps(self._manifest_dict(), indent=2, sort_keys=True).encode() + b"\n"
        _atomic_write(self.root / MANIFEST, data)

    def _read_manifest(self) -> dict:
        path = self.root / MANIFEST
        try:
            m = json.loads(path.read_text(encoding="utf-8"))
            if m["format_version"] != FORMAT_VERSION:
                raise CorruptStore(path, f"unsupported format version {m['format_version']}")
            for key in ("next_sequence", "records_bytes", "records_sha256", "retired"):
                m[key]
            return m
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptStore(path, f"unreadable manifest: {exc}") from None

    def _refresh_if_changed(self) -> None:
        if self.root is None or not (self.root / MANIFEST).exists():
            return
        m = self._read_manifest()
        if m != self._manifest_dict():
            log.info("repository changed on disk, reloading")
            self._load()

    def _load(self) -> None:
        m = self._read_manifest()
        path = self.root / RECORDS
        if not path.exists():
            raise CorruptStore(path, "records file missing")
        data = path.read_bytes()
        size = m["records_bytes"]
        if len(data) < size:
            raise CorruptStore(path, f"truncated: {len(data)} bytes, manifest expects {size}")
        if hashlib.sha256(data[:size]).hexdigest() != m["records_sha256"]:
            raise CorruptStore(path, "checksum mismatch with manifest")
        if len(data) > size:
            # an append whose manifest update never landed: not acknowledged, drop it
            log.warning("discarding %d uncommitted trailing bytes in %s", len(data) - size, path)
            data = data[:size]
            with open(path, "r+b") as fh:
                fh.truncate(size)
        try:
            retired = {AssetId.parse(s) for s in m["retired"]}
        except InvalidArgument as exc:
            raise CorruptStore(self.root / MANIFEST, str(exc)) from None
        records: dict[AssetId, AssetRecord] = {}
        dead = 0
        for lineno, raw in enumerate(data.splitlines(), start=1):
            record = self._decode_line(path, lineno, raw)
            if record.id in retired:
                dead += 1
                continue
            if record.id in records:
                raise CorruptStore(path, f"duplicate id {record.id}", lineno)
            records[record.id] = record
        self._records = records
        self._retired = retired
        self.next_sequence = m["next_sequence"]
        self._hash = hashlib.sha256(data)
        self._records_bytes = size
        self._dead_lines = dead
        if records and self.next_sequence <= max(r.id.sequence for r in records.values()):
            raise CorruptStore(self.root / MANIFEST, "next_sequence not above stored sequences")
        self._indexes = self._load_indexes() or build_indexes(self._ordered_records())
        self._snapshot = None

    @staticmethod
    def _decode_line(path: Path, lineno: int, raw: bytes) -> AssetRecord:
        try:
            record = AssetRecord.from_dict(json.loads(raw.decode("utf-8")))
        except (ValueError, InvalidArgument) as exc:
            raise CorruptStore(path, f"bad record: {exc}", lineno) from None
        if record.id is None:
            raise CorruptStore(path, "record without id", lineno)
        return record

    def _ordered_records(self) -> list[AssetRecord]:
        return list(self._records.values())

    def _source_checksum(self) -> str:
        h = hashlib.sha256(self._hash.hexdigest().encode())
        for rid in sorted(str(i) for i in self._retired):
            h.update(rid.encode() + b"\n")
        return h.hexdigest()

    def _persist_indexes(self) -> None:
        d = self.root / INDEX_DIR
        d.mkdir(exist_ok=True)
        payload = self._indexes.to_json()
        for name, part in payload.items():
            _atomic_write(d / f"{name}.json", json.dumps(part, ensure_ascii=False, sort_keys=True).encode())
        meta = {"format_version": FORMAT_VERSION, "source_checksum": self._source_checksum()}
        _atomic_write(d / "meta.json", json.dumps(meta).encode())

    def _load_indexes(self) -> IndexSet | None:
        d = self.root / INDEX_DIR
        try:
            meta = json.loads((d / "meta.json").read_text())
            if meta.get("format_version") != FORMAT_VERSION:
                return None
            if meta.get("source_checksum") != self._source_checksum():
                log.info("index cache stale, rebuilding")
                return None
            parts = {}
            for name in IndexSet.__dataclass_fields__:
                parts[name] = json.loads((d / f"{name}.json").read_text(encoding="utf-8"))
            return IndexSet.from_json(parts)
        except (OSError, ValueError, KeyError, TypeError, InvalidArgument):
            return None


def _as_id(asset_id) -> AssetId:
    if isinstance(asset_id, AssetId):
        return asset_id
    if isinstance(asset_id, str):
        return AssetId.parse(asset_id)
    raise InvalidArgument(f"not an asset id: {asset_id!r}")


# Function-style API.

def open_repository(path, create_if_missing: bool = False, clock=None) -> Repository:
    return Repository.open(path, create_if_missing, clock)


def add_asset(handle: Repository, record: AssetRecord, explicit_id=None) -> AssetId:
    return handle.add(record, explicit_id)


def get_asset(handle: Repository, asset_id) -> AssetRecord:
    return handle.get(asset_id)


def remove_asset(handle: Repository, asset_id) -> AssetRecord:
    return handle.remove(asset_id)


def list_assets(handle: Repository, predicate=None, **filters) -> list[AssetRecord]:
    return handle.list(predicate, **filters)


def rebuild_indexes(handle: Repository) -> dict[str, int]:
    return handle.rebuild_indexes()
