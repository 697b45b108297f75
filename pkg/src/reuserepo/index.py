"""Per-method secondary indexes over live records.

Indexes are caches: everything here can be rebuilt by replaying the records.
"""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass, field

from .assets import AssetId, AssetRecord, classify_asset
from .minilang import comments
from .text import fold, fold_key, terms

INDEX_NAMES = ("text", "keyword", "facet", "name", "signature", "structure")
STRUCTURE_FIELDS = (("package", "package"), ("class", "class_name"), ("pattern", "pattern_family"))


def text_terms(record: AssetRecord) -> Counter:
    """Term bag for full-text search: name, label and payload comments."""
    bag = Counter(terms(record.name))
    bag.update(terms(record.label))
    if record.payload:
        for c in comments(record.payload):
            bag.update(terms(c))
    return bag


def structure_keys(record: AssetRecord) -> set[tuple[str, str]]:
    keys = set()
    for tag, attr in STRUCTURE_FIELDS:
        value = getattr(record, attr)
        if value:
            keys.add((tag, fold_key(value)))
    return keys


@dataclass
class IndexSet:
    text: dict[str, dict[AssetId, int]] = field(default_factory=dict)
    keyword: dict[str, set[AssetId]] = field(default_factory=dict)
    facet: dict[str, set[AssetId]] = field(default_factory=dict)
    name: list[tuple[str, str, AssetId]] = field(default_factory=list)
    signature: dict[str, set[AssetId]] = field(default_factory=dict)
    structure: dict[tuple[str, str], set[AssetId]] = field(default_factory=dict)

    def add(self, record: AssetRecord) -> None:
        rid = record.id
        for term, tf in text_terms(record).items():
            self.text.setdefault(term, {})[rid] = tf
        for k in record.keywords:
            self.keyword.setdefault(fold_key(k), set()).add(rid)
        for f in classify_asset(record).facets:
            self.facet.setdefault(fold_key(f), set()).add(rid)
        bisect.insort(self.name, (fold(record.name), str(rid), rid))
        if record.signature is not None:
            self.signature.setdefault(record.signature.shape_key, set()).add(rid)
        for key in structure_keys(record):
            self.structure.setdefault(key, set()).add(rid)

    def remove(self, record: AssetRecord) -> None:
        rid = record.id
        for term in text_terms(record):
            _discard(self.text, term, rid)
        for k in record.keywords:
            _discard(self.keyword, fold_key(k), rid)
        for f in classify_asset(record).facets:
            _discard(self.facet, fold_key(f), rid)
        entry = (fold(record.name), str(rid), rid)
        i = bisect.bisect_left(self.name, entry)
        if i < len(self.name) and self.name[i] == entry:
            del self.name[i]
        if record.signature is not None:
            _discard(self.signature, record.signature.shape_key, rid)
        for key in structure_keys(record):
            _discard(self.structure, key, rid)

    def copy(self) -> "IndexSet":
        return IndexSet(
            text={t: dict(p) for t, p in self.text.items()},
            keyword={k: set(v) for k, v in self.keyword.items()},
            facet={k: set(v) for k, v in self.facet.items()},
            name=list(self.name),
            signature={k: set(v) for k, v in self.signature.items()},
            structure={k: set(v) for k, v in self.structure.items()},
        )

    def stats(self) -> dict[str, int]:
        return {n: len(getattr(self, n)) for n in INDEX_NAMES}

    def name_prefix(self, prefix: str) -> list[AssetId]:
        """Ids whose folded name starts with ``prefix``."""
        prefix = fold(prefix)
        i = bisect.bisect_left(self.name, (prefix,))
        out = []
        while i < len(self.name) and self.name[i][0].startswith(prefix):
            out.append(self.name[i][2])
            i += 1
        return out

    # persistence
    def to_json(self) -> dict:
        return {
            "text": {t: {str(i): tf for i, tf in sorted(p.items(), key=lambda x: str(x[0]))}
                     for t, p in sorted(self.text.items())},
            "keyword": {k: sorted(map(str, v)) for k, v in sorted(self.keyword.items())},
            "facet": {k: sorted(map(str, v)) for k, v in sorted(self.facet.items())},
            "name": [[n, s] for n, s, _ in self.name],
            "signature": {k: sorted(map(str, v)) for k, v in sorted(self.signature.items())},
            "structure": [[tag, value, sorted(map(str, v))] for (tag, value), v in sorted(self.structure.items())],
        }

    @classmethod
    def from_json(cls, d: dict) -> "IndexSet":
        ids: dict[str, AssetId] = {}

        def aid(s: str) -> AssetId:
            if s not in ids:
                ids[s] = AssetId.parse(s)
            return ids[s]

        return cls(
            text={t: {aid(i): tf for i, tf in p.items()} for t, p in d["text"].items()},
            keyword={k: {aid(i) for i in v} for k, v in d["keyword"].items()},
            facet={k: {aid(i) for i in v} for k, v in d["facet"].items()},
            name=[(n, s, aid(s)) for n, s in d["name"]],
            signature={k: {aid(i) for i in v} for k, v in d["signature"].items()},
            structure={(tag, value): {aid(i) for i in v} for tag, value, v in d["structure"]},
        )

    def canonical(self) -> dict:
        """Order-independent view, for comparing two index sets."""
        return self.to_json()


def _discard(mapping: dict, key, rid: AssetId) -> None:
    bucket = mapping.get(key)
    if bucket is None:
        return
    if isinstance(bucket, dict):
        bucket.pop(rid, None)
    else:
        bucket.discard(rid)
    if not bucket:
        del mapping[key]


def build_indexes(records) -> IndexSet:
    idx = IndexSet()
    for r in records:
        idx.add(r)
    return idx
