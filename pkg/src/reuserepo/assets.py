"""Asset records, identifiers, the asset-kind vocabulary and classification."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Mapping

from .errors import InvalidArgument, ParseError, SemanticError, ValidationFailed
from .minilang import Program, has_holes, parse
from .minilang.ast import BASE_TYPES
from .text import fold_key


class Prefix(str, Enum):
    TEXT = "Text"
    KEY = "Key"
    EXE = "Exe"
    NON_EXE = "nonExe"
    ID = "Id"
    PAT = "Pat"

    def __str__(self) -> str:
        return self.value


_ID_RE = re.compile(r"^(Text|Key|Exe|nonExe|Id|Pat)_(0|[1-9][0-9]*)$")


@dataclass(frozen=True)
class AssetId:
    prefix: Prefix
    sequence: int

    def __post_init__(self):
        if not isinstance(self.prefix, Prefix):
            try:
                object.__setattr__(self, "prefix", Prefix(self.prefix))
            except ValueError:
                raise InvalidArgument(f"unknown id prefix {self.prefix!r}") from None
        if isinstance(self.sequence, bool) or not isinstance(self.sequence, int):
            raise InvalidArgument(f"sequence must be an integer, got {self.sequence!r}")
        if self.sequence < 0:
            raise InvalidArgument(f"sequence must be non-negative, got {self.sequence}")

    def __str__(self) -> str:
        return f"{self.prefix.value}_{self.sequence}"

    @classmethod
    def parse(cls, text: str) -> "AssetId":
        m = _ID_RE.match(text)
        if not m:
            raise InvalidArgument(f"malformed asset id {text!r}")
        return cls(Prefix(m.group(1)), int(m.group(2)))


def make_asset_id(prefix: Prefix | str, sequence: int) -> AssetId:
    return AssetId(prefix, sequence)


# Asset kinds: three artefact categories, each with its own subkind vocabulary.
INTERMEDIATE = "Intermediate"
IMPLEMENTED = "Implemented"
PROJECT_MGMT_QA = "ProjectMgmtQA"
UNCLASSIFIED = "Unclassified"

KIND_VOCABULARY: dict[str, tuple[str, ...]] = {
    INTERMEDIATE: ("Requirements", "Architectures", "Designs", "Algorithms", "Documentations"),
    IMPLEMENTED: (
        "System", "Frameworks", "Components", "Modules", "Packages",
        "UMLModels", "Interfaces", "Patterns", "Libraries", "TestCases",
    ),
    PROJECT_MGMT_QA: ("ProcessModels", "PlanningModels", "CostModels", "ReviewForms", "AnalysisModels"),
}


@dataclass(frozen=True)
class AssetKind:
    category: str
    subkind: str

    def __str__(self) -> str:
        return f"{self.category}/{self.subkind}"

    @property
    def in_vocabulary(self) -> bool:
        return self.subkind in KIND_VOCABULARY.get(self.category, ())


PATTERN_KIND = AssetKind(IMPLEMENTED, "UMLModels")
PENDING_KIND = AssetKind(UNCLASSIFIED, "pending")


@dataclass(frozen=True)
class SemanticSignature:
    inputs: tuple[str, ...]
    output: str
    pre_terms: frozenset[str] = frozenset()
    post_terms: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "pre_terms", frozenset(t.lower() for t in self.pre_terms))
        object.__setattr__(self, "post_terms", frozenset(t.lower() for t in self.post_terms))

    @property
    def terms(self) -> frozenset[str]:
        return self.pre_terms | self.post_terms

    @property
    def shape_key(self) -> str:
        """Index key: arity and output type."""
        return f"{len(self.inputs)}:{self.output}"

    def __str__(self) -> str:
        return f"{','.join(self.inputs)}->{self.output}"

    @classmethod
    def parse(cls, text: str, pre_terms: Iterable[str] = (), post_terms: Iterable[str] = ()) -> "SemanticSignature":
        """Parse ``"Int,Str->Bool"`` (an empty input list is written ``"->Int"``)."""
        lhs, sep, rhs = text.partition("->")
        if not sep:
            raise InvalidArgument(f"signature {text!r} lacks '->'")
        inputs = tuple(t.strip() for t in lhs.split(",") if t.strip())
        output = rhs.strip()
        for t in inputs + (output,):
            if t not in BASE_TYPES:
                raise InvalidArgument(f"unknown type {t!r} in signature {text!r}")
        return cls(inputs, output, frozenset(pre_terms), frozenset(post_terms))

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "output": self.output,
            "pre_terms": sorted(self.pre_terms),
            "post_terms": sorted(self.post_terms),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SemanticSignature":
        return cls(tuple(d["inputs"]), d["output"], frozenset(d.get("pre_terms", ())),
                   frozenset(d.get("post_terms", ())))


@dataclass(frozen=True)
class AssetRecord:
    name: str
    kind: AssetKind
    id: AssetId | None = None
    language: str | None = None
    label: str | None = None
    keywords: frozenset[str] = frozenset()
    executable_name: str | None = None
    non_executable_name: str | None = None
    identity: str | None = None
    package: str | None = None
    class_name: str | None = None
    pattern_family: str | None = None
    payload: str | None = None
    signature: SemanticSignature | None = None
    created_at: int | None = None
    # fields found in records.jsonl that this version does not know; kept on rewrite
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.keywords, frozenset):
            object.__setattr__(self, "keywords", frozenset(self.keywords))

    @cached_property
    def program(self) -> Program | None:
        if self.payload is None:
            return None
        try:
            return parse(self.payload)
        except (ParseError, SemanticError):
            return None

    @property
    def is_executable(self) -> bool:
        return self.program is not None and not has_holes(self.program)

    @property
    def is_pattern(self) -> bool:
        return self.program is not None and has_holes(self.program)

    @property
    def is_specification(self) -> bool:
        return self.payload is None and (self.signature is not None or bool(self.non_executable_name))

    @property
    def has_structure(self) -> bool:
        return self.is_pattern or any((self.package, self.class_name, self.pattern_family))

    @property
    def prefix(self) -> Prefix:
        return self.id.prefix if self.id is not None else dominant_prefix(self)

    def with_id(self, asset_id: AssetId) -> "AssetRecord":
        return replace(self, id=asset_id)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {}
        for name in RECORD_FIELDS:
            value = getattr(self, name)
            if name == "id":
                value = None if value is None else str(value)
            elif name == "kind":
                value = {"category": value.category, "subkind": value.subkind}
            elif name == "keywords":
                value = sorted(value)
            elif name == "signature" and value is not None:
                value = value.to_dict()
            d[name] = value
        for k, v in self.extra.items():
            d.setdefault(k, v)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AssetRecord":
        if not isinstance(d, Mapping):
            raise InvalidArgument("record must be an object")
        try:
            kw: dict[str, Any] = {}
            for name in RECORD_FIELDS:
                if name not in d or d[name] is None:
                    continue
                value = d[name]
                if name == "id":
                    value = AssetId.parse(value)
                elif name == "kind":
                    value = AssetKind(value["category"], value["subkind"])
                elif name == "keywords":
                    value = frozenset(value)
                elif name == "signature":
                    value = SemanticSignature.from_dict(value)
                kw[name] = value
            kw["extra"] = {k: v for k, v in d.items() if k not in RECORD_FIELDS}
            if "name" not in kw or "kind" not in kw:
                raise InvalidArgument("record requires 'name' and 'kind'")
            return cls(**kw)
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidArgument(f"malformed record: {exc}") from None


RECORD_FIELDS = (
    "id", "name", "kind", "language", "label", "keywords", "executable_name",
    "non_executable_name", "identity", "package", "class_name", "pattern_family",
    "payload", "signature", "created_at",
)
assert set(RECORD_FIELDS) == {f.name for f in fields(AssetRecord)} - {"extra"}


def dominant_prefix(record: AssetRecord) -> Prefix:
    """Prefix for a record ingested without an explicit id.

    Executable payload wins, then specification, then pattern; otherwise the
    first populated of label, keywords, identity.
    """
    if record.is_executable:
        return Prefix.EXE
    if record.is_specification:
        return Prefix.NON_EXE
    if record.is_pattern:
        return Prefix.PAT
    if record.label:
        return Prefix.TEXT
    if record.keywords:
        return Prefix.KEY
    if record.identity:
        return Prefix.ID
    return Prefix.TEXT


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str
    message: str = ""

    def __str__(self) -> str:
        return f"{self.rule}({self.field})" + (f": {self.message}" if self.message else "")


def _payload_violations(record: AssetRecord, want_holes: bool) -> list[Violation]:
    if record.payload is None:
        return [Violation("payload", "missing-payload")]
    try:
        program = parse(record.payload)
    except (ParseError, SemanticError) as exc:
        return [Violation("payload", "payload-parse-error", str(exc))]
    if want_holes and not has_holes(program):
        return [Violation("payload", "missing-holes", "pattern payload has no ?holes")]
    if not want_holes and has_holes(program):
        return [Violation("payload", "unexpected-holes", "executable payload contains ?holes")]
    return []


def validate_record(record: AssetRecord) -> list[Violation]:
    out: list[Violation] = []
    if not isinstance(record.name, str) or not record.name.strip():
        out.append(Violation("name", "empty-name"))
    kind = record.kind
    if kind.category not in KIND_VOCABULARY:
        out.append(Violation("kind", "unknown-category", f"{kind.category!r}"))
    elif not kind.in_vocabulary:
        out.append(Violation("kind", "kind-vocabulary-mismatch",
                             f"{kind.subkind!r} is not a {kind.category} subkind"))
    if any(not k.strip() for k in record.keywords):
        out.append(Violation("keywords", "empty-keyword"))

    prefix = record.prefix
    if prefix is Prefix.EXE:
        out += _payload_violations(record, want_holes=False)
    elif prefix is Prefix.PAT:
        out += _payload_violations(record, want_holes=True)
    elif prefix is Prefix.NON_EXE:
        if record.payload is not None:
            out.append(Violation("payload", "unexpected-payload", "non-executable assets carry no payload"))
        if record.signature is None and not record.non_executable_name:
            out.append(Violation("signature", "missing-specification",
                                 "needs a signature or non_executable_name"))

    sig = record.signature
    if sig is not None:
        if len(sig.inputs) > 8:
            out.append(Violation("signature", "signature-arity", f"{len(sig.inputs)} inputs > 8"))
        if any(t not in BASE_TYPES for t in sig.inputs + (sig.output,)):
            out.append(Violation("signature", "signature-type"))
        if any(not t for t in sig.terms):
            out.append(Violation("signature", "empty-term"))
    if record.created_at is not None and record.created_at < 0:
        out.append(Violation("created_at", "negative-timestamp"))
    return out


@dataclass(frozen=True)
class Classification:
    kind: AssetKind
    facets: frozenset[str]


def classify_asset(record: AssetRecord) -> Classification:
    """Resolve the asset's kind and derive its facet set.

    Pattern assets always classify as Implemented/UMLModels. Language and
    pattern family facets are folded; category and subkind are kept verbatim.
    """
    violations = validate_record(record)
    if violations:
        raise ValidationFailed(violations)
    kind = PATTERN_KIND if record.prefix is Prefix.PAT else record.kind
    facets = {kind.category, kind.subkind}
    if record.language:
        facets.add(fold_key(record.language))
    if record.pattern_family:
        facets.add(fold_key(record.pattern_family))
    return Classification(kind, frozenset(facets))
