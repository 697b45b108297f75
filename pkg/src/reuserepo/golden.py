"""The six example components and the criteria ratings used as fixtures.

Each record is paired in ``GOLDEN_QUERIES`` with the query that must
retrieve it as the unique top hit.
"""

from __future__ import annotations

from .assets import (
    IMPLEMENTED,
    INTERMEDIATE,
    AssetId,
    AssetKind,
    AssetRecord,
    PATTERN_KIND,
    Prefix,
)

UPDATE_PAYLOAD = """\
# apply an increment to a stored counter
fn(count: Int, step: Int) -> Int { count + step }
"""

CITY_PAYLOAD = """\
# city entity: combine two fields into one display value
fn(head: Str, tail: Str) -> Str { concat(?first, ?second) }
"""


def golden_records() -> list[AssetRecord]:
    """Fresh copies of the six example records, with their fixed ids."""
    return [
        AssetRecord(
            id=AssetId(Prefix.TEXT, 6562),
            name="registration",
            kind=AssetKind(IMPLEMENTED, "Components"),
            label="software reuse",
            language="C++",
        ),
        AssetRecord(
            id=AssetId(Prefix.KEY, 6522),
            name="feedback",
            kind=AssetKind(IMPLEMENTED, "Components"),
            keywords=frozenset({"Agility"}),
            language="Java",
        ),
        AssetRecord(
            id=AssetId(Prefix.EXE, 4329),
            name="update.exe",
            kind=AssetKind(IMPLEMENTED, "System"),
            executable_name="update",
            payload=UPDATE_PAYLOAD,
        ),
        AssetRecord(
            id=AssetId(Prefix.NON_EXE, 7215),
            name="Initial requirements",
            kind=AssetKind(INTERMEDIATE, "Requirements"),
            non_executable_name="requirements",
        ),
        AssetRecord(
            id=AssetId(Prefix.ID, 1213),
            name="Support",
            kind=AssetKind(IMPLEMENTED, "Components"),
            identity="port",
        ),
        AssetRecord(
            id=AssetId(Prefix.PAT, 1001),
            name="City",
            kind=PATTERN_KIND,
            package="State",
            class_name="City",
            pattern_family="Object oriented",
            language="Java",
            payload=CITY_PAYLOAD,
        ),
    ]


# (method, query fields, expected id) for each example record
GOLDEN_QUERIES = [
    ("informational", {"text": "software reuse"}, "Text_6562"),
    ("descriptive", {"keywords": ["Agility"]}, "Key_6522"),
    ("operational", {"name_hint": "update"}, "Exe_4329"),
    ("denotational", {"name_hint": "requirements"}, "nonExe_7215"),
    ("topological", {"text": "port"}, "Id_1213"),
    ("structural", {"package": "state"}, "Pat_1001"),
]

METHODS = ("informational", "descriptive", "operational", "denotational", "topological", "structural")

TECHNICAL_CRITERIA = (
    "precision", "recall", "coverage_ratio", "time_complexity", "logical_complexity", "automation",
)
MANAGERIAL_CRITERIA = (
    "investment_cost", "operational_cost", "pervasiveness", "state_of_development",
    "difficulty_of_use", "transparency",
)

# rows follow METHODS; columns follow TECHNICAL_CRITERIA / MANAGERIAL_CRITERIA
TECHNICAL_RATINGS = {
    "informational": ("M", "H", "L", "L", "M", "H"),
    "descriptive": ("H", "H", "VH", "VL", "L", "VH"),
    "operational": ("VH", "H", "H", "M", "M", "VH"),
    "denotational": ("VH", "H", "H", "VH", "VH", "M"),
    "topological": ("U", "U", "VH", "H", "M", "H"),
    "structural": ("VH", "VH", "VH", "VL", "L", "VH"),
}
MANAGERIAL_RATINGS = {
    "informational": ("VL", "L", "H", "H", "M", "H"),
    "descriptive": ("H", "H", "H", "H", "VL", "VH"),
    "operational": ("L", "M", "M", "M", "L", "VH"),
    "denotational": ("H", "H", "L", "L", "M", "M"),
    "topological": ("VH", "VH", "L", "L", "VH", "VH"),
    "structural": ("M", "L", "L", "L", "VL", "VL"),
}
