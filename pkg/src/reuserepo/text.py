"""Term folding shared by indexes and query-side comparison."""

from __future__ import annotations

import re
from collections import Counter

_TERM_RE = re.compile(r"[^\W_]+")


def terms(text: str | None) -> list[str]:
    """Unicode-aware casefold, split on non-alphanumerics. No stemming."""
    if not text:
        return []
    return _TERM_RE.findall(text.casefold())


def term_counts(text: str | None) -> Counter:
    return Counter(terms(text))


def fold_key(text: str | None) -> str:
    """Exact-match key for keywords and facets: casefolded, inner whitespace as hyphens.

    Punctuation is kept so that "C++" and "C#" stay distinct.
    """
    if not text:
        return ""
    return "-".join(text.casefold().split())


def fold(text: str | None) -> str:
    """Casefolded string with whitespace normalised; used for substring and edit-distance work."""
    if not text:
        return ""
    return " ".join(text.casefold().split())
