"""Token counting used for chunk packing and context budgets.

The engine stays model-agnostic, so token counts are approximated from
whitespace-delimited words scaled by 4/3 (rounded up). Word counts are
additive across concatenation, which keeps chunk packing arithmetic simple.
"""

from __future__ import annotations

import math

# Minimal English stopword list for the keyword-extraction fallback path.
STOPWORDS = frozenset(
    """a an and are as at be by for from has have how in is it its of on or
    that the these this those to was were what when where which who why will
    with do does did your you we our they their i me my""".split()
)


def count_tokens(text: str) -> int:
    """Approximate token count of ``text``: ceil(word_count * 4 / 3)."""
    words = len(text.split())
    return math.ceil(words * 4 / 3)


def significant_words(text: str) -> list[str]:
    """Lowercased non-stopword words of ``text``, deduplicated in order."""
    seen: set[str] = set()
    out: list[str] = []
    for raw in text.split():
        word = raw.strip(".,;:!?\"'()[]{}").lower()
        if not word or word in STOPWORDS or word in seen:
            continue
        seen.add(word)
        out.append(word)
    return out
