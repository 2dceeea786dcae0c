"""Script-aware text helpers used by the mock embedder, enrichment, and generator.

Python's ``\\w`` treats Bengali vowel signs (Unicode categories Mn/Mc) as
non-word characters, which would split words like "ধানের" into fragments.
Everything here therefore uses a shared word-character definition that
keeps combining marks inside tokens.
"""

from __future__ import annotations

import unicodedata
from functools import lru_cache


@lru_cache(maxsize=4096)
def is_word_char(ch: str) -> bool:
    """True for letters, digits, and combining marks (keeps Bengali matras in-word)."""
    if ch.isalnum():
        return True
    return unicodedata.category(ch).startswith("M")


def tokenize(text: str) -> list[str]:
    """Casefold and split into maximal runs of word characters."""
    tokens: list[str] = []
    current: list[str] = []
    for ch in text.casefold():
        if is_word_char(ch):
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def contains_on_token_boundary(haystack: str, needle: str) -> bool:
    """Casefolded substring search where the match must align with token boundaries.

    Case-insensitive for Latin script; for Bengali, casefolding is the
    identity so matching is exact-codepoint.
    """
    hay = haystack.casefold()
    ned = needle.casefold().strip()
    if not ned:
        return False
    start = 0
    while True:
        pos = hay.find(ned, start)
        if pos < 0:
            return False
        before_ok = pos == 0 or not is_word_char(hay[pos - 1])
        end = pos + len(ned)
        after_ok = end == len(hay) or not is_word_char(hay[end])
        if before_ok and after_ok:
            return True
        start = pos + 1


def split_sentences(text: str) -> list[str]:
    """Split text into sentences on ., !, ? and newlines; keeps terminators.

    Returned sentences are stripped but otherwise verbatim substrings of
    the input, so extractive answers stay checkable against their source.
    """
    sentences: list[str] = []
    buf: list[str] = []
    for ch in text:
        buf.append(ch)
        if ch in ".!?\n":
            sent = "".join(buf).strip()
            if sent:
                sentences.append(sent)
            buf = []
    tail = "".join(buf).strip()
    if tail:
        sentences.append(tail)
    return sentences
