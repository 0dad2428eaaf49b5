"""Deterministic tokenization shared by intent scoring and negation.

Rules are frozen for reproducibility: lowercase, split on anything that is
not a letter, digit, or apostrophe, then drop apostrophes inside tokens
("don't" -> "dont", "I'd" -> "id"). Hyphens split ("round-trip" -> round,
trip). The stopword filter applies only where callers ask for it; negation
cues (no, not, never, n't forms) are deliberately absent from the list.
"""

import re
from dataclasses import dataclass
from typing import List, Tuple

_WORD_RE = re.compile(r"[A-Za-z0-9']+")

# Fixed 50-word list. Function words only: negation words, yes/no, and
# content verbs stay out so polarity samples and negation cues survive.
STOPWORDS = frozenset(
    """
    a an the i me my mine you your yours he him his she her it its
    we us our they them their to of in on at for from by with about
    as is am are was were be been being do does did have has had
    will would
    """.split()
)

#: tokens that flag a greeting / goodbye utterance
GREETING_WORDS = frozenset({"hello", "hi", "hey", "greetings", "howdy"})
GOODBYE_WORDS = frozenset({"bye", "goodbye", "farewell"})

#: separators that end a negation clause
CLAUSE_PUNCT = ",.;:!?"
COORDINATING = frozenset({"but", "and", "or", "nor", "yet", "so"})


@dataclass(frozen=True)
class TokenSpan:
    """One token plus its character span in the original utterance."""

    text: str  # normalized: lowercase, apostrophes removed
    raw: str  # lowercase, apostrophes kept ("don't")
    start: int
    end: int


def tokenize_spans(utterance: str) -> List[TokenSpan]:
    spans = []
    for match in _WORD_RE.finditer(utterance):
        raw = match.group().lower()
        text = raw.replace("'", "")
        if not text:
            continue
        spans.append(TokenSpan(text=text, raw=raw, start=match.start(), end=match.end()))
    return spans


def tokenize(utterance: str) -> List[str]:
    """Just the normalized token texts."""
    return [span.text for span in tokenize_spans(utterance)]


def content_tokens(tokens) -> List[str]:
    """Stopword-filtered view, preserving order and duplicates."""
    return [t for t in tokens if t not in STOPWORDS]


def dice_score(utterance_tokens: List[str], sample_tokens: List[str]) -> float:
    """Multiset Dice coefficient: 2 * |shared| / (|u| + |s|).

    Both inputs are stopword-filtered token lists; duplicates count as many
    times as they appear on both sides.
    """
    if not utterance_tokens or not sample_tokens:
        return 0.0
    remaining: dict = {}
    for token in sample_tokens:
        remaining[token] = remaining.get(token, 0) + 1
    shared = 0
    for token in utterance_tokens:
        if remaining.get(token, 0) > 0:
            remaining[token] -= 1
            shared += 1
    return 2.0 * shared / (len(utterance_tokens) + len(sample_tokens))


def clause_boundaries(utterance: str, spans: List[TokenSpan]) -> List[bool]:
    """For each token index i > 0, whether a clause break sits before it:
    punctuation between tokens i-1 and i, or token i is a coordinating
    conjunction. Index 0 is never a boundary."""
    breaks = [False] * len(spans)
    for i in range(1, len(spans)):
        gap = utterance[spans[i - 1].end : spans[i].start]
        if any(ch in CLAUSE_PUNCT for ch in gap) or spans[i].text in COORDINATING:
            breaks[i] = True
    return breaks
