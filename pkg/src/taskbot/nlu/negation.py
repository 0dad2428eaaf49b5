"""Negation cue detection with clause-bounded scopes.

A cue opens a scope that runs to the next clause boundary (punctuation or a
coordinating conjunction) or the end of the utterance. Scopes are reported
as token index ranges over the full token sequence, so intent resolution
can check whether its evidence tokens sit inside one.
"""

from dataclasses import dataclass
from typing import List, Tuple

from taskbot.nlu.tokenize import TokenSpan, clause_boundaries

#: plain-token cues; "n't" contractions are detected from the raw token
NEGATION_CUES = frozenset({"no", "not", "never", "cannot", "forgot"})


@dataclass(frozen=True)
class NegationSpan:
    cue: str
    start: int  # token index of the cue
    end: int  # exclusive token index where the scope stops


def _is_cue(span: TokenSpan) -> bool:
    if span.text in NEGATION_CUES:
        return True
    return span.raw.endswith("n't")  # don't, won't, can't, shouldn't, ...


def detect_negation(utterance: str, spans: List[TokenSpan]) -> List[NegationSpan]:
    breaks = clause_boundaries(utterance, spans)
    found: List[NegationSpan] = []
    for i, span in enumerate(spans):
        if not _is_cue(span):
            continue
        end = len(spans)
        for j in range(i + 1, len(spans)):
            if breaks[j]:
                end = j
                break
        found.append(NegationSpan(cue=span.text, start=i, end=end))
    return found


def indices_in_scope(index: int, negations: List[NegationSpan]) -> bool:
    return any(neg.start <= index < neg.end for neg in negations)


def all_instances_negated(token: str, tokens: List[str], negations: List[NegationSpan]) -> bool:
    """True when every occurrence of ``token`` falls inside some scope.
    A token with no occurrences counts as not negated."""
    positions = [i for i, t in enumerate(tokens) if t == token]
    if not positions:
        return False
    return all(indices_in_scope(i, negations) for i in positions)
