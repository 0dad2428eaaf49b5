"""Assignment of extracted candidates to unfilled slots.

First fit wins: slots are visited in group order and each takes the
single type-matching candidate if there is exactly one. Two or more
matches for one slot is an ambiguity the dialogue must settle with the
user before anything else is assigned, so resolution stops there.
"""

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from taskbot.entities.extract import EntityCandidate
from taskbot.nlu.tokenize import STOPWORDS, tokenize

ASSIGNED = "assigned"
AMBIGUOUS = "ambiguous"
NO_MATCH = "no_match"

_ORDINALS = {"first": 0, "second": 1, "third": 2, "fourth": 3, "fifth": 4, "last": -1}


@dataclass(frozen=True)
class SlotResolution:
    status: str
    entity_name: str
    value: object = None
    raw_text: str = ""
    options: Tuple[object, ...] = ()


@dataclass(frozen=True)
class SlotRequest:
    """One unfilled slot: its entity name and acceptable semantic type."""

    entity_name: str
    semantic_type: Optional[str]


def _matches(candidate: EntityCandidate, request: SlotRequest) -> bool:
    if candidate.source_entity is not None:
        return candidate.source_entity == request.entity_name
    return request.semantic_type is not None and candidate.semantic_type == request.semantic_type


def resolve_slots(
    slots: Sequence[SlotRequest], candidates: Sequence[EntityCandidate]
) -> List[SlotResolution]:
    """Resolve candidates onto slots in order, consuming on assignment.

    Returns one resolution per slot up to and including the first
    ambiguity; slots after an ambiguity are not visited at all.
    """
    remaining = list(candidates)
    resolutions: List[SlotResolution] = []
    for slot in slots:
        matching = [c for c in remaining if _matches(c, slot)]
        if len(matching) == 1:
            chosen = matching[0]
            remaining.remove(chosen)
            resolutions.append(
                SlotResolution(ASSIGNED, slot.entity_name, chosen.normalized_value, chosen.raw_text)
            )
        elif len(matching) >= 2:
            resolutions.append(
                SlotResolution(
                    AMBIGUOUS,
                    slot.entity_name,
                    options=tuple(c.normalized_value for c in matching),
                )
            )
            break
        else:
            resolutions.append(SlotResolution(NO_MATCH, slot.entity_name))
    return resolutions


def resolve_choice(utterance: str, options: Sequence[object]) -> Optional[object]:
    """Pick one previously offered option out of a follow-up utterance.

    Tried in order: an option mentioned verbatim (earliest mention wins),
    an option owning a token nothing else has, an ordinal ("the second
    one", "last"), then "the <text> one" where <text> is inside exactly
    one option. None when nothing singles an option out.
    """
    low = utterance.lower()
    texts = [str(o).lower() for o in options]

    mentioned = [(low.find(t), i) for i, t in enumerate(texts) if t and t in low]
    if mentioned:
        mentioned.sort()
        if len(mentioned) == 1 or mentioned[0][0] != mentioned[1][0]:
            return options[mentioned[0][1]]
        return None

    utt_tokens = set(tokenize(utterance)) - STOPWORDS
    owners: Dict[str, List[int]] = {}
    for i, t in enumerate(texts):
        for token in set(tokenize(t)):
            owners.setdefault(token, []).append(i)
    hits = {owners[tok][0] for tok in utt_tokens if tok in owners and len(owners[tok]) == 1}
    if len(hits) == 1:
        return options[hits.pop()]

    for token in tokenize(utterance):
        if token in _ORDINALS:
            index = _ORDINALS[token]
            if -len(options) <= index < len(options):
                return options[index]

    phrase = re.search(r"\bthe\s+(.+?)\s+one\b", low)
    if phrase:
        inner = phrase.group(1).strip()
        containing = [i for i, t in enumerate(texts) if inner in t]
        if len(containing) == 1:
            return options[containing[0]]
    return None
