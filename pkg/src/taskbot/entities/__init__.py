from taskbot.entities.extract import EntityCandidate, extract_candidates, gazetteer
from taskbot.entities.fuzzy import fuzzy_match_picklist, levenshtein, similarity
from taskbot.entities.history import EntityHistory, EntityRecord
from taskbot.entities.resolve import (
    AMBIGUOUS,
    ASSIGNED,
    NO_MATCH,
    SlotRequest,
    SlotResolution,
    resolve_choice,
    resolve_slots,
)

__all__ = [
    "EntityCandidate",
    "extract_candidates",
    "gazetteer",
    "fuzzy_match_picklist",
    "levenshtein",
    "similarity",
    "EntityHistory",
    "EntityRecord",
    "ASSIGNED",
    "AMBIGUOUS",
    "NO_MATCH",
    "SlotRequest",
    "SlotResolution",
    "resolve_choice",
    "resolve_slots",
]
