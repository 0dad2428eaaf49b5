"""Typed entity extraction from user utterances.

Extractors are pure pattern matchers keyed by semantic type; which ones run
is decided by the caller through ``expected_types`` (the current leaf's
types mid-task, every configured type when idle). Candidates carry exact
character spans into the original utterance and a normalized value:

    DATE     -> ISO yyyy-mm-dd (relative words resolved against a clock)
    TIME     -> 24h hh:mm
    CARDINAL -> int
    EMAIL    -> lowercased address
    ZIPCODE  -> 5-digit string
    PERSON   -> capitalized name run as written
    LOCATION -> canonical gazetteer spelling
    PICKLIST -> the configured option (fuzzy match, slot-specific)
    USER_UTT -> the whole utterance (slot-specific)
"""

import calendar
import datetime
import re
from dataclasses import dataclass
from importlib import resources
from typing import Dict, List, Mapping, Optional, Set, Tuple

from taskbot.config.model import EntityDef
from taskbot.entities.fuzzy import fuzzy_match_picklist
from taskbot.nlu.tokenize import GREETING_WORDS, STOPWORDS


@dataclass(frozen=True)
class EntityCandidate:
    semantic_type: str
    start: int
    end: int
    raw_text: str
    normalized_value: object
    method: str
    confidence: float = 1.0
    source_entity: Optional[str] = None  # set for PICKLIST / USER_UTT only


_EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")
_ZIP_RE = re.compile(r"(?<!\d)\d{5}(?!\d)")
_CARDINAL_RE = re.compile(r"(?<!\d)\d+(?!\d)")
_TIME_RE = re.compile(r"\b(\d{1,2}):(\d{2})\s*(am|pm)?\b|\b(\d{1,2})\s*(am|pm)\b", re.IGNORECASE)
_ISO_DATE_RE = re.compile(r"\b(\d{4})-(\d{2})-(\d{2})\b")
_SLASH_DATE_RE = re.compile(r"\b(\d{1,2})/(\d{1,2})/(\d{2,4})\b")
_RELATIVE_RE = re.compile(r"\b(today|tomorrow|yesterday)\b", re.IGNORECASE)
_MONTHS = {name.lower(): i for i, name in enumerate(calendar.month_name) if name}
_MONTHS.update({name.lower(): i for i, name in enumerate(calendar.month_abbr) if name})
_MONTH_DATE_RE = re.compile(
    r"\b(%s)\.?\s+(\d{1,2})(?:st|nd|rd|th)?(?:,?\s+(\d{4}))?\b" % "|".join(_MONTHS),
    re.IGNORECASE,
)
_PERSON_RE = re.compile(r"\b[A-Z][a-z]+(?:\s+[A-Z][a-z]+){0,2}\b")

_PERSON_SKIP = STOPWORDS | GREETING_WORDS | {
    "what", "which", "where", "when", "who", "how", "why",
    "please", "ok", "okay", "thanks", "thank", "yes", "no", "not",
    "sorry", "sure", "and", "but", "or", "can", "could", "may",
}


def _load_gazetteer() -> List[str]:
    text = resources.files("taskbot").joinpath("data/gazetteer.txt").read_text(encoding="utf-8")
    places = [line.strip() for line in text.splitlines() if line.strip()]
    # longest first so "North Las Vegas" wins over "Las Vegas"
    places.sort(key=lambda p: (-len(p), p))
    return places


_GAZETTEER: Optional[List[str]] = None


def gazetteer() -> List[str]:
    global _GAZETTEER
    if _GAZETTEER is None:
        _GAZETTEER = _load_gazetteer()
    return _GAZETTEER


def _extract_dates(utterance: str, today: datetime.date) -> List[EntityCandidate]:
    found = []
    for match in _ISO_DATE_RE.finditer(utterance):
        year, month, day = (int(g) for g in match.groups())
        value = _safe_date(year, month, day)
        if value:
            found.append(_cand("DATE", match, value.isoformat(), "pattern"))
    for match in _SLASH_DATE_RE.finditer(utterance):
        month, day, year = (int(g) for g in match.groups())
        if year < 100:
            year += 2000
        value = _safe_date(year, month, day)
        if value:
            found.append(_cand("DATE", match, value.isoformat(), "pattern"))
    for match in _MONTH_DATE_RE.finditer(utterance):
        month = _MONTHS[match.group(1).lower()]
        day = int(match.group(2))
        year = int(match.group(3)) if match.group(3) else today.year
        value = _safe_date(year, month, day)
        if value:
            found.append(_cand("DATE", match, value.isoformat(), "pattern"))
    for match in _RELATIVE_RE.finditer(utterance):
        word = match.group(1).lower()
        offset = {"today": 0, "tomorrow": 1, "yesterday": -1}[word]
        value = today + datetime.timedelta(days=offset)
        found.append(_cand("DATE", match, value.isoformat(), "pattern"))
    return found


def _safe_date(year: int, month: int, day: int) -> Optional[datetime.date]:
    try:
        return datetime.date(year, month, day)
    except ValueError:
        return None


def _extract_times(utterance: str) -> List[EntityCandidate]:
    found = []
    for match in _TIME_RE.finditer(utterance):
        if match.group(1) is not None:
            hour, minute = int(match.group(1)), int(match.group(2))
            meridiem = (match.group(3) or "").lower()
        else:
            hour, minute = int(match.group(4)), 0
            meridiem = match.group(5).lower()
        if meridiem == "am" and hour == 12:
            hour = 0
        elif meridiem == "pm" and hour < 12:
            hour += 12  # "23:08pm" style stays 23:08
        if hour > 23 or minute > 59:
            continue
        found.append(_cand("TIME", match, "%02d:%02d" % (hour, minute), "pattern"))
    return found


def _extract_persons(utterance: str, vocabulary: Set[str]) -> List[EntityCandidate]:
    found = []
    for match in _PERSON_RE.finditer(utterance):
        words = match.group().split()
        if len(words) == 1 and words[0].lower() in _PERSON_SKIP:
            continue
        if all(word.lower() in vocabulary for word in words):
            continue  # picklist vocabulary, not a name
        if any(match.group().lower() == place.lower() for place in gazetteer()):
            continue  # city names are capitalized runs too
        found.append(_cand("PERSON", match, match.group(), "pattern"))
    return found


def _extract_locations(utterance: str) -> List[EntityCandidate]:
    low = utterance.lower()
    taken = [False] * len(utterance)
    found = []
    for place in gazetteer():
        needle = place.lower()
        index = 0
        while True:
            hit = low.find(needle, index)
            if hit < 0:
                break
            end = hit + len(needle)
            boundary_ok = (hit == 0 or not low[hit - 1].isalnum()) and (end == len(low) or not low[end].isalnum())
            if boundary_ok and not any(taken[hit:end]):
                for i in range(hit, end):
                    taken[i] = True
                found.append(
                    EntityCandidate("LOCATION", hit, end, utterance[hit:end], place, "gazetteer")
                )
            index = end
    return found


def _cand(semantic_type: str, match: "re.Match", value, method: str) -> EntityCandidate:
    return EntityCandidate(
        semantic_type=semantic_type,
        start=match.start(),
        end=match.end(),
        raw_text=match.group(),
        normalized_value=value,
        method=method,
    )


def extract_candidates(
    utterance: str,
    expected_types: Set[str],
    entity_defs: Mapping[str, EntityDef],
    today: datetime.date,
) -> List[EntityCandidate]:
    """Union of extractor outputs for the expected types, sorted by span.

    PICKLIST and USER_UTT extraction is per entity definition and tags the
    candidate with its source entity; those candidates only ever resolve
    onto the slot they were extracted for.
    """
    found: List[EntityCandidate] = []
    if "DATE" in expected_types:
        found.extend(_extract_dates(utterance, today))
    if "TIME" in expected_types:
        found.extend(_extract_times(utterance))
    if "EMAIL" in expected_types:
        for match in _EMAIL_RE.finditer(utterance):
            found.append(_cand("EMAIL", match, match.group().lower(), "pattern"))
    if "ZIPCODE" in expected_types:
        for match in _ZIP_RE.finditer(utterance):
            found.append(_cand("ZIPCODE", match, match.group(), "pattern"))
    if "CARDINAL" in expected_types:
        for match in _CARDINAL_RE.finditer(utterance):
            found.append(_cand("CARDINAL", match, int(match.group()), "pattern"))
    if "PERSON" in expected_types:
        vocabulary: Set[str] = set()
        for definition in entity_defs.values():
            for option in definition.picklist:
                lowered = option.lower()
                vocabulary.add(lowered)
                vocabulary.update(lowered.split())
        found.extend(_extract_persons(utterance, vocabulary))
    if "LOCATION" in expected_types:
        found.extend(_extract_locations(utterance))

    # numbers inside a time, date, or zip are not standalone cardinals,
    # and email local parts are not names
    claimed = [(c.start, c.end) for c in found if c.semantic_type in ("DATE", "TIME", "ZIPCODE", "EMAIL")]

    def _overlaps(c: EntityCandidate) -> bool:
        return any(c.start < end and start < c.end for start, end in claimed)

    found = [c for c in found if c.semantic_type not in ("CARDINAL", "PERSON") or not _overlaps(c)]

    for name, definition in entity_defs.items():
        if definition.semantic_type == "PICKLIST" and "PICKLIST" in expected_types and definition.picklist:
            hit = fuzzy_match_picklist(utterance, list(definition.picklist))
            if hit is not None:
                value, score = hit
                found.append(
                    EntityCandidate(
                        "PICKLIST", 0, len(utterance), utterance, value, "fuzzy", confidence=score, source_entity=name
                    )
                )
        elif definition.semantic_type == "USER_UTT" and "USER_UTT" in expected_types:
            found.append(
                EntityCandidate(
                    "USER_UTT", 0, len(utterance), utterance, utterance, "user_utterance", source_entity=name
                )
            )

    found.sort(key=lambda c: (c.start, c.end))
    return found
