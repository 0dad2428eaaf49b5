"""Intent, polarity, and FAQ matching over configured samples.

The built-in matcher is a nearest-neighbor lexical scorer: the utterance is
compared to every sample with a multiset Dice coefficient over normalized,
stopword-filtered tokens, and candidates below the configured threshold are
dropped. Anything implementing ``IntentMatcher`` can replace it; the rest
of the engine only sees ranked candidates.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Tuple

from taskbot.config.model import BotConfig
from taskbot.nlu.negation import NegationSpan, all_instances_negated, detect_negation
from taskbot.nlu.tokenize import (
    GOODBYE_WORDS,
    GREETING_WORDS,
    content_tokens,
    dice_score,
    tokenize_spans,
)

KIND_TASK = "task"
KIND_POLARITY = "polarity"
KIND_FAQ = "faq"


@dataclass(frozen=True)
class IndexEntry:
    kind: str  # task | polarity | faq
    name: str  # task name, polarity label, or FAQ answer
    sample: str
    tokens: Tuple[str, ...]  # normalized, stopword-filtered


@dataclass(frozen=True)
class IntentCandidate:
    task_name: str
    score: float
    matched_sample: str
    evidence_tokens: Tuple[str, ...]


class IntentMatcher(Protocol):
    """Seam for swapping in a different intent model.

    Implementations rank an utterance against the configured tasks and
    return candidates with scores in [0, 1], already thresholded.
    """

    def rank(self, utterance: str) -> List[IntentCandidate]: ...


@dataclass
class IntentIndex:
    threshold: float
    entries: List[IndexEntry] = field(default_factory=list)

    @classmethod
    def from_config(cls, config: BotConfig) -> "IntentIndex":
        index = cls(threshold=config.intent_threshold)
        for name, task in config.tasks.items():
            kind = KIND_POLARITY if task.is_polarity else KIND_TASK
            for sample in task.samples:
                spans = tokenize_spans(sample)
                index.entries.append(
                    IndexEntry(kind=kind, name=name, sample=sample, tokens=tuple(content_tokens([s.text for s in spans])))
                )
        for faq in config.faqs:
            spans = tokenize_spans(faq.question)
            index.entries.append(
                IndexEntry(kind=KIND_FAQ, name=faq.answer, sample=faq.question, tokens=tuple(content_tokens([s.text for s in spans])))
            )
        return index

    def _rank(self, kind: str, utterance_tokens: List[str]) -> List[IntentCandidate]:
        """Best sample per name, ranked by score descending; ties keep
        config declaration order (stable sort over the entry list)."""
        best: dict = {}
        order: List[str] = []
        for entry in self.entries:
            if entry.kind != kind:
                continue
            score = dice_score(utterance_tokens, list(entry.tokens))
            if score < self.threshold:
                continue
            if entry.name not in best:
                order.append(entry.name)
            previous = best.get(entry.name)
            if previous is None or score > previous[0]:
                shared = tuple(t for t in dict.fromkeys(utterance_tokens) if t in entry.tokens)
                best[entry.name] = (score, entry.sample, shared)
        candidates = [
            IntentCandidate(task_name=name, score=best[name][0], matched_sample=best[name][1], evidence_tokens=best[name][2])
            for name in order
        ]
        candidates.sort(key=lambda c: -c.score)  # stable: declaration order breaks ties
        return candidates


class LexicalMatcher:
    """Default IntentMatcher: Dice-scored nearest neighbor over samples."""

    def __init__(self, index: IntentIndex):
        self.index = index

    def rank(self, utterance: str) -> List[IntentCandidate]:
        tokens = content_tokens([s.text for s in tokenize_spans(utterance)])
        return self.index._rank(KIND_TASK, tokens)


def resolve_intent(
    candidates: List[IntentCandidate],
    negations: List[NegationSpan],
    tokens: List[str],
) -> Tuple[Optional[str], Optional[float], Optional[str]]:
    """Apply negation scopes to ranked candidates.

    Returns (intent, score, suppressed_intent). The top candidate is
    suppressed when every occurrence of every evidence token sits inside a
    negation scope; the first candidate with surviving evidence becomes the
    intent. At most one of intent / suppressed is set.
    """
    if not candidates:
        return (None, None, None)
    suppressed: Optional[str] = None
    for candidate in candidates:
        fully_negated = bool(candidate.evidence_tokens) and all(
            all_instances_negated(token, tokens, negations) for token in candidate.evidence_tokens
        )
        if not fully_negated:
            # surviving evidence wins outright; suppression is only reported
            # when nothing survives
            return (candidate.task_name, candidate.score, None)
        if suppressed is None:
            suppressed = candidate.task_name
    return (None, None, suppressed)


def classify_polarity(index: IntentIndex, utterance_tokens: List[str], negations: List[NegationSpan]) -> str:
    """positive | negative | neutral via the polarity samples; any negation
    cue with no positive match forces negative."""
    ranked = index._rank(KIND_POLARITY, utterance_tokens)
    if ranked:
        top = ranked[0].task_name
        if top == "positive" and negations:
            # "no, ..." style utterances often share tokens with positive
            # samples; an explicit cue keeps them negative
            positives = [c for c in ranked if c.task_name == "positive"]
            negatives = [c for c in ranked if c.task_name == "negative"]
            if negatives and negatives[0].score >= positives[0].score:
                return "negative"
            return "positive"
        return top
    if negations:
        return "negative"
    return "neutral"


def match_faq(index: IntentIndex, utterance_tokens: List[str]) -> Optional[str]:
    ranked = index._rank(KIND_FAQ, utterance_tokens)
    return ranked[0].task_name if ranked else None  # name carries the answer


@dataclass(frozen=True)
class NluResult:
    intent: Optional[str]
    intent_score: Optional[float]
    suppressed_intent: Optional[str]
    polarity: str
    faq_answer: Optional[str]
    negations: Tuple[NegationSpan, ...]
    tokens: Tuple[str, ...]
    is_greeting: bool
    is_goodbye: bool


def run_nlu(utterance: str, index: IntentIndex, matcher: Optional[IntentMatcher] = None) -> NluResult:
    """Full single-utterance analysis. ``matcher`` overrides intent ranking
    only; polarity, FAQ, and negation always use the built-in scorer."""
    spans = tokenize_spans(utterance)
    tokens = [s.text for s in spans]
    filtered = content_tokens(tokens)
    negations = detect_negation(utterance, spans)
    if matcher is None:
        matcher = LexicalMatcher(index)
    candidates = matcher.rank(utterance)
    intent, score, suppressed = resolve_intent(candidates, negations, tokens)
    token_set = set(tokens)
    return NluResult(
        intent=intent,
        intent_score=score,
        suppressed_intent=suppressed,
        polarity=classify_polarity(index, filtered, negations),
        faq_answer=match_faq(index, filtered),
        negations=tuple(negations),
        tokens=tuple(tokens),
        is_greeting=bool(token_set & GREETING_WORDS),
        is_goodbye=bool(token_set & GOODBYE_WORDS),
    )
