from taskbot.nlu.intent import (
    IntentCandidate,
    IntentIndex,
    IntentMatcher,
    LexicalMatcher,
    NluResult,
    classify_polarity,
    match_faq,
    resolve_intent,
    run_nlu,
)
from taskbot.nlu.negation import NegationSpan, detect_negation
from taskbot.nlu.tokenize import (
    STOPWORDS,
    content_tokens,
    dice_score,
    tokenize,
    tokenize_spans,
)

__all__ = [
    "IntentCandidate",
    "IntentIndex",
    "IntentMatcher",
    "LexicalMatcher",
    "NluResult",
    "classify_polarity",
    "match_faq",
    "resolve_intent",
    "run_nlu",
    "NegationSpan",
    "detect_negation",
    "STOPWORDS",
    "content_tokens",
    "dice_score",
    "tokenize",
    "tokenize_spans",
]
