"""Fuzzy string matching for picklist options.

An option matches when the best of three comparisons clears the threshold:
the full utterance, any contiguous token n-gram the size of the option, or
any single token against any option token. Short or stopword tokens are
skipped so fillers like "and" cannot match an airline name.
"""

from typing import List, Optional, Sequence, Tuple

from taskbot.nlu.tokenize import STOPWORDS, tokenize

FUZZY_THRESHOLD = 0.75
_MIN_TOKEN_LEN = 3


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, start=1):
        current = [i]
        for j, ch_b in enumerate(b, start=1):
            cost = 0 if ch_a == ch_b else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def similarity(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    longest = max(len(a), len(b))
    return 1.0 - levenshtein(a, b) / longest


def _content(tokens: Sequence[str]) -> List[str]:
    return [t for t in tokens if t not in STOPWORDS and len(t) >= _MIN_TOKEN_LEN]


def score_option(utterance: str, option: str) -> float:
    """Best similarity between the utterance and one picklist option."""
    utt = utterance.lower().strip()
    opt = option.lower().strip()
    best = similarity(utt, opt)

    utt_tokens = _content(tokenize(utterance))
    opt_tokens = tokenize(option)
    if utt_tokens and opt_tokens:
        width = len(opt_tokens)
        for i in range(len(utt_tokens) - width + 1):
            gram = " ".join(utt_tokens[i : i + width])
            best = max(best, similarity(gram, opt))
        for token in utt_tokens:
            for opt_token in opt_tokens:
                if len(opt_token) < _MIN_TOKEN_LEN:
                    continue
                best = max(best, similarity(token, opt_token))
    return best


def fuzzy_match_picklist(
    utterance: str, options: Sequence[str], threshold: float = FUZZY_THRESHOLD
) -> Optional[Tuple[str, float]]:
    """Highest-scoring option at or above threshold, earliest option on ties."""
    best: Optional[Tuple[str, float]] = None
    for option in options:
        score = score_option(utterance, option)
        if score < threshold:
            continue
        if best is None or score > best[1]:
            best = (option, score)
    return best
