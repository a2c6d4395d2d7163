"""Text primitives: tokenization with offsets, edit distance, fuzzy span search."""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

# Numbers may carry time/decimal separators ("18:30", "4.5"); keep them whole.
_TOKEN_RE = re.compile(r"[0-9]+(?:[.:][0-9]+)*|[^\W_0-9]+|[^\w\s]", re.UNICODE)


@dataclass(frozen=True)
class Token:
    text: str
    start: int  # char offset into the source string
    end: int    # exclusive

    def lower(self) -> str:
        return self.text.lower()


def normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text).strip().casefold()


def tokenize(text: str) -> list[Token]:
    return [Token(m.group(0), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def token_texts(text: str) -> list[str]:
    return [t.text for t in tokenize(text)]


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """Edit similarity in [0, 1] tolerant to small length differences.

    Normalizes the distance by the summed lengths rather than the max
    so that a one-char slip in a short string ("7pm" vs "7 pm") still
    scores high: 1 - 1/7 ~ 0.857.
    """
    na, nb = normalize(a), normalize(b)
    if not na and not nb:
        return 1.0
    if not na or not nb:
        return 0.0
    return 1.0 - levenshtein(na, nb) / (len(na) + len(nb))


@dataclass(frozen=True)
class Located:
    turn: int
    speaker: str  # "user" | "agent"
    start: int
    end: int
    score: float
    surface: str


def find_in_text(text: str, value: str, threshold: float = 0.8) -> tuple[int, int, float, str] | None:
    """Best (start, end, score, surface) for value inside text, or None.

    Word-bounded exact containment wins, then plain containment, then a
    fuzzy window of +-30% of the value length slid over token
    boundaries. Prefers the leftmost best match.
    """
    low_text = text.lower()
    low_value = value.lower().strip()
    if not low_value:
        return None
    bounded = re.search(r"(?<!\w)" + re.escape(low_value) + r"(?!\w)", low_text)
    if bounded is not None:
        pos = bounded.start()
        return pos, pos + len(low_value), 1.0, text[pos:pos + len(low_value)]
    pos = low_text.find(low_value)
    if pos >= 0:
        return pos, pos + len(low_value), 1.0, text[pos:pos + len(low_value)]

    toks = tokenize(text)
    if not toks:
        return None
    vlen = len(low_value)
    min_len = max(1, int(vlen * 0.7))
    max_len = int(vlen * 1.3) + 1
    best: tuple[int, int, float, str] | None = None
    for i in range(len(toks)):
        for j in range(i, len(toks)):
            start, end = toks[i].start, toks[j].end
            span_len = end - start
            if span_len > max_len:
                break
            if span_len < min_len:
                continue
            surface = text[start:end]
            score = similarity(surface, value)
            if score >= threshold and (best is None or score > best[2]):
                best = (start, end, score, surface)
    return best


def locate_value(
    history: list[tuple[str, str]],
    value: str,
    threshold: float = 0.8,
) -> Located | None:
    """Find value in dialogue history, preferring the latest turn.

    history is a list of (speaker, utterance) in chronological order.
    An exact occurrence anywhere beats a fuzzy one: near-identical
    values (booking references differ in one digit) must not shadow the
    real mention just by being said later. Within a tier the latest
    turn wins; within a turn the leftmost, highest-scoring span.
    """
    tiers = (1.0, threshold) if threshold < 1.0 else (threshold,)
    for tier in tiers:
        for idx in range(len(history) - 1, -1, -1):
            speaker, utterance = history[idx]
            hit = find_in_text(utterance, value, tier)
            if hit is not None:
                start, end, score, surface = hit
                return Located(idx, speaker, start, end, score, surface)
    return None
