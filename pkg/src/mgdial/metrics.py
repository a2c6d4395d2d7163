"""Evaluation metrics: BLEU, per-turn set PRF, tag accuracy, attribute error."""
from __future__ import annotations

import math
from collections import Counter
from typing import Iterable, Sequence

EPSILON = 1e-9


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _closest_ref_len(cand_len: int, ref_lens: Iterable[int]) -> int:
    # closest reference length; ties go to the shorter reference
    return min(ref_lens, key=lambda rl: (abs(rl - cand_len), rl))


def corpus_bleu(
    candidates: Sequence[Sequence[str]],
    references: Sequence[Sequence[Sequence[str]]],
    max_n: int = 4,
) -> float:
    """Corpus BLEU with pooled n-gram counts.

    Modified n-gram precision with per-reference clipping, geometric
    mean over orders 1..max_n with uniform weights, brevity penalty
    exp(1 - r/c) when the candidate side is not longer than the pooled
    closest-reference length. An order with zero matches contributes
    EPSILON; an order the candidates are too short to produce is
    skipped.
    """
    if len(candidates) != len(references):
        raise ValueError("candidates and references must align")
    matches = [0] * max_n
    totals = [0] * max_n
    cand_len = 0
    ref_len = 0
    for cand, refs in zip(candidates, references):
        if not refs:
            raise ValueError("each candidate needs at least one reference")
        cand_len += len(cand)
        ref_len += _closest_ref_len(len(cand), [len(r) for r in refs])
        for n in range(1, max_n + 1):
            cand_counts = _ngrams(cand, n)
            if not cand_counts:
                continue
            max_ref: Counter = Counter()
            for ref in refs:
                for gram, c in _ngrams(ref, n).items():
                    if c > max_ref[gram]:
                        max_ref[gram] = c
            totals[n - 1] += sum(cand_counts.values())
            matches[n - 1] += sum(min(c, max_ref[gram]) for gram, c in cand_counts.items())

    log_sum = 0.0
    orders = 0
    for n in range(max_n):
        if totals[n] == 0:
            continue
        p = matches[n] / totals[n] if matches[n] > 0 else EPSILON
        log_sum += math.log(p)
        orders += 1
    if orders == 0 or cand_len == 0:
        return 0.0
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_sum / orders)


def sentence_bleu(candidate: Sequence[str], references: Sequence[Sequence[str]], max_n: int = 4) -> float:
    return corpus_bleu([candidate], [references], max_n=max_n)


def self_bleu(sentences: Sequence[Sequence[str]], max_n: int = 4) -> float:
    """Mean over sentences of sentence BLEU against all the others.

    Used to gate paraphrase diversity; lower means more varied. Returns
    0.0 for fewer than two sentences.
    """
    if len(sentences) < 2:
        return 0.0
    scores = []
    for i, sent in enumerate(sentences):
        others = [s for j, s in enumerate(sentences) if j != i]
        scores.append(sentence_bleu(sent, others, max_n=max_n))
    return math.fsum(sorted(scores)) / len(scores)


def _prf_one(gold: set, pred: set) -> tuple[float, float, float]:
    if not gold and not pred:
        return 1.0, 1.0, 1.0
    hit = len(gold & pred)
    p = hit / len(pred) if pred else 1.0  # nothing predicted: vacuously precise
    r = hit / len(gold) if gold else 1.0  # nothing to find: vacuously complete
    f = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f


def set_prf(golds: Sequence[set], preds: Sequence[set]) -> tuple[float, float, float]:
    """Macro-averaged per-turn set precision/recall/F1."""
    if len(golds) != len(preds):
        raise ValueError("gold/pred length mismatch")
    if not golds:
        return 1.0, 1.0, 1.0
    ps, rs, fs = [], [], []
    for g, p in zip(golds, preds):
        a, b, c = _prf_one(set(g), set(p))
        ps.append(a)
        rs.append(b)
        fs.append(c)
    n = len(golds)
    return math.fsum(ps) / n, math.fsum(rs) / n, math.fsum(fs) / n


def sentence_accuracy(golds: Sequence[set], preds: Sequence[set]) -> float:
    """Fraction of turns whose predicted set matches the gold set exactly."""
    if len(golds) != len(preds):
        raise ValueError("gold/pred length mismatch")
    if not golds:
        return 1.0
    return sum(1 for g, p in zip(golds, preds) if set(g) == set(p)) / len(golds)


def token_tag_accuracy(gold_tags: Sequence[Sequence[str]], pred_tags: Sequence[Sequence[str]]) -> float:
    """Micro token accuracy over aligned tag sequences."""
    if len(gold_tags) != len(pred_tags):
        raise ValueError("gold/pred length mismatch")
    total = 0
    hit = 0
    for g, p in zip(gold_tags, pred_tags):
        if len(g) != len(p):
            raise ValueError("tag sequence length mismatch")
        total += len(g)
        hit += sum(1 for x, y in zip(g, p) if x == y)
    return hit / total if total else 1.0


def attribute_error_rate(
    items: Sequence[tuple[Sequence[str], str]],
    threshold: float = 0.8,
) -> float:
    """1 - found/expected over turns that expected any attribute values.

    Each item is (expected_values, response_text). A value counts as
    found when it appears in the response verbatim or within fuzzy edit
    similarity threshold. Turns expecting nothing are skipped.
    """
    from .text import find_in_text

    expected = 0
    found = 0
    for values, response in items:
        if not values:
            continue
        expected += len(values)
        for v in values:
            if find_in_text(response, v, threshold) is not None:
                found += 1
    if expected == 0:
        return 0.0
    return 1.0 - found / expected
