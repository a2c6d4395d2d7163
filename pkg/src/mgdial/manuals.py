"""Manual construction, paraphrase gating, and instruction search.

A manual is compiled from seed definitions plus a frame pack: every
frame category carries N surface variants of the condition, solution,
api description, and reply template, and manual k uses variant k
throughout. The gate checks that variants of the same frame are
textually diverse enough (self BLEU below threshold) before a frame
pack is accepted.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from .metrics import self_bleu
from .model import ApiSpec, Instruction, Manual
from .text import normalize, token_texts

_PLACEHOLDER_RE = re.compile(r"\{([^{}]+)\}")


class ManualBuildError(ValueError):
    pass


@dataclass(frozen=True)
class FrameSet:
    """Parallel paraphrase variants for one instruction category."""

    category: str
    condition: tuple[str, ...]
    solution: tuple[str, ...]
    api_description: tuple[str, ...] = ()
    reply: tuple[str, ...] = ()

    def variant_count(self) -> int:
        return len(self.condition)

    def check(self) -> None:
        n = self.variant_count()
        for label, seq in (("solution", self.solution), ("api_description", self.api_description),
                           ("reply", self.reply)):
            if seq and len(seq) != n:
                raise ManualBuildError(
                    f"frame {self.category}: {label} has {len(seq)} variants, expected {n}"
                )


@dataclass(frozen=True)
class SeedInstruction:
    """Domain-bound instruction definition awaiting surface realization."""

    family: str
    domain: str
    category: str
    slots: dict[str, str]
    api: ApiSpec | None = None


def fill(template: str, slots: dict[str, str]) -> str:
    """Replace {slot} where a filler exists; leave unknown markers alone.

    Unknown markers survive so reply templates keep their result
    placeholders ({name}, {reference num.}, ...) for realization time.
    """
    def sub(m: re.Match) -> str:
        key = m.group(1)
        return slots.get(key, m.group(0))

    return _PLACEHOLDER_RE.sub(sub, template)


def compile_manual(
    manual_id: str,
    set_id: int,
    seeds: list[SeedInstruction],
    frames: dict[str, FrameSet],
) -> Manual:
    instructions = []
    for seed in seeds:
        frame = frames.get(seed.category)
        if frame is None:
            raise ManualBuildError(f"no frame for category {seed.category!r}")
        frame.check()
        if not (0 <= set_id < frame.variant_count()):
            raise ManualBuildError(
                f"frame {seed.category}: variant {set_id} out of range "
                f"(have {frame.variant_count()})"
            )
        condition = fill(frame.condition[set_id], seed.slots)
        solution = fill(frame.solution[set_id], seed.slots)
        api_desc = fill(frame.api_description[set_id], seed.slots) if frame.api_description else ""
        reply = fill(frame.reply[set_id], seed.slots) if frame.reply else ""
        leftover = [m for m in _PLACEHOLDER_RE.findall(condition + " " + solution + " " + api_desc)]
        if leftover:
            raise ManualBuildError(
                f"{seed.domain}-{seed.family}: unfilled markers {sorted(set(leftover))} in variant {set_id}"
            )
        instructions.append(Instruction(
            id=f"{seed.domain}-{seed.family}",
            family=seed.family,
            domain=seed.domain,
            condition=condition,
            solution=solution,
            api=seed.api,
            api_description=api_desc,
            reply_template=reply,
        ))
    return Manual(id=manual_id, paraphrase_set=set_id, instructions=tuple(instructions))


# ---------------------------------------------------------------------------
# paraphrase gate


@dataclass(frozen=True)
class GateReport:
    threshold: float
    scores: dict[str, float]  # frame category -> self BLEU of its condition variants
    passed: bool
    worst: str

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "scores": dict(sorted(self.scores.items())),
            "passed": self.passed,
            "worst": self.worst,
        }


def paraphrase_gate(frames: dict[str, FrameSet], threshold: float = 0.8) -> GateReport:
    """Self BLEU of each frame's condition variants; all must stay under.

    Templates are scored with placeholder markers stripped so shared
    slot names do not count as lexical overlap.
    """
    scores: dict[str, float] = {}
    for cat, frame in frames.items():
        variants = [token_texts(normalize(_PLACEHOLDER_RE.sub(" ", v))) for v in frame.condition]
        scores[cat] = self_bleu(variants)
    worst = max(scores, key=lambda c: (scores[c], c)) if scores else ""
    passed = all(s < threshold for s in scores.values())
    return GateReport(threshold=threshold, scores=scores, passed=passed, worst=worst)


# ---------------------------------------------------------------------------
# tf-idf instruction search


@dataclass
class TfidfIndex:
    """Cosine search over instruction text (condition + solution)."""

    _vocab_df: Counter = field(default_factory=Counter)
    _doc_vecs: dict[str, dict[str, float]] = field(default_factory=dict)
    _n_docs: int = 0

    @staticmethod
    def _terms(text: str) -> list[str]:
        return [t.lower() for t in token_texts(normalize(text))]

    def fit(self, docs: list[tuple[str, str]]) -> "TfidfIndex":
        self._n_docs = len(docs)
        self._vocab_df = Counter()
        raw: dict[str, Counter] = {}
        for doc_id, text in docs:
            counts = Counter(self._terms(text))
            raw[doc_id] = counts
            for term in counts:
                self._vocab_df[term] += 1
        self._doc_vecs = {
            doc_id: self._weigh(counts) for doc_id, counts in raw.items()
        }
        return self

    def _idf(self, term: str) -> float:
        return math.log((1 + self._n_docs) / (1 + self._vocab_df.get(term, 0))) + 1.0

    def _weigh(self, counts: Counter) -> dict[str, float]:
        vec = {t: c * self._idf(t) for t, c in counts.items()}
        norm = math.sqrt(math.fsum(w * w for w in vec.values()))
        if norm > 0:
            vec = {t: w / norm for t, w in vec.items()}
        return vec

    def score(self, query: str, doc_id: str) -> float:
        qvec = self._weigh(Counter(self._terms(query)))
        dvec = self._doc_vecs.get(doc_id, {})
        if len(qvec) > len(dvec):
            qvec, dvec = dvec, qvec
        return math.fsum(w * dvec.get(t, 0.0) for t, w in qvec.items())

    def search(self, query: str, k: int = 5) -> list[tuple[str, float]]:
        qvec = self._weigh(Counter(self._terms(query)))
        scored = []
        for doc_id, dvec in self._doc_vecs.items():
            a, b = (qvec, dvec) if len(qvec) <= len(dvec) else (dvec, qvec)
            s = math.fsum(w * b.get(t, 0.0) for t, w in a.items())
            scored.append((doc_id, s))
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return scored[:k]


def build_instruction_index(manual: Manual) -> TfidfIndex:
    docs = [(ins.id, f"{ins.condition} {ins.solution}") for ins in manual.instructions]
    return TfidfIndex().fit(docs)
