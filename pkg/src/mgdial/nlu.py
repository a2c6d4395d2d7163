"""Turn understanding: tag codec, gold annotation, lexical baselines.

The tagging target is a BIO sequence over every token of the dialogue
so far (alternating user/agent utterances, ending at the current user
utterance). Tag B-k / I-k marks the value of the k-th input of the
instruction's call, wherever in the history it was said.
"""
from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .manuals import TfidfIndex
from .model import (
    ApiArg,
    ApiCall,
    Database,
    Dialogue,
    Instruction,
    Manual,
    Span,
    Turn,
)
from .text import locate_value, normalize, token_texts, tokenize


class CodecError(ValueError):
    pass


@dataclass(frozen=True)
class LocatedToken:
    text: str
    turn: int
    speaker: str
    start: int
    end: int


def dialogue_tokens(dialogue: Dialogue, upto_turn: int) -> list[LocatedToken]:
    """Tokens of every utterance through upto_turn's user side."""
    out: list[LocatedToken] = []
    for turn in dialogue.turns:
        if turn.index > upto_turn:
            break
        for tok in tokenize(turn.user_utterance):
            out.append(LocatedToken(tok.text, turn.index, "user", tok.start, tok.end))
        if turn.index < upto_turn:
            for tok in tokenize(turn.agent_response):
                out.append(LocatedToken(tok.text, turn.index, "agent", tok.start, tok.end))
    return out


def tag_alphabet(max_args: int) -> tuple[str, ...]:
    tags = ["O"]
    for k in range(1, max_args + 1):
        tags += [f"B-{k}", f"I-{k}"]
    return tuple(tags)


def encode_tags(tokens: list[LocatedToken], spans: list[tuple[int, Span]]) -> list[str]:
    """BIO tags for tokens given (arg index, char span) pairs.

    A token belongs to a span when it overlaps it in the same utterance.
    Earlier pairs win where spans collide.
    """
    tags = ["O"] * len(tokens)
    for k, span in spans:
        begun = False
        for i, tok in enumerate(tokens):
            if tok.turn != span.turn or tok.speaker != span.speaker:
                continue
            if tok.start < span.end and span.start < tok.end:
                if tags[i] != "O":
                    continue
                tags[i] = f"I-{k}" if begun else f"B-{k}"
                begun = True
    return tags


@dataclass(frozen=True)
class DecodedSpan:
    k: int
    turn: int
    speaker: str
    start: int  # char offsets spanning first..last token
    end: int
    token_range: tuple[int, int]  # [first, last) token indices


_TAG_RE = re.compile(r"^(?:O|[BI]-([1-9][0-9]*))$")


def decode_tags(tokens: list[LocatedToken], tags: list[str], strict: bool = False) -> list[DecodedSpan]:
    """Group BIO tags back into spans.

    Lenient mode treats an orphan I-k (no open B-k chunk) as a fresh
    start; strict mode raises. A chunk also closes when the utterance
    changes under it.
    """
    if len(tokens) != len(tags):
        raise CodecError(f"{len(tokens)} tokens vs {len(tags)} tags")
    spans: list[DecodedSpan] = []
    open_k: int | None = None
    first = 0

    def close(last_index: int) -> None:
        nonlocal open_k
        if open_k is None:
            return
        toks = tokens[first:last_index + 1]
        spans.append(DecodedSpan(
            k=open_k, turn=toks[0].turn, speaker=toks[0].speaker,
            start=toks[0].start, end=toks[-1].end,
            token_range=(first, last_index + 1),
        ))
        open_k = None

    for i, (tok, tag) in enumerate(zip(tokens, tags)):
        m = _TAG_RE.match(tag)
        if not m:
            raise CodecError(f"bad tag {tag!r} at position {i}")
        if open_k is not None:
            prev = tokens[i - 1]
            if (tok.turn, tok.speaker) != (prev.turn, prev.speaker):
                close(i - 1)
        if tag == "O":
            close(i - 1)
        elif tag.startswith("B-"):
            close(i - 1)
            open_k = int(m.group(1))
            first = i
        else:  # I-k
            k = int(m.group(1))
            if open_k == k:
                continue
            if strict:
                raise CodecError(f"orphan {tag} at position {i}")
            close(i - 1)
            open_k = k
            first = i
    close(len(tokens) - 1)
    return spans


# ---------------------------------------------------------------------------
# gold annotation


def arg_index(instruction_api_inputs: tuple[str, ...], attr: str) -> int:
    return instruction_api_inputs.index(attr) + 1


def annotate_dialogue(dialogue: Dialogue) -> tuple[Dialogue, list[dict]]:
    """Locate every call argument value in the dialogue text.

    Search prefers the latest utterance available at call time: all
    turns before the call turn (both sides) plus that turn's user
    utterance. Returns the dialogue with spans attached and a report of
    values that could not be matched anywhere.
    """
    unmatched: list[dict] = []
    new_turns: list[Turn] = []
    for turn in dialogue.turns:
        history: list[tuple[str, str]] = []
        for t in dialogue.turns:
            if t.index > turn.index:
                break
            history.append(("user", t.user_utterance))
            if t.index < turn.index:
                history.append(("agent", t.agent_response))
        new_calls: list[ApiCall] = []
        for call in turn.api_calls:
            new_args: list[ApiArg] = []
            for arg in call.args:
                loc = locate_value(history, arg.value)
                if loc is None:
                    unmatched.append({
                        "dialogue_id": dialogue.id,
                        "turn": turn.index,
                        "instruction_id": call.instruction_id,
                        "attr": arg.attr,
                        "value": arg.value,
                    })
                    new_args.append(ApiArg(arg.attr, arg.value, span=None))
                    continue
                # map the flat history index back to a dialogue turn number:
                # each user entry opens a turn, its agent entry closes it
                speaker = loc.speaker
                turn_counter = -1
                seen = 0
                for h_i, (spk, _) in enumerate(history):
                    if spk == "user":
                        turn_counter += 1
                    if h_i == loc.turn:
                        seen = turn_counter
                        break
                new_args.append(ApiArg(arg.attr, arg.value,
                                       span=Span(seen, speaker, loc.start, loc.end)))
            new_calls.append(ApiCall(call.instruction_id, call.api, tuple(new_args)))
        new_turns.append(Turn(turn.index, turn.user_utterance, turn.agent_response,
                              turn.selected_instructions, tuple(new_calls),
                              turn.api_results, turn.needs_review))
    annotated = Dialogue(dialogue.id, dialogue.manual_id, dialogue.goal,
                         tuple(new_turns), dialogue.seed, dialogue.completed)
    return annotated, unmatched


def gold_tags_for(dialogue: Dialogue, turn_index: int, call: ApiCall) -> list[str]:
    tokens = dialogue_tokens(dialogue, turn_index)
    pairs = []
    inputs = call.api.input_attrs()
    for arg in call.args:
        if arg.span is not None:
            pairs.append((arg_index(inputs, arg.attr), arg.span))
    return encode_tags(tokens, pairs)


# ---------------------------------------------------------------------------
# instruction matching baseline


@dataclass
class LexicalMatcher:
    """Scores manual instructions against the conversation context.

    Combines a zero-shot tf-idf similarity to the instruction text with
    token-to-instruction associations learned from training dialogues.
    Works on manuals never seen in training because instruction ids are
    shared across paraphrase sets.
    """

    use_manual_text: bool = True
    _assoc: dict[str, dict[str, float]] = field(default_factory=dict)  # token -> id -> weight
    _indices: dict[str, TfidfIndex] = field(default_factory=dict)

    def fit(self, dialogues: list[Dialogue], manuals: dict[str, Manual]) -> "LexicalMatcher":
        token_total: Counter = Counter()
        token_with: dict[str, Counter] = defaultdict(Counter)
        for dlg in dialogues:
            for turn in dlg.turns:
                toks = set(self._query_tokens(turn.user_utterance))
                for tok in toks:
                    token_total[tok] += 1
                    for ins_id in turn.selected_instructions:
                        token_with[tok][ins_id] += 1
        self._assoc = {
            tok: {ins_id: cnt / token_total[tok] for ins_id, cnt in per.items()}
            for tok, per in token_with.items()
        }
        return self

    @staticmethod
    def _query_tokens(text: str) -> list[str]:
        return [t.lower() for t in token_texts(normalize(text))]

    def _index_for(self, manual: Manual) -> TfidfIndex:
        if manual.id not in self._indices:
            docs = [(ins.id, f"{ins.condition} {ins.solution} {ins.api_description}")
                    for ins in manual.instructions]
            self._indices[manual.id] = TfidfIndex().fit(docs)
        return self._indices[manual.id]

    def score_turn(self, dialogue: Dialogue, turn_index: int, manual: Manual) -> dict[str, float]:
        turn = dialogue.turns[turn_index]
        context = ""
        if turn_index > 0:
            context = dialogue.turns[turn_index - 1].agent_response
        # current utterance doubled: it dominates, context only disambiguates
        query = f"{context} {turn.user_utterance} {turn.user_utterance}"
        scores: dict[str, float] = {}
        tfidf_all: dict[str, float] = {}
        if self.use_manual_text:
            index = self._index_for(manual)
            tfidf_all = dict(index.search(query, k=len(manual.instructions)))
        qtokens = self._query_tokens(turn.user_utterance)
        for ins in manual.instructions:
            tfidf = tfidf_all.get(ins.id, 0.0)
            assoc = max((self._assoc.get(t, {}).get(ins.id, 0.0) for t in qtokens), default=0.0)
            scores[ins.id] = max(tfidf, assoc)
        return scores

    def predict_turn(self, dialogue: Dialogue, turn_index: int, manual: Manual,
                     threshold: float) -> set[str]:
        scores = self.score_turn(dialogue, turn_index, manual)
        chosen = [(s, i) for i, s in scores.items() if s >= threshold]
        chosen.sort(key=lambda p: (-p[0], p[1]))
        return {i for _, i in chosen[:10]}


def pick_operating_point(
    golds: list[set],
    score_maps: list[dict[str, float]],
    objective: str = "f1",
) -> float:
    """Scan thresholds 0.00..1.00 (step .01) and pick the best one.

    objective "f1": highest macro F1, recall breaking ties. objective
    "recall": highest macro recall, F1 breaking ties. Remaining ties go
    to the lowest threshold.
    """
    from .metrics import set_prf

    if objective not in ("f1", "recall"):
        raise ValueError(f"unknown objective {objective!r}")
    best: tuple[float, float, float] | None = None  # (primary, secondary, -threshold)
    best_t = 0.0
    for step in range(101):
        t = step / 100
        preds = [{i for i, s in scores.items() if s >= t} for scores in score_maps]
        _, r, f = set_prf(golds, preds)
        key = (f, r) if objective == "f1" else (r, f)
        if best is None or key > best[:2] or (key == best[:2] and -t > best[2]):
            best = (key[0], key[1], -t)
            best_t = t
    return best_t


# ---------------------------------------------------------------------------
# argument tagging baseline


@dataclass
class LexicalTagger:
    """Finds argument values by matching known attribute vocabulary.

    With the instruction available, each argument slot k searches only
    the value pool of its own (domain, attribute). Without it, every
    pool is merged and slots are assigned in order of appearance, which
    discards the alignment signal and serves as the ablation baseline.
    """

    db: Database
    use_instruction: bool = True
    max_ngram: int = 6
    _pools: dict[tuple[str, str], set[str]] = field(default_factory=dict)
    _union_pool: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        for domain in self.db.schemas:
            for attr in self.db.attributes_for(domain):
                values = {normalize(v) for v in self.db.values_for(domain, attr)}
                self._pools[(domain, attr)] = values
                self._union_pool |= values

    def _scan(self, tokens: list[LocatedToken], membership) -> list[tuple[int, int, str]]:
        """Longest-match spans [i, j) whose normalized text passes membership."""
        found: list[tuple[int, int, str]] = []
        n = len(tokens)
        i = 0
        while i < n:
            best_j = 0
            best_text = ""
            limit = min(n, i + self.max_ngram)
            for j in range(limit, i, -1):
                if (tokens[j - 1].turn, tokens[j - 1].speaker) != (tokens[i].turn, tokens[i].speaker):
                    continue
                text = normalize(" ".join(t.text for t in tokens[i:j]))
                if membership(text):
                    best_j, best_text = j, text
                    break
            if best_j:
                found.append((i, best_j, best_text))
                i = best_j
            else:
                i += 1
        return found

    def tag(self, dialogue: Dialogue, turn_index: int, instruction: Instruction | None) -> list[str]:
        tokens = dialogue_tokens(dialogue, turn_index)
        tags = ["O"] * len(tokens)
        if not tokens:
            return tags

        if self.use_instruction and instruction is not None and instruction.api is not None:
            domain = instruction.api.domain
            inputs = instruction.api.input_attrs()
            # later (more recent) occurrences win: walk matches, keep the last per slot
            chosen: dict[int, tuple[int, int]] = {}
            for k, attr in enumerate(inputs, start=1):
                pool = self._pools.get((domain, attr), set())
                if not pool:
                    continue
                matches = self._scan(tokens, pool.__contains__)
                picked = self._pick_for_attr(tokens, matches, attr)
                if picked is not None:
                    chosen[k] = picked
            for k, (i, j) in sorted(chosen.items()):
                if all(t == "O" for t in tags[i:j]):
                    tags[i] = f"B-{k}"
                    for x in range(i + 1, j):
                        tags[x] = f"I-{k}"
            return tags

        # ablation: merged vocabulary, slot index by order of appearance
        matches = self._scan(tokens, self._union_pool.__contains__)
        current_turn_matches = [m for m in matches
                                if tokens[m[0]].turn == turn_index and tokens[m[0]].speaker == "user"]
        for k, (i, j, _) in enumerate(current_turn_matches[:4], start=1):
            tags[i] = f"B-{k}"
            for x in range(i + 1, j):
                tags[x] = f"I-{k}"
        return tags

    def _pick_for_attr(self, tokens: list[LocatedToken], matches: list[tuple[int, int, str]],
                       attr: str) -> tuple[int, int] | None:
        if not matches:
            return None
        scored = []
        for i, j, _text in matches:
            cue = 0
            if attr in ("departure", "destination") and i > 0:
                prev = tokens[i - 1].text.lower()
                if attr == "departure":
                    cue = 1 if prev in ("from", "departure") else -1 if prev in ("to", "destination") else 0
                else:
                    cue = 1 if prev in ("to", "destination", "into") else -1 if prev in ("from",) else 0
            if attr in ("leave", "arrive") and i > 0:
                window = {tokens[x].text.lower() for x in range(max(0, i - 3), i)}
                if attr == "leave":
                    cue = 1 if window & {"leave", "leaves", "leaving", "depart", "departing"} else \
                        -1 if window & {"arrive", "arrives", "arriving", "by"} else 0
                else:
                    cue = 1 if window & {"arrive", "arrives", "arriving", "by"} else \
                        -1 if window & {"leave", "leaves", "leaving"} else 0
            # prefer cue agreement, then recency (later token index), then leftmost tie id
            scored.append((cue, i, j))
        scored.sort(key=lambda x: (-x[0], -x[1]))
        cue, i, j = scored[0]
        if cue < 0 and len(scored) == 1:
            return None  # only candidate contradicts its cue: abstain
        return (i, j)
