"""Evaluation harness over a frozen corpus.

Fits the lexical baselines on the train split, picks thresholds on dev,
and reports held-out metrics per subtask. "Training" here means fitting
token associations and decision thresholds; dialogues whose manual is
reserved for the test split must never reach that path, and every
fitting entry point enforces it.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .metrics import (
    attribute_error_rate,
    corpus_bleu,
    sentence_accuracy,
    set_prf,
    token_tag_accuracy,
)
from .model import ApiCall, Database, Dialogue, Instruction, Manual
from .nlu import (
    LexicalMatcher,
    LexicalTagger,
    decode_tags,
    dialogue_tokens,
    gold_tags_for,
    pick_operating_point,
)
from .responder import realize_turn
from .text import normalize, token_texts


class SplitLeakageError(RuntimeError):
    """A dialogue from a held-out manual reached a training path."""


def config_hash(payload: dict[str, Any]) -> str:
    """Stable 16-hex digest of a report configuration."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _rng(seed: int, tag: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{tag}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _gen_tokens(text: str) -> list[str]:
    return [t.lower() for t in token_texts(normalize(text))]


# ---------------------------------------------------------------------------
# corpus container


@dataclass
class EvalCorpus:
    """A corpus plus the split bookkeeping the harness needs.

    test_manuals lists the manuals reserved for the test split; any
    train or dev dialogue drawn from one of them is a leak.
    """

    db: Database
    manuals: dict[str, Manual]
    dialogues: dict[str, Dialogue]
    splits: dict[str, tuple[str, ...]]
    train_manuals: tuple[str, ...]
    test_manuals: frozenset[str]

    @staticmethod
    def build(
        db: Database,
        manuals: Sequence[Manual],
        dialogues: Sequence[Dialogue],
        manifest: dict[str, Any],
    ) -> "EvalCorpus":
        partition = manifest["manual_partition"]
        return EvalCorpus(
            db=db,
            manuals={m.id: m for m in manuals},
            dialogues={d.id: d for d in dialogues},
            splits={name: tuple(ids) for name, ids in manifest["splits"].items()},
            train_manuals=tuple(partition["train"]),
            test_manuals=frozenset(partition["test"]),
        )

    @staticmethod
    def from_bundle(db: Database, manuals: Sequence[Manual], bundle) -> "EvalCorpus":
        return EvalCorpus.build(db, manuals, bundle.dialogues, bundle.manifest)

    def split(self, name: str) -> list[Dialogue]:
        if name not in self.splits:
            raise KeyError(f"unknown split {name!r}")
        return [self.dialogues[i] for i in self.splits[name]]

    def manual_for(self, dialogue: Dialogue) -> Manual:
        return self.manuals[dialogue.manual_id]


def guard_training(corpus: EvalCorpus, dialogues: Sequence[Dialogue]) -> None:
    """Abort when a held-out-manual dialogue is about to be fit on."""
    for dlg in dialogues:
        if dlg.manual_id in corpus.test_manuals:
            raise SplitLeakageError(
                f"dialogue {dlg.id} uses held-out manual {dlg.manual_id}; "
                "it cannot enter training"
            )


# ---------------------------------------------------------------------------
# gold extraction


@dataclass(frozen=True)
class TagPair:
    dialogue: Dialogue
    turn_index: int
    call: ApiCall
    instruction: Instruction
    gold_tags: tuple[str, ...]


def _turn_golds(dialogues: Sequence[Dialogue]) -> list[set[str]]:
    return [set(t.selected_instructions) for d in dialogues for t in d.turns]


def _tag_pairs(corpus: EvalCorpus, dialogues: Sequence[Dialogue]) -> list[TagPair]:
    pairs = []
    for dlg in dialogues:
        manual = corpus.manual_for(dlg)
        for turn in dlg.turns:
            for call in turn.api_calls:
                pairs.append(TagPair(
                    dialogue=dlg,
                    turn_index=turn.index,
                    call=call,
                    instruction=manual.by_id(call.instruction_id),
                    gold_tags=tuple(gold_tags_for(dlg, turn.index, call)),
                ))
    return pairs


def expected_values_for_turn(db: Database, manual: Manual, dialogue: Dialogue,
                             turn_index: int) -> list[str]:
    """Attribute values the agent response for this turn must convey.

    Replays the realization of the turn's logged calls; the realizer is
    deterministic in (dialogue id, turn index), so this reproduces the
    picks made when the dialogue was generated.
    """
    turn = dialogue.turns[turn_index]
    items = []
    for call, result in zip(turn.api_calls, turn.api_results):
        items.append((manual.by_id(call.instruction_id), call, result))
    if not items:
        return []
    realized = realize_turn(items, db, dialogue.id, turn_index)
    return [value for _, _, value in realized.conveyed]


# ---------------------------------------------------------------------------
# scoring


def _score_matching(golds: list[set[str]], preds: list[set[str]]) -> dict[str, float]:
    """Sentence accuracy over all turns; P/R/F1 over turns with gold.

    Turns with no instruction (greetings, closings) count toward the
    accuracy but are excluded from the macro P/R/F1, so a predictor
    that never selects anything scores recall 0, not the share of
    silent turns.
    """
    busy = [i for i, g in enumerate(golds) if g]
    p, r, f = set_prf([golds[i] for i in busy], [preds[i] for i in busy])
    return {
        "accuracy": sentence_accuracy(golds, preds),
        "precision": p,
        "recall": r,
        "f1": f,
    }


def _chunks(pair: TagPair, tags: Sequence[str]) -> set[tuple[int, tuple[int, int]]]:
    tokens = dialogue_tokens(pair.dialogue, pair.turn_index)
    return {(s.k, s.token_range) for s in decode_tags(tokens, list(tags))}


def _score_tagging(pairs: list[TagPair], preds: list[Sequence[str]]) -> dict[str, float]:
    gold_tags = [list(p.gold_tags) for p in pairs]
    pred_tags = [list(t) for t in preds]
    gold_chunks = [_chunks(p, p.gold_tags) for p in pairs]
    pred_chunks = [_chunks(p, t) for p, t in zip(pairs, preds)]
    p, r, f = set_prf(gold_chunks, pred_chunks)
    return {
        "token_accuracy": token_tag_accuracy(gold_tags, pred_tags),
        "precision": p,
        "recall": r,
        "f1": f,
    }


def _score_generation(corpus: EvalCorpus, dialogues: Sequence[Dialogue],
                      candidates: list[str]) -> dict[str, float]:
    refs = []
    aer_items = []
    flat = [(dlg, turn) for dlg in dialogues for turn in dlg.turns]
    if len(flat) != len(candidates):
        raise ValueError("candidate/turn length mismatch")
    for (dlg, turn), cand in zip(flat, candidates):
        refs.append([_gen_tokens(turn.agent_response)])
        expected = expected_values_for_turn(corpus.db, corpus.manual_for(dlg),
                                            dlg, turn.index)
        aer_items.append((expected, cand))
    bleu = corpus_bleu([_gen_tokens(c) for c in candidates], refs)
    return {"bleu": bleu, "aer": attribute_error_rate(aer_items)}


# ---------------------------------------------------------------------------
# predictor plumbing


@dataclass
class Predictors:
    """Externally supplied predictions, scored instead of the baselines.

    match(dialogue, turn_index, manual) -> selected instruction ids.
    tag(dialogue, turn_index, call, instruction) -> tag sequence over
    the dialogue history tokens. respond(dialogue, turn_index) ->
    response text.
    """

    match: Callable[[Dialogue, int, Manual], set[str]]
    tag: Callable[[Dialogue, int, ApiCall, Instruction], list[str]]
    respond: Callable[[Dialogue, int], str]


def oracle_predictors() -> Predictors:
    """Echo the gold annotations back; every metric should saturate."""
    return Predictors(
        match=lambda dlg, i, manual: set(dlg.turns[i].selected_instructions),
        tag=lambda dlg, i, call, ins: gold_tags_for(dlg, i, call),
        respond=lambda dlg, i: dlg.turns[i].agent_response,
    )


def empty_predictors() -> Predictors:
    """Predict nothing anywhere; recall floors at zero."""
    return Predictors(
        match=lambda dlg, i, manual: set(),
        tag=lambda dlg, i, call, ins: ["O"] * len(dialogue_tokens(dlg, i)),
        respond=lambda dlg, i: "",
    )


# ---------------------------------------------------------------------------
# baseline fitting


@dataclass
class MatchingBaseline:
    matcher: LexicalMatcher
    thresholds: dict[str, float]
    dev_metrics: dict[str, dict[str, float]]


def fit_matching_baseline(
    corpus: EvalCorpus,
    train: Sequence[Dialogue],
    objectives: tuple[str, ...] = ("f1", "recall"),
) -> MatchingBaseline:
    guard_training(corpus, train)
    dev = corpus.split("dev")
    guard_training(corpus, dev)  # thresholds are fitted here too
    matcher = LexicalMatcher().fit(list(train), corpus.manuals)
    dev_golds = _turn_golds(dev)
    dev_scores = [
        matcher.score_turn(dlg, turn.index, corpus.manual_for(dlg))
        for dlg in dev for turn in dlg.turns
    ]
    thresholds: dict[str, float] = {}
    dev_metrics: dict[str, dict[str, float]] = {}
    busy = [i for i, g in enumerate(dev_golds) if g]
    for objective in objectives:
        t = pick_operating_point(dev_golds, dev_scores, objective=objective)
        # same uncapped predicate the threshold scan used
        preds = [{i for i, s in scores.items() if s >= t} for scores in dev_scores]
        p, r, f = set_prf([dev_golds[i] for i in busy], [preds[i] for i in busy])
        thresholds[objective] = t
        dev_metrics[objective] = {"precision": p, "recall": r, "f1": f}
    return MatchingBaseline(matcher, thresholds, dev_metrics)


def _fit_response_bank(train: Sequence[Dialogue]) -> dict[frozenset, str]:
    """Map each selected-instruction signature to one train response."""
    bank: dict[frozenset, str] = {}
    for dlg in train:
        for turn in dlg.turns:
            key = frozenset(turn.selected_instructions)
            if key and key not in bank and turn.agent_response:
                bank[key] = turn.agent_response
    return bank


def _retrieve_response(bank: dict[frozenset, str], selected: frozenset) -> str:
    if not selected:
        return ""
    if selected in bank:
        return bank[selected]
    best = None
    for key, resp in bank.items():
        overlap = len(key & selected)
        if not overlap:
            continue
        ranked = (overlap / len(key | selected), -len(key), resp)
        if best is None or ranked > best:
            best = ranked
    return best[2] if best else ""


# ---------------------------------------------------------------------------
# subtask evaluation


def run_subtask_eval(
    corpus: EvalCorpus,
    seed: int = 0,
    train_ids: Sequence[str] | None = None,
    predictors: Predictors | None = None,
    collect_turns: bool = False,
) -> dict[str, Any]:
    """Evaluate all three subtasks on the test split.

    Without predictors, fits the lexical baselines on the train split
    (optionally narrowed to train_ids) and reports two matching rows
    (thresholds picked for F1 and for recall) plus the with/without
    manual tagging rows. With predictors, scores the supplied decisions
    under a single "provided" row per subtask and fits nothing.
    """
    if train_ids is None:
        effective = list(corpus.splits["train"])
    else:
        unknown = [i for i in train_ids if i not in corpus.dialogues]
        if unknown:
            raise KeyError(f"unknown dialogue ids: {unknown[:3]}")
        effective = list(train_ids)
    train = [corpus.dialogues[i] for i in effective]
    test = corpus.split("test")

    payload: dict[str, Any] = {"op": "subtask_eval", "seed": seed}
    if predictors is None:
        payload["train"] = sorted(effective)
    else:
        payload["predictors"] = "external"
    report: dict[str, Any] = {
        "kind": "subtask_eval",
        "seed": seed,
        "config_hash": config_hash(payload),
        "counts": {
            "train_dialogues": len(train),
            "dev_dialogues": len(corpus.splits["dev"]),
            "test_dialogues": len(test),
            "test_turns": sum(len(d.turns) for d in test),
        },
    }

    golds = _turn_golds(test)
    pairs = _tag_pairs(corpus, test)
    report["counts"]["tag_pairs"] = len(pairs)
    flat_turns = [(dlg, turn) for dlg in test for turn in dlg.turns]

    if predictors is not None:
        match_preds = [predictors.match(dlg, turn.index, corpus.manual_for(dlg))
                       for dlg, turn in flat_turns]
        matching_rows = {"provided": _score_matching(golds, match_preds)}
        primary_preds = match_preds
        tag_preds = [predictors.tag(p.dialogue, p.turn_index, p.call, p.instruction)
                     for p in pairs]
        tagging_rows = {"provided": _score_tagging(pairs, tag_preds)}
        candidates = [predictors.respond(dlg, turn.index) for dlg, turn in flat_turns]
        generation_rows = {"provided": _score_generation(corpus, test, candidates)}
    else:
        baseline = fit_matching_baseline(corpus, train)
        matching_rows = {}
        primary_preds = []
        for name, objective in (("lexical", "f1"), ("lexical-rec", "recall")):
            t = baseline.thresholds[objective]
            preds = [baseline.matcher.predict_turn(dlg, turn.index,
                                                   corpus.manual_for(dlg), t)
                     for dlg, turn in flat_turns]
            row = _score_matching(golds, preds)
            row["threshold"] = t
            row["dev"] = baseline.dev_metrics[objective]
            matching_rows[name] = row
            if name == "lexical":
                primary_preds = preds
        tagging_rows = {}
        for name, use_instruction in (("with-manual", True), ("no-manual", False)):
            tagger = LexicalTagger(corpus.db, use_instruction=use_instruction)
            tag_preds = [tagger.tag(p.dialogue, p.turn_index,
                                    p.instruction if use_instruction else None)
                         for p in pairs]
            tagging_rows[name] = _score_tagging(pairs, tag_preds)
        bank = _fit_response_bank(train)
        candidates = [_retrieve_response(bank, frozenset(turn.selected_instructions))
                      for _, turn in flat_turns]
        generation_rows = {"retrieval": _score_generation(corpus, test, candidates)}

    report["matching"] = {"rows": matching_rows}
    report["tagging"] = {"rows": tagging_rows}
    report["generation"] = {"rows": generation_rows}

    if collect_turns:
        matching_records = [
            {
                "dialogue": dlg.id,
                "turn": turn.index,
                "gold": sorted(g),
                "predicted": sorted(p),
                "correct": g == p,
            }
            for (dlg, turn), g, p in zip(flat_turns, golds, primary_preds)
        ]
        report["turns"] = {"matching": matching_records}
    return report


# ---------------------------------------------------------------------------
# sweeps


def sweep_data_size(
    corpus: EvalCorpus,
    fractions: Sequence[float] = (0.2, 0.4, 0.6, 0.8, 1.0),
    seed: int = 0,
) -> dict[str, Any]:
    """Refit on nested subsets of the train split, one point per fraction."""
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ValueError(f"fraction out of range (0, 1]: {f}")
    order = list(corpus.splits["train"])
    _rng(seed, "data-size").shuffle(order)
    points = []
    for f in sorted(fractions):
        k = max(1, round(f * len(order)))
        sub = sorted(order[:k])  # nested: every larger fraction contains this one
        rep = run_subtask_eval(corpus, seed=seed, train_ids=sub)
        points.append({
            "fraction": f,
            "train_dialogues": k,
            "matching_accuracy": rep["matching"]["rows"]["lexical"]["accuracy"],
            "matching_f1": rep["matching"]["rows"]["lexical"]["f1"],
            "tagging_f1": rep["tagging"]["rows"]["with-manual"]["f1"],
            "config_hash": rep["config_hash"],
        })
    return {
        "kind": "data_size_sweep",
        "seed": seed,
        "config_hash": config_hash({"op": "data_size_sweep", "seed": seed,
                                    "fractions": sorted(fractions)}),
        "points": points,
    }


def sweep_manual_count(
    corpus: EvalCorpus,
    counts: Sequence[int] = (2, 4, 6, 8),
    seed: int = 0,
) -> dict[str, Any]:
    """Refit on train dialogues from k manuals, one point per count.

    Logs the manual set behind each point; the sets are drawn from the
    train partition only, so they stay disjoint from the test manuals.
    """
    available = list(corpus.train_manuals)
    for k in counts:
        if not 0 < k <= len(available):
            raise ValueError(f"manual count out of range: {k}")
    order = available[:]
    _rng(seed, "manual-count").shuffle(order)
    train = corpus.split("train")
    points = []
    for k in sorted(counts):
        allowed = sorted(order[:k])
        sub = [d.id for d in train if d.manual_id in allowed]
        rep = run_subtask_eval(corpus, seed=seed, train_ids=sub)
        points.append({
            "manual_count": k,
            "manuals": allowed,
            "train_dialogues": len(sub),
            "matching_accuracy": rep["matching"]["rows"]["lexical"]["accuracy"],
            "matching_f1": rep["matching"]["rows"]["lexical"]["f1"],
            "tagging_f1": rep["tagging"]["rows"]["with-manual"]["f1"],
            "config_hash": rep["config_hash"],
        })
    return {
        "kind": "manual_count_sweep",
        "seed": seed,
        "config_hash": config_hash({"op": "manual_count_sweep", "seed": seed,
                                    "counts": sorted(counts)}),
        "points": points,
    }


def leave_one_domain_out(corpus: EvalCorpus, seed: int = 0) -> dict[str, Any]:
    """Drop every train dialogue touching one domain, note what breaks.

    One row per excluded domain plus a "full" row with nothing dropped.
    Columns give matching F1 restricted to each domain's instructions
    over test turns that have gold selections in that domain.
    """
    domains = list(corpus.db.domains())
    id_domain: dict[str, str] = {}
    for manual in corpus.manuals.values():
        for ins in manual.instructions:
            id_domain[ins.id] = ins.domain

    train = corpus.split("train")
    rows = []
    for excluded in ["none"] + domains:
        if excluded == "none":
            sub = None
            n_train = len(train)
        else:
            sub = [d.id for d in train if excluded not in d.goal.domains()]
            n_train = len(sub)
        rep = run_subtask_eval(corpus, seed=seed, train_ids=sub, collect_turns=True)
        records = rep["turns"]["matching"]
        per_domain: dict[str, float | None] = {}
        for domain in domains:
            golds, preds = [], []
            for rec in records:
                g = {i for i in rec["gold"] if id_domain.get(i) == domain}
                if not g:
                    continue
                p = {i for i in rec["predicted"] if id_domain.get(i) == domain}
                golds.append(g)
                preds.append(p)
            per_domain[domain] = set_prf(golds, preds)[2] if golds else None
        rows.append({
            "excluded": excluded,
            "train_dialogues": n_train,
            "overall_f1": rep["matching"]["rows"]["lexical"]["f1"],
            "per_domain_f1": per_domain,
            "config_hash": rep["config_hash"],
        })
    return {
        "kind": "domain_holdout",
        "seed": seed,
        "config_hash": config_hash({"op": "domain_holdout", "seed": seed}),
        "rows": rows,
    }
