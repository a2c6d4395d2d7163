import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgdial.dbgen import build_database
from mgdial.goals import sample_goals
from mgdial.harness import (
    EvalCorpus,
    SplitLeakageError,
    config_hash,
    empty_predictors,
    expected_values_for_turn,
    fit_matching_baseline,
    leave_one_domain_out,
    oracle_predictors,
    run_subtask_eval,
    sweep_data_size,
    sweep_manual_count,
)
from mgdial.seedpack import build_manual_pack
from mgdial.simulator import generate_corpus
from mgdial.text import find_in_text


@pytest.fixture(scope="module")
def db():
    return build_database(0)


@pytest.fixture(scope="module")
def manuals():
    return build_manual_pack(14)


@pytest.fixture(scope="module")
def corpus(db, manuals):
    goals = sample_goals(db, 150, seed=4)
    bundle = generate_corpus(db, manuals, goals, seed=4,
                             split_sizes=(120, 15, 15))
    return EvalCorpus.from_bundle(db, manuals, bundle)


@pytest.fixture(scope="module")
def fitted_report(corpus):
    return run_subtask_eval(corpus, seed=0)


def test_report_shape(corpus, fitted_report):
    rep = fitted_report
    assert rep["kind"] == "subtask_eval"
    assert set(rep["matching"]["rows"]) == {"lexical", "lexical-rec"}
    assert set(rep["tagging"]["rows"]) == {"with-manual", "no-manual"}
    assert set(rep["generation"]["rows"]) == {"retrieval"}
    assert rep["counts"]["train_dialogues"] == 120
    assert rep["counts"]["test_dialogues"] == 15
    assert rep["counts"]["test_turns"] == sum(
        len(d.turns) for d in corpus.split("test"))
    assert len(rep["config_hash"]) == 16
    int(rep["config_hash"], 16)
    for row in rep["matching"]["rows"].values():
        assert 0.0 <= row["threshold"] <= 1.0
        for key in ("accuracy", "precision", "recall", "f1"):
            assert 0.0 <= row[key] <= 1.0


def test_oracle_predictions_saturate(corpus):
    rep = run_subtask_eval(corpus, predictors=oracle_predictors())
    m = rep["matching"]["rows"]["provided"]
    assert m["accuracy"] == 1.0 and m["f1"] == 1.0
    t = rep["tagging"]["rows"]["provided"]
    assert t["token_accuracy"] == 1.0 and t["f1"] == 1.0
    g = rep["generation"]["rows"]["provided"]
    assert g["bleu"] == pytest.approx(1.0, abs=1e-12)
    assert g["aer"] == 0.0


def test_empty_predictions_floor_at_zero_recall(corpus):
    rep = run_subtask_eval(corpus, predictors=empty_predictors())
    assert rep["matching"]["rows"]["provided"]["recall"] == 0.0
    assert rep["matching"]["rows"]["provided"]["f1"] == 0.0
    assert rep["tagging"]["rows"]["provided"]["recall"] == 0.0


def test_manual_ablation_costs_tagging_f1(fitted_report):
    rows = fitted_report["tagging"]["rows"]
    assert rows["with-manual"]["f1"] >= rows["no-manual"]["f1"] + 0.10


def test_recall_objective_dominates_dev_recall(fitted_report):
    rows = fitted_report["matching"]["rows"]
    assert (rows["lexical-rec"]["dev"]["recall"]
            >= rows["lexical"]["dev"]["recall"])


def test_held_out_manual_dialogue_cannot_be_trained_on(corpus):
    test_id = corpus.splits["test"][0]
    with pytest.raises(SplitLeakageError):
        run_subtask_eval(corpus, train_ids=[test_id])


def test_fit_guard_names_the_offender(corpus):
    leaked = corpus.dialogues[corpus.splits["test"][3]]
    with pytest.raises(SplitLeakageError, match=leaked.id):
        fit_matching_baseline(corpus, [leaked])


def test_unknown_train_id_rejected(corpus):
    with pytest.raises(KeyError):
        run_subtask_eval(corpus, train_ids=["no-such-dialogue"])


def test_expected_values_all_appear_in_gold_response(corpus):
    checked = 0
    for dlg in corpus.split("test"):
        manual = corpus.manual_for(dlg)
        for turn in dlg.turns:
            for value in expected_values_for_turn(corpus.db, manual, dlg, turn.index):
                assert find_in_text(turn.agent_response, value) is not None
                checked += 1
    assert checked > 50


def test_turn_records_cover_the_test_split(corpus):
    rep = run_subtask_eval(corpus, predictors=oracle_predictors(),
                           collect_turns=True)
    records = rep["turns"]["matching"]
    assert len(records) == rep["counts"]["test_turns"]
    test_ids = set(corpus.splits["test"])
    assert {r["dialogue"] for r in records} == test_ids
    assert all(r["correct"] for r in records)  # oracle echoes gold


def test_data_sweep_rejects_bad_fractions(corpus):
    for bad in (0.0, -0.5, 1.0001, 2.0):
        with pytest.raises(ValueError):
            sweep_data_size(corpus, fractions=(0.5, bad))


def test_data_sweep_points_are_nested_and_ordered(corpus):
    sweep = sweep_data_size(corpus, fractions=(0.25, 0.5, 1.0), seed=0)
    points = sweep["points"]
    assert [p["fraction"] for p in points] == [0.25, 0.5, 1.0]
    sizes = [p["train_dialogues"] for p in points]
    assert sizes == sorted(sizes)
    assert sizes[-1] == 120


def test_full_fraction_point_matches_plain_eval(corpus, fitted_report):
    sweep = sweep_data_size(corpus, fractions=(1.0,), seed=0)
    point = sweep["points"][0]
    lexical = fitted_report["matching"]["rows"]["lexical"]
    assert point["matching_f1"] == lexical["f1"]
    assert point["matching_accuracy"] == lexical["accuracy"]
    assert point["config_hash"] == fitted_report["config_hash"]


def test_data_sweep_deterministic(corpus):
    a = sweep_data_size(corpus, fractions=(0.3, 0.6), seed=9)
    b = sweep_data_size(corpus, fractions=(0.3, 0.6), seed=9)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_manual_sweep_rejects_bad_counts(corpus):
    with pytest.raises(ValueError):
        sweep_manual_count(corpus, counts=(0,))
    with pytest.raises(ValueError):
        sweep_manual_count(corpus, counts=(len(corpus.train_manuals) + 1,))


def test_manual_sweep_logs_disjoint_manual_sets(corpus):
    sweep = sweep_manual_count(corpus, counts=(2, 4), seed=0)
    train_pool = set(corpus.train_manuals)
    for point in sweep["points"]:
        logged = set(point["manuals"])
        assert len(logged) == point["manual_count"]
        assert logged <= train_pool
        assert not logged & corpus.test_manuals
    first, second = sweep["points"]
    assert set(first["manuals"]) <= set(second["manuals"])


def test_domain_holdout_matrix(corpus):
    lodo = leave_one_domain_out(corpus, seed=0)
    rows = {r["excluded"]: r for r in lodo["rows"]}
    assert "none" in rows
    domains = set(corpus.db.domains())
    assert domains <= set(rows)

    full = rows["none"]
    assert full["train_dialogues"] == 120

    train = corpus.split("train")
    for domain in domains:
        row = rows[domain]
        kept = [d for d in train if domain not in d.goal.domains()]
        assert row["train_dialogues"] == len(kept)
        assert all(domain not in d.goal.domains() for d in kept)
        # dropping a domain's training data must not help that domain
        own = row["per_domain_f1"][domain]
        base = full["per_domain_f1"][domain]
        if own is not None and base is not None:
            assert own <= base + 1e-9


def test_domain_holdout_full_row_matches_plain_eval(corpus, fitted_report):
    lodo = leave_one_domain_out(corpus, seed=0)
    full = next(r for r in lodo["rows"] if r["excluded"] == "none")
    assert full["overall_f1"] == fitted_report["matching"]["rows"]["lexical"]["f1"]
    assert full["config_hash"] == fitted_report["config_hash"]


@settings(max_examples=30, deadline=None)
@given(st.permutations(["seed", "op", "train", "extra"]))
def test_config_hash_ignores_key_order(keys):
    values = {"seed": 3, "op": "x", "train": ["a", "b"], "extra": 1.5}
    payload = {k: values[k] for k in keys}
    assert config_hash(payload) == config_hash(values)


def test_config_hash_separates_train_subsets(corpus):
    a = run_subtask_eval(corpus, train_ids=list(corpus.splits["train"][:30]))
    b = run_subtask_eval(corpus, train_ids=list(corpus.splits["train"][:31]))
    assert a["config_hash"] != b["config_hash"]
