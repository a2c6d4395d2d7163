import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgdial.dbgen import build_database
from mgdial.goals import sample_goals
from mgdial.model import Constraint, Request, UserGoal, validate_dialogue
from mgdial.seedpack import build_manual_pack
from mgdial.simulator import (
    SimConfig,
    SimulationError,
    build_script,
    corpus_stats,
    generate_corpus,
    simulate_dialogue,
    simulate_model_dialogue,
)
from mgdial.text import similarity


@pytest.fixture(scope="module")
def db():
    return build_database(0)


@pytest.fixture(scope="module")
def manuals():
    return build_manual_pack(14)


@pytest.fixture(scope="module")
def goals(db):
    return sample_goals(db, 40, seed=11)


@pytest.fixture(scope="module")
def played(db, manuals, goals):
    return [simulate_dialogue(db, manuals[i % 10], g, f"d{i:04d}", 500 + i)
            for i, g in enumerate(goals)]


def test_single_goal_single_manual(db, manuals, goals):
    d = simulate_dialogue(db, manuals[0], goals[0], "solo", seed=3)
    assert d.completed
    assert 1 <= len(d.turns) <= 20
    assert validate_dialogue(d, manuals[0]) == []


def test_every_dialogue_completes_and_validates(played, manuals):
    by_id = {m.id: m for m in manuals}
    for d in played:
        assert d.completed
        assert validate_dialogue(d, by_id[d.manual_id]) == []


def test_deterministic_given_seed(db, manuals, goals):
    a = simulate_dialogue(db, manuals[1], goals[2], "dx", seed=77)
    b = simulate_dialogue(db, manuals[1], goals[2], "dx", seed=77)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
    c = simulate_dialogue(db, manuals[1], goals[2], "dx", seed=78)
    assert json.dumps(c.to_dict(), sort_keys=True) != json.dumps(a.to_dict(), sort_keys=True)


def test_turn_cap_rejects_oversized_scripts(db, goals):
    config = SimConfig(max_turns=3)
    big = next(g for g in goals if len(g.domains()) >= 2)
    with pytest.raises(SimulationError):
        build_script(big, db, seed=5, config=config)


def test_every_arg_has_a_located_span(played):
    """The simulator realizes values verbatim, so annotation never misses."""
    checked = 0
    for d in played:
        for t in d.turns:
            for call in t.api_calls:
                for arg in call.args:
                    assert arg.span is not None, (d.id, t.index, arg)
                    turn = d.turns[arg.span.turn]
                    text = (turn.user_utterance if arg.span.speaker == "user"
                            else turn.agent_response)
                    surface = text[arg.span.start:arg.span.end]
                    assert similarity(surface, arg.value) >= 0.8
                    checked += 1
    assert checked > 100


def test_selection_cap_and_known_ids(played, manuals):
    by_id = {m.id: m for m in manuals}
    for d in played:
        known = {ins.id for ins in by_id[d.manual_id].instructions}
        for t in d.turns:
            assert len(t.selected_instructions) <= 10
            assert set(t.selected_instructions) <= known


def test_silent_turns_carry_no_calls(played):
    for d in played:
        for t in d.turns:
            if not t.selected_instructions:
                assert not t.api_calls


def _taxi_goal(db):
    places = list(db.lexicons["taxi"]["departure"])
    when = db.lexicons["taxi"]["leave"][0]
    return UserGoal("taxi-only", (
        Constraint("taxi", "departure", places[0]),
        Constraint("taxi", "destination", places[1]),
        Constraint("taxi", "leave", when),
    ), (Request("taxi", "reference num."),), ("taxi",))


def test_taxi_gathers_then_books(db, manuals):
    d = simulate_dialogue(db, manuals[0], _taxi_goal(db), "cab", seed=9,
                          config=SimConfig(p_greet=0.0, p_event=0.0))
    route, order = d.turns[0], d.turns[1]
    assert route.selected_instructions == ("taxi-book-leave",)
    assert not route.api_calls  # still waiting on the pickup time
    assert "?" in route.agent_response
    assert order.selected_instructions == ("taxi-book-leave",)
    assert len(order.api_calls) == 1
    call = order.api_calls[0]
    assert [a.attr for a in call.args] == ["departure", "destination", "leave"]
    assert order.api_results[0].reference
    assert order.api_results[0].reference in order.agent_response


def test_cross_domain_turn_selects_two_instructions(db, manuals):
    hotel = db.entities_in("hotel")[5]
    rest = db.entities_in("restaurant")[5]
    goal = UserGoal("pairup", (
        Constraint("hotel", "area", hotel.values["area"]),
        Constraint("restaurant", "food", rest.values["food"]),
    ), (Request("hotel", "phone"), Request("restaurant", "phone")), ())
    d = simulate_dialogue(db, manuals[0], goal, "cross", seed=4,
                          config=SimConfig(p_greet=0.0, p_cross=1.0, p_event=0.0))
    seam = d.turns[0]
    assert set(seam.selected_instructions) == {"hotel-search-area",
                                               "restaurant-search-food"}
    assert len(seam.api_calls) == 2
    domains = {c.api.domain for c in seam.api_calls}
    assert domains == {"hotel", "restaurant"}


def test_booking_combo_turn_and_cross_turn_name_span(db, manuals):
    hotel = db.entities_in("hotel")[12]
    goal = UserGoal("combo", (
        Constraint("hotel", "area", hotel.values["area"]),
        Constraint("hotel", "day", "tuesday"),
        Constraint("hotel", "people", "2 people"),
        Constraint("hotel", "stay", "2 nights"),
    ), (Request("hotel", "phone"), Request("hotel", "reference num.")), ("hotel",))
    d = simulate_dialogue(db, manuals[2], goal, "combo", seed=21,
                          config=SimConfig(p_greet=0.0, p_combo=1.0, p_event=0.0))
    combo = next(t for t in d.turns
                 if set(t.selected_instructions) == {"hotel-answer-phone", "hotel-book"})
    assert len(combo.api_calls) == 1  # the booking is still gathering here
    booked = next(t for t in d.turns
                  if any(c.api.operation == "add" for c in t.api_calls))
    call = next(c for c in booked.api_calls if c.api.operation == "add")
    name_arg = next(a for a in call.args if a.attr == "name")
    # the booked place was never named in the booking turn itself: the
    # span reaches back to where the agent recommended it
    assert name_arg.span.turn < booked.index


def test_corpus_partition_and_manifest(db, manuals):
    goals = sample_goals(db, 12, seed=3)
    bundle = generate_corpus(db, manuals[:3], goals, seed=5,
                             train_manuals=2, split_sizes=(8, 2, 2))
    assert {k: len(v) for k, v in bundle.splits.items()} == {"train": 8, "dev": 2, "test": 2}
    test_ids = set(bundle.splits["test"])
    for d in bundle.dialogues:
        if d.id in test_ids:
            assert d.manual_id == manuals[2].id
        else:
            assert d.manual_id in (manuals[0].id, manuals[1].id)
    m = bundle.manifest
    assert m["manual_partition"] == {"train": ["m00", "m01"], "test": ["m02"]}
    assert m["stats"]["overall"]["dialogues"] == 12
    assert m["failures"] == []


def test_corpus_bytes_reproducible(db, manuals):
    goals = sample_goals(db, 6, seed=8)
    one = generate_corpus(db, manuals[:2], goals, seed=2, train_manuals=1,
                          split_sizes=(4, 1, 1))
    two = generate_corpus(db, manuals[:2], goals, seed=2, train_manuals=1,
                          split_sizes=(4, 1, 1))
    blob = lambda b: json.dumps([d.to_dict() for d in b.dialogues], sort_keys=True)
    assert blob(one) == blob(two)
    assert json.dumps(one.manifest, sort_keys=True) == json.dumps(two.manifest, sort_keys=True)


def test_corpus_goal_count_mismatch(db, manuals):
    goals = sample_goals(db, 5, seed=8)
    with pytest.raises(ValueError):
        generate_corpus(db, manuals[:2], goals, train_manuals=1,
                        split_sizes=(4, 1, 1))


def test_stats_bands_on_midsize_sample(db, manuals):
    goals = sample_goals(db, 150, seed=42)
    dialogues = [simulate_dialogue(db, manuals[i % 10], g, f"s{i:04d}", 900 + i)
                 for i, g in enumerate(goals)]
    s = corpus_stats(dialogues)
    assert 4 <= s["mean_turns"] <= 8
    assert 1.0 <= s["mean_instructions_per_turn"] <= 2.0
    assert 0.8 <= s["mean_args_per_turn"] <= 1.6
    assert 0.10 <= s["no_instruction_share"] <= 0.30


def test_model_mode_empty_predictor_flags_turns(db, manuals, goals):
    silent = lambda history, manual, turn_index: []
    d = simulate_model_dialogue(db, manuals[0], goals[1], "mm", seed=6,
                                predict_turn=silent)
    assert not d.completed
    # every working turn is flagged; the closing farewell is exempt
    assert all(t.needs_review for t in d.turns[1:-1])
    assert not d.turns[-1].needs_review


def test_model_mode_sloppy_predictor_survives(db, manuals, goals):
    def scattergun(history, manual, turn_index):
        return [(ins.id, {}) for ins in manual.instructions[:12]]

    d = simulate_model_dialogue(db, manuals[0], goals[3], "mm2", seed=6,
                                predict_turn=scattergun)
    for t in d.turns:
        assert len(t.selected_instructions) <= 10
        assert t.agent_response
    assert not d.completed


_DB = build_database(0)
_MANUALS = build_manual_pack(14)
_GOALS = sample_goals(_DB, 10, seed=19)


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32))
def test_any_seed_plays_out(seed):
    d = simulate_dialogue(_DB, _MANUALS[seed % 10], _GOALS[seed % len(_GOALS)],
                          f"h{seed}", seed=seed)
    assert d.completed
    assert len(d.turns) <= 20
