import json
import threading
import urllib.error
import urllib.request

import pytest

from mgdial.dbgen import build_database
from mgdial.goals import sample_goals
from mgdial.model import validate_dialogue
from mgdial.seedpack import build_manual_pack
from mgdial.service import (
    AuthError,
    CollectionService,
    NotFoundError,
    SequencingError,
    ValidationError,
    make_server,
)


@pytest.fixture(scope="module")
def db():
    return build_database(0)


@pytest.fixture(scope="module")
def manuals():
    return build_manual_pack(14)


@pytest.fixture()
def service(db, manuals):
    return CollectionService(db, manuals, goals=sample_goals(db, 5, seed=2))


CHECKLIST = "[constraint] hotel | area = north\n[request] hotel | phone"


def run_hotel_session(service, manual_id="m00"):
    """Drive one clean two-turn session through the in-process API."""
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id=manual_id)
    sid = handle["session_id"]
    ut, at = handle["user_token"], handle["agent_token"]

    service.post_user_message(sid, ut, "I need a hotel in the north, please.")
    service.select_instructions(sid, at, ["hotel-search-area"])
    out = service.submit_api_call(sid, at, "hotel-search-area", {"area": "north"})
    name = out["result"]["entity_names"][0]
    service.post_agent_message(sid, at, f"How about {name}? It is in the north.")

    service.post_user_message(sid, ut, f"What is the phone number of {name}?")
    service.select_instructions(sid, at, ["hotel-answer-phone"])
    out = service.submit_api_call(sid, at, "hotel-answer-phone", {"name": name})
    phone = out["result"]["attributes"]["phone"]
    service.post_agent_message(sid, at, f"The phone number is {phone}.")

    service.update_checklist(sid, ut, 0, True)
    service.update_checklist(sid, ut, 1, True)
    return sid, ut, at


def test_happy_path_finalizes_and_exports(service, manuals):
    sid, ut, at = run_hotel_session(service)
    out = service.finalize(sid, ut)
    assert out == {"status": "finalized", "problems": []}

    export = service.export_corpus()
    lines = export.splitlines()
    assert len(lines) == 1
    doc = json.loads(lines[0])
    assert doc["kind"] == "dialogue"
    assert doc["id"] == sid
    assert len(doc["turns"]) == 2
    # finalize ran the annotator: every logged arg got a span
    for turn in doc["turns"]:
        for call in turn["api_calls"]:
            assert all("span" in a for a in call["args"])


def test_alternation_is_strict(service):
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id="m00")
    sid, ut, at = handle["session_id"], handle["user_token"], handle["agent_token"]

    with pytest.raises(SequencingError):
        service.post_agent_message(sid, at, "hello?")  # user has not spoken
    with pytest.raises(SequencingError):
        service.select_instructions(sid, at, [])
    service.post_user_message(sid, ut, "Hi there.")
    with pytest.raises(SequencingError):
        service.post_user_message(sid, ut, "Hello again?")  # agent's move
    with pytest.raises(SequencingError):
        service.finalize(sid, ut)  # mid-turn
    service.select_instructions(sid, at, [])
    service.post_agent_message(sid, at, "Hello! How can I help?")
    with pytest.raises(SequencingError):
        service.post_agent_message(sid, at, "Anyone there?")


def test_empty_selection_flags_turn(service):
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id="m00")
    sid, ut, at = handle["session_id"], handle["user_token"], handle["agent_token"]
    service.post_user_message(sid, ut, "Good morning!")
    out = service.select_instructions(sid, at, [])
    assert out["flagged_for_review"] is True
    service.post_agent_message(sid, at, "Good morning, how can I help?")
    view = service.agent_view(sid, at)
    assert view["transcript"][0]["needs_review"] is True


def test_selection_limits(service):
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id="m00")
    sid, ut, at = handle["session_id"], handle["user_token"], handle["agent_token"]
    service.post_user_message(sid, ut, "I want everything at once.")

    manual_ids = [ins.id for m in [service.manuals["m00"]] for ins in m.instructions]
    with pytest.raises(ValidationError, match="max 10"):
        service.select_instructions(sid, at, manual_ids[:11])
    with pytest.raises(ValidationError, match="duplicate"):
        service.select_instructions(sid, at, ["hotel-search-area"] * 2)
    with pytest.raises(ValidationError, match="unknown instruction"):
        service.select_instructions(sid, at, ["no-such-instruction"])
    # ten is still fine
    out = service.select_instructions(sid, at, manual_ids[:10])
    assert len(out["selected"]) == 10


def test_call_requires_selection(service):
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id="m00")
    sid, ut, at = handle["session_id"], handle["user_token"], handle["agent_token"]
    service.post_user_message(sid, ut, "Find me a hotel in the north.")
    with pytest.raises(ValidationError, match="not selected"):
        service.submit_api_call(sid, at, "hotel-search-area", {"area": "north"})
    service.select_instructions(sid, at, ["hotel-search-area"])
    with pytest.raises(ValidationError, match="unknown arguments"):
        service.submit_api_call(sid, at, "hotel-search-area", {"bogus": "x"})
    with pytest.raises(SequencingError, match="reselect"):
        service.submit_api_call(sid, at, "hotel-search-area", {"area": "north"})
        service.select_instructions(sid, at, ["hotel-search-price"])


def test_rejected_call_leaves_no_trace(service):
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id="m00")
    sid, ut, at = handle["session_id"], handle["user_token"], handle["agent_token"]
    service.post_user_message(sid, ut, "Book the crimson falcon inn for me.")
    service.select_instructions(sid, at, ["hotel-book"])
    events_before = len(service.events)
    with pytest.raises(ValidationError, match="missing required"):
        service.submit_api_call(sid, at, "hotel-book",
                                {"name": "crimson falcon inn"})
    assert len(service.events) == events_before
    view = service.agent_view(sid, at)
    assert view["pending"]["calls"] == []


def test_failed_lookup_is_still_logged(service):
    # a well-formed call that finds nothing ran for real: it stays in the log
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id="m00")
    sid, ut, at = handle["session_id"], handle["user_token"], handle["agent_token"]
    service.post_user_message(sid, ut, "Change my booking to Tuesday.")
    service.select_instructions(sid, at, ["hotel-change-day"])
    out = service.submit_api_call(sid, at, "hotel-change-day",
                                  {"reference num.": "00000000", "day": "tuesday"})
    assert out["result"]["ok"] is False
    view = service.agent_view(sid, at)
    assert len(view["pending"]["calls"]) == 1


def test_tokens_separate_the_views(service):
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id="m00")
    sid, ut, at = handle["session_id"], handle["user_token"], handle["agent_token"]

    with pytest.raises(AuthError):
        service.manual_view(sid, ut)  # user may never fetch the manual
    with pytest.raises(AuthError):
        service.checklist_view(sid, at)  # agent may never fetch the checklist
    with pytest.raises(AuthError):
        service.search_instructions(sid, ut, "hotel")
    with pytest.raises(AuthError):
        service.post_user_message(sid, at, "impostor")
    with pytest.raises(AuthError):
        service.user_view(sid, "not-a-token")

    user = service.user_view(sid, ut)
    assert "manual" not in json.dumps(user)
    agent = service.agent_view(sid, at)
    blob = json.dumps(agent)
    assert "checklist" not in blob and "constraint" not in blob


def test_manual_and_search_are_agent_only_reads(service):
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id="m03")
    sid, at = handle["session_id"], handle["agent_token"]
    manual = service.manual_view(sid, at)["manual"]
    assert manual["id"] == "m03"
    hits = service.search_instructions(sid, at, "hotel in the north area")["hits"]
    assert hits and any(h["id"].startswith("hotel-search") for h in hits)


def test_unknown_session_404(service):
    with pytest.raises(NotFoundError):
        service.user_view("s9999", "whatever")


def test_finalize_failure_and_repair(service):
    sid, ut, at = run_hotel_session(service)
    service.update_checklist(sid, ut, 1, False)  # forgot the phone item
    out = service.finalize(sid, ut)
    assert out["status"] == "failed"
    assert any("unchecked" in p for p in out["problems"])
    assert service.export_corpus() == ""

    with pytest.raises(SequencingError):
        service.post_user_message(sid, ut, "hello?")  # failed is not open

    assert service.reopen(sid, ut)["status"] == "open"
    service.update_checklist(sid, ut, 1, True)
    out = service.finalize(sid, ut)
    assert out["status"] == "finalized"
    assert service.export_corpus() != ""


def test_finalize_catches_unsaid_arguments(service):
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id="m00")
    sid, ut, at = handle["session_id"], handle["user_token"], handle["agent_token"]
    service.post_user_message(sid, ut, "I need a room somewhere nice.")
    service.select_instructions(sid, at, ["hotel-search-area"])
    service.submit_api_call(sid, at, "hotel-search-area", {"area": "north"})
    service.post_agent_message(sid, at, "There are options.")
    service.update_checklist(sid, ut, 0, True)
    service.update_checklist(sid, ut, 1, True)
    out = service.finalize(sid, ut)
    assert out["status"] == "failed"
    assert any("never said" in p for p in out["problems"])


def test_finalize_requires_booked_domains(service, db):
    handle = service.create_session(
        goal_checklist="[constraint] hotel | area = north\n[booking] hotel",
        manual_id="m00")
    sid, ut, at = handle["session_id"], handle["user_token"], handle["agent_token"]
    service.post_user_message(sid, ut, "A hotel in the north please.")
    service.select_instructions(sid, at, ["hotel-search-area"])
    service.submit_api_call(sid, at, "hotel-search-area", {"area": "north"})
    service.post_agent_message(sid, at, "Sure, there are several.")
    for i in range(2):
        service.update_checklist(sid, ut, i, True)
    out = service.finalize(sid, ut)
    assert out["status"] == "failed"
    assert any("no successful booking" in p for p in out["problems"])


def test_replay_reproduces_export(service, db, manuals):
    sid, ut, at = run_hotel_session(service)
    service.finalize(sid, ut)
    original = service.export_corpus()

    replayed = CollectionService.replay(db, manuals, service.events)
    assert replayed.export_corpus() == original
    # and the replayed service still accepts the old tokens
    assert replayed.user_view(sid, ut)["status"] == "finalized"


def test_interleaved_sessions_do_not_interact(db, manuals):
    solo = CollectionService(db, manuals, goals=[])
    run_hotel_session(solo)
    sid, ut, _ = "s0000", solo._sessions["s0000"].user_token, None
    solo.finalize(sid, ut)
    baseline = solo.export_corpus()

    duet = CollectionService(db, manuals, goals=[])
    a = duet.create_session(goal_checklist=CHECKLIST, manual_id="m00")
    b = duet.create_session(goal_checklist=CHECKLIST, manual_id="m00")

    def step(handle, text_u, ins, args, text_a):
        s, u, t = handle["session_id"], handle["user_token"], handle["agent_token"]
        duet.post_user_message(s, u, text_u)
        duet.select_instructions(s, t, [ins])
        out = duet.submit_api_call(s, t, ins, args)
        duet.post_agent_message(s, t, text_a(out["result"]))
        return out["result"]

    ra = step(a, "I need a hotel in the north, please.", "hotel-search-area",
              {"area": "north"},
              lambda r: f"How about {r['entity_names'][0]}? It is in the north.")
    rb = step(b, "I need a hotel in the north, please.", "hotel-search-area",
              {"area": "north"},
              lambda r: f"How about {r['entity_names'][0]}? It is in the north.")
    name_a, name_b = ra["entity_names"][0], rb["entity_names"][0]
    step(a, f"What is the phone number of {name_a}?", "hotel-answer-phone",
         {"name": name_a}, lambda r: f"The phone number is {r['attributes']['phone']}.")
    step(b, f"What is the phone number of {name_b}?", "hotel-answer-phone",
         {"name": name_b}, lambda r: f"The phone number is {r['attributes']['phone']}.")
    for handle in (a, b):
        s, u = handle["session_id"], handle["user_token"]
        duet.update_checklist(s, u, 0, True)
        duet.update_checklist(s, u, 1, True)
        duet.finalize(s, u)

    lines = duet.export_corpus().splitlines()
    assert len(lines) == 2
    assert lines[0] + "\n" == baseline  # session a unchanged by b


def test_turn_limit_enforced(service):
    handle = service.create_session(goal_checklist=CHECKLIST, manual_id="m00")
    sid, ut, at = handle["session_id"], handle["user_token"], handle["agent_token"]
    for i in range(20):
        service.post_user_message(sid, ut, f"Ping {i}.")
        service.select_instructions(sid, at, [])
        service.post_agent_message(sid, at, f"Pong {i}.")
    with pytest.raises(SequencingError, match="turn limit"):
        service.post_user_message(sid, ut, "One more?")


def test_exported_dialogue_validates(service, manuals):
    sid, ut, at = run_hotel_session(service)
    service.finalize(sid, ut)
    from mgdial.model import Dialogue

    doc = json.loads(service.export_corpus().splitlines()[0])
    doc.pop("schema_version")
    doc.pop("kind")
    dlg = Dialogue.from_dict(doc)
    manual = next(m for m in manuals if m.id == dlg.manual_id)
    assert validate_dialogue(dlg, manual) == []


# -- HTTP layer -------------------------------------------------------------


@pytest.fixture()
def server(db, manuals):
    svc = CollectionService(db, manuals, goals=sample_goals(db, 3, seed=7))
    httpd = make_server(svc)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    host, port = httpd.server_address[:2]
    yield svc, f"http://{host}:{port}"
    httpd.shutdown()
    httpd.server_close()
    thread.join(timeout=5)


def _request(base, method, path, token="", body=None):
    req = urllib.request.Request(base + path, method=method)
    if token:
        req.add_header("x-collect-token", token)
    data = None
    if body is not None:
        data = json.dumps(body).encode("utf-8")
        req.add_header("content-type", "application/json")
    try:
        with urllib.request.urlopen(req, data=data, timeout=10) as resp:
            return resp.status, resp.read().decode("utf-8")
    except urllib.error.HTTPError as e:
        return e.code, e.read().decode("utf-8")


def test_http_session_round_trip(server):
    svc, base = server
    status, raw = _request(base, "POST", "/v1/sessions",
                           body={"goal_checklist": CHECKLIST, "manual_id": "m01"})
    assert status == 200
    created = json.loads(raw)
    assert created["v"] == 1
    sid, ut, at = created["session_id"], created["user_token"], created["agent_token"]

    status, _ = _request(base, "POST", f"/v1/sessions/{sid}/user/messages",
                         token=ut, body={"text": "A hotel in the north please."})
    assert status == 200
    status, raw = _request(base, "GET", f"/v1/sessions/{sid}/search?q=hotel+north",
                           token=at)
    assert status == 200 and "hits" in json.loads(raw)
    status, _ = _request(base, "POST", f"/v1/sessions/{sid}/selections",
                         token=at, body={"instruction_ids": ["hotel-search-area"]})
    assert status == 200
    status, raw = _request(base, "POST", f"/v1/sessions/{sid}/calls", token=at,
                           body={"instruction_id": "hotel-search-area",
                                 "args": {"area": "north"}})
    assert status == 200
    name = json.loads(raw)["result"]["entity_names"][0]
    status, _ = _request(base, "POST", f"/v1/sessions/{sid}/agent/messages",
                         token=at, body={"text": f"How about {name}?"})
    assert status == 200

    status, _ = _request(base, "POST", f"/v1/sessions/{sid}/checklist",
                         token=ut, body={"item": 0, "done": True})
    assert status == 200
    status, _ = _request(base, "POST", f"/v1/sessions/{sid}/checklist",
                         token=ut, body={"item": 1, "done": True})
    assert status == 200
    status, raw = _request(base, "POST", f"/v1/sessions/{sid}/finalize", token=ut)
    assert status == 200
    # request item never answered: the call log has no phone answer, but
    # annotation and validation pass, so only the checklist gate matters
    out = json.loads(raw)
    assert out["status"] == "finalized"

    status, raw = _request(base, "GET", "/v1/corpus")
    assert status == 200
    assert json.loads(raw.splitlines()[0])["id"] == sid


def test_http_error_statuses(server):
    svc, base = server
    status, raw = _request(base, "POST", "/v1/sessions",
                           body={"goal_checklist": CHECKLIST})
    created = json.loads(raw)
    sid, ut, at = created["session_id"], created["user_token"], created["agent_token"]

    status, raw = _request(base, "GET", f"/v1/sessions/{sid}/manual", token=ut)
    assert status == 403
    assert json.loads(raw)["error"]["type"] == "AuthError"

    status, raw = _request(base, "GET", f"/v1/sessions/{sid}/checklist", token=at)
    assert status == 403

    status, raw = _request(base, "POST", f"/v1/sessions/{sid}/agent/messages",
                           token=at, body={"text": "too soon"})
    assert status == 409
    assert json.loads(raw)["error"]["type"] == "SequencingError"

    _request(base, "POST", f"/v1/sessions/{sid}/user/messages",
             token=ut, body={"text": "Select too many please."})
    all_ids = [ins.id for ins in svc.manuals[created["manual_id"]].instructions]
    status, raw = _request(base, "POST", f"/v1/sessions/{sid}/selections",
                           token=at, body={"instruction_ids": all_ids[:11]})
    assert status == 400
    assert json.loads(raw)["error"]["type"] == "ValidationError"

    status, _ = _request(base, "GET", "/v1/nowhere")
    assert status == 404

    status, raw = _request(base, "POST", f"/v1/sessions/{sid}/selections",
                           token=at, body={"v": 99, "instruction_ids": []})
    assert status == 400
    assert "version" in json.loads(raw)["error"]["message"]


def test_http_default_pool_session(server):
    svc, base = server
    status, raw = _request(base, "POST", "/v1/sessions", body={})
    assert status == 200
    created = json.loads(raw)
    status, raw = _request(base, "GET",
                           f"/v1/sessions/{created['session_id']}/checklist",
                           token=created["user_token"])
    assert status == 200
    view = json.loads(raw)
    assert view["checklist"] and view["description"]
