"""Dialogue collection service.

Two capability tokens per session keep the views apart: the user side
sees the goal checklist and never the manual, the agent side sees the
manual and never the checklist. Every state change is one event in an
append-only log, and replaying that log on a fresh service reproduces
the corpus export byte for byte. Calls run through the same engine the
simulator uses, so references and carryover behave identically.

The HTTP layer is a thin JSON wrapper over the in-process service; it
listens on a local socket and adds nothing but routing, token checks
and error mapping.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any
from urllib.parse import parse_qs, urlparse

from .engine import BookingRecord, Engine, EngineError, SessionState
from .goals import MAX_TURNS, parse_checklist, render_checklist, render_description
from .manuals import TfidfIndex, build_instruction_index
from .model import (
    SCHEMA_VERSION,
    ApiArg,
    ApiCall,
    ApiResult,
    Database,
    Dialogue,
    Manual,
    Turn,
    UserGoal,
    validate_dialogue,
)
from .nlu import annotate_dialogue

PAYLOAD_VERSION = 1
MAX_SELECTED = 10  # matches the dialogue validator's cap


class ServiceError(Exception):
    status = 400

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class AuthError(ServiceError):
    status = 403


class NotFoundError(ServiceError):
    status = 404


class SequencingError(ServiceError):
    """An operation arrived out of turn."""

    status = 409


class ValidationError(ServiceError):
    status = 400


def _token(master_seed: int, session_id: str, role: str) -> str:
    raw = f"{master_seed}:{session_id}:{role}".encode("utf-8")
    return hashlib.sha256(raw).hexdigest()[:24]


@dataclass
class _Session:
    id: str
    goal: UserGoal
    manual_id: str
    seed: int
    user_token: str
    agent_token: str
    items: list[dict[str, Any]]
    status: str = "open"  # open | finalized | failed
    phase: str = "user"  # whose move it is
    turns: list[Turn] = field(default_factory=list)
    pending_user: str = ""
    pending_selected: tuple[str, ...] = ()
    pending_calls: list[ApiCall] = field(default_factory=list)
    pending_results: list[ApiResult] = field(default_factory=list)
    problems: list[str] = field(default_factory=list)
    export: Dialogue | None = None
    engine_state: SessionState = field(default_factory=SessionState)


class CollectionService:
    """In-process collection state machine. Not thread-safe by itself."""

    def __init__(self, db: Database, manuals: list[Manual],
                 goals: list[UserGoal] | None = None, seed: int = 0):
        self.db = db
        self.manuals = {m.id: m for m in manuals}
        self.manual_order = [m.id for m in manuals]
        self.goal_pool = list(goals or [])
        self.seed = seed
        self.engine = Engine(db)
        self.events: list[dict[str, Any]] = []
        self._sessions: dict[str, _Session] = {}
        self._counter = 0
        self._search_indices: dict[str, TfidfIndex] = {}

    # -- event plumbing ----------------------------------------------------

    def _record(self, op: str, data: dict[str, Any]) -> None:
        event = {"v": PAYLOAD_VERSION, "seq": len(self.events), "op": op, "data": data}
        self._apply(event)
        self.events.append(event)

    @staticmethod
    def replay(db: Database, manuals: list[Manual],
               events: list[dict[str, Any]]) -> "CollectionService":
        """Rebuild a service by re-applying a trusted event log."""
        svc = CollectionService(db, manuals, goals=[], seed=0)
        for event in events:
            svc._apply(event)
            svc.events.append(event)
        return svc

    def _apply(self, event: dict[str, Any]) -> None:
        op = event["op"]
        data = event["data"]
        if op == "create_session":
            goal = UserGoal.from_dict(data["goal"])
            session = _Session(
                id=data["session_id"],
                goal=goal,
                manual_id=data["manual_id"],
                seed=data["seed"],
                user_token=data["user_token"],
                agent_token=data["agent_token"],
                items=[{"text": line, "done": False}
                       for line in render_checklist(goal).splitlines()],
                engine_state=SessionState(seed=data["seed"]),
            )
            self._sessions[session.id] = session
            self._counter = data["counter"] + 1
            return
        session = self._sessions[data["session_id"]]
        if op == "user_message":
            session.pending_user = data["text"]
            session.phase = "agent"
        elif op == "select_instructions":
            session.pending_selected = tuple(data["instruction_ids"])
        elif op == "api_call":
            manual = self.manuals[session.manual_id]
            instruction = manual.by_id(data["instruction_id"])
            call = ApiCall(
                instruction_id=instruction.id,
                api=instruction.api,
                args=tuple(ApiArg(attr, data["args"][attr])
                           for attr in instruction.api.input_attrs()
                           if attr in data["args"]),
            )
            result = self.engine.execute(session.engine_state, call,
                                         turn_index=len(session.turns))
            session.pending_calls.append(call)
            session.pending_results.append(result)
        elif op == "agent_message":
            session.turns.append(Turn(
                index=len(session.turns),
                user_utterance=session.pending_user,
                agent_response=data["text"],
                selected_instructions=session.pending_selected,
                api_calls=tuple(session.pending_calls),
                api_results=tuple(session.pending_results),
                needs_review=not session.pending_selected,
            ))
            session.pending_user = ""
            session.pending_selected = ()
            session.pending_calls = []
            session.pending_results = []
            session.phase = "user"
        elif op == "update_checklist":
            session.items[data["item"]]["done"] = data["done"]
        elif op == "finalize":
            self._finalize(session)
        elif op == "reopen":
            session.status = "open"
            session.export = None
            session.problems = []
        else:
            raise ValueError(f"unknown event op {op!r}")

    def _finalize(self, session: _Session) -> None:
        dialogue = Dialogue(
            id=session.id,
            manual_id=session.manual_id,
            goal=session.goal,
            turns=tuple(session.turns),
            seed=session.seed,
            completed=True,
        )
        problems = [f"checklist item unchecked: {item['text']}"
                    for item in session.items if not item["done"]]
        annotated, unmatched = annotate_dialogue(dialogue)
        for miss in unmatched:
            problems.append(
                f"argument never said: turn {miss.get('turn')} "
                f"{miss.get('attr')} = {miss.get('value')}")
        problems.extend(validate_dialogue(annotated, self.manuals[session.manual_id]))
        booked = {c.api.domain
                  for t in annotated.turns
                  for c, r in zip(t.api_calls, t.api_results)
                  if c.api.operation == "add" and r.ok}
        for domain in session.goal.booking_domains:
            if domain not in booked:
                problems.append(f"no successful booking logged for {domain}")
        if problems:
            session.status = "failed"
            session.problems = problems
            session.export = None
        else:
            session.status = "finalized"
            session.problems = []
            session.export = annotated

    # -- shared guards -----------------------------------------------------

    def _session(self, session_id: str) -> _Session:
        if session_id not in self._sessions:
            raise NotFoundError(f"no session {session_id}")
        return self._sessions[session_id]

    def _as_user(self, session_id: str, token: str) -> _Session:
        session = self._session(session_id)
        if token != session.user_token:
            raise AuthError("user token required")
        return session

    def _as_agent(self, session_id: str, token: str) -> _Session:
        session = self._session(session_id)
        if token != session.agent_token:
            raise AuthError("agent token required")
        return session

    @staticmethod
    def _open(session: _Session) -> None:
        if session.status != "open":
            raise SequencingError(f"session is {session.status}")

    # -- mutating operations -----------------------------------------------

    def create_session(self, goal_checklist: str | None = None,
                       manual_id: str | None = None,
                       seed: int | None = None) -> dict[str, Any]:
        if manual_id is None:
            manual_id = self.manual_order[self._counter % len(self.manual_order)]
        if manual_id not in self.manuals:
            raise ValidationError(f"unknown manual {manual_id}")
        session_id = f"s{self._counter:04d}"
        if goal_checklist:
            try:
                goal = parse_checklist(goal_checklist, goal_id=f"{session_id}-goal")
            except ValueError as e:
                raise ValidationError(f"bad goal checklist: {e}") from e
        elif self.goal_pool:
            goal = self.goal_pool[self._counter % len(self.goal_pool)]
        else:
            raise ValidationError("no goal checklist given and no goal pool configured")
        if seed is None:
            seed = (self.seed * 7919 + self._counter + 1) % 10000
        self._record("create_session", {
            "session_id": session_id,
            "goal": goal.to_dict(),
            "manual_id": manual_id,
            "seed": seed,
            "counter": self._counter,
            "user_token": _token(self.seed, session_id, "user"),
            "agent_token": _token(self.seed, session_id, "agent"),
        })
        session = self._sessions[session_id]
        return {
            "session_id": session_id,
            "user_token": session.user_token,
            "agent_token": session.agent_token,
            "manual_id": manual_id,
            "checklist": [dict(item) for item in session.items],
        }

    def post_user_message(self, session_id: str, token: str, text: str) -> dict[str, Any]:
        session = self._as_user(session_id, token)
        self._open(session)
        if session.phase != "user":
            raise SequencingError("agent reply pending; cannot post another user message")
        if len(session.turns) >= MAX_TURNS:
            raise SequencingError("turn limit reached; finalize or reopen")
        if not text or not text.strip():
            raise ValidationError("empty message")
        self._record("user_message", {"session_id": session_id, "text": text})
        return {"turn": len(session.turns), "phase": session.phase}

    def select_instructions(self, session_id: str, token: str,
                            instruction_ids: list[str]) -> dict[str, Any]:
        session = self._as_agent(session_id, token)
        self._open(session)
        if session.phase != "agent":
            raise SequencingError("no user message to act on")
        if session.pending_calls:
            raise SequencingError("cannot reselect after submitting calls")
        if len(instruction_ids) > MAX_SELECTED:
            raise ValidationError(
                f"{len(instruction_ids)} instructions selected (max {MAX_SELECTED})")
        if len(set(instruction_ids)) != len(instruction_ids):
            raise ValidationError("duplicate instruction ids")
        manual = self.manuals[session.manual_id]
        known = {ins.id for ins in manual.instructions}
        for iid in instruction_ids:
            if iid not in known:
                raise ValidationError(f"unknown instruction {iid}")
        self._record("select_instructions", {
            "session_id": session_id,
            "instruction_ids": list(instruction_ids),
        })
        return {"selected": list(session.pending_selected),
                "flagged_for_review": not session.pending_selected}

    def submit_api_call(self, session_id: str, token: str, instruction_id: str,
                        args: dict[str, str]) -> dict[str, Any]:
        session = self._as_agent(session_id, token)
        self._open(session)
        if session.phase != "agent":
            raise SequencingError("no user message to act on")
        if instruction_id not in session.pending_selected:
            raise ValidationError(f"instruction {instruction_id} is not selected this turn")
        manual = self.manuals[session.manual_id]
        instruction = manual.by_id(instruction_id)
        if instruction.api is None:
            raise ValidationError(f"instruction {instruction_id} has no call to make")
        allowed = set(instruction.api.input_attrs())
        unknown = sorted(set(args) - allowed)
        if unknown:
            raise ValidationError(f"unknown arguments: {unknown}")
        # dry-run first: a rejected call must leave no trace in the log
        call = ApiCall(
            instruction_id=instruction_id,
            api=instruction.api,
            args=tuple(ApiArg(attr, args[attr])
                       for attr in instruction.api.input_attrs() if attr in args),
        )
        probe = SessionState(
            seed=session.engine_state.seed,
            carryover={d: dict(v) for d, v in session.engine_state.carryover.items()},
            bookings={ref: BookingRecord(r.reference, r.domain,
                                         dict(r.attributes), r.active)
                      for ref, r in session.engine_state.bookings.items()},
            ref_counter=session.engine_state.ref_counter,
        )
        try:
            self.engine.execute(probe, call, turn_index=len(session.turns))
        except EngineError as e:
            raise ValidationError(str(e)) from e
        self._record("api_call", {
            "session_id": session_id,
            "instruction_id": instruction_id,
            "args": dict(args),
        })
        return {"result": session.pending_results[-1].to_dict()}

    def post_agent_message(self, session_id: str, token: str, text: str) -> dict[str, Any]:
        session = self._as_agent(session_id, token)
        self._open(session)
        if session.phase != "agent":
            raise SequencingError("no user message to answer")
        if not text or not text.strip():
            raise ValidationError("empty message")
        self._record("agent_message", {"session_id": session_id, "text": text})
        turn = session.turns[-1]
        return {"turn": turn.index, "needs_review": turn.needs_review,
                "phase": session.phase}

    def update_checklist(self, session_id: str, token: str, item: int,
                         done: bool) -> dict[str, Any]:
        session = self._as_user(session_id, token)
        self._open(session)
        if not 0 <= item < len(session.items):
            raise ValidationError(f"no checklist item {item}")
        self._record("update_checklist", {
            "session_id": session_id, "item": item, "done": bool(done),
        })
        return {"checklist": [dict(i) for i in session.items]}

    def finalize(self, session_id: str, token: str) -> dict[str, Any]:
        session = self._as_user(session_id, token)
        self._open(session)
        if session.phase != "user":
            raise SequencingError("agent reply pending; finish the turn first")
        if not session.turns:
            raise SequencingError("nothing to finalize")
        self._record("finalize", {"session_id": session_id})
        return {"status": session.status, "problems": list(session.problems)}

    def reopen(self, session_id: str, token: str) -> dict[str, Any]:
        session = self._session(session_id)
        if token not in (session.user_token, session.agent_token):
            raise AuthError("session token required")
        if session.status == "open":
            raise SequencingError("session already open")
        self._record("reopen", {"session_id": session_id})
        return {"status": session.status}

    # -- read-only views ---------------------------------------------------

    def user_view(self, session_id: str, token: str) -> dict[str, Any]:
        session = self._as_user(session_id, token)
        return {
            "session_id": session.id,
            "status": session.status,
            "phase": session.phase,
            "turn_count": len(session.turns),
            "transcript": [
                {"turn": t.index, "user": t.user_utterance, "agent": t.agent_response}
                for t in session.turns
            ],
            "pending_user_message": session.pending_user,
            "problems": list(session.problems),
        }

    def checklist_view(self, session_id: str, token: str) -> dict[str, Any]:
        session = self._as_user(session_id, token)
        return {
            "session_id": session.id,
            "description": render_description(session.goal),
            "checklist": [dict(item) for item in session.items],
        }

    def agent_view(self, session_id: str, token: str) -> dict[str, Any]:
        session = self._as_agent(session_id, token)
        return {
            "session_id": session.id,
            "status": session.status,
            "phase": session.phase,
            "manual_id": session.manual_id,
            "turn_count": len(session.turns),
            "transcript": [t.to_dict() for t in session.turns],
            "pending": {
                "user_message": session.pending_user,
                "selected": list(session.pending_selected),
                "calls": [c.to_dict() for c in session.pending_calls],
                "results": [r.to_dict() for r in session.pending_results],
            },
        }

    def manual_view(self, session_id: str, token: str) -> dict[str, Any]:
        session = self._as_agent(session_id, token)
        return {"manual": self.manuals[session.manual_id].to_dict()}

    def search_instructions(self, session_id: str, token: str, query: str,
                            limit: int = 5) -> dict[str, Any]:
        session = self._as_agent(session_id, token)
        if not query.strip():
            raise ValidationError("empty query")
        if session.manual_id not in self._search_indices:
            self._search_indices[session.manual_id] = build_instruction_index(
                self.manuals[session.manual_id])
        index = self._search_indices[session.manual_id]
        manual = self.manuals[session.manual_id]
        hits = []
        for iid, score in index.search(query, k=limit):
            ins = manual.by_id(iid)
            hits.append({
                "id": iid,
                "score": score,
                "condition": ins.condition,
                "solution": ins.solution,
                "api_description": ins.api_description,
                "inputs": list(ins.api.input_attrs()) if ins.api else [],
            })
        return {"hits": hits}

    def export_corpus(self) -> str:
        lines = []
        for sid in sorted(self._sessions):
            session = self._sessions[sid]
            if session.status == "finalized" and session.export is not None:
                doc = {"schema_version": SCHEMA_VERSION, "kind": "dialogue"}
                doc.update(session.export.to_dict())
                lines.append(json.dumps(doc, sort_keys=False))
        return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# HTTP wrapper


_ROUTES: list[tuple[str, re.Pattern, str]] = [
    ("POST", re.compile(r"^/v1/sessions$"), "create"),
    ("GET", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/user$"), "user_view"),
    ("GET", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/checklist$"), "checklist_view"),
    ("POST", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/checklist$"), "update_checklist"),
    ("POST", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/user/messages$"), "user_message"),
    ("GET", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/agent$"), "agent_view"),
    ("GET", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/manual$"), "manual_view"),
    ("GET", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/search$"), "search"),
    ("POST", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/selections$"), "select"),
    ("POST", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/calls$"), "call"),
    ("POST", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/agent/messages$"), "agent_message"),
    ("POST", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/finalize$"), "finalize"),
    ("POST", re.compile(r"^/v1/sessions/(?P<sid>[^/]+)/reopen$"), "reopen"),
    ("GET", re.compile(r"^/v1/corpus$"), "corpus"),
]


class CollectionHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # tests stay quiet
        pass

    def _send(self, status: int, payload: dict[str, Any] | None = None,
              text: str | None = None) -> None:
        if text is not None:
            body = text.encode("utf-8")
            ctype = "application/jsonl; charset=utf-8"
        else:
            data = {"v": PAYLOAD_VERSION}
            data.update(payload or {})
            body = json.dumps(data, sort_keys=False).encode("utf-8")
            ctype = "application/json; charset=utf-8"
        self.send_response(status)
        self.send_header("content-type", ctype)
        self.send_header("content-length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _body(self) -> dict[str, Any]:
        length = int(self.headers.get("content-length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            data = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ValidationError(f"bad JSON body: {e}") from e
        if not isinstance(data, dict):
            raise ValidationError("body must be a JSON object")
        if "v" in data and data["v"] != PAYLOAD_VERSION:
            raise ValidationError(f"unsupported payload version {data['v']}")
        return data

    def _dispatch(self, method: str) -> None:
        url = urlparse(self.path)
        service: CollectionService = self.server.service  # type: ignore[attr-defined]
        lock: threading.Lock = self.server.lock  # type: ignore[attr-defined]
        token = self.headers.get("x-collect-token", "")
        try:
            for verb, pattern, name in _ROUTES:
                match = pattern.match(url.path)
                if verb != method or not match:
                    continue
                sid = match.groupdict().get("sid", "")
                with lock:
                    self._handle(service, name, sid, token, url.query)
                return
            raise NotFoundError(f"no route for {method} {url.path}")
        except ServiceError as e:
            self._send(e.status, {"error": {"type": type(e).__name__,
                                            "message": e.message}})
        except EngineError as e:
            self._send(400, {"error": {"type": "EngineError", "message": str(e)}})

    def _handle(self, service: CollectionService, name: str, sid: str,
                token: str, query: str) -> None:
        if name == "create":
            body = self._body()
            out = service.create_session(
                goal_checklist=body.get("goal_checklist"),
                manual_id=body.get("manual_id"),
                seed=body.get("seed"),
            )
            self._send(200, out)
        elif name == "user_view":
            self._send(200, service.user_view(sid, token))
        elif name == "checklist_view":
            self._send(200, service.checklist_view(sid, token))
        elif name == "update_checklist":
            body = self._body()
            if "item" not in body or "done" not in body:
                raise ValidationError("item and done are required")
            self._send(200, service.update_checklist(sid, token,
                                                     int(body["item"]),
                                                     bool(body["done"])))
        elif name == "user_message":
            body = self._body()
            self._send(200, service.post_user_message(sid, token,
                                                      str(body.get("text", ""))))
        elif name == "agent_view":
            self._send(200, service.agent_view(sid, token))
        elif name == "manual_view":
            self._send(200, service.manual_view(sid, token))
        elif name == "search":
            params = parse_qs(query)
            q = (params.get("q") or [""])[0]
            try:
                limit = int((params.get("limit") or ["5"])[0])
            except ValueError as e:
                raise ValidationError("limit must be an integer") from e
            self._send(200, service.search_instructions(sid, token, q,
                                                        max(1, min(limit, 20))))
        elif name == "select":
            body = self._body()
            ids = body.get("instruction_ids")
            if not isinstance(ids, list):
                raise ValidationError("instruction_ids must be a list")
            self._send(200, service.select_instructions(sid, token,
                                                        [str(i) for i in ids]))
        elif name == "call":
            body = self._body()
            args = body.get("args", {})
            if not isinstance(args, dict):
                raise ValidationError("args must be an object")
            self._send(200, service.submit_api_call(
                sid, token, str(body.get("instruction_id", "")),
                {str(k): str(v) for k, v in args.items()}))
        elif name == "agent_message":
            body = self._body()
            self._send(200, service.post_agent_message(sid, token,
                                                       str(body.get("text", ""))))
        elif name == "finalize":
            self._send(200, service.finalize(sid, token))
        elif name == "reopen":
            self._send(200, service.reopen(sid, token))
        elif name == "corpus":
            self._send(200, text=service.export_corpus())
        else:  # unreachable while _ROUTES and this table agree
            raise NotFoundError(name)

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")


def make_server(service: CollectionService, host: str = "127.0.0.1",
                port: int = 0) -> ThreadingHTTPServer:
    """Bind the service to a local socket. port 0 picks a free one."""
    server = ThreadingHTTPServer((host, port), CollectionHandler)
    server.service = service  # type: ignore[attr-defined]
    server.lock = threading.Lock()  # type: ignore[attr-defined]
    return server
