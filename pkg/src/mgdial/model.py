"""Core data model: domains, databases, manuals, goals, dialogues.

Everything is a frozen dataclass with explicit dict codecs so files
stay stable and diffable. Every document we write carries a
schema_version and a kind tag; readers reject anything else.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

SCHEMA_VERSION = 1

DOMAINS = ("attraction", "hospital", "hotel", "restaurant", "taxi", "train")

# Canonical closed attribute vocabulary shared across domains.
ATTRIBUTES = (
    "address", "area", "arrive", "car", "choice", "class", "day",
    "department", "departure", "destination", "facility", "food", "id",
    "leave", "name", "people", "phone", "postcode", "price",
    "reference num.", "score", "station", "star", "stay", "time", "type",
)
ATTRIBUTE_SET = frozenset(ATTRIBUTES)

OPERATIONS = ("find", "add", "edit", "delete")


class ParseError(ValueError):
    """Raised when a document fails structural decoding."""

    def __init__(self, message: str, *, where: str = ""):
        self.where = where
        super().__init__(f"{message}{f' (at {where})' if where else ''}")


def _require(cond: bool, message: str, where: str = "") -> None:
    if not cond:
        raise ParseError(message, where=where)


# ---------------------------------------------------------------------------
# database


@dataclass(frozen=True)
class Entity:
    domain: str
    values: dict[str, str]

    @property
    def name(self) -> str:
        return self.values.get("name", self.values.get("id", ""))

    def to_dict(self) -> dict[str, Any]:
        return {"domain": self.domain, "values": dict(self.values)}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Entity":
        _require(isinstance(d.get("values"), dict), "entity.values must be a mapping")
        return Entity(domain=str(d["domain"]), values={str(k): str(v) for k, v in d["values"].items()})


@dataclass(frozen=True)
class Database:
    """Entity store plus value pools for attributes entities do not carry.

    schemas maps domain -> ordered attribute names. lexicons holds extra
    legal values per (domain, attr) for things like day/people/stay that
    describe the booking rather than the entity.
    """

    schemas: dict[str, tuple[str, ...]]
    entities: tuple[Entity, ...]
    lexicons: dict[str, dict[str, tuple[str, ...]]] = field(default_factory=dict)

    def domains(self) -> tuple[str, ...]:
        return tuple(sorted(self.schemas))

    def attributes_for(self, domain: str) -> tuple[str, ...]:
        return self.schemas.get(domain, ())

    def entities_in(self, domain: str) -> list[Entity]:
        return [e for e in self.entities if e.domain == domain]

    def values_for(self, domain: str, attr: str) -> list[str]:
        seen: dict[str, None] = {}
        for e in self.entities:
            if e.domain == domain and attr in e.values:
                seen.setdefault(e.values[attr], None)
        for v in self.lexicons.get(domain, {}).get(attr, ()):
            seen.setdefault(v, None)
        return list(seen)

    def by_name(self, domain: str, name: str) -> Entity | None:
        from .text import normalize
        target = normalize(name)
        for e in self.entities_in(domain):
            if normalize(e.name) == target:
                return e
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "schemas": {d: list(a) for d, a in sorted(self.schemas.items())},
            "entities": [e.to_dict() for e in self.entities],
            "lexicons": {d: {a: list(v) for a, v in sorted(m.items())} for d, m in sorted(self.lexicons.items())},
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Database":
        schemas = {str(k): tuple(str(a) for a in v) for k, v in d.get("schemas", {}).items()}
        entities = tuple(Entity.from_dict(e) for e in d.get("entities", []))
        lexicons = {
            str(dom): {str(a): tuple(str(x) for x in vals) for a, vals in m.items()}
            for dom, m in d.get("lexicons", {}).items()
        }
        return Database(schemas=schemas, entities=entities, lexicons=lexicons)


# ---------------------------------------------------------------------------
# api specs and manuals


@dataclass(frozen=True)
class ApiInput:
    attr: str
    required: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {"attr": self.attr, "required": self.required}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "ApiInput":
        return ApiInput(attr=str(d["attr"]), required=bool(d.get("required", True)))


@dataclass(frozen=True)
class ApiSpec:
    name: str
    domain: str
    operation: str  # find | add | edit | delete
    inputs: tuple[ApiInput, ...]
    outputs: tuple[str, ...] = ()

    def input_attrs(self) -> tuple[str, ...]:
        return tuple(i.attr for i in self.inputs)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "domain": self.domain,
            "operation": self.operation,
            "inputs": [i.to_dict() for i in self.inputs],
            "outputs": list(self.outputs),
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "ApiSpec":
        _require(d.get("operation") in OPERATIONS, f"unknown operation {d.get('operation')!r}")
        return ApiSpec(
            name=str(d["name"]),
            domain=str(d["domain"]),
            operation=str(d["operation"]),
            inputs=tuple(ApiInput.from_dict(i) for i in d.get("inputs", [])),
            outputs=tuple(str(o) for o in d.get("outputs", [])),
        )


@dataclass(frozen=True)
class Instruction:
    """One agent instruction: when to act, what call to make, what to say.

    condition and solution are free text shown to annotators and fed to
    matchers. api_description names each input in order. reply_template
    is the concrete surface the scripted agent realizes, with {attr}
    placeholders filled from call results.
    """

    id: str
    family: str
    domain: str
    condition: str
    solution: str
    api: ApiSpec | None = None
    api_description: str = ""
    reply_template: str = ""

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": self.id,
            "family": self.family,
            "domain": self.domain,
            "condition": self.condition,
            "solution": self.solution,
        }
        if self.api is not None:
            d["api"] = self.api.to_dict()
        if self.api_description:
            d["api_description"] = self.api_description
        if self.reply_template:
            d["reply_template"] = self.reply_template
        return d

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Instruction":
        return Instruction(
            id=str(d["id"]),
            family=str(d["family"]),
            domain=str(d["domain"]),
            condition=str(d["condition"]),
            solution=str(d["solution"]),
            api=ApiSpec.from_dict(d["api"]) if d.get("api") else None,
            api_description=str(d.get("api_description", "")),
            reply_template=str(d.get("reply_template", "")),
        )


@dataclass(frozen=True)
class Manual:
    id: str
    paraphrase_set: int
    instructions: tuple[Instruction, ...]

    def by_id(self, instruction_id: str) -> Instruction:
        for ins in self.instructions:
            if ins.id == instruction_id:
                return ins
        raise KeyError(instruction_id)

    def domains(self) -> tuple[str, ...]:
        return tuple(sorted({i.domain for i in self.instructions}))

    def max_inputs(self) -> int:
        return max((len(i.api.inputs) for i in self.instructions if i.api), default=0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "paraphrase_set": self.paraphrase_set,
            "instructions": [i.to_dict() for i in self.instructions],
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Manual":
        return Manual(
            id=str(d["id"]),
            paraphrase_set=int(d.get("paraphrase_set", 0)),
            instructions=tuple(Instruction.from_dict(i) for i in d.get("instructions", [])),
        )


# ---------------------------------------------------------------------------
# goals


@dataclass(frozen=True)
class Constraint:
    domain: str
    attr: str
    value: str

    def to_dict(self) -> dict[str, Any]:
        return {"domain": self.domain, "attr": self.attr, "value": self.value}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Constraint":
        return Constraint(str(d["domain"]), str(d["attr"]), str(d["value"]))


@dataclass(frozen=True)
class Request:
    domain: str
    attr: str

    def to_dict(self) -> dict[str, Any]:
        return {"domain": self.domain, "attr": self.attr}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Request":
        return Request(str(d["domain"]), str(d["attr"]))


@dataclass(frozen=True)
class UserGoal:
    id: str
    constraints: tuple[Constraint, ...]
    requests: tuple[Request, ...]
    booking_domains: tuple[str, ...] = ()

    def domains(self) -> tuple[str, ...]:
        out: dict[str, None] = {}
        for c in self.constraints:
            out.setdefault(c.domain, None)
        for r in self.requests:
            out.setdefault(r.domain, None)
        return tuple(out)

    def signature(self) -> tuple:
        return (
            tuple(sorted((c.domain, c.attr, c.value) for c in self.constraints)),
            tuple(sorted((r.domain, r.attr) for r in self.requests)),
            tuple(sorted(self.booking_domains)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "constraints": [c.to_dict() for c in self.constraints],
            "requests": [r.to_dict() for r in self.requests],
            "booking_domains": list(self.booking_domains),
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "UserGoal":
        return UserGoal(
            id=str(d["id"]),
            constraints=tuple(Constraint.from_dict(c) for c in d.get("constraints", [])),
            requests=tuple(Request.from_dict(r) for r in d.get("requests", [])),
            booking_domains=tuple(str(x) for x in d.get("booking_domains", [])),
        )


# ---------------------------------------------------------------------------
# dialogues


@dataclass(frozen=True)
class Span:
    """Character span of a value inside one utterance of the dialogue."""

    turn: int
    speaker: str  # user | agent
    start: int
    end: int

    def to_dict(self) -> dict[str, Any]:
        return {"turn": self.turn, "speaker": self.speaker, "start": self.start, "end": self.end}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Span":
        return Span(int(d["turn"]), str(d["speaker"]), int(d["start"]), int(d["end"]))


@dataclass(frozen=True)
class ApiArg:
    attr: str
    value: str
    span: Span | None = None  # where the value was said, if anywhere

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"attr": self.attr, "value": self.value}
        if self.span is not None:
            d["span"] = self.span.to_dict()
        return d

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "ApiArg":
        return ApiArg(
            attr=str(d["attr"]),
            value=str(d["value"]),
            span=Span.from_dict(d["span"]) if d.get("span") else None,
        )


@dataclass(frozen=True)
class ApiCall:
    instruction_id: str
    api: ApiSpec
    args: tuple[ApiArg, ...]

    def args_dict(self) -> dict[str, str]:
        return {a.attr: a.value for a in self.args}

    def to_dict(self) -> dict[str, Any]:
        return {
            "instruction_id": self.instruction_id,
            "api": self.api.to_dict(),
            "args": [a.to_dict() for a in self.args],
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "ApiCall":
        return ApiCall(
            instruction_id=str(d["instruction_id"]),
            api=ApiSpec.from_dict(d["api"]),
            args=tuple(ApiArg.from_dict(a) for a in d.get("args", [])),
        )


@dataclass(frozen=True)
class ApiResult:
    """Outcome of one call. Shape varies with the operation.

    find: entity_names + count. add: reference + attributes recorded.
    edit/delete: ok flag + reference. extras carries values the engine
    invents on the fly (e.g. an assigned car and contact number).
    """

    operation: str
    count: int = 0
    entity_names: tuple[str, ...] = ()
    reference: str = ""
    ok: bool = True
    attributes: dict[str, str] = field(default_factory=dict)
    extras: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "operation": self.operation,
            "count": self.count,
            "entity_names": list(self.entity_names),
            "reference": self.reference,
            "ok": self.ok,
            "attributes": dict(self.attributes),
            "extras": dict(self.extras),
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "ApiResult":
        return ApiResult(
            operation=str(d["operation"]),
            count=int(d.get("count", 0)),
            entity_names=tuple(str(x) for x in d.get("entity_names", [])),
            reference=str(d.get("reference", "")),
            ok=bool(d.get("ok", True)),
            attributes={str(k): str(v) for k, v in d.get("attributes", {}).items()},
            extras={str(k): str(v) for k, v in d.get("extras", {}).items()},
        )


@dataclass(frozen=True)
class Turn:
    index: int
    user_utterance: str
    agent_response: str
    selected_instructions: tuple[str, ...] = ()
    api_calls: tuple[ApiCall, ...] = ()
    api_results: tuple[ApiResult, ...] = ()
    needs_review: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "user_utterance": self.user_utterance,
            "agent_response": self.agent_response,
            "selected_instructions": list(self.selected_instructions),
            "api_calls": [c.to_dict() for c in self.api_calls],
            "api_results": [r.to_dict() for r in self.api_results],
            "needs_review": self.needs_review,
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Turn":
        return Turn(
            index=int(d["index"]),
            user_utterance=str(d["user_utterance"]),
            agent_response=str(d["agent_response"]),
            selected_instructions=tuple(str(x) for x in d.get("selected_instructions", [])),
            api_calls=tuple(ApiCall.from_dict(c) for c in d.get("api_calls", [])),
            api_results=tuple(ApiResult.from_dict(r) for r in d.get("api_results", [])),
            needs_review=bool(d.get("needs_review", False)),
        )


@dataclass(frozen=True)
class Dialogue:
    id: str
    manual_id: str
    goal: UserGoal
    turns: tuple[Turn, ...]
    seed: int = 0
    completed: bool = True

    def history(self, upto_turn: int, include_current_agent: bool = False) -> list[tuple[str, str]]:
        """(speaker, utterance) pairs through turn upto_turn's user side."""
        out: list[tuple[str, str]] = []
        for t in self.turns:
            if t.index > upto_turn:
                break
            out.append(("user", t.user_utterance))
            if t.index < upto_turn or include_current_agent:
                out.append(("agent", t.agent_response))
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "manual_id": self.manual_id,
            "goal": self.goal.to_dict(),
            "turns": [t.to_dict() for t in self.turns],
            "seed": self.seed,
            "completed": self.completed,
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Dialogue":
        return Dialogue(
            id=str(d["id"]),
            manual_id=str(d["manual_id"]),
            goal=UserGoal.from_dict(d["goal"]),
            turns=tuple(Turn.from_dict(t) for t in d.get("turns", [])),
            seed=int(d.get("seed", 0)),
            completed=bool(d.get("completed", True)),
        )


# ---------------------------------------------------------------------------
# validation


def validate_goal(goal: UserGoal, db: Database | None = None) -> list[str]:
    problems: list[str] = []
    seen_c: set[tuple[str, str]] = set()
    for c in goal.constraints:
        if c.attr not in ATTRIBUTE_SET:
            problems.append(f"goal {goal.id}: unknown constraint attr {c.attr!r}")
        if (c.domain, c.attr) in seen_c:
            problems.append(f"goal {goal.id}: duplicate constraint {c.domain}.{c.attr}")
        seen_c.add((c.domain, c.attr))
    seen_r: set[tuple[str, str]] = set()
    for r in goal.requests:
        if r.attr not in ATTRIBUTE_SET:
            problems.append(f"goal {goal.id}: unknown request attr {r.attr!r}")
        if (r.domain, r.attr) in seen_r:
            problems.append(f"goal {goal.id}: duplicate request {r.domain}.{r.attr}")
        seen_r.add((r.domain, r.attr))
    overlap = seen_c & seen_r
    for dom, attr in sorted(overlap):
        problems.append(f"goal {goal.id}: {dom}.{attr} is both constraint and request")
    if len(goal.domains()) > 4:
        problems.append(f"goal {goal.id}: spans {len(goal.domains())} domains (max 4)")
    if db is not None:
        for c in goal.constraints:
            if c.domain not in db.schemas:
                problems.append(f"goal {goal.id}: unknown domain {c.domain!r}")
            elif c.value not in db.values_for(c.domain, c.attr):
                problems.append(
                    f"goal {goal.id}: constraint {c.domain}.{c.attr}={c.value!r} not in database"
                )
    return problems


def validate_manual(manual: Manual) -> list[str]:
    problems: list[str] = []
    seen: set[str] = set()
    for ins in manual.instructions:
        if ins.id in seen:
            problems.append(f"manual {manual.id}: duplicate instruction id {ins.id}")
        seen.add(ins.id)
        if not ins.condition.strip():
            problems.append(f"manual {manual.id}: instruction {ins.id} has empty condition")
        if ins.api is not None:
            if ins.api.operation not in OPERATIONS:
                problems.append(f"manual {manual.id}: {ins.id} bad operation {ins.api.operation!r}")
            for inp in ins.api.inputs:
                if inp.attr not in ATTRIBUTE_SET:
                    problems.append(f"manual {manual.id}: {ins.id} unknown input attr {inp.attr!r}")
            if not ins.api_description.strip():
                problems.append(f"manual {manual.id}: {ins.id} has api but no api_description")
    return problems


def validate_dialogue(dialogue: Dialogue, manual: Manual | None = None) -> list[str]:
    problems: list[str] = []
    for i, t in enumerate(dialogue.turns):
        if t.index != i:
            problems.append(f"dialogue {dialogue.id}: turn {i} has index {t.index}")
        if len(t.selected_instructions) > 10:
            problems.append(
                f"dialogue {dialogue.id} turn {i}: {len(t.selected_instructions)} instructions (max 10)"
            )
        if len(t.api_results) != len(t.api_calls):
            problems.append(f"dialogue {dialogue.id} turn {i}: calls/results length mismatch")
        known = {ins.id for ins in manual.instructions} if manual else None
        for sid in t.selected_instructions:
            if known is not None and sid not in known:
                problems.append(f"dialogue {dialogue.id} turn {i}: unknown instruction {sid}")
        for c in t.api_calls:
            allowed = set(c.api.input_attrs())
            for a in c.args:
                if a.attr not in allowed:
                    problems.append(
                        f"dialogue {dialogue.id} turn {i}: arg {a.attr!r} not an input of {c.api.name}"
                    )
                if a.span is not None:
                    if not (0 <= a.span.turn <= i):
                        problems.append(
                            f"dialogue {dialogue.id} turn {i}: span turn {a.span.turn} out of range"
                        )
                    elif a.span.speaker not in ("user", "agent"):
                        problems.append(f"dialogue {dialogue.id} turn {i}: bad span speaker")
                    else:
                        utt = (
                            dialogue.turns[a.span.turn].user_utterance
                            if a.span.speaker == "user"
                            else dialogue.turns[a.span.turn].agent_response
                        )
                        if not (0 <= a.span.start < a.span.end <= len(utt)):
                            problems.append(
                                f"dialogue {dialogue.id} turn {i}: span offsets out of range for "
                                f"{a.attr}={a.value!r}"
                            )
    return problems


# ---------------------------------------------------------------------------
# files


def _doc(kind: str, payload: dict[str, Any]) -> dict[str, Any]:
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **payload}


def save_json_doc(path: str | Path, kind: str, payload: dict[str, Any]) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(_doc(kind, payload), indent=2, sort_keys=False) + "\n", encoding="utf-8")


def load_json_doc(path: str | Path, expected_kind: str) -> dict[str, Any]:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        d = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}", where=str(path)) from e
    _require(isinstance(d, dict), "document root must be an object", str(path))
    _require("schema_version" in d, "missing schema_version", str(path))
    _require(d["schema_version"] == SCHEMA_VERSION, f"unsupported schema_version {d['schema_version']}", str(path))
    _require(d.get("kind") == expected_kind, f"expected kind {expected_kind!r}, got {d.get('kind')!r}", str(path))
    return d


def save_database(db: Database, path: str | Path) -> None:
    save_json_doc(path, "database", db.to_dict())


def load_database(path: str | Path) -> Database:
    return Database.from_dict(load_json_doc(path, "database"))


def save_manuals(manuals: Iterable[Manual], path: str | Path) -> None:
    save_json_doc(path, "manual_pack", {"manuals": [m.to_dict() for m in manuals]})


def load_manuals(path: str | Path) -> list[Manual]:
    d = load_json_doc(path, "manual_pack")
    return [Manual.from_dict(m) for m in d.get("manuals", [])]


def save_goals(goals: Iterable[UserGoal], path: str | Path) -> None:
    save_json_doc(path, "goal_pack", {"goals": [g.to_dict() for g in goals]})


def load_goals(path: str | Path) -> list[UserGoal]:
    d = load_json_doc(path, "goal_pack")
    return [UserGoal.from_dict(g) for g in d.get("goals", [])]


def save_corpus(dialogues: Iterable[Dialogue], path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", encoding="utf-8") as f:
        for dlg in dialogues:
            f.write(json.dumps(_doc("dialogue", dlg.to_dict()), sort_keys=False) + "\n")


def iter_corpus(path: str | Path) -> Iterator[Dialogue]:
    with Path(path).open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON: {e}", where=f"{path}:{lineno}") from e
            _require(d.get("schema_version") == SCHEMA_VERSION, "bad schema_version", f"{path}:{lineno}")
            _require(d.get("kind") == "dialogue", "bad kind", f"{path}:{lineno}")
            yield Dialogue.from_dict(d)


def load_corpus(path: str | Path) -> list[Dialogue]:
    return list(iter_corpus(path))
