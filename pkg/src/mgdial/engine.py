"""Call execution against the database, with per-domain query carryover.

find arguments persist within a session per domain: a later find only
needs to mention what changed and inherits the rest. The name/id
handles are an exception; they select a focus entity for one lookup
and never stick. add/edit/delete maintain a booking ledger whose
reference numbers are deterministic in (session seed, issue order).
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Any

from .model import ApiCall, ApiResult, Database
from .text import normalize

# focus-selector args: used for a single lookup, not remembered
TRANSIENT_ARGS = ("name", "id")

MAX_NAMES_IN_RESULT = 8


class EngineError(RuntimeError):
    pass


@dataclass
class BookingRecord:
    reference: str
    domain: str
    attributes: dict[str, str]
    active: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {
            "reference": self.reference,
            "domain": self.domain,
            "attributes": dict(self.attributes),
            "active": self.active,
        }


@dataclass
class SessionState:
    """Mutable per-dialogue execution state."""

    seed: int = 0
    carryover: dict[str, dict[str, str]] = field(default_factory=dict)
    bookings: dict[str, BookingRecord] = field(default_factory=dict)
    ref_counter: int = 0
    call_log: list[dict[str, Any]] = field(default_factory=list)

    def next_reference(self) -> str:
        self.ref_counter += 1
        return f"{self.seed % 10000:04d}{self.ref_counter:04d}"

    def reset_domain(self, domain: str) -> None:
        self.carryover.pop(domain, None)

    def effective_query(self, domain: str, args: dict[str, str]) -> dict[str, str]:
        base = dict(self.carryover.get(domain, {}))
        base.update(args)
        return base


class Engine:
    def __init__(self, db: Database):
        self.db = db
        # (domain, attr) -> normalized value -> row ids, so find is a
        # posting-list intersection instead of a full table scan
        self._rows: dict[str, list] = {}
        self._postings: dict[tuple[str, str], dict[str, list[int]]] = {}
        for domain in db.schemas:
            rows = db.entities_in(domain)
            self._rows[domain] = rows
            for attr in db.attributes_for(domain):
                table: dict[str, list[int]] = {}
                for i, entity in enumerate(rows):
                    table.setdefault(normalize(entity.values.get(attr, "")), []).append(i)
                self._postings[(domain, attr)] = table

    # ------------------------------------------------------------------ find

    def _find(self, state: SessionState, domain: str, args: dict[str, str],
              outputs: tuple[str, ...] = ()) -> ApiResult:
        rows = self._rows.get(domain, [])
        if not rows:
            raise EngineError(f"domain {domain!r} has no listing to search")
        effective = state.effective_query(domain, args)
        persisted = {k: v for k, v in effective.items() if k not in TRANSIENT_ARGS}
        state.carryover[domain] = persisted

        matched: set[int] | None = None
        for attr, value in effective.items():
            ids = set(self._postings.get((domain, attr), {}).get(normalize(value), ()))
            matched = ids if matched is None else matched & ids
            if not matched:
                return ApiResult(operation="find", count=0, entity_names=())
        hits = sorted(matched) if matched is not None else list(range(len(rows)))
        names = tuple(rows[i].name for i in hits[:MAX_NAMES_IN_RESULT])
        # declared outputs that are real attributes, read off the top hit
        top = rows[hits[0]].values
        attributes = {a: top[a] for a in outputs if a in top}
        return ApiResult(operation="find", count=len(hits), entity_names=names,
                         attributes=attributes)

    # ------------------------------------------------------------- add

    def _add(self, state: SessionState, call: ApiCall, turn_index: int) -> ApiResult:
        domain = call.api.domain
        args = call.args_dict()
        handle = args.get("name") or args.get("id")
        if domain != "taxi":
            if handle is None or self.db.by_name(domain, handle) is None:
                return ApiResult(operation="add", ok=False, attributes=dict(args))
        reference = state.next_reference()
        extras: dict[str, str] = {}
        if domain == "taxi":
            rng = random.Random(int.from_bytes(
                hashlib.sha256(f"{state.seed}:{reference}".encode()).digest()[:8], "big"))
            cars = self.db.lexicons.get("taxi", {}).get("car", ("white toyota",))
            extras["car"] = rng.choice(list(cars))
            extras["phone"] = f"07{rng.randint(100000000, 999999999)}"
        state.bookings[reference] = BookingRecord(reference=reference, domain=domain,
                                                  attributes=dict(args))
        return ApiResult(operation="add", ok=True, reference=reference,
                         attributes=dict(args), extras=extras)

    # ------------------------------------------------------------- edit

    def _edit(self, state: SessionState, call: ApiCall) -> ApiResult:
        args = call.args_dict()
        reference = args.get("reference num.", "")
        record = state.bookings.get(reference)
        if record is None or not record.active:
            return ApiResult(operation="edit", ok=False, reference=reference)
        for attr, value in args.items():
            if attr != "reference num.":
                record.attributes[attr] = value
        return ApiResult(operation="edit", ok=True, reference=reference,
                         attributes=dict(record.attributes))

    # ----------------------------------------------------------- delete

    def _delete(self, state: SessionState, call: ApiCall) -> ApiResult:
        reference = call.args_dict().get("reference num.", "")
        record = state.bookings.get(reference)
        if record is None or not record.active:
            return ApiResult(operation="delete", ok=False, reference=reference)
        record.active = False
        return ApiResult(operation="delete", ok=True, reference=reference)

    # ---------------------------------------------------------- dispatch

    def execute(self, state: SessionState, call: ApiCall, turn_index: int = 0) -> ApiResult:
        domain = call.api.domain
        if domain not in self.db.schemas:
            raise EngineError(f"unknown domain {domain!r}")
        args = call.args_dict()
        allowed = set(call.api.input_attrs())
        for attr in args:
            if attr not in allowed:
                raise EngineError(f"{call.api.name}: unexpected argument {attr!r}")
        missing = [i.attr for i in call.api.inputs if i.required and i.attr not in args]
        if missing and call.api.operation != "find":
            raise EngineError(f"{call.api.name}: missing required arguments {missing}")

        op = call.api.operation
        if op == "find":
            result = self._find(state, domain, args, call.api.outputs)
        elif op == "add":
            result = self._add(state, call, turn_index)
        elif op == "edit":
            result = self._edit(state, call)
        elif op == "delete":
            result = self._delete(state, call)
        else:
            raise EngineError(f"unknown operation {op!r}")

        state.call_log.append({
            "turn": turn_index,
            "instruction_id": call.instruction_id,
            "api": call.api.name,
            "operation": op,
            "args": args,
            "ok": result.ok,
            "count": result.count,
            "reference": result.reference,
        })
        return result
