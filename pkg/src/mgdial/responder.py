"""Turn realization: instruction reply templates plus call results in,
agent utterance out. Deterministic given (dialogue id, turn index)."""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .model import ApiCall, ApiResult, Database, Instruction
from .seedpack import ASK_TEMPLATES, NO_RESULT_REPLIES

_PLACEHOLDER_RE = re.compile(r"\{([^{}]+)\}")

AGENT_GREETINGS = (
    "Hello! How can I help you today?",
    "Hi there, what can I do for you?",
    "Good day! What are you looking for?",
    "Hello, happy to help. What do you need?",
)
AGENT_FAREWELLS = (
    "You're welcome, goodbye!",
    "Glad I could help. Bye!",
    "My pleasure, have a great day!",
    "Anytime! Take care.",
)


class RealizationError(RuntimeError):
    def __init__(self, marker: str, instruction_id: str):
        self.marker = marker
        self.instruction_id = instruction_id
        super().__init__(f"cannot fill {{{marker}}} for instruction {instruction_id}")


def _pick(seq, dialogue_id: str, turn_index: int, salt: str = ""):
    h = hashlib.sha256(f"{dialogue_id}:{turn_index}:{salt}".encode()).digest()
    return seq[int.from_bytes(h[:4], "big") % len(seq)]


def _fill(template: str, values: dict[str, str], instruction_id: str) -> str:
    def sub(m: re.Match) -> str:
        key = m.group(1)
        if key not in values:
            raise RealizationError(key, instruction_id)
        return values[key]

    return _PLACEHOLDER_RE.sub(sub, template)


@dataclass
class TurnRealization:
    text: str
    conveyed: list[tuple[str, str, str]] = field(default_factory=list)  # (domain, attr, value)
    recommended: dict[str, str] = field(default_factory=dict)  # domain -> entity name


def _realize_one(
    instruction: Instruction,
    call: ApiCall,
    result: ApiResult,
    db: Database,
    dialogue_id: str,
    turn_index: int,
) -> tuple[str, list[tuple[str, str, str]], dict[str, str]]:
    domain = call.api.domain
    op = call.api.operation
    conveyed: list[tuple[str, str, str]] = []
    recommended: dict[str, str] = {}

    if op == "find":
        if result.count == 0:
            return _pick(NO_RESULT_REPLIES, dialogue_id, turn_index, instruction.id), [], {}
        if instruction.family.startswith("answer-"):
            handle = call.args_dict().get("name") or call.args_dict().get("id") or ""
            entity = db.by_name(domain, result.entity_names[0] if result.entity_names else handle)
            if entity is None:
                raise RealizationError("name", instruction.id)
            values = {"name": entity.name}
            for attr in call.api.outputs:
                if attr not in entity.values:
                    raise RealizationError(attr, instruction.id)
                values[attr] = entity.values[attr]
                conveyed.append((domain, attr, entity.values[attr]))
            text = _fill(instruction.reply_template, values, instruction.id)
            return text, conveyed, {}
        name = _pick(result.entity_names, dialogue_id, turn_index, instruction.id)
        values = {"choice": str(result.count), "name": name}
        conveyed.append((domain, "choice", str(result.count)))
        conveyed.append((domain, "name", name))
        recommended[domain] = name
        return _fill(instruction.reply_template, values, instruction.id), conveyed, recommended

    if op == "add":
        if not result.ok:
            return "I'm sorry, I couldn't place that booking.", [], {}
        values = dict(call.args_dict())
        values["reference num."] = result.reference
        values.update(result.extras)
        conveyed.append((domain, "reference num.", result.reference))
        for attr, v in result.extras.items():
            conveyed.append((domain, attr, v))
        return _fill(instruction.reply_template, values, instruction.id), conveyed, {}

    if op == "edit":
        if not result.ok:
            return "I'm sorry, I couldn't find a booking under that reference number.", [], {}
        values = dict(call.args_dict())
        values["reference num."] = result.reference
        conveyed.append((domain, "reference num.", result.reference))
        for attr, v in call.args_dict().items():
            if attr != "reference num.":
                conveyed.append((domain, attr, v))
        return _fill(instruction.reply_template, values, instruction.id), conveyed, {}

    if op == "delete":
        if not result.ok:
            return "I'm sorry, I couldn't find a booking under that reference number.", [], {}
        values = {"reference num.": result.reference}
        conveyed.append((domain, "reference num.", result.reference))
        return _fill(instruction.reply_template, values, instruction.id), conveyed, {}

    raise RealizationError(op, instruction.id)


def realize_turn(
    items: list[tuple[Instruction, ApiCall, ApiResult]],
    db: Database,
    dialogue_id: str,
    turn_index: int,
) -> TurnRealization:
    """Realize one agent response from this turn's executed calls.

    Consecutive search lookups in the same domain collapse to the last
    one; it reflects the fully narrowed query after carryover.
    """
    last_search: dict[str, int] = {}
    for i, (instruction, call, _) in enumerate(items):
        if call.api.operation == "find" and not instruction.family.startswith("answer-"):
            last_search[call.api.domain] = i

    out = TurnRealization(text="")
    parts: list[str] = []
    for i, (instruction, call, result) in enumerate(items):
        if (call.api.operation == "find"
                and not instruction.family.startswith("answer-")
                and last_search.get(call.api.domain) != i):
            continue
        text, conveyed, recommended = _realize_one(instruction, call, result, db,
                                                   dialogue_id, turn_index)
        parts.append(text)
        out.conveyed.extend(conveyed)
        out.recommended.update(recommended)
    out.text = " ".join(parts)
    return out


def build_ask(missing_attrs: list[str], dialogue_id: str, turn_index: int) -> str:
    """Prompt for missing booking details, one question per attribute."""
    parts = []
    for attr in missing_attrs:
        options = ASK_TEMPLATES.get(attr)
        if options is None:
            raise RealizationError(attr, "ask")
        parts.append(_pick(options, dialogue_id, turn_index, f"ask:{attr}"))
    return " ".join(parts)


def greet(dialogue_id: str, turn_index: int = 0) -> str:
    return _pick(AGENT_GREETINGS, dialogue_id, turn_index, "greet")


def farewell(dialogue_id: str, turn_index: int) -> str:
    return _pick(AGENT_FAREWELLS, dialogue_id, turn_index, "farewell")
