"""Self-play between a scripted user and a manual-following agent.

The user side plays a goal checklist: it utters constraints one or two
at a time, asks for requested attributes, and supplies booking details
when the agent asks. The agent side selects instructions, fires API
calls through the engine, and realizes replies from the instruction
templates. Oracle mode knows which situation produced each user turn,
so its selections and arguments double as gold labels. Model mode swaps
in predictors and keeps the same user script.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from .engine import Engine, EngineError, SessionState
from .goals import BOOKING_DETAILS, MAX_TURNS, sample_goal
from .model import (
    ApiArg,
    ApiCall,
    ApiResult,
    Constraint,
    Database,
    Dialogue,
    Manual,
    Turn,
    UserGoal,
    validate_dialogue,
)
from .nlu import annotate_dialogue
from .responder import (
    RealizationError,
    build_ask,
    farewell,
    greet,
    realize_turn,
)
from .seedpack import CHANGE_ATTR, SEARCH_PAIRS, USER_TEMPLATES


class SimulationError(RuntimeError):
    """A dialogue could not be played out; callers resample."""


def _sub_rng(seed: int, tag: str) -> random.Random:
    h = hashlib.sha256(f"{seed}:{tag}".encode()).digest()
    return random.Random(int.from_bytes(h[:8], "big"))


def _pick(rng: random.Random, seq):
    return seq[rng.randrange(len(seq))]


@dataclass
class SimConfig:
    p_greet: float = 0.3
    p_cross: float = 0.7  # merge the seam between two domains into one turn
    p_combo: float = 0.85  # let a booking start share a turn with a question
    p_event: float = 0.25  # revisit a booking with a change or cancellation
    p_cancel: float = 0.3  # given a revisit, cancel instead of changing
    max_turns: int = MAX_TURNS

    def to_dict(self) -> dict:
        return {
            "p_greet": self.p_greet,
            "p_cross": self.p_cross,
            "p_combo": self.p_combo,
            "p_event": self.p_event,
            "p_cancel": self.p_cancel,
            "max_turns": self.max_turns,
        }


# ---------------------------------------------------------------------------
# user-side ledger

@dataclass
class ConstraintItem:
    constraint: Constraint
    expressed: bool = False
    checked: bool = False


@dataclass
class RequestItem:
    domain: str
    attr: str
    value: str = ""

    @property
    def filled(self) -> bool:
        return self.value != ""


class UserLedger:
    """Tracks which goal items the agent has confirmed back to the user."""

    def __init__(self, goal: UserGoal):
        self.goal = goal
        self.constraints = [ConstraintItem(c) for c in goal.constraints]
        self.requests = [RequestItem(r.domain, r.attr) for r in goal.requests]

    def completed(self) -> bool:
        return (all(c.checked for c in self.constraints)
                and all(r.filled for r in self.requests))

    def mark_expressed(self, domain: str, attr: str) -> None:
        for item in self.constraints:
            if item.constraint.domain == domain and item.constraint.attr == attr:
                item.expressed = True
                return
        raise SimulationError(f"no such goal constraint: {domain}/{attr}")

    def absorb(self, conveyed: list[tuple[str, str, str]]) -> None:
        """Digest an agent reply: tick off confirmations and answers."""
        confirmed = {d for d, attr, _ in conveyed if attr in ("name", "choice")}
        booked = {d for d, attr, _ in conveyed if attr == "reference num."}
        for item in self.constraints:
            domain = item.constraint.domain
            detail = item.constraint.attr in BOOKING_DETAILS.get(domain, ())
            if not item.expressed or item.checked:
                continue
            if domain == "taxi" or detail:
                if domain in booked:
                    item.checked = True
            elif domain in confirmed:
                item.checked = True
        for req in self.requests:
            if req.filled:
                continue
            for domain, attr, value in conveyed:
                if domain == req.domain and attr == req.attr and value:
                    req.value = value
                    break


# ---------------------------------------------------------------------------
# the user script: acts with enough payload to drive both sides

@dataclass
class Act:
    kind: str  # greet | inform | request | book | book-more | book-taxi |
    #            taxi-time | change | cancel | farewell
    domain: str = ""
    items: tuple[tuple[str, str, str], ...] = ()  # (domain, attr, value)
    attr: str = ""
    value: str = ""


_PAIR_FAMILY: dict[tuple[str, frozenset], str] = {}
for _d, _pairs in SEARCH_PAIRS.items():
    for _p in _pairs:
        _PAIR_FAMILY[(_d, frozenset(_p))] = f"search-{_p[0]}-{_p[1]}"


def _searchable(goal: UserGoal, domain: str) -> list[Constraint]:
    details = BOOKING_DETAILS.get(domain, ())
    return [c for c in goal.constraints
            if c.domain == domain and c.attr not in details]


def _details(goal: UserGoal, domain: str) -> list[Constraint]:
    details = BOOKING_DETAILS.get(domain, ())
    return [c for c in goal.constraints
            if c.domain == domain and c.attr in details]


def _chunk_constraints(rng: random.Random, domain: str,
                       cons: list[Constraint]) -> list[list[Constraint]]:
    if domain == "train":
        route = [c for c in cons if c.attr in ("departure", "destination")]
        rest = [c for c in cons if c.attr not in ("departure", "destination")]
        chunks = [route] if route else []
        if rest:
            chunks.append(rest)  # day + leave/arrive share a turn
        return chunks
    order = list(cons)
    rng.shuffle(order)
    chunks = []
    while order:
        if len(order) < 2:
            chunks.append(order)
            break
        # favor attr pairs the manual has no combined entry for: those
        # turns exercise multi-instruction selection
        loose = [(i, j) for i in range(len(order)) for j in range(i + 1, len(order))
                 if (domain, frozenset((order[i].attr, order[j].attr)))
                 not in _PAIR_FAMILY]
        if loose and rng.random() < 0.75:
            i, j = _pick(rng, loose)
        else:
            i, j = 0, 1
        chunks.append([order[i], order[j]])
        order = [c for k, c in enumerate(order) if k not in (i, j)]
    return chunks


def build_script(goal: UserGoal, db: Database, seed: int,
                 config: SimConfig) -> list[Act]:
    rng = _sub_rng(seed, f"script:{goal.id}")
    script: list[Act] = []
    if rng.random() < config.p_greet:
        script.append(Act("greet"))

    domain_blocks: list[list[Act]] = []
    for domain in goal.domains():
        block: list[Act] = []
        if domain == "taxi":
            cons = {c.attr: c.value for c in goal.constraints if c.domain == "taxi"}
            timing = "leave" if "leave" in cons else "arrive"
            block.append(Act("book-taxi", domain="taxi", items=(
                ("taxi", "departure", cons["departure"]),
                ("taxi", "destination", cons["destination"]),
            ), attr=timing))
            block.append(Act("taxi-time", domain="taxi",
                             attr=timing, value=cons[timing]))
            domain_blocks.append(block)
            continue
        informs = [Act("inform", domain=domain,
                       items=tuple((c.domain, c.attr, c.value) for c in chunk))
                   for chunk in _chunk_constraints(rng, domain, _searchable(goal, domain))]
        requests = [Act("request", domain=domain, attr=req.attr)
                    for req in goal.requests
                    if req.domain == domain and req.attr != "reference num."]
        block.extend(informs)
        block.extend(requests)
        if domain in goal.booking_domains:
            details = [(c.domain, c.attr, c.value) for c in _details(goal, domain)]
            combo = rng.random() < config.p_combo
            if combo and requests:
                # the last question rides along with the booking start
                block.pop()
                block.append(Act("request-book", domain=domain,
                                 attr=requests[-1].attr,
                                 items=tuple(details[:1])))
                details = details[1:]
            elif combo and not requests and len(informs[-1].items) == 1:
                block.pop()
                block.append(Act("inform-book", domain=domain,
                                 items=informs[-1].items + tuple(details[:1])))
                details = details[1:]
            else:
                block.append(Act("book", domain=domain, items=tuple(details[:2])))
                details = details[2:]
            if details:
                block.append(Act("book-more", domain=domain,
                                 items=tuple(details[:2])))
        domain_blocks.append(block)

    # Stitch blocks; sometimes the seam between two domains collapses into
    # one turn carrying a single constraint from each side. The merge may
    # reach past requests and bookings to the previous domain's last
    # single-constraint mention.
    for i, block in enumerate(domain_blocks):
        if i > 0 and block and block[0].kind == "inform" \
                and len(block[0].items) == 1 and rng.random() < config.p_cross:
            for pos in range(len(script) - 1, -1, -1):
                prev = script[pos]
                if prev.kind in ("greet", "farewell"):
                    break
                if prev.kind == "inform":
                    if len(prev.items) == 1:
                        script[pos] = Act("inform", domain="",
                                          items=prev.items + block[0].items)
                        block = block[1:]
                    break
        elif (i > 0 and block and block[0].kind == "book-taxi"
                and script and script[-1].kind == "request"
                and rng.random() < config.p_cross):
            prev = script.pop()
            script.append(Act("request-taxi", domain=prev.domain,
                              attr=prev.attr, items=block[0].items,
                              value=block[0].attr))
            block = block[1:]
        script.extend(block)

    booked = [d for d in goal.booking_domains]
    if booked and len(script) + 2 > config.max_turns:
        booked = []  # no room left for a revisit plus the farewell
    if booked and rng.random() < config.p_event:
        domain = _pick(rng, booked)
        if rng.random() < config.p_cancel:
            script.append(Act("cancel", domain=domain))
        else:
            attr = CHANGE_ATTR[domain]
            current = {c.attr: c.value for c in goal.constraints
                       if c.domain == domain}.get(attr, "")
            pool = [v for v in db.values_for(domain, attr) if v != current]
            if pool:
                script.append(Act("change", domain=domain, attr=attr,
                                  value=_pick(rng, pool)))

    script.append(Act("farewell"))
    if len(script) > config.max_turns:
        raise SimulationError(
            f"goal {goal.id} needs {len(script)} turns, cap is {config.max_turns}")
    return script


# ---------------------------------------------------------------------------
# user-side utterance composition

def _compose(rng: random.Random, act: Act, recommended: dict[str, str]) -> str:
    if act.kind == "greet":
        return _pick(rng, USER_TEMPLATES["greet"])
    if act.kind == "farewell":
        return _pick(rng, USER_TEMPLATES["farewell"])
    if act.kind == "inform":
        items = act.items
        if len(items) == 1:
            d, a, v = items[0]
            t = _pick(rng, USER_TEMPLATES["inform-single"])
            return t.format(domain=d, attr=a, value=v)
        (d1, a1, v1), (d2, a2, v2) = items
        if d1 == d2:
            t = _pick(rng, USER_TEMPLATES["inform-pair"])
            return t.format(domain=d1, attr1=a1, value1=v1, attr2=a2, value2=v2)
        t = _pick(rng, USER_TEMPLATES["inform-cross"])
        return t.format(domain1=d1, attr1=a1, value1=v1,
                        domain2=d2, attr2=a2, value2=v2)
    if act.kind == "request":
        t = _pick(rng, USER_TEMPLATES["request"])
        return t.format(attr=act.attr, name=recommended.get(act.domain, "it"))
    if act.kind in ("book", "book-more"):
        key = "book" if act.kind == "book" else "book-more"
        values = ", ".join(v for _, _, v in act.items)
        return _pick(rng, USER_TEMPLATES[key]).format(values=values)
    if act.kind == "request-book":
        ask = _pick(rng, USER_TEMPLATES["request"]).format(
            attr=act.attr, name=recommended.get(act.domain, "it"))
        values = ", ".join(v for _, _, v in act.items)
        return ask + " " + _pick(rng, USER_TEMPLATES["book"]).format(values=values)
    if act.kind == "inform-book":
        d, a, v = act.items[0]
        mention = _pick(rng, USER_TEMPLATES["inform-single"]).format(
            domain=d, attr=a, value=v)
        values = ", ".join(v for _, _, v in act.items[1:])
        return mention + " " + _pick(rng, USER_TEMPLATES["book"]).format(values=values)
    if act.kind == "book-taxi":
        by_attr = {a: v for _, a, v in act.items}
        return _pick(rng, USER_TEMPLATES["book-taxi"]).format(
            departure=by_attr["departure"], destination=by_attr["destination"])
    if act.kind == "request-taxi":
        ask = _pick(rng, USER_TEMPLATES["request"]).format(
            attr=act.attr, name=recommended.get(act.domain, "it"))
        by_attr = {a: v for _, a, v in act.items}
        ride = _pick(rng, USER_TEMPLATES["book-taxi"]).format(
            departure=by_attr["departure"], destination=by_attr["destination"])
        return ask + " " + ride
    if act.kind == "taxi-time":
        key = "taxi-time-leave" if act.attr == "leave" else "taxi-time-arrive"
        return _pick(rng, USER_TEMPLATES[key]).format(value=act.value)
    if act.kind == "change":
        t = _pick(rng, USER_TEMPLATES["change"])
        return t.format(domain=act.domain, attr=act.attr, value=act.value)
    if act.kind == "cancel":
        return _pick(rng, USER_TEMPLATES["cancel"]).format(domain=act.domain)
    raise SimulationError(f"unknown act kind {act.kind!r}")


# ---------------------------------------------------------------------------
# agent-side oracle policy

@dataclass
class Intent:
    """What the oracle agent should do about one user act."""
    instruction_id: str
    args: dict[str, str] = field(default_factory=dict)
    call: bool = True


class OracleAgent:
    """Selects by construction: it knows which situation each act encodes."""

    def __init__(self, manual: Manual, goal: UserGoal):
        self.manual = manual
        self.goal = goal
        self.recommended: dict[str, str] = {}
        self.references: dict[str, str] = {}
        self.pending_book: dict[str, dict[str, str]] = {}

    def _handle_attr(self, instruction_id: str) -> str:
        return self.manual.by_id(instruction_id).api.inputs[0].attr

    def intents_for(self, act: Act) -> list[Intent]:
        if act.kind in ("greet", "farewell"):
            return []
        if act.kind == "inform":
            by_domain: dict[str, list[tuple[str, str]]] = {}
            for d, a, v in act.items:
                by_domain.setdefault(d, []).append((a, v))
            out: list[Intent] = []
            for d, pairs in by_domain.items():
                attrs = frozenset(a for a, _ in pairs)
                family = _PAIR_FAMILY.get((d, attrs)) if len(pairs) == 2 else None
                if family:
                    out.append(Intent(f"{d}-{family}", dict(pairs)))
                else:
                    out.extend(Intent(f"{d}-search-{a}", {a: v}) for a, v in pairs)
            return out
        if act.kind == "request":
            iid = f"{act.domain}-answer-{act.attr}"
            handle = self._handle_attr(iid)
            target = self.recommended.get(act.domain)
            if target is None:
                raise SimulationError(f"request before any {act.domain} result")
            return [Intent(iid, {handle: target})]
        if act.kind in ("book", "book-more"):
            iid = f"{act.domain}-book"
            spec = self.manual.by_id(iid).api
            gathered = self.pending_book.setdefault(act.domain, {})
            gathered.update({a: v for _, a, v in act.items})
            handle = spec.inputs[0].attr
            target = self.recommended.get(act.domain)
            if target is not None:
                gathered[handle] = target
            missing = [i.attr for i in spec.inputs if i.attr not in gathered]
            if missing:
                return [Intent(iid, dict(gathered), call=False)]
            ordered = {i.attr: gathered[i.attr] for i in spec.inputs}
            return [Intent(iid, ordered)]
        if act.kind == "request-book":
            ask = Act("request", domain=act.domain, attr=act.attr)
            book = Act("book", domain=act.domain, items=act.items)
            return self.intents_for(ask) + self.intents_for(book)
        if act.kind == "inform-book":
            mention = Act("inform", domain=act.domain, items=act.items[:1])
            book = Act("book", domain=act.domain, items=act.items[1:])
            return self.intents_for(mention) + self.intents_for(book)
        if act.kind == "request-taxi":
            ask = Act("request", domain=act.domain, attr=act.attr)
            ride = Act("book-taxi", domain="taxi", items=act.items, attr=act.value)
            return self.intents_for(ask) + self.intents_for(ride)
        if act.kind == "book-taxi":
            iid = f"taxi-book-{act.attr}"
            gathered = self.pending_book.setdefault("taxi", {})
            gathered.update({a: v for _, a, v in act.items})
            return [Intent(iid, dict(gathered), call=False)]
        if act.kind == "taxi-time":
            iid = f"taxi-book-{act.attr}"
            spec = self.manual.by_id(iid).api
            gathered = self.pending_book.setdefault("taxi", {})
            gathered[act.attr] = act.value
            ordered = {i.attr: gathered[i.attr] for i in spec.inputs}
            return [Intent(iid, ordered)]
        if act.kind == "change":
            iid = f"{act.domain}-change-{act.attr}"
            ref = self.references.get(act.domain)
            if ref is None:
                raise SimulationError(f"change before any {act.domain} booking")
            return [Intent(iid, {"reference num.": ref, act.attr: act.value})]
        if act.kind == "cancel":
            ref = self.references.get(act.domain)
            if ref is None:
                raise SimulationError(f"cancel before any {act.domain} booking")
            return [Intent(f"{act.domain}-cancel", {"reference num.": ref})]
        raise SimulationError(f"unknown act kind {act.kind!r}")


def _missing_for_intent(manual: Manual, intent: Intent) -> list[str]:
    spec = manual.by_id(intent.instruction_id).api
    # the agent never asks for the handle; it books the place it suggested
    skip = {spec.inputs[0].attr} if spec.domain != "taxi" else set()
    return [i.attr for i in spec.inputs
            if i.attr not in intent.args and i.attr not in skip]


# ---------------------------------------------------------------------------
# playing a dialogue

def _build_call(manual: Manual, intent: Intent) -> ApiCall:
    instruction = manual.by_id(intent.instruction_id)
    args = tuple(ApiArg(a, v) for a, v in intent.args.items())
    return ApiCall(instruction.id, instruction.api, args)


def simulate_dialogue(
    db: Database,
    manual: Manual,
    goal: UserGoal,
    dialogue_id: str,
    seed: int,
    config: SimConfig | None = None,
) -> Dialogue:
    """Oracle-mode self-play; returns a fully annotated dialogue."""
    config = config or SimConfig()
    script = build_script(goal, db, seed, config)
    rng = _sub_rng(seed, f"say:{dialogue_id}")
    engine = Engine(db)
    state = SessionState(seed=seed)
    ledger = UserLedger(goal)
    agent = OracleAgent(manual, goal)

    turns: list[Turn] = []
    for act in script:
        turn_index = len(turns)
        utterance = _compose(rng, act, agent.recommended)
        intents = agent.intents_for(act)

        selected = tuple(i.instruction_id for i in intents)
        calls: list[ApiCall] = []
        results: list[ApiResult] = []
        realize_items = []
        for intent in intents:
            if not intent.call:
                continue
            call = _build_call(manual, intent)
            try:
                result = engine.execute(state, call, turn_index=turn_index)
            except EngineError as exc:
                raise SimulationError(f"{dialogue_id} turn {turn_index}: {exc}") from exc
            calls.append(call)
            results.append(result)
            realize_items.append((manual.by_id(call.instruction_id), call, result))

        if act.kind == "greet":
            response = greet(dialogue_id, turn_index)
            conveyed: list[tuple[str, str, str]] = []
        elif act.kind == "farewell":
            response = farewell(dialogue_id, turn_index)
            conveyed = []
        else:
            parts: list[str] = []
            conveyed = []
            if calls:
                try:
                    realized = realize_turn(realize_items, db, dialogue_id, turn_index)
                except RealizationError as exc:
                    raise SimulationError(
                        f"{dialogue_id} turn {turn_index}: {exc}") from exc
                parts.append(realized.text)
                conveyed = realized.conveyed
                agent.recommended.update(realized.recommended)
                for call, result in zip(calls, results):
                    if call.api.operation == "add" and result.ok:
                        agent.references[call.api.domain] = result.reference
            for intent in intents:
                if not intent.call:
                    parts.append(build_ask(_missing_for_intent(manual, intent),
                                           dialogue_id, turn_index))
            response = " ".join(parts)

        for d, a, _ in act.items:
            if act.kind in ("inform", "book", "book-more", "book-taxi",
                            "request-book", "inform-book", "request-taxi"):
                ledger.mark_expressed(d, a)
        if act.kind == "taxi-time":
            ledger.mark_expressed("taxi", act.attr)
        ledger.absorb(conveyed)

        turns.append(Turn(
            index=turn_index,
            user_utterance=utterance,
            agent_response=response,
            selected_instructions=selected,
            api_calls=tuple(calls),
            api_results=tuple(results),
        ))

    dialogue = Dialogue(id=dialogue_id, manual_id=manual.id, goal=goal,
                        turns=tuple(turns), seed=seed,
                        completed=ledger.completed())
    if not dialogue.completed:
        open_c = [c.constraint for c in ledger.constraints if not c.checked]
        open_r = [(r.domain, r.attr) for r in ledger.requests if not r.filled]
        raise SimulationError(
            f"{dialogue_id}: goal not completed; open {open_c + open_r}")

    annotated, unmatched = annotate_dialogue(dialogue)
    if unmatched:
        raise SimulationError(f"{dialogue_id}: unmatched args {unmatched}")
    problems = validate_dialogue(annotated, manual)
    if problems:
        raise SimulationError(f"{dialogue_id}: invalid: {problems}")
    return annotated


# ---------------------------------------------------------------------------
# model mode: same user script, predicted agent

def simulate_model_dialogue(
    db: Database,
    manual: Manual,
    goal: UserGoal,
    dialogue_id: str,
    seed: int,
    predict_turn,
    config: SimConfig | None = None,
) -> Dialogue:
    """Replay the user script against a predictor instead of the oracle.

    predict_turn(history, manual, turn_index) must return a list of
    (instruction_id, args dict). Predictions are executed best-effort:
    engine rejections become failed results, empty selections flag the
    turn for review. Output is never gold.
    """
    config = config or SimConfig()
    script = build_script(goal, db, seed, config)
    rng = _sub_rng(seed, f"say:{dialogue_id}")
    engine = Engine(db)  # serves the predictor's calls
    state = SessionState(seed=seed)
    shadow_engine = Engine(db)  # serves the user script's provenance
    shadow_state = SessionState(seed=seed)
    oracle = OracleAgent(manual, goal)

    turns: list[Turn] = []
    history: list[tuple[str, str]] = []
    for act in script:
        turn_index = len(turns)
        utterance = _compose(rng, act, oracle.recommended)
        history.append(("user", utterance))

        predicted = list(predict_turn(list(history), manual, turn_index))[:10]
        selected = tuple(iid for iid, _ in predicted)
        calls: list[ApiCall] = []
        results: list[ApiResult] = []
        realize_items = []
        for iid, args in predicted:
            try:
                instruction = manual.by_id(iid)
            except KeyError:
                continue
            call = ApiCall(iid, instruction.api,
                           tuple(ApiArg(a, v) for a, v in args.items()))
            try:
                result = engine.execute(state, call, turn_index=turn_index)
            except EngineError:
                result = ApiResult(operation=instruction.api.operation, ok=False)
            calls.append(call)
            results.append(result)
            realize_items.append((instruction, call, result))

        try:
            realized = realize_turn(realize_items, db, dialogue_id, turn_index)
            response = realized.text or "Okay."
        except RealizationError:
            response = "Okay."
        needs_review = not selected and act.kind not in ("greet", "farewell")
        history.append(("agent", response))

        # The user side still needs a concrete place name and reference to
        # talk about, so the oracle's calls run on a shadow session.
        for intent in oracle.intents_for(act):
            if not intent.call:
                continue
            call = _build_call(manual, intent)
            try:
                result = shadow_engine.execute(shadow_state, call,
                                               turn_index=turn_index)
                shadow = realize_turn(
                    [(manual.by_id(call.instruction_id), call, result)],
                    db, dialogue_id, turn_index)
            except (EngineError, RealizationError):
                continue
            oracle.recommended.update(shadow.recommended)
            if call.api.operation == "add" and result.ok:
                oracle.references[call.api.domain] = result.reference

        turns.append(Turn(
            index=turn_index,
            user_utterance=utterance,
            agent_response=response,
            selected_instructions=selected,
            api_calls=tuple(calls),
            api_results=tuple(results),
            needs_review=needs_review,
        ))

    return Dialogue(id=dialogue_id, manual_id=manual.id, goal=goal,
                    turns=tuple(turns), seed=seed, completed=False)


# ---------------------------------------------------------------------------
# corpus generation

@dataclass
class CorpusBundle:
    dialogues: list[Dialogue]
    splits: dict[str, tuple[str, ...]]
    manifest: dict


def corpus_stats(dialogues: list[Dialogue]) -> dict:
    turns = sum(len(d.turns) for d in dialogues)
    if not dialogues or not turns:
        return {"dialogues": len(dialogues), "turns": 0}
    instructions = sum(len(t.selected_instructions) for d in dialogues for t in d.turns)
    args = sum(len(c.args) for d in dialogues for t in d.turns for c in t.api_calls)
    calls = sum(len(t.api_calls) for d in dialogues for t in d.turns)
    silent = sum(1 for d in dialogues for t in d.turns if not t.selected_instructions)
    return {
        "dialogues": len(dialogues),
        "turns": turns,
        "mean_turns": turns / len(dialogues),
        "mean_instructions_per_turn": instructions / turns,
        "mean_args_per_turn": args / turns,
        "mean_calls_per_turn": calls / turns,
        "no_instruction_share": silent / turns,
        "mean_domains": sum(len(d.goal.domains()) for d in dialogues) / len(dialogues),
        "completed_share": sum(1 for d in dialogues if d.completed) / len(dialogues),
    }


def _dialogue_seed(master: int, index: int, attempt: int) -> int:
    h = hashlib.sha256(f"{master}:dlg:{index}:{attempt}".encode()).digest()
    return int.from_bytes(h[:8], "big")


def generate_corpus(
    db: Database,
    manuals: list[Manual],
    goals: list[UserGoal],
    seed: int = 0,
    config: SimConfig | None = None,
    train_manuals: int = 10,
    split_sizes: tuple[int, int, int] = (900, 100, 100),
    max_failures: int = 20,
) -> CorpusBundle:
    """Self-play every goal into a dialogue and partition the result.

    Train and dev dialogues draw manuals from the first train_manuals
    manuals; test dialogues draw from the remainder, so evaluation runs
    on manuals never seen in training. A dialogue that fails to play out
    is retried with fresh seeds, then with a replacement goal; more than
    max_failures such events abort generation.
    """
    config = config or SimConfig()
    if len(goals) != sum(split_sizes):
        raise ValueError(f"need {sum(split_sizes)} goals, got {len(goals)}")
    if not (0 < train_manuals < len(manuals)):
        raise ValueError("train_manuals must leave at least one held-out manual")
    head_pool = manuals[:train_manuals]
    test_pool = manuals[train_manuals:]
    n_train, n_dev, n_test = split_sizes

    used_signatures = {g.signature() for g in goals}
    dialogues: list[Dialogue] = []
    failures: list[dict] = []
    for i in range(len(goals)):
        pool = test_pool if i >= n_train + n_dev else head_pool
        manual = pool[_sub_rng(seed, f"manual:{i}").randrange(len(pool))]
        goal = goals[i]
        dialogue_id = f"d{i:04d}"
        dialogue = None
        for attempt in range(6):
            if attempt >= 3:  # the goal itself looks unplayable; swap it
                for extra in range(50):
                    candidate = sample_goal(db, seed, f"{dialogue_id}-alt{attempt}-{extra}")
                    if candidate.signature() not in used_signatures:
                        goal = UserGoal(goal.id, candidate.constraints,
                                        candidate.requests, candidate.booking_domains)
                        used_signatures.add(candidate.signature())
                        break
                else:
                    raise RuntimeError("goal resampling exhausted")
            try:
                dialogue = simulate_dialogue(
                    db, manual, goal, dialogue_id,
                    _dialogue_seed(seed, i, attempt), config)
                break
            except SimulationError as exc:
                failures.append({"dialogue": dialogue_id, "attempt": attempt,
                                 "reason": str(exc)[:200]})
                if len(failures) > max_failures:
                    raise RuntimeError(
                        f"corpus generation exceeded {max_failures} failures") from exc
        if dialogue is None:
            raise RuntimeError(f"dialogue {dialogue_id} failed all attempts")
        dialogues.append(dialogue)

    head_ids = [d.id for d in dialogues[:n_train + n_dev]]
    shuffled = list(head_ids)
    _sub_rng(seed, "splits").shuffle(shuffled)
    splits = {
        "train": tuple(sorted(shuffled[:n_train])),
        "dev": tuple(sorted(shuffled[n_train:])),
        "test": tuple(d.id for d in dialogues[n_train + n_dev:]),
    }

    by_split = {name: [d for d in dialogues if d.id in set(ids)]
                for name, ids in splits.items()}
    manifest = {
        "kind": "corpus_manifest",
        "seed": seed,
        "config": config.to_dict(),
        "split_sizes": {"train": n_train, "dev": n_dev, "test": n_test},
        "splits": {name: list(ids) for name, ids in splits.items()},
        "manual_partition": {
            "train": [m.id for m in head_pool],
            "test": [m.id for m in test_pool],
        },
        "failures": failures,
        "stats": {"overall": corpus_stats(dialogues),
                  **{name: corpus_stats(ds) for name, ds in by_split.items()}},
    }
    return CorpusBundle(dialogues=dialogues, splits=splits, manifest=manifest)
