"""User goal sampling and the checklist text format.

Goals are sampled entity-first: constraint values are copied off a
concrete database entity, so a search following the goal always has at
least one match. Booking details come from the lexicon pools. A turn
estimate keeps sampled goals inside the dialogue length budget.
"""
from __future__ import annotations

import hashlib
import math
import random
import re

from .model import Constraint, Database, Request, UserGoal, validate_goal
from .seedpack import ANSWERABLE, BOOK_INPUTS, SEARCH_SINGLE

DOMAIN_COUNT_WEIGHTS = ((1, 0.25), (2, 0.40), (3, 0.25), (4, 0.10))

# constraint attrs the sampler may draw for a domain (searchable ones)
CONSTRAINABLE: dict[str, tuple[str, ...]] = {
    "attraction": ("area", "type", "price"),
    "hospital": ("department",),
    "hotel": ("area", "price", "star", "type", "facility"),
    "restaurant": ("area", "food", "price"),
}

BOOKING_DETAILS: dict[str, tuple[str, ...]] = {
    "hotel": ("day", "people", "stay"),
    "restaurant": ("day", "people", "time"),
    "train": ("people",),
}

MAX_TURNS = 20
TURN_ESTIMATE_BUDGET = 17


def _sub_rng(seed: int, tag: str) -> random.Random:
    h = hashlib.sha256(f"{seed}:{tag}".encode()).digest()
    return random.Random(int.from_bytes(h[:8], "big"))


def _searchable_constraints(goal: UserGoal, domain: str) -> int:
    details = set(BOOKING_DETAILS.get(domain, ()))
    return sum(1 for c in goal.constraints if c.domain == domain and c.attr not in details)


def estimate_turns(goal: UserGoal) -> int:
    """Optimistic count of user turns needed to play the goal out."""
    total = 2  # greet + farewell
    for domain in goal.domains():
        searchable = _searchable_constraints(goal, domain)
        total += math.ceil(searchable / 2) if searchable else 0
        total += sum(1 for r in goal.requests if r.domain == domain and r.attr != "reference num.")
        if domain in goal.booking_domains and domain != "taxi":
            details = len(BOOKING_DETAILS.get(domain, ()))
            total += max(1, math.ceil(details / 2))
    return total


def _sample_domain_constraints(db: Database, rng: random.Random, domain: str, k: int) -> list[Constraint]:
    attrs = list(CONSTRAINABLE[domain])
    rng.shuffle(attrs)
    chosen = sorted(attrs[:k])
    entity = rng.choice(db.entities_in(domain))
    return [Constraint(domain, a, entity.values[a]) for a in chosen]


def _sample_train_constraints(db: Database, rng: random.Random) -> list[Constraint]:
    entity = rng.choice(db.entities_in("train"))
    timing = rng.choice(("leave", "arrive"))
    return [
        Constraint("train", "departure", entity.values["departure"]),
        Constraint("train", "destination", entity.values["destination"]),
        Constraint("train", "day", entity.values["day"]),
        Constraint("train", timing, entity.values[timing]),
    ]


def _sample_taxi_constraints(db: Database, rng: random.Random) -> list[Constraint]:
    places = db.lexicons["taxi"]["departure"]
    dep, dst = rng.sample(list(places), 2)
    timing = rng.choice(("leave", "arrive"))
    when = rng.choice(list(db.lexicons["taxi"][timing]))
    return [
        Constraint("taxi", "departure", dep),
        Constraint("taxi", "destination", dst),
        Constraint("taxi", timing, when),
    ]


def sample_goal(
    db: Database,
    seed: int,
    goal_id: str,
    p_book: float = 0.55,
) -> UserGoal:
    rng = _sub_rng(seed, goal_id)
    count = rng.choices([c for c, _ in DOMAIN_COUNT_WEIGHTS],
                        weights=[w for _, w in DOMAIN_COUNT_WEIGHTS])[0]
    domains = rng.sample(list(db.schemas), count)

    constraints: list[Constraint] = []
    requests: list[Request] = []
    bookings: list[str] = []

    for domain in domains:
        if domain == "train":
            constraints += _sample_train_constraints(db, rng)
            if rng.random() < p_book:
                bookings.append("train")
        elif domain == "taxi":
            constraints += _sample_taxi_constraints(db, rng)
            bookings.append("taxi")  # a taxi goal is always a ride order
        else:
            upper = min(len(CONSTRAINABLE[domain]), 3 if count == 1 else 2)
            k = rng.randint(1, upper)
            constraints += _sample_domain_constraints(db, rng, domain, k)
            if domain in BOOK_INPUTS and rng.random() < p_book:
                bookings.append(domain)

        if domain != "taxi":
            constrained = {c.attr for c in constraints if c.domain == domain}
            candidates = [a for a in ANSWERABLE[domain] if a not in constrained]
            rng.shuffle(candidates)
            want = rng.choice((1, 1, 2)) if count == 1 else 1
            requests += [Request(domain, a) for a in sorted(candidates[:want])]

    for domain in bookings:
        for attr in BOOKING_DETAILS.get(domain, ()):
            value = rng.choice(db.values_for(domain, attr))
            constraints.append(Constraint(domain, attr, value))
        requests.append(Request(domain, "reference num."))

    goal = UserGoal(goal_id, tuple(constraints), tuple(requests), tuple(bookings))

    # trim until the dialogue fits the turn budget
    while estimate_turns(goal) > TURN_ESTIMATE_BUDGET:
        plain = [r for r in goal.requests if r.attr != "reference num."]
        if len(plain) > len(goal.domains()):
            drop = plain[-1]
            goal = UserGoal(goal.id,
                            goal.constraints,
                            tuple(r for r in goal.requests if r != drop),
                            goal.booking_domains)
            continue
        droppable = [d for d in goal.booking_domains if d != "taxi"]
        if droppable:
            gone = droppable[-1]
            goal = UserGoal(
                goal.id,
                tuple(c for c in goal.constraints
                      if not (c.domain == gone and c.attr in BOOKING_DETAILS.get(gone, ()))),
                tuple(r for r in goal.requests
                      if not (r.domain == gone and r.attr == "reference num.")),
                tuple(b for b in goal.booking_domains if b != gone),
            )
            continue
        break
    return goal


def sample_goals(db: Database, count: int, seed: int) -> list[UserGoal]:
    """Distinct goals; duplicates by signature are resampled."""
    goals: list[UserGoal] = []
    seen: set = set()
    for i in range(count):
        for attempt in range(50):
            g = sample_goal(db, seed, f"g{i:05d}" if attempt == 0 else f"g{i:05d}r{attempt}")
            if g.signature() not in seen:
                g = UserGoal(f"g{i:05d}", g.constraints, g.requests, g.booking_domains)
                seen.add(g.signature())
                goals.append(g)
                break
        else:
            raise RuntimeError(f"could not sample a fresh goal after 50 tries (index {i})")
    return goals


# ---------------------------------------------------------------------------
# checklist text format

_CHECK_RE = re.compile(r"^\[(constraint|request|booking)\]\s*([a-z]+)\s*(?:\|\s*(.+))?$")


def render_checklist(goal: UserGoal) -> str:
    lines: list[str] = []
    for domain in goal.domains():
        for c in goal.constraints:
            if c.domain == domain:
                lines.append(f"[constraint] {domain} | {c.attr} = {c.value}")
        for r in goal.requests:
            if r.domain == domain:
                lines.append(f"[request] {domain} | {r.attr}")
        if domain in goal.booking_domains:
            lines.append(f"[booking] {domain}")
    return "\n".join(lines)


def render_description(goal: UserGoal) -> str:
    parts: list[str] = []
    for domain in goal.domains():
        cons = [c for c in goal.constraints if c.domain == domain
                and c.attr not in BOOKING_DETAILS.get(domain, ())]
        reqs = [r for r in goal.requests if r.domain == domain and r.attr != "reference num."]
        bits = []
        if cons:
            bits.append("with " + ", ".join(f"{c.attr} {c.value}" for c in cons))
        if reqs:
            bits.append("find out the " + " and the ".join(r.attr for r in reqs))
        if domain in goal.booking_domains:
            details = [c for c in goal.constraints
                       if c.domain == domain and c.attr in BOOKING_DETAILS.get(domain, ())]
            if details:
                bits.append("book it for " + ", ".join(c.value for c in details))
            else:
                bits.append("order it")
        parts.append(f"You need a {domain} " + "; ".join(bits) + ".")
    return " ".join(parts)


def parse_checklist(text: str, goal_id: str = "parsed") -> UserGoal:
    constraints: list[Constraint] = []
    requests: list[Request] = []
    bookings: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        m = _CHECK_RE.match(line)
        if not m:
            raise ValueError(f"checklist line {lineno} unparseable: {raw!r}")
        kind, domain, rest = m.group(1), m.group(2), m.group(3)
        if kind == "constraint":
            if rest is None or "=" not in rest:
                raise ValueError(f"checklist line {lineno}: constraint needs attr = value")
            attr, value = rest.split("=", 1)
            constraints.append(Constraint(domain, attr.strip(), value.strip()))
        elif kind == "request":
            if rest is None:
                raise ValueError(f"checklist line {lineno}: request needs an attr")
            requests.append(Request(domain, rest.strip()))
        else:
            bookings.append(domain)
    return UserGoal(goal_id, tuple(constraints), tuple(requests), tuple(bookings))


def goal_is_sound(goal: UserGoal, db: Database) -> bool:
    return not validate_goal(goal, db)
