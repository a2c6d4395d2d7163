"""Deterministic synthetic database builder.

Six travel-assistance domains with fixed entity counts and attribute
schemas. Attributes that describe a booking rather than a venue (day,
people, stay, time for reservations) get value pools in the database
lexicon instead of living on entities. Taxi has no entity table at
all; rides are created on demand.
"""
from __future__ import annotations

import hashlib
import random

from .model import Database, Entity

ENTITY_COUNTS = {
    "attraction": 465,
    "hospital": 91,
    "hotel": 1133,
    "restaurant": 951,
    "train": 1022,
    "taxi": 0,
}

SCHEMAS: dict[str, tuple[str, ...]] = {
    "attraction": ("address", "area", "name", "phone", "postcode", "price", "score", "type"),
    "hospital": ("address", "department", "id", "name", "phone", "postcode"),
    "hotel": (
        "address", "area", "day", "facility", "name", "people", "phone",
        "postcode", "price", "score", "star", "stay", "type",
    ),
    "restaurant": (
        "address", "area", "day", "food", "name", "people", "phone",
        "postcode", "price", "score", "time", "type",
    ),
    "train": (
        "arrive", "class", "day", "departure", "destination", "id",
        "leave", "name", "people", "price", "station", "time",
    ),
    "taxi": ("arrive", "car", "departure", "destination", "leave", "phone"),
}

# attrs whose values come from the lexicon only (user-supplied booking details)
BOOKING_ATTRS: dict[str, tuple[str, ...]] = {
    "hotel": ("day", "people", "stay"),
    "restaurant": ("day", "people", "time"),
    "train": ("people",),
    "taxi": ("arrive", "departure", "destination", "leave"),
}

AREAS = ("north", "south", "east", "west", "centre")
PRICES = ("cheap", "moderate", "expensive")
DAYS = ("monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday")
PEOPLE = ("1 person",) + tuple(f"{n} people" for n in range(2, 9))
STAYS = ("1 night",) + tuple(f"{n} nights" for n in range(2, 8))
SCORES = ("3.0", "3.5", "4.0", "4.5", "5.0")
STARS = ("2-star", "3-star", "4-star", "5-star")
HOTEL_TYPES = ("hotel", "guesthouse")
FACILITIES = ("free wifi", "free parking", "a gym", "a pool", "breakfast included")
ATTRACTION_TYPES = ("museum", "park", "cinema", "theatre", "gallery", "swimming pool", "nightclub", "college")
REST_TYPES = ("restaurant", "cafe", "bistro", "pub")
FOODS = (
    "japanese", "italian", "chinese", "indian", "thai", "french", "korean",
    "mexican", "turkish", "spanish", "british", "vietnamese", "lebanese",
    "greek", "portuguese", "polish", "seafood", "vegetarian", "barbecue", "noodles",
)
DEPARTMENTS = (
    "cardiology", "neurology", "oncology", "paediatrics", "radiology",
    "dermatology", "orthopaedics", "urology", "gastroenterology",
    "ophthalmology", "psychiatry", "haematology", "rheumatology",
    "nephrology", "immunology", "audiology", "physiotherapy",
    "maternity", "emergency medicine", "general surgery",
)
STATIONS = (
    "ashford", "birchwood", "calderton", "dunmere", "eastfield",
    "fairhaven", "gracewell", "harlow cross", "ivybridge", "kingsmoor",
    "larkfield", "milldale", "norwood", "oakhurst", "pembury",
)
TRAIN_CLASSES = ("standard", "first")
CAR_MAKES = ("toyota", "skoda", "volvo", "honda", "ford", "audi", "tesla", "bmw")
CAR_COLORS = ("white", "black", "grey", "blue", "red", "silver", "green", "yellow")

_NAME_ADJ = (
    "golden", "silver", "royal", "quiet", "grand", "old", "little", "blue",
    "green", "red", "white", "bright", "hidden", "sunny", "misty", "velvet",
    "copper", "ivory", "amber", "crimson", "lucky", "merry", "noble", "plain",
    "rustic", "shiny", "tidy", "warm", "windy", "cosy",
)
_NAME_NOUN = (
    "harbor", "willow", "lantern", "garden", "bridge", "crown", "anchor",
    "meadow", "orchard", "pearl", "falcon", "heron", "maple", "cedar",
    "tulip", "lotus", "comet", "beacon", "mill", "forge", "haven", "spring",
    "valley", "summit", "grove", "brook", "cliff", "dune", "field", "gate",
    "island", "jetty", "knoll", "lagoon", "marsh", "nook", "oasis", "pier",
)
_STREETS = (
    "station road", "mill lane", "king street", "queen street", "market square",
    "abbey road", "castle hill", "church walk", "garden row", "bridge street",
    "park avenue", "river walk", "orchard close", "meadow drive", "harbor way",
)

HOTEL_SUFFIX = ("hotel", "lodge", "inn", "guesthouse", "house")
REST_SUFFIX = ("restaurant", "kitchen", "table", "bistro", "cafe")
ATTR_SUFFIX = ("museum", "park", "cinema", "theatre", "gallery", "hall", "centre")

TIME_POOL = tuple(f"{h:02d}:{m:02d}" for h in range(7, 23) for m in (0, 15, 30, 45))
DINNER_TIMES = tuple(f"{h:02d}:{m:02d}" for h in range(17, 22) for m in (0, 15, 30, 45))


def _sub_rng(master_seed: int, tag: str) -> random.Random:
    h = hashlib.sha256(f"{master_seed}:{tag}".encode()).digest()
    return random.Random(int.from_bytes(h[:8], "big"))


def _unique_names(rng: random.Random, count: int, suffixes: tuple[str, ...]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    while len(out) < count:
        name = f"{rng.choice(_NAME_ADJ)} {rng.choice(_NAME_NOUN)} {rng.choice(suffixes)}"
        if name in seen:
            name = f"{rng.choice(_NAME_ADJ)} {name}"
        if name not in seen:
            seen.add(name)
            out.append(name)
    return out


def _phone(rng: random.Random) -> str:
    return f"01{rng.randint(100, 999)} {rng.randint(100000, 999999)}"


def _postcode(rng: random.Random) -> str:
    letters = "abcdefghjkmnprstuvwxy"
    return (
        f"{rng.choice(letters)}{rng.choice(letters)}{rng.randint(1, 9)} "
        f"{rng.randint(1, 9)}{rng.choice(letters)}{rng.choice(letters)}"
    ).upper()


def _address(rng: random.Random) -> str:
    return f"{rng.randint(1, 220)} {rng.choice(_STREETS)}"


def _gen_attraction(rng: random.Random, n: int) -> list[Entity]:
    names = _unique_names(rng, n, ATTR_SUFFIX)
    ents = []
    for name in names:
        ents.append(Entity("attraction", {
            "address": _address(rng),
            "area": rng.choice(AREAS),
            "name": name,
            "phone": _phone(rng),
            "postcode": _postcode(rng),
            "price": rng.choice(PRICES + ("free",)),
            "score": rng.choice(SCORES),
            "type": rng.choice(ATTRACTION_TYPES),
        }))
    return ents


def _gen_hospital(rng: random.Random, n: int) -> list[Entity]:
    ents = []
    for i in range(n):
        dept = DEPARTMENTS[i % len(DEPARTMENTS)]
        ents.append(Entity("hospital", {
            "address": _address(rng),
            "department": dept,
            "id": f"H{i + 1:03d}",
            "name": f"{dept} unit {i + 1:02d}",
            "phone": _phone(rng),
            "postcode": _postcode(rng),
        }))
    return ents


def _gen_hotel(rng: random.Random, n: int) -> list[Entity]:
    names = _unique_names(rng, n, HOTEL_SUFFIX)
    ents = []
    for name in names:
        ents.append(Entity("hotel", {
            "address": _address(rng),
            "area": rng.choice(AREAS),
            "facility": rng.choice(FACILITIES),
            "name": name,
            "phone": _phone(rng),
            "postcode": _postcode(rng),
            "price": rng.choice(PRICES),
            "score": rng.choice(SCORES),
            "star": rng.choice(STARS),
            "type": rng.choice(HOTEL_TYPES),
        }))
    return ents


def _gen_restaurant(rng: random.Random, n: int) -> list[Entity]:
    names = _unique_names(rng, n, REST_SUFFIX)
    ents = []
    for name in names:
        ents.append(Entity("restaurant", {
            "address": _address(rng),
            "area": rng.choice(AREAS),
            "food": rng.choice(FOODS),
            "name": name,
            "phone": _phone(rng),
            "postcode": _postcode(rng),
            "price": rng.choice(PRICES),
            "score": rng.choice(SCORES),
            "type": rng.choice(REST_TYPES),
        }))
    return ents


def _gen_train(rng: random.Random, n: int) -> list[Entity]:
    ents = []
    for i in range(n):
        dep, dst = rng.sample(STATIONS, 2)
        leave_h, leave_m = rng.randint(5, 21), rng.choice((0, 15, 30, 45))
        dur = rng.choice((35, 45, 50, 60, 75, 90))
        arr_total = leave_h * 60 + leave_m + dur
        tid = f"TR{i + 1:04d}"
        ents.append(Entity("train", {
            "arrive": f"{arr_total // 60 % 24:02d}:{arr_total % 60:02d}",
            "class": rng.choice(TRAIN_CLASSES),
            "day": rng.choice(DAYS),
            "departure": dep,
            "destination": dst,
            "id": tid,
            "leave": f"{leave_h:02d}:{leave_m:02d}",
            "name": tid,
            "price": f"{rng.randint(8, 90)}.{rng.choice(('00', '25', '50', '75'))} pounds",
            "station": f"{dep} station",
            "time": f"{dur} minutes",
        }))
    return ents


def build_database(seed: int = 0) -> Database:
    entities: list[Entity] = []
    entities += _gen_attraction(_sub_rng(seed, "attraction"), ENTITY_COUNTS["attraction"])
    entities += _gen_hospital(_sub_rng(seed, "hospital"), ENTITY_COUNTS["hospital"])
    entities += _gen_hotel(_sub_rng(seed, "hotel"), ENTITY_COUNTS["hotel"])
    entities += _gen_restaurant(_sub_rng(seed, "restaurant"), ENTITY_COUNTS["restaurant"])
    entities += _gen_train(_sub_rng(seed, "train"), ENTITY_COUNTS["train"])

    place_rng = _sub_rng(seed, "places")
    taxi_places = tuple(sorted(place_rng.sample(
        [e.values["name"] for e in entities if e.domain in ("hotel", "restaurant", "attraction")], 60,
    )))

    lexicons = {
        "hotel": {"day": DAYS, "people": PEOPLE, "stay": STAYS},
        "restaurant": {"day": DAYS, "people": PEOPLE, "time": DINNER_TIMES},
        "train": {"people": PEOPLE},
        "taxi": {
            "arrive": TIME_POOL,
            "leave": TIME_POOL,
            "departure": taxi_places,
            "destination": taxi_places,
            "car": tuple(f"{c} {m}" for c in CAR_COLORS for m in CAR_MAKES),
        },
    }
    return Database(schemas=dict(SCHEMAS), entities=tuple(entities), lexicons=lexicons)


def database_stats(db: Database) -> dict[str, dict[str, int]]:
    return {
        dom: {"entities": len(db.entities_in(dom)), "attributes": len(db.attributes_for(dom))}
        for dom in db.domains()
    }
