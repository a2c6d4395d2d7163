from __future__ import annotations

import pytest

from mgdial.dbgen import ENTITY_COUNTS, SCHEMAS, build_database, database_stats
from mgdial.model import load_database, save_database


@pytest.fixture(scope="module")
def db():
    return build_database(seed=11)


def test_entity_counts(db):
    stats = database_stats(db)
    assert stats["attraction"]["entities"] == 465
    assert stats["hospital"]["entities"] == 91
    assert stats["hotel"]["entities"] == 1133
    assert stats["restaurant"]["entities"] == 951
    assert stats["train"]["entities"] == 1022
    assert stats["taxi"]["entities"] == 0


def test_attribute_counts(db):
    stats = database_stats(db)
    assert stats["attraction"]["attributes"] == 8
    assert stats["hospital"]["attributes"] == 6
    assert stats["hotel"]["attributes"] == 13
    assert stats["restaurant"]["attributes"] == 12
    assert stats["train"]["attributes"] == 12
    assert stats["taxi"]["attributes"] == 6


def test_entities_cover_their_schema(db):
    # every entity value key must be a declared schema attribute
    for e in db.entities:
        schema = set(SCHEMAS[e.domain])
        assert set(e.values) <= schema, (e.domain, set(e.values) - schema)


def test_every_schema_attr_has_values(db):
    for dom in db.domains():
        for attr in db.attributes_for(dom):
            if dom == "taxi" and attr == "phone":
                continue  # assigned per ride by the engine
            assert db.values_for(dom, attr), f"{dom}.{attr} has no value pool"


def test_names_unique_within_domain(db):
    for dom in ("attraction", "hospital", "hotel", "restaurant", "train"):
        names = [e.name for e in db.entities_in(dom)]
        assert len(names) == len(set(names)), dom


def test_determinism():
    a = build_database(seed=5)
    b = build_database(seed=5)
    assert a == b
    c = build_database(seed=6)
    assert a != c


def test_booking_attrs_not_on_entities(db):
    for e in db.entities_in("hotel"):
        assert "day" not in e.values and "stay" not in e.values
    assert set(db.values_for("hotel", "stay")) == {"1 night"} | {f"{n} nights" for n in range(2, 8)}


def test_taxi_places_come_from_venues(db):
    venue_names = {e.name for e in db.entities if e.domain in ("hotel", "restaurant", "attraction")}
    for place in db.lexicons["taxi"]["departure"]:
        assert place in venue_names


def test_roundtrip_through_file(tmp_path, db):
    p = tmp_path / "db.json"
    save_database(db, p)
    assert load_database(p) == db


def test_counts_constant_matches():
    assert sum(ENTITY_COUNTS.values()) == 465 + 91 + 1133 + 951 + 1022
