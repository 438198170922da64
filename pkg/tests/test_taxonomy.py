import json
import random

import pytest
from hypothesis import given, strategies as st

from hiericrf.chain import build_schedule
from hiericrf.errors import InvalidGold, ParseError, UnknownLabel, ValidationError
from hiericrf.taxonomy import legal_level_pairs, load_taxonomy

from conftest import depth3_tax_doc, tiny_tax_doc


def test_ids_follow_document_order(tiny_tax):
    assert [n.name for n in tiny_tax.nodes] == ["A", "B", "C", "X", "Y"]
    assert [n.id for n in tiny_tax.nodes] == [0, 1, 2, 3, 4]
    assert tiny_tax.m == 5
    assert tiny_tax.depth == 2


def test_minimal_single_node():
    tax = load_taxonomy({"name": "one", "labels": [{"name": "only", "level": 1, "parent": None}]})
    assert tax.depth == 1
    assert tax.m == 1
    assert tax.leaf_paths == [(0,)]


def test_leaf_paths_cover_one_label_per_level(depth3_tax):
    assert len(depth3_tax.leaf_paths) == 4
    for path in depth3_tax.leaf_paths:
        assert [depth3_tax.level_of(i) for i in path] == [1, 2, 3]
        for a, b in zip(path, path[1:]):
            assert depth3_tax.nodes[b].parent == a


def test_ancestors_root_is_empty(tiny_tax):
    assert tiny_tax.ancestors(tiny_tax.id_of("A")) == []
    assert tiny_tax.ancestors(tiny_tax.id_of("X")) == []


def test_ancestors_walks_to_level_one(depth3_tax):
    c = depth3_tax.id_of("c")
    assert depth3_tax.ancestors(c) == [depth3_tax.id_of("a"), depth3_tax.id_of("b")]
    assert depth3_tax.level1_ancestor(c) == depth3_tax.id_of("a")


def test_ancestors_unknown_id(tiny_tax):
    with pytest.raises(UnknownLabel):
        tiny_tax.ancestors(99)
    with pytest.raises(UnknownLabel):
        tiny_tax.id_of("nope")


def test_ancestors_prefix_of_leaf_path(depth3_tax):
    for path in depth3_tax.leaf_paths:
        for pos, label_id in enumerate(path):
            assert tuple(depth3_tax.ancestors(label_id)) == path[:pos]


def test_legal_level_pairs_depth2():
    tax = load_taxonomy(tiny_tax_doc())
    sched = build_schedule(2, 2)
    assert sched.levels == (1, 2, 1, 2, 1)
    assert legal_level_pairs(tax, sched) == {(1, 2), (2, 1)}


def test_legal_level_pairs_depth3_two_iters(depth3_tax):
    sched = build_schedule(3, 2)
    assert sched.levels == (1, 2, 3, 2, 1, 3, 2, 1)
    assert legal_level_pairs(depth3_tax, sched) == {(1, 2), (2, 3), (3, 2), (2, 1), (1, 3)}


def test_legal_level_pairs_depth1():
    tax = load_taxonomy({"name": "one", "labels": [{"name": "only", "level": 1, "parent": None}]})
    sched = build_schedule(1, 3)
    assert sched.l > 1
    assert legal_level_pairs(tax, sched) == {(1, 1)}


def test_serialize_roundtrip(depth3_tax):
    again = load_taxonomy(depth3_tax.serialize())
    assert again.serialize() == depth3_tax.serialize()
    assert [n.name for n in again.nodes] == [n.name for n in depth3_tax.nodes]
    assert again.content_hash() == depth3_tax.content_hash()


def test_load_from_file(tmp_path):
    p = tmp_path / "tax.json"
    p.write_text(json.dumps(tiny_tax_doc()), encoding="utf-8")
    tax = load_taxonomy(p)
    assert tax.m == 5


def test_parse_error_on_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError):
        load_taxonomy(p)
    with pytest.raises(ParseError):
        load_taxonomy(tmp_path / "missing.json")


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda d: d["labels"].append({"name": "B", "level": 2, "parent": "A"}), "duplicate"),
        (lambda d: d["labels"].append({"name": "Z", "level": 3, "parent": "B"}), "leaf"),
        (lambda d: d["labels"].append({"name": "Z", "level": 2, "parent": "Q"}), "unknown parent"),
        (lambda d: d["labels"].append({"name": "Z", "level": 1, "parent": "A"}), "null parent"),
        (lambda d: d["labels"].append({"name": "Z", "level": 2, "parent": None}), "requires a parent"),
        (lambda d: d["labels"].__setitem__(1, {"name": "B", "level": 3, "parent": "A"}), "level"),
        (lambda d: d.pop("labels"), "labels"),
    ],
)
def test_validation_errors(mutate, fragment):
    doc = tiny_tax_doc()
    mutate(doc)
    with pytest.raises(ValidationError) as err:
        load_taxonomy(doc)
    assert fragment in str(err.value)


def test_level_gap_rejected():
    doc = {
        "name": "gap",
        "labels": [
            {"name": "A", "level": 1, "parent": None},
            {"name": "B", "level": 2, "parent": "A"},
            # C claims level 3 under a level-1 parent
            {"name": "C", "level": 3, "parent": "A"},
        ],
    }
    with pytest.raises(ValidationError):
        load_taxonomy(doc)


def test_resolve_path(depth3_tax):
    ids = depth3_tax.resolve_path(["a", "b", "c"])
    assert ids == (0, 1, 2)
    with pytest.raises(InvalidGold):
        depth3_tax.resolve_path(["a", "b"])  # too short
    with pytest.raises(InvalidGold):
        depth3_tax.resolve_path(["a", "h", "i"])  # h is not a's child
    with pytest.raises(InvalidGold):
        depth3_tax.resolve_path(["a", "b", "f"])  # f is not b's child
    with pytest.raises(UnknownLabel):
        depth3_tax.resolve_path(["a", "b", "zzz"])


def _random_tax_doc(rng: random.Random):
    depth = rng.randint(1, 4)
    labels = []
    prev = []
    counter = 0
    for level in range(1, depth + 1):
        width = rng.randint(1, 3) if level > 1 else rng.randint(1, 3)
        current = []
        if level == 1:
            for _ in range(width):
                labels.append({"name": f"n{counter}", "level": 1, "parent": None})
                current.append(f"n{counter}")
                counter += 1
        else:
            # every parent needs at least one child to stay mandatory-leaf
            for parent in prev:
                for _ in range(rng.randint(1, 2)):
                    labels.append({"name": f"n{counter}", "level": level, "parent": parent})
                    current.append(f"n{counter}")
                    counter += 1
        prev = current
    return {"name": "rand", "labels": labels}


@given(st.integers(min_value=0, max_value=10_000))
def test_ancestors_prefix_property_random_taxonomies(seed):
    tax = load_taxonomy(_random_tax_doc(random.Random(seed)))
    for path in tax.leaf_paths:
        assert len(path) == tax.depth
        for pos, label_id in enumerate(path):
            assert tuple(tax.ancestors(label_id)) == path[:pos]
            assert tax.level_of(label_id) == pos + 1
