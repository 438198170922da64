import pytest

from hiericrf.taxonomy import load_taxonomy


def tiny_tax_doc():
    # A: level-1 with children B, C; X: second level-1 root with child Y.
    return {
        "name": "tiny",
        "labels": [
            {"name": "A", "level": 1, "parent": None},
            {"name": "B", "level": 2, "parent": "A"},
            {"name": "C", "level": 2, "parent": "A"},
            {"name": "X", "level": 1, "parent": None},
            {"name": "Y", "level": 2, "parent": "X"},
        ],
    }


def depth3_tax_doc():
    # two roots, two mid nodes under the first, one under the second,
    # leaves fanning out at level 3
    return {
        "name": "d3",
        "labels": [
            {"name": "a", "level": 1, "parent": None},
            {"name": "b", "level": 2, "parent": "a"},
            {"name": "c", "level": 3, "parent": "b"},
            {"name": "d", "level": 3, "parent": "b"},
            {"name": "e", "level": 2, "parent": "a"},
            {"name": "f", "level": 3, "parent": "e"},
            {"name": "g", "level": 1, "parent": None},
            {"name": "h", "level": 2, "parent": "g"},
            {"name": "i", "level": 3, "parent": "h"},
        ],
    }


@pytest.fixture
def tiny_tax():
    return load_taxonomy(tiny_tax_doc())


@pytest.fixture
def depth3_tax():
    return load_taxonomy(depth3_tax_doc())
