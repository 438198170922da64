import json

import pytest

from hiericrf.errors import InvalidSpec
from hiericrf.fewshot import read_corpus
from hiericrf.synthgen import SynthSpec, generate, write_dataset
from hiericrf.taxonomy import load_taxonomy


def test_ternary_depth3_sizes():
    tax, corpus = generate(SynthSpec(branching=3, depth=3, docs_per_path=2, seed=1))
    assert [len(tax.ids_at_level(v)) for v in (1, 2, 3)] == [3, 9, 27]
    assert tax.m == 39
    assert len(tax.leaf_paths) == 27
    assert len(corpus) == 27 * 2


def test_single_path_tree():
    tax, corpus = generate(
        SynthSpec(branching=1, depth=2, noise=0.0, docs_per_path=3, seed=0)
    )
    assert len(tax.leaf_paths) == 1
    assert {e.path for e in corpus} == {tax.leaf_paths[0]}


def test_node_naming_and_parent_wiring():
    tax, _ = generate(SynthSpec(branching=2, depth=3, docs_per_path=1, seed=0))
    n = tax.node(tax.id_of("c3x5"))
    assert n.level == 3
    assert tax.nodes[n.parent].name == "c2x2"  # 5 // 2
    assert tax.nodes[tax.nodes[n.parent].parent].name == "c1x1"


def test_noiseless_docs_use_only_path_signatures():
    spec = SynthSpec(branching=3, depth=3, noise=0.0, docs_per_path=4, seed=9)
    tax, corpus = generate(spec)
    for ex in corpus:
        leaf_index = int(tax.nodes[ex.path[-1]].name.split("x")[1])
        for tok in ex.text.split():
            level, index, _ = (int(x) for x in tok[1:].split("x"))
            assert tok.startswith("s")
            assert level in (1, 2, 3)
            if level == 3:
                # deep signatures are private to the leaf
                assert index == leaf_index


def test_deterministic_and_seed_sensitive():
    spec = SynthSpec(seed=7, docs_per_path=2)
    assert generate(spec) == generate(spec)
    _, corpus_a = generate(spec)
    _, corpus_b = generate(SynthSpec(seed=8, docs_per_path=2))
    assert [e.text for e in corpus_a] != [e.text for e in corpus_b]


def test_noise_fraction_tracks_p():
    spec = SynthSpec(branching=3, depth=3, noise=0.5, docs_per_path=10, seed=3)
    tax, corpus = generate(spec)
    total = outside = 0
    for ex in corpus:
        pool = set()
        for label in ex.path:
            node = tax.nodes[label]
            idx = int(node.name.split("x")[1])
            pool |= {f"s{node.level}x{idx}x{j}" for j in range(spec.signatures_per_node)}
        for tok in ex.text.split():
            total += 1
            outside += tok not in pool
    # noise draws land outside the 9-token pool with probability ~p*(1 - 9/|vocab|)
    assert 0.35 < outside / total < 0.65


@pytest.mark.parametrize(
    "kwargs",
    [
        {"branching": 0},
        {"depth": 0},
        {"signatures_per_node": 0},
        {"tokens_per_doc": 0},
        {"noise": -0.1},
        {"noise": 1.01},
        {"docs_per_path": 0},
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(InvalidSpec):
        SynthSpec(**kwargs)


def test_split_sizes():
    assert SynthSpec(docs_per_path=10).split_sizes() == (6, 2, 2)
    assert SynthSpec(docs_per_path=6).split_sizes() == (4, 1, 1)
    assert SynthSpec(docs_per_path=5).split_sizes() == (3, 1, 1)
    assert SynthSpec(docs_per_path=2).split_sizes() == (2, 0, 0)


def test_write_dataset_output(tmp_path):
    spec = SynthSpec(branching=2, depth=2, docs_per_path=5, seed=11)
    paths = write_dataset(spec, tmp_path / "data")
    tax = load_taxonomy(paths["taxonomy"])
    assert tax.m == 6

    train = read_corpus(paths["train"], tax)
    dev = read_corpus(paths["dev"], tax)
    test = read_corpus(paths["test"], tax)
    assert (len(train), len(dev), len(test)) == (4 * 3, 4 * 1, 4 * 1)
    ids = [e.id for split in (train, dev, test) for e in split]
    assert len(ids) == len(set(ids))
    for split in (train, dev, test):
        assert {e.path for e in split} == set(tax.leaf_paths)

    echoed = json.loads(paths["spec"].read_text())
    assert echoed["branching"] == 2 and echoed["seed"] == 11


def test_write_dataset_reproducible(tmp_path):
    spec = SynthSpec(seed=4, docs_per_path=5)
    a = write_dataset(spec, tmp_path / "a")
    b = write_dataset(spec, tmp_path / "b")
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes()
