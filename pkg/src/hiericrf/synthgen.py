"""Synthetic hierarchical corpora with controllable separability.

A complete b-ary taxonomy of depth D is built, every node gets ``s``
private signature tokens, and each document for a leaf path draws
``n_doc`` tokens uniformly from the signatures along its path.  A noise
rate ``p`` then replaces tokens with uniform draws from the global
signature vocabulary, so noise words are confusable with real labels and
classification difficulty scales smoothly from trivially separable
(p=0) upward.
"""
from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidSpec
from .fewshot import Example, write_corpus
from .taxonomy import Taxonomy, load_taxonomy

__all__ = ["SynthSpec", "generate", "write_dataset"]


@dataclass(frozen=True)
class SynthSpec:
    branching: int = 3
    depth: int = 3
    signatures_per_node: int = 3
    tokens_per_doc: int = 30
    noise: float = 0.3
    docs_per_path: int = 6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.branching < 1:
            raise InvalidSpec(f"branching must be >= 1, got {self.branching}")
        if self.depth < 1:
            raise InvalidSpec(f"depth must be >= 1, got {self.depth}")
        if self.signatures_per_node < 1:
            raise InvalidSpec(
                f"signatures_per_node must be >= 1, got {self.signatures_per_node}"
            )
        if self.tokens_per_doc < 1:
            raise InvalidSpec(f"tokens_per_doc must be >= 1, got {self.tokens_per_doc}")
        if not 0.0 <= self.noise <= 1.0:
            raise InvalidSpec(f"noise must be in [0, 1], got {self.noise}")
        if self.docs_per_path < 1:
            raise InvalidSpec(f"docs_per_path must be >= 1, got {self.docs_per_path}")

    def split_sizes(self) -> tuple[int, int, int]:
        """Per-path (train, dev, test) document counts."""
        held = max(1, self.docs_per_path // 5) if self.docs_per_path >= 3 else 0
        train = self.docs_per_path - 2 * held
        return train, held, held


def _node_name(level: int, index: int) -> str:
    return f"c{level}x{index}"


def _signatures(level: int, index: int, s: int) -> list[str]:
    return [f"s{level}x{index}x{j}" for j in range(s)]


def _build_taxonomy(spec: SynthSpec) -> Taxonomy:
    labels = []
    for level in range(1, spec.depth + 1):
        for index in range(spec.branching**level):
            parent = (
                None if level == 1 else _node_name(level - 1, index // spec.branching)
            )
            labels.append(
                {"name": _node_name(level, index), "level": level, "parent": parent}
            )
    return load_taxonomy({"name": f"synth-b{spec.branching}-d{spec.depth}", "labels": labels})


def generate(spec: SynthSpec) -> tuple[Taxonomy, list[Example]]:
    """Build the taxonomy and all documents, path-major, ``docs_per_path`` each."""
    tax = _build_taxonomy(spec)
    rng = random.Random(spec.seed)

    sig_pool: dict[int, list[str]] = {}
    for node in tax.nodes:
        level_index = int(node.name.split("x")[1])
        sig_pool[node.id] = _signatures(node.level, level_index, spec.signatures_per_node)

    vocab = [t for node in tax.nodes for t in sig_pool[node.id]]

    corpus: list[Example] = []
    for path in tax.leaf_paths:
        pool = [t for label in path for t in sig_pool[label]]
        leaf_name = tax.nodes[path[-1]].name
        for j in range(spec.docs_per_path):
            tokens = [rng.choice(pool) for _ in range(spec.tokens_per_doc)]
            if spec.noise > 0.0:
                for i in range(spec.tokens_per_doc):
                    if rng.random() < spec.noise:
                        tokens[i] = rng.choice(vocab)
            corpus.append(
                Example(id=f"{leaf_name}-{j}", text=" ".join(tokens), path=path)
            )
    return tax, corpus


def write_dataset(spec: SynthSpec, outdir: str | Path) -> dict[str, Path]:
    """Generate and write taxonomy + train/dev/test splits + a SynthSpec echo.

    Documents are split per leaf path by position, so every path appears
    in every split whenever the split size allows.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tax, corpus = generate(spec)
    n_train, n_dev, n_test = spec.split_sizes()

    splits: dict[str, list[Example]] = {"train": [], "dev": [], "test": []}
    for start in range(0, len(corpus), spec.docs_per_path):
        block = corpus[start : start + spec.docs_per_path]
        splits["train"].extend(block[:n_train])
        splits["dev"].extend(block[n_train : n_train + n_dev])
        splits["test"].extend(block[n_train + n_dev : n_train + n_dev + n_test])

    paths = {"taxonomy": outdir / "taxonomy.json", "spec": outdir / "spec.json"}
    paths["taxonomy"].write_text(
        json.dumps(tax.serialize(), indent=2) + "\n", encoding="utf-8"
    )
    paths["spec"].write_text(
        json.dumps(dataclasses.asdict(spec), indent=2) + "\n", encoding="utf-8"
    )
    for name, examples in splits.items():
        paths[name] = outdir / f"{name}.jsonl"
        write_corpus(paths[name], examples, tax)
    return paths
