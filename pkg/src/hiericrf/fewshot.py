"""Greedy K-shot support-set construction.

Builds a training subset in which every root-to-leaf label path is
represented by exactly ``k`` examples: shuffle the corpus once with a
seeded PRNG, then scan and accept any example whose path still has an
open quota slot.  Because each example carries exactly one path, the
single greedy pass is exact whenever the corpus has enough data.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InsufficientData, InvalidArgument, ParseError
from .taxonomy import Taxonomy

__all__ = ["Example", "SupportSet", "read_corpus", "write_corpus", "greedy_sample"]


@dataclass(frozen=True)
class Example:
    """One labeled document: free text plus its root-to-leaf path (label ids)."""

    id: str
    text: str
    path: tuple[int, ...]


@dataclass
class SupportSet:
    examples: list[Example]
    k: int
    seed: int
    complete: bool = True
    _counts: dict[tuple[int, ...], int] = field(default_factory=dict, repr=False)

    def count_for(self, path: tuple[int, ...]) -> int:
        return self._counts.get(tuple(path), 0)

    def __len__(self) -> int:
        return len(self.examples)


def read_corpus(path: str | Path, tax: Taxonomy) -> list[Example]:
    """Load a JSONL corpus of ``{"id", "text", "path": [names]}`` records."""
    out: list[Example] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            try:
                ids = tax.resolve_path(list(rec["path"]))
                out.append(Example(id=str(rec["id"]), text=str(rec["text"]), path=ids))
            except KeyError as exc:
                raise ParseError(f"{path}:{lineno}: missing field {exc}") from exc
    return out


def write_corpus(path: str | Path, examples: list[Example], tax: Taxonomy) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            rec = {
                "id": ex.id,
                "text": ex.text,
                "path": [tax.nodes[i].name for i in ex.path],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def greedy_sample(
    corpus: list[Example], tax: Taxonomy, k: int, seed: int
) -> SupportSet:
    """Sample ``k`` examples per leaf path.

    The corpus order is randomized once (``random.Random(seed)``), after
    which a single pass accepts each example iff its path's quota is not
    yet full.  Raises :class:`InsufficientData` naming every deficient
    path; the partially filled set rides along on the exception so a
    caller may proceed deliberately.
    """
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")
    pool = list(corpus)
    random.Random(seed).shuffle(pool)

    quotas = {path: 0 for path in tax.leaf_paths}
    chosen: list[Example] = []
    open_slots = k * len(quotas)
    for ex in pool:
        if ex.path not in quotas:
            raise InvalidArgument(
                f"example {ex.id!r} has path {ex.path}, not a leaf path of this taxonomy"
            )
        if quotas[ex.path] < k:
            quotas[ex.path] += 1
            chosen.append(ex)
            open_slots -= 1
            if open_slots == 0:
                break

    short = sorted(path for path, n in quotas.items() if n < k)
    support = SupportSet(
        examples=chosen, k=k, seed=seed, complete=not short, _counts=quotas
    )
    if short:
        names = [" / ".join(tax.nodes[i].name for i in p) for p in short]
        raise InsufficientData(
            f"{len(short)} path(s) have fewer than {k} examples: {names}",
            paths=tuple(short),
            partial=support,
        )
    return support
