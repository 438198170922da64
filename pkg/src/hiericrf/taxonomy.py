"""Label-hierarchy loading, validation, and queries.

The hierarchy is a forest of trees rooted at the level-1 labels (no
root node is ever materialized or predicted).  Design principles:

  * every leaf sits at the maximum level, so the set of root-to-leaf
    paths assigns exactly one label per level;
  * labels get dense integer ids in document order, and every matrix in
    the package indexes labels by id;
  * a Taxonomy is immutable after load and safe to share across threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, UnknownLabel, ValidationError, InvalidGold


@dataclass(frozen=True)
class LabelNode:
    id: int
    name: str
    level: int
    parent: int | None  # parent label id, None iff level == 1


@dataclass
class Taxonomy:
    name: str
    nodes: list[LabelNode]
    depth: int = field(init=False)
    leaf_paths: list[tuple[int, ...]] = field(init=False)

    def __post_init__(self):
        self.depth = max(n.level for n in self.nodes)
        self._by_name = {n.name: n.id for n in self.nodes}
        self._children: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            if n.parent is not None:
                self._children[n.parent].append(n.id)
        leaves = [n.id for n in self.nodes if not self._children[n.id]]
        self.leaf_paths = [self._path_through(i) for i in sorted(leaves)]

    # -- size and lookup -------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.nodes)

    def id_of(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownLabel(f"unknown label name {name!r}") from None

    def node(self, label_id: int) -> LabelNode:
        if not 0 <= label_id < len(self.nodes):
            raise UnknownLabel(f"label id {label_id} out of range [0, {len(self.nodes)})")
        return self.nodes[label_id]

    def level_of(self, label_id: int) -> int:
        return self.node(label_id).level

    @property
    def levels(self) -> list[int]:
        """Per-id level, indexable by label id."""
        return [n.level for n in self.nodes]

    def ids_at_level(self, level: int) -> list[int]:
        return [n.id for n in self.nodes if n.level == level]

    def children(self, label_id: int) -> list[int]:
        self.node(label_id)
        return list(self._children[label_id])

    # -- path structure --------------------------------------------------

    def ancestors(self, label_id: int) -> list[int]:
        """Ancestor ids of a label, ordered level 1 .. level-1."""
        node = self.node(label_id)
        chain: list[int] = []
        while node.parent is not None:
            node = self.nodes[node.parent]
            chain.append(node.id)
        chain.reverse()
        return chain

    def level1_ancestor(self, label_id: int) -> int:
        """The level-1 label above this one (itself if already level 1)."""
        node = self.node(label_id)
        while node.parent is not None:
            node = self.nodes[node.parent]
        return node.id

    def _path_through(self, leaf_id: int) -> tuple[int, ...]:
        return tuple(self.ancestors(leaf_id) + [leaf_id])

    def resolve_path(self, names: list[str]) -> tuple[int, ...]:
        """Map a level-1..level-D name sequence to ids, checking it is a
        genuine root-to-leaf path."""
        ids = tuple(self.id_of(n) for n in names)
        if len(ids) != self.depth:
            raise InvalidGold(
                f"gold path {names!r} has {len(ids)} labels, taxonomy depth is {self.depth}"
            )
        for pos, label_id in enumerate(ids):
            node = self.nodes[label_id]
            if node.level != pos + 1:
                raise InvalidGold(f"label {node.name!r} is level {node.level}, expected {pos + 1}")
            if pos > 0 and node.parent != ids[pos - 1]:
                raise InvalidGold(
                    f"label {node.name!r} is not a child of {self.nodes[ids[pos - 1]].name!r}"
                )
        return ids

    # -- serialization ---------------------------------------------------

    def serialize(self) -> dict:
        return {
            "name": self.name,
            "labels": [
                {
                    "name": n.name,
                    "level": n.level,
                    "parent": None if n.parent is None else self.nodes[n.parent].name,
                }
                for n in self.nodes
            ],
        }

    def content_hash(self) -> str:
        blob = json.dumps(self.serialize(), sort_keys=True, ensure_ascii=True)
        return hashlib.blake2b(blob.encode("utf-8"), digest_size=16).hexdigest()


def load_taxonomy(source) -> Taxonomy:
    """Load and validate a taxonomy from a JSON file path or a parsed dict.

    Document format: ``{"name": str, "labels": [{"name", "level", "parent"}]}``
    with parents referenced by name and ids assigned in document order.
    """
    if isinstance(source, (str, Path)):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read taxonomy file {source}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"taxonomy file {source} is not valid JSON: {exc}") from exc
    elif isinstance(source, dict):
        doc = source
    else:
        raise ParseError(f"unsupported taxonomy source type {type(source).__name__}")
    return _validate(doc)


def _validate(doc: dict) -> Taxonomy:
    if not isinstance(doc, dict) or "labels" not in doc:
        raise ValidationError("taxonomy document must be an object with a 'labels' list")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ValidationError("taxonomy 'name' must be a string")
    raw = doc["labels"]
    if not isinstance(raw, list) or not raw:
        raise ValidationError("taxonomy 'labels' must be a non-empty list")

    by_name: dict[str, int] = {}
    entries: list[tuple[str, int, str | None]] = []
    for pos, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ValidationError(f"label entry {pos} is not an object")
        lname = item.get("name")
        level = item.get("level")
        parent = item.get("parent", None)
        if not isinstance(lname, str) or not lname:
            raise ValidationError(f"label entry {pos} has no usable 'name'")
        if isinstance(level, bool) or not isinstance(level, int) or level < 1:
            raise ValidationError(f"label {lname!r} has invalid level {level!r}")
        if parent is not None and not isinstance(parent, str):
            raise ValidationError(f"label {lname!r} has non-string parent {parent!r}")
        if lname in by_name:
            raise ValidationError(f"duplicate label name {lname!r}")
        by_name[lname] = pos
        entries.append((lname, level, parent))

    nodes: list[LabelNode] = []
    for pos, (lname, level, parent) in enumerate(entries):
        if level == 1:
            if parent is not None:
                raise ValidationError(f"level-1 label {lname!r} must have null parent")
            pid = None
        else:
            if parent is None:
                raise ValidationError(f"label {lname!r} at level {level} requires a parent")
            if parent not in by_name:
                raise ValidationError(f"label {lname!r} references unknown parent {parent!r}")
            pid = by_name[parent]
            plevel = entries[pid][1]
            if plevel != level - 1:
                raise ValidationError(
                    f"label {lname!r} at level {level} has parent {parent!r} at level {plevel}; "
                    f"expected level {level - 1}"
                )
        nodes.append(LabelNode(id=pos, name=lname, level=level, parent=pid))

    depth = max(n.level for n in nodes)
    present = {n.level for n in nodes}
    for lv in range(1, depth + 1):
        if lv not in present:
            raise ValidationError(f"level gap: no labels at level {lv}")

    has_child = {n.parent for n in nodes if n.parent is not None}
    for n in nodes:
        if n.id not in has_child and n.level != depth:
            raise ValidationError(
                f"leaf {n.name!r} sits at level {n.level} < depth {depth}; "
                "all leaves must reach the maximum level"
            )

    return Taxonomy(name=name, nodes=nodes)


def ancestors(tax: Taxonomy, label_id: int) -> list[int]:
    return tax.ancestors(label_id)


def legal_level_pairs(tax: Taxonomy, schedule) -> set[tuple[int, int]]:
    """The set of consecutive (level, level) pairs occurring in a schedule.

    Transitions whose level pair is outside this set can never occur in a
    schedule-conforming decode and are initialized to a penalty.
    """
    levels = schedule.levels
    return {(levels[i], levels[i + 1]) for i in range(len(levels) - 1)}
