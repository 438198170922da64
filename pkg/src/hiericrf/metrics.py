"""Micro/Macro F1 and the two consistency-constrained variants.

Counting is per (sample, label) incidence.  Micro pools TP/FP/FN over
everything; macro averages per-label F1 over all labels of the taxonomy
(absent labels contribute 0).  The variants re-filter each sample's
predicted set before counting; gold is never touched, so labels a filter
removes turn into false negatives:

  * ancestor-consistency ("c"): a predicted label stands only if every
    one of its ancestors was also predicted;
  * path-consistency ("p"): a predicted label stands only if it is gold
    and the sample's entire gold root-to-leaf path was predicted —
    per sample, credit is all-or-nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidGold, UnknownLabel
from .taxonomy import Taxonomy

VARIANTS = ("standard", "c", "p")


@dataclass
class MetricsReport:
    micro_f1: float
    macro_f1: float
    c_micro_f1: float
    c_macro_f1: float
    p_micro_f1: float
    p_macro_f1: float
    per_label_counts: dict

    def to_dict(self) -> dict:
        return {
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "c_micro_f1": self.c_micro_f1,
            "c_macro_f1": self.c_macro_f1,
            "p_micro_f1": self.p_micro_f1,
            "p_macro_f1": self.p_macro_f1,
            "per_label_counts": self.per_label_counts,
        }


def _f1(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _check_sets(samples, tax: Taxonomy):
    checked = []
    for pred, gold in samples:
        pred = frozenset(pred)
        gold = frozenset(gold)
        for label in pred | gold:
            tax.node(label)  # raises UnknownLabel on bad ids
        levels = sorted(tax.level_of(g) for g in gold)
        if levels != list(range(1, tax.depth + 1)):
            raise InvalidGold(f"gold set {sorted(gold)} is not one label per level 1..{tax.depth}")
        by_level = {tax.level_of(g): g for g in gold}
        for lv in range(2, tax.depth + 1):
            if tax.nodes[by_level[lv]].parent != by_level[lv - 1]:
                raise InvalidGold(f"gold set {sorted(gold)} is not a parent-child chain")
        checked.append((pred, gold))
    return checked


def _filter_pred(pred: frozenset, gold: frozenset, tax: Taxonomy, variant: str) -> frozenset:
    if variant == "standard":
        return pred
    if variant == "c":
        return frozenset(v for v in pred if all(a in pred for a in tax.ancestors(v)))
    # "p": keep only gold labels whose full gold path was predicted
    return frozenset(v for v in pred if v in gold and gold <= pred)


def evaluate(samples, tax: Taxonomy) -> MetricsReport:
    """Score (predicted label set, gold path set) pairs; labels are ids."""
    checked = _check_sets(samples, tax)
    m = tax.m
    counts = {variant: {"tp": [0] * m, "fp": [0] * m, "fn": [0] * m} for variant in VARIANTS}
    for pred, gold in checked:
        for variant in VARIANTS:
            kept = _filter_pred(pred, gold, tax, variant)
            table = counts[variant]
            for v in kept:
                if v in gold:
                    table["tp"][v] += 1
                else:
                    table["fp"][v] += 1
            for g in gold - kept:
                table["fn"][g] += 1

    scores = {}
    for variant in VARIANTS:
        table = counts[variant]
        micro = _f1(sum(table["tp"]), sum(table["fp"]), sum(table["fn"]))
        macro = sum(
            _f1(table["tp"][j], table["fp"][j], table["fn"][j]) for j in range(m)
        ) / m
        scores[variant] = (micro, macro)

    return MetricsReport(
        micro_f1=scores["standard"][0],
        macro_f1=scores["standard"][1],
        c_micro_f1=scores["c"][0],
        c_macro_f1=scores["c"][1],
        p_micro_f1=scores["p"][0],
        p_macro_f1=scores["p"][1],
        per_label_counts=counts,
    )


def evaluate_names(samples, tax: Taxonomy) -> MetricsReport:
    """Same as evaluate, but label sets are given by name."""
    resolved = [
        ({tax.id_of(p) for p in pred}, {tax.id_of(g) for g in gold}) for pred, gold in samples
    ]
    return evaluate(resolved, tax)
