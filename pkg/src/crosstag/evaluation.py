"""Entity-level precision/recall/F1 with exact span-and-category matching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import LabeledSentence, TagScheme, tags_to_spans

__all__ = ["CategoryScore", "EntityF1Report", "entity_f1", "f1_from_tag_files"]


@dataclass(frozen=True)
class CategoryScore:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class EntityF1Report:
    per_category: dict[str, CategoryScore]
    micro: CategoryScore

    def categories(self) -> list[str]:
        return sorted(self.per_category)


def entity_f1(
    gold: Sequence[LabeledSentence],
    pred: Sequence[LabeledSentence],
) -> EntityF1Report:
    """Micro-averaged entity F1: a span counts only on an exact range+category match."""
    if len(gold) != len(pred):
        raise ValueError(
            f"gold has {len(gold)} sentences but predictions have {len(pred)}")
    counts: dict[str, list[int]] = {}

    def bucket(category: str) -> list[int]:
        return counts.setdefault(category, [0, 0, 0])

    for k, (g, p) in enumerate(zip(gold, pred)):
        if len(g.words) != len(p.words):
            raise ValueError(
                f"sentence {k}: gold has {len(g.words)} words but "
                f"prediction has {len(p.words)}")
        for span in g.spans & p.spans:
            bucket(span.category)[0] += 1
        for span in p.spans - g.spans:
            bucket(span.category)[1] += 1
        for span in g.spans - p.spans:
            bucket(span.category)[2] += 1

    per_category = {
        cat: CategoryScore(tp, fp, fn) for cat, (tp, fp, fn) in sorted(counts.items())
    }
    micro = CategoryScore(
        sum(s.tp for s in per_category.values()),
        sum(s.fp for s in per_category.values()),
        sum(s.fn for s in per_category.values()),
    )
    return EntityF1Report(per_category, micro)


def f1_from_tag_files(gold_path, pred_path, scheme: TagScheme) -> EntityF1Report:
    """Score two column files against each other (tags decoded with repair)."""
    from .formats import read_conll

    def to_sentences(rows):
        return [
            LabeledSentence(words, tags_to_spans(tags, scheme))
            for words, tags in rows
        ]

    return entity_f1(
        to_sentences(read_conll(gold_path)),
        to_sentences(read_conll(pred_path)),
    )
