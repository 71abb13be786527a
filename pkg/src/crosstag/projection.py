"""Alignment-based label projection between parallel sentences.

Given a labeled source sentence, its unlabeled translation, and a set of
word-alignment pairs, each labeled source range is carried over to the
target words it aligns with. Three repair heuristics deal with aligner
noise, applied in this order per sentence:

1. alignment pairs whose target word is pure punctuation and whose source
   word sits inside a labeled range are ignored;
2. the aligned target positions of one source range are grouped into
   contiguous runs; runs separated by exactly one unaligned word are merged
   (iteratively, left to right), and if several runs still remain only the
   longest survives (leftmost on ties);
3. overlaps between the projected ranges of different source ranges are
   resolved: same-category overlaps merge into their union, different
   categories keep the longer projection (on ties, the one whose source
   range starts earlier).
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import LabeledSentence, Span

__all__ = [
    "AlignmentSet",
    "ProjectionReport",
    "project",
    "translate_test_backproject",
    "translate_train_assemble",
]


@dataclass(frozen=True)
class AlignmentSet:
    """Word-alignment pairs (source index, target index) for one sentence pair."""

    pairs: frozenset[tuple[int, int]]

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()) -> None:
        normalized = frozenset((int(i), int(j)) for i, j in pairs)
        for i, j in normalized:
            if i < 0 or j < 0:
                raise ValueError(f"negative alignment index in pair ({i}, {j})")
        object.__setattr__(self, "pairs", normalized)

    @classmethod
    def from_pharaoh(cls, line: str) -> "AlignmentSet":
        """Parse one line of space-separated ``i-j`` pairs."""
        pairs = []
        for token in line.split():
            left, sep, right = token.partition("-")
            if not sep or not left.isdigit() or not right.isdigit():
                raise ValueError(f"malformed alignment token {token!r}")
            pairs.append((int(left), int(right)))
        return cls(pairs)

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class ProjectionReport:
    """Projected target spans plus an audit trail of the repair heuristics.

    Counter semantics: ``merged_gaps`` counts run-merge events, and
    ``dropped_splits`` counts discarded runs, both within single source
    spans. ``collisions_merged`` counts same-category merge events and
    ``collisions_resolved`` counts spans discarded in different-category
    overlaps; each event reduces the projected span count by one, so

        len(projected) == aligned source spans
                          - collisions_merged - collisions_resolved

    where aligned source spans = total source spans - ``unaligned_spans``.
    """

    projected: frozenset[Span]
    merged_gaps: int = 0
    dropped_splits: int = 0
    collisions_merged: int = 0
    collisions_resolved: int = 0
    punct_alignments_ignored: int = 0
    unaligned_spans: int = 0


def _is_punctuation(word: str) -> bool:
    return bool(word) and all(
        unicodedata.category(ch).startswith("P") for ch in word
    )


def _contiguous_runs(indices: Iterable[int]) -> list[tuple[int, int]]:
    """Group sorted indices into half-open [start, end) runs."""
    runs: list[tuple[int, int]] = []
    for idx in sorted(indices):
        if runs and idx == runs[-1][1]:
            runs[-1] = (runs[-1][0], idx + 1)
        else:
            runs.append((idx, idx + 1))
    return runs


def _merge_one_word_gaps(runs: list[tuple[int, int]]) -> tuple[list[tuple[int, int]], int]:
    merged = [runs[0]]
    events = 0
    for run in runs[1:]:
        if run[0] == merged[-1][1] + 1:
            merged[-1] = (merged[-1][0], run[1])
            events += 1
        else:
            merged.append(run)
    return merged, events


def project(
    source: LabeledSentence,
    target_words: Sequence[str],
    alignment: AlignmentSet,
) -> ProjectionReport:
    """Project the source sentence's spans onto the target words."""
    n_src, n_tgt = len(source.words), len(target_words)
    for i, j in alignment.pairs:
        if i >= n_src or j >= n_tgt:
            raise ValueError(
                f"alignment pair ({i}, {j}) out of range for sentence pair "
                f"of lengths {n_src}/{n_tgt}")
    if n_tgt == 0 or not source.spans:
        return ProjectionReport(frozenset(), unaligned_spans=len(source.spans))

    labeled_src = set()
    for span in source.spans:
        labeled_src.update(range(span.start, span.end))
    pairs = set()
    punct_ignored = 0
    for i, j in alignment.pairs:
        if i in labeled_src and _is_punctuation(target_words[j]):
            punct_ignored += 1
        else:
            pairs.add((i, j))

    merged_gaps = 0
    dropped_splits = 0
    unaligned = 0
    candidates: list[tuple[Span, Span]] = []  # (projected, source span)
    for span in source.sorted_spans:
        hits = {j for i, j in pairs if span.start <= i < span.end}
        if not hits:
            unaligned += 1
            continue
        runs, events = _merge_one_word_gaps(_contiguous_runs(hits))
        merged_gaps += events
        if len(runs) > 1:
            dropped_splits += len(runs) - 1
            runs = [max(runs, key=lambda r: (r[1] - r[0], -r[0]))]
        start, end = runs[0]
        candidates.append((Span(start, end, span.category), span))

    collisions_merged = 0
    collisions_resolved = 0
    accepted: list[tuple[Span, Span]] = []
    for projected, src_span in candidates:
        current: tuple[Span, Span] | None = (projected, src_span)
        i = 0
        while current is not None and i < len(accepted):
            acc_proj, acc_src = accepted[i]
            cur_proj, cur_src = current
            if not cur_proj.overlaps(acc_proj):
                i += 1
                continue
            if cur_proj.category == acc_proj.category:
                union = Span(
                    min(cur_proj.start, acc_proj.start),
                    max(cur_proj.end, acc_proj.end),
                    cur_proj.category)
                accepted.pop(i)
                # keep the earlier source span as the owner for later ties
                owner = acc_src if acc_src.start <= cur_src.start else cur_src
                current = (union, owner)
                collisions_merged += 1
                i = 0  # the union may now overlap earlier accepted spans
            elif cur_proj.length > acc_proj.length:
                accepted.pop(i)
                collisions_resolved += 1
            else:
                # shorter, or equal length with a later source span: drop it
                current = None
                collisions_resolved += 1
        if current is not None:
            accepted.append(current)

    return ProjectionReport(
        projected=frozenset(span for span, _ in accepted),
        merged_gaps=merged_gaps,
        dropped_splits=dropped_splits,
        collisions_merged=collisions_merged,
        collisions_resolved=collisions_resolved,
        punct_alignments_ignored=punct_ignored,
        unaligned_spans=unaligned,
    )


def _check_parallel_lengths(name_a: str, a: Sequence, name_b: str, b: Sequence) -> None:
    if len(a) != len(b):
        diverge = min(len(a), len(b))
        raise ValueError(
            f"{name_a} and {name_b} diverge at index {diverge}: "
            f"{len(a)} vs {len(b)} items")


def translate_train_assemble(
    source_dataset: Sequence[LabeledSentence],
    translations: Sequence[Sequence[str]],
    alignments: Sequence[AlignmentSet],
) -> list[LabeledSentence]:
    """Project gold labels onto translations, yielding a silver training set.

    Sentences are independent (pure per-sentence projection), so callers
    may fan the work out; output order always matches input order.
    """
    _check_parallel_lengths("sources", source_dataset, "translations", translations)
    _check_parallel_lengths("sources", source_dataset, "alignments", alignments)
    out = []
    for k, (src, words, align) in enumerate(zip(source_dataset, translations, alignments)):
        try:
            report = project(src, words, align)
        except ValueError as exc:
            raise ValueError(f"sentence {k}: {exc}") from exc
        out.append(LabeledSentence(words, report.projected))
    return out


def translate_test_backproject(
    predictions_on_translation: Sequence[LabeledSentence],
    original_words: Sequence[Sequence[str]],
    alignments: Sequence[AlignmentSet],
) -> list[LabeledSentence]:
    """Project predictions made on translations back onto the original sentences.

    Alignment pairs are read with the prediction side as source and the
    original side as target.
    """
    return translate_train_assemble(predictions_on_translation, original_words, alignments)
