"""Projection candidates: generation and filtering.

For every labeled source span we keep a ranked list of candidate target
word ranges. Candidates come from two generators: the n-gram generator
enumerates every contiguous range of the target sentence, while external
generators (e.g. a text-to-text model) supply ranked free-text guesses that
must first be located in the target sentence before selection.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .core import Span

__all__ = [
    "Candidate",
    "CandidateSet",
    "CandidateSource",
    "external_candidates",
    "filter_candidates",
    "generate_ngram_candidates",
]


class CandidateSource(Enum):
    NGRAM = "ngram"
    EXTERNAL = "external"


@dataclass(frozen=True)
class Candidate:
    """One candidate target range (or raw text awaiting location) for a span.

    ``rank`` is the candidate's position in its generator's ranked output;
    ``start``/``end`` stay None for external free-text candidates until
    ``filter_candidates`` locates them in the target sentence.
    """

    text: str
    rank: int
    start: int | None = None
    end: int | None = None

    @property
    def located(self) -> bool:
        return self.start is not None and self.end is not None

    def overlaps_range(self, start: int, end: int) -> bool:
        if not self.located:
            return False
        return self.start < end and start < self.end


@dataclass
class CandidateSet:
    """Per-source-span candidate lists for one target sentence."""

    target_words: tuple[str, ...]
    per_span: dict[Span, tuple[Candidate, ...]]
    source: CandidateSource

    def __post_init__(self) -> None:
        self.target_words = tuple(self.target_words)
        m = len(self.target_words)
        for span, cands in self.per_span.items():
            self.per_span[span] = tuple(cands)
            for cand in self.per_span[span]:
                if cand.located and not (0 <= cand.start < cand.end <= m):
                    raise ValueError(
                        f"candidate range [{cand.start}, {cand.end}) outside "
                        f"target of length {m} (span {span})")

    @property
    def all_located(self) -> bool:
        return all(
            cand.located for cands in self.per_span.values() for cand in cands
        )

    def sorted_spans(self) -> list[Span]:
        return sorted(self.per_span)


def generate_ngram_candidates(
    target_words: Sequence[str],
    source_spans: Iterable[Span],
) -> CandidateSet:
    """Enumerate every contiguous target range as a candidate for each span.

    A target of m words yields m*(m+1)/2 candidates per span, ranked by
    (start, end).
    """
    words = tuple(target_words)
    ranges: list[Candidate] = []
    rank = 0
    for start in range(len(words)):
        for end in range(start + 1, len(words) + 1):
            ranges.append(Candidate(
                text=" ".join(words[start:end]), rank=rank, start=start, end=end))
            rank += 1
    per_span = {span: tuple(ranges) for span in source_spans}
    return CandidateSet(words, per_span, CandidateSource.NGRAM)


def external_candidates(
    target_words: Sequence[str],
    ranked_texts: Mapping[Span, Sequence[str]],
) -> CandidateSet:
    """Wrap ranked free-text candidate lists; location happens at filtering."""
    per_span = {
        span: tuple(Candidate(text=text, rank=rank) for rank, text in enumerate(texts))
        for span, texts in ranked_texts.items()
    }
    return CandidateSet(tuple(target_words), per_span, CandidateSource.EXTERNAL)


def _occurrences(needle: Sequence[str], haystack: Sequence[str]) -> list[tuple[int, int]]:
    k = len(needle)
    if k == 0 or k > len(haystack):
        return []
    return [
        (i, i + k)
        for i in range(len(haystack) - k + 1)
        if tuple(haystack[i : i + k]) == tuple(needle)
    ]


def filter_candidates(
    candidates: CandidateSet,
    target_words: Sequence[str],
) -> CandidateSet:
    """Keep only candidates that occur as contiguous word runs of the target.

    Free-text candidates become one located candidate per occurrence (all
    occurrences share the text's rank); candidates that cannot be located,
    e.g. hallucinated spans, are dropped. Already-located candidates pass
    through. Duplicated ranges keep their best rank.
    """
    words = tuple(target_words)
    per_span: dict[Span, tuple[Candidate, ...]] = {}
    for span, cands in candidates.per_span.items():
        by_range: dict[tuple[int, int], Candidate] = {}
        for cand in cands:
            if cand.located:
                located = [cand]
            else:
                located = [
                    Candidate(" ".join(words[i:j]), cand.rank, i, j)
                    for i, j in _occurrences(cand.text.split(), words)
                ]
            for one in located:
                key = (one.start, one.end)
                best = by_range.get(key)
                if best is None or one.rank < best.rank:
                    by_range[key] = one
        per_span[span] = tuple(
            sorted(by_range.values(), key=lambda c: (c.rank, c.start, c.end))
        )
    return CandidateSet(words, per_span, candidates.source)
