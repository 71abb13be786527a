"""Candidate selection: pick the best target range for each source span.

Selection is greedy over source spans in left-to-right order. For a span,
the pool is every located candidate sharing its category, regardless of
which span generated it; once a winner is chosen, every candidate
overlapping it (any category) leaves the pool, so the output spans never
overlap. Ties on score break toward the lower start index, then the
shorter range.
"""

from __future__ import annotations

import logging

from .candidates import Candidate, CandidateSet
from .core import LabeledSentence, Span
from .scoring import ScoreCache, TranslationScorer, translation_similarity

__all__ = [
    "candidate_sweep",
    "oracle_upper_bound",
    "select_candidates",
    "select_most_probable",
]

logger = logging.getLogger(__name__)


def _require_located(candidates: CandidateSet, op: str) -> None:
    if not candidates.all_located:
        raise ValueError(f"{op} requires located candidates; run filter_candidates first")


def _alive(cand: Candidate, winners: list[Span]) -> bool:
    return not any(cand.overlaps_range(w.start, w.end) for w in winners)


def select_candidates(
    candidates: CandidateSet,
    source: LabeledSentence,
    scorer: TranslationScorer,
    cache: ScoreCache | None = None,
) -> LabeledSentence:
    """Label the target sentence by translation similarity to each source span."""
    _require_located(candidates, "select_candidates")
    sims: dict[tuple[str, str], float] = {}
    winners: list[Span] = []
    for span in sorted(candidates.per_span):
        pool = {
            (c.start, c.end): c
            for other, cands in candidates.per_span.items()
            if other.category == span.category
            for c in cands
        }
        alive = [c for c in pool.values() if _alive(c, winners)]
        if not alive:
            logger.info("no surviving candidate for source span %s", span)
            continue
        span_text = source.span_text(span)
        for cand in alive:
            key = (span_text, cand.text)
            if key not in sims:
                sims[key] = translation_similarity(span_text, cand.text, scorer, cache).sim
        best = max(alive, key=lambda c: (sims[(span_text, c.text)], -c.start, c.start - c.end))
        winners.append(Span(best.start, best.end, span.category))
    return LabeledSentence(candidates.target_words, winners)


def select_most_probable(candidates: CandidateSet) -> LabeledSentence:
    """Take each span's top-ranked surviving candidate, no scoring involved."""
    _require_located(candidates, "select_most_probable")
    winners: list[Span] = []
    for span in sorted(candidates.per_span):
        ranked = sorted(
            candidates.per_span[span], key=lambda c: (c.rank, c.start, c.end))
        pick = next((c for c in ranked if _alive(c, winners)), None)
        if pick is None:
            logger.info("no surviving candidate for source span %s", span)
            continue
        winners.append(Span(pick.start, pick.end, span.category))
    return LabeledSentence(candidates.target_words, winners)


def oracle_upper_bound(
    candidates: CandidateSet,
    gold: LabeledSentence,
) -> LabeledSentence:
    """Selection under a perfect selector: the gold candidate wins when present.

    Per span, a candidate exactly matching a gold span (range and category)
    is chosen if the pool contains one; otherwise the top-ranked surviving
    candidate is taken. Bounds what any selector could achieve on this pool.
    """
    _require_located(candidates, "oracle_upper_bound")
    gold_ranges = {(s.start, s.end, s.category) for s in gold.spans}
    winners: list[Span] = []
    for span in sorted(candidates.per_span):
        ranked = sorted(
            candidates.per_span[span], key=lambda c: (c.rank, c.start, c.end))
        alive = [c for c in ranked if _alive(c, winners)]
        if not alive:
            continue
        exact = [
            c for c in alive if (c.start, c.end, span.category) in gold_ranges
        ]
        pick = exact[0] if exact else alive[0]
        winners.append(Span(pick.start, pick.end, span.category))
    return LabeledSentence(candidates.target_words, winners)


def candidate_sweep(
    candidates: CandidateSet,
    ks: list[int],
    gold: LabeledSentence,
) -> list[tuple[int, float]]:
    """Fraction of spans whose gold range sits within their top-k candidates.

    A span counts as a hit at k when any of its k best-ranked candidates
    exactly matches a gold span of the same category.
    """
    _require_located(candidates, "candidate_sweep")
    gold_ranges = {(s.start, s.end, s.category) for s in gold.spans}
    spans = candidates.sorted_spans()
    rows: list[tuple[int, float]] = []
    for k in ks:
        if k < 0:
            raise ValueError(f"negative candidate count {k}")
        hits = 0
        for span in spans:
            ranked = sorted(
                candidates.per_span[span], key=lambda c: (c.rank, c.start, c.end))
            if any(
                (c.start, c.end, span.category) in gold_ranges
                for c in ranked[:k]
            ):
                hits += 1
        rows.append((k, hits / len(spans) if spans else 0.0))
    return rows
