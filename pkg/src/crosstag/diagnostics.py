"""Classify raw generation output against its input sentence.

Unconstrained generators fail in three characteristic ways: markup that
does not parse, output words that never appeared in the input
(hallucinations, e.g. the model translating a name), and word boundaries
that moved (one input word split into several output words, or several
merged into one). This module detects each class per sentence and
aggregates corpus-level rates. Diagnosis is total: any string diagnoses.

Splitting versus hallucination is decided by character-level
re-segmentation: word-level mismatch regions between input and stripped
output are anchored on their common character prefix and suffix. Output
words fully covered by matching characters are boundary moves (splitting);
output words touching the unmatched middle are hallucinated. A typo-like
edit therefore counts as hallucination, since no re-segmentation of the
input characters can produce it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from difflib import SequenceMatcher
from typing import Iterable, Sequence

from .core import (
    MarkupError,
    is_close_tag,
    is_open_tag,
    is_tag_token,
    parse_tagged_text,
)

__all__ = [
    "CorpusRates",
    "OutputDiagnosis",
    "corpus_rates",
    "diagnose",
    "to_iob2_lenient",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OutputDiagnosis:
    markup_error: MarkupError | None
    hallucinated_words: frozenset[str]
    splitting: bool

    @property
    def clean(self) -> bool:
        return (
            self.markup_error is None
            and not self.hallucinated_words
            and not self.splitting
        )


def _common_prefix_len(a: str, b: str) -> int:
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return i


def _common_suffix_len(a: str, b: str) -> int:
    n = min(len(a), len(b))
    i = 0
    while i < n and a[len(a) - 1 - i] == b[len(b) - 1 - i]:
        i += 1
    return i


def _resegment(input_words: Sequence[str], output_words: Sequence[str]) -> tuple[bool, set[str]]:
    splitting = False
    hallucinated: set[str] = set()
    matcher = SequenceMatcher(a=list(input_words), b=list(output_words), autojunk=False)
    for op, i1, i2, j1, j2 in matcher.get_opcodes():
        if op == "equal":
            continue
        in_chars = "".join(input_words[i1:i2])
        out_chars = "".join(output_words[j1:j2])
        prefix = _common_prefix_len(in_chars, out_chars)
        suffix = _common_suffix_len(in_chars[prefix:], out_chars[prefix:])
        middle_lo, middle_hi = prefix, len(out_chars) - suffix
        offset = 0
        accounted = False
        for word in output_words[j1:j2]:
            lo, hi = offset, offset + len(word)
            offset = hi
            if hi <= middle_lo or lo >= middle_hi:
                accounted = True  # covered by matching characters: a boundary move
            else:
                hallucinated.add(word)
        if accounted:
            splitting = True
    return splitting, hallucinated


def diagnose(input_words: Sequence[str], raw_output: str) -> OutputDiagnosis:
    """Diagnose one raw output string against the input word sequence."""
    markup_error: MarkupError | None = None
    try:
        parse_tagged_text(raw_output)
    except MarkupError as exc:
        markup_error = exc
    stripped = [tok for tok in raw_output.split() if not is_tag_token(tok)]
    splitting, hallucinated = _resegment(tuple(input_words), stripped)
    return OutputDiagnosis(
        markup_error=markup_error,
        hallucinated_words=frozenset(hallucinated),
        splitting=splitting,
    )


@dataclass(frozen=True)
class CorpusRates:
    """Percentage of sentences showing each error class (not mutually exclusive)."""

    sentences: int
    markup_pct: float
    hallucination_pct: float
    splitting_pct: float
    any_error_pct: float


def corpus_rates(pairs: Iterable[tuple[Sequence[str], str]]) -> CorpusRates:
    """Per-class error rates over (input words, raw output) sentence pairs."""
    total = markup = halluc = split = any_error = 0
    for input_words, raw_output in pairs:
        report = diagnose(input_words, raw_output)
        total += 1
        markup += report.markup_error is not None
        halluc += bool(report.hallucinated_words)
        split += report.splitting
        any_error += not report.clean
    if total == 0:
        logger.warning("corpus_rates called on an empty corpus")
        return CorpusRates(0, 0.0, 0.0, 0.0, 0.0)
    return CorpusRates(
        sentences=total,
        markup_pct=100.0 * markup / total,
        hallucination_pct=100.0 * halluc / total,
        splitting_pct=100.0 * split / total,
        any_error_pct=100.0 * any_error / total,
    )


def to_iob2_lenient(raw_output: str, expected_len: int) -> list[str]:
    """Positional IOB2 tags from raw output, padded or truncated to length.

    Tag tokens flip the current category even when the markup is broken;
    words outside any tag get O. Length repair pads the tail with O so that
    split or merged outputs still evaluate.
    """
    tags: list[str] = []
    current: str | None = None
    begin = False
    for token in raw_output.split():
        category = is_open_tag(token)
        if category is not None:
            current = category
            begin = True
            continue
        if is_close_tag(token) is not None:
            current = None
            continue
        if current is None:
            tags.append("O")
        else:
            tags.append(f"B-{current}" if begin else f"I-{current}")
            begin = False
    if len(tags) < expected_len:
        tags.extend(["O"] * (expected_len - len(tags)))
    return tags[:expected_len]
