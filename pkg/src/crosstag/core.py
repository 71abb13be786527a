"""Word-level span labeling: data model plus the tag-sequence and inline-markup codecs.

A sentence is a whitespace-tokenized word sequence. Labels are typed,
non-overlapping half-open word ranges. Two text serializations are
supported: per-token tag sequences (BILOU or IOB2) and inline markup that
wraps each labeled range in HTML-style category tags, e.g.

    <Person> Obama </Person> went to <Location> New York </Location>

The canonical inline form puts single spaces around tags and words; the
parser accepts arbitrary whitespace runs. Category names are restricted to
``[A-Za-z0-9_]+`` so that tag tokens are unambiguous after whitespace
splitting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

__all__ = [
    "CATEGORY_PATTERN",
    "LabeledSentence",
    "MarkupError",
    "MarkupErrorKind",
    "Span",
    "TagCodecError",
    "TagScheme",
    "is_close_tag",
    "is_open_tag",
    "is_tag_token",
    "parse_tagged_text",
    "spans_to_tags",
    "tags_to_spans",
    "to_tagged_text",
]

CATEGORY_PATTERN = re.compile(r"[A-Za-z0-9_]+\Z")
_OPEN_TAG = re.compile(r"<([A-Za-z0-9_]+)>\Z")
_CLOSE_TAG = re.compile(r"</([A-Za-z0-9_]+)>\Z")


def is_open_tag(token: str) -> str | None:
    """Return the category if ``token`` is an opening tag token, else None."""
    m = _OPEN_TAG.match(token)
    return m.group(1) if m else None


def is_close_tag(token: str) -> str | None:
    """Return the category if ``token`` is a closing tag token, else None."""
    m = _CLOSE_TAG.match(token)
    return m.group(1) if m else None


def is_tag_token(token: str) -> bool:
    return is_open_tag(token) is not None or is_close_tag(token) is not None


@dataclass(frozen=True, order=True)
class Span:
    """A typed half-open word range [start, end) within one sentence."""

    start: int
    end: int
    category: str

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"invalid span range [{self.start}, {self.end})")
        if not CATEGORY_PATTERN.match(self.category):
            raise ValueError(f"invalid span category {self.category!r}")

    @property
    def length(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


def _check_word(word: str) -> None:
    if not word:
        raise ValueError("empty word")
    if any(ch.isspace() for ch in word):
        raise ValueError(f"word contains whitespace: {word!r}")
    if is_tag_token(word):
        # A word shaped like a tag token would make the inline markup ambiguous.
        raise ValueError(f"word collides with tag syntax: {word!r}")


@dataclass(frozen=True)
class LabeledSentence:
    """An immutable sentence: words plus pairwise non-overlapping spans."""

    words: tuple[str, ...]
    spans: frozenset[Span]

    def __init__(self, words: Iterable[str], spans: Iterable[Span] = ()) -> None:
        object.__setattr__(self, "words", tuple(words))
        object.__setattr__(self, "spans", frozenset(spans))
        for word in self.words:
            _check_word(word)
        n = len(self.words)
        ordered = sorted(self.spans)
        for span in ordered:
            if span.end > n:
                raise ValueError(f"span {span} exceeds sentence length {n}")
        for left, right in zip(ordered, ordered[1:]):
            if right.start < left.end:
                raise ValueError(f"overlapping spans {left} and {right}")

    @property
    def sorted_spans(self) -> tuple[Span, ...]:
        return tuple(sorted(self.spans))

    def span_text(self, span: Span) -> str:
        return " ".join(self.words[span.start : span.end])

    def __len__(self) -> int:
        return len(self.words)


class TagScheme(Enum):
    """Per-token tag encodings of typed spans."""

    BILOU = "bilou"
    IOB2 = "iob2"

    @property
    def prefixes(self) -> frozenset[str]:
        return frozenset("BILOU") if self is TagScheme.BILOU else frozenset("BIO")


class TagCodecError(ValueError):
    """A tag string that the scheme does not define."""

    def __init__(self, index: int, message: str) -> None:
        super().__init__(f"tag {index}: {message}")
        self.index = index


class MarkupErrorKind(Enum):
    UNCLOSED_TAG = "unclosed-tag"
    UNOPENED_CLOSE = "unopened-close"
    MISMATCHED_CLOSE = "mismatched-close"
    EMPTY_TAG = "empty-tag"
    NESTED_TAG = "nested-tag"


class MarkupError(ValueError):
    """Inline markup that cannot be parsed into a labeled sentence."""

    def __init__(self, kind: MarkupErrorKind, position: int, message: str) -> None:
        super().__init__(f"{message} (token {position})")
        self.kind = kind
        self.position = position


def spans_to_tags(sentence: LabeledSentence, scheme: TagScheme) -> list[str]:
    """Encode the sentence's spans as one tag per word."""
    tags = ["O"] * len(sentence.words)
    for span in sentence.spans:
        cat = span.category
        if scheme is TagScheme.BILOU:
            if span.length == 1:
                tags[span.start] = f"U-{cat}"
            else:
                tags[span.start] = f"B-{cat}"
                for i in range(span.start + 1, span.end - 1):
                    tags[i] = f"I-{cat}"
                tags[span.end - 1] = f"L-{cat}"
        else:
            tags[span.start] = f"B-{cat}"
            for i in range(span.start + 1, span.end):
                tags[i] = f"I-{cat}"
    return tags


def _split_tag(index: int, tag: str, scheme: TagScheme) -> tuple[str, str | None]:
    if tag == "O":
        return "O", None
    prefix, sep, category = tag.partition("-")
    if prefix not in scheme.prefixes or prefix == "O":
        raise TagCodecError(index, f"unknown prefix {prefix!r} for {scheme.value}")
    if not sep or not CATEGORY_PATTERN.match(category):
        raise TagCodecError(index, f"malformed tag {tag!r}")
    return prefix, category


def tags_to_spans(tags: Iterable[str], scheme: TagScheme) -> frozenset[Span]:
    """Decode a tag sequence into spans.

    Malformed transitions are repaired conservatively instead of rejected:
    an orphan I (or L) starts a new span as if it were B (or U), and a span
    left open at a scheme boundary is closed at its last tagged word. Only
    tags outside the scheme's alphabet raise ``TagCodecError``.
    """
    spans: list[Span] = []
    start: int | None = None
    current: str | None = None

    def flush(end: int) -> None:
        nonlocal start, current
        if current is not None and start is not None:
            spans.append(Span(start, end, current))
        start = None
        current = None

    tag_list = list(tags)
    for i, tag in enumerate(tag_list):
        prefix, category = _split_tag(i, tag, scheme)
        if prefix == "O":
            flush(i)
        elif prefix == "B":
            flush(i)
            start, current = i, category
        elif prefix == "I":
            if current != category:
                flush(i)  # repair: orphan or category switch starts a new span
                start, current = i, category
        elif prefix == "L":
            if current == category:
                flush(i + 1)
            else:
                flush(i)  # repair: orphan L acts as a unit span
                spans.append(Span(i, i + 1, category))
        else:  # U
            flush(i)
            spans.append(Span(i, i + 1, category))
    flush(len(tag_list))
    return frozenset(spans)


def to_tagged_text(sentence: LabeledSentence) -> str:
    """Serialize to canonical inline markup (single spaces throughout)."""
    opens = {span.start: span for span in sentence.spans}
    closes = {span.end: span for span in sentence.spans}
    parts: list[str] = []
    for i, word in enumerate(sentence.words):
        if i in closes:
            parts.append(f"</{closes[i].category}>")
        if i in opens:
            parts.append(f"<{opens[i].category}>")
        parts.append(word)
    n = len(sentence.words)
    if n in closes:
        parts.append(f"</{closes[n].category}>")
    return " ".join(parts)


def parse_tagged_text(text: str) -> LabeledSentence:
    """Parse inline markup back into a labeled sentence.

    Raises ``MarkupError`` describing the first structural defect found:
    unclosed tag, close without open, mismatched close, empty tag, or a tag
    opened inside another tag.
    """
    tokens = text.split()
    words: list[str] = []
    spans: list[Span] = []
    open_category: str | None = None
    open_start = 0
    for pos, token in enumerate(tokens):
        category = is_open_tag(token)
        if category is not None:
            if open_category is not None:
                raise MarkupError(
                    MarkupErrorKind.NESTED_TAG, pos,
                    f"<{category}> opened inside <{open_category}>")
            open_category = category
            open_start = len(words)
            continue
        category = is_close_tag(token)
        if category is not None:
            if open_category is None:
                raise MarkupError(
                    MarkupErrorKind.UNOPENED_CLOSE, pos,
                    f"</{category}> without a matching open tag")
            if category != open_category:
                raise MarkupError(
                    MarkupErrorKind.MISMATCHED_CLOSE, pos,
                    f"</{category}> closes <{open_category}>")
            if len(words) == open_start:
                raise MarkupError(
                    MarkupErrorKind.EMPTY_TAG, pos,
                    f"<{category}> wraps no words")
            spans.append(Span(open_start, len(words), category))
            open_category = None
            continue
        words.append(token)
    if open_category is not None:
        raise MarkupError(
            MarkupErrorKind.UNCLOSED_TAG, len(tokens),
            f"<{open_category}> never closed")
    return LabeledSentence(words, spans)
