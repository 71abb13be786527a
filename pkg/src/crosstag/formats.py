"""Line-oriented file formats shared by the CLI and batch pipelines.

All files are UTF-8; decoding errors are rejected rather than replaced.
Formats:

- column file: one ``token<TAB>tag`` line per token, blank line between
  sentences;
- tokenized text: one whitespace-tokenized sentence per line;
- tagged text: one inline-markup sentence per line;
- alignment file: one line of space-separated ``i-j`` pairs per sentence;
- candidate file: ``span_id<TAB>rank<TAB>text`` lines, where span_id is
  ``sentence:start:end:category``;
- score cache: ``a_text<TAB>b_text<TAB>probability`` lines;
- table-model spec: JSON with a ``default`` distribution and suffix
  ``rules``, token surfaces as keys.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .core import LabeledSentence, Span, TagScheme, parse_tagged_text, spans_to_tags, to_tagged_text
from .models import TableModel, Vocabulary
from .projection import AlignmentSet
from .scoring import ScoreCache

__all__ = [
    "build_table_model",
    "load_score_cache",
    "load_table_model_spec",
    "read_candidate_file",
    "read_conll",
    "read_pharaoh",
    "read_tagged",
    "read_tokens",
    "save_score_cache",
    "span_id",
    "write_conll",
    "write_labeled_conll",
    "write_pharaoh",
    "write_tagged",
    "write_tokens",
]


def _read_lines(path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def read_conll(path) -> list[tuple[list[str], list[str]]]:
    """Read a column file into (words, tags) pairs."""
    sentences: list[tuple[list[str], list[str]]] = []
    words: list[str] = []
    tags: list[str] = []

    def flush() -> None:
        nonlocal words, tags
        if words:
            sentences.append((words, tags))
            words, tags = [], []

    for lineno, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            flush()
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ValueError(f"{path}:{lineno}: expected 'token<TAB>tag', got {line!r}")
        words.append(parts[0])
        tags.append(parts[1])
    flush()
    return sentences


def write_conll(path, sentences: Iterable[tuple[Sequence[str], Sequence[str]]]) -> None:
    blocks = []
    for k, (words, tags) in enumerate(sentences):
        if len(words) != len(tags):
            raise ValueError(f"sentence {k}: {len(words)} words vs {len(tags)} tags")
        if not words:
            # blank-line-separated columns cannot represent an empty sentence
            raise ValueError(f"sentence {k} is empty and would vanish on re-read")
        blocks.append("".join(f"{w}\t{t}\n" for w, t in zip(words, tags)))
    Path(path).write_text("\n".join(blocks), encoding="utf-8")


def write_labeled_conll(path, sentences: Iterable[LabeledSentence], scheme: TagScheme) -> None:
    write_conll(
        path, ((s.words, spans_to_tags(s, scheme)) for s in sentences))


def read_tokens(path) -> list[list[str]]:
    """One whitespace-tokenized sentence per line (a blank line is empty)."""
    return [line.split() for line in _read_lines(path)]


def write_tokens(path, sentences: Iterable[Sequence[str]]) -> None:
    Path(path).write_text(
        "".join(" ".join(words) + "\n" for words in sentences), encoding="utf-8")


def read_tagged(path) -> list[LabeledSentence]:
    out = []
    for lineno, line in enumerate(_read_lines(path), 1):
        try:
            out.append(parse_tagged_text(line))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return out


def write_tagged(path, sentences: Iterable[LabeledSentence]) -> None:
    Path(path).write_text(
        "".join(to_tagged_text(s) + "\n" for s in sentences), encoding="utf-8")


def read_pharaoh(path) -> list[AlignmentSet]:
    out = []
    for lineno, line in enumerate(_read_lines(path), 1):
        try:
            out.append(AlignmentSet.from_pharaoh(line))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return out


def write_pharaoh(path, alignments: Iterable[AlignmentSet]) -> None:
    Path(path).write_text(
        "".join(a.to_pharaoh() + "\n" for a in alignments), encoding="utf-8")


def _parse_span_id(span_id: str) -> tuple[int, Span]:
    parts = span_id.split(":")
    if len(parts) != 4 or not parts[0].isdigit() or not parts[1].isdigit() or not parts[2].isdigit():
        raise ValueError(
            f"bad span id {span_id!r}, expected 'sentence:start:end:category'")
    return int(parts[0]), Span(int(parts[1]), int(parts[2]), parts[3])


def span_id(sentence_index: int, span: Span) -> str:
    return f"{sentence_index}:{span.start}:{span.end}:{span.category}"


def read_candidate_file(path) -> dict[int, dict[Span, list[str]]]:
    """Ranked candidate texts grouped by sentence and source span."""
    ranked: dict[int, dict[Span, list[tuple[int, str]]]] = {}
    for lineno, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(
                f"{path}:{lineno}: expected 'span_id<TAB>rank<TAB>text', got {line!r}")
        try:
            sentence, span = _parse_span_id(parts[0])
            rank = int(parts[1])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
        ranked.setdefault(sentence, {}).setdefault(span, []).append((rank, parts[2]))
    return {
        sentence: {
            span: [text for _, text in sorted(entries, key=lambda e: e[0])]
            for span, entries in spans.items()
        }
        for sentence, spans in ranked.items()
    }


def load_score_cache(path) -> ScoreCache:
    cache = ScoreCache()
    for lineno, line in enumerate(_read_lines(path), 1):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(
                f"{path}:{lineno}: expected 'a<TAB>b<TAB>probability', got {line!r}")
        try:
            cache.put(parts[0], parts[1], float(parts[2]))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return cache


def save_score_cache(path, cache: ScoreCache) -> None:
    lines = []
    for (a, b), prob in sorted(cache.values.items()):
        if "\t" in a + b or "\n" in a + b:
            raise ValueError(f"cache key contains a separator: ({a!r}, {b!r})")
        lines.append(f"{a}\t{b}\t{prob:.17g}\n")
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_table_model_spec(path) -> dict:
    spec = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(spec, dict) or "default" not in spec:
        raise ValueError(f"{path}: table-model spec needs a 'default' distribution")
    return spec


def build_table_model(vocab: Vocabulary, spec: Mapping) -> TableModel:
    """Resolve a JSON table-model spec's token surfaces against a vocabulary."""

    def resolve(dist: Mapping[str, float]) -> dict[int, float]:
        return {vocab.id_of(surface): float(w) for surface, w in dist.items()}

    rules = {}
    for rule in spec.get("rules", []):
        suffix = tuple(vocab.id_of(s) for s in rule["suffix"])
        rules[suffix] = resolve(rule["dist"])
    return TableModel(len(vocab), rules, resolve(spec["default"]))
