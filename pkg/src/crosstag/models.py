"""Model and tokenizer abstractions for the decoding engine, plus test backends.

The engine only needs two things from a backend: a tokenizer that maps
words to subtoken ids (and knows the tag and end-of-sequence token ids),
and a model that returns the next-token probability distribution for a
given emitted prefix. Real language-model bindings implement the same two
interfaces; the deterministic mocks here make decoding testable offline.

Token surfaces follow the SentencePiece convention: a word-initial piece
carries a leading U+2581 marker, so any token sequence detokenizes
unambiguously.
"""

from __future__ import annotations

import hashlib
from abc import ABC, abstractmethod
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "CharChunkSplitter",
    "ModelInterface",
    "MockTokenizer",
    "PROMPT_SEPARATOR",
    "SeededRandomModel",
    "TableModel",
    "TokenizerInterface",
    "UniformModel",
    "Vocabulary",
    "WholeWordSplitter",
    "WORD_START",
]

WORD_START = "▁"
END_TOKEN = "</s>"

# Separator between the unlabeled and the labeled sentence when assembling
# single-string training prompts for decoder-only models. Not a decoding
# concept: the automaton never sees it.
PROMPT_SEPARATOR = "→"


class WordSplitter(ABC):
    """Rule for cutting a word into subword pieces (concatenation restores it)."""

    @abstractmethod
    def split(self, word: str) -> tuple[str, ...]: ...


class WholeWordSplitter(WordSplitter):
    def split(self, word: str) -> tuple[str, ...]:
        return (word,)


class CharChunkSplitter(WordSplitter):
    """Fixed-size character chunks; exercises multi-subtoken word copies."""

    def __init__(self, chunk_size: int = 3) -> None:
        if chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        self.chunk_size = chunk_size

    def split(self, word: str) -> tuple[str, ...]:
        k = self.chunk_size
        return tuple(word[i : i + k] for i in range(0, len(word), k))


class Vocabulary:
    """Closed token inventory: end token, tag tokens, then word pieces.

    Ids are assigned deterministically: 0 is the end token, then open and
    close tags in category order, then sorted word pieces.
    """

    def __init__(self, categories: Iterable[str], pieces: Iterable[str]) -> None:
        cats = sorted(set(categories))
        tokens = [END_TOKEN]
        tokens += [f"<{c}>" for c in cats]
        tokens += [f"</{c}>" for c in cats]
        tokens += sorted(set(pieces))
        self.tokens: tuple[str, ...] = tuple(tokens)
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("token inventory contains duplicates")
        self._index = {tok: i for i, tok in enumerate(self.tokens)}
        self.categories = tuple(cats)
        self.end_id = 0
        self._open_ids = {c: self._index[f"<{c}>"] for c in cats}
        self._close_ids = {c: self._index[f"</{c}>"] for c in cats}

    @classmethod
    def build(
        cls,
        sentences: Iterable[Sequence[str]],
        categories: Iterable[str],
        splitter: WordSplitter,
    ) -> "Vocabulary":
        pieces: set[str] = set()
        for words in sentences:
            for word in words:
                parts = splitter.split(word)
                pieces.add(WORD_START + parts[0])
                pieces.update(parts[1:])
        return cls(categories, pieces)

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        if token not in self._index:
            raise ValueError(f"token {token!r} not in vocabulary")
        return self._index[token]

    def surface(self, token_id: int) -> str:
        return self.tokens[token_id]

    def open_tag_id(self, category: str) -> int:
        if category not in self._open_ids:
            raise ValueError(f"unknown category {category!r}")
        return self._open_ids[category]

    def close_tag_id(self, category: str) -> int:
        if category not in self._close_ids:
            raise ValueError(f"unknown category {category!r}")
        return self._close_ids[category]

    def is_special(self, token_id: int) -> bool:
        return token_id <= 2 * len(self.categories)


class TokenizerInterface(ABC):
    """Deterministic word-to-subtoken mapping plus special-token lookup."""

    @abstractmethod
    def subtokens(self, word: str) -> tuple[int, ...]:
        """Non-empty subtoken ids whose surfaces concatenate back to ``word``."""

    @abstractmethod
    def open_tag_id(self, category: str) -> int: ...

    @abstractmethod
    def close_tag_id(self, category: str) -> int: ...

    @property
    @abstractmethod
    def end_token_id(self) -> int: ...

    @abstractmethod
    def render(self, token_ids: Sequence[int]) -> str:
        """Detokenize a raw token sequence back to space-separated text."""


class MockTokenizer(TokenizerInterface):
    def __init__(self, vocab: Vocabulary, splitter: WordSplitter) -> None:
        self.vocab = vocab
        self.splitter = splitter

    def subtokens(self, word: str) -> tuple[int, ...]:
        parts = self.splitter.split(word)
        surfaces = [WORD_START + parts[0], *parts[1:]]
        return tuple(self.vocab.id_of(s) for s in surfaces)

    def open_tag_id(self, category: str) -> int:
        return self.vocab.open_tag_id(category)

    def close_tag_id(self, category: str) -> int:
        return self.vocab.close_tag_id(category)

    @property
    def end_token_id(self) -> int:
        return self.vocab.end_id

    def render(self, token_ids: Sequence[int]) -> str:
        words: list[str] = []
        current: str | None = None
        for tid in token_ids:
            surface = self.vocab.surface(tid)
            if self.vocab.is_special(tid):
                if current is not None:
                    words.append(current)
                    current = None
                words.append(surface)
            elif surface.startswith(WORD_START):
                if current is not None:
                    words.append(current)
                current = surface[len(WORD_START):]
            else:
                # continuation piece; at word start it simply begins one
                current = (current or "") + surface
        if current is not None:
            words.append(current)
        return " ".join(words)


class ModelInterface(ABC):
    """Autoregressive next-token distribution over a fixed vocabulary.

    Implementations must tolerate concurrent calls from distinct decode
    sessions (the mocks here are stateless) or document otherwise.
    """

    @abstractmethod
    def next_distribution(self, prefix: tuple[int, ...]) -> np.ndarray:
        """Probabilities for every token id given the emitted prefix.

        Softmax semantics: entries are non-negative and sum to one.
        """


class UniformModel(ModelInterface):
    def __init__(self, vocab_size: int) -> None:
        self._dist = np.full(vocab_size, 1.0 / vocab_size)

    def next_distribution(self, prefix: tuple[int, ...]) -> np.ndarray:
        return self._dist


def _splitmix64(values: np.ndarray) -> np.ndarray:
    # SplitMix64 finalizer; stable across platforms and library versions.
    z = values + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class SeededRandomModel(ModelInterface):
    """Deterministic pseudo-random model: the distribution depends only on
    (seed, prefix). Reproducible across runs, platforms, and library versions."""

    def __init__(self, vocab_size: int, seed: int = 0) -> None:
        if vocab_size < 1:
            raise ValueError("vocab_size must be >= 1")
        self.vocab_size = vocab_size
        self.seed = seed

    def next_distribution(self, prefix: tuple[int, ...]) -> np.ndarray:
        digest = hashlib.blake2b(
            (str(self.seed) + ":" + ",".join(map(str, prefix))).encode("ascii"),
            digest_size=8,
        ).digest()
        base = np.uint64(int.from_bytes(digest, "little"))
        with np.errstate(over="ignore"):
            lanes = _splitmix64(np.arange(self.vocab_size, dtype=np.uint64) + base)
        weights = (lanes >> np.uint64(11)).astype(np.float64) * 2.0**-53 + 1e-6
        return weights / weights.sum()


class TableModel(ModelInterface):
    """Model driven by explicit conditional tables keyed by prefix suffixes.

    The longest suffix of the emitted prefix with a rule wins; the default
    distribution applies otherwise. Distributions are normalized at
    construction; tokens absent from a rule get probability zero.
    """

    def __init__(
        self,
        vocab_size: int,
        rules: Mapping[tuple[int, ...], Mapping[int, float]],
        default: Mapping[int, float],
    ) -> None:
        self.vocab_size = vocab_size
        self._rules = {
            tuple(suffix): self._as_distribution(dist) for suffix, dist in rules.items()
        }
        self._default = self._as_distribution(default)
        self._lengths = sorted({len(s) for s in self._rules}, reverse=True)

    def _as_distribution(self, weights: Mapping[int, float]) -> np.ndarray:
        dist = np.zeros(self.vocab_size)
        for tid, w in weights.items():
            if not 0 <= tid < self.vocab_size:
                raise ValueError(f"token id {tid} outside vocabulary")
            if w < 0:
                raise ValueError(f"negative weight {w} for token {tid}")
            dist[tid] = w
        total = dist.sum()
        if total <= 0:
            raise ValueError("distribution has no mass")
        return dist / total

    def next_distribution(self, prefix: tuple[int, ...]) -> np.ndarray:
        for length in self._lengths:
            if length <= len(prefix):
                rule = self._rules.get(tuple(prefix[len(prefix) - length :]))
                if rule is not None:
                    return rule
        return self._default
