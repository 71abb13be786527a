"""Translation-probability scoring for projection candidates.

A scorer backend reports per-token conditional probabilities of generating
text A given text B. From those this module computes

    p(A|B)    length-normalized probability: the geometric mean of the
              per-token conditionals,
    sim(A|B)  p(A|B) / p(A|A), so that sim(A|A) == 1 for any backend,
    sim(A,B)  0.5 * sim(A|B) + 0.5 * sim(B|A), symmetrizing the direction.

Backends wrapping real translation models are integration points; the
deterministic backends below exist for tests and offline pipelines.
"""

from __future__ import annotations

import hashlib
import math
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, MutableMapping

__all__ = [
    "CharOverlapScorer",
    "ScoreCache",
    "ScorerContractError",
    "SeededRandomScorer",
    "TableScorer",
    "TranslationScore",
    "TranslationScorer",
    "conditional_probability",
    "translation_similarity",
]


class ScorerContractError(ValueError):
    """A scorer returned probabilities outside (0, 1] or none at all."""


class TranslationScorer(ABC):
    """Backend reporting per-token conditional generation probabilities."""

    @abstractmethod
    def token_conditional_probs(self, target_text: str, source_text: str) -> list[float]:
        """Probabilities of each token of ``target_text`` given ``source_text``.

        The backend owns the tokenization of ``target_text``; every value
        must lie in (0, 1].
        """


@dataclass(frozen=True)
class TranslationScore:
    """All intermediate quantities behind one symmetrized similarity."""

    p_a_given_b: float
    p_a_given_a: float
    p_b_given_a: float
    p_b_given_b: float
    sim_a_given_b: float
    sim_b_given_a: float
    sim: float


class ScoreCache:
    """Replayable store of p(A|B) values keyed by the (A, B) text pair."""

    def __init__(self, values: MutableMapping[tuple[str, str], float] | None = None):
        self.values: dict[tuple[str, str], float] = dict(values or {})

    def get(self, a: str, b: str) -> float | None:
        return self.values.get((a, b))

    def put(self, a: str, b: str, prob: float) -> None:
        self.values[(a, b)] = prob

    def __len__(self) -> int:
        return len(self.values)


def conditional_probability(
    target_text: str,
    source_text: str,
    scorer: TranslationScorer,
    cache: ScoreCache | None = None,
) -> float:
    """Geometric mean of the scorer's per-token conditionals p(target|source)."""
    if cache is not None:
        hit = cache.get(target_text, source_text)
        if hit is not None:
            return hit
    probs = scorer.token_conditional_probs(target_text, source_text)
    if not probs:
        raise ScorerContractError(
            f"scorer returned no token probabilities for {target_text!r}")
    for p in probs:
        if not (0.0 < p <= 1.0) or math.isnan(p):
            raise ScorerContractError(
                f"scorer probability {p!r} outside (0, 1] for {target_text!r}")
    value = math.exp(math.fsum(math.log(p) for p in probs) / len(probs))
    if cache is not None:
        cache.put(target_text, source_text, value)
    return value


def translation_similarity(
    a: str,
    b: str,
    scorer: TranslationScorer,
    cache: ScoreCache | None = None,
) -> TranslationScore:
    """Normalized, symmetrized translation similarity between texts a and b."""
    if not a or not b:
        raise ValueError("similarity requires non-empty texts")
    p_ab = conditional_probability(a, b, scorer, cache)
    p_aa = conditional_probability(a, a, scorer, cache)
    p_ba = conditional_probability(b, a, scorer, cache)
    p_bb = conditional_probability(b, b, scorer, cache)
    sim_ab = p_ab / p_aa
    sim_ba = p_ba / p_bb
    return TranslationScore(
        p_a_given_b=p_ab,
        p_a_given_a=p_aa,
        p_b_given_a=p_ba,
        p_b_given_b=p_bb,
        sim_a_given_b=sim_ab,
        sim_b_given_a=sim_ba,
        sim=0.5 * sim_ab + 0.5 * sim_ba,
    )


class TableScorer(TranslationScorer):
    """Scorer backed by an explicit (target, source) -> probabilities table.

    Tokenization is whatever the table says: each entry lists one
    probability per target token. Pairs missing from the table fall back to
    ``default`` per whitespace token when given, otherwise they are an error.
    """

    def __init__(
        self,
        table: MutableMapping[tuple[str, str], Iterable[float]],
        default: float | None = None,
    ) -> None:
        self.table = {key: list(value) for key, value in table.items()}
        self.default = default

    def token_conditional_probs(self, target_text: str, source_text: str) -> list[float]:
        entry = self.table.get((target_text, source_text))
        if entry is not None:
            return list(entry)
        if self.default is not None:
            return [self.default] * max(1, len(target_text.split()))
        raise ScorerContractError(
            f"no table entry for pair ({target_text!r}, {source_text!r})")


class CharOverlapScorer(TranslationScorer):
    """Heuristic backend: tokens sharing characters with the source score higher.

    Good enough to rank candidate translations of names across related
    scripts without any model.
    """

    def token_conditional_probs(self, target_text: str, source_text: str) -> list[float]:
        source_chars = set(source_text.lower()) - {" "}
        probs = []
        for token in target_text.split():
            chars = set(token.lower())
            overlap = len(chars & source_chars) / len(chars) if chars else 0.0
            probs.append(0.05 + 0.9 * overlap)
        return probs


class SeededRandomScorer(TranslationScorer):
    """Deterministic pseudo-random backend for property tests.

    The probabilities depend only on (seed, target text, source text), so
    repeated calls agree and runs are reproducible across platforms.
    """

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def token_conditional_probs(self, target_text: str, source_text: str) -> list[float]:
        digest = hashlib.blake2b(
            f"{self.seed}\x1f{target_text}\x1f{source_text}".encode("utf-8"),
            digest_size=8,
        ).digest()
        rng = random.Random(int.from_bytes(digest, "little"))
        return [rng.uniform(0.05, 1.0) for _ in target_text.split()]
