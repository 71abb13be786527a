"""Constrained and unconstrained decoding over an autoregressive model.

Constrained decoding explores only sequences the tagging automaton admits;
invalid tokens are effectively given probability zero and the remaining
mass is not renormalized, so hypothesis scores stay raw products of model
conditionals. Both search strategies operate on whole actions: a
multi-subtoken word copy is one expansion whose score is the sum of its
forced per-subtoken log-probabilities.

Greedy picks the argmax action at every step. Beam search keeps k
hypotheses per step under laddered pruning (see ``constrained_beam``);
hypotheses that applied the end action retire from the beam and the best
finished one (by total log-probability, no length normalization) is
returned. With k=1 the two are identical, choice by choice. Ties break
deterministically: higher probability first, then copy before open
(categories in lexicographic order) before close before end.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import LabeledSentence, is_tag_token, parse_tagged_text
from .fsa import Action, DecodeState, apply_action, valid_actions
from .models import ModelInterface, TokenizerInterface

__all__ = [
    "DecodeResult",
    "constrained_beam",
    "constrained_greedy",
    "sequence_logprob",
    "unconstrained_beam",
    "unconstrained_greedy",
]


@dataclass(frozen=True)
class DecodeResult:
    """A finished decode: parsed sentence, raw text, tokens, and score."""

    sentence: LabeledSentence
    tagged_text: str
    emitted: tuple[int, ...]
    actions: tuple[Action, ...]
    logprob: float


class _MemoModel:
    """Per-session distribution cache; hypotheses share prefixes heavily."""

    def __init__(self, model: ModelInterface) -> None:
        self._model = model
        self._memo: dict[tuple[int, ...], np.ndarray] = {}

    def next_distribution(self, prefix: tuple[int, ...]) -> np.ndarray:
        dist = self._memo.get(prefix)
        if dist is None:
            dist = self._model.next_distribution(prefix)
            self._memo[prefix] = dist
        return dist


def _finish(
    state: DecodeState,
    actions: tuple[Action, ...],
    tokenizer: TokenizerInterface,
) -> DecodeResult:
    emitted = state.emitted
    body = emitted[:-1] if emitted and emitted[-1] == tokenizer.end_token_id else emitted
    tagged_text = tokenizer.render(body)
    return DecodeResult(
        sentence=parse_tagged_text(tagged_text),
        tagged_text=tagged_text,
        emitted=emitted,
        actions=actions,
        logprob=state.logprob,
    )


def _prepare(input_words, categories):
    words = tuple(input_words)
    if not words:
        raise ValueError("cannot decode an empty input sentence")
    for word in words:
        if not word or any(ch.isspace() for ch in word) or is_tag_token(word):
            raise ValueError(
                f"cannot decode word {word!r}: it would collide with the output markup")
    return words, tuple(sorted(set(categories)))


def constrained_greedy(
    input_words: Sequence[str],
    categories: Sequence[str],
    model: ModelInterface,
    tokenizer: TokenizerInterface,
) -> DecodeResult:
    """Apply the argmax valid action until the automaton ends."""
    words, cats = _prepare(input_words, categories)
    memo = _MemoModel(model)
    state = DecodeState()
    actions: list[Action] = []
    while not state.finished:
        options = sorted(
            valid_actions(state, words, cats), key=lambda a: a.sort_key)
        nexts = [
            (apply_action(state, act, words, cats, memo, tokenizer), act)
            for act in options
        ]
        state, chosen = max(nexts, key=lambda pair: pair[0].logprob)
        actions.append(chosen)
    return _finish(state, tuple(actions), tokenizer)


@dataclass(frozen=True)
class _Hypothesis:
    state: DecodeState
    actions: tuple[Action, ...]
    level: int  # smallest beam width at which this hypothesis survives


def constrained_beam(
    input_words: Sequence[str],
    categories: Sequence[str],
    model: ModelInterface,
    tokenizer: TokenizerInterface,
    beam_width: int,
) -> DecodeResult:
    """Beam search restricted to valid actions; returns the best finished hypothesis.

    Pruning is laddered: at every step, slot j receives the best unclaimed
    expansion whose parent a width-j search would also have kept. Narrower
    searches are therefore embedded in wider ones, which makes the returned
    log-probability non-decreasing in ``beam_width`` and the width-1 search
    identical to greedy decoding, choice for choice. Plain top-k pruning
    guarantees neither (a wide beam can crowd out the greedy path and end
    up strictly worse). A hypothesis that applied the end action retires
    from the beam; the best retired hypothesis wins.
    """
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    words, cats = _prepare(input_words, categories)
    memo = _MemoModel(model)
    beams = [_Hypothesis(DecodeState(), (), 1)]
    finished: list[_Hypothesis] = []
    max_steps = 3 * len(words) + 1
    for _ in range(max_steps):
        if not beams:
            break
        expansions: list[tuple[float, tuple[int, str], int, int, _Hypothesis]] = []
        for parent_idx, hyp in enumerate(beams):
            for act in sorted(
                valid_actions(hyp.state, words, cats), key=lambda a: a.sort_key
            ):
                new_state = apply_action(hyp.state, act, words, cats, memo, tokenizer)
                expansions.append((
                    new_state.logprob,
                    act.sort_key,
                    parent_idx,
                    hyp.level,
                    _Hypothesis(new_state, hyp.actions + (act,), 0),
                ))
        expansions.sort(key=lambda e: (-e[0], e[1], e[2]))
        taken = [False] * len(expansions)
        beams = []
        for level in range(1, beam_width + 1):
            for idx, (_, _, _, parent_level, hyp) in enumerate(expansions):
                if taken[idx] or parent_level > level:
                    continue
                taken[idx] = True
                kept = replace(hyp, level=level)
                if kept.state.finished:
                    finished.append(kept)
                else:
                    beams.append(kept)
                break
    best = max(finished, key=lambda h: h.state.logprob)
    return _finish(best.state, best.actions, tokenizer)


def sequence_logprob(emitted: Sequence[int], model: ModelInterface) -> float:
    """Recompute the total log-probability of an emitted token sequence.

    A token the model gives zero probability yields -inf, reported as such
    rather than raised.
    """
    tokens = tuple(emitted)
    if not tokens:
        raise ValueError("sequence_logprob requires a non-empty sequence")
    total = 0.0
    prefix: tuple[int, ...] = ()
    for token_id in tokens:
        prob = float(model.next_distribution(prefix)[token_id])
        total += np.log(prob) if prob > 0.0 else -np.inf
        prefix = prefix + (token_id,)
    return float(total)


def unconstrained_greedy(
    model: ModelInterface,
    end_token_id: int,
    max_steps: int,
) -> tuple[int, ...]:
    """Token-level argmax with no masking; stops at the end token or the cap."""
    emitted: tuple[int, ...] = ()
    for _ in range(max_steps):
        dist = model.next_distribution(emitted)
        token_id = int(np.argmax(dist))
        if token_id == end_token_id:
            break
        emitted = emitted + (token_id,)
    return emitted


def unconstrained_beam(
    model: ModelInterface,
    end_token_id: int,
    beam_width: int,
    max_steps: int,
) -> tuple[int, ...]:
    """Standard token-level beam search with no masking."""
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    memo = _MemoModel(model)
    beams: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    finished: list[tuple[float, tuple[int, ...]]] = []
    for _ in range(max_steps):
        if not beams:
            break
        expansions: list[tuple[float, tuple[int, ...]]] = []
        for logprob, emitted in beams:
            dist = memo.next_distribution(emitted)
            order = np.argsort(-dist, kind="stable")[: beam_width + 1]
            for token_id in order:
                prob = float(dist[token_id])
                delta = np.log(prob) if prob > 0.0 else -np.inf
                expansions.append((logprob + delta, emitted + (int(token_id),)))
        expansions.sort(key=lambda e: (-e[0], e[1]))
        beams = []
        for logprob, emitted in expansions[:beam_width]:
            if emitted[-1] == end_token_id:
                finished.append((logprob, emitted[:-1]))
            else:
                beams.append((logprob, emitted))
    if not finished:
        # the cap cut every hypothesis short; fall back to the best prefix
        finished = beams
    best = max(finished, key=lambda e: (e[0], e[1]))
    return best[1]
