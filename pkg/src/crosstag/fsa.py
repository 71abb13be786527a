"""Finite state automaton over tagging actions for constrained generation.

The automaton walks the input sentence left to right. At every state the
generator may copy the next input word (all of its subtokens at once, so
words can never be split), open a category tag when none is open, close
the open tag once it covers at least one word, or emit the end token once
every input word has been copied and no tag remains open. Any reachable
non-terminal state admits at least one action, so decoding always
terminates: at most open+copy+close per word plus the final end, i.e.
3n + 1 actions for n words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

from .models import ModelInterface, TokenizerInterface

__all__ = [
    "Action",
    "ActionKind",
    "CLOSE",
    "COPY",
    "DecodeState",
    "END",
    "InvalidActionError",
    "apply_action",
    "open_tag",
    "valid_actions",
]


class ActionKind(Enum):
    COPY = "copy"
    OPEN = "open"
    CLOSE = "close"
    END = "end"


_KIND_ORDER = {
    ActionKind.COPY: 0,
    ActionKind.OPEN: 1,
    ActionKind.CLOSE: 2,
    ActionKind.END: 3,
}


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    category: str | None = None

    def __post_init__(self) -> None:
        if (self.kind is ActionKind.OPEN) != (self.category is not None):
            raise ValueError("exactly OPEN actions carry a category")

    @property
    def sort_key(self) -> tuple[int, str]:
        return (_KIND_ORDER[self.kind], self.category or "")


COPY = Action(ActionKind.COPY)
CLOSE = Action(ActionKind.CLOSE)
END = Action(ActionKind.END)


def open_tag(category: str) -> Action:
    return Action(ActionKind.OPEN, category)


class InvalidActionError(ValueError):
    """An action was applied in a state whose rules forbid it."""


@dataclass(frozen=True)
class DecodeState:
    """Automaton configuration plus the emitted prefix and its log-probability."""

    cursor: int = 0
    open_category: str | None = None
    words_in_tag: int = 0
    emitted: tuple[int, ...] = ()
    logprob: float = 0.0
    finished: bool = False


def valid_actions(
    state: DecodeState,
    input_words: Sequence[str],
    categories: Sequence[str],
) -> set[Action]:
    """The action set the automaton admits in ``state`` (empty only once finished)."""
    if state.finished:
        return set()
    actions: set[Action] = set()
    remaining = state.cursor < len(input_words)
    if remaining:
        actions.add(COPY)
        if state.open_category is None:
            actions.update(open_tag(c) for c in categories)
    if state.open_category is not None and state.words_in_tag >= 1:
        actions.add(CLOSE)
    if not remaining and state.open_category is None:
        actions.add(END)
    return actions


def _step(state: DecodeState, token_id: int, model: ModelInterface) -> tuple[tuple[int, ...], float]:
    prob = float(model.next_distribution(state.emitted)[token_id])
    delta = math.log(prob) if prob > 0.0 else -math.inf
    return state.emitted + (token_id,), state.logprob + delta


def apply_action(
    state: DecodeState,
    action: Action,
    input_words: Sequence[str],
    categories: Sequence[str],
    model: ModelInterface,
    tokenizer: TokenizerInterface,
) -> DecodeState:
    """Apply one valid action, scoring its token(s) under the model.

    A copy appends every subtoken of the next word in one atomic step; its
    log-probability is the sum of the forced per-subtoken conditionals.
    Tokens the model gives zero probability contribute -inf.
    """
    if action not in valid_actions(state, input_words, categories):
        raise InvalidActionError(f"action {action} invalid in state {state}")
    if action.kind is ActionKind.COPY:
        word = input_words[state.cursor]
        subtokens = tokenizer.subtokens(word)
        if not subtokens:
            raise ValueError(f"tokenizer produced no subtokens for {word!r}")
        working = state
        for token_id in subtokens:
            emitted, logprob = _step(working, token_id, model)
            working = replace(working, emitted=emitted, logprob=logprob)
        return replace(
            working,
            cursor=state.cursor + 1,
            words_in_tag=state.words_in_tag + 1 if state.open_category else 0,
        )
    if action.kind is ActionKind.OPEN:
        emitted, logprob = _step(state, tokenizer.open_tag_id(action.category), model)
        return replace(
            state, emitted=emitted, logprob=logprob,
            open_category=action.category, words_in_tag=0)
    if action.kind is ActionKind.CLOSE:
        emitted, logprob = _step(state, tokenizer.close_tag_id(state.open_category), model)
        return replace(
            state, emitted=emitted, logprob=logprob,
            open_category=None, words_in_tag=0)
    emitted, logprob = _step(state, tokenizer.end_token_id, model)
    return replace(state, emitted=emitted, logprob=logprob, finished=True)
