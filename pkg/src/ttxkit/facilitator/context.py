"""Token estimation and context budgeting for facilitator backends.

The estimator uses the coarse 1 token ~= 3/4 words rule: words are
maximal whitespace-separated runs, and the ceiling is taken once, after
words are counted (summed). 75 words therefore map to exactly 100
tokens, and 1.5M words to exactly 2M tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import BudgetError, ValidationError


def tokens_for_words(word_count: int) -> int:
    """ceil(4 * word_count / 3) in exact integer arithmetic."""
    if word_count < 0:
        raise ValidationError("word_count must be nonnegative")
    return -(-4 * word_count // 3)


def estimate_tokens(text: str) -> int:
    """Estimated token count of a text under the 3/4-words rule."""
    return tokens_for_words(len(text.split()))


@dataclass(frozen=True)
class ContextMessage:
    """One budgetable unit of backend context. Pinned messages (scenario
    preamble, human responses) are never dropped."""

    text: str
    pinned: bool = False

    @property
    def tokens(self) -> int:
        return estimate_tokens(self.text)


def fit_context(messages: Sequence[ContextMessage], token_limit: int) -> list[ContextMessage]:
    """Trim a message sequence to the token budget.

    Keeps every pinned message and the newest suffix of droppable ones
    whose summed estimates fit; drops oldest droppable messages first.
    Original order is preserved. Raises BudgetError when the pinned
    content alone exceeds the limit.
    """
    if token_limit <= 0:
        raise ValidationError(f"token_limit must be positive, got {token_limit}")

    pinned_total = sum(m.tokens for m in messages if m.pinned)
    if pinned_total > token_limit:
        raise BudgetError(
            f"pinned context alone needs {pinned_total} tokens, budget is {token_limit}"
        )

    total = sum(m.tokens for m in messages)
    dropped: set[int] = set()
    for index, message in enumerate(messages):
        if total <= token_limit:
            break
        if message.pinned:
            continue
        dropped.add(index)
        total -= message.tokens
    return [m for i, m in enumerate(messages) if i not in dropped]
