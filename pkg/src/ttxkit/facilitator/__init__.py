"""Facilitator protocols: prompts, backends, turn brokering, token
budgeting, and retrospective parsing."""

from .actions import (
    ActionItem,
    ItemStatus,
    ParseResult,
    parse_action_items,
    render_action_items,
    status_transition_allowed,
)
from .backends import (
    RESOLUTION_SENTINEL,
    BackendConfig,
    FacilitatorMessage,
    LiveBackend,
    MockBackend,
    MockScript,
    make_backend,
    parse_live_reply,
)
from .context import ContextMessage, estimate_tokens, fit_context, tokens_for_words
from .prompts import (
    PromptKind,
    PromptTemplate,
    build_micro_prompt,
    build_retrospective_prompt,
    build_scenario_prompt,
)
from .turns import awaiting_human, build_turn_messages, next_turn, run_retrospective

__all__ = [
    "ActionItem",
    "BackendConfig",
    "ContextMessage",
    "FacilitatorMessage",
    "ItemStatus",
    "LiveBackend",
    "MockBackend",
    "MockScript",
    "ParseResult",
    "PromptKind",
    "PromptTemplate",
    "RESOLUTION_SENTINEL",
    "awaiting_human",
    "build_micro_prompt",
    "build_retrospective_prompt",
    "build_scenario_prompt",
    "build_turn_messages",
    "estimate_tokens",
    "fit_context",
    "make_backend",
    "next_turn",
    "parse_action_items",
    "parse_live_reply",
    "render_action_items",
    "run_retrospective",
    "status_transition_allowed",
    "tokens_for_words",
]
