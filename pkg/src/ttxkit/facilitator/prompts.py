"""Prompt templates and builders for the facilitation protocols.

Three protocols: full-scenario instantiation (moderate, pause for
humans, simulate unfilled roles), single-domain micro exercises, and the
post-exercise retrospective that demands labeled Critical/Improvement
blocks. Rendering is deterministic and fails loudly on missing slots.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from string import Formatter
from typing import Sequence

from ..errors import PromptRenderError, ValidationError
from ..exercise import EventKind, Role, SessionEvent
from .context import ContextMessage, fit_context


class PromptKind(str, Enum):
    SCENARIO_INSTANTIATION = "scenario_instantiation"
    MICRO_TABLETOP = "micro_tabletop"
    RETROSPECTIVE = "retrospective"
    TURN_CONTINUATION = "turn_continuation"


@dataclass(frozen=True)
class PromptTemplate:
    """A fixed template whose named slots must all be filled to render."""

    kind: PromptKind
    template: str

    @property
    def slots(self) -> tuple[str, ...]:
        names = []
        for _, name, _, _ in Formatter().parse(self.template):
            if name and name not in names:
                names.append(name)
        return tuple(names)

    def render(self, **values: str) -> str:
        missing = tuple(slot for slot in self.slots if slot not in values)
        if missing:
            raise PromptRenderError(
                f"{self.kind.value} template missing slots: {', '.join(missing)}",
                missing=missing,
            )
        return self.template.format(**values)


SCENARIO_TEMPLATE = PromptTemplate(
    kind=PromptKind.SCENARIO_INSTANTIATION,
    template=(
        "You are the facilitator of a live security tabletop exercise. "
        "Moderate the scenario step by step, revealing information only as it "
        "would become available, and pause whenever a decision or action is "
        "required from a human participant.\n"
        "\n"
        "Scenario: {narrative}\n"
        "\n"
        "The human participants are playing: {human_roles}.\n"
        "Simulate these roles yourself and speak for them when their "
        "perspective is needed: {simulated_roles}.\n"
        "\n"
        "At each stage, describe the situation, then ask the humans for their "
        "decisions or actions and wait for their reply before continuing. The "
        "goal is to expose weak points, force immediate response decisions, "
        "and collect concrete improvement recommendations."
    ),
)

PRIOR_FINDINGS_SECTION = (
    "\n\nFindings from earlier exercises to weave into this scenario:\n{prior_findings}"
)

MICRO_TEMPLATE = PromptTemplate(
    kind=PromptKind.MICRO_TABLETOP,
    template=(
        "Moderate a small tabletop exercise focused on {domain}. You may ask "
        "me which tooling is available, which versions are in use, and what "
        "monitoring or detections exist, so the scenario stays realistic for "
        "this environment. Pause for my decision at each step."
    ),
)

TOOLING_SECTION = "\n\nKnown environment details:\n{tooling_context}"

RETROSPECTIVE_TEMPLATE = PromptTemplate(
    kind=PromptKind.RETROSPECTIVE,
    template=(
        "The exercise is over. Review the team's recorded responses below and "
        "be ruthlessly critical: flag anything that could have let the "
        "attacker persist or get back in later.\n"
        "\n"
        "{transcript_excerpt}\n"
        "\n"
        "For every weakness, answer with a block in exactly this form:\n"
        "Critical: <the observed weakness>\n"
        "Improvement: <the recommended change>\n"
        "Measure: <how we will know the improvement landed>"
    ),
)

TURN_TEMPLATE = PromptTemplate(
    kind=PromptKind.TURN_CONTINUATION,
    template=(
        "Continue moderating. Latest participant input:\n{human_input}\n"
        "Advance the scenario one step and pause again if you need a human "
        "decision."
    ),
)


def _role_names(roles: Sequence[Role | str]) -> str:
    names = [r.display if isinstance(r, Role) else str(r) for r in roles]
    return ", ".join(names)


def build_scenario_prompt(
    scenario,
    human_roles: Sequence[Role | str],
    simulated_roles: Sequence[Role | str],
) -> str:
    """Full-exercise instantiation prompt: moderate, pause, simulate.

    Requires at least one human role; the prior-findings section appears
    only when the scenario carries findings.
    """
    if not human_roles:
        raise ValidationError("scenario prompt needs at least one human role")
    prompt = SCENARIO_TEMPLATE.render(
        narrative=scenario.narrative,
        human_roles=_role_names(human_roles),
        simulated_roles=_role_names(simulated_roles) if simulated_roles else "none",
    )
    if scenario.prior_findings.strip():
        prompt += PRIOR_FINDINGS_SECTION.format(prior_findings=scenario.prior_findings)
    return prompt


def build_micro_prompt(
    domain: str,
    tooling_context: str = "",
    token_limit: int | None = None,
) -> str:
    """Single-domain micro-tabletop prompt inviting environment questions.

    When a token budget is given, tooling-context lines are trimmed
    oldest-first to fit; the instruction preamble is never trimmed.
    """
    if not domain.strip():
        raise ValidationError("micro-tabletop domain must be non-empty")
    preamble = MICRO_TEMPLATE.render(domain=domain)
    if not tooling_context.strip():
        return preamble

    if token_limit is not None:
        messages = [ContextMessage(preamble, pinned=True)] + [
            ContextMessage(line) for line in tooling_context.splitlines() if line.strip()
        ]
        kept = fit_context(messages, token_limit)
        kept_context = "\n".join(m.text for m in kept if not m.pinned)
        if not kept_context:
            return preamble
        return preamble + TOOLING_SECTION.format(tooling_context=kept_context)

    return preamble + TOOLING_SECTION.format(tooling_context=tooling_context)


def _excerpt_line(event: SessionEvent) -> str:
    if event.kind is EventKind.INJECT:
        return f"[facilitator] {event.body.get('narrative', '')}"
    return f"[{event.actor}] {event.body.get('text', '')}"


def build_retrospective_prompt(
    transcript: Sequence[SessionEvent],
    token_limit: int | None = None,
) -> str:
    """Retrospective prompt quoting every human response.

    Requires at least one human_response event. Under a token budget the
    oldest inject narration is elided first; human responses are always
    preserved.
    """
    relevant = [
        e for e in transcript if e.kind in (EventKind.INJECT, EventKind.HUMAN_RESPONSE)
    ]
    if not any(e.kind is EventKind.HUMAN_RESPONSE for e in relevant):
        raise ValidationError("nothing to critique: transcript has no human responses")

    messages = [
        ContextMessage(_excerpt_line(e), pinned=e.kind is EventKind.HUMAN_RESPONSE)
        for e in relevant
    ]
    if token_limit is not None:
        # Reserve room for the fixed instructions around the excerpt.
        frame_tokens = estimate_frame_tokens()
        messages = fit_context(messages, max(token_limit - frame_tokens, 1))
    excerpt = "\n".join(m.text for m in messages)
    return RETROSPECTIVE_TEMPLATE.render(transcript_excerpt=excerpt)


def estimate_frame_tokens() -> int:
    from .context import estimate_tokens

    return estimate_tokens(RETROSPECTIVE_TEMPLATE.template.replace("{transcript_excerpt}", ""))


def build_turn_prompt(human_input: str) -> str:
    return TURN_TEMPLATE.render(human_input=human_input if human_input.strip() else "(none)")
