"""Action items: the measurable improvements extracted from retrospectives.

The retrospective markup is line-oriented: a "Critical:" label opens a
block, "Improvement:" and optionally "Measure:" complete it.
Continuation lines (no label) extend the most recent field. A Critical
without an Improvement becomes a parse warning, not an item.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..errors import ValidationError


class ItemStatus(str, Enum):
    OPEN = "open"
    IN_PROGRESS = "in_progress"
    DONE = "done"


_STATUS_ORDER = {ItemStatus.OPEN: 0, ItemStatus.IN_PROGRESS: 1, ItemStatus.DONE: 2}


def status_transition_allowed(current: ItemStatus, target: ItemStatus, reopen: bool = False) -> bool:
    """Forward-only transitions unless an explicit reopen is requested."""
    if reopen:
        return target is ItemStatus.OPEN
    return _STATUS_ORDER[target] >= _STATUS_ORDER[current]


@dataclass
class ActionItem:
    finding: str
    improvement: str
    measurable_criterion: str = ""
    responsibility_domain: str | None = None
    status: ItemStatus = ItemStatus.OPEN
    source_session: str | None = None
    item_id: str | None = None  # assigned by the registry on store

    def __post_init__(self):
        if not self.finding.strip():
            raise ValidationError("action item finding must be non-empty")
        if not self.improvement.strip():
            raise ValidationError("action item improvement must be non-empty")

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "finding": self.finding,
            "improvement": self.improvement,
            "measurable_criterion": self.measurable_criterion,
            "responsibility_domain": self.responsibility_domain,
            "status": self.status.value,
            "source_session": self.source_session,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ActionItem":
        return cls(
            finding=data["finding"],
            improvement=data["improvement"],
            measurable_criterion=data.get("measurable_criterion", ""),
            responsibility_domain=data.get("responsibility_domain"),
            status=ItemStatus(data.get("status", "open")),
            source_session=data.get("source_session"),
            item_id=data.get("item_id"),
        )


@dataclass
class ParseResult:
    items: list[ActionItem] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


_LABELS = {"critical": "finding", "improvement": "improvement", "measure": "measure"}


def _split_label(line: str) -> tuple[str, str] | None:
    head, sep, rest = line.partition(":")
    if not sep:
        return None
    label = head.strip().lower()
    # Tolerate list markers and bold markup in front of the label.
    label = label.lstrip("-*# ").strip()
    if label in _LABELS:
        return _LABELS[label], rest.strip()
    return None


def parse_action_items(retrospective_text: str) -> ParseResult:
    """Extract ActionItems from Critical/Improvement labeled blocks.

    Blocks missing an Improvement are reported as warnings. Prose with no
    labeled blocks yields an empty list plus a warning. An empty input is
    an empty, warning-free result.
    """
    result = ParseResult()
    block: dict[str, str] = {}
    current_field: str | None = None

    def close_block():
        nonlocal block, current_field
        if not block:
            return
        finding = block.get("finding", "").strip()
        improvement = block.get("improvement", "").strip()
        if finding and improvement:
            result.items.append(
                ActionItem(
                    finding=finding,
                    improvement=improvement,
                    measurable_criterion=block.get("measure", "").strip(),
                )
            )
        else:
            snippet = (finding or improvement)[:60]
            result.warnings.append(f"incomplete block dropped (no improvement): {snippet!r}")
        block = {}
        current_field = None

    for raw_line in retrospective_text.splitlines():
        line = raw_line.strip()
        if not line:
            continue
        labeled = _split_label(line)
        if labeled:
            fieldname, value = labeled
            if fieldname == "finding":
                close_block()
            block[fieldname] = value
            current_field = fieldname
        elif current_field:
            block[current_field] = (block[current_field] + " " + line).strip()
    close_block()

    if retrospective_text.strip() and not result.items and not result.warnings:
        result.warnings.append("no Critical/Improvement blocks found in retrospective")
    return result


def render_action_items(items: list[ActionItem]) -> str:
    """Serialize items back into the labeled-block markup. Parsing the
    rendered text reproduces the same finding/improvement/measure triples."""
    blocks = []
    for item in items:
        lines = [f"Critical: {item.finding}", f"Improvement: {item.improvement}"]
        if item.measurable_criterion:
            lines.append(f"Measure: {item.measurable_criterion}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)
