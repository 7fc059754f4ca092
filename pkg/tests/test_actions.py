from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ttxkit.errors import ValidationError
from ttxkit.facilitator.actions import (
    ActionItem,
    ItemStatus,
    parse_action_items,
    render_action_items,
    status_transition_allowed,
)

RETRO_BLOCK = (
    "Critical: Password resets lagged the detection by several hours, leaving "
    "compromised accounts usable.\n"
    "Improvement: Add automated account lockouts when suspicious sign-ins are "
    "detected.\n"
    "Measure: Lockout fires within five minutes in the next drill.\n"
)


def test_single_block_yields_one_item_with_both_fields():
    result = parse_action_items(RETRO_BLOCK)
    assert len(result.items) == 1
    assert result.warnings == []
    item = result.items[0]
    assert "Password resets lagged" in item.finding
    assert "automated account lockouts" in item.improvement
    assert "five minutes" in item.measurable_criterion
    assert item.status is ItemStatus.OPEN


def test_plain_prose_yields_empty_list_plus_warning():
    result = parse_action_items(
        "Overall a thoughtful response; containment was timely and communication clear."
    )
    assert result.items == []
    assert len(result.warnings) == 1


def test_empty_text_is_empty_without_warnings():
    result = parse_action_items("")
    assert result.items == []
    assert result.warnings == []


def test_three_blocks_one_missing_improvement():
    text = "\n".join(
        [
            "Critical: no egress filtering",
            "Improvement: add egress allow-lists",
            "Critical: backups untested",
            "Improvement: quarterly restore drills",
            "Measure: one verified restore per quarter",
            "Critical: on-call rota has a single point of failure",
            "Critical: stale admin accounts",
            "Improvement: automate deprovisioning on HR exit events",
        ]
    )
    result = parse_action_items(text)
    assert len(result.items) == 3
    assert len(result.warnings) == 1
    assert "single point of failure" in result.warnings[0]


def test_continuation_lines_join_the_open_field():
    text = (
        "Critical: the phishing banner\n"
        "was removed from external mail last quarter\n"
        "Improvement: restore the banner\n"
        "and alert on lookalike domains\n"
    )
    result = parse_action_items(text)
    assert result.items[0].finding.endswith("last quarter")
    assert result.items[0].improvement.endswith("lookalike domains")


def test_labels_tolerate_list_markers_and_case():
    text = "- critical: logs rotated too fast\n* IMPROVEMENT: extend retention to 90 days\n"
    result = parse_action_items(text)
    assert len(result.items) == 1


def test_parse_render_round_trip_on_fixture():
    first = parse_action_items(RETRO_BLOCK)
    second = parse_action_items(render_action_items(first.items))
    assert [
        (i.finding, i.improvement, i.measurable_criterion) for i in second.items
    ] == [(i.finding, i.improvement, i.measurable_criterion) for i in first.items]


field_text = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd"), whitelist_characters=" "),
    min_size=1,
    max_size=60,
).filter(lambda s: s.strip() and "  " not in s)


@given(st.lists(st.tuples(field_text, field_text, field_text), min_size=1, max_size=5))
def test_parse_is_idempotent_over_rendered_items(triples):
    items = [
        ActionItem(finding=f.strip(), improvement=i.strip(), measurable_criterion=m.strip())
        for f, i, m in triples
    ]
    rendered = render_action_items(items)
    reparsed = parse_action_items(rendered)
    assert reparsed.warnings == []
    assert [
        (i.finding, i.improvement, i.measurable_criterion) for i in reparsed.items
    ] == [(i.finding, i.improvement, i.measurable_criterion) for i in items]
    # And a second round changes nothing.
    again = parse_action_items(render_action_items(reparsed.items))
    assert again.items == reparsed.items


def test_item_requires_finding_and_improvement():
    with pytest.raises(ValidationError):
        ActionItem(finding="", improvement="do better")
    with pytest.raises(ValidationError):
        ActionItem(finding="gap", improvement="   ")


def test_status_only_moves_forward_unless_reopened():
    assert status_transition_allowed(ItemStatus.OPEN, ItemStatus.IN_PROGRESS)
    assert status_transition_allowed(ItemStatus.IN_PROGRESS, ItemStatus.DONE)
    assert status_transition_allowed(ItemStatus.OPEN, ItemStatus.OPEN)
    assert not status_transition_allowed(ItemStatus.DONE, ItemStatus.OPEN)
    assert not status_transition_allowed(ItemStatus.DONE, ItemStatus.IN_PROGRESS, reopen=True)
    assert status_transition_allowed(ItemStatus.DONE, ItemStatus.OPEN, reopen=True)
