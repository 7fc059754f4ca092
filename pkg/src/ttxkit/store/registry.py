"""Action-item registry: the retrospective findings that feed future
scenarios, queryable by responsibility domain and status.

Status writes are last-write-wins; a write made against a stale view of
the status is applied but flagged in the item's audit trail.
"""

from __future__ import annotations

import fcntl
import json
import os
import threading
import uuid
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

from ..errors import NotFoundError, ValidationError
from ..facilitator.actions import ActionItem, ItemStatus, status_transition_allowed
from ..facilitator.context import estimate_tokens
from .domains import DomainStore

FORMAT_VERSION = 1


class ActionItemRegistry:
    def __init__(self, root: str | Path, domains: DomainStore | None = None):
        self.dir = Path(root) / "registry" / "action_items"
        self.dir.mkdir(parents=True, exist_ok=True)
        self.domains = domains
        self._lock = threading.Lock()

    @contextmanager
    def _locked(self):
        with self._lock:
            with open(self.dir / ".lock", "w") as lock_file:
                fcntl.flock(lock_file, fcntl.LOCK_EX)
                try:
                    yield
                finally:
                    fcntl.flock(lock_file, fcntl.LOCK_UN)

    def _path(self, item_id: str) -> Path:
        return self.dir / item_id

    def _write(self, record: dict) -> None:
        path = self._path(record["item_id"])
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as handle:
            json.dump(record, handle)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)

    def _read(self, item_id: str) -> dict:
        path = self._path(item_id)
        if not path.exists():
            raise NotFoundError(f"no action item {item_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def store_action_items(
        self,
        items: list[ActionItem],
        source_session: str | None = None,
        now: datetime | None = None,
    ) -> list[str]:
        """Persist items, assigning ids; validates domain references."""
        now = now or datetime.now(timezone.utc)
        ids = []
        with self._locked():
            for item in items:
                if item.responsibility_domain and self.domains is not None:
                    if not self.domains.has_domain(item.responsibility_domain) and (
                        self.domains.find_by_name(item.responsibility_domain) is None
                    ):
                        raise ValidationError(
                            f"unknown responsibility domain {item.responsibility_domain!r}"
                        )
                item_id = item.item_id or uuid.uuid4().hex
                item.item_id = item_id
                if source_session is not None:
                    item.source_session = source_session
                record = {
                    "format_version": FORMAT_VERSION,
                    **item.to_dict(),
                    "created_at": now.isoformat(),
                    "status_audit": [],
                    "status_conflict": False,
                }
                self._write(record)
                ids.append(item_id)
        return ids

    def get_item(self, item_id: str) -> ActionItem:
        return ActionItem.from_dict(self._read(item_id))

    def _all_records(self) -> list[dict]:
        records = []
        for path in sorted(self.dir.iterdir()):
            if path.suffix == ".tmp" or path.name.startswith("."):
                continue
            records.append(json.loads(path.read_text(encoding="utf-8")))
        return records

    def _domain_matches(self, record: dict, domain: str | None) -> bool:
        if domain is None:
            return True
        return record.get("responsibility_domain") == domain

    def open_items(self, domain: str | None = None) -> list[ActionItem]:
        """Items still being worked (open or in progress), newest first."""
        records = [
            r
            for r in self._all_records()
            if r["status"] != ItemStatus.DONE.value and self._domain_matches(r, domain)
        ]
        records.sort(key=lambda r: (r.get("created_at", ""), r["item_id"]), reverse=True)
        return [ActionItem.from_dict(r) for r in records]

    def items_for_domain(self, domain: str | None = None) -> list[ActionItem]:
        records = [r for r in self._all_records() if self._domain_matches(r, domain)]
        records.sort(key=lambda r: (r.get("created_at", ""), r["item_id"]), reverse=True)
        return [ActionItem.from_dict(r) for r in records]

    def update_status(
        self,
        item_id: str,
        new_status: ItemStatus,
        reopen: bool = False,
        expected_status: ItemStatus | None = None,
        now: datetime | None = None,
    ) -> ActionItem:
        """Move an item's status forward (or reopen explicitly).

        When the caller's expected status is stale the write still wins,
        but the audit entry is flagged as a conflict.
        """
        now = now or datetime.now(timezone.utc)
        with self._locked():
            record = self._read(item_id)
            current = ItemStatus(record["status"])
            if not status_transition_allowed(current, new_status, reopen=reopen):
                raise ValidationError(
                    f"status cannot move {current.value} -> {new_status.value} "
                    "(forward only; reopen explicitly)"
                )
            conflict = expected_status is not None and expected_status is not current
            record["status"] = new_status.value
            record.setdefault("status_audit", []).append(
                {
                    "from": current.value,
                    "to": new_status.value,
                    "at": now.isoformat(),
                    "conflict": conflict,
                }
            )
            if conflict:
                record["status_conflict"] = True
            self._write(record)
            return ActionItem.from_dict(record)

    def context_for_future(self, domain: str | None, token_cap: int = 2000) -> str:
        """Digest of a domain's open and recently closed items, newest
        first, truncated to the token cap. Empty string for no history."""
        records = [r for r in self._all_records() if self._domain_matches(r, domain)]
        records.sort(key=lambda r: (r.get("created_at", ""), r["item_id"]), reverse=True)
        lines: list[str] = []
        used = 0
        for record in records:
            line = "- [{status}] {finding} -> {improvement}".format(
                status=record["status"],
                finding=record["finding"],
                improvement=record["improvement"],
            )
            if record.get("measurable_criterion"):
                line += f" (measure: {record['measurable_criterion']})"
            cost = estimate_tokens(line)
            if used + cost > token_cap:
                break
            lines.append(line)
            used += cost
        return "\n".join(lines)
