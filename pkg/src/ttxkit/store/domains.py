"""Responsibility domains: the systems a team owns, including components
shared with peer domains (the cross-team integration surface)."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import NotFoundError, ValidationError

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Integration:
    component: str
    peer_domain_id: str
    shared: bool = True

    def to_dict(self) -> dict:
        return {
            "component": self.component,
            "peer_domain_id": self.peer_domain_id,
            "shared": self.shared,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Integration":
        return cls(
            component=data["component"],
            peer_domain_id=data["peer_domain_id"],
            shared=data.get("shared", True),
        )


@dataclass
class ResponsibilityDomain:
    domain_id: str
    name: str
    team_id: str
    components: list[str] = field(default_factory=list)
    integrations: list[Integration] = field(default_factory=list)

    def __post_init__(self):
        if not self.domain_id.strip() or not self.name.strip():
            raise ValidationError("domain needs a non-empty id and name")

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "domain_id": self.domain_id,
            "name": self.name,
            "team_id": self.team_id,
            "components": list(self.components),
            "integrations": [i.to_dict() for i in self.integrations],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResponsibilityDomain":
        return cls(
            domain_id=data["domain_id"],
            name=data["name"],
            team_id=data["team_id"],
            components=list(data.get("components", [])),
            integrations=[Integration.from_dict(i) for i in data.get("integrations", [])],
        )


class DomainStore:
    def __init__(self, root: str | Path):
        self.dir = Path(root) / "domains"
        self.dir.mkdir(parents=True, exist_ok=True)

    def save_domain(self, domain: ResponsibilityDomain) -> str:
        for other in self.list_domains():
            if other.domain_id != domain.domain_id and other.name == domain.name:
                raise ValidationError(
                    f"domain name {domain.name!r} already used by {other.domain_id!r}"
                )
        path = self.dir / domain.domain_id
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as handle:
            json.dump(domain.to_dict(), handle)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
        return domain.domain_id

    def get_domain(self, domain_id: str) -> ResponsibilityDomain:
        path = self.dir / domain_id
        if not path.exists():
            raise NotFoundError(f"no domain {domain_id!r}")
        return ResponsibilityDomain.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def has_domain(self, domain_id: str) -> bool:
        return (self.dir / domain_id).exists()

    def find_by_name(self, name: str) -> ResponsibilityDomain | None:
        for domain in self.list_domains():
            if domain.name == name:
                return domain
        return None

    def list_domains(self) -> list[ResponsibilityDomain]:
        domains = []
        for path in sorted(self.dir.iterdir()):
            if path.suffix == ".tmp" or path.name.startswith("."):
                continue
            domains.append(
                ResponsibilityDomain.from_dict(json.loads(path.read_text(encoding="utf-8")))
            )
        return domains

    def shared_integration_violations(self) -> list[str]:
        """Shared components must be listed by both sides of the integration.
        Returns one human-readable violation per missing reciprocal entry."""
        by_id = {d.domain_id: d for d in self.list_domains()}
        violations = []
        for domain in by_id.values():
            for integration in domain.integrations:
                if not integration.shared:
                    continue
                peer = by_id.get(integration.peer_domain_id)
                if peer is None:
                    continue  # peer not registered yet; nothing to check
                reciprocal = any(
                    i.shared
                    and i.component == integration.component
                    and i.peer_domain_id == domain.domain_id
                    for i in peer.integrations
                )
                if not reciprocal:
                    violations.append(
                        f"shared component {integration.component!r} listed by "
                        f"{domain.domain_id!r} but not by peer {peer.domain_id!r}"
                    )
        return violations
