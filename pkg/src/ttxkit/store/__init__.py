"""Durable storage: sessions with append-only transcripts, responsibility
domains, and the action-item registry."""

from pathlib import Path

from .domains import DomainStore, Integration, ResponsibilityDomain
from .registry import ActionItemRegistry
from .sessions import FORMAT_VERSION, SessionStore


class Store:
    """Facade wiring the three stores onto one storage root."""

    def __init__(self, root):
        self.root = Path(root)
        self.sessions = SessionStore(self.root)
        self.domains = DomainStore(self.root)
        self.registry = ActionItemRegistry(self.root, domains=self.domains)


__all__ = [
    "ActionItemRegistry",
    "DomainStore",
    "FORMAT_VERSION",
    "Integration",
    "ResponsibilityDomain",
    "SessionStore",
    "Store",
]
