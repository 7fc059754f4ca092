"""Exception hierarchy shared by the engine, store, and service layers.

Every error carries a machine-readable ``code`` so the HTTP layer can map
engine failures onto structured error bodies without string matching.
"""

from __future__ import annotations


class TtxError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ValidationError(TtxError):
    """Input violates a documented precondition or invariant."""

    code = "validation_error"


class PhaseError(TtxError):
    """Operation attempted in a phase where it is not legal."""

    code = "phase_error"


class IllegalSignalError(PhaseError):
    """Signal not accepted in the current phase; lists the legal set."""

    def __init__(self, message: str, legal: frozenset):
        super().__init__(message)
        self.legal = legal


class ConflictError(TtxError):
    """Concurrent update lost the race (stale sequence, duplicate claim)."""

    code = "conflict"


class NotFoundError(TtxError):
    """Referenced session, record, or domain does not exist."""

    code = "not_found"


class IntegrityError(TtxError):
    """Stored record is corrupt; ``sequence_number`` names the offender."""

    code = "integrity_error"

    def __init__(self, message: str, sequence_number: int | None = None):
        super().__init__(message)
        self.sequence_number = sequence_number


class PromptRenderError(TtxError):
    """A prompt template was rendered with required slots missing."""

    code = "render_error"

    def __init__(self, message: str, missing: tuple[str, ...] = ()):
        super().__init__(message)
        self.missing = missing


class BudgetError(TtxError):
    """Pinned context alone exceeds the token budget."""

    code = "budget_error"


class BackendError(TtxError):
    """Facilitator backend failed to produce a turn."""

    code = "backend_error"


class BackendTimeout(BackendError):
    """Backend did not answer within the retry budget."""

    code = "backend_timeout"


class ScriptExhaustedError(BackendError):
    """Mock script has no messages left."""

    code = "script_exhausted"
