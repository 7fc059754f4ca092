"""ttxkit: LLM-moderated security tabletop exercises.

Session lifecycle and workflow state machine, team preparedness scoring,
facilitator prompt protocols with mock and live backends, file-backed
persistence, and an HTTP/CLI surface.
"""

from . import errors, exercise, facilitator, scoring, store

__version__ = "0.1.0"

__all__ = ["errors", "exercise", "facilitator", "scoring", "store", "__version__"]
