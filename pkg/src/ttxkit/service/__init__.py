"""HTTP API and command-line interface over the exercise engine."""

from .config import ApiConfig, ensure_writable, load_config
from .runner import RunResult, TickClock, WallClock, run_exercise

__all__ = [
    "ApiConfig",
    "RunResult",
    "TickClock",
    "WallClock",
    "ensure_writable",
    "load_config",
    "run_exercise",
]
