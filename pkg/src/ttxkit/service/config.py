"""Service configuration: INI file with [server], [storage], [backend],
and [scoring] sections; environment variables override file values as
TTX_<SECTION>_<KEY>. The API bearer token comes only from TTX_API_TOKEN.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ValidationError
from ..facilitator.backends import BackendConfig

API_TOKEN_ENV = "TTX_API_TOKEN"


@dataclass
class ApiConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8420
    storage_root: str = "ttx-data"
    backend: BackendConfig = field(default_factory=BackendConfig)
    default_time_budget_minutes: float = 60.0
    default_alpha: float = 0.5

    def __post_init__(self):
        if not 1 <= self.listen_port <= 65535:
            raise ValidationError(f"invalid port {self.listen_port}")
        if not 0 <= self.default_alpha <= 1:
            raise ValidationError(f"default_alpha must be in [0, 1], got {self.default_alpha}")
        if self.default_time_budget_minutes <= 0:
            raise ValidationError("default_time_budget_minutes must be positive")


def ensure_writable(root: str | Path) -> Path:
    """Storage root must be creatable and writable at startup."""
    path = Path(root)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-probe"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise ValidationError(f"storage root {path} is not writable: {exc}") from None
    return path


def _get(parser: configparser.ConfigParser, env: dict, section: str, key: str, default):
    env_name = f"TTX_{section.upper()}_{key.upper()}"
    if env_name in env:
        raw = env[env_name]
    elif parser.has_option(section, key):
        raw = parser.get(section, key)
    else:
        return default
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def load_config(path: str | Path | None = None, env: dict | None = None) -> ApiConfig:
    """Build an ApiConfig from an optional INI file plus the environment."""
    env = dict(os.environ if env is None else env)
    parser = configparser.ConfigParser()
    if path is not None:
        read = parser.read(str(path))
        if not read:
            raise ValidationError(f"config file {path} not found or unreadable")

    backend = BackendConfig(
        mode=_get(parser, env, "backend", "mode", "mock"),
        endpoint=_get(parser, env, "backend", "endpoint", ""),
        credential_env=_get(parser, env, "backend", "credential_env", ""),
        model=_get(parser, env, "backend", "model", ""),
        token_limit=_get(parser, env, "backend", "token_limit", 8192),
        timeout_seconds=_get(parser, env, "backend", "timeout_seconds", 30.0),
        retries=_get(parser, env, "backend", "retries", 2),
        backoff_seconds=_get(parser, env, "backend", "backoff_seconds", 0.5),
        script_path=_get(parser, env, "backend", "script", ""),
    )
    return ApiConfig(
        listen_host=_get(parser, env, "server", "host", "127.0.0.1"),
        listen_port=_get(parser, env, "server", "port", 8420),
        storage_root=_get(parser, env, "storage", "root", "ttx-data"),
        backend=backend,
        default_time_budget_minutes=_get(
            parser, env, "server", "default_time_budget_minutes", 60.0
        ),
        default_alpha=_get(parser, env, "scoring", "default_alpha", 0.5),
    )
