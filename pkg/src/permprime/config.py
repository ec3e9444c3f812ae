from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import InputError

DEFAULT_MATERIALIZATION_CAP = 200_000
DEFAULT_CLOSURE_CAP = 5_000_000
CAP_ENV_VAR = "PERMPRIME_CAP"


def materialization_cap(cap: int | None = None) -> int:
    """Resolve an explicit cap, falling back to $PERMPRIME_CAP, then the default."""
    if cap is not None:
        if cap <= 0:
            raise InputError("materialization cap must be positive")
        return cap
    env = os.environ.get(CAP_ENV_VAR)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise InputError(f"{CAP_ENV_VAR} must be an integer, got {env!r}") from None
        if value <= 0:
            raise InputError(f"{CAP_ENV_VAR} must be positive, got {env!r}")
        return value
    return DEFAULT_MATERIALIZATION_CAP


def closure_cap(cap: int | None = None) -> int:
    if cap is None:
        return DEFAULT_CLOSURE_CAP
    if cap <= 0:
        raise InputError("closure cap must be positive")
    return cap


@dataclass
class Config:
    materialization_cap: int = field(default_factory=materialization_cap)
    closure_cap: int = DEFAULT_CLOSURE_CAP
    report_format: str = "text"
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        if self.materialization_cap <= 0 or self.closure_cap <= 0:
            raise InputError("caps must be positive")
        if self.report_format not in ("text", "structured"):
            raise InputError(f"unknown report format {self.report_format!r}")
        if self.threads <= 0:
            raise InputError("threads must be positive")
