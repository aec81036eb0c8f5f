"""Pipeline configuration: one file plus flag overrides; env only for secrets."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

log = logging.getLogger(__name__)

ENDPOINT_ENV = "VETRA_ENDPOINT"
API_KEY_ENV = "VETRA_API_KEY"

MODE_FULL = "Full"
MODE_NO_DIALECTICS = "NoDialectics"
MODE_NO_AUDIT = "NoAudit"
MODES = (MODE_FULL, MODE_NO_DIALECTICS, MODE_NO_AUDIT)


@dataclass(frozen=True)
class PricingConfig:
    input_price_per_million: float = 0.56
    output_price_per_million: float = 1.68

    def __post_init__(self):
        if self.input_price_per_million < 0 or self.output_price_per_million < 0:
            raise ValueError("prices must be non-negative")


@dataclass(frozen=True)
class Temperatures:
    discovery: Optional[float] = None      # None = provider default
    expansion: Optional[float] = None
    verification: Optional[float] = None
    audit: float = 0.0


@dataclass(frozen=True)
class PipelineConfig:
    k: int = 2
    depth_limit: int = 10
    expansion_cap: int = 50
    model: str = "deepseek-chat"
    temperatures: Temperatures = field(default_factory=Temperatures)
    max_retries: int = 3
    pricing: PricingConfig = field(default_factory=PricingConfig)
    parallelism: int = 1
    backend: str = "replay"                # replay | live
    cassette: Optional[str] = None
    mode: str = MODE_FULL

    def __post_init__(self):
        if self.k < 1 or self.depth_limit < 1 or self.expansion_cap < 1:
            raise ValueError("k, depth_limit, and expansion_cap must be >= 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.backend not in ("replay", "live"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.temperatures.audit != 0.0:
            log.warning("audit temperature overridden to %s; verdicts may be "
                        "non-deterministic", self.temperatures.audit)


def load_config(path: Optional[str | Path] = None, **overrides) -> PipelineConfig:
    """Config file (JSON) plus keyword overrides; unknown keys rejected."""
    data: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text())
    data.update({k: v for k, v in overrides.items() if v is not None})
    temps = data.pop("temperatures", None)
    pricing = data.pop("pricing", None)
    config = PipelineConfig(**{k: v for k, v in data.items()})
    if temps:
        config = replace(config, temperatures=Temperatures(**temps))
    if pricing:
        config = replace(config, pricing=PricingConfig(**pricing))
    return config


def endpoint_from_env() -> tuple[str, str]:
    endpoint = os.environ.get(ENDPOINT_ENV, "")
    api_key = os.environ.get(API_KEY_ENV, "")
    return endpoint, api_key
