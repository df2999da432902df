"""Run configuration: budgets, toolchain commands, provider selection.

Configs are JSON files. Everything has a default except the target function
name; budgets must all be at least 1 (CONFIG_INVALID otherwise).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import RunError
from .sandbox import ToolchainConfig

NOISE_STAGES = ("UNDERSTANDING", "PSEUDO", "SCRIPT", "SYNTH")


@dataclass(frozen=True)
class Budgets:
    max_attempts_per_level: int = 10
    augment_max_rounds: int = 3
    optimizer_trigger: int = 3
    max_reflections_per_subfunction: int = 3
    hls_budget: int = 5


@dataclass(frozen=True)
class ContextBudgets:
    doc_chars: int = 24_000
    reflection_digest_chars: int = 16_000


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "scripted"  # scripted | http
    transcript_path: str | None = None
    base_url: str | None = None
    model: str | None = None
    auth_token_env: str = ""
    timeout_seconds: float = 60.0
    retry_max_attempts: int = 3
    retry_backoff_seconds: tuple[float, ...] = (0.5, 2.0)


@dataclass(frozen=True)
class RunConfig:
    target_name: str
    budgets: Budgets = field(default_factory=Budgets)
    toolchain: ToolchainConfig = field(default_factory=ToolchainConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    context: ContextBudgets = field(default_factory=ContextBudgets)
    noise_stage: str | None = None
    golden_vectors: str | None = None  # path to a JSON vector file
    synthesizer_cmd: str | None = None
    api_token: str | None = None

    def to_json(self) -> dict:
        rec = asdict(self)
        rec["provider"]["retry_backoff_seconds"] = list(
            self.provider.retry_backoff_seconds)
        return rec

    @staticmethod
    def from_json(rec: dict) -> "RunConfig":
        budgets = Budgets(**rec.get("budgets", {}))
        toolchain = ToolchainConfig(**rec.get("toolchain", {}))
        prov = dict(rec.get("provider", {}))
        if "retry_backoff_seconds" in prov:
            prov["retry_backoff_seconds"] = tuple(prov["retry_backoff_seconds"])
        provider = ProviderConfig(**prov)
        context = ContextBudgets(**rec.get("context", {}))
        return RunConfig(
            target_name=rec.get("target_name", ""),
            budgets=budgets, toolchain=toolchain, provider=provider, context=context,
            noise_stage=rec.get("noise_stage"),
            golden_vectors=rec.get("golden_vectors"),
            synthesizer_cmd=rec.get("synthesizer_cmd"),
            api_token=rec.get("api_token"))


def validate_config(config: RunConfig) -> None:
    if not config.target_name:
        raise RunError("config must name a target function", code="CONFIG_INVALID")
    for name, value in asdict(config.budgets).items():
        if value < 1:
            raise RunError(f"budget {name} must be >= 1, got {value}",
                           code="CONFIG_INVALID")
    if config.noise_stage is not None and config.noise_stage not in NOISE_STAGES:
        raise RunError(f"bad noise stage {config.noise_stage!r}", code="CONFIG_INVALID")
    if config.provider.kind not in ("scripted", "http"):
        raise RunError(f"bad provider kind {config.provider.kind!r}", code="CONFIG_INVALID")
    if config.provider.kind == "scripted" and not config.provider.transcript_path:
        raise RunError("scripted provider needs a transcript_path", code="CONFIG_INVALID")
    if config.provider.kind == "http" and not config.provider.base_url:
        raise RunError("http provider needs a base_url", code="CONFIG_INVALID")
    if config.context.doc_chars < 1 or config.context.reflection_digest_chars < 1:
        raise RunError("context budgets must be positive", code="CONFIG_INVALID")


def load_config(path: str | Path) -> RunConfig:
    try:
        rec = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise RunError(f"config unreadable: {exc}", code="CONFIG_INVALID")
    try:
        config = RunConfig.from_json(rec)
    except TypeError as exc:
        raise RunError(f"config malformed: {exc}", code="CONFIG_INVALID")
    validate_config(config)
    return config
