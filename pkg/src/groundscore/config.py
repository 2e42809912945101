"""Run configuration: structured files for endpoints, environment for secrets."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import yaml

from . import templates
from .clients import Cassette
from .rewards import DEFAULT_ADVANTAGE_EPSILON

__all__ = [
    "EndpointConfig",
    "ServiceConfig",
    "EvalConfig",
    "load_config",
    "load_service_config",
    "load_eval_config",
]

DEFAULT_MAX_BATCH = 1024


@dataclass(frozen=True)
class EndpointConfig:
    """One chat-completions endpoint (judge or model under test)."""

    base_url: str
    model: str
    api_key_env: str = "GROUNDSCORE_API_KEY"
    timeout: float = 60.0
    max_retries: int = 2
    cassette_path: str | None = None
    cassette_mode: str = "replay"

    def api_key(self) -> str | None:
        # Secrets stay out of config files; only the env var name goes in.
        return os.environ.get(self.api_key_env) or None

    def cassette(self) -> Cassette | None:
        if self.cassette_path is None:
            return None
        return Cassette(path=Path(self.cassette_path), mode=self.cassette_mode)


@dataclass(frozen=True)
class ServiceConfig:
    """Reward-service settings; judge is optional."""

    host: str = "127.0.0.1"
    port: int = 8080
    max_batch: int = DEFAULT_MAX_BATCH
    judge: EndpointConfig | None = None
    judge_concurrency: int = 8
    advantage_epsilon: float = DEFAULT_ADVANTAGE_EPSILON
    auth_token_env: str = "GROUNDSCORE_AUTH_TOKEN"

    def auth_token(self) -> str | None:
        return os.environ.get(self.auth_token_env) or None


@dataclass(frozen=True)
class EvalConfig:
    """Benchmark-run settings: the model endpoint plus harness knobs."""

    model: EndpointConfig
    image_root: str | None = None
    concurrency: int = 1
    prompt_template: str = templates.EVAL_PROMPT


def _endpoint_from_dict(data: dict, **defaults) -> EndpointConfig:
    merged = {**defaults, **data}
    return EndpointConfig(
        base_url=merged["base_url"],
        model=merged["model"],
        api_key_env=merged.get("api_key_env", "GROUNDSCORE_API_KEY"),
        timeout=float(merged.get("timeout", 60.0)),
        max_retries=int(merged.get("max_retries", 2)),
        cassette_path=merged.get("cassette_path"),
        cassette_mode=merged.get("cassette_mode", "replay"),
    )


def load_config(path: str | Path) -> dict:
    """Read a YAML (or JSON, which YAML subsumes) config file into a dict."""
    with Path(path).open(encoding="utf-8") as handle:
        data = yaml.safe_load(handle)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a mapping at the top level")
    return data


def service_config_from_dict(data: dict) -> ServiceConfig:
    section = data.get("service", {})
    judge_section = data.get("judge")
    judge = None
    if judge_section:
        judge = _endpoint_from_dict(judge_section, api_key_env="GROUNDSCORE_JUDGE_API_KEY")
    return ServiceConfig(
        host=section.get("host", "127.0.0.1"),
        port=int(section.get("port", 8080)),
        max_batch=int(section.get("max_batch", DEFAULT_MAX_BATCH)),
        judge=judge,
        judge_concurrency=int(section.get("judge_concurrency", 8)),
        advantage_epsilon=float(section.get("advantage_epsilon", DEFAULT_ADVANTAGE_EPSILON)),
        auth_token_env=section.get("auth_token_env", "GROUNDSCORE_AUTH_TOKEN"),
    )


def eval_config_from_dict(data: dict) -> EvalConfig:
    if "model" not in data:
        raise ValueError("eval config needs a 'model' section with base_url and model")
    harness_section = data.get("harness", {})
    return EvalConfig(
        model=_endpoint_from_dict(
            data["model"], api_key_env="GROUNDSCORE_MODEL_API_KEY", timeout=120.0
        ),
        image_root=harness_section.get("image_root"),
        concurrency=int(harness_section.get("concurrency", 1)),
        prompt_template=harness_section.get("prompt_template", templates.EVAL_PROMPT),
    )


def load_service_config(path: str | Path) -> ServiceConfig:
    return service_config_from_dict(load_config(path))


def load_eval_config(path: str | Path) -> EvalConfig:
    return eval_config_from_dict(load_config(path))
