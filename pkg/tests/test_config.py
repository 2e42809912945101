"""Config files carry endpoints and knobs; secrets come only from the environment."""

from __future__ import annotations

import pytest

from groundscore.config import (
    DEFAULT_MAX_BATCH,
    EndpointConfig,
    ServiceConfig,
    load_eval_config,
    load_service_config,
)
from groundscore.rewards import DEFAULT_ADVANTAGE_EPSILON


def test_service_config_defaults(tmp_path):
    path = tmp_path / "service.yaml"
    path.write_text("service: {}\n", encoding="utf-8")
    config = load_service_config(path)
    assert config.host == "127.0.0.1"
    assert config.port == 8080
    assert config.max_batch == DEFAULT_MAX_BATCH == 1024
    assert config.judge is None
    assert config.advantage_epsilon == DEFAULT_ADVANTAGE_EPSILON


def test_service_config_with_judge(tmp_path):
    path = tmp_path / "service.yaml"
    path.write_text(
        "\n".join(
            [
                "service:",
                "  host: 0.0.0.0",
                "  port: 9000",
                "  max_batch: 256",
                "judge:",
                "  base_url: http://judge.internal/v1",
                "  model: judge-7b",
                "  timeout: 30",
            ]
        ),
        encoding="utf-8",
    )
    config = load_service_config(path)
    assert config.port == 9000
    assert config.max_batch == 256
    assert config.judge.base_url == "http://judge.internal/v1"
    assert config.judge.model == "judge-7b"
    assert config.judge.timeout == 30.0
    assert config.judge.api_key_env == "GROUNDSCORE_JUDGE_API_KEY"


def test_eval_config(tmp_path):
    path = tmp_path / "eval.yaml"
    path.write_text(
        "\n".join(
            [
                "model:",
                "  base_url: http://model.internal/v1",
                "  model: candidate-3b",
                "  cassette_path: tapes/run1.json",
                "  cassette_mode: record",
                "harness:",
                "  image_root: /data/images",
                "  concurrency: 4",
            ]
        ),
        encoding="utf-8",
    )
    config = load_eval_config(path)
    assert config.model.model == "candidate-3b"
    assert config.model.timeout == 120.0  # eval default is roomier than the judge's
    assert config.model.api_key_env == "GROUNDSCORE_MODEL_API_KEY"
    assert config.image_root == "/data/images"
    assert config.concurrency == 4
    cassette = config.model.cassette()
    assert cassette.mode == "record"
    assert str(cassette.path) == "tapes/run1.json"


def test_eval_config_requires_model_section(tmp_path):
    path = tmp_path / "eval.yaml"
    path.write_text("harness: {concurrency: 2}\n", encoding="utf-8")
    with pytest.raises(ValueError, match="model"):
        load_eval_config(path)


def test_config_must_be_a_mapping(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("- just\n- a list\n", encoding="utf-8")
    with pytest.raises(ValueError, match="mapping"):
        load_service_config(path)


def test_secrets_come_from_environment(monkeypatch):
    endpoint = EndpointConfig(base_url="http://x/v1", model="m")
    monkeypatch.delenv("GROUNDSCORE_API_KEY", raising=False)
    assert endpoint.api_key() is None
    monkeypatch.setenv("GROUNDSCORE_API_KEY", "s3cret")
    assert endpoint.api_key() == "s3cret"

    service = ServiceConfig()
    monkeypatch.delenv("GROUNDSCORE_AUTH_TOKEN", raising=False)
    assert service.auth_token() is None
    monkeypatch.setenv("GROUNDSCORE_AUTH_TOKEN", "token")
    assert service.auth_token() == "token"

    custom = ServiceConfig(auth_token_env="OTHER_TOKEN")
    monkeypatch.setenv("OTHER_TOKEN", "other")
    assert custom.auth_token() == "other"


def test_endpoint_without_cassette():
    assert EndpointConfig(base_url="http://x/v1", model="m").cassette() is None
