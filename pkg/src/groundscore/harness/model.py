"""Clients that put benchmark questions to a model under test."""

from __future__ import annotations

import base64
import mimetypes
from pathlib import Path
from typing import Protocol

from ..clients import Cassette, ChatCompletionsClient
from .dataset import BenchmarkSample

__all__ = ["ModelClient", "ChatVisionModel"]


class ModelClient(Protocol):
    """Anything that can answer one benchmark question with raw text."""

    def query(self, sample: BenchmarkSample, prompt: str) -> str: ...


def _image_content(image_ref: str) -> dict:
    if image_ref.startswith(("http://", "https://", "data:")):
        return {"type": "image_url", "image_url": {"url": image_ref}}
    path = Path(image_ref)
    data = path.read_bytes()
    mime = mimetypes.guess_type(path.name)[0] or "image/jpeg"
    encoded = base64.b64encode(data).decode("ascii")
    return {"type": "image_url", "image_url": {"url": f"data:{mime};base64,{encoded}"}}


class ChatVisionModel:
    """Model under test behind an OpenAI-compatible chat endpoint.

    Local image paths are read and inlined as base64 data URLs; http(s)
    and data URLs pass through untouched. Attach a cassette for
    record/replay runs.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 120.0,
        max_retries: int = 2,
        cassette: Cassette | None = None,
        image_root: str | Path | None = None,
        transport=None,
    ):
        self.image_root = Path(image_root) if image_root else None
        self._client = ChatCompletionsClient(
            base_url=base_url,
            model=model,
            api_key=api_key,
            timeout=timeout,
            max_retries=max_retries,
            cassette=cassette,
            transport=transport,
        )

    @property
    def model(self) -> str:
        return self._client.model

    def _resolve_image(self, image_ref: str) -> str:
        if self.image_root is not None and not image_ref.startswith(("http://", "https://", "data:")):
            return str(self.image_root / image_ref)
        return image_ref

    def query(self, sample: BenchmarkSample, prompt: str) -> str:
        content = [
            _image_content(self._resolve_image(sample.image_ref)),
            {"type": "text", "text": prompt},
        ]
        return self._client.complete([{"role": "user", "content": content}])
