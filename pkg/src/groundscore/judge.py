"""Judge client for open-ended answer grading.

The judge is an external chat model asked for a one-word verdict on a
single-turn prompt containing the question, the reference answer, and
the candidate answer. A verdict that is not literally "correct" or
"incorrect" scores 0 and is flagged as non-conforming; transport
failures raise instead of silently scoring 0.

Judging is text-only. Whether the judge should also see the image is
deliberately left out; nothing here attaches images.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import templates
from .clients import Cassette, ChatCompletionsClient

__all__ = ["JudgeVerdict", "JudgeClient"]


@dataclass(frozen=True)
class JudgeVerdict:
    correct: bool
    conforming: bool  # judge answered with a recognized one-word verdict
    raw: str


class JudgeClient:
    """Grades candidate answers against references via a chat model."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        max_retries: int = 2,
        cassette: Cassette | None = None,
        prompt_template: str = templates.JUDGE_PROMPT,
        transport=None,
    ):
        self.prompt_template_name = prompt_template
        self._template = templates.load_template(prompt_template)
        self._client = ChatCompletionsClient(
            base_url=base_url,
            model=model,
            api_key=api_key,
            timeout=timeout,
            max_retries=max_retries,
            cassette=cassette,
            extra_body={"temperature": 0.0},
            transport=transport,
        )

    @property
    def model(self) -> str:
        return self._client.model

    def prompt_for(self, question: str, reference: str, candidate: str) -> str:
        return self._template.substitute(
            question=question, reference=reference, candidate=candidate
        )

    def judge(self, question: str, reference: str, candidate: str) -> JudgeVerdict:
        content = self._client.complete(
            [{"role": "user", "content": self.prompt_for(question, reference, candidate)}]
        )
        verdict = content.strip().strip(".").lower()
        if verdict == "correct":
            return JudgeVerdict(correct=True, conforming=True, raw=content)
        if verdict == "incorrect":
            return JudgeVerdict(correct=False, conforming=True, raw=content)
        return JudgeVerdict(correct=False, conforming=False, raw=content)

    def probe(self) -> bool:
        return self._client.probe()
