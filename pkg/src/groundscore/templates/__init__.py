"""Versioned prompt templates shipped with the package.

Templates use `string.Template` placeholders (``${name}``). Each file
name carries its version; changing a template means adding a new file,
which in turn changes the reward-spec hash echoed by the service.
"""

from __future__ import annotations

import hashlib
from importlib import resources
from string import Template

JUDGE_PROMPT = "judge_prompt_v1.txt"
EVAL_PROMPT = "eval_prompt_v1.txt"


def load_template(name: str) -> Template:
    return Template(read_template_text(name))


def read_template_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def template_hash(name: str) -> str:
    return hashlib.sha256(read_template_text(name).encode("utf-8")).hexdigest()
