"""Loading of prompt template files, packaged or from a user directory."""

from __future__ import annotations

import os
from importlib import resources
from typing import Optional

from .errors import TemplateError


def load_prompt(name: str, prompt_dir: Optional[str] = None) -> str:
    """Read a prompt template by file name.

    A user-supplied directory takes precedence; otherwise the copy packaged
    with the library is used.
    """
    if prompt_dir:
        path = os.path.join(prompt_dir, name)
        if not os.path.exists(path):
            raise TemplateError(f"prompt template not found: {path}")
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    try:
        return (resources.files("artcontext") / "prompts" / name).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise TemplateError(f"packaged prompt template not found: {name}") from None


def fill(template: str, **values: str) -> str:
    """Substitute {name} placeholders by plain replacement.

    str.format is avoided on purpose: corpus text routinely contains braces.
    """
    out = template
    for key, value in values.items():
        out = out.replace("{" + key + "}", value)
    return out
