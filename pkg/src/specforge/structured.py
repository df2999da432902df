"""Fenced structured blocks in agent responses.

Non-code agent outputs (plans, information dictionaries, verdicts, analyses,
routes) travel as JSON inside a tagged markdown fence so the engine can parse
them mechanically and detect violations::

    ```plan
    {"target": "cipher", "sub_functions": [...]}
    ```

The first fence with the requested tag wins; surrounding prose is ignored.
"""

from __future__ import annotations

import json
import re


class FencedBlockError(ValueError):
    def __init__(self, message: str, code: str):
        super().__init__(message)
        self.code = code


def extract_fenced(text: str, tag: str) -> str:
    """Return the raw contents of the first ```<tag> fence."""
    pattern = re.compile(r"^```" + re.escape(tag) + r"[ \t]*$", re.MULTILINE)
    m = pattern.search(text)
    if m is None:
        raise FencedBlockError(f"no ```{tag} fence in response", code="NO_BLOCK")
    rest = text[m.end():]
    close = re.search(r"^```[ \t]*$", rest, re.MULTILINE)
    if close is None:
        raise FencedBlockError(f"```{tag} fence never closed", code="UNTERMINATED_BLOCK")
    return rest[:close.start()].strip("\n")


def parse_fenced_json(text: str, tag: str) -> dict | list:
    raw = extract_fenced(text, tag)
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FencedBlockError(f"```{tag} fence is not valid JSON: {exc}", code="BAD_JSON")


def make_fenced_json(tag: str, payload) -> str:
    return f"```{tag}\n{json.dumps(payload, indent=2, sort_keys=True)}\n```"
