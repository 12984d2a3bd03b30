"""Tolerant JSON extraction for model output.

Models are asked for bare JSON but often wrap it in prose or code fences.
`extract_json_object` tries a direct parse first, then scans for the first
balanced {...} region, tracking string literals so braces inside them do
not confuse the scan. Returns None instead of raising; callers decide
whether a miss is retryable.
"""

from __future__ import annotations

import json
from typing import Any


def first_balanced_object(text: str) -> str | None:
    """The first balanced {...} substring, or None."""
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start : i + 1]
        start = text.find("{", start + 1)
    return None


def extract_json_object(text: str) -> dict[str, Any] | None:
    """Parse model output into a dict, or None when nothing parses.

    Direct parse first; otherwise every balanced {...} region is tried in
    order and the first one that parses as an object wins.
    """
    if not isinstance(text, str) or not text.strip():
        return None
    try:
        parsed = json.loads(text)
        if isinstance(parsed, dict):
            return parsed
    except (json.JSONDecodeError, ValueError):
        pass

    search_from = 0
    while True:
        remainder = text[search_from:]
        candidate = first_balanced_object(remainder)
        if candidate is None:
            return None
        try:
            parsed = json.loads(candidate)
            if isinstance(parsed, dict):
                return parsed
        except (json.JSONDecodeError, ValueError):
            pass
        search_from += remainder.find("{") + 1
