"""Model completion backends.

The protocol is one call: ``complete(prompt, model=..., response_mode=...)``
returning raw text. Prompts are either a plain string or a sequence of
parts, where a part is a string or an image-bearing object with an
``image`` bytes attribute (screenshots). ``response_mode`` is advisory:
in ``json`` mode the caller, not the backend, parses the output.

Two deterministic fixture backends exist: a scripted one that replays an
ordered list of turns, and a fingerprint-keyed one that maps a stable
hash of the prompt to a canned response. Both record every call so tests
can assert on the exact prompts a component rendered.
"""

from __future__ import annotations

import base64
import hashlib
import os
from dataclasses import dataclass, field
from typing import Any, Protocol

from ..errors import BackendUnavailable, ScriptExhausted

RESPONSE_MODES = ("free_text", "json")


def prompt_text(prompt: object) -> str:
    """The text portion of a prompt, image parts elided."""
    if isinstance(prompt, str):
        return prompt
    pieces = []
    for part in prompt:
        if isinstance(part, str):
            pieces.append(part)
        else:
            pieces.append("[image]")
    return "\n".join(pieces)


def prompt_fingerprint(prompt: object) -> str:
    """Stable 16-hex-digit hash of a prompt, images included.

    Fixture authors key canned responses on this value; the same prompt
    always fingerprints the same way across runs and processes.
    """
    digest = hashlib.sha256()
    if isinstance(prompt, str):
        digest.update(b"text\x00" + prompt.encode("utf-8"))
    else:
        for part in prompt:
            if isinstance(part, str):
                digest.update(b"text\x00" + part.encode("utf-8") + b"\x00")
            else:
                image = getattr(part, "image")
                digest.update(b"image\x00" + hashlib.sha256(image).digest())
    return digest.hexdigest()[:16]


@dataclass(frozen=True)
class RecordedCall:
    """One model invocation as seen by a fixture backend."""

    model: str
    prompt: Any
    response_mode: str

    @property
    def text(self) -> str:
        return prompt_text(self.prompt)


class ModelBackend(Protocol):
    def complete(
        self, prompt: object, *, model: str = "default", response_mode: str = "free_text"
    ) -> str: ...


@dataclass
class ScriptedModelBackend:
    """Replays an ordered script of canned responses.

    Raises ScriptExhausted once the script runs out, which a run surfaces
    as a fatal backend error. ``calls`` records every invocation in order.
    """

    turns: list[str] = field(default_factory=list)
    calls: list[RecordedCall] = field(default_factory=list)
    _cursor: int = 0

    def complete(
        self, prompt: object, *, model: str = "default", response_mode: str = "free_text"
    ) -> str:
        self.calls.append(RecordedCall(model, prompt, response_mode))
        if self._cursor >= len(self.turns):
            raise ScriptExhausted(
                f"scripted model backend exhausted after {len(self.turns)} turns"
            )
        turn = self.turns[self._cursor]
        self._cursor += 1
        return turn

    @property
    def remaining(self) -> int:
        return len(self.turns) - self._cursor


@dataclass
class FingerprintModelBackend:
    """Maps prompt fingerprints to canned responses.

    Unlike the scripted backend this one is order-independent, so it can
    be shared across concurrently evaluated examples.
    """

    responses: dict[str, str] = field(default_factory=dict)
    calls: list[RecordedCall] = field(default_factory=list)

    def complete(
        self, prompt: object, *, model: str = "default", response_mode: str = "free_text"
    ) -> str:
        self.calls.append(RecordedCall(model, prompt, response_mode))
        fingerprint = prompt_fingerprint(prompt)
        if fingerprint not in self.responses:
            raise BackendUnavailable(
                f"no canned response for prompt fingerprint {fingerprint}"
            )
        return self.responses[fingerprint]


class LiveModelBackend:
    """Chat-completions client over HTTP; credentials come from the
    environment (MODEL_API_KEY, optional MODEL_API_BASE)."""

    def __init__(self, api_key: str, api_base: str = "https://api.openai.com/v1") -> None:
        self.api_key = api_key
        self.api_base = api_base.rstrip("/")

    @classmethod
    def from_env(cls) -> "LiveModelBackend":
        api_key = os.environ.get("MODEL_API_KEY", "")
        if not api_key:
            raise BackendUnavailable("MODEL_API_KEY is not set; live model mode needs it")
        api_base = os.environ.get("MODEL_API_BASE", "https://api.openai.com/v1")
        return cls(api_key=api_key, api_base=api_base)

    def complete(
        self, prompt: object, *, model: str = "default", response_mode: str = "free_text"
    ) -> str:
        import requests

        if isinstance(prompt, str):
            content: Any = prompt
        else:
            content = []
            for part in prompt:
                if isinstance(part, str):
                    content.append({"type": "text", "text": part})
                else:
                    encoded = base64.b64encode(getattr(part, "image")).decode("ascii")
                    content.append(
                        {
                            "type": "image_url",
                            "image_url": {"url": f"data:image/png;base64,{encoded}"},
                        }
                    )
        body: dict[str, Any] = {
            "model": model,
            "messages": [{"role": "user", "content": content}],
        }
        if response_mode == "json":
            body["response_format"] = {"type": "json_object"}
        try:
            response = requests.post(
                f"{self.api_base}/chat/completions",
                json=body,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=120,
            )
            response.raise_for_status()
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        except Exception as exc:
            raise BackendUnavailable(f"live model call failed: {exc}") from exc
