"""Proxy to an OpenAI-compatible chat completions endpoint.

The service forwards fully built template text and returns the model's reply
verbatim; parsing (e.g. extracting the judge score) is the client's job, so
the rules live in exactly one place.
"""

from __future__ import annotations

import requests

from .config import LlmConfig


class LlmUnavailableError(Exception):
    pass


class LlmProxy:
    def __init__(self, config: LlmConfig):
        self.config = config
        self._session = requests.Session()

    def complete(self, text: str) -> str:
        if not self.config.base_url:
            raise LlmUnavailableError("no LLM endpoint configured")
        headers = {}
        key = self.config.api_key()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            reply = self._session.post(
                f"{self.config.base_url.rstrip('/')}/v1/chat/completions",
                json={
                    "model": self.config.model,
                    "messages": [{"role": "user", "content": text}],
                    "temperature": self.config.temperature,
                },
                headers=headers,
                timeout=self.config.timeout,
            )
        except requests.RequestException as err:
            raise LlmUnavailableError(f"LLM endpoint unreachable: {err}") from err
        if reply.status_code != 200:
            raise LlmUnavailableError(
                f"LLM endpoint returned HTTP {reply.status_code}: {reply.text[:200]}"
            )
        try:
            return reply.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as err:
            raise LlmUnavailableError(f"malformed LLM reply: {err}") from err
