"""Model-service clients for the extraction pipeline.

Two implementations of the same small interface:

* :class:`HttpModelClient` speaks an OpenAI-style chat-completions HTTP
  API, with temperature pinned to 0 and bounded retries;
* :class:`ScriptedClient` replays canned responses keyed by a hash of
  the request, which makes whole pipeline runs reproducible offline.

:func:`request_key` is the shared keying scheme: tests and transcript
files compute the same keys the clients do.
"""

from __future__ import annotations

import abc
import base64
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import httpx

from .errors import DataError, UpstreamError, UsageError


def request_key(prompt: str, image: bytes | None = None) -> str:
    """Stable 16-hex-digit key for one model request.

    The image enters through its own digest, so keys stay cheap to
    compute for large payloads and identical prompts with different
    images get different keys.
    """
    digest = hashlib.sha256(prompt.encode("utf-8"))
    if image is not None:
        digest.update(b"\x00image:")
        digest.update(hashlib.sha256(image).digest())
    return digest.hexdigest()[:16]


class ModelClient(abc.ABC):
    """Completion service: plain text in, plain text out."""

    identity: str = "unknown"

    @abc.abstractmethod
    def complete_text(self, prompt: str) -> str:
        raise NotImplementedError

    @abc.abstractmethod
    def complete_multimodal(self, prompt: str, image: bytes) -> str:
        raise NotImplementedError


class ScriptedClient(ModelClient):
    """Replays canned responses keyed by :func:`request_key`.

    A key may map to one response text (served every time) or to a list
    consumed front to back, for scripts where the same request must get
    different answers.  An unknown key or an exhausted list raises
    :class:`UpstreamError` naming the key, so a stale transcript fails
    loudly instead of silently degrading a run.
    """

    def __init__(self, responses: Mapping[str, Any], identity: str = "scripted"):
        self.identity = identity
        self._static: dict[str, str] = {}
        self._queues: dict[str, list[str]] = {}
        for key, value in responses.items():
            if isinstance(value, str):
                self._static[key] = value
            elif isinstance(value, Sequence) and all(isinstance(v, str) for v in value):
                self._queues[key] = list(value)
            else:
                raise DataError(f"transcript entry {key!r} must be text or a list of texts")
        self.requests_served = 0

    def _serve(self, key: str, kind: str) -> str:
        if key in self._static:
            self.requests_served += 1
            return self._static[key]
        queue = self._queues.get(key)
        if queue:
            self.requests_served += 1
            return queue.pop(0)
        if queue is not None:
            raise UpstreamError(f"scripted responses for {kind} request {key} exhausted")
        raise UpstreamError(f"no scripted response for {kind} request {key}")

    def complete_text(self, prompt: str) -> str:
        return self._serve(request_key(prompt), "text")

    def complete_multimodal(self, prompt: str, image: bytes) -> str:
        return self._serve(request_key(prompt, image), "multimodal")


def load_transcript(path: Path) -> ScriptedClient:
    """Load a transcript file: {"identity": ..., "responses": {key: text | [texts]}}."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"transcript file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed transcript: {exc.msg}") from None
    if not isinstance(payload, dict) or not isinstance(payload.get("responses"), dict):
        raise DataError(f"{path}: transcript must be an object with a 'responses' map")
    identity = payload.get("identity", "scripted")
    if not isinstance(identity, str):
        raise DataError(f"{path}: transcript identity must be text")
    try:
        return ScriptedClient(payload["responses"], identity)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# HTTP client
# ---------------------------------------------------------------------------

_MAGIC_MEDIA_TYPES = (
    (b"\x89PNG\r\n\x1a\n", "image/png"),
    (b"\xff\xd8\xff", "image/jpeg"),
    (b"GIF87a", "image/gif"),
    (b"GIF89a", "image/gif"),
    (b"BM", "image/bmp"),
)


def detect_media_type(image: bytes) -> str:
    for magic, media_type in _MAGIC_MEDIA_TYPES:
        if image.startswith(magic):
            return media_type
    if image[:4] == b"RIFF" and image[8:12] == b"WEBP":
        return "image/webp"
    return "image/png"


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_seconds: float = 1.0
    multiplier: float = 2.0


class HttpModelClient(ModelClient):
    """OpenAI-style chat-completions client.

    Requests are built deterministically: temperature 0, one user
    message, images inlined as base64 data URLs.  Transport failures,
    429s, and 5xx responses are retried with exponential backoff up to
    the policy's attempt limit; other HTTP errors fail immediately.
    All failures surface as :class:`UpstreamError`.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str,
        *,
        identity: str | None = None,
        timeout: float = 120.0,
        retry: RetryPolicy = RetryPolicy(),
        transport: httpx.BaseTransport | None = None,
        sleep=time.sleep,
    ):
        self.identity = identity or model
        self._model = model
        self._retry = retry
        self._sleep = sleep
        self._client = httpx.Client(
            base_url=base_url,
            timeout=timeout,
            headers={"Authorization": f"Bearer {api_key}"},
            transport=transport,
        )

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "HttpModelClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def complete_text(self, prompt: str) -> str:
        return self._post(self._body(prompt))

    def complete_multimodal(self, prompt: str, image: bytes) -> str:
        content = [
            {"type": "text", "text": prompt},
            {
                "type": "image_url",
                "image_url": {
                    "url": "data:%s;base64,%s"
                    % (detect_media_type(image), base64.b64encode(image).decode("ascii"))
                },
            },
        ]
        return self._post(self._body(content))

    def _body(self, content) -> dict:
        return {
            "model": self._model,
            "messages": [{"role": "user", "content": content}],
            "temperature": 0,
        }

    def _post(self, body: dict) -> str:
        delay = self._retry.backoff_seconds
        last_error = "no attempt made"
        for attempt in range(1, self._retry.max_attempts + 1):
            try:
                response = self._client.post("/chat/completions", json=body)
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
            else:
                if response.status_code == 200:
                    return self._extract_content(response)
                last_error = f"HTTP {response.status_code}: {response.text[:200]}"
                if response.status_code != 429 and response.status_code < 500:
                    raise UpstreamError(f"{self.identity}: {last_error}")
            if attempt < self._retry.max_attempts:
                self._sleep(delay)
                delay *= self._retry.multiplier
        raise UpstreamError(
            f"{self.identity}: giving up after {self._retry.max_attempts} attempts; {last_error}"
        )

    def _extract_content(self, response: httpx.Response) -> str:
        try:
            payload = response.json()
        except json.JSONDecodeError:
            raise UpstreamError(f"{self.identity}: non-JSON response body") from None
        try:
            content = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise UpstreamError(
                f"{self.identity}: response missing choices[0].message.content"
            ) from None
        if not isinstance(content, str):
            raise UpstreamError(f"{self.identity}: message content is not text")
        return content


def load_clients_config(path: Path) -> dict[str, HttpModelClient]:
    """Build HTTP clients from a config file, one per pipeline role.

    The file maps role names ("text", "vision", "chart") to objects with
    base_url, model, api_key_env and optional timeout / max_attempts /
    backoff_seconds.  A named environment variable that is missing or
    empty is a usage error raised before any request goes out.
    """
    import os

    path = Path(path)
    if not path.is_file():
        raise DataError(f"clients config not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed clients config: {exc.msg}") from None
    if not isinstance(payload, dict):
        raise DataError(f"{path}: clients config must be an object keyed by role")
    clients: dict[str, HttpModelClient] = {}
    for role, raw in payload.items():
        if role not in ("text", "vision", "chart"):
            raise DataError(f"{path}: unknown client role {role!r}")
        if not isinstance(raw, dict):
            raise DataError(f"{path}: role {role!r} must map to an object")
        try:
            base_url = raw["base_url"]
            model = raw["model"]
            key_env = raw["api_key_env"]
        except KeyError as exc:
            raise DataError(f"{path}: role {role!r} is missing {exc.args[0]!r}") from None
        api_key = os.environ.get(key_env, "")
        if not api_key:
            raise UsageError(
                f"environment variable {key_env} (api key for {role!r} client) is not set"
            )
        retry = RetryPolicy(
            max_attempts=int(raw.get("max_attempts", 3)),
            backoff_seconds=float(raw.get("backoff_seconds", 1.0)),
        )
        clients[role] = HttpModelClient(
            base_url,
            model,
            api_key,
            identity=raw.get("identity", model),
            timeout=float(raw.get("timeout", 120.0)),
            retry=retry,
        )
    if "text" not in clients:
        raise DataError(f"{path}: clients config must define a 'text' client")
    return clients
