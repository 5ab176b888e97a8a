"""Uniform access to a text-completion backend.

Three backends share one contract (a :class:`GenerationRequest` in, response
text out): a configurable HTTP adapter for live models, a scripted backend
serving a canned queue, and a record/replay backend keyed on a content hash
of the request, which makes every pipeline testable offline and
deterministic.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

from .errors import BackendError, BudgetExceededError, ReplayMissError

ROLE_LABELS = {"system": "SYSTEM INSTRUCTIONS:", "user": "USER:", "assistant": "ASSISTANT:"}


@dataclass(frozen=True)
class ChatPrompt:
    """System text plus alternating user/assistant turns.

    Turns must alternate starting with a user turn.  The final turn is either
    a user turn or an empty assistant turn acting as a completion cue.
    """

    system: str
    turns: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        expected = "user"
        for i, (role, _text) in enumerate(self.turns):
            if role not in ("user", "assistant"):
                raise ValueError(f"unknown role {role!r}")
            if role != expected:
                raise ValueError(f"turn {i} must have role {expected!r}, got {role!r}")
            expected = "assistant" if expected == "user" else "user"
        if self.turns and self.turns[-1][0] == "assistant" and self.turns[-1][1]:
            raise ValueError("a trailing assistant turn must be an empty cue")

    def serialize(self) -> str:
        """Flatten the prompt to one labeled block of text.

        Backends without role structure receive exactly this block; it is
        also the canonical byte representation used for fixture hashing.
        """
        sections = [f"{ROLE_LABELS['system']}\n{self.system}"]
        for role, text in self.turns:
            label = ROLE_LABELS[role]
            sections.append(f"{label}\n{text}" if text else label)
        return "\n\n".join(sections)

    def messages(self) -> list[dict[str, str]]:
        """Role/content pairs for chat-shaped HTTP APIs."""
        msgs = [{"role": "system", "content": self.system}]
        for role, text in self.turns:
            if role == "assistant" and not text and (role, text) == self.turns[-1]:
                continue  # the empty cue is implicit in chat APIs
            msgs.append({"role": role, "content": text})
        return msgs


def user_prompt(system: str, user_text: str) -> ChatPrompt:
    """A one-shot prompt ending with an empty assistant cue."""
    return ChatPrompt(system=system, turns=(("user", user_text), ("assistant", "")))


@dataclass(frozen=True)
class GenerationRequest:
    prompt: ChatPrompt
    temperature: float = 0.0  # 0 requests deterministic greedy decoding
    max_output: int | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")


def request_key(backend_id: str, model_id: str, request: GenerationRequest) -> str:
    """Content hash identifying a request for record/replay.

    Keyed on backend id, model id, temperature, and the canonical prompt
    serialization, so recordings made against different models never collide.
    """
    payload = "\x00".join(
        [backend_id, model_id, repr(request.temperature), request.prompt.serialize()]
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class Backend(Protocol):
    backend_id: str
    model_id: str

    def complete(self, request: GenerationRequest) -> str: ...


def complete(request: GenerationRequest, backend: Backend) -> str:
    """Run one completion and enforce the request's output budget."""
    text = backend.complete(request)
    if request.max_output is not None and len(text) > request.max_output:
        raise BudgetExceededError(
            f"response length {len(text)} exceeds budget {request.max_output}"
        )
    return text


class ScriptedBackend:
    """Serves a fixed queue of responses, in order.  Thread-safe."""

    backend_id = "scripted"

    def __init__(self, responses, model_id: str = "scripted"):
        self.model_id = model_id
        self._queue = list(responses)
        self._lock = threading.Lock()

    def complete(self, request: GenerationRequest) -> str:
        with self._lock:
            if not self._queue:
                raise BackendError("scripted backend queue is exhausted")
            return self._queue.pop(0)


class CallableBackend:
    """Maps each request to a response via a function of the flat prompt.

    Unlike :class:`ScriptedBackend`, responses do not depend on call order,
    which keeps concurrent fan-out deterministic.
    """

    backend_id = "callable"

    def __init__(self, fn: Callable[[str], str], model_id: str = "callable"):
        self.model_id = model_id
        self._fn = fn

    def complete(self, request: GenerationRequest) -> str:
        return self._fn(request.prompt.serialize())


class FixtureStore:
    """A directory of recorded responses: one file per request hash plus an
    index file with the metadata behind each hash.

    Reads are lock-free once loaded; writes are serialized.
    """

    INDEX_NAME = "index.json"
    VERSION = 1

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()
        self._entries: dict[str, dict] = {}
        index = self.root / self.INDEX_NAME
        if index.exists():
            data = json.loads(index.read_text(encoding="utf-8"))
            if data.get("version") != self.VERSION:
                raise BackendError(
                    f"fixture index version {data.get('version')!r} unsupported"
                )
            self._entries = dict(data.get("entries", {}))

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def keys(self):
        return sorted(self._entries)

    def get(self, key: str) -> str:
        if key not in self._entries:
            raise ReplayMissError(key)
        return (self.root / f"{key}.txt").read_text(encoding="utf-8")

    def put(self, key: str, response: str, meta: dict | None = None) -> None:
        with self._lock:
            self.root.mkdir(parents=True, exist_ok=True)
            (self.root / f"{key}.txt").write_text(response, encoding="utf-8")
            self._entries[key] = dict(meta or {})
            index = {"version": self.VERSION, "entries": self._entries}
            (self.root / self.INDEX_NAME).write_text(
                json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )


class ReplayBackend:
    """Replays recorded responses by request hash.

    In strict mode (no inner backend) an unseen request raises
    :class:`ReplayMissError`.  With ``record_from`` set, misses are forwarded
    to the inner backend and the response is recorded.  The backend presents
    the identity being replayed (``backend_id``/``model_id``), not its own,
    so keys match between recording and replay.
    """

    def __init__(
        self,
        store: FixtureStore,
        backend_id: str = "http",
        model_id: str = "default",
        record_from: Backend | None = None,
    ):
        self.store = store
        self.backend_id = backend_id
        self.model_id = model_id
        self.record_from = record_from

    def key_for(self, request: GenerationRequest) -> str:
        return request_key(self.backend_id, self.model_id, request)

    def complete(self, request: GenerationRequest) -> str:
        key = self.key_for(request)
        if key in self.store:
            return self.store.get(key)
        if self.record_from is None:
            raise ReplayMissError(key)
        response = self.record_from.complete(request)
        self.store.put(
            key,
            response,
            meta={
                "backend": self.backend_id,
                "model": self.model_id,
                "temperature": request.temperature,
            },
        )
        return response


@dataclass
class HttpBackendConfig:
    """Shape of one HTTP completion API; nothing here is hardcoded.

    ``request_template`` is a JSON-shaped template whose string values may
    contain the placeholders ``{model}``, ``{prompt}``, ``{temperature}``,
    ``{max_output}``, and ``{messages}``.  A value that is exactly one
    placeholder is substituted with the typed value (float, int, or message
    list); otherwise placeholders are substituted as text.
    ``response_path`` walks the response JSON to the completion text.
    """

    url: str
    model_id: str
    request_template: dict
    response_path: list
    headers: dict = field(default_factory=dict)
    mode: str = "flat"  # "flat" sends one labeled block; "chat" sends messages


class HttpBackend:
    backend_id = "http"

    def __init__(self, config: HttpBackendConfig, post: Callable | None = None):
        self.config = config
        self.model_id = config.model_id
        if post is None:
            import requests

            def post(url, json=None, headers=None, timeout=None):
                return requests.post(url, json=json, headers=headers, timeout=timeout)

        self._post = post

    def build_payload(self, request: GenerationRequest):
        values = {
            "model": self.config.model_id,
            "prompt": request.prompt.serialize(),
            "temperature": request.temperature,
            "max_output": request.max_output,
            "messages": request.prompt.messages() if self.config.mode == "chat" else None,
        }
        return _fill_template(self.config.request_template, values)

    def complete(self, request: GenerationRequest) -> str:
        payload = self.build_payload(request)
        try:
            response = self._post(
                self.config.url, json=payload, headers=self.config.headers, timeout=120
            )
        except Exception as exc:  # transport failure
            raise BackendError(f"request failed: {exc}") from exc
        status = getattr(response, "status_code", 200)
        if status >= 400:
            raise BackendError(f"backend returned HTTP {status}")
        body = response.json()
        try:
            return _walk(body, self.config.response_path)
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(
                f"response JSON missing path {self.config.response_path}"
            ) from exc


def _fill_template(node, values):
    if isinstance(node, dict):
        return {k: _fill_template(v, values) for k, v in node.items()}
    if isinstance(node, list):
        return [_fill_template(v, values) for v in node]
    if isinstance(node, str):
        bare = node[1:-1]
        if node.startswith("{") and node.endswith("}") and bare in values:
            return values[bare]
        out = node
        for name, value in values.items():
            if value is not None and not isinstance(value, list):
                out = out.replace("{" + name + "}", str(value))
        return out
    return node


def _walk(body, path):
    for step in path:
        body = body[step]
    if not isinstance(body, str):
        raise TypeError(f"expected text at response path, got {type(body).__name__}")
    return body
