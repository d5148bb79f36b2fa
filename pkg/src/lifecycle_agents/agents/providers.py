"""HTTP chat-completion adapters with retries and per-provider parallelism limits."""

from __future__ import annotations

import logging
import os
import random
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import httpx
import yaml

from ..errors import ConfigError, ProviderAuthError, ProviderError, RateLimitError

logger = logging.getLogger(__name__)

RETRY_STATUSES = frozenset({408, 409, 429, 500, 502, 503, 504, 529})
SHAPES = ("openai_chat", "anthropic_messages")


@dataclass(frozen=True)
class ProviderConfig:
    name: str
    endpoint: str
    api_key_env: str
    shape: str = "openai_chat"
    auth_header: str = "Authorization"
    auth_prefix: str = "Bearer "
    temperature_range: tuple[float, float] = (0.0, 2.0)
    max_parallel: int = 4
    max_tokens: int | None = None
    extra_headers: dict[str, str] = field(default_factory=dict)
    timeout_s: float = 120.0
    max_retries: int = 5
    backoff_base_s: float = 1.0
    backoff_max_s: float = 60.0

    def __post_init__(self) -> None:
        if self.shape not in SHAPES:
            raise ConfigError(f"provider {self.name}: unknown request shape {self.shape!r}")
        object.__setattr__(self, "temperature_range", tuple(self.temperature_range))

    def api_key(self) -> str:
        key = os.environ.get(self.api_key_env)
        if not key:
            raise ProviderAuthError(
                f"missing credentials: set {self.api_key_env} for provider {self.name}",
                provider=self.name)
        return key


def load_providers(path: str | Path | None = None) -> dict[str, ProviderConfig]:
    if path is None:
        text = (resources.files("lifecycle_agents") / "data" / "providers.yaml").read_text()
    else:
        text = Path(path).read_text()
    raw = yaml.safe_load(text) or {}
    try:
        return {name: ProviderConfig(name=name, **cfg) for name, cfg in raw.get("providers", {}).items()}
    except TypeError as exc:
        raise ConfigError(f"bad provider config: {exc}") from exc


def build_request(cfg: ProviderConfig, model: str, prompt: str, temperature: float) -> dict:
    body: dict = {
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": temperature,
    }
    if cfg.shape == "anthropic_messages":
        body["max_tokens"] = cfg.max_tokens or 4096
    elif cfg.max_tokens:
        body["max_tokens"] = cfg.max_tokens
    return body


def extract_text(cfg: ProviderConfig, payload: dict) -> str:
    try:
        if cfg.shape == "anthropic_messages":
            return "".join(b.get("text", "") for b in payload["content"] if b.get("type") == "text")
        return payload["choices"][0]["message"]["content"] or ""
    except (KeyError, IndexError, TypeError) as exc:
        raise ProviderError(f"{cfg.name}: unexpected response payload", provider=cfg.name) from exc


class LiveClient:
    """Sends single-turn prompts; each call is a fresh conversation.

    Transient failures (429, 5xx, transport errors) are retried with
    exponential backoff and jitter, honouring ``Retry-After``. Auth failures
    are raised immediately.
    """

    def __init__(self, providers: dict[str, ProviderConfig] | None = None,
                 http: httpx.Client | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.providers = providers if providers is not None else load_providers()
        self._http = http or httpx.Client()
        self._sleep = sleep
        self._limits = {name: threading.BoundedSemaphore(cfg.max_parallel)
                        for name, cfg in self.providers.items()}

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def provider(self, name: str) -> ProviderConfig:
        try:
            return self.providers[name]
        except KeyError:
            raise ConfigError(f"unknown provider {name!r}") from None

    def _backoff(self, cfg: ProviderConfig, attempt: int, response: httpx.Response | None) -> float:
        if response is not None:
            retry_after = response.headers.get("retry-after")
            if retry_after:
                try:
                    return min(float(retry_after), cfg.backoff_max_s)
                except ValueError:
                    pass
        delay = min(cfg.backoff_base_s * 2 ** attempt, cfg.backoff_max_s)
        return delay * (0.5 + random.random() / 2)

    def complete(self, provider: str, model: str, prompt: str, temperature: float) -> tuple[str, dict]:
        cfg = self.provider(provider)
        lo, hi = cfg.temperature_range
        if not lo <= temperature <= hi:
            raise ConfigError(f"temperature {temperature} outside {cfg.name} range {cfg.temperature_range}")
        headers = {cfg.auth_header: f"{cfg.auth_prefix}{cfg.api_key()}", **cfg.extra_headers}
        body = build_request(cfg, model, prompt, temperature)
        last_status = None
        with self._limits[provider]:
            for attempt in range(cfg.max_retries + 1):
                start = time.monotonic()
                response = None
                try:
                    response = self._http.post(cfg.endpoint, json=body, headers=headers, timeout=cfg.timeout_s)
                except httpx.TransportError as exc:
                    logger.warning("%s transport error on attempt %d: %s", provider, attempt + 1, exc)
                else:
                    last_status = response.status_code
                    if response.status_code in (401, 403):
                        raise ProviderAuthError(
                            f"{provider}: authentication failed ({response.status_code})",
                            provider=provider, attempts=attempt + 1, status_code=response.status_code)
                    if response.is_success:
                        meta = {
                            "provider": provider,
                            "model": model,
                            "temperature": temperature,
                            "latency_s": round(time.monotonic() - start, 3),
                            "attempts": attempt + 1,
                            "max_tokens": body.get("max_tokens"),
                            "system_prompt": None,
                        }
                        return extract_text(cfg, response.json()), meta
                    if response.status_code not in RETRY_STATUSES:
                        raise ProviderError(
                            f"{provider}: HTTP {response.status_code}: {response.text[:200]}",
                            provider=provider, attempts=attempt + 1, status_code=response.status_code)
                if attempt < cfg.max_retries:
                    self._sleep(self._backoff(cfg, attempt, response))
        cls = RateLimitError if last_status == 429 else ProviderError
        raise cls(f"{provider}: giving up after {cfg.max_retries + 1} attempts",
                  provider=provider, attempts=cfg.max_retries + 1, status_code=last_status)
