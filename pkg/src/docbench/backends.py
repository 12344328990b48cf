"""Generation backends: an HTTP completion client and an offline retrieval baseline.

Both share a content-addressed response cache and the same completion
post-processing, so swapping one for the other changes nothing downstream.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import httpx
import numpy as np

from .prompts import STOP_MARKER, Prompt

log = logging.getLogger(__name__)

API_KEY_ENV = "DOCBENCH_API_KEY"
RETRYABLE_STATUS = {408, 409, 429, 500, 502, 503, 504}

_CODE_TOKEN = re.compile(r"\w+|[^\w\s]")
_BLANK_LINE = re.compile(r"\n[ \t\r]*\n")


class BackendError(RuntimeError):
    pass


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.2
    top_p: float = 1.0
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    max_tokens: int = 256
    stop: tuple = (STOP_MARKER,)

    def __post_init__(self):
        object.__setattr__(self, "stop", tuple(self.stop))
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must lie in (0, 1]")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    def to_json(self) -> dict:
        d = asdict(self)
        d["stop"] = list(self.stop)
        return d


@dataclass(frozen=True)
class GenerationResult:
    raw: str
    doc: str
    backend_name: str
    cached: bool
    latency: float

    @property
    def empty(self) -> bool:
        return not self.doc


def postprocess(raw: str, stops=(STOP_MARKER,)) -> str:
    text = raw
    cut = min((i for i in (text.find(s) for s in stops if s) if i >= 0), default=-1)
    if cut >= 0:
        text = text[:cut]
    m = _BLANK_LINE.search(text)
    if m:
        text = text[: m.start()]
    return " ".join(text.split())


def cache_key(backend_name: str, prompt_text: str, params: GenerationParams) -> str:
    payload = json.dumps(
        {"backend": backend_name, "prompt": prompt_text, "params": params.to_json()},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResponseCache:
    """Key -> JSON object, in memory and optionally one file per key on disk."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory else None
        self._memory: dict = {}
        self._write_lock = threading.Lock()
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / key[:2] / f"{key}.json"

    def get(self, key: str):
        hit = self._memory.get(key)
        if hit is not None or self.directory is None:
            return hit
        path = self._path(key)
        if not path.is_file():
            return None
        try:
            hit = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return None
        self._memory[key] = hit
        return hit

    def put(self, key: str, value: dict) -> None:
        with self._write_lock:
            self._memory[key] = value
            if self.directory is None:
                return
            path = self._path(key)
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(f".{os.getpid()}.{threading.get_ident()}.tmp")
            tmp.write_text(json.dumps(value, ensure_ascii=False, sort_keys=True), encoding="utf-8")
            os.replace(tmp, path)


class Backend:
    name = "backend"

    @property
    def identity(self) -> str:
        """Name plus whatever else changes the answer; part of every cache key."""
        return self.name

    def __init__(self, cache: ResponseCache | None = None):
        self.cache = cache if cache is not None else ResponseCache()
        self._key_locks: dict = {}
        self._locks_guard = threading.Lock()

    def _complete(self, prompt: Prompt, params: GenerationParams) -> str:
        raise NotImplementedError

    def _lock_for(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._key_locks.setdefault(key, threading.Lock())

    def generate(self, prompt: Prompt, params: GenerationParams | None = None) -> GenerationResult:
        params = params or GenerationParams()
        key = cache_key(self.identity, prompt.text, params)
        start = time.perf_counter()
        # one request per key even when identical prompts are in flight together
        with self._lock_for(key):
            hit = self.cache.get(key)
            cached = hit is not None
            if cached:
                raw = hit["raw"]
            else:
                raw = self._complete(prompt, params)
                self.cache.put(key, {"raw": raw, "backend": self.name})
        return GenerationResult(
            raw=raw,
            doc=postprocess(raw, params.stop),
            backend_name=self.name,
            cached=cached,
            latency=(time.perf_counter() - start) * 1000.0,
        )


def code_tokens(code: str) -> set:
    return set(_CODE_TOKEN.findall(code))


def _jaccard(a: set, b: set) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def retrieval_baseline(target, train) -> str:
    """Doc of the training record whose code-token set is most Jaccard-similar."""
    if not train:
        raise ValueError("retrieval baseline needs a non-empty training set")
    want = code_tokens(target.code)
    best = min(train, key=lambda p: (-_jaccard(want, code_tokens(p.code)), p.id))
    return best.doc


class RetrievalIndex:
    """Inverted index over training code tokens; same answers as ``retrieval_baseline``."""

    def __init__(self, train):
        if not train:
            raise ValueError("retrieval index needs a non-empty training set")
        self.records = sorted(train, key=lambda p: p.id)
        vocab: dict = {}
        postings: dict = {}
        sizes = np.empty(len(self.records), dtype=np.int64)
        for row, pair in enumerate(self.records):
            toks = code_tokens(pair.code)
            sizes[row] = len(toks)
            for tok in toks:
                postings.setdefault(vocab.setdefault(tok, len(vocab)), []).append(row)
        self.vocab = vocab
        self.sizes = sizes
        self.postings = {k: np.asarray(v, dtype=np.int64) for k, v in postings.items()}

    def best(self, code: str):
        want = code_tokens(code)
        hits = [self.postings[self.vocab[t]] for t in want if t in self.vocab]
        inter = (
            np.bincount(np.concatenate(hits), minlength=len(self.records))
            if hits
            else np.zeros(len(self.records), dtype=np.int64)
        )
        union = self.sizes + len(want) - inter
        sim = np.divide(inter, union, out=np.zeros(len(self.records)), where=union > 0)
        # argmax returns the first maximum, i.e. the smallest id
        return self.records[int(np.argmax(sim))]


class RetrievalBackend(Backend):
    name = "retrieval"

    def __init__(self, train, cache: ResponseCache | None = None):
        super().__init__(cache)
        self.index = RetrievalIndex(train)
        digest = hashlib.sha256()
        for pair in self.index.records:
            digest.update(json.dumps([pair.id, pair.code, pair.doc]).encode("utf-8"))
        self._identity = f"{self.name}:{digest.hexdigest()[:16]}"

    @property
    def identity(self) -> str:
        return self._identity

    def _complete(self, prompt: Prompt, params: GenerationParams) -> str:
        return self.index.best(prompt.target_code).doc


class TokenBucket:
    def __init__(self, rate: float, capacity: float | None = None):
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._stamp = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._stamp) * self.rate)
                self._stamp = now
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                wait = (1 - self._tokens) / self.rate
            time.sleep(wait)


class RemoteBackend(Backend):
    """POSTs to an OpenAI-style completions endpoint, reading ``choices[0].text``."""

    name = "remote"

    def __init__(
        self,
        endpoint: str,
        model: str,
        cache: ResponseCache | None = None,
        api_key: str | None = None,
        max_retries: int = 5,
        backoff: float = 1.0,
        max_backoff: float = 60.0,
        timeout: float = 60.0,
        max_in_flight: int = 4,
        rate_limit: float | None = None,
        client: httpx.Client | None = None,
        sleep=time.sleep,
    ):
        super().__init__(cache)
        key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        if not key:
            raise ConfigurationError(f"remote backend needs a credential in ${API_KEY_ENV}")
        self.endpoint = endpoint
        self.model = model
        self.max_retries = max_retries
        self.backoff = backoff
        self.max_backoff = max_backoff
        self.requests_sent = 0
        self._headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}
        self._client = client or httpx.Client(timeout=timeout)
        self._in_flight = threading.BoundedSemaphore(max(1, max_in_flight))
        self._bucket = TokenBucket(rate_limit) if rate_limit else None
        self._sleep = sleep
        self._count_lock = threading.Lock()

    @property
    def identity(self) -> str:
        return f"{self.name}:{self.model}@{self.endpoint}"

    def request_body(self, prompt: Prompt, params: GenerationParams) -> dict:
        return {
            "model": self.model,
            "prompt": prompt.text,
            "temperature": params.temperature,
            "top_p": params.top_p,
            "frequency_penalty": params.frequency_penalty,
            "presence_penalty": params.presence_penalty,
            "max_tokens": params.max_tokens,
            "stop": list(params.stop),
        }

    def _delay(self, attempt: int, response: httpx.Response | None) -> float:
        delay = min(self.max_backoff, self.backoff * 2**attempt)
        if response is not None:
            try:
                delay = max(delay, min(self.max_backoff, float(response.headers.get("retry-after", 0))))
            except ValueError:
                pass
        return delay

    def _post(self, body: dict) -> httpx.Response:
        if self._bucket:
            self._bucket.acquire()
        with self._in_flight:
            with self._count_lock:
                self.requests_sent += 1
            return self._client.post(self.endpoint, json=body, headers=self._headers)

    def _complete(self, prompt: Prompt, params: GenerationParams) -> str:
        body = self.request_body(prompt, params)
        cause: Exception | None = None
        for attempt in range(self.max_retries + 1):
            response = None
            try:
                response = self._post(body)
            except httpx.TransportError as exc:
                cause = exc
            else:
                if response.status_code == 200:
                    try:
                        return response.json()["choices"][0]["text"]
                    except (ValueError, KeyError, IndexError, TypeError) as exc:
                        raise BackendError(f"unexpected completion payload: {exc!r}") from exc
                cause = BackendError(f"HTTP {response.status_code}: {response.text[:200]}")
                if response.status_code not in RETRYABLE_STATUS:
                    raise cause
            if attempt < self.max_retries:
                delay = self._delay(attempt, response)
                log.info("retrying after %s (attempt %d, sleeping %.2fs)", cause, attempt + 1, delay)
                self._sleep(delay)
        raise BackendError(f"giving up after {self.max_retries + 1} attempts: {cause}") from cause

    def close(self) -> None:
        self._client.close()


def generate_many(backend: Backend, prompts, params: GenerationParams | None = None, workers: int = 1) -> list:
    """Results (or the raised BackendError) in prompt order."""

    def one(prompt):
        try:
            return backend.generate(prompt, params)
        except BackendError as exc:
            return exc

    if workers <= 1:
        return [one(p) for p in prompts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, prompts))
