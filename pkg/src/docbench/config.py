"""Run configuration: one flat JSON document, overridden by command-line flags."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .backends import GenerationParams
from .corpus import LANGUAGES, SampleSpec, required_sample_size
from .prompts import STOP_MARKER

DEFAULT_SAMPLES = 1000
MAX_SHOTS = 8

# key -> help text; defaults come from RunConfig
KEY_HELP = {
    "corpus": "corpus root, one directory per language holding train/valid/test .jsonl files",
    "languages": "languages to process (comma-separated on the command line)",
    "split": "split evaluated by sample/run",
    "shots": f"exemplars per prompt, 0..{MAX_SHOTS}",
    "samples": f"records sampled per language; unset means confidence/margin if given, else {DEFAULT_SAMPLES}",
    "confidence": "confidence level for the derived sample size",
    "margin": "error margin for the derived sample size",
    "seed": "base seed; per-language seeds are derived from it",
    "backend": "generation backend: retrieval (offline) or remote",
    "endpoint": "completions endpoint URL for the remote backend",
    "model": "model name sent to the remote endpoint",
    "temperature": "sampling temperature",
    "top_p": "nucleus sampling mass",
    "frequency_penalty": "frequency penalty",
    "presence_penalty": "presence penalty",
    "max_tokens": "completion token cap",
    "stop": "stop strings",
    "out": "output directory",
    "cache": "response cache directory (unset keeps the cache in memory)",
    "workers": "parallel workers for cleaning and generation",
    "max_retries": "retries after a failed remote request",
    "backoff": "initial retry delay in seconds, doubled per attempt",
    "timeout": "remote request timeout in seconds",
    "max_in_flight": "concurrent remote requests",
    "rate_limit": "remote requests per second (unset means unlimited)",
    "validator": "external parse-check command; code on stdin, exit 0 means parsable",
}

# destinations and execution knobs that never change results
_NOT_REPLAYED = ("out", "cache", "workers")


@dataclass
class RunConfig:
    corpus: str = "corpus"
    languages: list = field(default_factory=lambda: list(LANGUAGES))
    split: str = "test"
    shots: int = 1
    samples: int | None = None
    confidence: float | None = None
    margin: float | None = None
    seed: int = 42
    backend: str = "retrieval"
    endpoint: str = "https://api.openai.com/v1/completions"
    model: str = "code-davinci-002"
    temperature: float = 0.2
    top_p: float = 1.0
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    max_tokens: int = 256
    stop: list = field(default_factory=lambda: [STOP_MARKER])
    out: str = "runs/latest"
    cache: str | None = None
    workers: int = 1
    max_retries: int = 5
    backoff: float = 1.0
    timeout: float = 60.0
    max_in_flight: int = 4
    rate_limit: float | None = None
    validator: str | None = None

    def __post_init__(self):
        if isinstance(self.languages, str):
            self.languages = [s for s in self.languages.replace(" ", "").split(",") if s]
        self.languages = [str(s).lower() for s in self.languages]
        bad = [s for s in self.languages if s not in LANGUAGES]
        if bad or not self.languages:
            raise ValueError(f"languages must be a non-empty subset of {LANGUAGES}, got {self.languages}")
        if not 0 <= int(self.shots) <= MAX_SHOTS:
            raise ValueError(f"shots must lie in 0..{MAX_SHOTS}")
        if self.backend not in ("retrieval", "remote"):
            raise ValueError(f"backend must be retrieval or remote, got {self.backend!r}")
        if self.samples is not None and int(self.samples) < 1:
            raise ValueError("samples must be positive")
        if (self.confidence is None) != (self.margin is None):
            raise ValueError("confidence and margin go together")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")
        if isinstance(self.stop, str):
            self.stop = [self.stop]

    @classmethod
    def keys(cls) -> list:
        return [f.name for f in fields(cls)]

    @classmethod
    def defaults(cls) -> dict:
        return cls().to_json(full=True)

    @classmethod
    def from_sources(cls, file_values: dict | None = None, overrides: dict | None = None) -> "RunConfig":
        merged: dict = {}
        for source in (file_values or {}, overrides or {}):
            for key, value in source.items():
                if key not in KEY_HELP:
                    raise ValueError(f"unknown config key: {key}")
                if value is not None:
                    merged[key] = value
        return cls(**merged)

    def params(self) -> GenerationParams:
        return GenerationParams(
            temperature=float(self.temperature),
            top_p=float(self.top_p),
            frequency_penalty=float(self.frequency_penalty),
            presence_penalty=float(self.presence_penalty),
            max_tokens=int(self.max_tokens),
            stop=tuple(self.stop),
        )

    def sample_size(self, population: int) -> int:
        if self.samples is not None:
            return min(int(self.samples), population)
        if self.confidence is not None:
            return required_sample_size(SampleSpec(population, self.confidence, self.margin, self.seed))
        return min(DEFAULT_SAMPLES, population)

    def to_json(self, full: bool = False) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        if not full:
            for key in _NOT_REPLAYED:
                d.pop(key)
        return d


def read_config_file(path) -> dict:
    """Flat key/value JSON. A run manifest is accepted too and replays its config."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError(f"config {path} must be a JSON object")
    if "artifact_version" in doc and isinstance(doc.get("config"), dict):
        doc = doc["config"]
    return doc
