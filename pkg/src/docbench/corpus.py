"""CodeSearchNet-style corpus loading, cleaning, sample sizing and seeded sampling."""

from __future__ import annotations

import gzip
import json
import logging
import math
import random
import re
import shlex
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import NormalDist

from .lexers import LanguageId, check_structure, strip_comments
from .metrics import tokenize_text

log = logging.getLogger(__name__)

LANGUAGES = tuple(lang.value for lang in LanguageId)
SPLITS = ("train", "valid", "test")
REASONS = ("ok", "unparsable_code", "doc_too_short", "doc_too_long", "special_token", "non_english")
MIN_DOC_TOKENS = 3
MAX_DOC_TOKENS = 256
ENGLISH_THRESHOLD = 0.90
RNG_NAME = "mt19937-fisher-yates"

_SPECIAL_SUBSTRINGS = ("<img", "http://", "https://")
_TAG = re.compile(r"</?[A-Za-z]+>")
_KNOWN_FIELDS = {"id", "language", "code", "docstring", "docstring_tokens"}


@dataclass
class CodeDocPair:
    id: str
    language: str
    code: str
    doc: str
    doc_tokens: list | None = None
    split: str = "test"
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        record = dict(self.extra)
        record.update(id=self.id, language=self.language, code=self.code, docstring=self.doc)
        if self.doc_tokens is not None:
            record["docstring_tokens"] = list(self.doc_tokens)
        return record


@dataclass(frozen=True)
class FilterVerdict:
    accepted: bool
    reason: str


@dataclass(frozen=True)
class SampleSpec:
    population: int
    confidence: float = 0.95
    margin: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.confidence < 1:
            raise ValueError(f"confidence must lie in (0, 1), got {self.confidence}")
        if not 0 < self.margin < 1:
            raise ValueError(f"margin must lie in (0, 1), got {self.margin}")
        if self.population < 1:
            raise ValueError(f"population must be positive, got {self.population}")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


class LoadedCorpus(list):
    """Records in file order; ``skipped`` counts lines that could not be used."""

    skipped: int = 0


def _open_text(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def _pair_from_json(obj, split: str, lineno: int) -> CodeDocPair | None:
    if not isinstance(obj, dict):
        return None
    language, code, doc = obj.get("language"), obj.get("code"), obj.get("docstring")
    if not all(isinstance(v, str) for v in (language, code, doc)):
        return None
    try:
        language = LanguageId.parse(language).value
    except ValueError:
        return None
    tokens = obj.get("docstring_tokens")
    if tokens is not None and not (isinstance(tokens, list) and all(isinstance(t, str) for t in tokens)):
        tokens = None
    rid = obj.get("id")
    if not isinstance(rid, str) or not rid:
        rid = f"{language}-{split}-{lineno:07d}"
    extra = {k: v for k, v in obj.items() if k not in _KNOWN_FIELDS}
    return CodeDocPair(rid, language, code, doc, tokens, split, extra)


def load_corpus(path, split: str) -> LoadedCorpus:
    path = Path(path)
    pairs = LoadedCorpus()
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                log.warning("%s:%d: malformed JSON skipped (%s)", path, lineno, exc.msg)
                pairs.skipped += 1
                continue
            pair = _pair_from_json(obj, split, lineno)
            if pair is None:
                log.warning("%s:%d: record lacks required fields, skipped", path, lineno)
                pairs.skipped += 1
                continue
            pairs.append(pair)
    return pairs


def split_files(root, language: str, split: str) -> list:
    """Files for one language/split under either the flat or the raw CodeSearchNet layout."""
    base = Path(root) / language
    for name in (f"{split}.jsonl", f"{split}.jsonl.gz"):
        if (base / name).is_file():
            return [base / name]
    raw = base / "final" / "jsonl" / split
    if raw.is_dir():
        return sorted(p for p in raw.iterdir() if p.name.endswith((".jsonl", ".jsonl.gz")))
    return []


def load_split(root, language: str, split: str) -> LoadedCorpus:
    pairs = LoadedCorpus()
    for path in split_files(root, language, split):
        part = load_corpus(path, split)
        pairs.extend(part)
        pairs.skipped += part.skipped
    return pairs


def is_english(text: str) -> bool:
    letters = [ch for ch in text if ch.isalpha()]
    if not letters:
        return False
    latin = sum(1 for ch in letters if ("a" <= ch <= "z") or ("A" <= ch <= "Z"))
    return latin / len(letters) >= ENGLISH_THRESHOLD


def has_special_token(text: str) -> bool:
    return any(s in text for s in _SPECIAL_SUBSTRINGS) or _TAG.search(text) is not None


def doc_token_count(pair: CodeDocPair) -> int:
    if pair.doc_tokens is not None:
        return len(pair.doc_tokens)
    return len(tokenize_text(pair.doc))


def filter_pair(pair: CodeDocPair, validator=None) -> FilterVerdict:
    """First failing admission rule for an already comment-stripped pair, else ``ok``."""
    parsable = validator(pair) if validator is not None else check_structure(pair.code, pair.language)
    if not pair.code.strip() or not parsable:
        return FilterVerdict(False, "unparsable_code")
    ntok = doc_token_count(pair)
    if ntok < MIN_DOC_TOKENS:
        return FilterVerdict(False, "doc_too_short")
    if ntok > MAX_DOC_TOKENS:
        return FilterVerdict(False, "doc_too_long")
    if has_special_token(pair.doc):
        return FilterVerdict(False, "special_token")
    if not is_english(pair.doc):
        return FilterVerdict(False, "non_english")
    return FilterVerdict(True, "ok")


class ExternalValidator:
    """Runs a shell command with the code on stdin; exit status 0 means parsable.

    ``{language}`` in the command is replaced by the record's language.
    """

    def __init__(self, command: str, timeout: float = 30.0):
        self.command = command
        self.timeout = timeout

    def __call__(self, pair: CodeDocPair) -> bool:
        argv = shlex.split(self.command.replace("{language}", pair.language))
        try:
            proc = subprocess.run(argv, input=pair.code, text=True, capture_output=True, timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired) as exc:
            log.warning("validator failed on %s: %s", pair.id, exc)
            return False
        return proc.returncode == 0


def clean_pair(pair: CodeDocPair, validator=None) -> tuple:
    """Strip comments from the code, then judge the stripped pair."""
    stripped = replace(pair, code=strip_comments(pair.code, pair.language).stripped)
    return stripped, filter_pair(stripped, validator)


def _clean_star(args):
    return clean_pair(*args)


def clean_corpus(pairs, validator=None, workers: int = 1) -> list:
    """``(stripped pair, verdict)`` for every input, in input order."""
    if workers <= 1 or len(pairs) < 2:
        return [clean_pair(p, validator) for p in pairs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_clean_star, [(p, validator) for p in pairs], chunksize=256))


def z_score(confidence: float) -> float:
    # two-decimal table value, as in the usual 1.96 for 95%
    return round(NormalDist().inv_cdf(0.5 + confidence / 2), 2)


def required_sample_size(spec: SampleSpec) -> int:
    """Cochran's sample size at p = 0.5 with finite-population correction."""
    z = z_score(spec.confidence)
    n0 = z * z * 0.25 / (spec.margin * spec.margin)
    n = n0 / (1 + (n0 - 1) / spec.population)
    return min(spec.population, math.ceil(round(n, 9)))


def _randbelow(rng: random.Random, n: int) -> int:
    k = n.bit_length()
    r = rng.getrandbits(k)
    while r >= n:
        r = rng.getrandbits(k)
    return r


def sample(pairs, n: int, seed: int) -> list:
    """``n`` distinct records, uniform without replacement, fixed by ``seed``.

    Partial Fisher-Yates over MT19937 ``getrandbits`` so the draw does not
    depend on ``random.sample`` internals.
    """
    items = list(pairs)
    if n < 0 or n > len(items):
        raise ValueError(f"cannot sample {n} of {len(items)} records")
    if seed < 0:
        raise ValueError("seed must be unsigned")
    rng = random.Random(seed)
    for i in range(n):
        j = i + _randbelow(rng, len(items) - i)
        items[i], items[j] = items[j], items[i]
    return items[:n]


def write_jsonl(path, pairs) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
