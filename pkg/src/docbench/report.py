"""Per-language aggregation, comparison tables and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from . import __version__
from .metrics import MetricRecord

TABLE_ORDER = ("ruby", "javascript", "go", "python", "java", "php")
DISPLAY_NAMES = {
    "ruby": "Ruby",
    "javascript": "JavaScript",
    "go": "GO",
    "python": "Python",
    "java": "Java",
    "php": "PHP",
}


@dataclass
class EvalRecord:
    pair_id: str
    language: str
    generated: str
    reference: str
    metrics: MetricRecord | None
    backend_name: str
    shots: int
    error: str | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        if self.metrics is None:
            d["metrics"] = None
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "EvalRecord":
        obj = dict(obj)
        if obj.get("metrics") is not None:
            obj["metrics"] = MetricRecord(**obj["metrics"])
        return cls(**obj)


@dataclass(frozen=True)
class LanguageSummary:
    language: str
    n: int
    mean_bleu: float
    mean_fk: float
    mean_length: float
    mean_tfidf: float


@dataclass(frozen=True)
class TableRow:
    model: str
    group: str
    cells: dict
    overall: str


def _cell(text: str):
    return None if text.strip() in ("-", "") else float(text)


def load_table3() -> list:
    """Published comparison rows, transcribed verbatim (never recomputed)."""
    text = resources.files("docbench").joinpath("data/table3.csv").read_text(encoding="utf-8")
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(
            TableRow(rec["model"], rec["group"], {lang: _cell(rec[lang]) for lang in TABLE_ORDER}, rec["overall"])
        )
    return rows


def baseline_rows() -> list:
    return [r for r in load_table3() if r.group == "baseline"]


def reported_rows() -> list:
    """The published Codex rows. Context only; they need the proprietary model."""
    return [r for r in load_table3() if r.group == "reported"]


def _mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


def aggregate(records) -> list:
    """One summary per language present, in table column order. Errored records are skipped."""
    records = list(records)
    if not records:
        raise ValueError("aggregate needs at least one record")
    by_lang: dict = {}
    for rec in records:
        if rec.error is None and rec.metrics is not None:
            by_lang.setdefault(rec.language, []).append(rec.metrics)
    if not by_lang:
        raise ValueError("no successfully scored records to aggregate")
    unknown = set(by_lang) - set(TABLE_ORDER)
    if unknown:
        raise ValueError(f"unknown languages: {sorted(unknown)}")
    return [
        LanguageSummary(
            language=lang,
            n=len(ms),
            mean_bleu=_mean(m.bleu for m in ms),
            mean_fk=_mean(m.fk_grade for m in ms),
            mean_length=_mean(m.length_words for m in ms),
            mean_tfidf=_mean(m.tfidf for m in ms),
        )
        for lang in TABLE_ORDER
        if (ms := by_lang.get(lang))
    ]


def overall(summaries) -> float:
    """Unweighted mean of the six per-language BLEU means."""
    summaries = list(summaries)
    by_lang = {s.language: s.mean_bleu for s in summaries}
    missing = [lang for lang in TABLE_ORDER if lang not in by_lang]
    if missing or len(by_lang) != len(summaries):
        raise ValueError(f"overall needs exactly one summary per language; missing {missing}")
    return _mean(by_lang[lang] for lang in TABLE_ORDER)


def _fmt(value) -> str:
    return "-" if value is None else f"{value:.2f}"


def _measured_row(summaries, label: str) -> list:
    by_lang = {s.language: s.mean_bleu for s in summaries}
    try:
        total = _fmt(overall(summaries))
    except ValueError:
        total = "N/A"
    return [label] + [_fmt(by_lang.get(lang)) for lang in TABLE_ORDER] + [total]


def render_table(summaries, baselines=(), label: str = "measured") -> tuple:
    """``(csv_text, markdown_text)``: baseline rows first, then the measured row."""
    header = ["Model"] + [DISPLAY_NAMES[lang] for lang in TABLE_ORDER] + ["Overall"]
    rows = [[b.model] + [_fmt(b.cells.get(lang)) for lang in TABLE_ORDER] + [b.overall] for b in baselines]
    summaries = list(summaries)
    if summaries:
        rows.append(_measured_row(summaries, label))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)

    md = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    md += ["| " + " | ".join(r) + " |" for r in rows]
    if summaries:
        md += [
            "",
            "| Language | n | BLEU | Flesch-Kincaid | Length (words) | TF-IDF |",
            "|---|---|---|---|---|---|",
        ]
        md += [
            f"| {DISPLAY_NAMES[s.language]} | {s.n} | {s.mean_bleu:.2f} | {s.mean_fk:.2f} "
            f"| {s.mean_length:.2f} | {s.mean_tfidf:.2f} |"
            for s in summaries
        ]
    return buf.getvalue(), "\n".join(md) + "\n"


def summary_csv(summaries) -> str:
    """Full-precision summary; rounding only happens in the rendered tables."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["language", "n", "mean_bleu", "mean_fk", "mean_length", "mean_tfidf"])
    for s in summaries:
        writer.writerow([s.language, s.n, repr(s.mean_bleu), repr(s.mean_fk), repr(s.mean_length), repr(s.mean_tfidf)])
    return buf.getvalue()


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def run_timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the stamp so repeated runs are byte-identical
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return moment.replace(microsecond=0).isoformat()


def write_manifest(path, config: dict, seeds: dict, digests: dict, backend: dict | None = None, **extra) -> dict:
    manifest = {
        "artifact_version": __version__,
        "timestamp": run_timestamp(),
        "config": config,
        "seeds": seeds,
        "backend": backend or {},
        "corpus_digests": digests,
    }
    manifest.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return manifest


def write_records(path, records) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True, ensure_ascii=False) + "\n")


def read_records(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [EvalRecord.from_json(json.loads(line)) for line in fh if line.strip()]
