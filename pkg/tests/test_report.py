import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docbench.metrics import MetricRecord
from docbench.report import (
    TABLE_ORDER,
    EvalRecord,
    LanguageSummary,
    aggregate,
    baseline_rows,
    load_table3,
    overall,
    read_records,
    render_table,
    reported_rows,
    summary_csv,
    write_manifest,
    write_records,
)

CODEX_1SHOT = {"ruby": 16.04, "javascript": 16.58, "go": 20.94, "python": 22.28, "java": 22.81, "php": 25.13}
CODEX_0SHOT = {"ruby": 5.41, "javascript": 9.83, "go": 15.80, "python": 18.93, "java": 13.59, "php": 13.32}


def summaries(values):
    return [LanguageSummary(lang, 1, v, 0.0, 0.0, 0.0) for lang, v in values.items()]


def record(lang, bleu, i=0, error=None):
    metrics = None if error else MetricRecord(bleu, 5.0 + i, 8, 1.5 * i)
    return EvalRecord(f"{lang}-{i}", lang, "g", "r", metrics, "retrieval", 1, error)


def test_overall_codex_rows():
    assert f"{overall(summaries(CODEX_1SHOT)):.2f}" == "20.63"
    assert f"{overall(summaries(CODEX_0SHOT)):.2f}" == "12.81"


def test_overall_through_aggregate():
    recs = [record(lang, v) for lang, v in CODEX_1SHOT.items()]
    assert f"{overall(aggregate(recs)):.2f}" == "20.63"


def test_overall_constant_and_missing():
    assert overall(summaries({lang: 7.5 for lang in TABLE_ORDER})) == 7.5
    with pytest.raises(ValueError):
        overall(summaries({"ruby": 1.0}))


def test_aggregate_basic():
    (s,) = aggregate([record("go", 100.0), record("go", 0.0, 1)])
    assert s.mean_bleu == 50.0 and s.n == 2
    two = aggregate([record("go", 1.0), record("php", 2.0)])
    assert [x.language for x in two] == ["go", "php"]


def test_aggregate_excludes_errors():
    (s,) = aggregate([record("go", 10.0), record("go", 0.0, 1, error="HTTP 500")])
    assert s.n == 1 and s.mean_bleu == 10.0
    with pytest.raises(ValueError):
        aggregate([record("go", 0.0, error="x")])


def test_aggregate_matches_independent_accumulator():
    rng = random.Random(5)
    recs = [record(rng.choice(TABLE_ORDER), rng.uniform(0, 100), i) for i in range(30)]
    got = {s.language: s for s in aggregate(recs)}
    for lang in set(r.language for r in recs):
        mine = [r.metrics for r in recs if r.language == lang]
        total_bleu = total_fk = total_tf = 0.0
        for m in mine:
            total_bleu += m.bleu
            total_fk += m.fk_grade
            total_tf += m.tfidf
        assert got[lang].mean_bleu == pytest.approx(total_bleu / len(mine), abs=1e-9)
        assert got[lang].mean_fk == pytest.approx(total_fk / len(mine), abs=1e-9)
        assert got[lang].mean_tfidf == pytest.approx(total_tf / len(mine), abs=1e-9)
        assert got[lang].mean_length == 8


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 100), min_size=6, max_size=30), st.randoms())
def test_overall_permutation_invariant(values, rnd):
    recs = [record(TABLE_ORDER[i % 6], v, i) for i, v in enumerate(values)]
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    assert overall(aggregate(shuffled)) == overall(aggregate(recs))


def test_table3_fixture():
    rows = {r.model: r for r in load_table3()}
    assert rows["CodeBERT"].cells["php"] == 25.16
    assert rows["REDCODER"].overall == "N/A" and rows["REDCODER"].cells["ruby"] is None
    assert [r.model for r in reported_rows()] == ["Codex (0-shot)", "Codex (1-shot)"]
    for row in reported_rows():
        assert f"{overall(summaries(row.cells)):.2f}" == row.overall


# the published CoTexT (1-CC) overall is 18.55 although its cells average 18.535;
# fixtures stay verbatim, so the row is checked as printed
PRINTED_OVERALL_MISMATCH = {"CoTexT (1-CC)": 18.535}


def test_baseline_overalls_are_unweighted_means():
    for row in baseline_rows():
        if row.overall == "N/A":
            assert any(v is None for v in row.cells.values())
            continue
        mean = math.fsum(row.cells.values()) / 6
        if row.model in PRINTED_OVERALL_MISMATCH:
            assert mean == pytest.approx(PRINTED_OVERALL_MISMATCH[row.model], abs=1e-9)
            assert row.overall == "18.55"
            continue
        assert f"{mean:.2f}" == row.overall, row.model


def test_render_measured_only():
    csv_text, md = render_table(summaries(CODEX_1SHOT), label="mine")
    lines = csv_text.strip().split("\n")
    assert lines[0] == "Model,Ruby,JavaScript,GO,Python,Java,PHP,Overall"
    assert lines[1:] == ["mine,16.04,16.58,20.94,22.28,22.81,25.13,20.63"]
    assert "| mine | 16.04 |" in md


def test_render_with_baselines_and_partial_languages():
    csv_text, md = render_table(summaries({"go": 12.345}), baseline_rows(), label="m")
    assert "CodeBERT,12.16,14.90,18.07,19.06,17.65,25.16,17.83" in csv_text
    assert csv_text.strip().split("\n")[-1] == "m,-,-,12.35,-,-,-,N/A"
    assert "REDCODER,-,-,-,21.01,22.94,-,N/A" in csv_text


def test_rounding_is_display_only():
    s = summaries({"go": 1 / 3})
    assert "0.3333333333333333" in summary_csv(s)
    assert "0.33" in render_table(s)[0]


def test_records_roundtrip(tmp_path):
    recs = [record("go", 12.5), record("ruby", 0.0, 1, error="boom")]
    write_records(tmp_path / "r.jsonl", recs)
    assert read_records(tmp_path / "r.jsonl") == recs


def test_manifest(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    m = write_manifest(tmp_path / "m.json", {"seed": 42}, {"base": 42}, {"go/test.jsonl": "ab"}, {"name": "retrieval"})
    on_disk = json.loads((tmp_path / "m.json").read_text())
    assert on_disk == m
    assert on_disk["config"]["seed"] == 42 and on_disk["seeds"] == {"base": 42}
    assert on_disk["timestamp"] == "1970-01-01T00:00:00+00:00"
    assert set(on_disk) >= {"artifact_version", "timestamp", "config", "seeds", "backend", "corpus_digests"}
