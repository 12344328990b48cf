"""docbench command line: preprocess, sample, run, score, report, stopwords."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from collections import Counter
from pathlib import Path

from . import __version__, kernels
from .backends import (
    BackendError,
    ConfigurationError,
    RemoteBackend,
    ResponseCache,
    RetrievalBackend,
    generate_many,
)
from .config import KEY_HELP, RunConfig, read_config_file
from .corpus import (
    REASONS,
    RNG_NAME,
    SPLITS,
    ExternalValidator,
    clean_corpus,
    load_split,
    sample,
    split_files,
    write_jsonl,
)
from .metrics import STOPWORDS, STOPWORDS_VERSION, build_idf, score_pair
from .prompts import build_prompt, select_exemplars
from .report import (
    EvalRecord,
    aggregate,
    baseline_rows,
    file_digest,
    read_records,
    render_table,
    summary_csv,
    write_manifest,
    write_records,
)

log = logging.getLogger("docbench")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNRELIABLE = 3
FAILURE_TOLERANCE = 0.10


class UsageError(Exception):
    pass


def derive_seed(base: int, purpose: str, language: str) -> int:
    digest = hashlib.sha256(f"{base}:{purpose}:{language}".encode()).hexdigest()
    return int(digest[:16], 16)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_preprocess(cfg: RunConfig) -> int:
    root = Path(cfg.corpus)
    out = Path(cfg.out) / "clean"
    validator = ExternalValidator(cfg.validator) if cfg.validator else None
    stats: dict = {}
    found = 0
    for lang in cfg.languages:
        for split in SPLITS:
            if not split_files(root, lang, split):
                continue
            found += 1
            pairs = load_split(root, lang, split)
            results = clean_corpus(pairs, validator, cfg.workers)
            reasons = Counter(v.reason for _, v in results)
            kept = [p for p, v in results if v.accepted]
            write_jsonl(out / lang / f"{split}.jsonl", kept)
            stats.setdefault(lang, {})[split] = {
                "total": len(pairs),
                "accepted": reasons["ok"],
                "rejected": {r: reasons[r] for r in REASONS[1:]},
                "skipped_malformed": pairs.skipped,
            }
            print(f"{lang}/{split}: {reasons['ok']}/{len(pairs)} accepted, {pairs.skipped} malformed lines skipped")
    if not found:
        raise UsageError(f"no corpus files for {cfg.languages} under {root}")
    _write_text(out / "stats.json", json.dumps(stats, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _load_eval_split(cfg: RunConfig, lang: str):
    pairs = load_split(cfg.corpus, lang, cfg.split)
    if not pairs:
        raise UsageError(f"no {cfg.split} records for {lang} under {cfg.corpus}")
    return pairs


def cmd_sample(cfg: RunConfig) -> int:
    out = Path(cfg.out) / "samples"
    seeds = {}
    for lang in cfg.languages:
        pairs = _load_eval_split(cfg, lang)
        seeds[lang] = derive_seed(cfg.seed, "sample", lang)
        picked = sample(pairs, cfg.sample_size(len(pairs)), seeds[lang])
        write_jsonl(out / f"{lang}.jsonl", picked)
        print(f"{lang}: sampled {len(picked)} of {len(pairs)}")
    write_manifest(
        out / "manifest.json",
        cfg.to_json(),
        {"base": cfg.seed, "rng": RNG_NAME, "sample": seeds},
        _digests(cfg, (cfg.split,)),
    )
    return EXIT_OK


def _digests(cfg: RunConfig, splits) -> dict:
    root = Path(cfg.corpus)
    digests = {}
    for lang in cfg.languages:
        for split in splits:
            for path in split_files(root, lang, split):
                digests[path.relative_to(root).as_posix()] = file_digest(path)
    return digests


def _make_backend(cfg: RunConfig, train, cache: ResponseCache, remote=None):
    if cfg.backend == "remote":
        return remote
    if not train:
        raise UsageError("retrieval backend needs a train split")
    return RetrievalBackend(train, cache=cache)


def cmd_run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    params = cfg.params()
    cache = ResponseCache(cfg.cache)
    remote = None
    if cfg.backend == "remote":
        remote = RemoteBackend(
            cfg.endpoint,
            cfg.model,
            cache=cache,
            max_retries=cfg.max_retries,
            backoff=cfg.backoff,
            timeout=cfg.timeout,
            max_in_flight=cfg.max_in_flight,
            rate_limit=cfg.rate_limit,
        )

    seeds = {"base": cfg.seed, "rng": RNG_NAME, "sample": {}, "exemplars": {}}
    exemplar_ids = {}
    sampled_ids = {}
    staged = []
    for lang in cfg.languages:
        test = _load_eval_split(cfg, lang)
        need_train = cfg.shots > 0 or cfg.backend == "retrieval"
        train = load_split(cfg.corpus, lang, "train") if need_train else []
        seeds["sample"][lang] = derive_seed(cfg.seed, "sample", lang)
        seeds["exemplars"][lang] = derive_seed(cfg.seed, "exemplars", lang)
        targets = sample(test, cfg.sample_size(len(test)), seeds["sample"][lang])
        if cfg.shots > len(train):
            raise UsageError(f"{lang}: {cfg.shots} shots requested but train has {len(train)} records")
        exemplars = select_exemplars(train, cfg.shots, seeds["exemplars"][lang])
        exemplar_ids[lang] = [ex.origin_id for ex in exemplars]
        sampled_ids[lang] = hashlib.sha256("\n".join(t.id for t in targets).encode()).hexdigest()
        prompts = [build_prompt(t, exemplars) for t in targets]
        backend = _make_backend(cfg, train, cache, remote)
        results = generate_many(backend, prompts, params, cfg.workers)
        staged.append((lang, targets, results, backend.name))

    idf = build_idf(t.doc for _, targets, _, _ in staged for t in targets)
    records = []
    for lang, targets, results, backend_name in staged:
        for target, result in zip(targets, results):
            if isinstance(result, BackendError):
                records.append(EvalRecord(target.id, lang, "", target.doc, None, backend_name, cfg.shots, str(result)))
                continue
            metrics = score_pair(result.doc, target.doc, idf)
            records.append(EvalRecord(target.id, lang, result.doc, target.doc, metrics, backend_name, cfg.shots))

    failed = sum(1 for r in records if r.error is not None)
    write_records(out / "records.jsonl", records)
    if failed < len(records):
        _write_reports(out, aggregate(records), label=f"{cfg.backend} ({cfg.shots}-shot)")
    backend_info = {"name": cfg.backend, "params": params.to_json()}
    if cfg.backend == "remote":
        backend_info.update(endpoint=cfg.endpoint, model=cfg.model)
    write_manifest(
        out / "manifest.json",
        cfg.to_json(),
        seeds,
        _digests(cfg, (cfg.split, "train")),
        backend_info,
        exemplar_ids=exemplar_ids,
        sampled_ids_digest=sampled_ids,
        kernels="compiled" if kernels.COMPILED else "python",
    )
    if remote is not None:
        remote.close()
    print(f"{len(records)} records, {failed} excluded after generation errors")
    if failed > FAILURE_TOLERANCE * len(records):
        print(f"warning: {failed}/{len(records)} records failed; results flagged unreliable", file=sys.stderr)
        return EXIT_UNRELIABLE
    return EXIT_OK


def _write_reports(out: Path, summaries, label: str) -> str:
    table_csv, table_md = render_table(summaries, baseline_rows(), label=label)
    _write_text(out / "summary.csv", summary_csv(summaries))
    _write_text(out / "table.csv", table_csv)
    _write_text(out / "table.md", table_md)
    return table_md


def cmd_report(cfg: RunConfig, records_path=None) -> int:
    out = Path(cfg.out)
    path = Path(records_path) if records_path else out / "records.jsonl"
    if not path.is_file():
        raise UsageError(f"records file not found: {path}")
    records = read_records(path)
    if not records:
        raise UsageError(f"no records in {path}")
    label = f"{records[0].backend_name} ({records[0].shots}-shot)"
    print(_write_reports(out, aggregate(records), label), end="")
    return EXIT_OK


def _read_doc_lines(path) -> list:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    # "<idx>\t<text>" lines, as produced by the CodeXGLUE scripts
    if lines and all("\t" in ln and ln.split("\t", 1)[0].isdigit() for ln in lines):
        lines = [ln.split("\t", 1)[1] for ln in lines]
    return lines


def cmd_score(predictions, references, out=None) -> int:
    try:
        preds, refs = _read_doc_lines(predictions), _read_doc_lines(references)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    if not preds or not refs:
        raise UsageError("prediction and reference files must be non-empty")
    if len(preds) != len(refs):
        raise UsageError(f"line count mismatch: {len(preds)} predictions vs {len(refs)} references")
    idf = build_idf(refs)
    scores = [score_pair(p, r, idf) for p, r in zip(preds, refs)]
    n = len(scores)
    summary = {
        "n": n,
        "bleu": math.fsum(s.bleu for s in scores) / n,
        "fk_grade": math.fsum(s.fk_grade for s in scores) / n,
        "length_words": math.fsum(s.length_words for s in scores) / n,
        "tfidf": math.fsum(s.tfidf for s in scores) / n,
    }
    text = json.dumps(summary, sort_keys=True)
    print(text)
    if out:
        _write_text(Path(out) / "score.json", text + "\n")
    return EXIT_OK


def cmd_stopwords() -> int:
    print(f"# stop-word list v{STOPWORDS_VERSION}, {len(STOPWORDS)} words")
    print("\n".join(STOPWORDS))
    return EXIT_OK


def _config_epilog() -> str:
    defaults = RunConfig.defaults()
    lines = ["config keys (JSON file via --config; flags override the file):"]
    for key, text in KEY_HELP.items():
        lines.append(f"  {key:<18} {text} [default: {json.dumps(defaults[key])}]")
    lines.append("environment: DOCBENCH_API_KEY holds the remote credential")
    lines.append("exit codes: 0 ok, 2 usage/input error, 3 completed with >10% record failures")
    return "\n".join(lines)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON config file, or a run manifest to replay")
    p.add_argument("--seed", type=int)
    p.add_argument("--languages", help="comma-separated subset of languages")
    p.add_argument("--shots", type=int)
    p.add_argument("--backend", choices=["retrieval", "remote"])
    p.add_argument("--samples", type=int, help="records per language")
    p.add_argument("--out", help="output directory")
    p.add_argument("--cache", help="response cache directory")
    p.add_argument("--corpus", help="corpus root directory")
    p.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    epilog = _config_epilog()
    parser = argparse.ArgumentParser(
        prog="docbench",
        description="Code documentation generation benchmark",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "preprocess": "strip comments, filter records, write the cleaned corpus and rejection stats",
        "sample": "draw the seeded evaluation sample per language",
        "run": "sample, prompt, generate, score and report",
        "score": "score existing predictions against references (one doc per line)",
        "report": "re-aggregate a records file into summary and tables",
        "stopwords": "print the embedded stop-word list",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text, epilog=epilog,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        _add_common(p)
        if name == "score":
            p.add_argument("predictions")
            p.add_argument("references")
        if name == "report":
            p.add_argument("--records", help="records file (default: <out>/records.jsonl)")
    return parser


def _resolve_config(args) -> RunConfig:
    file_values = read_config_file(args.config) if args.config else {}
    overrides = {
        key: getattr(args, key)
        for key in ("seed", "languages", "shots", "backend", "samples", "out", "cache", "corpus", "workers")
    }
    return RunConfig.from_sources(file_values, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "stopwords":
            return cmd_stopwords()
        if args.command == "score":
            return cmd_score(args.predictions, args.references, args.out)
        cfg = _resolve_config(args)
        if args.command == "preprocess":
            return cmd_preprocess(cfg)
        if args.command == "sample":
            return cmd_sample(cfg)
        if args.command == "run":
            return cmd_run(cfg)
        return cmd_report(cfg, args.records)
    except (UsageError, ConfigurationError, ValueError, OSError) as exc:
        print(f"docbench {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
