"""Completion prompts in the Code:/Documentation: block format."""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import CodeDocPair, sample

CODE_MARKER = "Code:\n"
DOC_MARKER = "\nDocumentation:"
STOP_MARKER = "\nCode:"


@dataclass(frozen=True)
class Exemplar:
    code: str
    doc: str
    origin_id: str


@dataclass(frozen=True)
class Prompt:
    text: str
    shots: int
    target_id: str
    stop_marker: str = STOP_MARKER
    target_code: str = field(default="", repr=False)
    exemplar_ids: tuple = ()


def select_exemplars(train, k: int, seed: int) -> list:
    if k == 0:
        return []
    if k > len(train):
        raise ValueError(f"cannot pick {k} exemplars from {len(train)} training records")
    return [Exemplar(p.code, p.doc, p.id) for p in sample(train, k, seed)]


def build_prompt(target: CodeDocPair, exemplars) -> Prompt:
    blocks = [f"{CODE_MARKER}{ex.code}{DOC_MARKER} {' '.join(ex.doc.split())}\n" for ex in exemplars]
    blocks.append(f"{CODE_MARKER}{target.code}{DOC_MARKER}")
    return Prompt(
        text="".join(blocks),
        shots=len(exemplars),
        target_id=target.id,
        target_code=target.code,
        exemplar_ids=tuple(ex.origin_id for ex in exemplars),
    )
