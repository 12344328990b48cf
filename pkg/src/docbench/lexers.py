"""Comment stripping and structural sanity checks for the six corpus languages.

The character scan itself lives in the kernels (compiled or pure Python);
this module turns scan segments into stripped text, diagnostics and a
bracket/string/indentation verdict.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from . import kernels
from ._pykernels import BLOCK_COMMENT, CODE, LINE_COMMENT, OPAQUE, STRING, TRIPLE, UNTERMINATED


class LanguageId(str, Enum):
    JAVA = "java"
    PYTHON = "python"
    PHP = "php"
    GO = "go"
    JAVASCRIPT = "javascript"
    RUBY = "ruby"

    @classmethod
    def parse(cls, value: "str | LanguageId") -> "LanguageId":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unsupported language: {value!r}") from None

    @property
    def kernel_id(self) -> int:
        return _KERNEL_IDS[self]


_KERNEL_IDS = {
    LanguageId.JAVA: 0,
    LanguageId.PYTHON: 1,
    LanguageId.PHP: 2,
    LanguageId.GO: 3,
    LanguageId.JAVASCRIPT: 4,
    LanguageId.RUBY: 5,
}

_OPENERS = {"(": ")", "[": "]", "{": "}"}
_CLOSERS = {")", "]", "}"}
_PY_PREFIX = re.compile(r"[rRuUbBfF]{1,2}$")


@dataclass(frozen=True)
class LexOutcome:
    stripped: str
    balanced: bool
    diagnostics: tuple = field(default_factory=tuple)


def _position(text: str, offset: int) -> str:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return f"{line}:{col}"


def _rest_of_line_blank(text: str, segs: list, idx: int) -> bool:
    """Only whitespace or a line comment follows segment ``idx`` on its line."""
    if idx + 1 >= len(segs):
        return True
    kind, start, end, _ = segs[idx + 1]
    if kind == LINE_COMMENT:
        return True
    if kind != CODE:
        return False
    line, newline, _ = text[start:end].partition("\n")
    if line.strip(" \t\r"):
        return False
    return bool(newline) or idx + 2 >= len(segs) or segs[idx + 2][0] == LINE_COMMENT


def _python_docstrings(text: str, segs: list) -> set:
    """Indices of triple-quoted strings that stand alone as a statement."""
    found = set()
    depth = 0
    for idx, (kind, start, end, flags) in enumerate(segs):
        if kind == CODE:
            for ch in text[start:end]:
                if ch in _OPENERS:
                    depth += 1
                elif ch in _CLOSERS and depth:
                    depth -= 1
            continue
        if kind != STRING or not flags & TRIPLE or flags & UNTERMINATED or depth:
            continue
        line_start = text.rfind("\n", 0, start) + 1
        head = text[line_start:start].lstrip(" \t")
        if head and not _PY_PREFIX.match(head):
            continue
        # a backslash continuation makes the string an operand of the previous line
        if line_start and text[:line_start].rstrip("\r\n").endswith("\\"):
            continue
        if _rest_of_line_blank(text, segs, idx):
            found.add(idx)
    return found


class _Writer:
    """Accumulates stripped output; trims lines emptied by comment removal."""

    def __init__(self):
        self.parts: list = []
        self.touched = False

    def _rstrip(self):
        parts = self.parts
        while parts:
            kept = parts[-1].rstrip(" \t")
            if kept:
                parts[-1] = kept
                return
            parts.pop()

    def _line_empty(self) -> bool:
        return not self.parts or self.parts[-1].endswith("\n")

    def emit(self, piece: str):
        if piece:
            self.parts.append(piece)

    def emit_code(self, piece: str):
        lines = piece.split("\n")
        for k, chunk in enumerate(lines):
            if k:
                self.newline()
            self.emit(chunk)

    def newline(self):
        if self.touched:
            self._rstrip()
            self.touched = False
            if self._line_empty():
                return
        self.parts.append("\n")

    def drop_prefix(self, prefix_len: int):
        # python string prefix letters sit directly before a removed docstring
        if prefix_len and self.parts:
            self.parts[-1] = self.parts[-1][:-prefix_len]
            if not self.parts[-1]:
                self.parts.pop()

    def finish(self) -> str:
        if self.touched:
            self._rstrip()
        return "".join(self.parts)


def _diagnostics(text: str, segs: list) -> list:
    notes = []
    for kind, start, end, flags in segs:
        where = _position(text, start)
        if kind == OPAQUE:
            notes.append(f"{where}: heredoc treated as opaque to end of record")
        elif flags & UNTERMINATED:
            what = "block comment" if kind == BLOCK_COMMENT else "string literal"
            notes.append(f"{where}: unterminated {what}")
    return notes


def _structure(text: str, segs: list, language: LanguageId) -> tuple:
    notes = []
    stack = []
    for kind, start, end, flags in segs:
        if kind == OPAQUE:
            # nothing after a heredoc marker can be verified
            return not notes, notes
        if flags & UNTERMINATED:
            notes.append(f"{_position(text, start)}: unterminated literal or comment")
            continue
        if kind != CODE:
            continue
        for k in range(start, end):
            ch = text[k]
            if ch in _OPENERS:
                stack.append((ch, k))
            elif ch in _CLOSERS:
                if not stack or _OPENERS[stack[-1][0]] != ch:
                    notes.append(f"{_position(text, k)}: unmatched {ch!r}")
                    return False, notes
                stack.pop()
    if stack:
        ch, k = stack[-1]
        notes.append(f"{_position(text, k)}: unclosed {ch!r}")
    if language is LanguageId.PYTHON:
        notes.extend(_mixed_indentation(text, segs))
    return not notes, notes


def _mixed_indentation(text: str, segs: list) -> list:
    notes = []
    n = len(text)
    for kind, start, end, _ in segs:
        if kind != CODE:
            continue
        starts = [k + 1 for k in range(start, end) if text[k] == "\n"]
        if start == 0:
            starts.insert(0, 0)
        for ls in starts:
            p = ls
            while p < n and text[p] in " \t":
                p += 1
            if p >= n or text[p] in "\r\n#":
                continue
            lead = text[ls:p]
            if " " in lead and "\t" in lead:
                notes.append(f"{_position(text, ls)}: tabs and spaces mixed in indentation")
    return notes


def strip_comments(code: str, language) -> LexOutcome:
    """Remove comments (and Python docstring statements) outside string literals.

    A block comment becomes one space; a line left blank by a removal is
    dropped along with its newline, and trailing blanks on touched lines are
    trimmed. Literal text is copied verbatim.
    """
    lang = LanguageId.parse(language)
    segs = kernels.scan(code, lang.kernel_id)
    docstrings = _python_docstrings(code, segs) if lang is LanguageId.PYTHON else set()

    out = _Writer()
    for idx, (kind, start, end, _flags) in enumerate(segs):
        if kind == CODE:
            out.emit_code(code[start:end])
        elif kind == LINE_COMMENT:
            out.touched = True
        elif kind == BLOCK_COMMENT:
            out.touched = True
            out.emit(" ")
        elif idx in docstrings:
            out.touched = True
            line_start = code.rfind("\n", 0, start) + 1
            out.drop_prefix(len(code[line_start:start].lstrip(" \t")))
        else:
            out.emit(code[start:end])
    stripped = out.finish()

    ok, notes = _structure(code, segs, lang)
    diagnostics = _diagnostics(code, segs) + [n for n in notes if "unterminated" not in n]
    return LexOutcome(stripped=stripped, balanced=ok, diagnostics=tuple(diagnostics))


def check_structure(code: str, language) -> bool:
    """Brackets nest, literals terminate, and (Python) indentation does not mix tabs and spaces."""
    lang = LanguageId.parse(language)
    ok, _ = _structure(code, kernels.scan(code, lang.kernel_id), lang)
    return ok
