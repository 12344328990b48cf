import re
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docbench.lexers import LanguageId, check_structure, strip_comments

FIXTURES = Path(__file__).parent / "data" / "lexers"
GOLDENS = sorted(FIXTURES.glob("*/*.in"))


def _id(path):
    return f"{path.parent.name}/{path.stem}"


# --- independent structure oracle -------------------------------------------
# Eliminates literals and comments with per-language regex alternations (no
# shared code with the scanner), then checks brackets with a plain stack.

_DQ1, _SQ1 = r'"(?:\\.|[^"\\\n])*"', r"'(?:\\.|[^'\\\n])*'"
_DQM, _SQM = r'"(?:\\.|[^"\\])*"', r"'(?:\\.|[^'\\])*'"
_BLOCK, _SLASH, _HASH = r"/\*[\s\S]*?\*/", r"//[^\n]*", r"#[^\n]*"
_BACKTICK = r"`(?:\\.|[^`\\])*`"
_JS_REGEX = r"(?:(?<=[(,=:\[!&|?{};~])|(?<=return ))\s*/(?:\\.|\[(?:\\.|[^\]\n])*\]|[^/\\\n\[])+/[a-z]*"

_ORACLE = {
    "java": [r'"""[\s\S]*?"""', _BLOCK, _SLASH, _DQ1, _SQ1],
    "python": [r'[rRbBuUfF]*"""(?:\\.|[^\\])*?"""', r"[rRbBuUfF]*'''(?:\\.|[^\\])*?'''", _HASH, _DQ1, _SQ1],
    "php": [_BLOCK, _SLASH, _HASH, _DQM, _SQM],
    "go": [_BLOCK, _SLASH, r"`[^`]*`", _DQ1, _SQ1],
    "javascript": [_BLOCK, _SLASH, _BACKTICK, _DQ1, _SQ1, _JS_REGEX],
    "ruby": [r"(?m:^=begin\b[\s\S]*?^=end[^\n]*)", _HASH, _DQM, _SQM, _JS_REGEX],
}
_HEREDOC = {"php": r"<<<", "ruby": r"<<[~-]?[A-Z_]+"}


def oracle_structure(code: str, lang: str) -> bool:
    if lang in _HEREDOC:
        m = re.search(_HEREDOC[lang], code)
        if m:
            code = code[: m.start()]
    pattern = re.compile("|".join(f"(?:{p})" for p in _ORACLE[lang]))
    residue = pattern.sub(" ", code)
    if any(q in residue for q in "\"'`") or "/*" in residue:
        return False
    if lang == "python":
        for line in residue.split("\n"):
            lead = line[: len(line) - len(line.lstrip(" \t"))]
            if line.strip() and " " in lead and "\t" in lead:
                return False
    stack = []
    pairs = {")": "(", "]": "[", "}": "{"}
    for ch in residue:
        if ch in "([{":
            stack.append(ch)
        elif ch in pairs:
            if not stack or stack.pop() != pairs[ch]:
                return False
    return not stack


EXTRA_STRUCTURE = [
    ("java", "public int f() { return 1; }", True),
    ("javascript", "function f( { return 1; }", False),
    ("python", 'def f():\n\treturn "unterminated', False),
    ("java", "int a = (1 + 2;", False),
    ("java", 'String s = ")";', True),
    ("go", "x := `(`", True),
    ("go", "f(a]", False),
    ("php", "$a = '{'; }", False),
    ("ruby", "x = [1, 2\n", False),
    ("ruby", "s = '}' # {\n", True),
    ("javascript", "var r = /[(]/; f(r);", True),
    ("python", "def f():\n  \tx = 1\n", False),
    ("python", "x = ('# )')\n", True),
    ("java", "/* open", False),
]


# --- goldens ------------------------------------------------------------------


def test_fixture_counts():
    for lang in LanguageId:
        assert len(list((FIXTURES / lang.value).glob("*.in"))) >= 10, lang


@pytest.mark.parametrize("path", GOLDENS, ids=_id)
def test_golden_byte_exact(path):
    expected = path.with_suffix(".expected").read_bytes().decode("utf-8")
    assert strip_comments(path.read_text(encoding="utf-8"), path.parent.name).stripped == expected


@pytest.mark.parametrize("path", GOLDENS, ids=_id)
def test_golden_idempotent(path):
    once = strip_comments(path.read_text(encoding="utf-8"), path.parent.name).stripped
    assert strip_comments(once, path.parent.name).stripped == once


@pytest.mark.parametrize("path", GOLDENS, ids=_id)
def test_golden_structure_matches_oracle(path):
    lang = path.parent.name
    code = path.read_text(encoding="utf-8")
    stripped = strip_comments(code, lang).stripped
    assert check_structure(code, lang) == oracle_structure(code, lang)
    assert check_structure(stripped, lang) == oracle_structure(stripped, lang)


@pytest.mark.parametrize("lang,code,expected", EXTRA_STRUCTURE)
def test_structure_cases(lang, code, expected):
    assert oracle_structure(code, lang) == expected
    assert check_structure(code, lang) == expected


# --- documented examples ------------------------------------------------------


def test_identity():
    assert strip_comments("int x = 1;", "java").stripped == "int x = 1;"


def test_trailing_comment_with_url_in_literal():
    assert strip_comments('String s = "http://x"; // note', "java").stripped == 'String s = "http://x";'


def test_block_comment_becomes_one_space():
    assert strip_comments("a := 1 /* mid */ + 2", "go").stripped == "a := 1   + 2"


def test_ruby_begin_end_removed():
    code = "x = 1\n=begin\nanything\n=end\ny = 2\n"
    assert strip_comments(code, "ruby").stripped == "x = 1\ny = 2\n"


def test_unterminated_reports_diagnostic():
    out = strip_comments("int a; /* open", "java")
    assert not out.balanced
    assert any("unterminated" in d for d in out.diagnostics)


def test_heredoc_is_opaque_with_diagnostic():
    out = strip_comments("$h = <<<EOT\n# x\nEOT;\n", "php")
    assert "# x" in out.stripped
    assert any("heredoc" in d for d in out.diagnostics)


def test_unknown_language():
    with pytest.raises(ValueError):
        strip_comments("x", "cobol")


# --- properties ---------------------------------------------------------------

# literal bodies full of comment-like text, no quotes/backslashes/newlines
LITERAL_BODY = st.lists(st.sampled_from(["//", "/*", "*/", "#", "--", " ", "a", "x1", "http://h", "=begin"]), max_size=8).map(
    "".join
)

_WRAP = {
    "java": ('String s = "{}"; // tail\n', '"{}"'),
    "python": ('s = "{}"  # tail\n', '"{}"'),
    "php": ("$s = '{}'; # tail\n", "'{}'"),
    "go": ("s := `{}` /* tail */\n", "`{}`"),
    "javascript": ("const s = `{}`; // tail\n", "`{}`"),
    "ruby": ("s = '{}' # tail\n", "'{}'"),
}


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(sorted(_WRAP)), LITERAL_BODY)
def test_literal_bytes_survive(lang, body):
    template, literal = _WRAP[lang]
    out = strip_comments(template.format(body), lang).stripped
    assert literal.format(body) in out
    assert "tail" not in out


CODE_PIECES = st.lists(
    st.sampled_from(["x", " ", "\n", "\t", "(", ")", "{", "}", "/*c*/", "// c\n", "# c\n", '"s"', "'t'", "`u`", "/", "*", "1"]),
    max_size=30,
).map("".join)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([lang.value for lang in LanguageId]), CODE_PIECES)
def test_length_bound(lang, code):
    blocks = code.count("/*")
    assert len(strip_comments(code, lang).stripped) <= len(code) + blocks


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([lang.value for lang in LanguageId]), CODE_PIECES)
def test_stripping_is_idempotent_on_generated_code(lang, code):
    once = strip_comments(code, lang).stripped
    assert strip_comments(once, lang).stripped == once
