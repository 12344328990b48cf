"""Pure-Python kernels. Reference behaviour for ``_ckernels.pyx``.

Both modules expose the same two functions and must agree exactly:

``scan(text, lang)``
    Split source text into contiguous ``(kind, start, end, flags)`` segments.
``ngram_stats(candidate, reference, max_n)``
    Clipped n-gram matches and candidate n-gram totals for orders 1..max_n.
"""

from collections import Counter

JAVA, PYTHON, PHP, GO, JAVASCRIPT, RUBY = range(6)

CODE, STRING, LINE_COMMENT, BLOCK_COMMENT, OPAQUE = range(5)

UNTERMINATED = 1
TRIPLE = 2
REGEX = 4

_SLASH_COMMENTS = (JAVA, PHP, GO, JAVASCRIPT)
_HASH_COMMENTS = (PYTHON, RUBY, PHP)
_MULTILINE_QUOTES = (PHP, RUBY)
_REGEX_LANGS = (JAVASCRIPT, RUBY)

REGEX_PRECEDERS = "(,=:[!&|?{};+-*%<>~^"
REGEX_KEYWORDS = frozenset(
    (
        "return typeof instanceof in of new delete void throw case do else "
        "yield await if elsif unless when and or not while until then"
    ).split()
)


def _is_word_char(ch):
    return ch.isalnum() or ch == "_" or ch == "$"


def _regex_allowed(text, last_sig):
    if last_sig < 0:
        return True
    p = text[last_sig]
    if p in REGEX_PRECEDERS:
        return True
    if _is_word_char(p):
        k = last_sig
        while k >= 0 and _is_word_char(text[k]):
            k -= 1
        return text[k + 1 : last_sig + 1] in REGEX_KEYWORDS
    return False


def _scan_regex(text, i, n):
    # i points at the opening slash; -1 when the literal does not close on this line
    j = i + 1
    in_class = False
    while j < n:
        ch = text[j]
        if ch == "\\":
            j += 2
            continue
        if ch == "\n":
            return -1
        if in_class:
            if ch == "]":
                in_class = False
        elif ch == "[":
            in_class = True
        elif ch == "/":
            return j + 1
        j += 1
    return -1


def _scan_string(text, i, n, quote, width, escapes, multiline):
    j = i + width
    while j < n:
        ch = text[j]
        if escapes and ch == "\\":
            j += 2
            continue
        if ch == quote:
            if width == 1:
                return j + 1, 0
            if text.startswith(quote * 3, j):
                return j + 3, 0
        elif ch == "\n" and not multiline:
            return j, UNTERMINATED
        j += 1
    return n, UNTERMINATED


def _ruby_heredoc_at(text, i, n):
    # <<~ID, <<-ID, <<"ID", <<'ID', <<UPPER
    j = i + 2
    if j >= n:
        return False
    ch = text[j]
    if ch == "~" or ch == "-":
        j += 1
        if j >= n:
            return False
        ch = text[j]
        if ch in "\"'`":
            j += 1
            if j >= n:
                return False
            ch = text[j]
        return ch.isalpha() or ch == "_"
    if ch in "\"'`":
        return j + 1 < n and (text[j + 1].isalpha() or text[j + 1] == "_")
    return ("A" <= ch <= "Z") or ch == "_"


def _ruby_begin_end(text, i, n):
    # i is at "=begin" in column 0; returns end of the "=end" line
    j = i
    while True:
        j = text.find("\n=end", j)
        if j < 0:
            return n, UNTERMINATED
        k = j + 5
        if k >= n or text[k] in " \t\r\n":
            nl = text.find("\n", k)
            return (n if nl < 0 else nl), 0
        j = k


def scan(text, lang):
    segs = []
    n = len(text)
    slash = lang in _SLASH_COMMENTS
    hash_ = lang in _HASH_COMMENTS
    multiline = lang in _MULTILINE_QUOTES
    regex = lang in _REGEX_LANGS
    i = 0
    code_start = 0
    last_sig = -1

    while i < n:
        c = text[i]
        if c == " " or c == "\n" or c == "\t" or c == "\r":
            i += 1
            continue
        nxt = text[i + 1] if i + 1 < n else ""
        kind = -1
        flags = 0
        end = i

        if slash and c == "/" and nxt == "/":
            end = text.find("\n", i)
            if end < 0:
                end = n
            kind = LINE_COMMENT
        elif slash and c == "/" and nxt == "*":
            j = text.find("*/", i + 2)
            if j < 0:
                end, flags = n, UNTERMINATED
            else:
                end = j + 2
            kind = BLOCK_COMMENT
        elif hash_ and c == "#":
            end = text.find("\n", i)
            if end < 0:
                end = n
            kind = LINE_COMMENT
        elif (
            lang == RUBY
            and c == "="
            and (i == 0 or text[i - 1] == "\n")
            and text.startswith("=begin", i)
            and (i + 6 >= n or text[i + 6] in " \t\r\n")
        ):
            end, flags = _ruby_begin_end(text, i, n)
            kind = BLOCK_COMMENT
        elif c == '"' or c == "'" or (c == "`" and (lang == GO or lang == JAVASCRIPT)):
            if c == "`":
                end, flags = _scan_string(text, i, n, c, 1, lang == JAVASCRIPT, True)
            elif (lang == PYTHON or (lang == JAVA and c == '"')) and text.startswith(c * 3, i):
                end, flags = _scan_string(text, i, n, c, 3, True, True)
                flags |= TRIPLE
            else:
                end, flags = _scan_string(text, i, n, c, 1, True, multiline)
            kind = STRING
        elif lang == PHP and c == "<" and text.startswith("<<<", i):
            end, flags = n, 0
            kind = OPAQUE
        elif lang == RUBY and c == "<" and nxt == "<" and _ruby_heredoc_at(text, i, n):
            end, flags = n, 0
            kind = OPAQUE
        elif regex and c == "/" and _regex_allowed(text, last_sig):
            j = _scan_regex(text, i, n)
            if j > 0:
                end, flags = j, REGEX
                kind = STRING

        if kind < 0:
            last_sig = i
            i += 1
            continue
        if code_start < i:
            segs.append((CODE, code_start, i, 0))
        segs.append((kind, i, end, flags))
        if kind == STRING:
            last_sig = end - 1
        i = end
        code_start = end

    if code_start < n:
        segs.append((CODE, code_start, n, 0))
    return segs


def ngram_stats(candidate, reference, max_n):
    matches = [0] * max_n
    totals = [0] * max_n
    for order in range(1, max_n + 1):
        cand = Counter(tuple(candidate[k : k + order]) for k in range(len(candidate) - order + 1))
        if not cand:
            continue
        ref = Counter(tuple(reference[k : k + order]) for k in range(len(reference) - order + 1))
        totals[order - 1] = sum(cand.values())
        matches[order - 1] = sum(min(count, ref[gram]) for gram, count in cand.items())
    return matches, totals
