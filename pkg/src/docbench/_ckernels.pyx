# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels. Must agree exactly with ``_pykernels``."""

from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport uint64_t

from docbench._pykernels import REGEX_KEYWORDS

cdef enum:
    JAVA = 0
    PYTHON = 1
    PHP = 2
    GO = 3
    JAVASCRIPT = 4
    RUBY = 5

cdef enum:
    CODE = 0
    STRING = 1
    LINE_COMMENT = 2
    BLOCK_COMMENT = 3
    OPAQUE = 4

cdef enum:
    UNTERMINATED = 1
    TRIPLE = 2
    REGEX = 4


cdef inline bint _is_ws(Py_UCS4 c):
    return c == u' ' or c == u'\n' or c == u'\t' or c == u'\r'


cdef inline bint _is_word_char(Py_UCS4 c):
    return c.isalnum() or c == u'_' or c == u'$'


cdef inline bint _is_preceder(Py_UCS4 c):
    return (c == u'(' or c == u',' or c == u'=' or c == u':' or c == u'[' or c == u'!'
            or c == u'&' or c == u'|' or c == u'?' or c == u'{' or c == u';'
            or c == u'+' or c == u'-' or c == u'*' or c == u'%' or c == u'<' or c == u'>'
            or c == u'~' or c == u'^')


cdef bint _regex_allowed(unicode text, Py_ssize_t last_sig):
    cdef Py_UCS4 p
    cdef Py_ssize_t k
    if last_sig < 0:
        return True
    p = text[last_sig]
    if _is_preceder(p):
        return True
    if _is_word_char(p):
        k = last_sig
        while k >= 0 and _is_word_char(text[k]):
            k -= 1
        return text[k + 1:last_sig + 1] in REGEX_KEYWORDS
    return False


cdef Py_ssize_t _scan_regex(unicode text, Py_ssize_t i, Py_ssize_t n):
    cdef Py_ssize_t j = i + 1
    cdef bint in_class = False
    cdef Py_UCS4 ch
    while j < n:
        ch = text[j]
        if ch == u'\\':
            j += 2
            continue
        if ch == u'\n':
            return -1
        if in_class:
            if ch == u']':
                in_class = False
        elif ch == u'[':
            in_class = True
        elif ch == u'/':
            return j + 1
        j += 1
    return -1


cdef inline bint _triple_at(unicode text, Py_ssize_t j, Py_ssize_t n, Py_UCS4 q):
    return j + 2 < n and text[j] == q and text[j + 1] == q and text[j + 2] == q


cdef Py_ssize_t _scan_string(unicode text, Py_ssize_t i, Py_ssize_t n, Py_UCS4 quote,
                             int width, bint escapes, bint multiline, int *flags):
    cdef Py_ssize_t j = i + width
    cdef Py_UCS4 ch
    flags[0] = 0
    while j < n:
        ch = text[j]
        if escapes and ch == u'\\':
            j += 2
            continue
        if ch == quote:
            if width == 1:
                return j + 1
            if _triple_at(text, j, n, quote):
                return j + 3
        elif ch == u'\n' and not multiline:
            flags[0] = UNTERMINATED
            return j
        j += 1
    flags[0] = UNTERMINATED
    return n


cdef bint _ruby_heredoc_at(unicode text, Py_ssize_t i, Py_ssize_t n):
    cdef Py_ssize_t j = i + 2
    cdef Py_UCS4 ch
    if j >= n:
        return False
    ch = text[j]
    if ch == u'~' or ch == u'-':
        j += 1
        if j >= n:
            return False
        ch = text[j]
        if ch == u'"' or ch == u"'" or ch == u'`':
            j += 1
            if j >= n:
                return False
            ch = text[j]
        return ch.isalpha() or ch == u'_'
    if ch == u'"' or ch == u"'" or ch == u'`':
        if j + 1 >= n:
            return False
        ch = text[j + 1]
        return ch.isalpha() or ch == u'_'
    return (u'A' <= ch <= u'Z') or ch == u'_'


cdef Py_ssize_t _ruby_begin_end(unicode text, Py_ssize_t i, Py_ssize_t n, int *flags):
    cdef Py_ssize_t j = i, k, nl
    flags[0] = 0
    while True:
        j = text.find(u"\n=end", j)
        if j < 0:
            flags[0] = UNTERMINATED
            return n
        k = j + 5
        if k >= n or _is_ws(text[k]):
            nl = text.find(u"\n", k)
            return n if nl < 0 else nl
        j = k


def scan(unicode text, int lang):
    cdef list segs = []
    cdef Py_ssize_t n = len(text)
    cdef bint slash = lang == JAVA or lang == PHP or lang == GO or lang == JAVASCRIPT
    cdef bint hash_ = lang == PYTHON or lang == RUBY or lang == PHP
    cdef bint multiline = lang == PHP or lang == RUBY
    cdef bint regex = lang == JAVASCRIPT or lang == RUBY
    cdef Py_ssize_t i = 0, code_start = 0, last_sig = -1, end, j
    cdef Py_UCS4 c, nxt
    cdef int kind, flags

    while i < n:
        c = text[i]
        if _is_ws(c):
            i += 1
            continue
        nxt = text[i + 1] if i + 1 < n else 0
        kind = -1
        flags = 0
        end = i

        if slash and c == u'/' and nxt == u'/':
            end = text.find(u"\n", i)
            if end < 0:
                end = n
            kind = LINE_COMMENT
        elif slash and c == u'/' and nxt == u'*':
            j = text.find(u"*/", i + 2)
            if j < 0:
                end = n
                flags = UNTERMINATED
            else:
                end = j + 2
            kind = BLOCK_COMMENT
        elif hash_ and c == u'#':
            end = text.find(u"\n", i)
            if end < 0:
                end = n
            kind = LINE_COMMENT
        elif (lang == RUBY and c == u'=' and (i == 0 or text[i - 1] == u'\n')
              and text.startswith(u"=begin", i)
              and (i + 6 >= n or _is_ws(text[i + 6]))):
            end = _ruby_begin_end(text, i, n, &flags)
            kind = BLOCK_COMMENT
        elif c == u'"' or c == u"'" or (c == u'`' and (lang == GO or lang == JAVASCRIPT)):
            if c == u'`':
                end = _scan_string(text, i, n, c, 1, lang == JAVASCRIPT, True, &flags)
            elif (lang == PYTHON or (lang == JAVA and c == u'"')) and _triple_at(text, i, n, c):
                end = _scan_string(text, i, n, c, 3, True, True, &flags)
                flags |= TRIPLE
            else:
                end = _scan_string(text, i, n, c, 1, True, multiline, &flags)
            kind = STRING
        elif lang == PHP and c == u'<' and _triple_at(text, i, n, u'<'):
            end = n
            kind = OPAQUE
        elif lang == RUBY and c == u'<' and nxt == u'<' and _ruby_heredoc_at(text, i, n):
            end = n
            kind = OPAQUE
        elif regex and c == u'/' and _regex_allowed(text, last_sig):
            j = _scan_regex(text, i, n)
            if j > 0:
                end = j
                flags = REGEX
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


cdef int _cmp_u64(const void *a, const void *b) noexcept nogil:
    cdef uint64_t x = (<uint64_t *>a)[0]
    cdef uint64_t y = (<uint64_t *>b)[0]
    return (x > y) - (x < y)


cdef void _pack(uint64_t *ids, Py_ssize_t length, int order, uint64_t *out) noexcept nogil:
    cdef Py_ssize_t k
    cdef int m
    cdef uint64_t key
    for k in range(length - order + 1):
        key = 0
        for m in range(order):
            key = (key << 16) | ids[k + m]
        out[k] = key


cdef Py_ssize_t _clipped(uint64_t *a, Py_ssize_t na, uint64_t *b, Py_ssize_t nb) noexcept nogil:
    # both sorted; sum over distinct keys of min(count_a, count_b)
    cdef Py_ssize_t i = 0, j = 0, total = 0
    while i < na and j < nb:
        if a[i] < b[j]:
            i += 1
        elif a[i] > b[j]:
            j += 1
        else:
            total += 1
            i += 1
            j += 1
    return total


def ngram_stats(list candidate, list reference, int max_n):
    cdef dict vocab = {}
    cdef Py_ssize_t nc = len(candidate), nr = len(reference), k, cnt, rcnt
    cdef int order
    cdef uint64_t *cids
    cdef uint64_t *rids
    cdef uint64_t *cbuf
    cdef uint64_t *rbuf
    matches = [0] * max_n
    totals = [0] * max_n

    if max_n > 4 or nc + nr >= 65535:
        from docbench._pykernels import ngram_stats as slow
        return slow(candidate, reference, max_n)
    if nc == 0:
        return matches, totals

    cids = <uint64_t *>malloc((nc + 1) * sizeof(uint64_t))
    rids = <uint64_t *>malloc((nr + 1) * sizeof(uint64_t))
    cbuf = <uint64_t *>malloc((nc + 1) * sizeof(uint64_t))
    rbuf = <uint64_t *>malloc((nr + 1) * sizeof(uint64_t))
    if not cids or not rids or not cbuf or not rbuf:
        free(cids); free(rids); free(cbuf); free(rbuf)
        raise MemoryError()
    try:
        for k in range(nc):
            cids[k] = vocab.setdefault(candidate[k], len(vocab) + 1)
        for k in range(nr):
            rids[k] = vocab.setdefault(reference[k], len(vocab) + 1)
        for order in range(1, max_n + 1):
            cnt = nc - order + 1
            if cnt <= 0:
                break
            rcnt = nr - order + 1
            if rcnt < 0:
                rcnt = 0
            _pack(cids, nc, order, cbuf)
            qsort(cbuf, cnt, sizeof(uint64_t), _cmp_u64)
            if rcnt > 0:
                _pack(rids, nr, order, rbuf)
                qsort(rbuf, rcnt, sizeof(uint64_t), _cmp_u64)
            totals[order - 1] = cnt
            matches[order - 1] = _clipped(cbuf, cnt, rbuf, rcnt)
    finally:
        free(cids); free(rids); free(cbuf); free(rbuf)
    return matches, totals
