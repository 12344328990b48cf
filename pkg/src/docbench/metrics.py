"""Documentation quality metrics.

Smoothed sentence BLEU (add-one on orders 2-4, the variant used by the
CodeSearchNet summarization scripts), Flesch-Kincaid grade, length in words,
and summed TF-IDF as an informativeness proxy.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from . import kernels

MAX_ORDER = 4

_TOKEN = re.compile(r"[^\W_]+|[^\w\s]|_")
_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")
_VOWEL_GROUP = re.compile(r"[aeiouy]+")
_VOWELS = set("aeiouy")

STOPWORDS_VERSION = "1"
# 127 entries, the classic NLTK English list
STOPWORDS = (
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her",
    "hers", "herself", "it", "its", "itself", "they", "them", "their", "theirs",
    "themselves", "what", "which", "who", "whom", "this", "that", "these", "those",
    "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if",
    "or", "because", "as", "until", "while", "of", "at", "by", "for", "with",
    "about", "against", "between", "into", "through", "during", "before", "after",
    "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
    "under", "again", "further", "then", "once", "here", "there", "when", "where",
    "why", "how", "all", "any", "both", "each", "few", "more", "most", "other",
    "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than", "too",
    "very", "s", "t", "can", "will", "just", "don", "should", "now",
)
_STOPSET = frozenset(STOPWORDS)


@dataclass(frozen=True)
class MetricRecord:
    bleu: float
    fk_grade: float
    length_words: int
    tfidf: float


@dataclass
class IdfTable:
    doc_count: int
    df: dict = field(default_factory=dict)

    def idf(self, word: str) -> float:
        # unseen words count as appearing in one document
        return math.log(self.doc_count / self.df.get(word, 1))


def tokenize_text(text: str) -> list:
    """Lowercased runs of letters/digits; every other non-space char is its own token."""
    return _TOKEN.findall(text.lower())


def is_punctuation(token: str) -> bool:
    return not any(ch.isalnum() for ch in token)


def _words(text: str) -> list:
    return [t for t in tokenize_text(text) if not is_punctuation(t)]


def sentence_bleu(candidate: list, reference: list) -> float:
    if not reference:
        raise ValueError("reference must be non-empty")
    if not candidate:
        return 0.0
    matches, totals = kernels.ngram_stats(list(candidate), list(reference), MAX_ORDER)
    if matches[0] == 0:
        return 0.0
    log_sum = math.log(matches[0] / totals[0])
    for n in range(1, MAX_ORDER):
        log_sum += math.log((matches[n] + 1) / (totals[n] + 1))
    c, r = len(candidate), len(reference)
    bp = 1.0 if c >= r else math.exp(1 - r / c)
    return 100.0 * bp * math.exp(log_sum / MAX_ORDER)


def corpus_bleu(records) -> float:
    """Unweighted mean of sentence scores over ``(candidate, reference)`` token pairs."""
    scores = [sentence_bleu(c, r) for c, r in records]
    if not scores:
        raise ValueError("corpus_bleu needs at least one record")
    return math.fsum(scores) / len(scores)


def count_syllables(word: str) -> int:
    w = word.lower()
    count = len(_VOWEL_GROUP.findall(w))
    if (
        len(w) >= 2
        and w.endswith("e")
        and w[-2] not in _VOWELS
        and not (w.endswith("le") and len(w) >= 3 and w[-3].isalpha() and w[-3] not in _VOWELS)
    ):
        count -= 1
    return max(count, 1)


def count_sentences(text: str) -> int:
    pieces = _SENTENCE_END.split(text)
    return max(1, sum(1 for p in pieces if any(ch.isalnum() for ch in p)))


def flesch_kincaid(text: str) -> float:
    words = _words(text)
    if not words:
        raise ValueError("Flesch-Kincaid needs at least one word")
    syllables = sum(count_syllables(w) for w in words)
    return 0.39 * len(words) / count_sentences(text) + 11.8 * syllables / len(words) - 15.59


def doc_length(text: str) -> int:
    return len(_words(text))


def _content_words(text: str) -> list:
    return [w for w in _words(text) if w not in _STOPSET]


def build_idf(references) -> IdfTable:
    refs = list(references)
    if not refs:
        raise ValueError("build_idf needs at least one reference")
    df = Counter()
    for text in refs:
        df.update(set(_content_words(text)))
    return IdfTable(doc_count=len(refs), df=dict(df))


def tfidf_informativeness(doc: str, idf: IdfTable) -> float:
    counts = Counter(_content_words(doc))
    return math.fsum(tf * idf.idf(w) for w, tf in counts.items())


def score_pair(generated: str, reference: str, idf: IdfTable) -> MetricRecord:
    """All four metrics for one generated doc. A wordless generation gets grade 0."""
    words = doc_length(generated)
    return MetricRecord(
        bleu=sentence_bleu(tokenize_text(generated), tokenize_text(reference)),
        fk_grade=flesch_kincaid(generated) if words else 0.0,
        length_words=words,
        tfidf=tfidf_informativeness(generated, idf),
    )
