"""Time the compiled kernels against the pure-Python fallback.

    python3 bench/bench_kernels.py [--records 2000] [--repeat 5]

Inputs are synthetic but shaped like the corpus: ~40-line functions with
comments and literals for the scan, doc-length token lists for the n-grams.
"""

import argparse
import random
import statistics
import sys
import timeit

from docbench import _pykernels

try:
    from docbench import _ckernels
except ImportError:
    _ckernels = None

LINES = [
    '    String s = "http://example.com/*x*/"; // trailing note',
    "    int total = a / b; /* ratio */",
    "    if (x > 0) { count++; }",
    "    /** doc block",
    "     * continues here */",
    "    char q = '\\''; // quote",
    '    text = """triple // inside"""',
    "    return helper(a, b) # done",
]


def make_sources(n: int, rng: random.Random) -> list:
    return ["\n".join(rng.choice(LINES) for _ in range(40)) + "\n" for _ in range(n)]


def make_pairs(n: int, rng: random.Random) -> list:
    vocab = [f"w{i}" for i in range(300)]
    return [([rng.choice(vocab) for _ in range(rng.randint(5, 20))], [rng.choice(vocab) for _ in range(rng.randint(5, 20))]) for _ in range(n)]


def bench(label, fn, repeat):
    times = timeit.repeat(fn, number=1, repeat=repeat)
    best, med = min(times), statistics.median(times)
    print(f"{label:<28} best {best * 1000:9.2f} ms   median {med * 1000:9.2f} ms")
    return best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--records", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _ckernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first", file=sys.stderr)
        return 1

    rng = random.Random(args.seed)
    sources = make_sources(args.records, rng)
    pairs = make_pairs(args.records * 5, rng)
    print(f"{args.records} sources (~{sum(map(len, sources)) // 1024} KiB), {len(pairs)} token pairs, best of {args.repeat}")

    for lang in (0, 1):
        assert all(_ckernels.scan(s, lang) == _pykernels.scan(s, lang) for s in sources[:50])
    assert all(_ckernels.ngram_stats(c, r, 4) == _pykernels.ngram_stats(c, r, 4) for c, r in pairs[:200])

    rows = []
    for name, mod in (("python", _pykernels), ("compiled", _ckernels)):
        scan_t = bench(f"scan/{name}", lambda m=mod: [m.scan(s, 0) for s in sources], args.repeat)
        ngram_t = bench(f"ngram_stats/{name}", lambda m=mod: [m.ngram_stats(c, r, 4) for c, r in pairs], args.repeat)
        rows.append((scan_t, ngram_t))
    (ps, pn), (cs, cn) = rows
    print(f"speedup: scan x{ps / cs:.1f}, ngram_stats x{pn / cn:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
