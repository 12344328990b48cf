"""Deterministic synthetic CodeSearchNet-style records for tests."""

import json
import random
from pathlib import Path

LANGUAGES = ("ruby", "javascript", "go", "python", "java", "php")
VERBS = ["add", "remove", "find", "parse", "load", "build", "check", "count", "merge", "sort", "split", "render"]
NOUNS = ["item", "file", "node", "user", "token", "path", "record", "buffer", "entry", "value", "row", "key"]
ADJ = ["given", "current", "first", "last", "cached", "empty", "valid", "next", "total", "unique"]

TEMPLATES = {
    "python": "def {name}({a}, {b}):\n    # combine inputs\n    return {a} + {b}\n",
    "java": "public int {name}(int {a}, int {b}) {{\n    // combine inputs\n    return {a} + {b};\n}}\n",
    "javascript": "function {name}({a}, {b}) {{\n  // combine inputs\n  return {a} + {b};\n}}\n",
    "go": "func {name}({a}, {b} int) int {{\n\t// combine inputs\n\treturn {a} + {b}\n}}\n",
    "php": "function {name}(${a}, ${b}) {{\n    // combine inputs\n    return ${a} + ${b};\n}}\n",
    "ruby": "def {name}({a}, {b})\n  # combine inputs\n  {a} + {b}\nend\n",
}


def make_pair(lang: str, i: int, rng: random.Random, split: str = "test") -> dict:
    verb, noun, adj = rng.choice(VERBS), rng.choice(NOUNS), rng.choice(ADJ)
    a, b = rng.sample(NOUNS, 2)
    name = f"{verb}_{noun}_{i}"
    doc = f"{verb.capitalize()} the {adj} {noun} using {a} and {b}."
    return {
        "id": f"{lang}-{split}-{i:05d}",
        "language": lang,
        "code": TEMPLATES[lang].format(name=name, a=a, b=b),
        "docstring": doc,
        "docstring_tokens": doc.rstrip(".").split(),
    }


def write_corpus(root, languages=("python",), sizes=None, seed: int = 7) -> Path:
    """``root/<lang>/<split>.jsonl`` with ``sizes[split]`` records each."""
    sizes = sizes or {"train": 30, "test": 50}
    root = Path(root)
    for lang in languages:
        rng = random.Random(f"{seed}:{lang}")
        for split, n in sizes.items():
            d = root / lang
            d.mkdir(parents=True, exist_ok=True)
            with open(d / f"{split}.jsonl", "w", encoding="utf-8") as fh:
                for i in range(n):
                    fh.write(json.dumps(make_pair(lang, i, rng, split)) + "\n")
    return root
