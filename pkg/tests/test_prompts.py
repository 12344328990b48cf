from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docbench.corpus import CodeDocPair
from docbench.prompts import STOP_MARKER, Exemplar, build_prompt, select_exemplars

GOLDEN = Path(__file__).parent / "data" / "prompts"

ADD = Exemplar("def add(x, y):\n    return x+y", "Adds two numbers.", "add")
MUL = Exemplar("def mul(x, y):\n    return x*y", "Multiplies two numbers.", "mul")
TARGET = CodeDocPair("sub", "python", "def subtract(x, y):\n    return x-y", "Subtracts two numbers.")


def golden(name):
    return (GOLDEN / name).read_bytes().decode("utf-8")


def test_one_shot_golden():
    prompt = build_prompt(TARGET, [ADD])
    assert prompt.text == golden("fig2_one_shot.txt")
    assert prompt.shots == 1 and prompt.stop_marker == STOP_MARKER == "\nCode:"
    assert prompt.target_id == "sub" and prompt.exemplar_ids == ("add",)


def test_zero_shot_golden():
    assert build_prompt(TARGET, []).text == golden("zero_shot.txt")


def test_two_shot_golden():
    assert build_prompt(TARGET, [ADD, MUL]).text == golden("two_shot.txt")


def test_exemplar_doc_whitespace_collapsed():
    messy = Exemplar("x", "Adds\n  two numbers. ", "m")
    assert "Documentation: Adds two numbers.\n" in build_prompt(TARGET, [messy]).text


def pairs(n):
    return [CodeDocPair(f"t{i}", "python", f"def f{i}(): pass", f"Doc {i} text.") for i in range(n)]


def test_select_exemplars():
    train = pairs(20)
    assert select_exemplars(train, 0, 1) == []
    assert select_exemplars(train, 1, 5) == select_exemplars(train, 1, 5)
    both = select_exemplars(pairs(2), 2, 9)
    assert sorted(e.origin_id for e in both) == ["t0", "t1"]
    with pytest.raises(ValueError):
        select_exemplars(pairs(2), 3, 0)


code_text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=40)


@settings(max_examples=200, deadline=None)
@given(code_text, st.lists(st.tuples(code_text, code_text), max_size=4))
def test_prompt_properties(target_code, shots):
    exemplars = [Exemplar(c.replace("Code:", "C0de:"), d, f"e{i}") for i, (c, d) in enumerate(shots)]
    target = CodeDocPair("t", "python", target_code.replace("Code:", "C0de:"), "d")
    prompt = build_prompt(target, exemplars)
    assert prompt.text == build_prompt(target, exemplars).text
    assert prompt.text.count("Code:\n") == len(exemplars) + 1
    tail = prompt.text[prompt.text.rindex("Code:\n") + len("Code:\n") :]
    assert tail == target.code + "\nDocumentation:"
    assert prompt.text.endswith("\nDocumentation:")
