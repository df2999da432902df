import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specforge.errors import PatchError
from specforge.patcher import (FENCE, CodeLevel, PatchBlock, apply_patch,
                               count_patch_blocks, extract_function, locate_function,
                               make_source, parse_all_patches, parse_patch)

LEVELS = [CodeLevel.PSEUDO, CodeLevel.SCRIPT, CodeLevel.SYNTH]


def wrap(name, body):
    return f"{FENCE}\nSUBFUNCTION: {name}\n{body}\n{FENCE}"


# --- parse_patch -------------------------------------------------------------

def test_parse_basic_block():
    block = parse_patch(wrap("add_round_key", "def add_round_key(b, k):\n    return b ^ k"))
    assert block.subfunction_name == "add_round_key"
    assert block.body == "def add_round_key(b, k):\n    return b ^ k\n"


def test_fence_must_be_exactly_20():
    for n in (19, 21):
        raw = "*" * n + "\nSUBFUNCTION: f\nbody\n" + "*" * n
        with pytest.raises(PatchError) as err:
            parse_patch(raw)
        assert err.value.code == "NO_FENCE_FOUND"


def test_prose_around_block_ignored():
    raw = "Sure, here is the function:\n\n" + wrap("f", "FUNCTION f\nEND FUNCTION") + \
          "\n\nLet me know if it helps."
    block = parse_patch(raw)
    assert block.subfunction_name == "f"


def test_unterminated_fence():
    with pytest.raises(PatchError) as err:
        parse_patch(FENCE + "\nSUBFUNCTION: f\nbody with no close")
    assert err.value.code == "UNTERMINATED_FENCE"


def test_missing_name_label():
    with pytest.raises(PatchError) as err:
        parse_patch(FENCE + "\nnot a label\nbody\n" + FENCE)
    assert err.value.code == "MISSING_NAME_LABEL"


def test_first_block_wins_and_count():
    raw = wrap("first", "a") + "\n" + wrap("second", "b")
    assert parse_patch(raw).subfunction_name == "first"
    assert count_patch_blocks(raw) == 2
    names = [b.subfunction_name for b in parse_all_patches(raw)]
    assert names == ["first", "second"]


def test_trailing_newline_normalized():
    block = parse_patch(wrap("f", "line\n\n\n"))
    assert block.body == "line\n"


# --- grammars and splicing ----------------------------------------------------

SKELETONS = {
    CodeLevel.PSEUDO: "",
    CodeLevel.SCRIPT: "# integrated script level\n",
    CodeLevel.SYNTH: "#include <cstdint>\n",
}


def make_body(level, name, lines_of_code):
    if level == CodeLevel.PSEUDO:
        inner = "\n".join(f"  STEP {i} of {name}" for i in range(lines_of_code))
        return f"FUNCTION {name}\n{inner}\nEND FUNCTION"
    if level == CodeLevel.SCRIPT:
        inner = "\n".join(f"    x{i} = {i}" for i in range(lines_of_code))
        return f"def {name}(a):\n{inner}\n    return a"
    inner = "\n".join(f"    uint32_t x{i} = {i}u;" for i in range(lines_of_code))
    return f"uint32_t {name}(uint32_t a) {{\n{inner}\n    return a;\n}}"


def test_locate_present_and_absent():
    body = make_body(CodeLevel.SCRIPT, "f1", 2)
    source = make_source(CodeLevel.SCRIPT, SKELETONS[CodeLevel.SCRIPT] + body + "\n")
    assert locate_function(source, "f1") is not None
    assert locate_function(source, "missing") is None


def test_duplicate_definition_is_ambiguous():
    body = make_body(CodeLevel.SCRIPT, "dup", 1)
    text = body + "\n\n" + body + "\n"
    with pytest.raises(PatchError) as err:
        make_source(CodeLevel.SCRIPT, text)
    assert err.value.code == "AMBIGUOUS_DEFINITION"


@pytest.mark.parametrize("level", LEVELS)
def test_replace_changes_only_the_span(level):
    a = make_body(level, "alpha", 3)
    b = make_body(level, "beta", 2)
    source = make_source(level, SKELETONS[level])
    source = apply_patch(source, PatchBlock("alpha", a + "\n"))
    source = apply_patch(source, PatchBlock("beta", b + "\n"))
    new_alpha = make_body(level, "alpha", 5)
    patched = apply_patch(source, PatchBlock("alpha", new_alpha + "\n"))
    assert extract_function(patched, "alpha") == new_alpha + "\n"
    assert extract_function(patched, "beta") == b + "\n"
    # line-count arithmetic: replacing a 3-line body with 5 (+2 lines)
    assert len(patched.text.split("\n")) == len(source.text.split("\n")) + 2


@pytest.mark.parametrize("level", LEVELS)
def test_first_insertion_appends(level):
    body = make_body(level, "solo", 2) + "\n"
    source = apply_patch(make_source(level, SKELETONS[level]), PatchBlock("solo", body))
    assert source.text.startswith(SKELETONS[level].rstrip("\n") or body.split("\n")[0])
    assert extract_function(source, "solo") == body


@pytest.mark.parametrize("level", LEVELS)
def test_idempotence(level):
    body = make_body(level, "f", 3) + "\n"
    source = make_source(level, SKELETONS[level])
    once = apply_patch(source, PatchBlock("f", body))
    twice = apply_patch(once, PatchBlock("f", body))
    assert once.text == twice.text


# --- randomized property suite -------------------------------------------------

NAMES = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"]


def random_case(rng, level):
    names = rng.sample(NAMES, rng.randint(1, 5))
    source = make_source(level, SKELETONS[level])
    for name in names:
        source = apply_patch(
            source, PatchBlock(name, make_body(level, name, rng.randint(1, 6)) + "\n"))
    target = rng.choice(names + [rng.choice(["iota", "kappa", "lam"])])
    patch_body = make_body(level, target, rng.randint(1, 6)) + "\n"
    return source, PatchBlock(target, patch_body), names


def span_masked_equal(before, after, span):
    """All bytes outside the replaced line span unchanged."""
    b_lines = before.text.split("\n")
    a_lines = after.text.split("\n")
    prefix = b_lines[:span.start_line - 1]
    suffix = b_lines[span.end_line:]
    return (a_lines[:len(prefix)] == prefix
            and (a_lines[len(a_lines) - len(suffix):] == suffix if suffix else True))


def check_patcher_properties(cases_per_level=1000, seed=20260811):
    rng = random.Random(seed)
    checked = 0
    for level in LEVELS:
        for _ in range(cases_per_level):
            source, block, _names = random_case(rng, level)
            span = locate_function(source, block.subfunction_name)
            once = apply_patch(source, block)
            twice = apply_patch(once, block)
            assert once.text == twice.text, "idempotence"
            assert extract_function(once, block.subfunction_name) == block.body, \
                "round-trip extraction"
            if span is not None:
                assert span_masked_equal(source, once, span), "locality"
            checked += 1
    return checked


def test_randomized_property_suite_small():
    assert check_patcher_properties(cases_per_level=150) == 450


@settings(max_examples=150, deadline=None)
@given(name=st.sampled_from(NAMES),
       n_lines=st.integers(min_value=1, max_value=8),
       level=st.sampled_from(LEVELS),
       prose=st.text(alphabet=string.ascii_letters + " .\n", max_size=80))
def test_parse_roundtrip_hypothesis(name, n_lines, level, prose):
    body = make_body(level, name, n_lines)
    raw = prose + "\n" + wrap(name, body) + "\n" + prose
    block = parse_patch(raw)
    assert block.subfunction_name == name
    assert block.body == body + "\n"
