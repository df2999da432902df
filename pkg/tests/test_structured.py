import pytest

from specforge.structured import (FencedBlockError, extract_fenced, make_fenced_json,
                                  parse_fenced_json)


def test_roundtrip():
    text = "prose\n" + make_fenced_json("plan", {"a": [1, 2]}) + "\nmore prose"
    assert parse_fenced_json(text, "plan") == {"a": [1, 2]}


def test_first_matching_fence_wins():
    text = (make_fenced_json("plan", {"which": "first"}) + "\n"
            + make_fenced_json("plan", {"which": "second"}))
    assert parse_fenced_json(text, "plan")["which"] == "first"


def test_tag_mismatch():
    text = make_fenced_json("verdict", {"v": 1})
    with pytest.raises(FencedBlockError) as err:
        parse_fenced_json(text, "plan")
    assert err.value.code == "NO_BLOCK"


def test_unterminated():
    with pytest.raises(FencedBlockError) as err:
        extract_fenced("```plan\n{\"a\": 1}", "plan")
    assert err.value.code == "UNTERMINATED_BLOCK"


def test_bad_json():
    with pytest.raises(FencedBlockError) as err:
        parse_fenced_json("```plan\nnot json\n```", "plan")
    assert err.value.code == "BAD_JSON"
