import pytest
from hypothesis import given, strategies as st

from credgate.encoding import (
    CanonicalizationError,
    b64u_decode,
    b64u_encode,
    canonical_bytes,
)


def test_keys_sorted():
    assert canonical_bytes({"b": 1, "a": 2}) == b'{"a":2,"b":1}'


def test_nested_sorting_manual_fixture():
    # Expected bytes written out by hand, not produced by the implementation.
    doc = {
        "z": {"b": [1, 2, {"y": True, "a": "ü"}], "a": "x"},
        "k": [],
        "a": 10,
    }
    expected = '{"a":10,"k":[],"z":{"a":"x","b":[1,2,{"a":"ü","y":true}]}}'.encode("utf-8")
    assert canonical_bytes(doc) == expected


def test_no_whitespace_and_shortest_ints():
    assert canonical_bytes({"n": 1000000}) == b'{"n":1000000}'
    assert canonical_bytes([1, -2, 0]) == b"[1,-2,0]"


def test_utf8_byte_order_for_keys():
    # "Z" (0x5a) sorts before "a" (0x61) in UTF-8, and multibyte keys after.
    assert canonical_bytes({"a": 1, "Z": 2, "é": 3}) == '{"Z":2,"a":1,"é":3}'.encode()


def test_float_rejected():
    with pytest.raises(CanonicalizationError):
        canonical_bytes({"x": 1.5})


def test_null_rejected():
    with pytest.raises(CanonicalizationError):
        canonical_bytes({"x": None})


def test_non_string_key_rejected():
    with pytest.raises(CanonicalizationError):
        canonical_bytes({1: "x"})


def test_deterministic():
    doc = {"k": [True, False, "s"], "m": {"q": 7}}
    assert canonical_bytes(doc) == canonical_bytes(doc)


@given(st.binary(max_size=200))
def test_b64u_round_trip(data):
    encoded = b64u_encode(data)
    assert "=" not in encoded
    assert b64u_decode(encoded) == data


def test_b64u_rejects_garbage():
    with pytest.raises(ValueError):
        b64u_decode("not base64url!!")
    with pytest.raises(ValueError):
        b64u_decode("a+b/")
