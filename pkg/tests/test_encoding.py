import pytest
from hypothesis import given
import hypothesis.strategies as st

from src.encoding import (
    MAX_U64,
    pack_fields,
    pack_map,
    read_flag,
    read_text,
    read_u64,
    u64,
    unpack_fields,
    unpack_map,
)
from src.errors import MalformedMessage


@given(st.lists(st.binary(max_size=40), max_size=8))
def test_fields_round_trip(fields):
    assert unpack_fields(pack_fields(fields)) == fields
    assert unpack_fields(pack_fields(fields), len(fields)) == fields


def test_unpack_rejects_bad_framing():
    packed = pack_fields([b"abc", b"de"])
    with pytest.raises(MalformedMessage):
        unpack_fields(packed[:-1])
    with pytest.raises(MalformedMessage):
        unpack_fields(packed + b"\x00")
    with pytest.raises(MalformedMessage):
        unpack_fields(packed, 3)


def test_u64_bounds():
    assert read_u64(u64(MAX_U64)) == MAX_U64
    with pytest.raises(ValueError):
        u64(-1)
    with pytest.raises(ValueError):
        u64(MAX_U64 + 1)
    with pytest.raises(MalformedMessage):
        read_u64(b"\x00" * 7)


def test_flag_and_text_validation():
    assert read_flag(b"\x01") is True
    with pytest.raises(MalformedMessage):
        read_flag(b"\x02")
    with pytest.raises(MalformedMessage):
        read_text(b"\xff\xfe")


def test_map_is_canonical():
    data = {"b": "2", "a": "1"}
    assert unpack_map(pack_map(data)) == data
    assert pack_map(data) == pack_map(dict(sorted(data.items())))
    unsorted = pack_fields([b"b", b"2", b"a", b"1"])
    with pytest.raises(MalformedMessage):
        unpack_map(unsorted)
    with pytest.raises(MalformedMessage):
        unpack_map(pack_fields([b"a"]))
